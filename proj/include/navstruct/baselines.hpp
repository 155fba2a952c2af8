#pragma once

// Comparison methods: all-I greedy under either buffer model, all-I plus
// landmark edges with add/subtract passes, and landmark structures costed
// with an unbounded client buffer.

#include <algorithm>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "navstruct/cost.hpp"
#include "navstruct/errors.hpp"
#include "navstruct/evaluator.hpp"
#include "navstruct/landmark.hpp"
#include "navstruct/refiner.hpp"
#include "navstruct/scenario.hpp"

namespace navstruct {

// ---------------------------------------------------------------------------
// Unbounded buffer

namespace inf_detail {

struct HeldKey {
  int t;
  Mdu prev;
  Mdu cur;
  std::vector<Mdu> held;  // sorted
  bool operator==(const HeldKey&) const = default;
};

struct HeldHash {
  std::size_t operator()(const HeldKey& k) const noexcept {
    std::size_t h = std::hash<long long>{}((static_cast<long long>(k.t) << 40) ^
                                           (static_cast<long long>(k.prev + 1) << 20) ^ k.cur);
    for (Mdu m : k.held) h = h * 1000003u ^ static_cast<std::size_t>(m);
    return h;
  }
};

inline std::vector<Mdu> with(std::vector<Mdu> held, std::initializer_list<Mdu> extra) {
  for (Mdu m : extra) {
    if (m == kNone) continue;
    auto it = std::lower_bound(held.begin(), held.end(), m);
    if (it == held.end() || *it != m) held.insert(it, m);
  }
  return held;
}

class Engine {
 public:
  Engine(const Scenario& sc, const StructureIndex& idx) : sc_(sc), idx_(idx) {}

  double state(int t, Mdu prev, Mdu cur, const std::vector<Mdu>& held) {
    HeldKey key{t, prev, cur, held};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    double total = 0.0;
    if (const auto* row = dp::row_or_throw(sc_, prev, cur)) {
      const double g = sc_.lifetime.tail(t + 1);
      for (const auto& tr : *row)
        if (tr.prob != 0.0) total += tr.prob * decide(t, cur, held, tr.next, g);
    }
    memo_.emplace(std::move(key), total);
    return total;
  }

  std::size_t entries() const noexcept { return memo_.size(); }

 private:
  double decide(int t, Mdu cur, const std::vector<Mdu>& held, Mdu j, double g) {
    auto cont = [&](const std::vector<Mdu>& next_held) { return g == 0.0 ? 0.0 : g * state(t + 1, cur, j, next_held); };
    if (std::binary_search(held.begin(), held.end(), j)) return cont(held);  // already decoded

    double best = kUnavailable;
    // One hop from any decoded MDU; the result is the same set either way.
    double one = kUnavailable;
    for (Mdu h : held) one = std::min(one, idx_.one_hop(h, j));
    const auto held_j = with(held, {j});
    double cont_j = -1.0;
    auto cont_held_j = [&] {
      if (cont_j < 0.0) cont_j = cont(held_j);
      return cont_j;
    };
    if (one != kUnavailable) best = one + cont_held_j();
    // Two hops through an intermediate that is decoded on the way.
    for (Mdu eta : idx_.predecessors(j)) {
      if (std::binary_search(held.begin(), held.end(), eta)) continue;  // covered by one hop
      double first = kUnavailable;
      for (Mdu h : held) first = std::min(first, idx_.one_hop(h, eta));
      if (first == kUnavailable) continue;
      const double bits = first + idx_.one_hop(eta, j);
      if (bits >= best) continue;
      best = std::min(best, bits + cont(with(held, {eta, j})));
    }
    // Independent reconstruction; a combo also decodes its I-MDU source.
    const auto& z = idx_.zero_hop_choice(j);
    if (z.bits < best) best = std::min(best, z.bits + cont(with(held, {j, z.via})));
    return best;
  }

  const Scenario& sc_;
  const StructureIndex& idx_;
  std::unordered_map<HeldKey, double, HeldHash> memo_;
};

}  // namespace inf_detail

/// Expected cost when the client keeps every decoded MDU: revisits are free
/// and any decoded MDU may serve as a predictor.
inline double eval_unbounded(const Scenario& scenario, const SizeTable& sizes, const Structure& structure,
                             const EvalOptions& options = {}) {
  StructureIndex idx(structure, sizes);
  const Mdu s = scenario.graph.start();
  const auto& z = idx.zero_hop_choice(s);
  inf_detail::Engine engine(scenario, idx);
  const double first = engine.state(0, kNone, s, inf_detail::with({}, {s, z.via}));
  return z.bits + (options.weight_first_switch ? scenario.lifetime.tail(1) : 1.0) * first;
}

// ---------------------------------------------------------------------------
// Baseline runner

enum class BaselineVariant { flex_ga, fixed_ga, flex_lm_i, inf_lm };

inline std::string to_string(BaselineVariant v) {
  switch (v) {
    case BaselineVariant::flex_ga: return "flex-ga";
    case BaselineVariant::fixed_ga: return "fixed-ga";
    case BaselineVariant::flex_lm_i: return "flex-lm-i";
    case BaselineVariant::inf_lm: return "inf-lm";
  }
  return "?";
}

inline BaselineVariant parse_baseline(const std::string& s) {
  if (s == "flex-ga") return BaselineVariant::flex_ga;
  if (s == "fixed-ga") return BaselineVariant::fixed_ga;
  if (s == "flex-lm-i") return BaselineVariant::flex_lm_i;
  if (s == "inf-lm") return BaselineVariant::inf_lm;
  throw InvalidInput("unknown baseline '" + s + "' (expected flex-ga, fixed-ga, flex-lm-i or inf-lm)");
}

struct BaselineParams {
  double lambda = 0.0;
  RefinerParams refine;  // lambda and buffer are overridden per variant
  int max_lloyd_iters = 100;
};

struct BaselineResult {
  BaselineVariant variant = BaselineVariant::flex_ga;
  Structure structure;
  double expected_cost = 0.0;
  double storage = 0.0;
  std::size_t landmarks = 0;
  std::vector<RefineStep> log;
};

inline Structure all_intra_structure(std::size_t n) {
  Structure s;
  for (std::size_t j = 0; j < n; ++j) s.intra.insert(static_cast<Mdu>(j));
  return s;
}

inline std::vector<Partition> plan_landmarks(const Scenario& scenario, const SizeTable& sizes, double lambda,
                                             int max_lloyd_iters) {
  const auto q = aggregate_switch_probabilities(scenario);
  PlannerParams pp{planner_weight(lambda, scenario.lifetime), max_lloyd_iters, &q};
  return tsvq(scenario, sizes, pp);
}

inline BaselineResult run_baseline(const Scenario& scenario, const SizeTable& sizes, const BaselineParams& params,
                                   BaselineVariant variant) {
  BaselineResult out;
  out.variant = variant;
  RefinerParams rp = params.refine;
  rp.lambda = params.lambda;
  const std::size_t n = sizes.size();

  auto take = [&](const RefineResult& r) {
    out.structure = r.structure;
    out.expected_cost = r.expected_cost;
    out.storage = r.storage;
    for (const auto& p : r.passes) out.log.push_back(p);
  };

  switch (variant) {
    case BaselineVariant::flex_ga:
    case BaselineVariant::fixed_ga: {
      rp.buffer = variant == BaselineVariant::flex_ga ? BufferModel::flexible : BufferModel::fixed;
      rp.allow_pairs = true;
      take(greedy_refine(scenario, sizes, all_intra_structure(n), rp));
      break;
    }
    case BaselineVariant::flex_lm_i: {
      rp.buffer = BufferModel::flexible;
      auto parts = plan_landmarks(scenario, sizes, params.lambda, params.max_lloyd_iters);
      Structure init = build_initial_structure(parts, sizes);
      for (std::size_t j = 0; j < n; ++j) init.intra.insert(static_cast<Mdu>(j));
      auto added = greedy_refine(scenario, sizes, init, rp);
      auto trimmed = greedy_subtract(scenario, sizes, added.structure, rp);
      for (const auto& p : added.passes) out.log.push_back(p);
      out.structure = trimmed.structure;
      out.expected_cost = trimmed.expected_cost;
      out.storage = trimmed.storage;
      for (const auto& p : trimmed.passes) out.log.push_back(p);
      out.landmarks = parts.size();
      break;
    }
    case BaselineVariant::inf_lm: {
      rp.buffer = BufferModel::flexible;
      auto parts = plan_landmarks(scenario, sizes, params.lambda, params.max_lloyd_iters);
      take(greedy_refine(scenario, sizes, build_initial_structure(parts, sizes), rp));
      out.expected_cost = eval_unbounded(scenario, sizes, out.structure, rp.eval);
      out.landmarks = parts.size();
      break;
    }
  }
  if (out.landmarks == 0) out.landmarks = out.structure.landmarks.size();
  return out;
}

}  // namespace navstruct
