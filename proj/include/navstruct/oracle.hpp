#pragma once

// Independent checks for the evaluator: plain recursion without a table,
// brute-force policy enumeration on tiny instances, and Monte-Carlo sessions
// driven by an extracted policy.
//
// Nothing here uses StructureIndex or the dp engines; overheads come straight
// from the Structure and SizeTable.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "navstruct/cost.hpp"
#include "navstruct/errors.hpp"
#include "navstruct/evaluator.hpp"
#include "navstruct/parallel.hpp"
#include "navstruct/scenario.hpp"

namespace navstruct {

inline constexpr std::size_t kOracleMaxMdus = 8;
inline constexpr int kOracleMaxLifetime = 5;
inline constexpr std::size_t kEnumerateMaxMdus = 3;
inline constexpr int kEnumerateMaxLifetime = 2;

namespace oracle_detail {

inline double one_hop_or_inf(const Structure& s, const SizeTable& sizes, Mdu a, Mdu b) {
  if (a == kNone || a == b) return kUnavailable;
  return one_hop_overhead(s, sizes, a, b).value_or(kUnavailable);
}

inline const std::vector<Transition>& row_of(const Scenario& sc, Mdu prev, Mdu cur) {
  static const std::vector<Transition> empty;
  const auto* row = sc.nav.find_row(prev, cur);
  return row ? *row : empty;
}

/// Buffer contents a flexible decision may keep: {buffer, cur}, deduplicated.
inline std::vector<Mdu> keep_options(Mdu buffer, Mdu cur) {
  if (buffer == cur) return {cur};
  return {buffer, cur};
}

struct Recursion {
  const Scenario& sc;
  const SizeTable& sizes;
  const Structure& s;

  double fixed(int t, Mdu prev, Mdu cur) const {
    double total = 0.0;
    const double g = sc.lifetime.tail(t + 1);
    for (const auto& tr : row_of(sc, prev, cur)) {
      const Mdu j = tr.next;
      const double bits = std::min(zero_hop_overhead(s, sizes, j), one_hop_or_inf(s, sizes, cur, j));
      const double future = g > 0.0 ? g * fixed(t + 1, cur, j) : 0.0;
      total += tr.prob * (bits + future);
    }
    return total;
  }

  double flexible(int t, Mdu prev, Mdu cur, Mdu buffer) const {
    double total = 0.0;
    const double g = sc.lifetime.tail(t + 1);
    const auto keep = keep_options(buffer, cur);
    for (const auto& tr : row_of(sc, prev, cur)) {
      const Mdu j = tr.next;
      // Continuation per distinct next-buffer value, computed once.
      std::map<Mdu, double> future;
      auto fut = [&](Mdu b) {
        if (g == 0.0) return 0.0;
        auto it = future.find(b);
        if (it != future.end()) return it->second;
        double v = g * flexible(t + 1, cur, j, b);
        future.emplace(b, v);
        return v;
      };
      double best = kUnavailable;
      for (Mdu b : keep) {
        const double r = one_hop_or_inf(s, sizes, b, j);
        if (r != kUnavailable) best = std::min(best, r + fut(b));
      }
      for (Mdu eta = 0; static_cast<std::size_t>(eta) < sc.graph.size(); ++eta) {
        if (eta == j) continue;
        const double second = one_hop_or_inf(s, sizes, eta, j);
        if (second == kUnavailable) continue;
        double first = kUnavailable;
        for (Mdu b : keep) first = std::min(first, one_hop_or_inf(s, sizes, b, eta));
        if (first == kUnavailable) continue;
        best = std::min(best, first + second + fut(eta));
      }
      const double zero = zero_hop_overhead(s, sizes, j);
      for (Mdu b : keep) best = std::min(best, zero + fut(b));
      total += tr.prob * best;
    }
    return total;
  }
};

}  // namespace oracle_detail

/// Expected cost by direct recursion, no memo table. Refuses N > 8 or t_max > 5.
inline double unmemoized_eval(const Scenario& scenario, const SizeTable& sizes, const Structure& structure,
                              BufferModel buffer, const EvalOptions& options = {}) {
  if (scenario.graph.size() > kOracleMaxMdus || scenario.lifetime.t_max() > kOracleMaxLifetime)
    throw OracleRefusal("unmemoized oracle handles at most " + std::to_string(kOracleMaxMdus) +
                        " MDUs and t_max " + std::to_string(kOracleMaxLifetime));
  const Mdu s = scenario.graph.start();
  oracle_detail::Recursion rec{scenario, sizes, structure};
  const double first = buffer == BufferModel::fixed ? rec.fixed(0, kNone, s) : rec.flexible(0, kNone, s, kNone);
  return zero_hop_overhead(structure, sizes, s) + (options.weight_first_switch ? scenario.lifetime.tail(1) : 1.0) * first;
}

// ---------------------------------------------------------------------------
// Exhaustive policy enumeration

struct EnumerationResult {
  double best_cost = kUnavailable;
  std::uint64_t policies = 0;  // complete policies whose cost was evaluated
};

namespace oracle_detail {

struct Move {
  double bits;
  Mdu next_buffer;
};

/// Every feasible action for one decision, as (bits, next buffer) pairs.
/// Distinct 2-hop first legs are kept separate even when they share an
/// intermediate, since a policy may pick either.
inline std::vector<Move> feasible_moves(const Scenario& sc, const SizeTable& sizes, const Structure& s,
                                        BufferModel buffer_model, Mdu cur, Mdu buffer, Mdu j) {
  std::vector<Move> moves;
  if (buffer_model == BufferModel::fixed) {
    moves.push_back({zero_hop_overhead(s, sizes, j), kNone});
    if (double r = one_hop_or_inf(s, sizes, cur, j); r != kUnavailable) moves.push_back({r, kNone});
    return moves;
  }
  const auto keep = keep_options(buffer, cur);
  const double zero = zero_hop_overhead(s, sizes, j);
  for (Mdu b : keep) moves.push_back({zero, b});
  for (Mdu b : keep)
    if (double r = one_hop_or_inf(s, sizes, b, j); r != kUnavailable) moves.push_back({r, b});
  for (Mdu eta = 0; static_cast<std::size_t>(eta) < sc.graph.size(); ++eta) {
    if (eta == j) continue;
    const double second = one_hop_or_inf(s, sizes, eta, j);
    if (second == kUnavailable) continue;
    for (Mdu b : keep)
      if (double r = one_hop_or_inf(s, sizes, b, eta); r != kUnavailable) moves.push_back({r + second, eta});
  }
  return moves;
}

struct Enumerator {
  const Scenario& sc;
  const SizeTable& sizes;
  const Structure& s;
  BufferModel model;
  std::uint64_t cap;
  std::uint64_t count = 0;

  using StateKey = std::tuple<Mdu, Mdu, Mdu>;  // prev, cur, buffer

  /// Minimum over all policies of the remaining cost, given the weighted
  /// state distribution at layer t (weights already include lifetime factors).
  double layer(int t, const std::map<StateKey, double>& dist) {
    struct Decision {
      StateKey state;
      Mdu target;
      double weight;  // state weight times switch probability
      std::vector<Move> moves;
    };
    std::vector<Decision> decisions;
    for (const auto& [state, w] : dist) {
      auto [prev, cur, buf] = state;
      for (const auto& tr : row_of(sc, prev, cur)) {
        if (tr.prob == 0.0) continue;
        decisions.push_back({state, tr.next, w * tr.prob, feasible_moves(sc, sizes, s, model, cur, buf, tr.next)});
      }
    }
    const double g = sc.lifetime.tail(t + 1);
    if (g == 0.0 || decisions.empty()) {
      // Nothing follows this layer, so each decision is independent and the
      // best joint choice is the sum of per-decision minima.
      double total = 0.0;
      for (const auto& d : decisions) {
        double best = kUnavailable;
        for (const auto& m : d.moves) best = std::min(best, m.bits);
        total += d.weight * best;
      }
      ++count;
      return total;
    }
    // Odometer over the joint choice for this layer.
    std::vector<std::size_t> pick(decisions.size(), 0);
    double best = kUnavailable;
    while (true) {
      if (count > cap) throw OracleRefusal("policy enumeration exceeded its cap");
      double here = 0.0;
      std::map<StateKey, double> next;
      for (std::size_t d = 0; d < decisions.size(); ++d) {
        const auto& dec = decisions[d];
        const auto& m = dec.moves[pick[d]];
        here += dec.weight * m.bits;
        const Mdu cur = std::get<1>(dec.state);
        const Mdu nb = model == BufferModel::fixed ? kNone : m.next_buffer;
        next[{cur, dec.target, nb}] += dec.weight * g;
      }
      best = std::min(best, here + layer(t + 1, next));
      std::size_t d = 0;
      while (d < pick.size() && ++pick[d] == decisions[d].moves.size()) pick[d++] = 0;
      if (d == pick.size()) break;
    }
    return best;
  }
};

}  // namespace oracle_detail

/// Minimum expected cost over every deterministic policy mapping decision
/// points (t, prev, cur, buffer, target) to feasible actions. Policies are
/// costed by forward propagation of the weighted state distribution. Refuses
/// N > 3 or t_max > 2.
inline EnumerationResult enumerate_policies(const Scenario& scenario, const SizeTable& sizes,
                                            const Structure& structure, BufferModel buffer,
                                            const EvalOptions& options = {},
                                            std::uint64_t max_policies = 50'000'000) {
  if (scenario.graph.size() > kEnumerateMaxMdus || scenario.lifetime.t_max() > kEnumerateMaxLifetime)
    throw OracleRefusal("policy enumeration handles at most " + std::to_string(kEnumerateMaxMdus) +
                        " MDUs and t_max " + std::to_string(kEnumerateMaxLifetime));
  oracle_detail::Enumerator en{scenario, sizes, structure, buffer, max_policies};
  const Mdu s = scenario.graph.start();
  const double w0 = options.weight_first_switch ? scenario.lifetime.tail(1) : 1.0;
  std::map<oracle_detail::Enumerator::StateKey, double> dist{{{kNone, s, kNone}, w0}};
  EnumerationResult out;
  out.best_cost = zero_hop_overhead(structure, sizes, s) + en.layer(0, dist);
  out.policies = en.count;
  return out;
}

// ---------------------------------------------------------------------------
// Monte-Carlo sessions

/// How session lifetimes are drawn.
enum class LifetimeSampling {
  /// T ~ Poisson(mu) truncated to [0, t_max] and renormalized.
  truncated_poisson,
  /// Reproduces the evaluator's nesting: the first switch always happens (or
  /// with probability g(1) when first-switch weighting is on); after the
  /// switch decided at instant t, another follows with probability g(t+1).
  consistent,
};

struct SessionTrace {
  std::vector<Mdu> path;
  int lifetime = 0;  // number of switches
  std::vector<Action> actions;
  double bits = 0.0;
};

struct SimOptions {
  std::size_t sessions = 10000;
  std::uint64_t seed = 1;
  LifetimeSampling sampling = LifetimeSampling::truncated_poisson;
  bool weight_first_switch = false;
  std::size_t keep_traces = 0;  // traces retained from the first sessions
  std::size_t threads = 0;      // 0: NAVSTRUCT_THREADS or 1
};

struct SimResult {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t sessions = 0;
  std::vector<SessionTrace> traces;
};

namespace oracle_detail {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Uniform double in [0, 1) from the top 53 bits; platform independent.
inline double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline std::string describe(const PolicyKey& k) {
  return "(t=" + std::to_string(k.t) + ", prev=" + std::to_string(k.prev) + ", cur=" + std::to_string(k.cur) +
         ", buffer=" + std::to_string(k.buffer) + ", target=" + std::to_string(k.target) + ")";
}

}  // namespace oracle_detail

/// Simulates sessions following `policy` and reports the mean transmitted bits.
///
/// Bits are recomputed from the structure for every action, and infeasible
/// actions are rejected, so a policy cannot report costs the structure does
/// not support. Each session seeds its own generator from (seed, index) and
/// the sum runs in index order, so results do not depend on the thread count.
inline SimResult simulate_sessions(const Scenario& scenario, const SizeTable& sizes, const Structure& structure,
                                   const Policy& policy, BufferModel buffer, const SimOptions& options) {
  if (options.sessions == 0) throw InvalidInput("at least one session is required");
  const auto& life = scenario.lifetime;
  const Mdu s = scenario.graph.start();
  const double start_bits = zero_hop_overhead(structure, sizes, s);

  std::vector<double> lifetime_cdf;
  if (options.sampling == LifetimeSampling::truncated_poisson) {
    double z = 0.0;
    for (int m = 0; m <= life.t_max(); ++m) z += life.mass(m);
    double acc = 0.0;
    for (int m = 0; m <= life.t_max(); ++m) {
      acc += life.mass(m) / z;
      lifetime_cdf.push_back(acc);
    }
  }

  auto action_bits = [&](const Action& a, Mdu cur, Mdu buf, Mdu target, const PolicyKey& key) {
    auto need = [&](Mdu from, Mdu to) {
      auto r = (from == kNone || from == to) ? std::nullopt : one_hop_overhead(structure, sizes, from, to);
      if (!r) throw InvalidInput("policy uses a missing P-MDU at " + oracle_detail::describe(key));
      return *r;
    };
    auto held = [&](Mdu m) {
      if (m == kNone || (m != cur && m != buf))
        throw InvalidInput("policy references an MDU that is not buffered at " + oracle_detail::describe(key));
    };
    switch (a.kind) {
      case ActionKind::zero_hop: return zero_hop_overhead(structure, sizes, target);
      case ActionKind::one_hop: held(a.predictor); return need(a.predictor, target);
      case ActionKind::two_hop: held(a.predictor); return need(a.predictor, a.via) + need(a.via, target);
    }
    return 0.0;
  };

  SimResult out;
  out.sessions = options.sessions;
  std::vector<double> per_session(options.sessions);
  std::vector<SessionTrace> kept(std::min(options.keep_traces, options.sessions));
  const std::size_t threads = options.threads ? options.threads : default_thread_count();
  parallel_for(options.sessions, threads, [&](std::size_t n) {
    std::mt19937_64 rng(oracle_detail::splitmix64(options.seed ^ oracle_detail::splitmix64(n)));
    SessionTrace trace;
    trace.path.push_back(s);
    trace.bits = start_bits;

    int budget = 0;  // switches allowed in truncated_poisson mode
    if (options.sampling == LifetimeSampling::truncated_poisson) {
      const double u = oracle_detail::unit(rng);
      while (budget < life.t_max() && u >= lifetime_cdf[static_cast<std::size_t>(budget)]) ++budget;
    }

    Mdu prev = kNone, cur = s, buf = kNone;
    for (int t = 0;; ++t) {
      if (options.sampling == LifetimeSampling::truncated_poisson) {
        if (t >= budget) break;
      } else {
        const double p_go = t == 0 ? (options.weight_first_switch ? life.tail(1) : 1.0) : life.tail(t);
        if (p_go < 1.0 && oracle_detail::unit(rng) >= p_go) break;
      }
      const auto* row = scenario.nav.find_row(prev, cur);
      if (row == nullptr || row->empty()) break;
      double u = oracle_detail::unit(rng);
      Mdu target = row->back().next;
      for (const auto& tr : *row) {
        if (u < tr.prob) {
          target = tr.next;
          break;
        }
        u -= tr.prob;
      }
      const PolicyKey key{t, prev, cur, buffer == BufferModel::fixed ? kNone : buf, target};
      auto it = policy.find(key);
      if (it == policy.end()) throw InvalidInput("policy has no action for state " + oracle_detail::describe(key));
      const Action& a = it->second;
      trace.bits += action_bits(a, cur, buffer == BufferModel::fixed ? kNone : buf, target, key);
      trace.actions.push_back(a);
      trace.path.push_back(target);
      if (buffer == BufferModel::flexible) {
        if (a.next_buffer != kNone && a.next_buffer != cur && a.next_buffer != buf && a.next_buffer != a.via)
          throw InvalidInput("policy keeps an unavailable buffer at " + oracle_detail::describe(key));
        buf = a.next_buffer;
      }
      prev = cur;
      cur = target;
      ++trace.lifetime;
    }
    per_session[n] = trace.bits;
    if (n < kept.size()) kept[n] = std::move(trace);
  });
  out.traces = std::move(kept);

  double sum = 0.0;
  for (double b : per_session) sum += b;
  out.mean = sum / static_cast<double>(options.sessions);
  if (options.sessions > 1) {
    double ss = 0.0;
    for (double b : per_session) ss += (b - out.mean) * (b - out.mean);
    out.std_error = std::sqrt(ss / static_cast<double>(options.sessions - 1) / static_cast<double>(options.sessions));
  }
  return out;
}

}  // namespace navstruct
