#pragma once

// Greedy structure refinement for J = c + lambda * b with branch-and-bound.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "navstruct/cost.hpp"
#include "navstruct/errors.hpp"
#include "navstruct/evaluator.hpp"
#include "navstruct/landmark.hpp"
#include "navstruct/parallel.hpp"
#include "navstruct/scenario.hpp"

namespace navstruct {

inline double objective(double expected_cost, double storage, double lambda) {
  return expected_cost + lambda * storage;
}

struct RefinerParams {
  double lambda = 0.0;
  BufferModel buffer = BufferModel::flexible;
  bool enable_pruning = true;
  /// Skip candidates whose new edges no reachable decision could use. Such a
  /// candidate leaves c unchanged and raises storage, so it can never win.
  bool enable_screening = true;
  /// Also try adding an edge together with its reverse in one step.
  bool allow_pairs = false;
  EvalOptions eval{false, false};
  std::size_t threads = 0;  // 0: NAVSTRUCT_THREADS or 1
  std::size_t max_iterations = 0;  // 0: until no improvement
};

/// One pass over the candidates. Passes that commit a change carry its edges.
struct RefineStep {
  std::size_t iteration = 0;
  bool committed = false;
  std::vector<Edge> edges;  // added (or removed, for subtraction)
  double objective = 0.0;   // J after the pass
  double expected_cost = 0.0;
  double storage = 0.0;
  std::size_t candidates = 0;
  std::size_t screened = 0;       // dropped by the usability screen
  std::size_t bound_checked = 0;  // lower bound computed
  std::size_t pruned = 0;         // lower bound exceeded the running best
  std::size_t evaluated = 0;      // exact evaluations
};

struct RefineResult {
  Structure structure;
  double objective = 0.0;
  double expected_cost = 0.0;
  double storage = 0.0;
  double initial_objective = 0.0;
  std::vector<RefineStep> passes;

  std::vector<RefineStep> commits() const {
    std::vector<RefineStep> out;
    for (const auto& p : passes)
      if (p.committed) out.push_back(p);
    return out;
  }
  std::size_t total(std::size_t RefineStep::*field) const {
    std::size_t s = 0;
    for (const auto& p : passes) s += p.*field;
    return s;
  }
  /// Fraction of bound-checked candidates that the bound eliminated.
  double pruning_fraction() const {
    const auto checked = total(&RefineStep::bound_checked);
    return checked == 0 ? 0.0 : static_cast<double>(total(&RefineStep::pruned)) / static_cast<double>(checked);
  }
};

namespace refine_detail {

/// Smallest cost any single transmission can have under a view.
template <class View>
double transmission_floor(const View& view) {
  return std::min(view.min_inter(), view.min_intra());
}

/// Pairs (reference, target) met at any solved state, plus all targets.
/// A new edge can influence the evaluation only through these.
struct Reach {
  std::size_t n = 0;
  std::vector<char> ref_target;  // n x n: reference b held while target j requested
  std::vector<char> target;      // j requested somewhere, or j is the start MDU

  bool r(Mdu b, Mdu j) const { return ref_target[static_cast<std::size_t>(b) * n + static_cast<std::size_t>(j)] != 0; }
};

template <class Engine>
Reach collect_reach(const Scenario& sc, const Engine& engine, BufferModel model) {
  Reach reach;
  reach.n = sc.graph.size();
  reach.ref_target.assign(reach.n * reach.n, 0);
  reach.target.assign(reach.n, 0);
  reach.target[static_cast<std::size_t>(sc.graph.start())] = 1;
  engine.for_each_state([&](int, Mdu prev, Mdu cur, Mdu buf) {
    const auto* row = sc.nav.find_row(prev, cur);
    if (row == nullptr) return;
    for (const auto& tr : *row) {
      if (tr.prob == 0.0) continue;
      const auto j = static_cast<std::size_t>(tr.next);
      reach.target[j] = 1;
      reach.ref_target[static_cast<std::size_t>(cur) * reach.n + j] = 1;
      if (model == BufferModel::flexible && buf != kNone)
        reach.ref_target[static_cast<std::size_t>(buf) * reach.n + j] = 1;
    }
  });
  return reach;
}

inline bool usable(const Reach& reach, const StructureIndex& idx, BufferModel model, Mdu x, Mdu y) {
  if (reach.r(x, y)) return true;
  if (idx.is_intra(x) && reach.target[static_cast<std::size_t>(y)]) return true;
  if (model == BufferModel::fixed) return false;
  for (Mdu j : idx.successors(y))  // (x, y) as the first leg of x -> y -> j
    if (reach.r(x, j)) return true;
  for (Mdu b : idx.predecessors(x))  // (x, y) as the second leg of b -> x -> y
    if (reach.r(b, y)) return true;
  return false;
}

struct Candidate {
  std::array<Edge, 2> edges{};
  std::size_t count = 0;
};

struct Outcome {
  bool screened = false;
  bool bound_checked = false;
  bool pruned = false;
  bool evaluated = false;
  double expected_cost = 0.0;
  double storage = 0.0;
  double objective = std::numeric_limits<double>::infinity();
};

inline constexpr std::size_t kChunk = 32;

/// Relative slack so rounding in the bound cannot prune a true winner.
inline constexpr double kBoundSlack = 1e-12;

}  // namespace refine_detail

/// Lower bound on c(structure + added) under the given buffer model.
///
/// The recursion runs exactly except at transitions predictor -> target of
/// the added edges, where the whole bracket (this switch plus its future) is
/// replaced by floor * (1 + g(t+1) * W), W being the expected number of
/// further weighted switches and floor the cheapest single transmission.
inline double lower_bound_cost(const Scenario& scenario, const SizeTable& sizes, const Structure& structure,
                               std::span<const Edge> added, BufferModel buffer = BufferModel::flexible,
                               const EvalOptions& options = {}, SwitchCountTable* counts = nullptr) {
  if (added.empty() || added.size() > 2) throw InvalidInput("lower bound takes one or two added edges");
  StructureIndex idx(structure, sizes);
  AugmentedIndex view(idx, added);
  SwitchCountTable local(scenario);
  BracketSubstitution sub;
  sub.counts = counts ? counts : &local;
  sub.floor = refine_detail::transmission_floor(view);
  for (const auto& e : added) sub.transitions[sub.count++] = e;
  if (buffer == BufferModel::fixed) {
    dp::FixedEngine<AugmentedIndex> engine(scenario, view, &sub);
    return engine.root(options.weight_first_switch);
  }
  dp::FlexibleEngine<AugmentedIndex> engine(scenario, view, &sub);
  return engine.root(options.weight_first_switch);
}

/// Adds P-MDUs one (or one pair) at a time while J strictly decreases.
///
/// Every pass scans candidates in ascending (predictor, target) order and
/// commits the best strict improvement; ties keep the earlier candidate.
inline RefineResult greedy_refine(const Scenario& scenario, const SizeTable& sizes, const Structure& initial,
                                  const RefinerParams& params) {
  if (params.lambda < 0.0) throw InvalidInput("lambda must be non-negative");
  const std::size_t threads = params.threads ? params.threads : default_thread_count();
  const auto n = static_cast<Mdu>(sizes.size());
  SwitchCountTable counts(scenario);
  if (params.enable_pruning) counts.precompute();

  RefineResult result;
  result.structure = initial;
  for (std::size_t iter = 1;; ++iter) {
    StructureIndex idx(result.structure, sizes);
    PlainIndex view(idx);
    double c = 0.0;
    refine_detail::Reach reach;
    if (params.buffer == BufferModel::fixed) {
      dp::FixedEngine<PlainIndex> engine(scenario, view);
      c = engine.root(params.eval.weight_first_switch);
      if (params.enable_screening) reach = refine_detail::collect_reach(scenario, engine, params.buffer);
    } else {
      dp::FlexibleEngine<PlainIndex> engine(scenario, view);
      c = engine.root(params.eval.weight_first_switch);
      if (params.enable_screening) reach = refine_detail::collect_reach(scenario, engine, params.buffer);
    }
    const double b = storage_cost(result.structure, sizes);
    const double j_inc = objective(c, b, params.lambda);
    if (iter == 1) result.initial_objective = j_inc;
    result.objective = j_inc;
    result.expected_cost = c;
    result.storage = b;
    if (params.max_iterations && iter > params.max_iterations) break;

    std::vector<refine_detail::Candidate> cands;
    for (Mdu x = 0; x < n; ++x)
      for (Mdu y = 0; y < n; ++y) {
        if (x == y || idx.has_edge(x, y)) continue;
        cands.push_back({{Edge{x, y}, Edge{}}, 1});
        if (params.allow_pairs && x < y && !idx.has_edge(y, x)) cands.push_back({{Edge{x, y}, Edge{y, x}}, 2});
      }

    RefineStep step;
    step.iteration = iter;
    step.candidates = cands.size();
    double j_run = j_inc;
    std::size_t best = cands.size();
    refine_detail::Outcome best_out;

    std::vector<refine_detail::Outcome> outs;
    for (std::size_t start = 0; start < cands.size(); start += refine_detail::kChunk) {
      const std::size_t len = std::min(refine_detail::kChunk, cands.size() - start);
      outs.assign(len, {});
      const double j_snap = j_run;
      parallel_for(len, threads, [&](std::size_t k) {
        const auto& cand = cands[start + k];
        auto& out = outs[k];
        if (params.enable_screening) {
          bool use = false;
          for (std::size_t e = 0; e < cand.count; ++e)
            use = use || refine_detail::usable(reach, idx, params.buffer, cand.edges[e].predictor, cand.edges[e].target);
          if (cand.count == 2 && params.buffer == BufferModel::flexible)
            use = use || reach.r(cand.edges[0].predictor, cand.edges[0].predictor) ||
                  reach.r(cand.edges[0].target, cand.edges[0].target);
          if (!use) {
            out.screened = true;
            return;
          }
        }
        out.storage = b;
        for (std::size_t e = 0; e < cand.count; ++e)
          out.storage += sizes.inter(cand.edges[e].predictor, cand.edges[e].target);
        std::span<const Edge> added(cand.edges.data(), cand.count);
        AugmentedIndex aug(idx, added);
        if (params.enable_pruning) {
          out.bound_checked = true;
          BracketSubstitution sub;
          sub.counts = &counts;
          sub.floor = refine_detail::transmission_floor(aug);
          for (const auto& e : added) sub.transitions[sub.count++] = e;
          double lb;
          if (params.buffer == BufferModel::fixed) {
            dp::FixedEngine<AugmentedIndex> engine(scenario, aug, &sub);
            lb = engine.root(params.eval.weight_first_switch);
          } else {
            dp::FlexibleEngine<AugmentedIndex> engine(scenario, aug, &sub);
            lb = engine.root(params.eval.weight_first_switch);
          }
          if (objective(lb, out.storage, params.lambda) > j_snap + refine_detail::kBoundSlack * std::abs(j_snap)) {
            out.pruned = true;
            return;
          }
        }
        out.evaluated = true;
        out.expected_cost = expected_cost(scenario, aug, params.buffer, params.eval);
        out.objective = objective(out.expected_cost, out.storage, params.lambda);
      });
      for (std::size_t k = 0; k < len; ++k) {
        const auto& out = outs[k];
        step.screened += out.screened;
        step.bound_checked += out.bound_checked;
        step.pruned += out.pruned;
        step.evaluated += out.evaluated;
        if (out.evaluated && out.objective < j_run) {
          j_run = out.objective;
          best = start + k;
          best_out = out;
        }
      }
    }

    if (best == cands.size()) {
      step.objective = j_inc;
      step.expected_cost = c;
      step.storage = b;
      result.passes.push_back(step);
      break;
    }
    const auto& win = cands[best];
    for (std::size_t e = 0; e < win.count; ++e) {
      result.structure.edges.insert(win.edges[e]);
      step.edges.push_back(win.edges[e]);
    }
    step.committed = true;
    step.objective = best_out.objective;
    step.expected_cost = best_out.expected_cost;
    step.storage = best_out.storage;
    result.passes.push_back(step);
    result.objective = best_out.objective;
    result.expected_cost = best_out.expected_cost;
    result.storage = best_out.storage;
  }
  return result;
}

/// Removes P-MDUs one at a time while J strictly decreases; removals that
/// would leave some MDU without an independent reconstruction are skipped.
///
/// An edge that no decision of the incumbent policy uses (including 0-hop
/// combos and the start transmission) can be dropped without changing c, so
/// its J is computed directly when screening is on.
inline RefineResult greedy_subtract(const Scenario& scenario, const SizeTable& sizes, const Structure& initial,
                                    const RefinerParams& params) {
  if (params.lambda < 0.0) throw InvalidInput("lambda must be non-negative");
  const std::size_t threads = params.threads ? params.threads : default_thread_count();
  RefineResult result;
  result.structure = initial;
  for (std::size_t iter = 1;; ++iter) {
    StructureIndex idx(result.structure, sizes);
    PlainIndex view(idx);
    std::set<Edge> used;
    auto mark_zero_hop = [&](Mdu j) {
      const auto& z = idx.zero_hop_choice(j);
      if (z.via != kNone) used.insert({z.via, j});
    };
    double c = 0.0;
    auto harvest = [&](auto& engine) {
      c = engine.root(params.eval.weight_first_switch);
      if (!params.enable_screening) return;
      mark_zero_hop(scenario.graph.start());
      engine.for_each_state([&](int t, Mdu prev, Mdu cur, Mdu buf) {
        const auto* row = scenario.nav.find_row(prev, cur);
        if (row == nullptr) return;
        for (const auto& tr : *row) {
          if (tr.prob == 0.0) continue;
          dp::Choice ch;
          if constexpr (requires { engine.decide(t, cur, buf, tr.next); })
            ch = engine.decide(t, cur, buf, tr.next);
          else
            ch = engine.decide(t, cur, tr.next);
          const Action& a = ch.action;
          if (a.kind == ActionKind::zero_hop) mark_zero_hop(tr.next);
          if (a.kind == ActionKind::one_hop) used.insert({a.predictor, tr.next});
          if (a.kind == ActionKind::two_hop) {
            used.insert({a.predictor, a.via});
            used.insert({a.via, tr.next});
          }
        }
      });
    };
    if (params.buffer == BufferModel::fixed) {
      dp::FixedEngine<PlainIndex> engine(scenario, view);
      harvest(engine);
    } else {
      dp::FlexibleEngine<PlainIndex> engine(scenario, view);
      harvest(engine);
    }
    const double b = storage_cost(result.structure, sizes);
    const double j_inc = objective(c, b, params.lambda);
    if (iter == 1) result.initial_objective = j_inc;
    result.objective = j_inc;
    result.expected_cost = c;
    result.storage = b;
    if (params.max_iterations && iter > params.max_iterations) break;

    std::vector<Edge> cands(result.structure.edges.begin(), result.structure.edges.end());
    std::vector<refine_detail::Outcome> outs(cands.size());
    parallel_for(cands.size(), threads, [&](std::size_t k) {
      auto& out = outs[k];
      out.storage = b - sizes.inter(cands[k].predictor, cands[k].target);
      if (params.enable_screening && !used.contains(cands[k])) {
        const auto [x, y] = cands[k];
        bool still_reconstructible = result.structure.intra.contains(y);
        for (Mdu l : result.structure.intra)
          still_reconstructible = still_reconstructible || (l != x && result.structure.has_edge(l, y));
        if (!still_reconstructible) return;
        out.screened = true;
        out.expected_cost = c;
      } else {
        Structure smaller = result.structure;
        smaller.edges.erase(cands[k]);
        try {
          StructureIndex sidx(smaller, sizes);
          PlainIndex sview(sidx);
          out.expected_cost = expected_cost(scenario, sview, params.buffer, params.eval);
        } catch (const InfeasibleStructure&) {
          return;
        }
        out.evaluated = true;
      }
      out.objective = objective(out.expected_cost, out.storage, params.lambda);
    });

    RefineStep step;
    step.iteration = iter;
    step.candidates = cands.size();
    double j_run = j_inc;
    std::size_t best = cands.size();
    for (std::size_t k = 0; k < cands.size(); ++k) {
      step.screened += outs[k].screened;
      step.evaluated += outs[k].evaluated;
      if (outs[k].objective < j_run) {
        j_run = outs[k].objective;
        best = k;
      }
    }
    if (best == cands.size()) {
      step.objective = j_inc;
      step.expected_cost = c;
      step.storage = b;
      result.passes.push_back(step);
      break;
    }
    result.structure.edges.erase(cands[best]);
    step.committed = true;
    step.edges = {cands[best]};
    step.objective = outs[best].objective;
    step.expected_cost = outs[best].expected_cost;
    step.storage = outs[best].storage;
    result.passes.push_back(step);
    result.objective = step.objective;
    result.expected_cost = step.expected_cost;
    result.storage = step.storage;
  }
  // Landmark bookkeeping only stays valid if every landmark edge survived.
  if (!result.structure.landmarks.empty() && !validate_structure(result.structure, sizes.size()).empty())
    result.structure.landmarks.clear();
  return result;
}

struct SweepRow {
  double lambda = 0.0;
  double storage_bits = 0.0;
  double expected_bits = 0.0;
  std::size_t landmarks = 0;
  std::size_t p_edges = 0;
  Structure structure;
};

struct SweepParams {
  RefinerParams refine;
  int max_lloyd_iters = 100;
};

/// Landmark planning followed by greedy refinement, once per lambda.
inline std::vector<SweepRow> sweep(const Scenario& scenario, const SizeTable& sizes, std::vector<double> lambdas,
                                   const SweepParams& params) {
  if (lambdas.empty()) throw InvalidInput("sweep needs at least one lambda");
  std::sort(lambdas.begin(), lambdas.end());
  const auto q = aggregate_switch_probabilities(scenario);
  std::vector<SweepRow> rows;
  for (double lambda : lambdas) {
    PlannerParams pp{planner_weight(lambda, scenario.lifetime), params.max_lloyd_iters, &q};
    auto partitions = tsvq(scenario, sizes, pp);
    auto init = build_initial_structure(partitions, sizes);
    RefinerParams rp = params.refine;
    rp.lambda = lambda;
    auto refined = greedy_refine(scenario, sizes, init, rp);
    rows.push_back({lambda, refined.storage, refined.expected_cost, partitions.size(),
                    refined.structure.edges.size(), refined.structure});
  }
  return rows;
}

}  // namespace navstruct
