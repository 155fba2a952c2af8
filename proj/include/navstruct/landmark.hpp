#pragma once

// Landmark placement by tree-structured splitting with Lloyd refinement.
//
// A partition is a landmark plus the MDUs it predicts. Splitting is accepted
// when the two halves plus their cross-boundary cost beat the parent.

#include <algorithm>
#include <deque>
#include <limits>
#include <utility>
#include <vector>

#include "navstruct/cost.hpp"
#include "navstruct/errors.hpp"
#include "navstruct/scenario.hpp"

namespace navstruct {

struct PlannerParams {
  double w = 0.0;  // storage weight, lambda / mu
  int max_lloyd_iters = 100;
  const AggregateSwitchProbs* q = nullptr;
};

/// Storage weight used by the planner for a given tradeoff weight.
inline double planner_weight(double lambda, const LifetimeModel& lifetime) { return lambda / lifetime.mu(); }

namespace landmark_detail {

/// r^P_j(l) under the landmark assumption; switching onto the buffered
/// landmark itself costs nothing.
inline double landmark_hop(const SizeTable& sizes, Mdu l, Mdu j) {
  return j == l ? 0.0 : sizes.inter(l, j) + sizes.merge(j);
}

inline void require_params(const PlannerParams& params) {
  if (params.q == nullptr) throw InvalidInput("planner needs aggregate switch probabilities");
  if (params.w < 0.0) throw InvalidInput("planner weight must be non-negative");
  if (params.max_lloyd_iters < 0) throw InvalidInput("max_lloyd_iters must be non-negative");
}

/// Membership mask plus, per member j, the within-partition inflow sum_i q(i,j).
struct Inflow {
  std::vector<char> member;
  std::vector<double> in;

  Inflow(const std::vector<Mdu>& members, const AggregateSwitchProbs& q) : member(q.size(), 0), in(q.size(), 0.0) {
    for (Mdu m : members) member[static_cast<std::size_t>(m)] = 1;
    for (Mdu i : members)
      for (const auto& tr : q.row(i))
        if (member[static_cast<std::size_t>(tr.next)]) in[static_cast<std::size_t>(tr.next)] += tr.prob;
  }
};

inline double phi_with(const std::vector<Mdu>& members, Mdu l, const Inflow& flow, const SizeTable& sizes, double w) {
  double transmit = 0.0;
  double store = sizes.intra(l);
  for (Mdu j : members) {
    if (j == l) continue;
    transmit += flow.in[static_cast<std::size_t>(j)] * landmark_hop(sizes, l, j);
    store += sizes.inter(l, j);
  }
  return transmit + w * store;
}

/// argmin over members of phi, ties to the lowest index.
inline std::pair<Mdu, double> best_landmark(const std::vector<Mdu>& members, const SizeTable& sizes,
                                            const PlannerParams& params) {
  Inflow flow(members, *params.q);
  Mdu best = kNone;
  double best_cost = std::numeric_limits<double>::infinity();
  for (Mdu l : members) {  // members are sorted
    const double c = phi_with(members, l, flow, sizes, params.w);
    if (c < best_cost) {
      best_cost = c;
      best = l;
    }
  }
  return {best, best_cost};
}

inline void normalize(Partition& p) {
  std::sort(p.members.begin(), p.members.end());
  p.members.erase(std::unique(p.members.begin(), p.members.end()), p.members.end());
  if (p.members.empty()) throw InvalidInput("empty partition");
  if (!std::binary_search(p.members.begin(), p.members.end(), p.landmark))
    throw InvalidInput("landmark is not a member of its partition");
}

}  // namespace landmark_detail

/// Within-partition cost: aggregate switches into non-landmark members priced
/// as one hop from the landmark, plus w times the landmark's I-MDU and its
/// P-MDUs to the other members.
inline double phi(const Partition& partition, const SizeTable& sizes, const PlannerParams& params) {
  landmark_detail::require_params(params);
  Partition p = partition;
  landmark_detail::normalize(p);
  landmark_detail::Inflow flow(p.members, *params.q);
  return landmark_detail::phi_with(p.members, p.landmark, flow, sizes, params.w);
}

/// Cross-partition cost: switches route through the other landmark, plus w
/// times the two inter-landmark P-MDUs.
inline double delta(const Partition& p1, const Partition& p2, const SizeTable& sizes, const PlannerParams& params) {
  landmark_detail::require_params(params);
  const auto& q = *params.q;
  std::vector<signed char> side(q.size(), 0);
  for (Mdu m : p1.members) side[static_cast<std::size_t>(m)] = 1;
  for (Mdu m : p2.members) {
    if (side[static_cast<std::size_t>(m)] == 1) throw InvalidInput("delta needs disjoint partitions");
    side[static_cast<std::size_t>(m)] = 2;
  }
  const Mdu l1 = p1.landmark, l2 = p2.landmark;
  const double hop12 = sizes.inter(l1, l2) + sizes.merge(l2);
  const double hop21 = sizes.inter(l2, l1) + sizes.merge(l1);
  double cross = 0.0;
  for (Mdu i : p1.members)
    for (const auto& tr : q.row(i))
      if (side[static_cast<std::size_t>(tr.next)] == 2)
        cross += tr.prob * (hop12 + landmark_detail::landmark_hop(sizes, l2, tr.next));
  for (Mdu j : p2.members)
    for (const auto& tr : q.row(j))
      if (side[static_cast<std::size_t>(tr.next)] == 1)
        cross += tr.prob * (hop21 + landmark_detail::landmark_hop(sizes, l1, tr.next));
  return cross + params.w * (sizes.inter(l2, l1) + sizes.inter(l1, l2));
}

/// The member whose promotion to landmark would remove the most cost.
inline Mdu furthest_init(const Partition& partition, const SizeTable& sizes, const PlannerParams& params) {
  landmark_detail::require_params(params);
  Partition p = partition;
  landmark_detail::normalize(p);
  if (p.members.size() < 2) throw InvalidInput("furthest_init needs at least two members");
  const auto& q = *params.q;
  std::vector<char> member(q.size(), 0);
  for (Mdu m : p.members) member[static_cast<std::size_t>(m)] = 1;
  const Mdu l = p.landmark;
  Mdu best = kNone;
  double best_score = -std::numeric_limits<double>::infinity();
  for (Mdu i : p.members) {
    if (i == l) continue;
    double score = params.w * (sizes.inter(l, i) - sizes.intra(i));
    for (const auto& tr : q.row(i))
      if (member[static_cast<std::size_t>(tr.next)]) score += tr.prob * landmark_detail::landmark_hop(sizes, l, tr.next);
    if (score > best_score) {
      best_score = score;
      best = i;
    }
  }
  return best;
}

struct SplitTrace {
  int iterations = 0;
  bool converged = false;
};

/// Two-landmark Lloyd refinement of one partition.
///
/// Starts from {l2} and the rest with l1 = current landmark, then alternates
/// nearest-landmark assignment (by |P_j(l)|, ties to the first) and per-half
/// landmark re-selection (argmin phi). Landmarks always stay in their own
/// half, so neither half can become empty.
inline std::pair<Partition, Partition> lloyd_split(const Partition& partition, const SizeTable& sizes,
                                                   const PlannerParams& params, SplitTrace* trace = nullptr) {
  landmark_detail::require_params(params);
  Partition p = partition;
  landmark_detail::normalize(p);
  if (p.members.size() < 2) throw InvalidInput("lloyd_split needs at least two members");

  Mdu l1 = p.landmark;
  Mdu l2 = furthest_init(p, sizes, params);
  std::vector<Mdu> a, b{l2};
  for (Mdu m : p.members)
    if (m != l2) a.push_back(m);

  int iters = 0;
  bool converged = false;
  while (iters < params.max_lloyd_iters) {
    ++iters;
    std::vector<Mdu> na, nb;
    for (Mdu j : p.members) {
      bool second;
      if (j == l1) second = false;
      else if (j == l2) second = true;
      else second = sizes.inter(l2, j) < sizes.inter(l1, j);
      (second ? nb : na).push_back(j);
    }
    const Mdu nl1 = landmark_detail::best_landmark(na, sizes, params).first;
    const Mdu nl2 = landmark_detail::best_landmark(nb, sizes, params).first;
    const bool same = na == a && nb == b && nl1 == l1 && nl2 == l2;
    a = std::move(na);
    b = std::move(nb);
    l1 = nl1;
    l2 = nl2;
    if (same) {
      converged = true;
      break;
    }
  }
  if (trace) *trace = {iters, converged};
  return {Partition{l1, a}, Partition{l2, b}};
}

struct SplitDecision {
  Partition parent;
  Partition first, second;
  double parent_cost = 0.0;
  double split_cost = 0.0;  // phi(first) + phi(second) + delta
  bool accepted = false;
};

/// Runs one Lloyd split and evaluates the split condition.
inline SplitDecision try_split(const Partition& partition, const SizeTable& sizes, const PlannerParams& params) {
  SplitDecision d;
  d.parent = partition;
  landmark_detail::normalize(d.parent);
  d.parent_cost = phi(d.parent, sizes, params);
  if (d.parent.members.size() < 2) return d;
  auto [p1, p2] = lloyd_split(d.parent, sizes, params);
  d.first = std::move(p1);
  d.second = std::move(p2);
  d.split_cost = phi(d.first, sizes, params) + phi(d.second, sizes, params) + delta(d.first, d.second, sizes, params);
  d.accepted = d.split_cost < d.parent_cost;
  return d;
}

/// Recursive landmark insertion over all MDUs. Candidates are processed FIFO;
/// the result is sorted by landmark index.
inline std::vector<Partition> tsvq(std::size_t n, const SizeTable& sizes, const PlannerParams& params) {
  landmark_detail::require_params(params);
  if (n == 0) throw InvalidInput("no MDUs to partition");
  std::vector<Mdu> all(n);
  for (std::size_t j = 0; j < n; ++j) all[j] = static_cast<Mdu>(j);
  const Mdu root = landmark_detail::best_landmark(all, sizes, params).first;

  std::deque<Partition> pool{Partition{root, all}};
  std::vector<Partition> done;
  while (!pool.empty()) {
    Partition p = std::move(pool.front());
    pool.pop_front();
    if (p.members.size() < 2) {
      done.push_back(std::move(p));
      continue;
    }
    auto d = try_split(p, sizes, params);
    if (d.accepted) {
      pool.push_back(std::move(d.first));
      pool.push_back(std::move(d.second));
    } else {
      done.push_back(std::move(d.parent));
    }
  }
  std::sort(done.begin(), done.end(), [](const Partition& x, const Partition& y) { return x.landmark < y.landmark; });
  return done;
}

inline std::vector<Partition> tsvq(const Scenario& scenario, const SizeTable& sizes, const PlannerParams& params) {
  return tsvq(scenario.graph.size(), sizes, params);
}

/// Landmark I-MDUs, landmark-to-member P-MDUs and all inter-landmark P-MDUs.
inline Structure build_initial_structure(const std::vector<Partition>& partitions, const SizeTable& sizes) {
  Structure s;
  for (const auto& p : partitions) {
    s.intra.insert(p.landmark);
    for (Mdu j : p.members)
      if (j != p.landmark) s.edges.insert({p.landmark, j});
  }
  for (const auto& a : partitions)
    for (const auto& b : partitions)
      if (a.landmark != b.landmark) s.edges.insert({a.landmark, b.landmark});
  s.landmarks = partitions;
  for (auto& p : s.landmarks) landmark_detail::normalize(p);
  if (auto problems = validate_structure(s, sizes.size()); !problems.empty())
    throw InvalidInput("invalid partitions: " + problems.front());
  return s;
}

}  // namespace navstruct
