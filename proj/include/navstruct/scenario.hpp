#pragma once

// Navigation space, user behavior model and session lifetime model.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "navstruct/errors.hpp"

namespace navstruct {

/// Index of a media data unit.
using Mdu = std::int32_t;

/// Previous-MDU sentinel at session start, and the empty reference buffer.
inline constexpr Mdu kNone = -1;

struct Transition {
  Mdu next = kNone;
  double prob = 0.0;
  friend bool operator==(const Transition&, const Transition&) = default;
};

/// MDU set with switch neighborhoods N(i) and the session start MDU.
///
/// Construction only checks that the graph is non-empty; index ranges are
/// reported by validate_navigation_model() so malformed inputs can still be
/// inspected.
class MediaGraph {
 public:
  MediaGraph() = default;
  MediaGraph(std::vector<std::vector<Mdu>> neighbors, Mdu start)
      : neighbors_(std::move(neighbors)), start_(start) {
    if (neighbors_.empty()) throw InvalidInput("media graph must contain at least one MDU");
    for (const auto& nb : neighbors_) max_degree_ = std::max(max_degree_, nb.size());
  }

  std::size_t size() const noexcept { return neighbors_.size(); }
  Mdu start() const noexcept { return start_; }
  std::size_t max_degree() const noexcept { return max_degree_; }
  bool contains(Mdu i) const noexcept { return i >= 0 && static_cast<std::size_t>(i) < size(); }

  const std::vector<Mdu>& neighbors(Mdu i) const { return neighbors_.at(static_cast<std::size_t>(i)); }
  const std::vector<std::vector<Mdu>>& adjacency() const noexcept { return neighbors_; }

  bool is_neighbor(Mdu i, Mdu j) const {
    const auto& nb = neighbors(i);
    return std::find(nb.begin(), nb.end(), j) != nb.end();
  }

  friend bool operator==(const MediaGraph&, const MediaGraph&) = default;

 private:
  std::vector<std::vector<Mdu>> neighbors_;
  Mdu start_ = 0;
  std::size_t max_degree_ = 0;
};

/// One-step-memory switch probabilities p(k, i, j) plus the start row p(s, j).
///
/// The start row is stored under the key (kNone, s) so the evaluator looks up
/// both through row(prev, cur).
class NavigationModel {
 public:
  using RowKey = std::pair<Mdu, Mdu>;

  void set_start_row(std::vector<Transition> row) { start_row_ = std::move(row); }
  void set_row(Mdu prev, Mdu cur, std::vector<Transition> row) {
    if (prev == kNone) throw InvalidInput("use set_start_row for the start distribution");
    rows_[{prev, cur}] = std::move(row);
  }

  const std::vector<Transition>& start_row() const noexcept { return start_row_; }

  /// Row for state (prev, cur); nullptr when absent. prev == kNone yields the start row.
  const std::vector<Transition>* find_row(Mdu prev, Mdu cur) const {
    if (prev == kNone) return &start_row_;
    auto it = rows_.find({prev, cur});
    return it == rows_.end() ? nullptr : &it->second;
  }

  double p_switch(Mdu prev, Mdu cur, Mdu next) const {
    const auto* row = find_row(prev, cur);
    if (row == nullptr) return 0.0;
    for (const auto& tr : *row)
      if (tr.next == next) return tr.prob;
    return 0.0;
  }

  const std::map<RowKey, std::vector<Transition>>& rows() const noexcept { return rows_; }

  friend bool operator==(const NavigationModel&, const NavigationModel&) = default;

 private:
  std::vector<Transition> start_row_;
  std::map<RowKey, std::vector<Transition>> rows_;
};

/// Poisson session lifetime truncated at t_max, with tail g(t) = P(T >= t).
class LifetimeModel {
 public:
  LifetimeModel() = default;

  double mu() const noexcept { return mu_; }
  int t_max() const noexcept { return t_max_; }

  /// g(t); zero beyond t_max.
  double tail(int t) const noexcept {
    if (t < 0) return tail_.empty() ? 0.0 : tail_.front();
    return static_cast<std::size_t>(t) < tail_.size() ? tail_[static_cast<std::size_t>(t)] : 0.0;
  }

  /// Integer horizon used for aggregate switch probabilities: floor(mu), at least 1.
  int horizon() const noexcept {
    return std::max(1, static_cast<int>(std::floor(mu_)));
  }

  /// Probability mass p(T = m) of the untruncated Poisson law.
  double mass(int m) const noexcept {
    return m < 0 || static_cast<std::size_t>(m) >= mass_.size() ? 0.0 : mass_[static_cast<std::size_t>(m)];
  }

  friend LifetimeModel build_lifetime_tail(double mu, int t_max);
  friend bool operator==(const LifetimeModel& a, const LifetimeModel& b) {
    return a.mu_ == b.mu_ && a.t_max_ == b.t_max_;
  }

 private:
  double mu_ = 0.0;
  int t_max_ = 0;
  std::vector<double> mass_;  // p(T = m), m = 0..t_max
  std::vector<double> tail_;  // g(t), t = 0..t_max+1
};

/// Builds g(t) = sum_{m=t}^{t_max} mu^m e^-mu / m!.
///
/// Terms follow the recurrence term_m = term_{m-1} * mu / m carried in the
/// log domain, so large mu neither overflows nor underflows e^-mu early.
inline LifetimeModel build_lifetime_tail(double mu, int t_max) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw InvalidInput("lifetime mu must be positive");
  if (t_max < 1) throw InvalidInput("lifetime t_max must be at least 1");

  LifetimeModel model;
  model.mu_ = mu;
  model.t_max_ = t_max;
  model.mass_.resize(static_cast<std::size_t>(t_max) + 1);
  double log_term = -mu;
  const double log_mu = std::log(mu);
  for (int m = 0; m <= t_max; ++m) {
    if (m > 0) log_term += log_mu - std::log(static_cast<double>(m));
    model.mass_[static_cast<std::size_t>(m)] = std::exp(log_term);
  }
  model.tail_.assign(static_cast<std::size_t>(t_max) + 2, 0.0);
  double acc = 0.0;
  for (int t = t_max; t >= 0; --t) {
    acc += model.mass_[static_cast<std::size_t>(t)];
    model.tail_[static_cast<std::size_t>(t)] = std::min(1.0, acc);
  }
  return model;
}

struct Scenario {
  MediaGraph graph;
  NavigationModel nav;
  LifetimeModel lifetime;
};

// ---------------------------------------------------------------------------
// Validation

struct Violation {
  enum class Kind { index, missing_row, normalization, probability_range };
  Kind kind;
  Mdu prev = kNone;
  Mdu cur = kNone;
  std::string message;
};

inline std::string to_string(Violation::Kind kind) {
  switch (kind) {
    case Violation::Kind::index: return "index";
    case Violation::Kind::missing_row: return "missing-row";
    case Violation::Kind::normalization: return "normalization";
    case Violation::Kind::probability_range: return "probability-range";
  }
  return "unknown";
}

/// Reports every broken NavigationModel/MediaGraph invariant. Rows are only
/// required for states reachable from the start row.
inline std::vector<Violation> validate_navigation_model(const MediaGraph& graph,
                                                        const NavigationModel& nav) {
  std::vector<Violation> out;
  auto describe = [](Mdu k, Mdu i) {
    std::ostringstream os;
    os << "(" << (k == kNone ? std::string("start") : std::to_string(k)) << ", " << i << ")";
    return os.str();
  };

  if (!graph.contains(graph.start()))
    out.push_back({Violation::Kind::index, kNone, graph.start(), "start MDU out of range"});
  for (std::size_t i = 0; i < graph.size(); ++i) {
    for (Mdu j : graph.neighbors(static_cast<Mdu>(i))) {
      if (!graph.contains(j) || j == static_cast<Mdu>(i)) {
        out.push_back({Violation::Kind::index, kNone, static_cast<Mdu>(i),
                       "neighbor " + std::to_string(j) + " of MDU " + std::to_string(i) +
                           " is out of range or self"});
      }
    }
  }
  if (!out.empty()) return out;

  auto check_row = [&](Mdu k, Mdu i, const std::vector<Transition>& row) {
    double sum = 0.0;
    bool ok = true;
    for (const auto& tr : row) {
      if (!graph.contains(tr.next) || !graph.is_neighbor(i, tr.next)) {
        out.push_back({Violation::Kind::index, k, i,
                       "row " + describe(k, i) + " targets non-neighbor " + std::to_string(tr.next)});
        ok = false;
      }
      if (!(tr.prob >= 0.0 && tr.prob <= 1.0)) {
        out.push_back({Violation::Kind::probability_range, k, i,
                       "row " + describe(k, i) + " has probability outside [0, 1]"});
        ok = false;
      }
      sum += tr.prob;
    }
    const double expected = graph.neighbors(i).empty() ? 0.0 : 1.0;
    if (std::abs(sum - expected) > 1e-9) {
      std::ostringstream os;
      os << "row " << describe(k, i) << " sums to " << sum;
      out.push_back({Violation::Kind::normalization, k, i, os.str()});
    }
    return ok;
  };

  // Breadth-first over reachable (prev, cur) states.
  const Mdu s = graph.start();
  std::vector<std::pair<Mdu, Mdu>> frontier;
  std::map<std::pair<Mdu, Mdu>, bool> seen;
  if (check_row(kNone, s, nav.start_row())) {
    for (const auto& tr : nav.start_row())
      if (seen.emplace(std::make_pair(s, tr.next), true).second) frontier.emplace_back(s, tr.next);
  }
  while (!frontier.empty()) {
    auto [k, i] = frontier.back();
    frontier.pop_back();
    if (graph.neighbors(i).empty()) continue;
    const auto* row = nav.find_row(k, i);
    if (row == nullptr) {
      out.push_back({Violation::Kind::missing_row, k, i, "missing row " + describe(k, i)});
      continue;
    }
    if (!check_row(k, i, *row)) continue;
    for (const auto& tr : *row)
      if (seen.emplace(std::make_pair(i, tr.next), true).second) frontier.emplace_back(i, tr.next);
  }
  return out;
}

/// Throws InvalidInput carrying the first violation, if any.
inline void require_valid(const Scenario& scenario) {
  auto report = validate_navigation_model(scenario.graph, scenario.nav);
  if (!report.empty()) throw InvalidInput("invalid navigation model: " + report.front().message);
}

// ---------------------------------------------------------------------------
// Aggregate switch-event probabilities

/// q(i, j): lifetime-weighted probability of the switch event i -> j.
class AggregateSwitchProbs {
 public:
  AggregateSwitchProbs() = default;
  explicit AggregateSwitchProbs(std::size_t n) : rows_(n) {}

  double at(Mdu i, Mdu j) const {
    for (const auto& tr : rows_.at(static_cast<std::size_t>(i)))
      if (tr.next == j) return tr.prob;
    return 0.0;
  }
  std::span<const Transition> row(Mdu i) const { return rows_.at(static_cast<std::size_t>(i)); }
  std::size_t size() const noexcept { return rows_.size(); }
  std::size_t nonzeros() const noexcept {
    std::size_t c = 0;
    for (const auto& r : rows_) c += r.size();
    return c;
  }
  double total() const noexcept {
    double t = 0.0;
    for (const auto& r : rows_)
      for (const auto& tr : r) t += tr.prob;
    return t;
  }

  void add(Mdu i, Mdu j, double value) {
    auto& r = rows_.at(static_cast<std::size_t>(i));
    auto it = std::lower_bound(r.begin(), r.end(), j,
                               [](const Transition& tr, Mdu key) { return tr.next < key; });
    if (it != r.end() && it->next == j)
      it->prob += value;
    else
      r.insert(it, Transition{j, value});
  }

 private:
  std::vector<std::vector<Transition>> rows_;
};

/// q = sum_{t=1}^{floor(mu)} g(t) v_s P^t over the (prev, cur) pair chain.
///
/// The pair-state distribution is propagated sparsely; P is never formed.
inline AggregateSwitchProbs aggregate_switch_probabilities(const MediaGraph& graph,
                                                           const NavigationModel& nav,
                                                           const LifetimeModel& lifetime) {
  AggregateSwitchProbs q(graph.size());
  struct State {
    Mdu prev;
    Mdu cur;
    std::vector<std::pair<std::size_t, double>> succ;
    bool expanded = false;
  };
  std::vector<State> states;
  std::unordered_map<std::uint64_t, std::size_t> index;
  auto key = [](Mdu a, Mdu b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
  };
  auto intern = [&](Mdu a, Mdu b) {
    auto [it, inserted] = index.emplace(key(a, b), states.size());
    if (inserted) states.push_back(State{a, b, {}, false});
    return it->second;
  };

  std::vector<double> mass;
  for (const auto& tr : nav.start_row()) {
    std::size_t id = intern(graph.start(), tr.next);
    mass.resize(states.size(), 0.0);
    mass[id] += tr.prob;
  }

  const int horizon = std::min(lifetime.horizon(), lifetime.t_max());
  for (int t = 1; t <= horizon; ++t) {
    // Expand successor lists lazily; interning may grow `states`.
    for (std::size_t id = 0; id < mass.size(); ++id) {
      if (mass[id] == 0.0 || states[id].expanded) continue;
      const Mdu prev = states[id].prev;
      const Mdu cur = states[id].cur;
      std::vector<std::pair<std::size_t, double>> succ;
      if (const auto* row = nav.find_row(prev, cur)) {
        for (const auto& tr : *row) succ.emplace_back(intern(cur, tr.next), tr.prob);
      }
      states[id].succ = std::move(succ);
      states[id].expanded = true;
    }
    std::vector<double> next(states.size(), 0.0);
    for (std::size_t id = 0; id < mass.size(); ++id) {
      if (mass[id] == 0.0) continue;
      for (const auto& [to, p] : states[id].succ) next[to] += mass[id] * p;
    }
    const double g = lifetime.tail(t);
    for (std::size_t id = 0; id < next.size(); ++id)
      if (next[id] != 0.0) q.add(states[id].prev, states[id].cur, g * next[id]);
    mass = std::move(next);
  }
  return q;
}

inline AggregateSwitchProbs aggregate_switch_probabilities(const Scenario& scenario) {
  return aggregate_switch_probabilities(scenario.graph, scenario.nav, scenario.lifetime);
}

}  // namespace navstruct
