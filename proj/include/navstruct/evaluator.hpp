#pragma once

// Expected transmission cost of a structure under the fixed and flexible
// one-MDU reference buffer models.
//
// State values follow the nested recursion
//   c(t, k, i)      = sum_j p(k,i,j) * min over actions [bits + g(t+1) * c(t+1, i, j, ...)]
// rooted at (0, none, s) with the unconditional start transmission added on
// top. Both engines are memoized top-down and only visit reachable states.

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "navstruct/cost.hpp"
#include "navstruct/errors.hpp"
#include "navstruct/scenario.hpp"

namespace navstruct {

enum class BufferModel { fixed, flexible };

inline std::string to_string(BufferModel b) { return b == BufferModel::fixed ? "fixed" : "flex"; }

inline BufferModel parse_buffer_model(const std::string& s) {
  if (s == "fixed") return BufferModel::fixed;
  if (s == "flex" || s == "flexible") return BufferModel::flexible;
  throw InvalidInput("unknown buffer model '" + s + "' (expected fixed or flex)");
}

enum class ActionKind { zero_hop, one_hop, two_hop };

inline std::string to_string(ActionKind k) {
  switch (k) {
    case ActionKind::zero_hop: return "0-hop";
    case ActionKind::one_hop: return "1-hop";
    case ActionKind::two_hop: return "2-hop";
  }
  return "?";
}

/// Server decision for one requested switch.
struct Action {
  ActionKind kind = ActionKind::zero_hop;
  Mdu predictor = kNone;    // 1-hop predictor, or first-leg predictor of a 2-hop
  Mdu via = kNone;          // 2-hop intermediate MDU
  Mdu next_buffer = kNone;  // flexible buffer content afterwards
  double bits = 0.0;        // transmitted bits for this switch
  friend bool operator==(const Action&, const Action&) = default;
};

/// Decision point: at instant t, displaying `cur` after `prev`, with `buffer`
/// held (kNone for an empty buffer; always kNone under the fixed model), and the
/// user requests `target`.
struct PolicyKey {
  int t = 0;
  Mdu prev = kNone;
  Mdu cur = kNone;
  Mdu buffer = kNone;
  Mdu target = kNone;
  auto operator<=>(const PolicyKey&) const = default;
};

using Policy = std::map<PolicyKey, Action>;

struct DpStats {
  std::size_t entries = 0;  // memo table entries (distinct states solved)
  std::size_t lookups = 0;  // memo hits
};

struct EvalOptions {
  bool weight_first_switch = false;  // scale the first-switch sum by g(1)
  bool record_policy = true;
};

struct EvalResult {
  double expected_cost = 0.0;
  BufferModel buffer = BufferModel::flexible;
  Mdu start = kNone;
  double start_bits = 0.0;
  Policy policy;
  DpStats stats;
};

namespace detail {

/// Open-addressing hash table from packed state keys to values.
class MemoTable {
 public:
  MemoTable() { rehash(1024); }

  const double* find(std::uint64_t key) const noexcept {
    std::size_t pos = hash(key) & mask_;
    while (true) {
      if (keys_[pos] == key) return &vals_[pos];
      if (keys_[pos] == kEmpty) return nullptr;
      pos = (pos + 1) & mask_;
    }
  }

  void insert(std::uint64_t key, double value) {
    if ((count_ + 1) * 10 > keys_.size() * 7) rehash(keys_.size() * 2);
    place(key, value);
  }

  std::size_t size() const noexcept { return count_; }

  template <class F>
  void for_each(F&& f) const {
    for (std::size_t p = 0; p < keys_.size(); ++p)
      if (keys_[p] != kEmpty) f(keys_[p], vals_[p]);
  }

 private:
  static constexpr std::uint64_t kEmpty = ~std::uint64_t{0};

  static std::size_t hash(std::uint64_t x) noexcept {
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdULL;
    x ^= x >> 33;
    return static_cast<std::size_t>(x);
  }

  void place(std::uint64_t key, double value) {
    std::size_t pos = hash(key) & mask_;
    while (keys_[pos] != kEmpty && keys_[pos] != key) pos = (pos + 1) & mask_;
    if (keys_[pos] == kEmpty) ++count_;
    keys_[pos] = key;
    vals_[pos] = value;
  }

  void rehash(std::size_t capacity) {
    std::vector<std::uint64_t> old_keys = std::move(keys_);
    std::vector<double> old_vals = std::move(vals_);
    keys_.assign(capacity, kEmpty);
    vals_.assign(capacity, 0.0);
    mask_ = capacity - 1;
    count_ = 0;
    for (std::size_t p = 0; p < old_keys.size(); ++p)
      if (old_keys[p] != kEmpty) place(old_keys[p], old_vals[p]);
  }

  std::vector<std::uint64_t> keys_;
  std::vector<double> vals_;
  std::size_t mask_ = 0;
  std::size_t count_ = 0;
};

inline constexpr std::size_t kMaxPackedMdus = 65534;

inline std::uint64_t pack_state(int t, Mdu k, Mdu i, Mdu buffer) noexcept {
  return (static_cast<std::uint64_t>(t) << 48) | (static_cast<std::uint64_t>(k + 1) << 32) |
         (static_cast<std::uint64_t>(i) << 16) | static_cast<std::uint64_t>(buffer + 1);
}

struct UnpackedState {
  int t;
  Mdu prev;
  Mdu cur;
  Mdu buffer;
};

inline UnpackedState unpack_state(std::uint64_t key) noexcept {
  return {static_cast<int>(key >> 48), static_cast<Mdu>((key >> 32) & 0xffff) - 1,
          static_cast<Mdu>((key >> 16) & 0xffff), static_cast<Mdu>(key & 0xffff) - 1};
}

inline void check_packable(const Scenario& scenario) {
  if (scenario.graph.size() > kMaxPackedMdus)
    throw InvalidInput("too many MDUs for the evaluator (" + std::to_string(scenario.graph.size()) + ")");
  if (scenario.lifetime.t_max() >= 65535) throw InvalidInput("t_max too large for the evaluator");
}

}  // namespace detail

/// Expected number of lifetime-weighted switches from state (t, prev, cur),
/// W(t,k,i) = sum_j p(k,i,j) (1 + g(t+1) W(t+1,i,j)). Depends only on the
/// navigation model, so one table serves every candidate structure.
class SwitchCountTable {
 public:
  explicit SwitchCountTable(const Scenario& scenario) : scenario_(&scenario) {
    detail::check_packable(scenario);
  }

  double at(int t, Mdu prev, Mdu cur) {
    const auto key = detail::pack_state(t, prev, cur, kNone);
    if (const double* v = memo_.find(key)) return *v;
    double total = 0.0;
    if (const auto* row = scenario_->nav.find_row(prev, cur)) {
      const double g = scenario_->lifetime.tail(t + 1);
      for (const auto& tr : *row) {
        if (tr.prob == 0.0) continue;
        total += tr.prob * (1.0 + (g == 0.0 ? 0.0 : g * at(t + 1, cur, tr.next)));
      }
    }
    // Once frozen the table is shared read-only between threads.
    if (!frozen_) memo_.insert(key, total);
    return total;
  }

  /// Fills every state reachable from the start, then freezes the table.
  void precompute() {
    at(0, kNone, scenario_->graph.start());
    frozen_ = true;
  }

 private:
  const Scenario* scenario_;
  detail::MemoTable memo_;
  bool frozen_ = false;
};

/// Replaces the decision bracket of up to two transitions by a lower bound:
/// floor * (1 + g(t+1) * W(t+1, from, to)), where floor is no larger than any
/// single transmission under the structure.
struct BracketSubstitution {
  std::array<Edge, 2> transitions{};
  std::size_t count = 0;
  double floor = 0.0;
  SwitchCountTable* counts = nullptr;

  bool matches(Mdu from, Mdu to) const noexcept {
    for (std::size_t k = 0; k < count; ++k)
      if (transitions[k].predictor == from && transitions[k].target == to) return true;
    return false;
  }
};

namespace dp {

/// Result of deciding one requested switch.
struct Choice {
  Action action;
  double value = kUnavailable;  // bits + g(t+1) * continuation
};

inline const std::vector<Transition>* row_or_throw(const Scenario& scenario, Mdu prev, Mdu cur) {
  const auto* row = scenario.nav.find_row(prev, cur);
  if (row == nullptr && !scenario.graph.neighbors(cur).empty())
    throw InvalidInput("navigation model has no row for state (" + std::to_string(prev) + ", " +
                       std::to_string(cur) + ")");
  return row;
}

/// Fixed buffer: the reference is always the displayed MDU.
template <class View>
class FixedEngine {
 public:
  FixedEngine(const Scenario& scenario, const View& view, const BracketSubstitution* sub = nullptr)
      : scenario_(&scenario), view_(&view), sub_(sub) {
    detail::check_packable(scenario);
  }

  double state_cost(int t, Mdu prev, Mdu cur) {
    const auto key = detail::pack_state(t, prev, cur, kNone);
    if (const double* v = memo_.find(key)) {
      ++stats_.lookups;
      return *v;
    }
    double total = 0.0;
    if (const auto* row = row_or_throw(*scenario_, prev, cur))
      for (const auto& tr : *row)
        if (tr.prob != 0.0) total += tr.prob * decide(t, cur, tr.next).value;
    memo_.insert(key, total);
    stats_.entries = memo_.size();
    return total;
  }

  Choice decide(int t, Mdu cur, Mdu target) {
    const double g = scenario_->lifetime.tail(t + 1);
    if (sub_ != nullptr && sub_->matches(cur, target)) {
      Choice c;
      c.value = sub_->floor * (1.0 + (g == 0.0 ? 0.0 : g * sub_->counts->at(t + 1, cur, target)));
      return c;
    }
    const double cont = g == 0.0 ? 0.0 : g * state_cost(t + 1, cur, target);
    const double one = view_->one_hop(cur, target);
    const double zero = view_->zero_hop(target);
    Choice c;
    if (one <= zero) {
      c.action = Action{ActionKind::one_hop, cur, kNone, kNone, one};
    } else {
      c.action = Action{ActionKind::zero_hop, kNone, kNone, kNone, zero};
    }
    c.value = c.action.bits + cont;
    return c;
  }

  double root(bool weight_first_switch) {
    const Mdu s = scenario_->graph.start();
    const double first = state_cost(0, kNone, s);
    return view_->zero_hop(s) + (weight_first_switch ? scenario_->lifetime.tail(1) : 1.0) * first;
  }

  Policy extract_policy() {
    Policy policy;
    std::vector<std::pair<int, std::pair<Mdu, Mdu>>> stack{{0, {kNone, scenario_->graph.start()}}};
    std::set<std::uint64_t> seen;
    while (!stack.empty()) {
      auto [t, st] = stack.back();
      stack.pop_back();
      auto [prev, cur] = st;
      if (!seen.insert(detail::pack_state(t, prev, cur, kNone)).second) continue;
      const auto* row = row_or_throw(*scenario_, prev, cur);
      if (row == nullptr) continue;
      const bool go_on = scenario_->lifetime.tail(t + 1) > 0.0;
      for (const auto& tr : *row) {
        if (tr.prob == 0.0) continue;
        policy[PolicyKey{t, prev, cur, kNone, tr.next}] = decide(t, cur, tr.next).action;
        if (go_on) stack.push_back({t + 1, {cur, tr.next}});
      }
    }
    return policy;
  }

  const DpStats& stats() const noexcept { return stats_; }

  /// Visits every solved state as (t, prev, cur, kNone).
  template <class F>
  void for_each_state(F&& f) const {
    memo_.for_each([&](std::uint64_t key, double) {
      auto s = detail::unpack_state(key);
      f(s.t, s.prev, s.cur, s.buffer);
    });
  }

 private:
  const Scenario* scenario_;
  const View* view_;
  const BracketSubstitution* sub_;
  detail::MemoTable memo_;
  DpStats stats_;
};

/// Flexible buffer: the server also picks which MDU stays buffered.
template <class View>
class FlexibleEngine {
 public:
  FlexibleEngine(const Scenario& scenario, const View& view, const BracketSubstitution* sub = nullptr)
      : scenario_(&scenario), view_(&view), sub_(sub) {
    detail::check_packable(scenario);
  }

  double state_cost(int t, Mdu prev, Mdu cur, Mdu buffer) {
    const auto key = detail::pack_state(t, prev, cur, buffer);
    if (const double* v = memo_.find(key)) {
      ++stats_.lookups;
      return *v;
    }
    double total = 0.0;
    if (const auto* row = row_or_throw(*scenario_, prev, cur))
      for (const auto& tr : *row)
        if (tr.prob != 0.0) total += tr.prob * decide(t, cur, buffer, tr.next).value;
    memo_.insert(key, total);
    stats_.entries = memo_.size();
    return total;
  }

  Choice decide(int t, Mdu cur, Mdu buffer, Mdu target) {
    const double g = scenario_->lifetime.tail(t + 1);
    if (sub_ != nullptr && sub_->matches(cur, target)) {
      Choice c;
      c.value = sub_->floor * (1.0 + (g == 0.0 ? 0.0 : g * sub_->counts->at(t + 1, cur, target)));
      return c;
    }
    auto cont = [&](Mdu next_buffer) {
      return g == 0.0 ? 0.0 : g * state_cost(t + 1, cur, target, next_buffer);
    };

    // Buffer candidates in ascending index order, empty buffer last.
    Mdu cands[2] = {cur, buffer};
    int ncand = 2;
    if (buffer == kNone || buffer == cur) {
      ncand = buffer == kNone ? 2 : 1;
    } else if (buffer < cur) {
      std::swap(cands[0], cands[1]);
    }

    Choice best;
    // 1-hop from either buffered reference.
    for (int c = 0; c < ncand; ++c) {
      const Mdu b = cands[c];
      if (b == kNone || b == target) continue;
      const double bits = view_->one_hop(b, target);
      if (bits == kUnavailable || bits > best.value) continue;
      const double v = bits + cont(b);
      if (v < best.value) best = {Action{ActionKind::one_hop, b, kNone, b, bits}, v};
    }
    // 2-hop through an intermediate MDU that becomes the new reference.
    view_->for_each_predecessor(target, [&](Mdu eta) {
      if (eta == target) return;
      double first = kUnavailable;
      Mdu tau = kNone;
      for (int c = 0; c < ncand; ++c) {
        const Mdu b = cands[c];
        if (b == kNone || b == eta) continue;
        const double r = view_->one_hop(b, eta);
        if (r < first) {
          first = r;
          tau = b;
        }
      }
      if (first == kUnavailable) return;
      const double bits = first + view_->one_hop(eta, target);
      if (bits > best.value) return;
      const double v = bits + cont(eta);
      const bool wins = v < best.value ||
                        (v == best.value && best.action.kind == ActionKind::two_hop && eta < best.action.via);
      if (wins) best = {Action{ActionKind::two_hop, tau, eta, eta, bits}, v};
    });
    // 0-hop, keeping whichever reference is cheaper afterwards.
    const double zero = view_->zero_hop(target);
    if (zero <= best.value) {
      for (int c = 0; c < ncand; ++c) {
        const double v = zero + cont(cands[c]);
        if (v < best.value) best = {Action{ActionKind::zero_hop, kNone, kNone, cands[c], zero}, v};
      }
    }
    return best;
  }

  double root(bool weight_first_switch) {
    const Mdu s = scenario_->graph.start();
    const double first = state_cost(0, kNone, s, kNone);
    return view_->zero_hop(s) + (weight_first_switch ? scenario_->lifetime.tail(1) : 1.0) * first;
  }

  Policy extract_policy() {
    struct Item {
      int t;
      Mdu prev, cur, buffer;
    };
    Policy policy;
    std::vector<Item> stack{{0, kNone, scenario_->graph.start(), kNone}};
    std::set<std::uint64_t> seen;
    while (!stack.empty()) {
      Item it = stack.back();
      stack.pop_back();
      if (!seen.insert(detail::pack_state(it.t, it.prev, it.cur, it.buffer)).second) continue;
      const auto* row = row_or_throw(*scenario_, it.prev, it.cur);
      if (row == nullptr) continue;
      const bool go_on = scenario_->lifetime.tail(it.t + 1) > 0.0;
      for (const auto& tr : *row) {
        if (tr.prob == 0.0) continue;
        Action a = decide(it.t, it.cur, it.buffer, tr.next).action;
        policy[PolicyKey{it.t, it.prev, it.cur, it.buffer, tr.next}] = a;
        if (go_on) stack.push_back({it.t + 1, it.cur, tr.next, a.next_buffer});
      }
    }
    return policy;
  }

  const DpStats& stats() const noexcept { return stats_; }

  template <class F>
  void for_each_state(F&& f) const {
    memo_.for_each([&](std::uint64_t key, double) {
      auto s = detail::unpack_state(key);
      f(s.t, s.prev, s.cur, s.buffer);
    });
  }

 private:
  const Scenario* scenario_;
  const View* view_;
  const BracketSubstitution* sub_;
  detail::MemoTable memo_;
  DpStats stats_;
};

}  // namespace dp

/// Expected cost through any edge view (StructureIndex wrappers).
template <class View>
double expected_cost(const Scenario& scenario, const View& view, BufferModel buffer,
                     const EvalOptions& options = {}, DpStats* stats = nullptr) {
  if (buffer == BufferModel::fixed) {
    dp::FixedEngine<View> engine(scenario, view);
    double v = engine.root(options.weight_first_switch);
    if (stats) *stats = engine.stats();
    return v;
  }
  dp::FlexibleEngine<View> engine(scenario, view);
  double v = engine.root(options.weight_first_switch);
  if (stats) *stats = engine.stats();
  return v;
}

inline EvalResult evaluate(const Scenario& scenario, const SizeTable& sizes, const Structure& structure,
                           BufferModel buffer, const EvalOptions& options = {}) {
  if (sizes.size() != scenario.graph.size())
    throw InvalidInput("size table covers " + std::to_string(sizes.size()) + " MDUs, scenario has " +
                       std::to_string(scenario.graph.size()));
  StructureIndex index(structure, sizes);
  PlainIndex view(index);
  EvalResult result;
  result.buffer = buffer;
  result.start = scenario.graph.start();
  result.start_bits = view.zero_hop(result.start);
  auto run = [&](auto& engine) {
    result.expected_cost = engine.root(options.weight_first_switch);
    result.stats = engine.stats();
    if (options.record_policy) result.policy = engine.extract_policy();
  };
  if (buffer == BufferModel::fixed) {
    dp::FixedEngine<PlainIndex> engine(scenario, view);
    run(engine);
  } else {
    dp::FlexibleEngine<PlainIndex> engine(scenario, view);
    run(engine);
  }
  return result;
}

inline EvalResult eval_fixed(const Scenario& scenario, const SizeTable& sizes, const Structure& structure,
                             const EvalOptions& options = {}) {
  return evaluate(scenario, sizes, structure, BufferModel::fixed, options);
}

inline EvalResult eval_flexible(const Scenario& scenario, const SizeTable& sizes, const Structure& structure,
                                const EvalOptions& options = {}) {
  return evaluate(scenario, sizes, structure, BufferModel::flexible, options);
}

inline const Policy& extract_policy(const EvalResult& result) noexcept { return result.policy; }

}  // namespace navstruct
