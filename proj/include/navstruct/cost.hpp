#pragma once

// Coding sizes, the redundant MDU structure and the per-request overheads
// derived from them.

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "navstruct/errors.hpp"
#include "navstruct/scenario.hpp"

namespace navstruct {

inline constexpr double kUnavailable = std::numeric_limits<double>::infinity();

/// Coding sizes in bits: |I_j|, |M_j| and |P_j(i)| for predictor i, target j.
class SizeTable {
 public:
  SizeTable() = default;
  explicit SizeTable(std::size_t n)
      : n_(n),
        intra_(n, kUnset),
        merge_(n, kUnset),
        inter_(n * n, kUnset) {}

  std::size_t size() const noexcept { return n_; }

  void set_intra(Mdu j, double bits) { intra_[checked(j)] = positive(bits); }
  void set_merge(Mdu j, double bits) { merge_[checked(j)] = positive(bits); }
  void set_inter(Mdu predictor, Mdu target, double bits) {
    if (predictor == target) throw InvalidInput("P-MDU predictor equals target");
    inter_[checked(predictor) * n_ + checked(target)] = positive(bits);
  }

  double intra(Mdu j) const { return lookup(intra_, j, "I", j); }
  double merge(Mdu j) const { return lookup(merge_, j, "M", j); }
  double inter(Mdu predictor, Mdu target) const {
    if (!in_range(predictor) || !in_range(target) || predictor == target)
      throw CorruptTable("no P size for pair (" + std::to_string(predictor) + ", " +
                         std::to_string(target) + ")");
    double v = inter_[static_cast<std::size_t>(predictor) * n_ + static_cast<std::size_t>(target)];
    if (std::isnan(v))
      throw CorruptTable("no P size for pair (" + std::to_string(predictor) + ", " +
                         std::to_string(target) + ")");
    return v;
  }

  bool has_intra(Mdu j) const { return in_range(j) && !std::isnan(intra_[static_cast<std::size_t>(j)]); }
  bool has_merge(Mdu j) const { return in_range(j) && !std::isnan(merge_[static_cast<std::size_t>(j)]); }
  bool has_inter(Mdu predictor, Mdu target) const {
    return in_range(predictor) && in_range(target) && predictor != target &&
           !std::isnan(inter_[static_cast<std::size_t>(predictor) * n_ + static_cast<std::size_t>(target)]);
  }

  /// True when every I, M and off-diagonal P size is defined.
  bool complete() const {
    for (std::size_t j = 0; j < n_; ++j)
      if (std::isnan(intra_[j]) || std::isnan(merge_[j])) return false;
    for (std::size_t a = 0; a < n_; ++a)
      for (std::size_t b = 0; b < n_; ++b)
        if (a != b && std::isnan(inter_[a * n_ + b])) return false;
    return true;
  }

  friend bool operator==(const SizeTable& a, const SizeTable& b) {
    auto same = [](const std::vector<double>& x, const std::vector<double>& y) {
      if (x.size() != y.size()) return false;
      for (std::size_t k = 0; k < x.size(); ++k)
        if (!(x[k] == y[k] || (std::isnan(x[k]) && std::isnan(y[k])))) return false;
      return true;
    };
    return a.n_ == b.n_ && same(a.intra_, b.intra_) && same(a.merge_, b.merge_) &&
           same(a.inter_, b.inter_);
  }

 private:
  static constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

  bool in_range(Mdu j) const noexcept { return j >= 0 && static_cast<std::size_t>(j) < n_; }
  std::size_t checked(Mdu j) const {
    if (!in_range(j)) throw InvalidInput("MDU index " + std::to_string(j) + " out of range");
    return static_cast<std::size_t>(j);
  }
  static double positive(double bits) {
    if (!(bits > 0.0) || !std::isfinite(bits)) throw InvalidInput("coding sizes must be positive and finite");
    return bits;
  }
  double lookup(const std::vector<double>& v, Mdu j, const char* kind, Mdu label) const {
    if (!in_range(j) || std::isnan(v[static_cast<std::size_t>(j)]))
      throw CorruptTable(std::string("no ") + kind + " size for MDU " + std::to_string(label));
    return v[static_cast<std::size_t>(j)];
  }

  std::size_t n_ = 0;
  std::vector<double> intra_;
  std::vector<double> merge_;
  std::vector<double> inter_;
};

/// Stored P-MDU P_target(predictor).
struct Edge {
  Mdu predictor = kNone;
  Mdu target = kNone;
  auto operator<=>(const Edge&) const = default;
};

/// A landmark and the MDUs it predicts.
struct Partition {
  Mdu landmark = kNone;
  std::vector<Mdu> members;  // sorted, contains landmark
  friend bool operator==(const Partition&, const Partition&) = default;
};

/// The stored representation set. M-MDUs are implicit for every MDU.
struct Structure {
  std::set<Mdu> intra;
  std::set<Edge> edges;
  std::vector<Partition> landmarks;

  bool has_edge(Mdu predictor, Mdu target) const { return edges.contains(Edge{predictor, target}); }
  friend bool operator==(const Structure&, const Structure&) = default;
};

/// Checks Structure invariants against an MDU count; returns problems found.
inline std::vector<std::string> validate_structure(const Structure& s, std::size_t n) {
  std::vector<std::string> out;
  auto in_range = [n](Mdu j) { return j >= 0 && static_cast<std::size_t>(j) < n; };
  for (Mdu j : s.intra)
    if (!in_range(j)) out.push_back("I-MDU index " + std::to_string(j) + " out of range");
  for (const auto& e : s.edges) {
    if (!in_range(e.predictor) || !in_range(e.target))
      out.push_back("P-edge (" + std::to_string(e.predictor) + ", " + std::to_string(e.target) + ") out of range");
    else if (e.predictor == e.target)
      out.push_back("P-edge self loop at " + std::to_string(e.target));
  }
  if (s.landmarks.empty()) return out;

  std::vector<int> owner(n, -1);
  for (std::size_t p = 0; p < s.landmarks.size(); ++p) {
    const auto& part = s.landmarks[p];
    if (std::find(part.members.begin(), part.members.end(), part.landmark) == part.members.end())
      out.push_back("landmark " + std::to_string(part.landmark) + " is not a member of its partition");
    if (!s.intra.contains(part.landmark))
      out.push_back("landmark " + std::to_string(part.landmark) + " has no stored I-MDU");
    for (Mdu j : part.members) {
      if (!in_range(j)) {
        out.push_back("partition member " + std::to_string(j) + " out of range");
        continue;
      }
      if (owner[static_cast<std::size_t>(j)] != -1)
        out.push_back("MDU " + std::to_string(j) + " belongs to two partitions");
      owner[static_cast<std::size_t>(j)] = static_cast<int>(p);
      if (j != part.landmark && !s.has_edge(part.landmark, j))
        out.push_back("missing landmark edge (" + std::to_string(part.landmark) + ", " + std::to_string(j) + ")");
    }
  }
  for (std::size_t j = 0; j < n; ++j)
    if (owner[j] == -1) out.push_back("MDU " + std::to_string(j) + " is not covered by any partition");
  for (const auto& a : s.landmarks)
    for (const auto& b : s.landmarks)
      if (a.landmark != b.landmark && !s.has_edge(a.landmark, b.landmark))
        out.push_back("missing inter-landmark edge (" + std::to_string(a.landmark) + ", " +
                      std::to_string(b.landmark) + ")");
  return out;
}

/// b(Theta): stored I-MDUs plus stored P-MDUs. M-MDUs are excluded.
inline double storage_cost(const Structure& structure, const SizeTable& sizes) {
  double bits = 0.0;
  for (Mdu j : structure.intra) bits += sizes.intra(j);
  for (const auto& e : structure.edges) bits += sizes.inter(e.predictor, e.target);
  return bits;
}

/// r^P_target(predictor) = |P| + |M| if the P-MDU is stored; nullopt otherwise.
inline std::optional<double> one_hop_overhead(const Structure& structure, const SizeTable& sizes,
                                              Mdu predictor, Mdu target) {
  if (predictor == target) throw InvalidInput("one-hop overhead needs predictor != target");
  if (!structure.has_edge(predictor, target)) return std::nullopt;
  return sizes.inter(predictor, target) + sizes.merge(target);
}

/// Cheapest independent reconstruction of an MDU and how it is formed.
struct ZeroHop {
  double bits = kUnavailable;
  Mdu via = kNone;  // kNone: own I-MDU; otherwise I_via + P_target(via) + M_target
};

/// r^I_target: min of |I_target| (if stored) and |I_l| + |P_target(l)| + |M_target|
/// over stored I-MDUs l with a stored edge (l, target).
inline ZeroHop zero_hop_choice(const Structure& structure, const SizeTable& sizes, Mdu target) {
  ZeroHop best;
  if (structure.intra.contains(target)) best.bits = sizes.intra(target);
  for (Mdu l : structure.intra) {
    if (l == target || !structure.has_edge(l, target)) continue;
    double bits = sizes.intra(l) + sizes.inter(l, target) + sizes.merge(target);
    if (bits < best.bits) best = {bits, l};
  }
  if (best.bits == kUnavailable)
    throw InfeasibleStructure("MDU " + std::to_string(target) + " has no independent reconstruction");
  return best;
}

inline double zero_hop_overhead(const Structure& structure, const SizeTable& sizes, Mdu target) {
  return zero_hop_choice(structure, sizes, target).bits;
}

// ---------------------------------------------------------------------------
// Indexed views used by the evaluators.

/// Dense lookup tables for one (Structure, SizeTable) pair.
///
/// Construction throws InfeasibleStructure when any MDU lacks a 0-hop option.
class StructureIndex {
 public:
  StructureIndex(const Structure& structure, const SizeTable& sizes)
      : sizes_(&sizes),
        n_(sizes.size()),
        edge_(n_ * n_, 0),
        in_(n_),
        out_(n_),
        intra_(n_, 0),
        zero_hop_(n_) {
    if (auto problems = validate_structure(Structure{structure.intra, structure.edges, {}}, n_);
        !problems.empty())
      throw InvalidInput("invalid structure: " + problems.front());
    for (Mdu j : structure.intra) {
      intra_[static_cast<std::size_t>(j)] = 1;
      min_intra_ = std::min(min_intra_, sizes.intra(j));
    }
    for (const auto& e : structure.edges) {
      edge_[idx(e.predictor, e.target)] = 1;
      in_[static_cast<std::size_t>(e.target)].push_back(e.predictor);
      out_[static_cast<std::size_t>(e.predictor)].push_back(e.target);
      min_inter_ = std::min(min_inter_, sizes.inter(e.predictor, e.target));
    }
    for (std::size_t j = 0; j < n_; ++j) {
      ZeroHop best;
      if (intra_[j]) best.bits = sizes.intra(static_cast<Mdu>(j));
      for (Mdu l : in_[j]) {
        if (!intra_[static_cast<std::size_t>(l)]) continue;
        double bits = sizes.intra(l) + sizes.inter(l, static_cast<Mdu>(j)) + sizes.merge(static_cast<Mdu>(j));
        if (bits < best.bits) best = {bits, l};
      }
      if (best.bits == kUnavailable)
        throw InfeasibleStructure("MDU " + std::to_string(j) + " has no independent reconstruction");
      zero_hop_[j] = best;
    }
  }

  const SizeTable& sizes() const noexcept { return *sizes_; }
  std::size_t size() const noexcept { return n_; }

  bool has_edge(Mdu a, Mdu b) const noexcept {
    return a >= 0 && b >= 0 && edge_[idx(a, b)] != 0;
  }
  bool is_intra(Mdu j) const noexcept { return intra_[static_cast<std::size_t>(j)] != 0; }
  double one_hop(Mdu a, Mdu b) const {
    return has_edge(a, b) ? sizes_->inter(a, b) + sizes_->merge(b) : kUnavailable;
  }
  double zero_hop(Mdu j) const noexcept { return zero_hop_[static_cast<std::size_t>(j)].bits; }
  const ZeroHop& zero_hop_choice(Mdu j) const noexcept { return zero_hop_[static_cast<std::size_t>(j)]; }
  std::span<const Mdu> predecessors(Mdu j) const noexcept { return in_[static_cast<std::size_t>(j)]; }
  std::span<const Mdu> successors(Mdu i) const noexcept { return out_[static_cast<std::size_t>(i)]; }

  double min_inter() const noexcept { return min_inter_; }
  double min_intra() const noexcept { return min_intra_; }

 private:
  std::size_t idx(Mdu a, Mdu b) const noexcept {
    return static_cast<std::size_t>(a) * n_ + static_cast<std::size_t>(b);
  }

  const SizeTable* sizes_;
  std::size_t n_;
  std::vector<std::uint8_t> edge_;
  std::vector<std::vector<Mdu>> in_;
  std::vector<std::vector<Mdu>> out_;
  std::vector<std::uint8_t> intra_;
  std::vector<ZeroHop> zero_hop_;
  double min_inter_ = kUnavailable;
  double min_intra_ = kUnavailable;
};

/// A StructureIndex plus up to two extra P-edges, without copying the base.
/// Greedy search prices candidate structures through this view.
class AugmentedIndex {
 public:
  AugmentedIndex(const StructureIndex& base, std::span<const Edge> extra) : base_(&base) {
    if (extra.size() > extra_.size()) throw InvalidInput("at most two extra edges");
    for (const auto& e : extra) {
      if (base.has_edge(e.predictor, e.target)) continue;
      extra_[count_++] = e;
    }
    min_inter_ = base.min_inter();
    for (std::size_t k = 0; k < count_; ++k)
      min_inter_ = std::min(min_inter_, base.sizes().inter(extra_[k].predictor, extra_[k].target));
  }

  const SizeTable& sizes() const noexcept { return base_->sizes(); }
  std::size_t size() const noexcept { return base_->size(); }
  std::span<const Edge> extra() const noexcept { return {extra_.data(), count_}; }

  bool has_edge(Mdu a, Mdu b) const noexcept {
    if (base_->has_edge(a, b)) return true;
    for (std::size_t k = 0; k < count_; ++k)
      if (extra_[k].predictor == a && extra_[k].target == b) return true;
    return false;
  }
  bool is_intra(Mdu j) const noexcept { return base_->is_intra(j); }
  double one_hop(Mdu a, Mdu b) const {
    return has_edge(a, b) ? sizes().inter(a, b) + sizes().merge(b) : kUnavailable;
  }
  double zero_hop(Mdu j) const {
    double best = base_->zero_hop(j);
    for (std::size_t k = 0; k < count_; ++k) {
      const auto& e = extra_[k];
      if (e.target == j && base_->is_intra(e.predictor))
        best = std::min(best, sizes().intra(e.predictor) + sizes().inter(e.predictor, j) + sizes().merge(j));
    }
    return best;
  }
  template <class F>
  void for_each_predecessor(Mdu j, F&& f) const {
    for (Mdu l : base_->predecessors(j)) f(l);
    for (std::size_t k = 0; k < count_; ++k)
      if (extra_[k].target == j) f(extra_[k].predictor);
  }

  double min_inter() const noexcept { return min_inter_; }
  double min_intra() const noexcept { return base_->min_intra(); }

 private:
  const StructureIndex* base_;
  std::array<Edge, 2> extra_{};
  std::size_t count_ = 0;
  double min_inter_ = kUnavailable;
};

/// StructureIndex exposed through the same interface as AugmentedIndex.
class PlainIndex {
 public:
  explicit PlainIndex(const StructureIndex& base) : base_(&base) {}
  const SizeTable& sizes() const noexcept { return base_->sizes(); }
  std::size_t size() const noexcept { return base_->size(); }
  bool has_edge(Mdu a, Mdu b) const noexcept { return base_->has_edge(a, b); }
  bool is_intra(Mdu j) const noexcept { return base_->is_intra(j); }
  double one_hop(Mdu a, Mdu b) const { return base_->one_hop(a, b); }
  double zero_hop(Mdu j) const noexcept { return base_->zero_hop(j); }
  template <class F>
  void for_each_predecessor(Mdu j, F&& f) const {
    for (Mdu l : base_->predecessors(j)) f(l);
  }
  double min_inter() const noexcept { return base_->min_inter(); }
  double min_intra() const noexcept { return base_->min_intra(); }

 private:
  const StructureIndex* base_;
};

}  // namespace navstruct
