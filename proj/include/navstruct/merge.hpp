#pragma once

// Piecewise-constant merge operator: one (W, c) per coefficient maps every
// candidate reconstruction onto the same target value.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "navstruct/errors.hpp"

namespace navstruct {

struct PwcParams {
  std::int64_t w_step = 1;
  double shift = 0.0;  // in [0, w_step)
};

/// f(x) = floor((x + c) / W) * W + W / 2 - c.
inline double pwc_eval(const PwcParams& p, std::int64_t x) {
  const double w = static_cast<double>(p.w_step);
  return std::floor((static_cast<double>(x) + p.shift) / w) * w + w / 2.0 - p.shift;
}

/// Shift that puts target at the center of its bin, reduced into [0, W).
inline double canonical_shift(std::int64_t w_step, std::int64_t target) {
  const double w = static_cast<double>(w_step);
  const double c = std::fmod(w / 2.0 - static_cast<double>(target), w);
  return c < 0.0 ? c + w : c;
}

/// Smallest W with every value in [target - W/2, target + W/2).
inline PwcParams select_merge_params(std::span<const std::int64_t> values, std::int64_t target) {
  if (values.empty()) throw InvalidInput("merge needs at least one value");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  std::int64_t w = 1;
  if (*hi >= target) w = std::max(w, 2 * (*hi - target) + 1);
  if (*lo < target) w = std::max(w, 2 * (target - *lo));
  return {w, canonical_shift(w, target)};
}

inline PwcParams select_merge_params(const std::vector<std::int64_t>& values, std::int64_t target) {
  return select_merge_params(std::span<const std::int64_t>(values), target);
}

/// Coarse side-information model: ceil(log2 W) plus a fixed per-coefficient
/// cost. Only used for demos.
inline constexpr double kMergeSideConstant = 1.0;

inline double merge_side_info_size(const std::vector<std::pair<std::vector<std::int64_t>, std::int64_t>>& block) {
  double bits = 0.0;
  for (const auto& [values, target] : block) {
    const auto p = select_merge_params(values, target);
    bits += std::ceil(std::log2(static_cast<double>(p.w_step))) + kMergeSideConstant;
  }
  return bits;
}

}  // namespace navstruct
