#pragma once

// Scenario generators for light-field view-area grids and 360-degree viewport
// logs, plus the synthetic distance-based size model.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <queue>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/special_functions/legendre.hpp>

#include "navstruct/cost.hpp"
#include "navstruct/errors.hpp"
#include "navstruct/scenario.hpp"

namespace navstruct {

struct LifetimeDefaults {
  double mu = 0.0;
  int t_max = 0;
};

/// t_max is a third of the anchor view count, mu half of t_max.
inline LifetimeDefaults lifetime_defaults(long anchor_view_count) {
  if (anchor_view_count < 3) throw InvalidInput("anchor view count must be at least 3");
  const int t_max = static_cast<int>(anchor_view_count / 3);
  return {0.5 * t_max, t_max};
}

/// The fixed lifetime used for viewport scenarios.
inline constexpr LifetimeDefaults kViewportLifetime{3.0, 8};

struct GeneratedScenario {
  Scenario scenario;
  SizeTable sizes;
  std::vector<std::string> warnings;
};

/// |I| = 11 p, |M| = 3.5 p and |P_j(i)| = p (0.2 + 0.8 d(i, j)).
template <class Distance>
SizeTable distance_sizes(std::size_t n, double p_unit, Distance&& d) {
  if (!(p_unit > 0.0) || !std::isfinite(p_unit)) throw InvalidInput("p_unit must be positive");
  SizeTable t(n);
  for (Mdu j = 0; static_cast<std::size_t>(j) < n; ++j) {
    t.set_intra(j, 11.0 * p_unit);
    t.set_merge(j, 3.5 * p_unit);
    for (Mdu i = 0; static_cast<std::size_t>(i) < n; ++i)
      if (i != j) t.set_inter(i, j, p_unit * (0.2 + 0.8 * static_cast<double>(d(i, j))));
  }
  return t;
}

// ---------------------------------------------------------------------------
// Light-field grid

struct LfGridSpec {
  int rows = 4;
  int cols = 4;
  double sigma = 0.5;
  double p_unit = 1.0;
  int quad_samples = 4;
};

namespace lf_detail {

/// Gauss-Legendre nodes and weights mapped to [0, 1].
inline std::vector<std::pair<double, double>> unit_rule(int samples) {
  std::vector<std::pair<double, double>> rule;
  const auto n = static_cast<unsigned>(samples);
  for (double z : boost::math::legendre_p_zeros<double>(static_cast<int>(n))) {
    const double dp = boost::math::legendre_p_prime<double>(static_cast<int>(n), z);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.emplace_back(0.5 * (1.0 + z), 0.5 * w);
    if (z != 0.0) rule.emplace_back(0.5 * (1.0 - z), 0.5 * w);
  }
  std::sort(rule.begin(), rule.end());
  return rule;
}

/// Per-axis factor of the switch kernel: integral over unit cells of
/// exp(-(u - 2v + w)^2 / 2 sigma^2), where the cells' offsets combine to
/// `offset` = a_k - 2 a_i + a_j.
inline std::array<double, 5> switch_factors(double sigma, int samples) {
  const auto rule = unit_rule(samples);
  std::array<double, 5> f{};
  for (int d = -2; d <= 2; ++d) {
    double acc = 0.0;
    for (const auto& [a, wa] : rule)
      for (const auto& [b, wb] : rule)
        for (const auto& [c, wc] : rule) {
          const double x = d + a - 2.0 * b + c;
          acc += wa * wb * wc * std::exp(-x * x / (2.0 * sigma * sigma));
        }
    f[static_cast<std::size_t>(d + 2)] = acc;
  }
  return f;
}

/// Per-axis factor of the start kernel exp(-(w - o)^2 / 2 sigma^2).
inline std::array<double, 3> start_factors(double sigma, int samples) {
  const auto rule = unit_rule(samples);
  std::array<double, 3> f{};
  for (int d = -1; d <= 1; ++d) {
    double acc = 0.0;
    for (const auto& [o, wo] : rule)
      for (const auto& [w, ww] : rule) {
        const double x = d + w - o;
        acc += wo * ww * std::exp(-x * x / (2.0 * sigma * sigma));
      }
    f[static_cast<std::size_t>(d + 1)] = acc;
  }
  return f;
}

inline std::vector<Transition> normalize(std::vector<Transition> row) {
  double z = 0.0;
  for (const auto& tr : row) z += tr.prob;
  for (auto& tr : row) tr.prob /= z;
  return row;
}

}  // namespace lf_detail

/// View-area grid with 8-connected switching and Gaussian switch tendencies.
/// MDU r * cols + c is the area in row r, column c; sessions start at the
/// center area. The lifetime follows lifetime_defaults of the anchor grid.
inline GeneratedScenario build_lf_scenario(const LfGridSpec& spec) {
  if (spec.rows < 2 || spec.cols < 2) throw InvalidInput("grid needs at least 2 rows and 2 columns");
  if (!(spec.sigma > 0.0) || !std::isfinite(spec.sigma)) throw InvalidInput("sigma must be positive");
  if (spec.quad_samples < 1) throw InvalidInput("quad_samples must be at least 1");
  const int rows = spec.rows, cols = spec.cols;
  const auto n = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  auto id = [cols](int r, int c) { return static_cast<Mdu>(r * cols + c); };

  std::vector<std::vector<Mdu>> nb(n);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc) {
          const int rr = r + dr, cc = c + dc;
          if ((dr || dc) && rr >= 0 && rr < rows && cc >= 0 && cc < cols) nb[id(r, c)].push_back(id(rr, cc));
        }
  for (auto& v : nb) std::sort(v.begin(), v.end());

  GeneratedScenario out;
  auto& sc = out.scenario;
  const Mdu start = id(rows / 2, cols / 2);
  sc.graph = MediaGraph(nb, start);

  const auto fs = lf_detail::switch_factors(spec.sigma, spec.quad_samples);
  const auto f0 = lf_detail::start_factors(spec.sigma, spec.quad_samples);
  auto row_of = [cols](Mdu m) { return static_cast<int>(m) / cols; };
  auto col_of = [cols](Mdu m) { return static_cast<int>(m) % cols; };

  {
    std::vector<Transition> row;
    for (Mdu j : nb[static_cast<std::size_t>(start)]) {
      const int dr = row_of(j) - row_of(start), dc = col_of(j) - col_of(start);
      row.push_back({j, f0[static_cast<std::size_t>(dr + 1)] * f0[static_cast<std::size_t>(dc + 1)]});
    }
    sc.nav.set_start_row(lf_detail::normalize(std::move(row)));
  }
  for (Mdu i = 0; static_cast<std::size_t>(i) < n; ++i)
    for (Mdu k : nb[static_cast<std::size_t>(i)]) {
      std::vector<Transition> row;
      for (Mdu j : nb[static_cast<std::size_t>(i)]) {
        const int dr = row_of(k) - 2 * row_of(i) + row_of(j);
        const int dc = col_of(k) - 2 * col_of(i) + col_of(j);
        row.push_back({j, fs[static_cast<std::size_t>(dr + 2)] * fs[static_cast<std::size_t>(dc + 2)]});
      }
      sc.nav.set_row(k, i, lf_detail::normalize(std::move(row)));
    }

  const auto life = lifetime_defaults(static_cast<long>(rows + 1) * (cols + 1));
  sc.lifetime = build_lifetime_tail(life.mu, life.t_max);
  out.sizes = distance_sizes(n, spec.p_unit, [&](Mdu a, Mdu b) {
    return std::max(std::abs(row_of(a) - row_of(b)), std::abs(col_of(a) - col_of(b)));
  });
  return out;
}

// ---------------------------------------------------------------------------
// 360-degree viewports

struct TrajectoryLog {
  std::vector<std::vector<Mdu>> sessions;
};

/// One session per line, whitespace-separated viewport indices. Blank lines
/// and lines starting with '#' are skipped.
inline TrajectoryLog parse_trajectory_log(std::istream& in) {
  TrajectoryLog log;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::vector<Mdu> s;
    std::string tok;
    while (ls >> tok) {
      std::size_t used = 0;
      long v = -1;
      try {
        v = std::stol(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size() || v < 0) throw InvalidInput("trajectory line " + std::to_string(line_no) + ": bad index '" + tok + "'");
      s.push_back(static_cast<Mdu>(v));
    }
    log.sessions.push_back(std::move(s));
  }
  return log;
}

/// Random head-movement sessions on a ring of viewports: mostly small steps
/// that tend to keep their direction.
inline TrajectoryLog synthetic_trajectory_log(int n_viewports, int sessions, int length, std::uint64_t seed) {
  if (n_viewports < 2 || sessions < 1 || length < 1) throw InvalidInput("bad synthetic log parameters");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  TrajectoryLog log;
  for (int s = 0; s < sessions; ++s) {
    std::vector<Mdu> path;
    int cur = u(rng) < 0.6 ? 0 : static_cast<int>(rng() % static_cast<std::uint64_t>(n_viewports));
    int dir = u(rng) < 0.5 ? -1 : 1;
    path.push_back(static_cast<Mdu>(cur));
    for (int t = 1; t < length; ++t) {
      const double x = u(rng);
      if (x < 0.15) dir = -dir;
      const int step = x > 0.9 ? 2 : 1;
      cur = ((cur + dir * step) % n_viewports + n_viewports) % n_viewports;
      path.push_back(static_cast<Mdu>(cur));
    }
    log.sessions.push_back(std::move(path));
  }
  return log;
}

inline constexpr double kViewportSmoothing = 1e-3;

/// Empirical navigation model from head-movement sessions.
///
/// Repeated consecutive viewports are collapsed. N(i) is the set of observed
/// successors of i; p(k, i, j) uses the counts of (k, i) -> j when that
/// context occurs in the log and the counts of i -> j otherwise, each with
/// additive smoothing over N(i). A viewport never left becomes uniform over
/// all others, with a warning.
inline Scenario build_viewport_scenario(const TrajectoryLog& log, int n_viewports,
                                        std::vector<std::string>* warnings = nullptr) {
  if (n_viewports < 2) throw InvalidInput("need at least 2 viewports");
  if (log.sessions.empty()) throw InvalidInput("trajectory log is empty");
  const auto n = static_cast<std::size_t>(n_viewports);

  std::vector<std::vector<Mdu>> paths;
  for (std::size_t s = 0; s < log.sessions.size(); ++s) {
    const auto& raw = log.sessions[s];
    if (raw.empty()) throw InvalidInput("session " + std::to_string(s) + " is empty");
    std::vector<Mdu> p;
    for (Mdu v : raw) {
      if (v < 0 || static_cast<std::size_t>(v) >= n)
        throw InvalidInput("session " + std::to_string(s) + " has viewport " + std::to_string(v) + " outside [0, " +
                           std::to_string(n) + ")");
      if (p.empty() || p.back() != v) p.push_back(v);
    }
    paths.push_back(std::move(p));
  }

  std::vector<std::map<Mdu, double>> marginal(n);
  std::map<std::pair<Mdu, Mdu>, std::map<Mdu, double>> context;
  std::vector<double> first(n, 0.0);
  for (const auto& p : paths) {
    first[static_cast<std::size_t>(p.front())] += 1.0;
    for (std::size_t t = 1; t < p.size(); ++t) {
      marginal[static_cast<std::size_t>(p[t - 1])][p[t]] += 1.0;
      if (t >= 2) context[{p[t - 2], p[t - 1]}][p[t]] += 1.0;
    }
  }

  std::vector<std::vector<Mdu>> nb(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (marginal[i].empty()) {
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) nb[i].push_back(static_cast<Mdu>(j));
      if (warnings) warnings->push_back("viewport " + std::to_string(i) + " has no observed successor; using uniform switches");
    } else {
      for (const auto& [j, c] : marginal[i]) nb[i].push_back(j);
    }
  }

  const Mdu start = static_cast<Mdu>(std::max_element(first.begin(), first.end()) - first.begin());
  auto smoothed = [&](Mdu i, const std::map<Mdu, double>* counts) {
    const auto& cand = nb[static_cast<std::size_t>(i)];
    double z = kViewportSmoothing * static_cast<double>(cand.size());
    if (counts)
      for (const auto& [j, c] : *counts) z += c;
    std::vector<Transition> row;
    for (Mdu j : cand) {
      double c = kViewportSmoothing;
      if (counts)
        if (auto it = counts->find(j); it != counts->end()) c += it->second;
      row.push_back({j, c / z});
    }
    return row;
  };
  auto counts_for = [&](Mdu k, Mdu i) -> const std::map<Mdu, double>* {
    if (auto it = context.find({k, i}); it != context.end()) return &it->second;
    const auto& m = marginal[static_cast<std::size_t>(i)];
    return m.empty() ? nullptr : &m;
  };

  Scenario sc;
  sc.graph = MediaGraph(nb, start);
  {
    // First moves out of the start viewport, from sessions that begin there.
    std::map<Mdu, double> moves;
    for (const auto& p : paths)
      if (p.front() == start && p.size() >= 2) moves[p[1]] += 1.0;
    sc.nav.set_start_row(smoothed(start, moves.empty() ? counts_for(kNone, start) : &moves));
  }
  for (Mdu k = 0; static_cast<std::size_t>(k) < n; ++k)
    for (Mdu i : nb[static_cast<std::size_t>(k)]) sc.nav.set_row(k, i, smoothed(i, counts_for(k, i)));
  sc.lifetime = build_lifetime_tail(kViewportLifetime.mu, kViewportLifetime.t_max);
  return sc;
}

/// Undirected hop distances over the switch graph; unreachable pairs are
/// placed one hop beyond the farthest reachable pair.
inline std::vector<std::vector<int>> hop_distances(const MediaGraph& graph) {
  const std::size_t n = graph.size();
  std::vector<std::vector<Mdu>> und(n);
  for (Mdu i = 0; static_cast<std::size_t>(i) < n; ++i)
    for (Mdu j : graph.neighbors(i)) {
      und[static_cast<std::size_t>(i)].push_back(j);
      und[static_cast<std::size_t>(j)].push_back(i);
    }
  std::vector<std::vector<int>> d(n, std::vector<int>(n, -1));
  int far = 0;
  for (std::size_t s = 0; s < n; ++s) {
    std::queue<Mdu> q;
    d[s][s] = 0;
    q.push(static_cast<Mdu>(s));
    while (!q.empty()) {
      const Mdu x = q.front();
      q.pop();
      for (Mdu y : und[static_cast<std::size_t>(x)])
        if (d[s][static_cast<std::size_t>(y)] < 0) {
          d[s][static_cast<std::size_t>(y)] = d[s][static_cast<std::size_t>(x)] + 1;
          far = std::max(far, d[s][static_cast<std::size_t>(y)]);
          q.push(y);
        }
    }
  }
  for (auto& row : d)
    for (int& v : row)
      if (v < 0) v = far + 1;
  return d;
}

/// Viewport sizes from hop distance in the estimated switch graph.
inline SizeTable viewport_sizes(const MediaGraph& graph, double p_unit) {
  const auto d = hop_distances(graph);
  return distance_sizes(graph.size(), p_unit,
                        [&](Mdu a, Mdu b) { return d[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]; });
}

inline GeneratedScenario build_viewport_generated(const TrajectoryLog& log, int n_viewports, double p_unit) {
  GeneratedScenario out;
  out.scenario = build_viewport_scenario(log, n_viewports, &out.warnings);
  out.sizes = viewport_sizes(out.scenario.graph, p_unit);
  return out;
}

}  // namespace navstruct
