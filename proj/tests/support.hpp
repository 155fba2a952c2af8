#pragma once

// Scenario builders shared by the unit tests and the acceptance runner.

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "navstruct/navstruct.hpp"

namespace navstruct::testing {

inline double uniform(std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

inline std::size_t below(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

inline std::vector<Transition> normalized(const std::vector<Mdu>& targets, const std::vector<double>& weights) {
  double z = 0.0;
  for (double w : weights) z += w;
  std::vector<Transition> row;
  for (std::size_t k = 0; k < targets.size(); ++k) row.push_back({targets[k], weights[k] / z});
  return row;
}

/// Rows for every reachable (prev, cur) pair, filled by `weights(prev, cur, next)`.
template <class F>
NavigationModel navigation_from(const MediaGraph& graph, F&& weights) {
  NavigationModel nav;
  const Mdu s = graph.start();
  {
    std::vector<double> w;
    for (Mdu j : graph.neighbors(s)) w.push_back(weights(kNone, s, j));
    if (!w.empty()) nav.set_start_row(normalized(graph.neighbors(s), w));
  }
  for (Mdu k = 0; static_cast<std::size_t>(k) < graph.size(); ++k)
    for (Mdu i : graph.neighbors(k)) {
      if (graph.neighbors(i).empty()) continue;
      std::vector<double> w;
      for (Mdu j : graph.neighbors(i)) w.push_back(weights(k, i, j));
      nav.set_row(k, i, normalized(graph.neighbors(i), w));
    }
  return nav;
}

inline NavigationModel uniform_navigation(const MediaGraph& graph) {
  return navigation_from(graph, [](Mdu, Mdu, Mdu) { return 1.0; });
}

inline Scenario make_scenario(std::vector<std::vector<Mdu>> neighbors, Mdu start, double mu, int t_max) {
  Scenario sc;
  sc.graph = MediaGraph(std::move(neighbors), start);
  sc.nav = uniform_navigation(sc.graph);
  sc.lifetime = build_lifetime_tail(mu, t_max);
  return sc;
}

/// Two MDUs switching back and forth with probability one.
inline Scenario ping_pong(double mu, int t_max) { return make_scenario({{1}, {0}}, 0, mu, t_max); }

/// Sizes with |I| = intra, |M| = merge and every |P| = inter.
inline SizeTable flat_sizes(std::size_t n, double intra, double merge, double inter) {
  SizeTable t(n);
  for (Mdu j = 0; static_cast<std::size_t>(j) < n; ++j) {
    t.set_intra(j, intra);
    t.set_merge(j, merge);
    for (Mdu i = 0; static_cast<std::size_t>(i) < n; ++i)
      if (i != j) t.set_inter(i, j, inter);
  }
  return t;
}

/// Path 0 - 1 - ... - (n-1) with both directions switchable.
inline std::vector<std::vector<Mdu>> line_neighbors(std::size_t n) {
  std::vector<std::vector<Mdu>> nb(n);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    nb[i].push_back(static_cast<Mdu>(i + 1));
    nb[i + 1].push_back(static_cast<Mdu>(i));
  }
  for (auto& v : nb) std::sort(v.begin(), v.end());
  return nb;
}

struct RandomInstance {
  Scenario scenario;
  SizeTable sizes;
  Structure structure;
};

struct RandomSpec {
  std::size_t min_n = 2;
  std::size_t max_n = 8;
  std::size_t max_degree = 3;
  int min_t_max = 1;
  int max_t_max = 5;
  double edge_density = 0.35;
};

/// Random graph, navigation rows, complete size table and a feasible structure.
inline RandomInstance random_instance(std::uint64_t seed, const RandomSpec& spec = {}) {
  std::mt19937_64 rng(seed);
  const std::size_t n = spec.min_n + below(rng, spec.max_n - spec.min_n + 1);
  std::vector<std::vector<Mdu>> nb(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Mdu> others;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) others.push_back(static_cast<Mdu>(j));
    std::shuffle(others.begin(), others.end(), rng);
    const std::size_t deg = std::min(others.size(), 1 + below(rng, spec.max_degree));
    nb[i].assign(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(deg));
    std::sort(nb[i].begin(), nb[i].end());
  }
  RandomInstance out;
  out.scenario.graph = MediaGraph(nb, static_cast<Mdu>(below(rng, n)));
  out.scenario.nav = navigation_from(out.scenario.graph, [&](Mdu, Mdu, Mdu) { return uniform(rng, 0.05, 1.0); });
  const int t_max = spec.min_t_max + static_cast<int>(below(rng, static_cast<std::size_t>(spec.max_t_max - spec.min_t_max + 1)));
  out.scenario.lifetime = build_lifetime_tail(uniform(rng, 0.3, 1.0) * t_max + 0.2, t_max);

  out.sizes = SizeTable(n);
  for (Mdu j = 0; static_cast<std::size_t>(j) < n; ++j) {
    out.sizes.set_intra(j, uniform(rng, 8.0, 14.0));
    out.sizes.set_merge(j, uniform(rng, 2.0, 5.0));
    for (Mdu i = 0; static_cast<std::size_t>(i) < n; ++i)
      if (i != j) out.sizes.set_inter(i, j, uniform(rng, 0.5, 8.0));
  }

  auto& st = out.structure;
  for (Mdu j = 0; static_cast<std::size_t>(j) < n; ++j)
    if (uniform(rng) < 0.4) st.intra.insert(j);
  if (st.intra.empty()) st.intra.insert(static_cast<Mdu>(below(rng, n)));
  for (Mdu i = 0; static_cast<std::size_t>(i) < n; ++i)
    for (Mdu j = 0; static_cast<std::size_t>(j) < n; ++j)
      if (i != j && uniform(rng) < spec.edge_density) st.edges.insert({i, j});
  // Every MDU needs an independent reconstruction.
  const Mdu anchor = *st.intra.begin();
  for (Mdu j = 0; static_cast<std::size_t>(j) < n; ++j) {
    if (st.intra.contains(j)) continue;
    bool ok = false;
    for (Mdu l : st.intra) ok = ok || st.has_edge(l, j);
    if (!ok) st.edges.insert({anchor, j});
  }
  return out;
}

}  // namespace navstruct::testing
