#pragma once

#include <cmath>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "etfc/formation.hpp"
#include "etfc/graph.hpp"
#include "etfc/scenario.hpp"

namespace etfc::support {

inline Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

/// Right triangle on three agents with radius 4.
inline FormationSpec triangle_spec() {
  Graph g(3, {{0, 1}, {0, 2}, {1, 2}});
  return FormationSpec(std::move(g), 2, {v2(0, -2), v2(-2, 0), v2(-2, 2)}, 4.0);
}

inline Points triangle_x0() { return {v2(2, 4), v2(3.5, 7), v2(4.5, 5.5)}; }
inline Points triangle_q0() { return {v2(1, 2), v2(-1, -2), v2(-1, -1)}; }

inline ScenarioConfig triangle_single(double horizon = 20.0) {
  ScenarioConfig cfg(triangle_spec());
  cfg.mode = Mode::single;
  cfg.x0 = triangle_x0();
  cfg.alpha = 10.0;
  cfg.beta = 1.0;
  cfg.horizon = horizon;
  return cfg;
}

inline ScenarioConfig triangle_double(double horizon = 20.0) {
  ScenarioConfig cfg = triangle_single(horizon);
  cfg.mode = Mode::double_integrator;
  cfg.q0 = triangle_q0();
  return cfg;
}

/// Two agents joined by one edge, d = (1, 0), radius 3.
inline ScenarioConfig one_edge(Mode mode, double horizon = 5.0) {
  ScenarioConfig cfg(FormationSpec(Graph(2, {{0, 1}}), 2, {v2(1, 0)}, 3.0));
  cfg.mode = mode;
  cfg.x0 = {v2(0, 0), v2(-1.5, 0.8)};
  if (mode == Mode::double_integrator) cfg.q0 = {v2(0.3, -0.2), v2(-0.4, 0.5)};
  cfg.alpha = 1.0;
  cfg.beta = 0.5;
  cfg.horizon = horizon;
  return cfg;
}

/// Connected graph on n nodes: a random spanning tree plus extra edges with
/// probability p.
inline Graph random_connected_graph(std::mt19937& rng, int n, double p) {
  std::set<std::pair<int, int>> edges;
  for (int v = 1; v < n; ++v) {
    const int u = std::uniform_int_distribution<int>(0, v - 1)(rng);
    edges.insert({u, v});
  }
  std::bernoulli_distribution extra(p);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (extra(rng)) edges.insert({i, j});
  std::vector<Edge> list;
  for (const auto& [i, j] : edges) list.push_back({i, j});
  return Graph(n, list);
}

}  // namespace etfc::support
