#include "reference.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace etfc::support {

namespace {

struct State {
  Points x;
  Points q;
};

double weight(double rho, double l) { return (2.0 * rho - l) / ((rho - l) * (rho - l)); }

// Held input of agent i recomputed from the full state.
Vec held_input(const ScenarioConfig& cfg, double k1, double k2, const State& s, int i) {
  const FormationSpec& spec = cfg.formation;
  const Graph& g = spec.graph();
  const bool dbl = cfg.mode == Mode::double_integrator;
  Vec u = Vec::Zero(spec.dim());
  for (int k = 0; k < g.edge_count(); ++k) {
    const Edge& e = g.edge(k);
    if (e.tail != i && e.head != i) continue;
    const int j = e.tail == i ? e.head : e.tail;
    const double sign = e.tail == i ? 1.0 : -1.0;
    const Vec d = sign * spec.edge_displacement(k);
    const Vec y = s.x[static_cast<std::size_t>(i)] - s.x[static_cast<std::size_t>(j)] - d;
    const double rho = spec.radius() - d.norm();
    const double w = weight(rho, y.norm());
    if (dbl) {
      u -= k1 * w * y;
      u -= k2 * w * (s.q[static_cast<std::size_t>(i)] - s.q[static_cast<std::size_t>(j)]);
    } else {
      u -= w * y;
    }
  }
  return u;
}

State derivative(const State& s, const Points& held, double k3, bool dbl) {
  State d;
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    if (dbl) {
      d.x.push_back(s.q[i]);
      d.q.push_back(held[i] - k3 * s.q[i]);
    } else {
      d.x.push_back(held[i]);
    }
  }
  return d;
}

State axpy(const State& s, double a, const State& d) {
  State out = s;
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    out.x[i] += a * d.x[i];
    if (!d.q.empty()) out.q[i] += a * d.q[i];
  }
  return out;
}

void rk4(State& s, const Points& held, double k3, bool dbl, double dt) {
  const State a = derivative(s, held, k3, dbl);
  const State b = derivative(axpy(s, dt / 2, a), held, k3, dbl);
  const State c = derivative(axpy(s, dt / 2, b), held, k3, dbl);
  const State d = derivative(axpy(s, dt, c), held, k3, dbl);
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    s.x[i] += dt / 6 * (a.x[i] + 2 * b.x[i] + 2 * c.x[i] + d.x[i]);
    if (dbl) s.q[i] += dt / 6 * (a.q[i] + 2 * b.q[i] + 2 * c.q[i] + d.q[i]);
  }
}

}  // namespace

std::vector<ReferenceState> integrate_reference(const ScenarioConfig& cfg, double k1, double k2,
                                                double k3,
                                                const std::vector<TriggerRecord>& triggers,
                                                const std::vector<double>& output_times,
                                                double h) {
  const bool dbl = cfg.mode == Mode::double_integrator;
  State s{cfg.x0, dbl ? cfg.q0 : Points{}};
  Points held(cfg.x0.size(), Vec::Zero(cfg.formation.dim()));

  std::map<double, std::vector<int>> fires;
  for (const TriggerRecord& r : triggers) fires[r.time].push_back(r.agent);
  std::vector<double> stops = output_times;
  for (const auto& [t, agents] : fires) stops.push_back(t);
  std::sort(stops.begin(), stops.end());
  stops.erase(std::unique(stops.begin(), stops.end()), stops.end());
  std::vector<double> outs = output_times;
  std::sort(outs.begin(), outs.end());

  std::vector<ReferenceState> result;
  double t = 0.0;
  std::size_t next_out = 0;
  for (double stop : stops) {
    if (stop > t) {
      const auto steps = static_cast<long>(std::ceil((stop - t) / h));
      const double dt = (stop - t) / static_cast<double>(steps);
      for (long k = 0; k < steps; ++k) rk4(s, held, k3, dbl, dt);
      t = stop;
    }
    if (const auto it = fires.find(stop); it != fires.end())
      for (int i : it->second) held[static_cast<std::size_t>(i)] = held_input(cfg, k1, k2, s, i);
    while (next_out < outs.size() && outs[next_out] <= t) {
      result.push_back({outs[next_out], s.x, s.q});
      ++next_out;
    }
  }
  return result;
}

}  // namespace etfc::support
