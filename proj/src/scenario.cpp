#include "etfc/scenario.hpp"

#include <cmath>
#include <sstream>

#include "etfc/errors.hpp"

namespace etfc {

const char* to_string(Mode m) { return m == Mode::single ? "single" : "double"; }

Controller resolve(const ScenarioConfig& cfg) {
  const FormationSpec& spec = cfg.formation;
  std::ostringstream msg;

  const Feasibility feas = check_feasible(spec);
  if (!feas.feasible) {
    const Edge& e = spec.graph().edge(feas.worst_edge);
    msg << "formation is infeasible: edge (" << e.tail + 1 << "," << e.head + 1
        << ") has residual " << feas.worst_residual;
    throw ConfigError(msg.str());
  }
  const EdgeMargins em = check_margins(spec);
  for (std::size_t k = 0; k < em.margins.size(); ++k)
    if (!(em.margins[k] > 0.0)) {
      const Edge& e = spec.graph().edge(static_cast<int>(k));
      msg << "edge (" << e.tail + 1 << "," << e.head + 1 << "): ||d|| = "
          << spec.edge_displacement(static_cast<int>(k)).norm() << " is not below delta="
          << spec.radius();
      throw ConfigError(msg.str());
    }
  spec.check_points(cfg.x0, "x0");
  const InitialCheck init = check_initial(spec, cfg.x0);
  for (std::size_t k = 0; k < init.lengths.size(); ++k)
    if (!(init.slack[k] > 0.0)) {
      const Edge& e = spec.graph().edge(static_cast<int>(k));
      msg << "initial condition fails on edge (" << e.tail + 1 << "," << e.head + 1
          << "): ||x_i(0)-x_j(0)-d_ij|| = " << init.lengths[k]
          << " must be below delta-||d_ij|| = " << em.margins[k];
      throw ConfigError(msg.str());
    }
  if (!(cfg.horizon > 0.0)) throw ConfigError("horizon must be positive");
  if (!(cfg.sample_dt > 0.0)) throw ConfigError("sample_dt must be positive");
  if (!(cfg.tol.tol_root > 0.0) || !(cfg.tol.h_scan > 0.0) || !(cfg.tol.guard >= 0.0))
    throw ConfigError("tolerances must be positive");

  Controller ctl;
  ctl.mode = cfg.mode;
  ctl.beta0 = compute_beta0(spec);
  const double beta0 = cfg.conservative_beta0 ? ctl.beta0.conservative : ctl.beta0.beta0;

  if (cfg.mode == Mode::single) {
    if (!cfg.q0.empty()) throw ConfigError("q0 is only valid in double mode");
    ctl.single = SingleParams{cfg.alpha, cfg.beta, beta0};
    ctl.single.validate();
    if (!(cfg.a > 0.0 && cfg.a < 1.0)) {
      msg << "a=" << cfg.a << " must lie in (0,1)";
      throw ConfigError(msg.str());
    }
    ctl.a = cfg.a;
  } else {
    spec.check_points(cfg.q0, "q0");
    ctl.gains = solve_gains(cfg.beta1.value_or(beta0), beta0, cfg.k3);
    ctl.dbl = DoubleParams{cfg.alpha, cfg.beta};
    ctl.dbl.validate(*ctl.gains);
    ctl.b = cfg.b.value_or(ctl.gains->k3 / 2.0);
    if (!(ctl.b > 0.0 && ctl.b < ctl.gains->k3)) {
      msg << "b=" << ctl.b << " violates 0 < b < k3=" << ctl.gains->k3;
      throw ConfigError(msg.str());
    }
  }
  return ctl;
}

BoundSet compute_bounds(const ScenarioConfig& cfg, const Controller& ctl) {
  if (ctl.mode == Mode::single) return compute_bounds_single(cfg.formation, cfg.x0, ctl.single, ctl.a);
  return compute_bounds_double(cfg.formation, cfg.x0, cfg.q0, *ctl.gains, ctl.dbl, ctl.b);
}

CertifyOptions certify_options(const ScenarioConfig& cfg, const Controller& ctl) {
  CertifyOptions o;
  o.mode = ctl.mode;
  o.horizon = cfg.horizon;
  o.alpha = cfg.alpha;
  o.beta = cfg.beta;
  o.gains = ctl.gains;
  o.speed_tolerance = cfg.speed_tolerance;
  o.guard = cfg.tol.guard;
  return o;
}

}  // namespace etfc
