#pragma once

#include <optional>
#include <utility>

#include "etfc/bounds.hpp"
#include "etfc/double.hpp"
#include "etfc/formation.hpp"
#include "etfc/root_find.hpp"
#include "etfc/single.hpp"
#include "etfc/trace.hpp"

namespace etfc {

/// Everything needed to run one experiment.
struct ScenarioConfig {
  explicit ScenarioConfig(FormationSpec spec) : formation(std::move(spec)) {}

  FormationSpec formation;
  Points x0;
  Points q0;  // double mode only
  Mode mode = Mode::single;

  double alpha = 0.0;  // alpha or alpha_d
  double beta = 0.0;   // beta or beta_d
  bool conservative_beta0 = false;
  std::optional<double> beta1;  // double mode; defaults to beta0
  std::optional<double> k3;     // double mode; defaults to the midpoint

  double a = 0.5;            // single-mode proof constant
  std::optional<double> b;   // double-mode proof constant; defaults to k3 / 2
  double speed_tolerance = 1e-2;

  double horizon = 20.0;
  double sample_dt = 0.01;
  Tolerances tol;
};

/// Validated controller parameters derived from a scenario.
struct Controller {
  Mode mode = Mode::single;
  Beta0Info beta0;
  SingleParams single;
  std::optional<GainSet> gains;
  DoubleParams dbl;
  double a = 0.5;
  double b = 0.0;

  double threshold(double t) const {
    return mode == Mode::single ? single.threshold(t) : dbl.threshold(t);
  }
};

/// Checks feasibility, edge margins, the initial condition and every
/// parameter constraint of the mode. Throws ConfigError with the first violation.
Controller resolve(const ScenarioConfig& cfg);

BoundSet compute_bounds(const ScenarioConfig& cfg, const Controller& ctl);

CertifyOptions certify_options(const ScenarioConfig& cfg, const Controller& ctl);

}  // namespace etfc
