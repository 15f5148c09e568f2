#pragma once

#include <optional>
#include <string>
#include <vector>

#include "etfc/double.hpp"
#include "etfc/formation.hpp"
#include "etfc/single.hpp"
#include "etfc/trace.hpp"

namespace etfc {

struct Beta0Info {
  double beta0 = 0.0;         // rho2(D D^T) / Delta0
  double delta0 = 0.0;        // max_ij Delta - ||d_ij||
  double rho2 = 0.0;          // rho2(D D^T)
  double conservative = 0.0;  // 4 / (n (n-1) Delta)
};

Beta0Info compute_beta0(const FormationSpec& spec);

/// Closed-form constants certifying convergence, connectivity and the
/// inter-event floor. Double-mode fields carry the d-superscript analogues;
/// c_q_edge is empty in single mode.
struct BoundSet {
  Mode mode = Mode::single;
  double beta0 = 0.0;
  double delta0 = 0.0;
  double free_constant = 0.0;  // a in (0,1) for single, b in (0,k3) for double
  double rate = 0.0;           // envelope decay rate: beta or beta_d
  double k_nu = 0.0;
  double v0 = 0.0;             // V(0) or V_d(0)
  double k_v = 0.0;
  std::vector<double> k_edge;
  std::vector<double> c_q_edge;
  std::vector<double> c_agent;
  std::vector<double> xi_agent;

  /// 2 sqrt(k_V) exp(-rate t): bound on ||y_i - y_j|| (or ||z_i - z_j||).
  double envelope(double t) const;
};

/// k_ij = -k + sqrt(k^2 + 2 k rho): the edge-length bound implied by a tension
/// budget nu_ij <= 2k.
double edge_length_bound(double k_nu, double rho);

/// 1/2 sum ||y_i - ybar||^2 with y = x - tau.
double disagreement(const FormationSpec& spec, const Points& x0);
/// 1/2 sum (z_i - zbar)^T (P (x) I_p) (z_i - zbar), z_i = (y_i, q_i).
double disagreement_double(const FormationSpec& spec, const Points& x0, const Points& q0,
                           const Eigen::Matrix2d& p);

/// Throws ConfigError unless 0 < a < 1.
BoundSet compute_bounds_single(const FormationSpec& spec, const Points& x0,
                               const SingleParams& params, double a);

/// Throws ConfigError unless 0 < b < k3.
BoundSet compute_bounds_double(const FormationSpec& spec, const Points& x0, const Points& q0,
                               const GainSet& gains, const DoubleParams& params, double b);

struct CheckResult {
  std::string name;
  bool passed = true;
  /// Smallest (bound - measured) over all evaluations; negative on failure.
  double worst_margin = 0.0;
  double worst_time = 0.0;
  std::string detail;
};

struct Report {
  std::vector<CheckResult> checks;

  bool all_passed() const;
  const CheckResult* find(const std::string& name) const;
};

struct CertifyOptions {
  Mode mode = Mode::single;
  double horizon = 0.0;
  double alpha = 0.0;            // alpha or alpha_d
  double beta = 0.0;             // beta or beta_d
  std::optional<GainSet> gains;  // required in double mode
  double slack = 1e-6;           // additive tolerance for envelope and trigger rule
  double speed_tolerance = 1e-2;
  double guard = kDefaultMarginGuard;
};

/// Re-evaluates every certified property against a trace and its trigger log.
/// Trigger-rule errors are recomputed from trace states and logged controls.
Report certify_trace(const FormationSpec& spec, const std::vector<TraceSample>& trace,
                     const std::vector<TriggerRecord>& triggers, const BoundSet& bounds,
                     const CertifyOptions& opts);

}  // namespace etfc
