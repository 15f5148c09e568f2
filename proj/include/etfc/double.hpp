#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "etfc/formation.hpp"
#include "etfc/root_find.hpp"
#include "etfc/tension.hpp"

namespace etfc {

/// Feedback gains of the double-integrator law.
///
/// P = [[k0, k1], [k1, k2]] solves
///   1/2 (P C + C^T P) - beta1 P B B^T P + 2 I <= 0,  C = [[0,1],[0,0]], B = [0,1]^T
/// with equality on all three entries. k3 is the local velocity damping and
/// k4 = k3 (k2 + sqrt(k1^2 + k2^2)) / 2 < 2.
struct GainSet {
  double beta1 = 0.0;
  double k0 = 0.0;
  double k1 = 0.0;
  double k2 = 0.0;
  double k3 = 0.0;
  double k4 = 0.0;
  double rho2_p = 0.0;  // smallest eigenvalue of P

  Eigen::Matrix2d p() const;
};

/// 4 / (k2 + sqrt(k1^2 + k2^2)); k3 must stay strictly below it.
double k3_upper_bound(double k1, double k2);
/// Midpoint choice 2 / (k2 + sqrt(k1^2 + k2^2)), giving k4 = 1.
double default_k3(double k1, double k2);

/// Closed-form gains for 0 < beta1 <= beta0. k3 defaults to default_k3.
GainSet solve_gains(double beta1, double beta0, std::optional<double> k3 = std::nullopt);

/// Left-hand side of the matrix inequality for the gains' own beta1.
Eigen::Matrix2d riccati_matrix(const GainSet& gains);

/// Trigger threshold alpha_d exp(-beta_d t) with 0 < beta_d < (2 - k4) rho2(P).
struct DoubleParams {
  double alpha = 0.0;
  double beta = 0.0;

  void validate(const GainSet& gains) const;
  double threshold(double t) const;
};

/// Neighbor data held by agent i: relative position and velocity at `time`
/// and the neighbor's frozen feedforward u^d_j.
struct DoublePayload {
  int neighbor = -1;
  double time = 0.0;
  Vec relative_position;
  Vec relative_velocity;
  Vec neighbor_feedforward;
};

struct DoubleKnowledge {
  int agent = -1;
  double last_trigger = 0.0;
  Vec feedforward;  // u^d_i, piecewise constant
  std::vector<DoublePayload> neighbors;
};

/// u^d_i = -k1 sum_j omega_ij (x_i - x_j - d_ij) - k2 sum_j omega_ij (q_i - q_j).
Vec feedforward_double(const FormationSpec& spec, const GainSet& gains, int agent,
                       std::span<const Vec> rel_pos, std::span<const Vec> rel_vel,
                       double guard = kDefaultMarginGuard);

/// Applied input u_i(t) = u^d_i - k3 q_i(t).
Vec control_double(const GainSet& gains, const DoubleKnowledge& k, const Vec& velocity);

struct RelativeState {
  Vec position;
  Vec velocity;
};

/// Closed-form relative state under u^d_i - u^d_j fixed on [s, t]:
///   dq(t) = e^{-k3 tau} dq(s) + (1 - e^{-k3 tau}) dud / k3
///   dx(t) = dx(s) + (1 - e^{-k3 tau}) dq(s) / k3 + (tau - (1 - e^{-k3 tau}) / k3) dud / k3
RelativeState predict_relative_double(const RelativeState& at_s, const Vec& feedforward_gap,
                                      double k3, double s, double t);
RelativeState predict_relative_double(const DoubleKnowledge& k, std::size_t slot,
                                      const GainSet& gains, double t);

/// E_i(t) = k1 e_i(t) + k2 e_qi(t) on predicted relative states.
Vec error_double(const FormationSpec& spec, const GainSet& gains, const DoubleKnowledge& k,
                 double t, double guard = kDefaultMarginGuard);

/// E_i on the true state (x, q) given agent's frozen feedforward.
Vec error_double_from_state(const FormationSpec& spec, const GainSet& gains, int agent,
                            const Points& x, const Points& q, const Vec& feedforward,
                            double guard = kDefaultMarginGuard);

std::optional<double> next_trigger_time_double(const DoubleParams& params,
                                               const FormationSpec& spec, const GainSet& gains,
                                               const DoubleKnowledge& k, double from,
                                               double horizon, const Tolerances& tol = {});

/// Exact propagation of one agent under q' = u^d - k3 q over dt.
void propagate_double(Vec& x, Vec& q, const Vec& feedforward, double k3, double dt);

}  // namespace etfc
