#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "etfc/formation.hpp"
#include "etfc/root_find.hpp"
#include "etfc/tension.hpp"

namespace etfc {

/// Trigger threshold alpha * exp(-beta t) with 0 < beta < beta0.
struct SingleParams {
  double alpha = 0.0;
  double beta = 0.0;
  double beta0 = 0.0;

  /// Throws ConfigError naming the violated constraint.
  void validate() const;
  double threshold(double t) const;
};

/// What agent i holds about neighbor j: x_i - x_j sensed or received at `time`,
/// and u_j as frozen at j's last trigger.
struct SinglePayload {
  int neighbor = -1;
  double time = 0.0;
  Vec relative_position;
  Vec neighbor_control;
};

/// Local state of one agent between its triggers. `neighbors` is ordered like
/// graph().neighbors(agent); every payload is at least as recent as
/// last_trigger because an own trigger re-senses all of them.
struct SingleKnowledge {
  int agent = -1;
  double last_trigger = 0.0;
  Vec control;
  std::vector<SinglePayload> neighbors;
};

/// u_i = -sum_j omega_ij (x_i - x_j - d_ij) on sensed relative positions.
Vec control_single(const FormationSpec& spec, int agent, std::span<const Vec> rel_pos,
                   double guard = kDefaultMarginGuard);

/// x_i(t) - x_j(t) = x_i(s) - x_j(s) + (t - s)(u_i - u_j). Throws StaleKnowledge if t < s.
Vec predict_relative_single(const Vec& rel_at_s, const Vec& control_gap, double s, double t);
Vec predict_relative_single(const SingleKnowledge& k, std::size_t slot, double t);

/// e_i(t): fresh weighted sum on predicted relative positions minus the frozen
/// one, i.e. sum_j omega_ij(t)(x_i - x_j - d_ij)(t) + u_i.
Vec error_single(const FormationSpec& spec, const SingleKnowledge& k, double t,
                 double guard = kDefaultMarginGuard);

/// e_i evaluated on true positions, for monitors that see the whole state.
Vec error_single_from_state(const FormationSpec& spec, int agent, const Points& x,
                            const Vec& control, double guard = kDefaultMarginGuard);

/// x_i - x_j for every neighbor j of agent, in neighbor order.
Points relative_to_neighbors(const FormationSpec& spec, int agent, const Points& x);

/// Earliest t in [from, horizon] where ||e_i(t)|| reaches alpha exp(-beta t),
/// or nullopt when the threshold is not reached before the horizon.
std::optional<double> next_trigger_time_single(const SingleParams& params,
                                               const FormationSpec& spec,
                                               const SingleKnowledge& k, double from,
                                               double horizon, const Tolerances& tol = {});

/// Exact single-integrator step x + dt u.
inline Vec propagate_single(const Vec& x, const Vec& u, double dt) { return x + dt * u; }

}  // namespace etfc
