#pragma once

#include <span>

#include "etfc/formation.hpp"

namespace etfc {

inline constexpr double kDefaultMarginGuard = 1e-9;

/// Scalar shape functions of one edge's tension potential, parameterised by the
/// pole rho = Delta - ||d_ij||. All are defined on 0 <= l < rho:
///
///   nu(l)      = l^2 / (rho - l)
///   omega(l)   = (2 rho - l) / (rho - l)^2        (gradient weight, a.k.a. f)
///   g_bound(l) = 2 rho^2 / (rho - l)^3
///   h_bound(l) = (3 rho - l) / (rho - l)^3
///
/// Evaluations with l >= rho (1 - guard) throw ConnectivityViolation.
class EdgeTension {
 public:
  explicit EdgeTension(double rho, double guard = kDefaultMarginGuard);

  double rho() const noexcept { return rho_; }

  double nu(double l) const;
  double omega(double l) const;
  double g_bound(double l) const;
  double h_bound(double l) const;

 private:
  /// rho - l after range checks.
  double gap(double l) const;

  double rho_;
  double guard_;
};

/// Tension of edge k of a formation.
EdgeTension edge_tension(const FormationSpec& spec, int k, double guard = kDefaultMarginGuard);

/// Sum over edges of nu_ij(||x_i - x_j - d_ij||).
double total_tension(const FormationSpec& spec, const Points& x,
                     double guard = kDefaultMarginGuard);

/// k1 * total_tension + 1/2 sum ||q_i||^2.
double total_tension_double(const FormationSpec& spec, const Points& x, const Points& q,
                            double k1, double guard = kDefaultMarginGuard);

/// Sum over neighbors j of omega_ij(||r_j - d_ij||) * v_j.
///
/// rel_pos[j] = x_i - x_j and values[j] are ordered like graph().neighbors(agent).
/// With values == rel_pos - d this is the position consensus term; with
/// relative velocities it is the velocity term of the double-integrator law.
Vec weighted_neighbor_sum(const FormationSpec& spec, int agent, std::span<const Vec> rel_pos,
                          std::span<const Vec> values, double guard = kDefaultMarginGuard);

/// Sum over neighbors j of omega_ij (x_i - x_j - d_ij).
Vec position_consensus(const FormationSpec& spec, int agent, std::span<const Vec> rel_pos,
                       double guard = kDefaultMarginGuard);

}  // namespace etfc
