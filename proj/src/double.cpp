#include "etfc/double.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "etfc/errors.hpp"
#include "etfc/single.hpp"
#include "etfc/tension.hpp"

namespace etfc {

namespace {

// 1 - e^{-k tau} and tau - (1 - e^{-k tau}) / k without cancellation for small k tau.
double decay_complement(double k, double tau) { return -std::expm1(-k * tau); }

double drift_term(double k, double tau) {
  const double x = k * tau;
  if (x < 1e-4) {
    // tau - (1 - e^{-x}) / k = tau (x/2 - x^2/6 + x^3/24 - ...)
    return tau * x * (0.5 - x / 6.0 + x * x / 24.0);
  }
  return tau - decay_complement(k, tau) / k;
}

}  // namespace

Eigen::Matrix2d GainSet::p() const {
  Eigen::Matrix2d m;
  m << k0, k1, k1, k2;
  return m;
}

double k3_upper_bound(double k1, double k2) { return 4.0 / (k2 + std::hypot(k1, k2)); }

double default_k3(double k1, double k2) { return 2.0 / (k2 + std::hypot(k1, k2)); }

GainSet solve_gains(double beta1, double beta0, std::optional<double> k3) {
  std::ostringstream msg;
  if (!(beta1 > 0.0) || !(beta1 <= beta0)) {
    msg << "beta1=" << beta1 << " violates 0 < beta1 <= beta0=" << beta0;
    throw ConfigError(msg.str());
  }
  GainSet g;
  g.beta1 = beta1;
  g.k1 = std::sqrt(2.0 / beta1);
  g.k2 = std::sqrt((g.k1 + 2.0) / beta1);
  g.k0 = 2.0 * beta1 * g.k1 * g.k2;

  const double upper = k3_upper_bound(g.k1, g.k2);
  g.k3 = k3.value_or(default_k3(g.k1, g.k2));
  if (!(g.k3 > 0.0) || !(g.k3 < upper)) {
    msg << "k3=" << g.k3 << " violates 0 < k3 < " << upper;
    throw ConfigError(msg.str());
  }
  g.k4 = g.k3 * (g.k2 + std::hypot(g.k1, g.k2)) / 2.0;

  // Smallest eigenvalue of the symmetric 2x2 P.
  const double mean = 0.5 * (g.k0 + g.k2);
  const double spread = std::hypot(0.5 * (g.k0 - g.k2), g.k1);
  g.rho2_p = mean - spread;
  if (!(g.rho2_p > 0.0)) throw ConfigError("gain matrix P is not positive definite");
  return g;
}

Eigen::Matrix2d riccati_matrix(const GainSet& gains) {
  Eigen::Matrix2d c;
  c << 0.0, 1.0, 0.0, 0.0;
  const Eigen::Vector2d b(0.0, 1.0);
  const Eigen::Matrix2d p = gains.p();
  return 0.5 * (p * c + c.transpose() * p) - gains.beta1 * p * b * b.transpose() * p +
         2.0 * Eigen::Matrix2d::Identity();
}

void DoubleParams::validate(const GainSet& gains) const {
  std::ostringstream msg;
  if (!(alpha > 0.0)) {
    msg << "alpha_d=" << alpha << " must be positive";
    throw ConfigError(msg.str());
  }
  const double cap = (2.0 - gains.k4) * gains.rho2_p;
  if (!(beta > 0.0) || !(beta < cap)) {
    msg << "beta_d=" << beta << " violates 0 < beta_d < (2-k4)*rho2(P)=" << cap;
    throw ConfigError(msg.str());
  }
}

double DoubleParams::threshold(double t) const { return alpha * std::exp(-beta * t); }

Vec feedforward_double(const FormationSpec& spec, const GainSet& gains, int agent,
                       std::span<const Vec> rel_pos, std::span<const Vec> rel_vel,
                       double guard) {
  return -gains.k1 * position_consensus(spec, agent, rel_pos, guard) -
         gains.k2 * weighted_neighbor_sum(spec, agent, rel_pos, rel_vel, guard);
}

Vec control_double(const GainSet& gains, const DoubleKnowledge& k, const Vec& velocity) {
  return k.feedforward - gains.k3 * velocity;
}

RelativeState predict_relative_double(const RelativeState& at_s, const Vec& feedforward_gap,
                                      double k3, double s, double t) {
  if (t < s) {
    std::ostringstream msg;
    msg << "prediction requested at t=" << t << " from knowledge at s=" << s;
    throw StaleKnowledge(msg.str());
  }
  const double tau = t - s;
  const double decay = std::exp(-k3 * tau);
  const double comp = decay_complement(k3, tau);
  RelativeState out;
  out.velocity = decay * at_s.velocity + (comp / k3) * feedforward_gap;
  out.position = at_s.position + (comp / k3) * at_s.velocity +
                 (drift_term(k3, tau) / k3) * feedforward_gap;
  return out;
}

RelativeState predict_relative_double(const DoubleKnowledge& k, std::size_t slot,
                                      const GainSet& gains, double t) {
  const DoublePayload& p = k.neighbors.at(slot);
  return predict_relative_double({p.relative_position, p.relative_velocity},
                                 k.feedforward - p.neighbor_feedforward, gains.k3, p.time, t);
}

Vec error_double(const FormationSpec& spec, const GainSet& gains, const DoubleKnowledge& k,
                 double t, double guard) {
  std::vector<Vec> pos;
  std::vector<Vec> vel;
  pos.reserve(k.neighbors.size());
  vel.reserve(k.neighbors.size());
  for (std::size_t s = 0; s < k.neighbors.size(); ++s) {
    RelativeState r = predict_relative_double(k, s, gains, t);
    pos.push_back(std::move(r.position));
    vel.push_back(std::move(r.velocity));
  }
  // Frozen part k1 S_x(t_k) + k2 S_q(t_k) equals -u^d_i.
  return gains.k1 * position_consensus(spec, k.agent, pos, guard) +
         gains.k2 * weighted_neighbor_sum(spec, k.agent, pos, vel, guard) + k.feedforward;
}

Vec error_double_from_state(const FormationSpec& spec, const GainSet& gains, int agent,
                            const Points& x, const Points& q, const Vec& feedforward,
                            double guard) {
  const Points pos = relative_to_neighbors(spec, agent, x);
  const Points vel = relative_to_neighbors(spec, agent, q);
  return gains.k1 * position_consensus(spec, agent, pos, guard) +
         gains.k2 * weighted_neighbor_sum(spec, agent, pos, vel, guard) + feedforward;
}

std::optional<double> next_trigger_time_double(const DoubleParams& params,
                                               const FormationSpec& spec, const GainSet& gains,
                                               const DoubleKnowledge& k, double from,
                                               double horizon, const Tolerances& tol) {
  auto phi = [&](double t) {
    try {
      return error_double(spec, gains, k, t, tol.guard).norm() - params.threshold(t);
    } catch (const ConnectivityViolation&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  return first_crossing(phi, from, horizon, tol);
}

void propagate_double(Vec& x, Vec& q, const Vec& feedforward, double k3, double dt) {
  const double decay = std::exp(-k3 * dt);
  const double comp = decay_complement(k3, dt);
  x += (comp / k3) * q + (drift_term(k3, dt) / k3) * feedforward;
  q = decay * q + (comp / k3) * feedforward;
}

}  // namespace etfc
