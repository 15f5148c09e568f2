#include "etfc/single.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "etfc/errors.hpp"
#include "etfc/tension.hpp"

namespace etfc {

void SingleParams::validate() const {
  std::ostringstream msg;
  if (!(alpha > 0.0)) {
    msg << "alpha=" << alpha << " must be positive";
    throw ConfigError(msg.str());
  }
  if (!(beta > 0.0)) {
    msg << "beta=" << beta << " must be positive";
    throw ConfigError(msg.str());
  }
  if (!(beta < beta0)) {
    msg << "beta=" << beta << " violates beta < beta0=" << beta0;
    throw ConfigError(msg.str());
  }
}

double SingleParams::threshold(double t) const { return alpha * std::exp(-beta * t); }

Vec control_single(const FormationSpec& spec, int agent, std::span<const Vec> rel_pos,
                   double guard) {
  return -position_consensus(spec, agent, rel_pos, guard);
}

Vec predict_relative_single(const Vec& rel_at_s, const Vec& control_gap, double s, double t) {
  if (t < s) {
    std::ostringstream msg;
    msg << "prediction requested at t=" << t << " from knowledge at s=" << s;
    throw StaleKnowledge(msg.str());
  }
  return rel_at_s + (t - s) * control_gap;
}

Vec predict_relative_single(const SingleKnowledge& k, std::size_t slot, double t) {
  const SinglePayload& p = k.neighbors.at(slot);
  return predict_relative_single(p.relative_position, k.control - p.neighbor_control, p.time, t);
}

Vec error_single(const FormationSpec& spec, const SingleKnowledge& k, double t, double guard) {
  std::vector<Vec> rel;
  rel.reserve(k.neighbors.size());
  for (std::size_t s = 0; s < k.neighbors.size(); ++s)
    rel.push_back(predict_relative_single(k, s, t));
  return position_consensus(spec, k.agent, rel, guard) + k.control;
}

Points relative_to_neighbors(const FormationSpec& spec, int agent, const Points& x) {
  Points rel;
  for (int j : spec.graph().neighbors(agent))
    rel.push_back(x[static_cast<std::size_t>(agent)] - x[static_cast<std::size_t>(j)]);
  return rel;
}

Vec error_single_from_state(const FormationSpec& spec, int agent, const Points& x,
                            const Vec& control, double guard) {
  return position_consensus(spec, agent, relative_to_neighbors(spec, agent, x), guard) +
         control;
}

std::optional<double> next_trigger_time_single(const SingleParams& params,
                                               const FormationSpec& spec,
                                               const SingleKnowledge& k, double from,
                                               double horizon, const Tolerances& tol) {
  auto phi = [&](double t) {
    try {
      return error_single(spec, k, t, tol.guard).norm() - params.threshold(t);
    } catch (const ConnectivityViolation&) {
      // ||e_i|| grows without bound towards the pole, so the threshold is crossed.
      return std::numeric_limits<double>::infinity();
    }
  };
  return first_crossing(phi, from, horizon, tol);
}

}  // namespace etfc
