#include "etfc/tension.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "etfc/errors.hpp"

namespace etfc {

EdgeTension::EdgeTension(double rho, double guard) : rho_(rho), guard_(guard) {
  if (!(rho_ > 0.0))
    throw ConfigError("tension pole rho must be positive, got " + std::to_string(rho_));
}

double EdgeTension::gap(double l) const {
  if (!(l >= 0.0)) throw std::domain_error("edge length must be nonnegative");
  if (l >= rho_ - guard_ * rho_)
    throw ConnectivityViolation("edge length " + std::to_string(l) +
                                " reached connectivity margin " + std::to_string(rho_));
  return rho_ - l;
}

double EdgeTension::nu(double l) const { return l * l / gap(l); }

double EdgeTension::omega(double l) const {
  const double s = gap(l);
  return (2.0 * rho_ - l) / (s * s);
}

double EdgeTension::g_bound(double l) const {
  const double s = gap(l);
  return 2.0 * rho_ * rho_ / (s * s * s);
}

double EdgeTension::h_bound(double l) const {
  const double s = gap(l);
  return (3.0 * rho_ - l) / (s * s * s);
}

EdgeTension edge_tension(const FormationSpec& spec, int k, double guard) {
  return EdgeTension(spec.margin(k), guard);
}

double total_tension(const FormationSpec& spec, const Points& x, double guard) {
  spec.check_points(x, "positions");
  double sum = 0.0;
  for (int k = 0; k < spec.graph().edge_count(); ++k)
    sum += edge_tension(spec, k, guard).nu(edge_error(spec, x, k).norm());
  return sum;
}

double total_tension_double(const FormationSpec& spec, const Points& x, const Points& q,
                            double k1, double guard) {
  spec.check_points(q, "velocities");
  double kinetic = 0.0;
  for (const Vec& qi : q) kinetic += qi.squaredNorm();
  return k1 * total_tension(spec, x, guard) + 0.5 * kinetic;
}

Vec weighted_neighbor_sum(const FormationSpec& spec, int agent, std::span<const Vec> rel_pos,
                          std::span<const Vec> values, double guard) {
  const auto edges = spec.graph().incident_edges(agent);
  if (rel_pos.size() != edges.size() || values.size() != edges.size())
    throw std::invalid_argument("neighbor data does not match the degree of agent " +
                                std::to_string(agent + 1));
  Vec sum = Vec::Zero(spec.dim());
  for (std::size_t s = 0; s < edges.size(); ++s) {
    const Vec d = spec.graph().edge(edges[s]).tail == agent
                      ? spec.edge_displacement(edges[s])
                      : Vec(-spec.edge_displacement(edges[s]));
    const double w = edge_tension(spec, edges[s], guard).omega((rel_pos[s] - d).norm());
    sum += w * values[s];
  }
  return sum;
}

Vec position_consensus(const FormationSpec& spec, int agent, std::span<const Vec> rel_pos,
                       double guard) {
  const auto edges = spec.graph().incident_edges(agent);
  if (rel_pos.size() != edges.size())
    throw std::invalid_argument("neighbor data does not match the degree of agent " +
                                std::to_string(agent + 1));
  Vec sum = Vec::Zero(spec.dim());
  for (std::size_t s = 0; s < edges.size(); ++s) {
    const Vec d = spec.graph().edge(edges[s]).tail == agent
                      ? spec.edge_displacement(edges[s])
                      : Vec(-spec.edge_displacement(edges[s]));
    const Vec y = rel_pos[s] - d;
    sum += edge_tension(spec, edges[s], guard).omega(y.norm()) * y;
  }
  return sum;
}

}  // namespace etfc
