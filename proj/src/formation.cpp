#include "etfc/formation.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>
#include <string>

#include "etfc/errors.hpp"

namespace etfc {

FormationSpec::FormationSpec(Graph graph, int dim, std::vector<Vec> edge_displacements,
                             double radius)
    : graph_(std::move(graph)), dim_(dim), d_(std::move(edge_displacements)), radius_(radius) {
  if (dim_ <= 0) throw ConfigError("spatial dimension p must be positive");
  if (!(radius_ > 0.0)) throw ConfigError("communication radius delta must be positive");
  if (d_.size() != static_cast<std::size_t>(graph_.edge_count()))
    throw ConfigError("expected " + std::to_string(graph_.edge_count()) +
                      " displacement vectors, got " + std::to_string(d_.size()));
  for (std::size_t k = 0; k < d_.size(); ++k)
    if (d_[k].size() != dim_)
      throw ConfigError("displacement of edge " + std::to_string(k + 1) + " has dimension " +
                        std::to_string(d_[k].size()) + ", expected " + std::to_string(dim_));
}

Vec FormationSpec::displacement(int i, int j) const {
  const auto k = graph_.edge_index(i, j);
  if (!k) throw std::out_of_range("no edge between agents " + std::to_string(i + 1) +
                                  " and " + std::to_string(j + 1));
  const Vec& d = edge_displacement(*k);
  return graph_.edge(*k).tail == i ? d : Vec(-d);
}

void FormationSpec::check_points(const Points& pts, const char* what) const {
  if (pts.size() != static_cast<std::size_t>(agent_count()))
    throw ConfigError(std::string(what) + " has " + std::to_string(pts.size()) +
                      " entries for " + std::to_string(agent_count()) + " agents");
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (pts[i].size() != dim_)
      throw ConfigError(std::string(what) + " entry " + std::to_string(i + 1) +
                        " has dimension " + std::to_string(pts[i].size()) + ", expected " +
                        std::to_string(dim_));
}

Feasibility check_feasible(const FormationSpec& spec, double tol) {
  const Graph& g = spec.graph();
  const int n = g.node_count();
  Feasibility out;
  out.witness.assign(static_cast<std::size_t>(n), Vec::Zero(spec.dim()));

  std::vector<bool> placed(static_cast<std::size_t>(n), false);
  std::queue<int> frontier;
  frontier.push(0);
  placed[0] = true;
  while (!frontier.empty()) {
    const int i = frontier.front();
    frontier.pop();
    for (int j : g.neighbors(i)) {
      if (placed[static_cast<std::size_t>(j)]) continue;
      // tau_i - tau_j = d_ij
      out.witness[static_cast<std::size_t>(j)] =
          out.witness[static_cast<std::size_t>(i)] - spec.displacement(i, j);
      placed[static_cast<std::size_t>(j)] = true;
      frontier.push(j);
    }
  }

  for (int k = 0; k < g.edge_count(); ++k) {
    const Edge& e = g.edge(k);
    const double r = (out.witness[static_cast<std::size_t>(e.tail)] -
                      out.witness[static_cast<std::size_t>(e.head)] - spec.edge_displacement(k))
                         .norm();
    if (out.worst_edge < 0 || r > out.worst_residual) {
      out.worst_residual = r;
      out.worst_edge = k;
    }
  }
  out.feasible = out.worst_residual <= tol;
  return out;
}

EdgeMargins check_margins(const FormationSpec& spec) {
  EdgeMargins out;
  out.holds = true;
  for (int k = 0; k < spec.graph().edge_count(); ++k) {
    const double m = spec.margin(k);
    out.margins.push_back(m);
    out.holds = out.holds && m > 0.0;
  }
  out.delta0 = *std::max_element(out.margins.begin(), out.margins.end());
  return out;
}

Vec edge_error(const FormationSpec& spec, const Points& x, int k) {
  const Edge& e = spec.graph().edge(k);
  return x[static_cast<std::size_t>(e.tail)] - x[static_cast<std::size_t>(e.head)] -
         spec.edge_displacement(k);
}

InitialCheck check_initial(const FormationSpec& spec, const Points& x0) {
  spec.check_points(x0, "x0");
  InitialCheck out;
  out.holds = true;
  for (int k = 0; k < spec.graph().edge_count(); ++k) {
    const double l = edge_error(spec, x0, k).norm();
    out.lengths.push_back(l);
    out.slack.push_back(spec.margin(k) - l);
    out.holds = out.holds && l < spec.margin(k);
  }
  return out;
}

}  // namespace etfc
