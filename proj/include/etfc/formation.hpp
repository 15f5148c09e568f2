#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "etfc/graph.hpp"

namespace etfc {

using Vec = Eigen::VectorXd;
/// One vector in R^p per agent.
using Points = std::vector<Vec>;

/// Desired inter-agent displacements over a graph plus the communication radius.
///
/// d is stored once per edge in the canonical direction (tail -> head), so
/// displacement(i, j) == -displacement(j, i) by construction.
class FormationSpec {
 public:
  FormationSpec(Graph graph, int dim, std::vector<Vec> edge_displacements, double radius);

  const Graph& graph() const noexcept { return graph_; }
  int agent_count() const noexcept { return graph_.node_count(); }
  int dim() const noexcept { return dim_; }
  double radius() const noexcept { return radius_; }

  /// d_k for edge k in canonical direction.
  const Vec& edge_displacement(int k) const {
    return d_.at(static_cast<std::size_t>(k));
  }
  /// d_ij for any ordered neighbor pair. Throws std::out_of_range for non-edges.
  Vec displacement(int i, int j) const;
  /// Connectivity margin Delta - ||d_k|| of edge k.
  double margin(int k) const { return radius_ - edge_displacement(k).norm(); }

  /// Checks that a point set has n entries of dimension p.
  void check_points(const Points& pts, const char* what) const;

 private:
  Graph graph_;
  int dim_;
  std::vector<Vec> d_;
  double radius_;
};

inline constexpr double kFeasibilityTolerance = 1e-9;

struct Feasibility {
  /// Witness tau with tau_i - tau_j = d_ij (tau_1 = 0), also filled when infeasible.
  Points witness;
  /// Edge with the largest residual ||tau_i - tau_j - d_ij||.
  int worst_edge = -1;
  double worst_residual = 0.0;
  bool feasible = false;
};

/// Propagates tau over a BFS spanning tree from agent 1 and checks every edge.
Feasibility check_feasible(const FormationSpec& spec, double tol = kFeasibilityTolerance);

struct EdgeMargins {
  std::vector<double> margins;  // Delta - ||d_ij|| per edge
  double delta0 = 0.0;          // max margin
  bool holds = false;
};

EdgeMargins check_margins(const FormationSpec& spec);

struct InitialCheck {
  std::vector<double> lengths;  // ||x_i(0) - x_j(0) - d_ij|| per edge
  std::vector<double> slack;    // margin - length per edge
  bool holds = false;
};

InitialCheck check_initial(const FormationSpec& spec, const Points& x0);

/// x_i - x_j - d_ij for edge k in canonical direction (equals y_i - y_j).
Vec edge_error(const FormationSpec& spec, const Points& x, int k);

}  // namespace etfc
