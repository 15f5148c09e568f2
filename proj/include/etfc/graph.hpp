#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace etfc {

/// Undirected edge between two 0-based nodes, stored with tail < head.
struct Edge {
  int tail = 0;
  int head = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Fixed, connected, undirected communication topology.
///
/// Construction rejects self-loops, duplicate or unordered pairs, out-of-range
/// nodes and disconnected graphs (breadth-first search from node 0). Instances
/// are immutable afterwards.
class Graph {
 public:
  Graph(int node_count, std::vector<Edge> edges);

  int node_count() const noexcept { return n_; }
  int edge_count() const noexcept { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const Edge& edge(int k) const { return edges_.at(static_cast<std::size_t>(k)); }

  /// Neighbors of node i in ascending order.
  std::span<const int> neighbors(int i) const;
  /// Edge indices parallel to neighbors(i).
  std::span<const int> incident_edges(int i) const;
  /// Index into edges() of the edge joining i and j, in either order.
  std::optional<int> edge_index(int i, int j) const;
  int degree(int i) const { return static_cast<int>(neighbors(i).size()); }

  Eigen::MatrixXd adjacency() const;
  Eigen::MatrixXd degree_matrix() const;
  /// Deg - A.
  Eigen::MatrixXd laplacian() const;

 private:
  int n_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> neighbors_;
  std::vector<std::vector<int>> incident_;
};

/// Per-edge head/tail assignment. flipped[k] == false means the canonical
/// choice tail = min(i, j), head = max(i, j).
class Orientation {
 public:
  static Orientation canonical(const Graph& g);
  static Orientation from_flips(const Graph& g, std::vector<bool> flipped);

  int tail(const Graph& g, int k) const;
  int head(const Graph& g, int k) const;
  bool flipped(int k) const { return flipped_.at(static_cast<std::size_t>(k)); }
  std::size_t size() const noexcept { return flipped_.size(); }

 private:
  explicit Orientation(std::vector<bool> flipped) : flipped_(std::move(flipped)) {}
  std::vector<bool> flipped_;
};

/// Diagonal of W, one nonnegative entry per edge.
using EdgeWeights = Eigen::VectorXd;

/// n x m incidence matrix: -1 at the tail, +1 at the head of each edge.
Eigen::MatrixXd incidence(const Graph& g, const Orientation& orient);

/// D W D^T. Throws ConfigError on dimension mismatch or negative weights.
Eigen::MatrixXd weighted_laplacian(const Graph& g, const Orientation& orient,
                                   const EdgeWeights& w);

/// K_n = I_n - (1/n) 1 1^T.
Eigen::MatrixXd centering_matrix(int n);

/// Eigenvalues below this fraction of max(1, spectral radius) count as zero.
inline constexpr double kZeroEigenvalueThreshold = 1e-9;

/// Smallest eigenvalue of a symmetric PSD matrix that is above the zero
/// threshold. Throws std::domain_error if every eigenvalue is below it.
double rho2(const Eigen::MatrixXd& m);

/// True iff D D^T - rho2(D D^T) K_n is positive semidefinite. Always holds for
/// connected graphs; kept as an oracle for tests.
bool centering_psd_check(const Graph& g);

}  // namespace etfc
