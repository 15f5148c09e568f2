#include "etfc/graph.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>

#include "etfc/errors.hpp"

namespace etfc {

Graph::Graph(int node_count, std::vector<Edge> edges)
    : n_(node_count), edges_(std::move(edges)) {
  if (n_ <= 0) throw ConfigError("graph needs at least one node");

  std::set<std::pair<int, int>> seen;
  neighbors_.assign(static_cast<std::size_t>(n_), {});
  for (const Edge& e : edges_) {
    const std::string label =
        "(" + std::to_string(e.tail + 1) + "," + std::to_string(e.head + 1) + ")";
    if (e.tail < 0 || e.head < 0 || e.tail >= n_ || e.head >= n_)
      throw ConfigError("edge " + label + " references a node outside 1.." +
                        std::to_string(n_));
    if (e.tail == e.head) throw ConfigError("self-loop " + label);
    if (e.tail > e.head)
      throw ConfigError("edge " + label + " must be listed with i < j");
    if (!seen.emplace(e.tail, e.head).second)
      throw ConfigError("duplicate edge " + label);
    neighbors_[static_cast<std::size_t>(e.tail)].push_back(e.head);
    neighbors_[static_cast<std::size_t>(e.head)].push_back(e.tail);
  }
  incident_.assign(static_cast<std::size_t>(n_), {});
  for (int i = 0; i < n_; ++i) {
    auto& nb = neighbors_[static_cast<std::size_t>(i)];
    std::sort(nb.begin(), nb.end());
    for (int j : nb) incident_[static_cast<std::size_t>(i)].push_back(*edge_index(i, j));
  }

  std::vector<bool> visited(static_cast<std::size_t>(n_), false);
  std::queue<int> frontier;
  frontier.push(0);
  visited[0] = true;
  int reached = 1;
  while (!frontier.empty()) {
    const int i = frontier.front();
    frontier.pop();
    for (int j : neighbors_[static_cast<std::size_t>(i)]) {
      if (!visited[static_cast<std::size_t>(j)]) {
        visited[static_cast<std::size_t>(j)] = true;
        ++reached;
        frontier.push(j);
      }
    }
  }
  if (reached != n_)
    throw ConfigError("graph is disconnected: " + std::to_string(reached) + " of " +
                      std::to_string(n_) + " nodes reachable from node 1");
}

std::span<const int> Graph::neighbors(int i) const {
  return neighbors_.at(static_cast<std::size_t>(i));
}

std::span<const int> Graph::incident_edges(int i) const {
  return incident_.at(static_cast<std::size_t>(i));
}

std::optional<int> Graph::edge_index(int i, int j) const {
  const Edge key{std::min(i, j), std::max(i, j)};
  const auto it = std::find(edges_.begin(), edges_.end(), key);
  if (it == edges_.end()) return std::nullopt;
  return static_cast<int>(it - edges_.begin());
}

Eigen::MatrixXd Graph::adjacency() const {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_, n_);
  for (const Edge& e : edges_) {
    a(e.tail, e.head) = 1.0;
    a(e.head, e.tail) = 1.0;
  }
  return a;
}

Eigen::MatrixXd Graph::degree_matrix() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n_, n_);
  for (int i = 0; i < n_; ++i) d(i, i) = degree(i);
  return d;
}

Eigen::MatrixXd Graph::laplacian() const { return degree_matrix() - adjacency(); }

Orientation Orientation::canonical(const Graph& g) {
  return Orientation(std::vector<bool>(static_cast<std::size_t>(g.edge_count()), false));
}

Orientation Orientation::from_flips(const Graph& g, std::vector<bool> flipped) {
  if (flipped.size() != static_cast<std::size_t>(g.edge_count()))
    throw ConfigError("orientation has " + std::to_string(flipped.size()) +
                      " entries for " + std::to_string(g.edge_count()) + " edges");
  return Orientation(std::move(flipped));
}

int Orientation::tail(const Graph& g, int k) const {
  const Edge& e = g.edge(k);
  return flipped(k) ? e.head : e.tail;
}

int Orientation::head(const Graph& g, int k) const {
  const Edge& e = g.edge(k);
  return flipped(k) ? e.tail : e.head;
}

Eigen::MatrixXd incidence(const Graph& g, const Orientation& orient) {
  if (orient.size() != static_cast<std::size_t>(g.edge_count()))
    throw ConfigError("orientation does not match graph");
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(g.node_count(), g.edge_count());
  for (int k = 0; k < g.edge_count(); ++k) {
    d(orient.tail(g, k), k) = -1.0;
    d(orient.head(g, k), k) = 1.0;
  }
  return d;
}

Eigen::MatrixXd weighted_laplacian(const Graph& g, const Orientation& orient,
                                   const EdgeWeights& w) {
  if (w.size() != g.edge_count())
    throw ConfigError("weight vector has " + std::to_string(w.size()) +
                      " entries for " + std::to_string(g.edge_count()) + " edges");
  if ((w.array() < 0.0).any()) throw ConfigError("edge weights must be nonnegative");
  const Eigen::MatrixXd d = incidence(g, orient);
  return d * w.asDiagonal() * d.transpose();
}

Eigen::MatrixXd centering_matrix(int n) {
  return Eigen::MatrixXd::Identity(n, n) -
         Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
}

double rho2(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw std::domain_error("rho2 needs a non-empty square matrix");
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& ev = solver.eigenvalues();  // ascending
  const double radius = ev.cwiseAbs().maxCoeff();
  const double zero = kZeroEigenvalueThreshold * std::max(1.0, radius);
  for (Eigen::Index k = 0; k < ev.size(); ++k)
    if (ev(k) > zero) return ev(k);
  throw std::domain_error("matrix has no eigenvalue above the zero threshold");
}

bool centering_psd_check(const Graph& g) {
  const Eigen::MatrixXd d = incidence(g, Orientation::canonical(g));
  const Eigen::MatrixXd l = d * d.transpose();
  const Eigen::MatrixXd gap = l - rho2(l) * centering_matrix(g.node_count());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gap, Eigen::EigenvaluesOnly);
  const double scale = std::max(1.0, l.diagonal().maxCoeff());
  return solver.eigenvalues().minCoeff() >= -kZeroEigenvalueThreshold * scale;
}

}  // namespace etfc
