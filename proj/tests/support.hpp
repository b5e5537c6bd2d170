#pragma once

// Independent dense references and random fixtures shared by the tests.

#include "adagnn/adagnn.hpp"

#include <Eigen/Eigenvalues>

#include <filesystem>
#include <string>
#include <vector>

namespace testing_support {

using adagnn::Index;
using adagnn::Matrix;
using adagnn::Vector;

inline Matrix random_dense(Index r, Index c, adagnn::Rng& rng, double lo = -1.0, double hi = 1.0) {
  Matrix m(r, c);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(lo, hi);
  return m;
}

/// Random tree plus Erdos-Renyi extras; connected by construction.
inline adagnn::Graph random_connected_graph(Index n, double p, adagnn::Rng& rng, bool force_odd_cycle = true) {
  std::vector<adagnn::Edge> edges;
  for (Index v = 1; v < n; ++v) edges.emplace_back(static_cast<Index>(rng.below(static_cast<std::uint64_t>(v))), v);
  for (Index u = 0; u < n; ++u)
    for (Index v = u + 1; v < n; ++v)
      if (rng.uniform() < p) edges.emplace_back(u, v);
  if (force_odd_cycle && n >= 3) {
    edges.emplace_back(0, 1);
    edges.emplace_back(1, 2);
    edges.emplace_back(0, 2);
  }
  return adagnn::Graph::from_edges(n, edges);
}

inline Matrix dense_adjacency(const adagnn::Graph& g) {
  Matrix a = Matrix::Zero(g.num_nodes(), g.num_nodes());
  for (auto [u, v] : g.edges()) {
    a(u, v) = 1.0;
    a(v, u) = 1.0;
  }
  return a;
}

/// D~^-1/2 (A + I) D~^-1/2, built from dense matrix products.
inline Matrix dense_sym_propagation(const adagnn::Graph& g) {
  const Matrix at = dense_adjacency(g) + Matrix::Identity(g.num_nodes(), g.num_nodes());
  const Vector d = at.rowwise().sum();
  const Vector s = d.cwiseSqrt().cwiseInverse();
  return s.asDiagonal() * at * s.asDiagonal();
}

/// D~^-1 (A + I).
inline Matrix dense_mean_propagation(const adagnn::Graph& g) {
  const Matrix at = dense_adjacency(g) + Matrix::Identity(g.num_nodes(), g.num_nodes());
  const Vector d = at.rowwise().sum();
  return d.cwiseInverse().asDiagonal() * at;
}

/// Eigen's own solver; an oracle independent of the Jacobi code.
inline std::pair<Vector, Matrix> eigen_reference(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  return {es.eigenvalues(), es.eigenvectors()};
}

/// Fresh empty directory under the build tree's temp area.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("adagnn_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

}  // namespace testing_support
