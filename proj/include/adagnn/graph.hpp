#pragma once

#include "adagnn/common.hpp"
#include "adagnn/sparse.hpp"

#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace adagnn {

using Edge = std::pair<Index, Index>;

/// Node degrees, optionally of the self-loop augmented adjacency A + I.
struct DegreeVector {
  Vector d;
  bool augmented = false;
};

/// Undirected simple graph. Edges are stored once as (u, v) with u < v;
/// self-loops are never stored and only enter through augmentation.
class Graph {
 public:
  Graph() = default;

  /// Accepts edges in any orientation, with repeats; self-loops are ignored.
  static Graph from_edges(Index n, const std::vector<Edge>& edges) {
    if (n < 0) throw DimensionError("Graph: negative node count");
    Graph g;
    g.n_ = n;
    g.edges_.reserve(edges.size());
    for (auto [u, v] : edges) {
      if (u < 0 || v < 0 || u >= n || v >= n) {
        throw std::out_of_range("Graph: edge (" + std::to_string(u) + "," + std::to_string(v) +
                                ") references a node outside [0," + std::to_string(n) + ")");
      }
      if (u == v) continue;
      if (u > v) std::swap(u, v);
      g.edges_.emplace_back(u, v);
    }
    std::sort(g.edges_.begin(), g.edges_.end());
    g.edges_.erase(std::unique(g.edges_.begin(), g.edges_.end()), g.edges_.end());

    std::vector<Triplet> t;
    t.reserve(2 * g.edges_.size());
    for (auto [u, v] : g.edges_) {
      t.push_back({u, v, 1.0});
      t.push_back({v, u, 1.0});
    }
    g.adjacency_ = SparseMatrix::from_coo(std::move(t), n, n);
    return g;
  }

  Index num_nodes() const { return n_; }
  Index num_edges() const { return static_cast<Index>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }

  /// Symmetric 0/1 adjacency without self-loops.
  const SparseMatrix& adjacency() const { return adjacency_; }

  Index degree(Index v) const { return adjacency_.row_length(v); }

  DegreeVector degrees(bool augmented) const {
    DegreeVector out;
    out.augmented = augmented;
    out.d.resize(n_);
    for (Index v = 0; v < n_; ++v) out.d[v] = static_cast<double>(degree(v)) + (augmented ? 1.0 : 0.0);
    return out;
  }

  std::vector<Index> neighbors(Index v) const {
    const auto c = adjacency_.row_cols(v);
    return {c.begin(), c.end()};
  }

  bool is_connected() const {
    if (n_ == 0) return true;
    std::vector<char> seen(static_cast<std::size_t>(n_), 0);
    std::vector<Index> stack{0};
    seen[0] = 1;
    Index count = 1;
    while (!stack.empty()) {
      const Index v = stack.back();
      stack.pop_back();
      for (Index u : adjacency_.row_cols(v)) {
        if (!seen[static_cast<std::size_t>(u)]) {
          seen[static_cast<std::size_t>(u)] = 1;
          ++count;
          stack.push_back(u);
        }
      }
    }
    return count == n_;
  }

  bool is_bipartite() const {
    std::vector<int> colour(static_cast<std::size_t>(n_), -1);
    for (Index s = 0; s < n_; ++s) {
      if (colour[static_cast<std::size_t>(s)] >= 0) continue;
      colour[static_cast<std::size_t>(s)] = 0;
      std::vector<Index> stack{s};
      while (!stack.empty()) {
        const Index v = stack.back();
        stack.pop_back();
        for (Index u : adjacency_.row_cols(v)) {
          auto& cu = colour[static_cast<std::size_t>(u)];
          if (cu < 0) {
            cu = 1 - colour[static_cast<std::size_t>(v)];
            stack.push_back(u);
          } else if (cu == colour[static_cast<std::size_t>(v)]) {
            return false;
          }
        }
      }
    }
    return true;
  }

 private:
  Index n_ = 0;
  std::vector<Edge> edges_;
  SparseMatrix adjacency_;
};

enum class LaplacianKind { unnormalized, sym, rw };

inline const char* to_string(LaplacianKind k) {
  switch (k) {
    case LaplacianKind::unnormalized: return "unnormalized";
    case LaplacianKind::sym: return "sym";
    case LaplacianKind::rw: return "rw";
  }
  return "?";
}

/// L = D - A, D^-1/2 L D^-1/2 or D^-1 L; with self_loops the degrees and
/// adjacency are those of A + I.
///
/// Entries are written out per position rather than derived from products,
/// so the sym variant is exactly symmetric.
inline SparseMatrix laplacian(const Graph& g, LaplacianKind kind, bool self_loops) {
  const Index n = g.num_nodes();
  const DegreeVector deg = g.degrees(self_loops);
  if (kind != LaplacianKind::unnormalized) {
    for (Index v = 0; v < n; ++v) {
      if (deg.d[v] <= 0.0) {
        throw DegenerateDegreeError("laplacian: node " + std::to_string(v) +
                                    " has degree 0; normalized Laplacians need self-loop augmentation");
      }
    }
  }
  Vector inv_sqrt(n);
  for (Index v = 0; v < n; ++v) inv_sqrt[v] = deg.d[v] > 0.0 ? 1.0 / std::sqrt(deg.d[v]) : 0.0;

  const double loop = self_loops ? 1.0 : 0.0;
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(n + 2 * g.num_edges()));
  const SparseMatrix& a = g.adjacency();
  for (Index v = 0; v < n; ++v) {
    const double dv = deg.d[v];
    switch (kind) {
      case LaplacianKind::unnormalized: t.push_back({v, v, dv - loop}); break;
      case LaplacianKind::sym:
      case LaplacianKind::rw: t.push_back({v, v, 1.0 - loop / dv}); break;
    }
    for (Index u : a.row_cols(v)) {
      switch (kind) {
        case LaplacianKind::unnormalized: t.push_back({v, u, -1.0}); break;
        case LaplacianKind::sym: t.push_back({v, u, -(inv_sqrt[v] * inv_sqrt[u])}); break;
        case LaplacianKind::rw: t.push_back({v, u, -1.0 / dv}); break;
      }
    }
  }
  return SparseMatrix::from_coo(std::move(t), n, n);
}

/// D~^-1/2 (A + I) D~^-1/2, the renormalized propagation operator.
inline SparseMatrix gcn_propagation(const Graph& g) {
  const Index n = g.num_nodes();
  const DegreeVector deg = g.degrees(true);
  Vector inv_sqrt(n);
  for (Index v = 0; v < n; ++v) inv_sqrt[v] = 1.0 / std::sqrt(deg.d[v]);
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(n + 2 * g.num_edges()));
  for (Index v = 0; v < n; ++v) {
    t.push_back({v, v, 1.0 / deg.d[v]});
    for (Index u : g.adjacency().row_cols(v)) t.push_back({v, u, inv_sqrt[v] * inv_sqrt[u]});
  }
  return SparseMatrix::from_coo(std::move(t), n, n);
}

/// D~^-1 (A + I): mean over the closed neighbourhood.
inline SparseMatrix mean_propagation(const Graph& g) {
  const Index n = g.num_nodes();
  const DegreeVector deg = g.degrees(true);
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(n + 2 * g.num_edges()));
  for (Index v = 0; v < n; ++v) {
    t.push_back({v, v, 1.0 / deg.d[v]});
    for (Index u : g.adjacency().row_cols(v)) t.push_back({v, u, 1.0 / deg.d[v]});
  }
  return SparseMatrix::from_coo(std::move(t), n, n);
}

}  // namespace adagnn
