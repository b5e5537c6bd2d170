#pragma once

#include "adagnn/common.hpp"
#include "adagnn/graph.hpp"

#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace adagnn {

/// Eigenpairs of a symmetric matrix: eigenvalues ascending, column i of
/// `vectors` paired with values[i], columns orthonormal.
struct EigenBasis {
  Vector values;
  Matrix vectors;

  Index size() const { return values.size(); }
};

struct JacobiOptions {
  double tol = 1e-10;       // off-diagonal Frobenius threshold, relative to max(1, ||M||_F)
  int max_sweeps = 100;
  Index max_size = 2000;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Cyclic Jacobi eigendecomposition.
///
/// Each rotation zeroes one off-diagonal pair and is applied to rows and
/// columns alike, so the working matrix stays exactly symmetric. Sweeps run
/// until the off-diagonal Frobenius norm drops below the threshold.
/// Eigenvectors are normalized with their largest-magnitude entry positive.
inline EigenBasis eigendecompose_sym(const Matrix& m, const JacobiOptions& opt = {}) {
  const Index n = m.rows();
  require(m.cols() == n, "eigendecompose_sym: matrix is not square");
  if (n > opt.max_size) {
    throw DimensionError("eigendecompose_sym: N=" + std::to_string(n) + " exceeds cap " + std::to_string(opt.max_size));
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      if (std::abs(m(i, j) - m(j, i)) > 1e-12 * scale) {
        throw DimensionError("eigendecompose_sym: input not symmetric at (" + std::to_string(i) + "," +
                             std::to_string(j) + ")");
      }
    }
  }

  Matrix a = m;
  // Mirror the upper triangle so the iteration starts from an exactly symmetric matrix.
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) a(j, i) = a(i, j);
  Matrix v = Matrix::Identity(n, n);

  auto off_norm = [&] {
    double s = 0.0;
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j) s += 2.0 * a(i, j) * a(i, j);
    return std::sqrt(s);
  };
  const double threshold = opt.tol * std::max(1.0, m.norm());

  int sweep = 0;
  while (off_norm() > threshold) {
    if (++sweep > opt.max_sweeps) {
      throw ConvergenceError("eigendecompose_sym: no convergence after " + std::to_string(opt.max_sweeps) + " sweeps");
    }
    for (Index p = 0; p < n - 1; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Rutishauser's stable form of the rotation angle.
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);

        const double app = a(p, p);
        const double aqq = a(q, q);
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (Index r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const double arp = a(r, p);
          const double arq = a(r, q);
          const double nrp = arp - s * (arq + tau * arp);
          const double nrq = arq + s * (arp - tau * arq);
          a(r, p) = nrp;
          a(p, r) = nrp;
          a(r, q) = nrq;
          a(q, r) = nrq;
        }
        for (Index r = 0; r < n; ++r) {
          const double vrp = v(r, p);
          const double vrq = v(r, q);
          v(r, p) = vrp - s * (vrq + tau * vrp);
          v(r, q) = vrq + s * (vrp - tau * vrq);
        }
      }
    }
  }

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index i, Index j) { return a(i, i) < a(j, j); });

  EigenBasis out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Index k = 0; k < n; ++k) {
    const Index src = order[static_cast<std::size_t>(k)];
    out.values[k] = a(src, src);
    Vector col = v.col(src);
    col /= col.norm();
    Index arg = 0;
    for (Index r = 1; r < n; ++r) {
      if (std::abs(col[r]) > std::abs(col[arg])) arg = r;
    }
    if (col[arg] < 0.0) col = -col;
    out.vectors.col(k) = col;
  }
  return out;
}

/// Graph Fourier transform: coefficients in the eigenbasis.
inline Vector gft(const EigenBasis& basis, const Vector& x) {
  require(x.size() == basis.size(), "gft: signal length " + std::to_string(x.size()) + " vs basis size " +
                                        std::to_string(basis.size()));
  return basis.vectors.transpose() * x;
}

inline Vector igft(const EigenBasis& basis, const Vector& xhat) {
  require(xhat.size() == basis.size(), "igft: coefficient length " + std::to_string(xhat.size()) +
                                           " vs basis size " + std::to_string(basis.size()));
  return basis.vectors * xhat;
}

/// Product over layers of (1 - phi_k * lambda).
inline double freq_response(std::span<const double> phis, double lambda) {
  double r = 1.0;
  for (double phi : phis) r *= (1.0 - phi * lambda);
  return r;
}

inline double freq_response(const std::vector<double>& phis, double lambda) {
  return freq_response(std::span<const double>(phis), lambda);
}

/// Applies U diag(g(lambda_i)) U^T to every column of x.
template <typename Response>
Matrix spectral_filter(const EigenBasis& basis, const Matrix& x, Response&& g) {
  require(x.rows() == basis.size(), "spectral_filter: row count mismatch");
  Vector gain(basis.size());
  for (Index i = 0; i < basis.size(); ++i) gain[i] = g(basis.values[i]);
  return basis.vectors * (gain.asDiagonal() * (basis.vectors.transpose() * x));
}

/// Right eigenvectors of the augmented random-walk Laplacian, obtained from
/// the symmetric basis by similarity: L_rw (D^-1/2 u) = lambda (D^-1/2 u).
/// The returned columns are not orthonormal.
inline Matrix rw_eigenvectors(const EigenBasis& sym_basis, const DegreeVector& deg) {
  require(deg.d.size() == sym_basis.size(), "rw_eigenvectors: degree length mismatch");
  Vector inv_sqrt = deg.d.cwiseSqrt().cwiseInverse();
  return inv_sqrt.asDiagonal() * sym_basis.vectors;
}

/// Unit vector along D^1/2 1, the zero-eigenvalue direction of the
/// normalized Laplacian of a connected graph.
inline Vector stationary_direction(const DegreeVector& deg) {
  Vector u = deg.d.cwiseSqrt();
  return u / u.norm();
}

}  // namespace adagnn
