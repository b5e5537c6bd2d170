#pragma once

#include "adagnn/common.hpp"

#include <algorithm>
#include <span>
#include <string>
#include <tuple>
#include <vector>

namespace adagnn {

struct Triplet {
  Index row;
  Index col;
  double value;
};

/// Compressed-row matrix in canonical form: columns strictly increasing
/// within a row, no stored zeros. Immutable after construction.
class SparseMatrix {
 public:
  SparseMatrix() : row_offsets_(1, 0) {}

  /// Builds from unordered triplets; duplicates are summed and entries that
  /// end up exactly zero are dropped.
  static SparseMatrix from_coo(std::vector<Triplet> entries, Index n_rows, Index n_cols) {
    if (n_rows < 0 || n_cols < 0) throw DimensionError("from_coo: negative dimension");
    for (const auto& t : entries) {
      if (t.row < 0 || t.row >= n_rows || t.col < 0 || t.col >= n_cols) {
        throw std::out_of_range("from_coo: entry (" + std::to_string(t.row) + "," +
                                std::to_string(t.col) + ") outside " + std::to_string(n_rows) + "x" +
                                std::to_string(n_cols));
      }
    }
    // Duplicates are summed in value order so the result does not depend on
    // the input order.
    std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
      return std::tie(a.row, a.col, a.value) < std::tie(b.row, b.col, b.value);
    });

    SparseMatrix m;
    m.n_rows_ = n_rows;
    m.n_cols_ = n_cols;
    m.row_offsets_.assign(static_cast<std::size_t>(n_rows) + 1, 0);
    std::size_t i = 0;
    while (i < entries.size()) {
      const Index r = entries[i].row;
      const Index c = entries[i].col;
      double sum = 0.0;
      while (i < entries.size() && entries[i].row == r && entries[i].col == c) {
        sum += entries[i].value;
        ++i;
      }
      if (sum != 0.0) {
        m.col_indices_.push_back(c);
        m.values_.push_back(sum);
        ++m.row_offsets_[static_cast<std::size_t>(r) + 1];
      }
    }
    for (std::size_t r = 0; r < static_cast<std::size_t>(n_rows); ++r) {
      m.row_offsets_[r + 1] += m.row_offsets_[r];
    }
    return m;
  }

  /// Adopts raw CSR arrays after checking the canonical-form invariants.
  static SparseMatrix from_csr(Index n_rows, Index n_cols, std::vector<Index> row_offsets,
                               std::vector<Index> col_indices, std::vector<double> values) {
    SparseMatrix m;
    m.n_rows_ = n_rows;
    m.n_cols_ = n_cols;
    m.row_offsets_ = std::move(row_offsets);
    m.col_indices_ = std::move(col_indices);
    m.values_ = std::move(values);
    m.check_invariants();
    return m;
  }

  static SparseMatrix identity(Index n) {
    std::vector<Index> offsets(static_cast<std::size_t>(n) + 1);
    std::vector<Index> cols(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
      offsets[static_cast<std::size_t>(i) + 1] = i + 1;
      cols[static_cast<std::size_t>(i)] = i;
    }
    return from_csr(n, n, std::move(offsets), std::move(cols), std::vector<double>(static_cast<std::size_t>(n), 1.0));
  }

  static SparseMatrix zeros(Index n_rows, Index n_cols) { return from_coo({}, n_rows, n_cols); }

  static SparseMatrix from_dense(const Matrix& d) {
    SparseMatrix m;
    m.n_rows_ = d.rows();
    m.n_cols_ = d.cols();
    m.row_offsets_.assign(static_cast<std::size_t>(d.rows()) + 1, 0);
    for (Index r = 0; r < d.rows(); ++r) {
      for (Index c = 0; c < d.cols(); ++c) {
        if (d(r, c) != 0.0) {
          m.col_indices_.push_back(c);
          m.values_.push_back(d(r, c));
        }
      }
      m.row_offsets_[static_cast<std::size_t>(r) + 1] = static_cast<Index>(m.values_.size());
    }
    return m;
  }

  Index rows() const { return n_rows_; }
  Index cols() const { return n_cols_; }
  Index nnz() const { return static_cast<Index>(values_.size()); }

  std::span<const Index> row_offsets() const { return row_offsets_; }
  std::span<const Index> col_indices() const { return col_indices_; }
  std::span<const double> values() const { return values_; }

  std::span<const Index> row_cols(Index r) const {
    return std::span<const Index>(col_indices_).subspan(static_cast<std::size_t>(row_offsets_[static_cast<std::size_t>(r)]),
                                                       static_cast<std::size_t>(row_length(r)));
  }
  std::span<const double> row_values(Index r) const {
    return std::span<const double>(values_).subspan(static_cast<std::size_t>(row_offsets_[static_cast<std::size_t>(r)]),
                                                    static_cast<std::size_t>(row_length(r)));
  }
  Index row_length(Index r) const {
    return row_offsets_[static_cast<std::size_t>(r) + 1] - row_offsets_[static_cast<std::size_t>(r)];
  }

  /// Stored value at (r, c), or 0.
  double coeff(Index r, Index c) const {
    const auto cols = row_cols(r);
    const auto it = std::lower_bound(cols.begin(), cols.end(), c);
    if (it == cols.end() || *it != c) return 0.0;
    return row_values(r)[static_cast<std::size_t>(it - cols.begin())];
  }

  Matrix to_dense() const {
    Matrix d = Matrix::Zero(n_rows_, n_cols_);
    for (Index r = 0; r < n_rows_; ++r) {
      const auto cols = row_cols(r);
      const auto vals = row_values(r);
      for (std::size_t k = 0; k < cols.size(); ++k) d(r, cols[k]) = vals[k];
    }
    return d;
  }

  SparseMatrix transpose() const {
    std::vector<Index> offsets(static_cast<std::size_t>(n_cols_) + 1, 0);
    for (Index c : col_indices_) ++offsets[static_cast<std::size_t>(c) + 1];
    for (std::size_t c = 0; c < static_cast<std::size_t>(n_cols_); ++c) offsets[c + 1] += offsets[c];
    std::vector<Index> cursor(offsets.begin(), offsets.end() - 1);
    std::vector<Index> cols(col_indices_.size());
    std::vector<double> vals(values_.size());
    for (Index r = 0; r < n_rows_; ++r) {
      const auto rc = row_cols(r);
      const auto rv = row_values(r);
      for (std::size_t k = 0; k < rc.size(); ++k) {
        const auto dst = static_cast<std::size_t>(cursor[static_cast<std::size_t>(rc[k])]++);
        cols[dst] = r;
        vals[dst] = rv[k];
      }
    }
    return from_csr(n_cols_, n_rows_, std::move(offsets), std::move(cols), std::move(vals));
  }

  /// Same sparsity pattern, values replaced.
  SparseMatrix with_values(std::vector<double> values) const {
    require(values.size() == values_.size(), "with_values: length mismatch");
    SparseMatrix m = *this;
    m.values_ = std::move(values);
    // Zeros may appear; restore canonical form.
    if (std::find(m.values_.begin(), m.values_.end(), 0.0) != m.values_.end()) return m.pruned();
    return m;
  }

  bool operator==(const SparseMatrix& o) const {
    return n_rows_ == o.n_rows_ && n_cols_ == o.n_cols_ && row_offsets_ == o.row_offsets_ &&
           col_indices_ == o.col_indices_ && values_ == o.values_;
  }

  /// Throws when the canonical CSR form is violated.
  void check_invariants() const {
    if (row_offsets_.size() != static_cast<std::size_t>(n_rows_) + 1 || row_offsets_.front() != 0 ||
        row_offsets_.back() != static_cast<Index>(values_.size()) || col_indices_.size() != values_.size()) {
      throw DimensionError("from_csr: inconsistent CSR arrays");
    }
    for (Index r = 0; r < n_rows_; ++r) {
      if (row_offsets_[static_cast<std::size_t>(r) + 1] < row_offsets_[static_cast<std::size_t>(r)]) {
        throw DimensionError("from_csr: row offsets decrease");
      }
      const auto rc = row_cols(r);
      for (std::size_t k = 0; k < rc.size(); ++k) {
        if (rc[k] < 0 || rc[k] >= n_cols_) throw std::out_of_range("from_csr: column index out of range");
        if (k > 0 && rc[k] <= rc[k - 1]) throw DimensionError("from_csr: columns not strictly increasing");
      }
    }
    for (double v : values_) {
      if (v == 0.0) throw DimensionError("from_csr: explicit zero stored");
    }
  }

 private:
  SparseMatrix pruned() const {
    std::vector<Triplet> t;
    t.reserve(values_.size());
    for (Index r = 0; r < n_rows_; ++r) {
      const auto rc = row_cols(r);
      const auto rv = row_values(r);
      for (std::size_t k = 0; k < rc.size(); ++k) t.push_back({r, rc[k], rv[k]});
    }
    return from_coo(std::move(t), n_rows_, n_cols_);
  }

  Index n_rows_ = 0;
  Index n_cols_ = 0;
  std::vector<Index> row_offsets_;
  std::vector<Index> col_indices_;
  std::vector<double> values_;
};

/// s * d. Each output row is accumulated in stored-column order, so the
/// result is identical whatever the thread count.
inline Matrix spmm(const SparseMatrix& s, const Matrix& d) {
  require(s.cols() == d.rows(), "spmm: " + std::to_string(s.rows()) + "x" + std::to_string(s.cols()) + " times " +
                                    std::to_string(d.rows()) + "x" + std::to_string(d.cols()));
  Matrix out = Matrix::Zero(s.rows(), d.cols());
  const Index avg_row = s.rows() > 0 ? s.nnz() / s.rows() + 1 : 1;
  parallel_for(s.rows(), avg_row * d.cols(), [&](Index begin, Index end) {
    for (Index r = begin; r < end; ++r) {
      const auto cols = s.row_cols(r);
      const auto vals = s.row_values(r);
      auto out_row = out.row(r);
      for (std::size_t k = 0; k < cols.size(); ++k) out_row.noalias() += vals[k] * d.row(cols[k]);
    }
  });
  return out;
}

/// transpose(s) * d without materializing the transpose. Work is split over
/// output columns; each output entry sums over source rows in ascending order.
inline Matrix spmm_transposed(const SparseMatrix& s, const Matrix& d) {
  require(s.rows() == d.rows(), "spmm_transposed: row count mismatch");
  Matrix out = Matrix::Zero(s.cols(), d.cols());
  parallel_for(d.cols(), s.nnz(), [&](Index c0, Index c1) {
    const Index width = c1 - c0;
    for (Index r = 0; r < s.rows(); ++r) {
      const auto cols = s.row_cols(r);
      const auto vals = s.row_values(r);
      const auto src = d.row(r).segment(c0, width);
      for (std::size_t k = 0; k < cols.size(); ++k) {
        out.row(cols[k]).segment(c0, width).noalias() += vals[k] * src;
      }
    }
  });
  return out;
}

/// m * diag(d): column j scaled by d[j].
inline Matrix diag_right_mul(const Matrix& m, const Vector& d) {
  require(d.size() == m.cols(), "diag_right_mul: diagonal length " + std::to_string(d.size()) + " vs " +
                                    std::to_string(m.cols()) + " columns");
  return m * d.asDiagonal();
}

inline SparseMatrix diag_right_mul(const SparseMatrix& s, const Vector& d) {
  require(d.size() == s.cols(), "diag_right_mul: diagonal length " + std::to_string(d.size()) + " vs " +
                                    std::to_string(s.cols()) + " columns");
  std::vector<double> vals(s.values().begin(), s.values().end());
  const auto cols = s.col_indices();
  for (std::size_t k = 0; k < vals.size(); ++k) vals[k] *= d[cols[k]];
  return s.with_values(std::move(vals));
}

/// diag(d) * s: row i scaled by d[i].
inline SparseMatrix diag_left_mul(const Vector& d, const SparseMatrix& s) {
  require(d.size() == s.rows(), "diag_left_mul: length mismatch");
  std::vector<double> vals(s.values().begin(), s.values().end());
  for (Index r = 0; r < s.rows(); ++r) {
    for (Index k = s.row_offsets()[static_cast<std::size_t>(r)]; k < s.row_offsets()[static_cast<std::size_t>(r) + 1]; ++k) {
      vals[static_cast<std::size_t>(k)] *= d[r];
    }
  }
  return s.with_values(std::move(vals));
}

}  // namespace adagnn
