#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "lcpool/dense.hpp"

namespace lcpool {

/// Strictly increasing list of node indices, e.g. the nodes kept by top-k.
class IndexSet {
 public:
  IndexSet() = default;
  explicit IndexSet(std::vector<std::size_t> indices);

  static IndexSet range(std::size_t n);

  std::size_t size() const noexcept { return idx_.size(); }
  bool empty() const noexcept { return idx_.empty(); }
  std::size_t operator[](std::size_t i) const { return idx_[i]; }
  std::span<const std::size_t> view() const noexcept { return idx_; }
  const std::vector<std::size_t>& indices() const noexcept { return idx_; }

  auto begin() const noexcept { return idx_.begin(); }
  auto end() const noexcept { return idx_.end(); }

  friend bool operator==(const IndexSet&, const IndexSet&) = default;

 private:
  std::vector<std::size_t> idx_;
};

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Compressed sparse row matrix in canonical form: columns strictly increasing
/// within each row, no explicit zeros, all values finite. Every operation in
/// this header returns canonical matrices; instances are immutable.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  CsrMatrix(std::size_t n_rows, std::size_t n_cols);  // all-zero

  /// Builds a canonical matrix; duplicates are summed and zeros dropped.
  static CsrMatrix from_triplets(std::size_t n_rows, std::size_t n_cols,
                                 std::vector<Triplet> triplets);
  /// Adopts raw arrays after checking canonical form (throws otherwise).
  static CsrMatrix from_raw(std::size_t n_rows, std::size_t n_cols,
                            std::vector<std::size_t> row_ptr,
                            std::vector<std::size_t> col_idx,
                            std::vector<double> values);
  static CsrMatrix identity(std::size_t n);

  std::size_t n_rows() const noexcept { return n_rows_; }
  std::size_t n_cols() const noexcept { return n_cols_; }
  std::size_t nnz() const noexcept { return col_idx_.size(); }
  bool is_square() const noexcept { return n_rows_ == n_cols_; }

  const std::vector<std::size_t>& row_ptr() const noexcept { return row_ptr_; }
  const std::vector<std::size_t>& col_idx() const noexcept { return col_idx_; }
  const std::vector<double>& values() const noexcept { return values_; }

  std::span<const std::size_t> row_cols(std::size_t r) const {
    return {col_idx_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
  }
  std::span<const double> row_values(std::size_t r) const {
    return {values_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
  }

  /// Value at (r, c), zero when not stored.
  double at(std::size_t r, std::size_t c) const;
  bool contains(std::size_t r, std::size_t c) const;

  /// Throws Error(internal) if any canonical-form invariant is broken.
  void validate() const;

  bool same_pattern(const CsrMatrix& o) const noexcept;
  bool all_values_equal(double v) const noexcept;

  friend bool operator==(const CsrMatrix&, const CsrMatrix&) = default;

 private:
  std::size_t n_rows_ = 0;
  std::size_t n_cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> col_idx_;
  std::vector<double> values_;
};

CsrMatrix spgemm(const CsrMatrix& a, const CsrMatrix& b);
DenseMatrix spmm(const CsrMatrix& a, const DenseMatrix& x);
CsrMatrix transpose(const CsrMatrix& a);
CsrMatrix add(const CsrMatrix& a, const CsrMatrix& b);
CsrMatrix scale(const CsrMatrix& a, double factor);
CsrMatrix add_self_loops(const CsrMatrix& a);
CsrMatrix ones_pattern(const CsrMatrix& a);
CsrMatrix strip_diagonal(const CsrMatrix& a);
CsrMatrix select_cols(const CsrMatrix& a, const IndexSet& idx);
CsrMatrix select_rows_cols(const CsrMatrix& a, const IndexSet& idx);
bool is_symmetric(const CsrMatrix& a);

/// Pattern of nodes reachable through contributor chains of length <= 3:
/// ones(A + A·A + A·A·A) when `symmetric`, else ones(A + AᵀA + A² + AᵀA²).
/// The caller applies the (î, î) selection.
CsrMatrix hop_closure(const CsrMatrix& a, bool symmetric);

DenseMatrix to_dense(const CsrMatrix& a);
CsrMatrix from_dense(const DenseMatrix& x, double tol = 0.0);

/// Writes `row col value` lines in row-major order (value printed with %.17g).
void dump_triplets(std::ostream& os, const CsrMatrix& a);

}  // namespace lcpool
