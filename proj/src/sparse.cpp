#include "lcpool/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>

#include "lcpool/errors.hpp"

namespace lcpool {

namespace {

constexpr std::size_t kUnset = std::numeric_limits<std::size_t>::max();

// Row accumulator for Gustavson-style products and sums. Tracks touched
// columns so resetting costs O(touched) instead of O(n_cols).
class RowAccumulator {
 public:
  explicit RowAccumulator(std::size_t n_cols) : slot_(n_cols, kUnset) {}

  void add(std::size_t col, double v) {
    if (slot_[col] == kUnset) {
      slot_[col] = cols_.size();
      cols_.push_back(col);
      vals_.push_back(v);
    } else {
      vals_[slot_[col]] += v;
    }
  }

  // Appends the sorted nonzero entries to the output arrays and resets.
  void flush(std::vector<std::size_t>& col_idx, std::vector<double>& values) {
    std::sort(cols_.begin(), cols_.end());
    for (std::size_t c : cols_) {
      const double v = vals_[slot_[c]];
      if (v != 0.0) {
        col_idx.push_back(c);
        values.push_back(v);
      }
    }
    for (std::size_t c : cols_) slot_[c] = kUnset;
    cols_.clear();
    vals_.clear();
  }

 private:
  std::vector<std::size_t> slot_;
  std::vector<std::size_t> cols_;
  std::vector<double> vals_;
};

std::string shape_str(const CsrMatrix& m) {
  return std::to_string(m.n_rows()) + "x" + std::to_string(m.n_cols());
}

}  // namespace

// ---------------------------------------------------------------------------
// IndexSet

IndexSet::IndexSet(std::vector<std::size_t> indices) : idx_(std::move(indices)) {
  for (std::size_t i = 1; i < idx_.size(); ++i)
    require(idx_[i - 1] < idx_[i], ErrorCode::invalid_argument,
            "IndexSet: indices must be strictly increasing");
}

IndexSet IndexSet::range(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return IndexSet(std::move(v));
}

// ---------------------------------------------------------------------------
// CsrMatrix

CsrMatrix::CsrMatrix(std::size_t n_rows, std::size_t n_cols)
    : n_rows_(n_rows), n_cols_(n_cols), row_ptr_(n_rows + 1, 0) {}

CsrMatrix CsrMatrix::from_triplets(std::size_t n_rows, std::size_t n_cols,
                                   std::vector<Triplet> triplets) {
  for (const auto& t : triplets) {
    require(t.row < n_rows && t.col < n_cols, ErrorCode::invalid_argument,
            "CsrMatrix: triplet (" + std::to_string(t.row) + "," + std::to_string(t.col) +
                ") outside " + std::to_string(n_rows) + "x" + std::to_string(n_cols));
    require(std::isfinite(t.value), ErrorCode::numeric, "CsrMatrix: non-finite value");
  }
  std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& x, const Triplet& y) {
    return x.row != y.row ? x.row < y.row : x.col < y.col;
  });

  CsrMatrix m(n_rows, n_cols);
  m.col_idx_.reserve(triplets.size());
  m.values_.reserve(triplets.size());
  std::size_t i = 0;
  for (std::size_t r = 0; r < n_rows; ++r) {
    while (i < triplets.size() && triplets[i].row == r) {
      const std::size_t c = triplets[i].col;
      double v = 0.0;
      while (i < triplets.size() && triplets[i].row == r && triplets[i].col == c)
        v += triplets[i++].value;
      if (v != 0.0) {
        m.col_idx_.push_back(c);
        m.values_.push_back(v);
      }
    }
    m.row_ptr_[r + 1] = m.col_idx_.size();
  }
  return m;
}

CsrMatrix CsrMatrix::from_raw(std::size_t n_rows, std::size_t n_cols,
                              std::vector<std::size_t> row_ptr,
                              std::vector<std::size_t> col_idx, std::vector<double> values) {
  CsrMatrix m;
  m.n_rows_ = n_rows;
  m.n_cols_ = n_cols;
  m.row_ptr_ = std::move(row_ptr);
  m.col_idx_ = std::move(col_idx);
  m.values_ = std::move(values);
  try {
    m.validate();
  } catch (const Error& e) {
    fail(ErrorCode::invalid_argument, e.what());
  }
  return m;
}

CsrMatrix CsrMatrix::identity(std::size_t n) {
  CsrMatrix m(n, n);
  m.col_idx_.resize(n);
  m.values_.assign(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    m.col_idx_[i] = i;
    m.row_ptr_[i + 1] = i + 1;
  }
  return m;
}

double CsrMatrix::at(std::size_t r, std::size_t c) const {
  auto cols = row_cols(r);
  auto it = std::lower_bound(cols.begin(), cols.end(), c);
  if (it == cols.end() || *it != c) return 0.0;
  return values_[row_ptr_[r] + static_cast<std::size_t>(it - cols.begin())];
}

bool CsrMatrix::contains(std::size_t r, std::size_t c) const {
  auto cols = row_cols(r);
  return std::binary_search(cols.begin(), cols.end(), c);
}

void CsrMatrix::validate() const {
  auto bad = [](const std::string& msg) { fail(ErrorCode::internal, "CsrMatrix: " + msg); };
  if (row_ptr_.size() != n_rows_ + 1) bad("row_ptr length != n_rows + 1");
  if (row_ptr_.front() != 0) bad("row_ptr[0] != 0");
  if (row_ptr_.back() != col_idx_.size() || col_idx_.size() != values_.size())
    bad("row_ptr[n_rows], col_idx and values disagree on nnz");
  for (std::size_t r = 0; r < n_rows_; ++r) {
    if (row_ptr_[r] > row_ptr_[r + 1]) bad("row_ptr decreasing at row " + std::to_string(r));
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      if (col_idx_[k] >= n_cols_) bad("column index out of range");
      if (k > row_ptr_[r] && col_idx_[k - 1] >= col_idx_[k])
        bad("columns not strictly increasing in row " + std::to_string(r));
      if (!std::isfinite(values_[k])) bad("non-finite value");
      if (values_[k] == 0.0) bad("explicit zero stored");
    }
  }
}

bool CsrMatrix::same_pattern(const CsrMatrix& o) const noexcept {
  return n_rows_ == o.n_rows_ && n_cols_ == o.n_cols_ && row_ptr_ == o.row_ptr_ &&
         col_idx_ == o.col_idx_;
}

bool CsrMatrix::all_values_equal(double v) const noexcept {
  return std::all_of(values_.begin(), values_.end(), [v](double x) { return x == v; });
}

// ---------------------------------------------------------------------------
// Operations

CsrMatrix spgemm(const CsrMatrix& a, const CsrMatrix& b) {
  require(a.n_cols() == b.n_rows(), ErrorCode::shape_mismatch,
          "spgemm: " + shape_str(a) + " * " + shape_str(b));
  std::vector<std::size_t> row_ptr(a.n_rows() + 1, 0);
  std::vector<std::size_t> col_idx;
  std::vector<double> values;
  RowAccumulator acc(b.n_cols());
  for (std::size_t i = 0; i < a.n_rows(); ++i) {
    auto a_cols = a.row_cols(i);
    auto a_vals = a.row_values(i);
    for (std::size_t p = 0; p < a_cols.size(); ++p) {
      const std::size_t k = a_cols[p];
      auto b_cols = b.row_cols(k);
      auto b_vals = b.row_values(k);
      for (std::size_t q = 0; q < b_cols.size(); ++q) acc.add(b_cols[q], a_vals[p] * b_vals[q]);
    }
    acc.flush(col_idx, values);
    row_ptr[i + 1] = col_idx.size();
  }
  return CsrMatrix::from_raw(a.n_rows(), b.n_cols(), std::move(row_ptr), std::move(col_idx),
                             std::move(values));
}

DenseMatrix spmm(const CsrMatrix& a, const DenseMatrix& x) {
  require(a.n_cols() == x.rows(), ErrorCode::shape_mismatch,
          "spmm: " + shape_str(a) + " * " + std::to_string(x.rows()) + "x" +
              std::to_string(x.cols()));
  DenseMatrix out(a.n_rows(), x.cols());
  const std::size_t d = x.cols();
  for (std::size_t i = 0; i < a.n_rows(); ++i) {
    auto cols = a.row_cols(i);
    auto vals = a.row_values(i);
    double* o = out.data().data() + i * d;
    for (std::size_t p = 0; p < cols.size(); ++p) {
      const double* xr = x.data().data() + cols[p] * d;
      const double s = vals[p];
      for (std::size_t j = 0; j < d; ++j) o[j] += s * xr[j];
    }
  }
  return out;
}

CsrMatrix transpose(const CsrMatrix& a) {
  std::vector<std::size_t> row_ptr(a.n_cols() + 1, 0);
  for (std::size_t c : a.col_idx()) ++row_ptr[c + 1];
  for (std::size_t c = 0; c < a.n_cols(); ++c) row_ptr[c + 1] += row_ptr[c];
  std::vector<std::size_t> col_idx(a.nnz());
  std::vector<double> values(a.nnz());
  std::vector<std::size_t> next(row_ptr.begin(), row_ptr.end() - 1);
  // Rows are visited in increasing order, so each output row is filled sorted.
  for (std::size_t r = 0; r < a.n_rows(); ++r) {
    auto cols = a.row_cols(r);
    auto vals = a.row_values(r);
    for (std::size_t p = 0; p < cols.size(); ++p) {
      const std::size_t dst = next[cols[p]]++;
      col_idx[dst] = r;
      values[dst] = vals[p];
    }
  }
  return CsrMatrix::from_raw(a.n_cols(), a.n_rows(), std::move(row_ptr), std::move(col_idx),
                             std::move(values));
}

CsrMatrix add(const CsrMatrix& a, const CsrMatrix& b) {
  require(a.n_rows() == b.n_rows() && a.n_cols() == b.n_cols(), ErrorCode::shape_mismatch,
          "add: " + shape_str(a) + " + " + shape_str(b));
  std::vector<std::size_t> row_ptr(a.n_rows() + 1, 0);
  std::vector<std::size_t> col_idx;
  std::vector<double> values;
  col_idx.reserve(a.nnz() + b.nnz());
  values.reserve(a.nnz() + b.nnz());
  for (std::size_t r = 0; r < a.n_rows(); ++r) {
    auto ac = a.row_cols(r);
    auto av = a.row_values(r);
    auto bc = b.row_cols(r);
    auto bv = b.row_values(r);
    std::size_t p = 0, q = 0;
    auto emit = [&](std::size_t c, double v) {
      if (v != 0.0) {
        col_idx.push_back(c);
        values.push_back(v);
      }
    };
    while (p < ac.size() || q < bc.size()) {
      if (q == bc.size() || (p < ac.size() && ac[p] < bc[q])) {
        emit(ac[p], av[p]);
        ++p;
      } else if (p == ac.size() || bc[q] < ac[p]) {
        emit(bc[q], bv[q]);
        ++q;
      } else {
        emit(ac[p], av[p] + bv[q]);
        ++p;
        ++q;
      }
    }
    row_ptr[r + 1] = col_idx.size();
  }
  return CsrMatrix::from_raw(a.n_rows(), a.n_cols(), std::move(row_ptr), std::move(col_idx),
                             std::move(values));
}

CsrMatrix scale(const CsrMatrix& a, double factor) {
  if (factor == 0.0) return CsrMatrix(a.n_rows(), a.n_cols());
  std::vector<double> values(a.values());
  for (double& v : values) v *= factor;
  return CsrMatrix::from_raw(a.n_rows(), a.n_cols(), a.row_ptr(), a.col_idx(),
                             std::move(values));
}

CsrMatrix add_self_loops(const CsrMatrix& a) {
  require(a.is_square(), ErrorCode::shape_mismatch, "add_self_loops: non-square " + shape_str(a));
  return add(a, CsrMatrix::identity(a.n_rows()));
}

CsrMatrix ones_pattern(const CsrMatrix& a) {
  return CsrMatrix::from_raw(a.n_rows(), a.n_cols(), a.row_ptr(), a.col_idx(),
                             std::vector<double>(a.nnz(), 1.0));
}

CsrMatrix strip_diagonal(const CsrMatrix& a) {
  std::vector<std::size_t> row_ptr(a.n_rows() + 1, 0);
  std::vector<std::size_t> col_idx;
  std::vector<double> values;
  for (std::size_t r = 0; r < a.n_rows(); ++r) {
    auto cols = a.row_cols(r);
    auto vals = a.row_values(r);
    for (std::size_t p = 0; p < cols.size(); ++p) {
      if (cols[p] == r) continue;
      col_idx.push_back(cols[p]);
      values.push_back(vals[p]);
    }
    row_ptr[r + 1] = col_idx.size();
  }
  return CsrMatrix::from_raw(a.n_rows(), a.n_cols(), std::move(row_ptr), std::move(col_idx),
                             std::move(values));
}

CsrMatrix select_cols(const CsrMatrix& a, const IndexSet& idx) {
  std::vector<std::size_t> new_id(a.n_cols(), kUnset);
  for (std::size_t p = 0; p < idx.size(); ++p) {
    require(idx[p] < a.n_cols(), ErrorCode::invalid_argument,
            "select_cols: index " + std::to_string(idx[p]) + " >= " + std::to_string(a.n_cols()));
    new_id[idx[p]] = p;
  }
  std::vector<std::size_t> row_ptr(a.n_rows() + 1, 0);
  std::vector<std::size_t> col_idx;
  std::vector<double> values;
  // idx is increasing, so renumbering preserves column order within a row.
  for (std::size_t r = 0; r < a.n_rows(); ++r) {
    auto cols = a.row_cols(r);
    auto vals = a.row_values(r);
    for (std::size_t p = 0; p < cols.size(); ++p) {
      if (new_id[cols[p]] == kUnset) continue;
      col_idx.push_back(new_id[cols[p]]);
      values.push_back(vals[p]);
    }
    row_ptr[r + 1] = col_idx.size();
  }
  return CsrMatrix::from_raw(a.n_rows(), idx.size(), std::move(row_ptr), std::move(col_idx),
                             std::move(values));
}

CsrMatrix select_rows_cols(const CsrMatrix& a, const IndexSet& idx) {
  require(a.is_square(), ErrorCode::shape_mismatch,
          "select_rows_cols: non-square " + shape_str(a));
  std::vector<std::size_t> new_id(a.n_cols(), kUnset);
  for (std::size_t p = 0; p < idx.size(); ++p) {
    require(idx[p] < a.n_rows(), ErrorCode::invalid_argument,
            "select_rows_cols: index " + std::to_string(idx[p]) + " >= " +
                std::to_string(a.n_rows()));
    new_id[idx[p]] = p;
  }
  std::vector<std::size_t> row_ptr(idx.size() + 1, 0);
  std::vector<std::size_t> col_idx;
  std::vector<double> values;
  for (std::size_t p = 0; p < idx.size(); ++p) {
    auto cols = a.row_cols(idx[p]);
    auto vals = a.row_values(idx[p]);
    for (std::size_t q = 0; q < cols.size(); ++q) {
      if (new_id[cols[q]] == kUnset) continue;
      col_idx.push_back(new_id[cols[q]]);
      values.push_back(vals[q]);
    }
    row_ptr[p + 1] = col_idx.size();
  }
  return CsrMatrix::from_raw(idx.size(), idx.size(), std::move(row_ptr), std::move(col_idx),
                             std::move(values));
}

bool is_symmetric(const CsrMatrix& a) {
  if (!a.is_square()) return false;
  return transpose(a) == a;
}

CsrMatrix hop_closure(const CsrMatrix& a, bool symmetric) {
  require(a.is_square(), ErrorCode::shape_mismatch, "hop_closure: non-square " + shape_str(a));
  if (symmetric) {
    require(is_symmetric(a), ErrorCode::precondition,
            "hop_closure: symmetric variant requested for an asymmetric matrix");
    const CsrMatrix a2 = spgemm(a, a);
    const CsrMatrix a3 = spgemm(a2, a);
    return ones_pattern(add(add(a, a2), a3));
  }
  const CsrMatrix at = transpose(a);
  const CsrMatrix ata = spgemm(at, a);
  const CsrMatrix a2 = spgemm(a, a);
  const CsrMatrix ata2 = spgemm(ata, a);
  return ones_pattern(add(add(a, ata), add(a2, ata2)));
}

DenseMatrix to_dense(const CsrMatrix& a) {
  DenseMatrix out(a.n_rows(), a.n_cols());
  for (std::size_t r = 0; r < a.n_rows(); ++r) {
    auto cols = a.row_cols(r);
    auto vals = a.row_values(r);
    for (std::size_t p = 0; p < cols.size(); ++p) out(r, cols[p]) = vals[p];
  }
  return out;
}

CsrMatrix from_dense(const DenseMatrix& x, double tol) {
  require(tol >= 0.0, ErrorCode::invalid_argument, "from_dense: negative tolerance");
  std::vector<std::size_t> row_ptr(x.rows() + 1, 0);
  std::vector<std::size_t> col_idx;
  std::vector<double> values;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) {
      const double v = x(r, c);
      require(std::isfinite(v), ErrorCode::numeric, "from_dense: non-finite value");
      if (std::abs(v) <= tol) continue;
      col_idx.push_back(c);
      values.push_back(v);
    }
    row_ptr[r + 1] = col_idx.size();
  }
  return CsrMatrix::from_raw(x.rows(), x.cols(), std::move(row_ptr), std::move(col_idx),
                             std::move(values));
}

void dump_triplets(std::ostream& os, const CsrMatrix& a) {
  char buf[64];
  for (std::size_t r = 0; r < a.n_rows(); ++r) {
    auto cols = a.row_cols(r);
    auto vals = a.row_values(r);
    for (std::size_t p = 0; p < cols.size(); ++p) {
      std::snprintf(buf, sizeof buf, "%.17g", vals[p]);
      os << r << ' ' << cols[p] << ' ' << buf << '\n';
    }
  }
}

}  // namespace lcpool
