#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "lcpool/dense.hpp"
#include "lcpool/diff.hpp"
#include "lcpool/sparse.hpp"

namespace lcpool::test {

// Reference implementations used as oracles; written with plain loops so
// they share nothing with the kernels under test.
inline DenseMatrix dense_of(const CsrMatrix& a) {
  DenseMatrix d(a.n_rows(), a.n_cols());
  for (std::size_t r = 0; r < a.n_rows(); ++r) {
    auto cols = a.row_cols(r);
    auto vals = a.row_values(r);
    for (std::size_t k = 0; k < cols.size(); ++k) d(r, cols[k]) = vals[k];
  }
  return d;
}

inline DenseMatrix mm(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

inline DenseMatrix tr(const DenseMatrix& a) {
  DenseMatrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

inline DenseMatrix plus(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c.data()[i] += b.data()[i];
  return c;
}

inline DenseMatrix with_identity(const DenseMatrix& a) {
  DenseMatrix c = a;
  for (std::size_t i = 0; i < c.rows(); ++i) c(i, i) += 1.0;
  return c;
}

inline bool same_nonzeros(const DenseMatrix& a, const DenseMatrix& b) {
  if (!a.same_shape(b)) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if ((a.data()[i] != 0.0) != (b.data()[i] != 0.0)) return false;
  return true;
}

inline double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

// Path graph 0-1-2-...-(n-1).
inline CsrMatrix path(std::size_t n) {
  std::vector<Triplet> t;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    t.push_back({i, i + 1, 1.0});
    t.push_back({i + 1, i, 1.0});
  }
  return CsrMatrix::from_triplets(n, n, std::move(t));
}

inline CsrMatrix cycle(std::size_t n) {
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < n; ++i) {
    t.push_back({i, (i + 1) % n, 1.0});
    t.push_back({(i + 1) % n, i, 1.0});
  }
  return CsrMatrix::from_triplets(n, n, std::move(t));
}

// Largest element-wise relative error between tape gradients and central
// differences over every entry of `ps`. Entries whose difference quotient is
// at most 1e-8 in magnitude contribute their absolute analytic value instead.
inline double fd_error(ParameterSet& ps, const std::function<Tensor(Tape&)>& loss,
                       double eps = 1e-5) {
  ps.zero_grad();
  {
    Tape tape;
    tape.backward(loss(tape));
  }
  auto eval = [&] {
    Tape tape;
    return loss(tape).value()(0, 0);
  };
  double worst = 0.0;
  for (std::size_t p = 0; p < ps.size(); ++p) {
    for (std::size_t e = 0; e < ps[p].value.size(); ++e) {
      double& v = ps[p].value.data()[e];
      const double saved = v;
      v = saved + eps;
      const double up = eval();
      v = saved - eps;
      const double down = eval();
      v = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double analytic = ps[p].grad.data()[e];
      const double err = std::abs(numeric) > 1e-8
                             ? std::abs(analytic - numeric) /
                                   std::max(std::abs(analytic), std::abs(numeric))
                             : std::abs(analytic);
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace lcpool::test
