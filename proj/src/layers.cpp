#include "lcpool/layers.hpp"

#include <cmath>

#include "lcpool/errors.hpp"

namespace lcpool {

Linear Linear::create(ParameterSet& ps, const std::string& name, std::size_t in,
                      std::size_t out, Rng& rng, bool with_bias) {
  require(in > 0 && out > 0, ErrorCode::invalid_argument, "Linear: widths must be positive");
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  DenseMatrix w(out, in);
  for (double& v : w.data()) v = dist(rng);
  Linear l;
  l.weight = &ps.create(name + ".weight", std::move(w));
  if (with_bias) l.bias = &ps.create(name + ".bias", DenseMatrix(1, out));
  return l;
}

Tensor Linear::operator()(Tape& tape, Tensor x) const {
  Tensor y = matmul_nt(x, tape.param(*weight));
  return bias ? add_row(y, tape.param(*bias)) : y;
}

Mlp Mlp::create(ParameterSet& ps, const std::string& name, std::size_t in,
                const std::vector<std::size_t>& widths, Rng& rng) {
  require(!widths.empty(), ErrorCode::invalid_argument, "Mlp: needs at least one layer");
  Mlp m;
  std::size_t prev = in;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    m.layers.push_back(Linear::create(ps, name + "." + std::to_string(i), prev, widths[i], rng));
    prev = widths[i];
  }
  return m;
}

Tensor Mlp::operator()(Tape& tape, Tensor x) const {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    x = layers[i](tape, x);
    if (i + 1 < layers.size()) x = relu(x);
  }
  return x;
}

CsrMatrix gcn_operator(const CsrMatrix& a) {
  const CsrMatrix ahat = add_self_loops(a);
  std::vector<double> inv_sqrt(ahat.n_rows());
  for (std::size_t r = 0; r < ahat.n_rows(); ++r) {
    double deg = 0.0;
    for (double v : ahat.row_values(r)) deg += v;
    require(deg > 0.0, ErrorCode::numeric, "gcn_operator: non-positive degree");
    inv_sqrt[r] = 1.0 / std::sqrt(deg);
  }
  std::vector<double> values(ahat.values());
  for (std::size_t r = 0; r < ahat.n_rows(); ++r)
    for (std::size_t k = ahat.row_ptr()[r]; k < ahat.row_ptr()[r + 1]; ++k)
      values[k] *= inv_sqrt[r] * inv_sqrt[ahat.col_idx()[k]];
  return CsrMatrix::from_raw(ahat.n_rows(), ahat.n_cols(), ahat.row_ptr(), ahat.col_idx(),
                             std::move(values));
}

Tensor gcn_conv_normalized(Tensor x, const CsrMatrix& norm, Tensor w) {
  // Propagate over the narrower side of the weight.
  if (w.rows() < w.cols()) return spmm_const(norm, matmul_nt(x, w));
  return matmul_nt(spmm_const(norm, x), w);
}

Tensor gcn_conv(Tensor x, const CsrMatrix& a, Tensor w) {
  return gcn_conv_normalized(x, gcn_operator(a), w);
}

Tensor graph_conv(Tensor x, const CsrMatrix& a, Tensor w1, Tensor w2) {
  return add(matmul_nt(x, w1), matmul_nt(spmm_const(a, x), w2));
}

CsrMatrix laplacian(const CsrMatrix& a) {
  require(a.is_square(), ErrorCode::shape_mismatch, "laplacian: non-square adjacency");
  std::vector<Triplet> t;
  for (std::size_t r = 0; r < a.n_rows(); ++r) {
    double deg = 0.0;
    auto cols = a.row_cols(r);
    auto vals = a.row_values(r);
    for (std::size_t p = 0; p < cols.size(); ++p) {
      deg += vals[p];
      t.push_back({r, cols[p], -vals[p]});
    }
    t.push_back({r, r, deg});
  }
  return CsrMatrix::from_triplets(a.n_rows(), a.n_cols(), std::move(t));
}

namespace {

// One row per stored entry (i, k) of `a`: +1 at column i, -1 at column k, so
// that diff · X stacks the differences x_i - x_k. `gather` sums edge rows back
// into their source node i.
struct EdgeOperators {
  CsrMatrix diff;
  CsrMatrix gather;
};

EdgeOperators edge_operators(const CsrMatrix& a) {
  const std::size_t n = a.n_rows(), e = a.nnz();
  std::vector<Triplet> d, g;
  d.reserve(2 * e);
  g.reserve(e);
  std::size_t edge = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k : a.row_cols(i)) {
      d.push_back({edge, i, 1.0});
      d.push_back({edge, k, -1.0});
      g.push_back({i, edge, 1.0});
      ++edge;
    }
  }
  return {CsrMatrix::from_triplets(e, n, std::move(d)), CsrMatrix::from_triplets(n, e, std::move(g))};
}

}  // namespace

Tensor laplacian_score(Tensor x, const CsrMatrix& a, Tensor w) {
  require(w.rows() == 1 && w.cols() == x.cols(), ErrorCode::shape_mismatch,
          "laplacian_score: w must be 1 x feature_dim");
  require(a.is_square() && a.n_rows() == x.rows(), ErrorCode::shape_mismatch,
          "laplacian_score: adjacency does not match the feature rows");
  require(a.all_values_equal(1.0), ErrorCode::precondition,
          "laplacian_score: adjacency must be unweighted");
  // Σ_k (x_i - x_k) rather than D·X - A·X, so constant features give exact zeros.
  const EdgeOperators ops = edge_operators(a);
  return matmul_nt(spmm_const(ops.gather, spmm_const(ops.diff, x)), w);
}

LcsmpParams LcsmpParams::create(ParameterSet& ps, const std::string& name, std::size_t in,
                                std::size_t hidden, Rng& rng) {
  LcsmpParams p;
  p.diff = Linear::create(ps, name + ".diff", in, hidden, rng);
  p.agg = Linear::create(ps, name + ".agg", hidden, hidden, rng);
  p.self = Linear::create(ps, name + ".self", in, hidden, rng);
  p.score = Linear::create(ps, name + ".score", hidden, 1, rng);
  return p;
}


Tensor lcsmp_logits(Tensor x, const CsrMatrix& a, const LcsmpParams& p) {
  require(a.is_square() && a.n_rows() == x.rows(), ErrorCode::shape_mismatch,
          "lcsmp: adjacency does not match the feature rows");
  Tape& tape = x.tape();
  const EdgeOperators ops = edge_operators(a);
  // L_d(x_i - x_k) = (x_i - x_k)·Wᵀ + b: project first, then difference.
  Tensor projected = matmul_nt(x, tape.param(*p.diff.weight));
  Tensor messages = relu(add_row(spmm_const(ops.diff, projected), tape.param(*p.diff.bias)));
  Tensor aggregated = spmm_const(ops.gather, messages);
  Tensor hidden = add(relu(p.agg(tape, aggregated)), relu(p.self(tape, x)));
  return p.score(tape, hidden);
}

Tensor lcsmp(Tensor x, const CsrMatrix& a, const LcsmpParams& p, const Segments& seg) {
  return segment_softmax(lcsmp_logits(x, a, p), seg);
}

Tensor readout(Tensor x, const Segments& seg) {
  return concat_cols(segment_mean(x, seg), segment_max(x, seg));
}

}  // namespace lcpool
