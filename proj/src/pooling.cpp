#include "lcpool/pooling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lcpool/errors.hpp"

namespace lcpool {

PoolRatio::PoolRatio(double ratio) : ratio_(ratio) {
  require(ratio > 0.0 && ratio <= 1.0, ErrorCode::invalid_argument,
          "PoolRatio: ratio must lie in (0, 1], got " + std::to_string(ratio));
}

std::size_t kept_count(std::size_t n, PoolRatio ratio) {
  const double k = std::ceil(ratio.value() * static_cast<double>(n) - 1e-9);
  return std::max<std::size_t>(1, static_cast<std::size_t>(k));
}

IndexSet topk(const DenseMatrix& h, const Segments& seg, PoolRatio ratio) {
  require(h.cols() == 1 && h.rows() == seg.size(), ErrorCode::shape_mismatch,
          "topk: expects one score per node");
  std::vector<std::size_t> kept;
  std::size_t lo = 0;
  while (lo < seg.size()) {
    std::size_t hi = lo;
    while (hi < seg.size() && seg.id[hi] == seg.id[lo]) ++hi;
    std::vector<std::size_t> order(hi - lo);
    std::iota(order.begin(), order.end(), lo);
    const std::size_t k = kept_count(hi - lo, ratio);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t i, std::size_t j) {
                        return h(i, 0) != h(j, 0) ? h(i, 0) > h(j, 0) : i < j;
                      });
    kept.insert(kept.end(), order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    lo = hi;
  }
  std::sort(kept.begin(), kept.end());
  return IndexSet(std::move(kept));
}

namespace {

Segments kept_segments(const Segments& seg, const IndexSet& kept) {
  std::vector<std::size_t> ids;
  ids.reserve(kept.size());
  for (std::size_t i : kept) ids.push_back(seg.id[i]);
  return Segments(std::move(ids), seg.count);
}

void require_square_match(const Tensor& x, const CsrMatrix& a, const Segments& seg,
                          const char* op) {
  require(a.is_square() && a.n_rows() == x.rows() && seg.size() == x.rows(),
          ErrorCode::shape_mismatch,
          std::string(op) + ": features, adjacency and segments disagree on node count");
}

// Gates features with the scores and keeps the selected rows.
PoolResult select(Tensor features, Tensor h, CsrMatrix a_pooled, IndexSet kept,
                  const Segments& seg) {
  require(h.cols() == 1 && h.rows() == features.rows(), ErrorCode::shape_mismatch,
          "score function must return one score per node");
  PoolResult r;
  r.x = gather_rows(broadcast_col(features, h), kept);
  r.a = std::move(a_pooled);
  r.seg = kept_segments(seg, kept);
  r.kept = std::move(kept);
  r.scores = h;
  return r;
}

}  // namespace

PoolResult node_selection_pool(Tensor x, const CsrMatrix& a, const Segments& seg,
                               const ScoreFn& g, PoolRatio ratio) {
  require_square_match(x, a, seg, "node_selection_pool");
  Tensor h = g(x, a, seg);
  IndexSet kept = topk(h.value(), seg, ratio);
  CsrMatrix a_pooled = select_rows_cols(a, kept);
  return select(x, h, std::move(a_pooled), std::move(kept), seg);
}

PoolResult dense_assignment_pool(Tensor x, const CsrMatrix& a, const Segments& seg,
                                 const AssignmentFn& f, std::size_t k_clusters) {
  require(k_clusters >= 1, ErrorCode::invalid_argument,
          "dense_assignment_pool: k_clusters must be >= 1");
  require_square_match(x, a, seg, "dense_assignment_pool");
  Tensor s = f(x, a, seg);
  require(s.rows() == x.rows() && s.cols() == k_clusters, ErrorCode::shape_mismatch,
          "dense_assignment_pool: assignment must be N x k_clusters");

  const DenseMatrix& sv = s.value();
  const DenseMatrix as = spmm(a, sv);  // A·S, block structure preserved
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < sv.rows(); ++i) {
    const std::size_t base = seg.id[i] * k_clusters;
    for (std::size_t p = 0; p < k_clusters; ++p)
      for (std::size_t q = 0; q < k_clusters; ++q)
        if (p != q) t.push_back({base + p, base + q, sv(i, p) * as(i, q)});
  }
  const std::size_t n_out = seg.count * k_clusters;

  PoolResult r;
  r.x = segment_assign(s, x, seg);
  r.a = CsrMatrix::from_triplets(n_out, n_out, std::move(t));
  r.kept = IndexSet::range(n_out);
  r.scores = s;
  std::vector<std::size_t> ids(n_out);
  for (std::size_t i = 0; i < n_out; ++i) ids[i] = i / k_clusters;
  r.seg = Segments(std::move(ids), seg.count);
  return r;
}

bool validate_local_assignment(const CsrMatrix& s, const CsrMatrix& a, bool strict) {
  require(s.is_square() && a.is_square() && s.n_rows() == a.n_rows(), ErrorCode::shape_mismatch,
          "validate_local_assignment: s and a must be square and of equal size");
  const CsrMatrix a_star = add_self_loops(ones_pattern(a));
  if (strict) return s.same_pattern(a_star);
  for (std::size_t r = 0; r < s.n_rows(); ++r)
    for (std::size_t c : s.row_cols(r))
      if (!a_star.contains(r, c)) return false;
  return true;
}

PoolResult local_assignment_selection_pool(Tensor x, const CsrMatrix& a, const Segments& seg,
                                           const LocalAssignmentFn& f, const ScoreFn& g,
                                           PoolRatio ratio) {
  require_square_match(x, a, seg, "local_assignment_selection_pool");
  const CsrMatrix s = f(x.value(), a);
  require(s.is_square() && s.n_rows() == a.n_rows(), ErrorCode::shape_mismatch,
          "local_assignment_selection_pool: S must be N x N");
  if (!validate_local_assignment(s, a, false)) {
    const CsrMatrix a_star = add_self_loops(ones_pattern(a));
    for (std::size_t r = 0; r < s.n_rows(); ++r)
      for (std::size_t c : s.row_cols(r))
        if (!a_star.contains(r, c))
          fail(ErrorCode::precondition,
               "local_assignment_selection_pool: S(" + std::to_string(r) + "," +
                   std::to_string(c) + ") is nonzero but (I+A)(" + std::to_string(r) + "," +
                   std::to_string(c) + ") is zero");
  }
  Tensor x_star = spmm_const(transpose(s), x);
  Tensor h = g(x_star, a, seg);
  IndexSet kept = topk(h.value(), seg, ratio);
  const CsrMatrix s_kept = select_cols(s, kept);
  CsrMatrix a_pooled = spgemm(transpose(s_kept), spgemm(a, s_kept));
  return select(x_star, h, std::move(a_pooled), std::move(kept), seg);
}

PoolResult local_cluster_selection_pool(Tensor x, const CsrMatrix& a, const Segments& seg,
                                        const FeatureFn& v, const ScoreFn& g, PoolRatio ratio,
                                        bool keep_diagonal) {
  require_square_match(x, a, seg, "local_cluster_selection_pool");
  require(a.all_values_equal(1.0), ErrorCode::precondition,
          "local_cluster_selection_pool: adjacency must be unweighted");
  Tensor x_star = v(x, a);
  require(x_star.rows() == x.rows(), ErrorCode::shape_mismatch,
          "local_cluster_selection_pool: cluster function changed the node count");
  Tensor h = g(x_star, a, seg);
  IndexSet kept = topk(h.value(), seg, ratio);
  CsrMatrix a_pooled = select_rows_cols(hop_closure(a, is_symmetric(a)), kept);
  if (!keep_diagonal) a_pooled = strip_diagonal(a_pooled);
  return select(x_star, h, std::move(a_pooled), std::move(kept), seg);
}

namespace {

ScoreFn lcsmp_score(const LcsmpParams& params) {
  return [&params](Tensor x, const CsrMatrix& a, const Segments& seg) {
    return lcsmp(x, a, params, seg);
  };
}

void require_undirected(const CsrMatrix& a, const char* op) {
  require(is_symmetric(a), ErrorCode::precondition,
          std::string(op) + ": adjacency must be symmetric (undirected graph)");
}

}  // namespace

PoolResult lcpool(Tensor x, const CsrMatrix& a, const Segments& seg, const LcsmpParams& params,
                  PoolRatio ratio) {
  require_undirected(a, "lcpool");
  return local_cluster_selection_pool(
      x, a, seg, [](Tensor t, const CsrMatrix&) { return t; }, lcsmp_score(params), ratio);
}

PoolResult lcpool_star(Tensor x, const CsrMatrix& a, const Segments& seg, const Linear& conv,
                       const LcsmpParams& params, PoolRatio ratio) {
  require_undirected(a, "lcpool_star");
  auto v = [&conv](Tensor t, const CsrMatrix& adj) {
    Tape& tape = t.tape();
    Tensor y = gcn_conv(t, adj, tape.param(*conv.weight));
    return conv.bias ? add_row(y, tape.param(*conv.bias)) : y;
  };
  return local_cluster_selection_pool(x, a, seg, v, lcsmp_score(params), ratio);
}

}  // namespace lcpool
