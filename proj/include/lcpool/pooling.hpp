#pragma once

#include <cstddef>
#include <functional>

#include "lcpool/diff.hpp"
#include "lcpool/layers.hpp"
#include "lcpool/sparse.hpp"

namespace lcpool {

/// Fraction of nodes each graph keeps, in (0, 1].
class PoolRatio {
 public:
  explicit PoolRatio(double ratio);
  double value() const noexcept { return ratio_; }

 private:
  double ratio_;
};

/// max(1, ceil(ratio * n)). A 1e-9 slack absorbs products such as
/// 0.1 * 30 = 3.0000000000000004.
std::size_t kept_count(std::size_t n, PoolRatio ratio);

/// Output of every pooling operator: the coarsened graph (x, a), the kept
/// node ids of the input batch, the scores that gated the features and the
/// graph membership of the output nodes.
struct PoolResult {
  Tensor x;
  CsrMatrix a;
  IndexSet kept;
  Tensor scores;
  Segments seg;
};

using ScoreFn = std::function<Tensor(Tensor x, const CsrMatrix& a, const Segments& seg)>;
using FeatureFn = std::function<Tensor(Tensor x, const CsrMatrix& a)>;
/// Dense, row-stochastic N x k assignment.
using AssignmentFn = std::function<Tensor(Tensor x, const CsrMatrix& a, const Segments& seg)>;
/// Local assignment S (N x N). Treated as a constant by the tape.
using LocalAssignmentFn = std::function<CsrMatrix(const DenseMatrix& x, const CsrMatrix& a)>;

/// Keeps kept_count(n_g, ratio) highest-scoring nodes of each graph. Ties
/// go to the lower node index; the result is sorted ascending.
IndexSet topk(const DenseMatrix& h, const Segments& seg, PoolRatio ratio);

/// h = g(X, A); î = topk(h); X' = (X ⊙ h)(î, :); A' = A(î, î).
PoolResult node_selection_pool(Tensor x, const CsrMatrix& a, const Segments& seg,
                               const ScoreFn& g, PoolRatio ratio);

/// X' = SᵀX and A' = SᵀAS per graph with S = f(X, A) of width k. A' keeps
/// no diagonal and is a constant for the tape.
PoolResult dense_assignment_pool(Tensor x, const CsrMatrix& a, const Segments& seg,
                                 const AssignmentFn& f, std::size_t k_clusters);

/// pattern(S) ⊆ pattern(I + A), or equality when `strict`.
bool validate_local_assignment(const CsrMatrix& s, const CsrMatrix& a, bool strict);

/// S = f(X, A); X* = SᵀX; h = g(X*, A); î = topk(h);
/// X' = (X* ⊙ h)(î, :); A' = S(:, î)ᵀ · A · S(:, î).
PoolResult local_assignment_selection_pool(Tensor x, const CsrMatrix& a, const Segments& seg,
                                           const LocalAssignmentFn& f, const ScoreFn& g,
                                           PoolRatio ratio);

/// X* = v(X, A); h = g(X*, A); î = topk(h); X' = (X* ⊙ h)(î, :);
/// A' = hop_closure(A)(î, î). The diagonal of A' is dropped unless
/// `keep_diagonal`. Rejects weighted adjacency.
PoolResult local_cluster_selection_pool(Tensor x, const CsrMatrix& a, const Segments& seg,
                                        const FeatureFn& v, const ScoreFn& g, PoolRatio ratio,
                                        bool keep_diagonal = false);

/// Local cluster pooling: LCSMP scores, cluster function dismissed.
PoolResult lcpool(Tensor x, const CsrMatrix& a, const Segments& seg, const LcsmpParams& params,
                  PoolRatio ratio);

/// Variant whose cluster function is an extra GCN layer (`conv`).
PoolResult lcpool_star(Tensor x, const CsrMatrix& a, const Segments& seg, const Linear& conv,
                       const LcsmpParams& params, PoolRatio ratio);

}  // namespace lcpool
