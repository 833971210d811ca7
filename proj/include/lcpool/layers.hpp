#pragma once

#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "lcpool/diff.hpp"
#include "lcpool/sparse.hpp"

namespace lcpool {

using Rng = std::mt19937_64;

/// Affine map x·Wᵀ + b with W of shape out x in. Weights are drawn uniformly
/// from ±1/sqrt(in); the bias starts at zero.
struct Linear {
  Parameter* weight = nullptr;
  Parameter* bias = nullptr;  // optional

  static Linear create(ParameterSet& ps, const std::string& name, std::size_t in,
                       std::size_t out, Rng& rng, bool with_bias = true);

  std::size_t in_dim() const { return weight->value.cols(); }
  std::size_t out_dim() const { return weight->value.rows(); }
  Tensor operator()(Tape& tape, Tensor x) const;
};

/// Linear layers with ReLU between them and nothing after the last one.
struct Mlp {
  std::vector<Linear> layers;

  static Mlp create(ParameterSet& ps, const std::string& name, std::size_t in,
                    const std::vector<std::size_t>& widths, Rng& rng);
  std::size_t out_dim() const { return layers.back().out_dim(); }
  Tensor operator()(Tape& tape, Tensor x) const;
};

/// Symmetric normalisation D̂^-1/2 (A + I) D̂^-1/2, D̂ the row sums of A + I.
CsrMatrix gcn_operator(const CsrMatrix& a);

/// GCN propagation: D̂^-1/2 (A + I) D̂^-1/2 · X · Wᵀ.
Tensor gcn_conv(Tensor x, const CsrMatrix& a, Tensor w);
/// Same, with the normalised operator computed once by the caller.
Tensor gcn_conv_normalized(Tensor x, const CsrMatrix& norm, Tensor w);

/// GraphConv propagation: x_i·W1ᵀ + (Σ_{j∈N(i)} x_j)·W2ᵀ.
Tensor graph_conv(Tensor x, const CsrMatrix& a, Tensor w1, Tensor w2);

/// Graph Laplacian L = D - A of an adjacency matrix.
CsrMatrix laplacian(const CsrMatrix& a);

/// (L·X)·w̃ᵀ: per-node score from the plain sum of neighbour differences.
/// Kept to show that opposite differences cancel; LCSMP fixes this.
Tensor laplacian_score(Tensor x, const CsrMatrix& a, Tensor w);

/// The four linear maps of the local cluster score layer.
struct LcsmpParams {
  Linear diff;   // L_d: d -> d_h, applied to x_i - x_k
  Linear agg;    // L_fd: d_h -> d_h, applied to the aggregated differences
  Linear self;   // L_x: d -> d_h
  Linear score;  // L_s: d_h -> 1

  static LcsmpParams create(ParameterSet& ps, const std::string& name, std::size_t in,
                            std::size_t hidden, Rng& rng);
};

/// Pre-softmax LCSMP scores
///   L_s( relu(L_fd(Σ_{k∈N(i)} relu(L_d(x_i - x_k)))) + relu(L_x(x_i)) ),
/// computed as message passing over the stored entries of `a`.
Tensor lcsmp_logits(Tensor x, const CsrMatrix& a, const LcsmpParams& p);

/// LCSMP scores normalised with a softmax over the nodes of each graph.
Tensor lcsmp(Tensor x, const CsrMatrix& a, const LcsmpParams& p, const Segments& seg);

/// concat(global_mean(X), global_max(X)) per graph.
Tensor readout(Tensor x, const Segments& seg);

}  // namespace lcpool
