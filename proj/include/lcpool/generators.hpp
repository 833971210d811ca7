#pragma once

#include <cstddef>
#include <vector>

#include "lcpool/dataset.hpp"
#include "lcpool/dense.hpp"
#include "lcpool/layers.hpp"
#include "lcpool/sparse.hpp"

// Seeded random inputs for property checks and oracle comparisons.
namespace lcpool::gen {

/// Symmetric 0/1 adjacency without self-loops; each pair is an edge with
/// probability `p`.
CsrMatrix undirected(Rng& rng, std::size_t n, double p);

/// 0/1 adjacency without self-loops; each ordered pair is an edge with
/// probability `p`. Usually asymmetric.
CsrMatrix directed(Rng& rng, std::size_t n, double p);

/// Integer entries in [lo, hi] \ {0} at the given density.
CsrMatrix integer_sparse(Rng& rng, std::size_t rows, std::size_t cols, double density, int lo,
                         int hi);

DenseMatrix uniform(Rng& rng, std::size_t rows, std::size_t cols, double lo = -1.0,
                    double hi = 1.0);

/// Local assignment whose pattern is exactly I + A, values in [lo, hi].
CsrMatrix local_assignment(Rng& rng, const CsrMatrix& a, double lo, double hi);

/// Non-empty sorted subset of 0..n-1.
IndexSet subset(Rng& rng, std::size_t n);

/// Undirected graphs with uniform random features and labels in [0, classes).
std::vector<Graph> graphs(Rng& rng, std::size_t count, std::size_t min_nodes,
                          std::size_t max_nodes, std::size_t feature_dim, double p,
                          std::size_t classes = 2);

std::size_t index(Rng& rng, std::size_t lo, std::size_t hi);  // inclusive

}  // namespace lcpool::gen
