#include "lcpool/generators.hpp"

#include <random>

namespace lcpool::gen {

std::size_t index(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

CsrMatrix undirected(Rng& rng, std::size_t n, double p) {
  std::bernoulli_distribution edge(p);
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (edge(rng)) {
        t.push_back({i, j, 1.0});
        t.push_back({j, i, 1.0});
      }
  return CsrMatrix::from_triplets(n, n, std::move(t));
}

CsrMatrix directed(Rng& rng, std::size_t n, double p) {
  std::bernoulli_distribution edge(p);
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && edge(rng)) t.push_back({i, j, 1.0});
  return CsrMatrix::from_triplets(n, n, std::move(t));
}

CsrMatrix integer_sparse(Rng& rng, std::size_t rows, std::size_t cols, double density, int lo,
                         int hi) {
  std::bernoulli_distribution keep(density);
  std::uniform_int_distribution<int> value(lo, hi);
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      if (!keep(rng)) continue;
      int v = 0;
      while (v == 0) v = value(rng);
      t.push_back({i, j, static_cast<double>(v)});
    }
  return CsrMatrix::from_triplets(rows, cols, std::move(t));
}

DenseMatrix uniform(Rng& rng, std::size_t rows, std::size_t cols, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  DenseMatrix m(rows, cols);
  for (double& v : m.data()) v = u(rng);
  return m;
}

CsrMatrix local_assignment(Rng& rng, const CsrMatrix& a, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  const CsrMatrix pattern = add_self_loops(ones_pattern(a));
  std::vector<Triplet> t;
  for (std::size_t r = 0; r < pattern.n_rows(); ++r)
    for (std::size_t c : pattern.row_cols(r)) {
      double v = 0.0;
      while (v == 0.0) v = u(rng);
      t.push_back({r, c, v});
    }
  return CsrMatrix::from_triplets(a.n_rows(), a.n_cols(), std::move(t));
}

IndexSet subset(Rng& rng, std::size_t n) {
  std::bernoulli_distribution keep(0.5);
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < n; ++i)
    if (keep(rng)) idx.push_back(i);
  if (idx.empty()) idx.push_back(index(rng, 0, n - 1));
  return IndexSet(std::move(idx));
}

std::vector<Graph> graphs(Rng& rng, std::size_t count, std::size_t min_nodes,
                          std::size_t max_nodes, std::size_t feature_dim, double p,
                          std::size_t classes) {
  std::vector<Graph> out;
  out.reserve(count);
  for (std::size_t g = 0; g < count; ++g) {
    const std::size_t n = index(rng, min_nodes, max_nodes);
    out.emplace_back(uniform(rng, n, feature_dim), undirected(rng, n, p),
                     index(rng, 0, classes - 1));
  }
  return out;
}

}  // namespace lcpool::gen
