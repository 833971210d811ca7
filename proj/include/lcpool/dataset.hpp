#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "lcpool/dense.hpp"
#include "lcpool/sparse.hpp"

namespace lcpool {

/// One attributed, unweighted, loop-free graph with a class label.
class Graph {
 public:
  Graph(DenseMatrix x, CsrMatrix a, std::size_t label);

  std::size_t num_nodes() const noexcept { return x_.rows(); }
  std::size_t feature_dim() const noexcept { return x_.cols(); }
  std::size_t num_edges() const noexcept { return a_.nnz() / 2; }  // undirected count
  const DenseMatrix& x() const noexcept { return x_; }
  const CsrMatrix& a() const noexcept { return a_; }
  std::size_t label() const noexcept { return label_; }

 private:
  DenseMatrix x_;
  CsrMatrix a_;
  std::size_t label_;
};

struct Dataset {
  std::string name;
  std::vector<Graph> graphs;
  std::size_t num_classes = 0;
  std::size_t feature_dim = 0;

  std::size_t size() const noexcept { return graphs.size(); }
  double average_nodes() const;
};

/// Block-diagonal union of several graphs. graph_id is non-decreasing and
/// node_offset[g] .. node_offset[g+1] are the rows of graph g.
struct GraphBatch {
  DenseMatrix x;
  CsrMatrix a;
  std::vector<std::size_t> graph_id;
  std::vector<std::size_t> node_offset;
  std::vector<std::size_t> labels;
  std::size_t graph_count = 0;

  std::size_t num_nodes() const noexcept { return x.rows(); }
};

/// Reads <name>_A.txt, <name>_graph_indicator.txt, <name>_graph_labels.txt
/// and the optional node label / attribute files from `root` (or from
/// `root/<name>/` when the files are not directly under root).
Dataset load_tudataset(const std::filesystem::path& root, const std::string& name);

GraphBatch make_batch(std::span<const Graph> graphs);
GraphBatch make_batch(std::span<const Graph* const> graphs);

/// Recovers graph `g` of a batch (features and adjacency).
Graph slice_batch(const GraphBatch& batch, std::size_t g);

struct SplitRatios {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

struct DatasetSplit {
  Dataset train;
  Dataset val;
  Dataset test;
};

/// Seeded shuffle; val/test get floor(n * ratio), train the remainder.
DatasetSplit split(const Dataset& dataset, SplitRatios ratios, std::uint64_t seed);

/// Small synthetic workloads: "cycles_vs_paths" or "two_communities".
Dataset make_synthetic(const std::string& kind, std::size_t n_graphs, std::uint64_t seed);

/// Undirected adjacency from an edge list (0-based), deduplicated, no loops.
CsrMatrix undirected_adjacency(std::size_t n, std::span<const std::array<std::size_t, 2>> edges);

}  // namespace lcpool
