#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>

#include <unistd.h>

#include "lcpool/dataset.hpp"
#include "lcpool/errors.hpp"
#include "lcpool/generators.hpp"
#include "support.hpp"

namespace lcpool {
namespace {

namespace fs = std::filesystem;

const fs::path kData = LCPOOL_TEST_DATA;

// Scratch directory holding hand-written TUDataset files.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag)
      : path_(fs::temp_directory_path() / ("lcpool_" + tag + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~ScratchDir() { fs::remove_all(path_); }
  void write(const std::string& file, const std::string& text) const {
    std::ofstream(path_ / file) << text;
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

TEST(LoadTuDataset, ReadsTriangleAndEdgeFixture) {
  const Dataset ds = load_tudataset(kData, "TOY");
  EXPECT_EQ(ds.name, "TOY");
  ASSERT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds.num_classes, 2u);
  // One-hot of node labels {0,1,2} followed by two attributes.
  EXPECT_EQ(ds.feature_dim, 5u);
  EXPECT_DOUBLE_EQ(ds.average_nodes(), 2.5);

  const Graph& tri = ds.graphs[0];
  EXPECT_EQ(tri.num_nodes(), 3u);
  EXPECT_EQ(tri.label(), 0u);  // -1 -> 0
  EXPECT_EQ(tri.num_edges(), 3u);
  EXPECT_EQ(test::dense_of(tri.a()), (DenseMatrix{{0, 1, 1}, {1, 0, 1}, {1, 1, 0}}));
  EXPECT_EQ(tri.x(), (DenseMatrix{{1, 0, 0, 0.5, 1.0}, {0, 0, 1, -1.5, 2}, {1, 0, 0, 0.25, 0}}));

  const Graph& edge = ds.graphs[1];
  EXPECT_EQ(edge.num_nodes(), 2u);
  EXPECT_EQ(edge.label(), 1u);
  // Duplicate lines collapse and the 5-5 self-loop is dropped.
  EXPECT_EQ(test::dense_of(edge.a()), (DenseMatrix{{0, 1}, {1, 0}}));
  EXPECT_EQ(edge.x(), (DenseMatrix{{0, 1, 0, 3, 3}, {0, 1, 0, 0.1, -2}}));

  for (const Graph& g : ds.graphs) EXPECT_TRUE(is_symmetric(g.a()));
}

TEST(LoadTuDataset, AcceptsNameSubdirectory) {
  const Dataset ds = load_tudataset(kData, "TOY");
  EXPECT_EQ(load_tudataset(kData / "TOY", "TOY").size(), ds.size());
}

TEST(LoadTuDataset, DefaultsToConstantFeature) {
  ScratchDir dir("plain");
  dir.write("P_A.txt", "1, 2\n2, 1\n");
  dir.write("P_graph_indicator.txt", "1\n1\n2\n");
  dir.write("P_graph_labels.txt", "3\n7\n");
  const Dataset ds = load_tudataset(dir.path(), "P");
  EXPECT_EQ(ds.feature_dim, 1u);
  EXPECT_EQ(ds.graphs[1].x(), DenseMatrix(1, 1, 1.0));
  EXPECT_EQ(ds.graphs[1].label(), 1u);
}

TEST(LoadTuDataset, ErrorsAreReported) {
  ScratchDir dir("bad");
  dir.write("M_A.txt", "1, 2\n");
  dir.write("M_graph_indicator.txt", "1\n1\n");
  auto code_of = [&](const std::string& name) {
    try {
      load_tudataset(dir.path(), name);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::internal;
  };
  EXPECT_EQ(code_of("M"), ErrorCode::io);  // no graph labels file
  EXPECT_EQ(code_of("NOPE"), ErrorCode::io);

  dir.write("X_A.txt", "1, 3\n3, 1\n");
  dir.write("X_graph_indicator.txt", "1\n1\n2\n");
  dir.write("X_graph_labels.txt", "0\n1\n");
  EXPECT_EQ(code_of("X"), ErrorCode::format);  // edge crosses graphs

  dir.write("Y_A.txt", "1, 9\n");
  dir.write("Y_graph_indicator.txt", "1\n1\n");
  dir.write("Y_graph_labels.txt", "0\n");
  EXPECT_EQ(code_of("Y"), ErrorCode::format);  // node id out of range

  dir.write("Z_A.txt", "1; 2\n");
  dir.write("Z_graph_indicator.txt", "1\n1\n");
  dir.write("Z_graph_labels.txt", "0\n");
  EXPECT_EQ(code_of("Z"), ErrorCode::format);
}

fs::path tudataset_root() {
  const char* env = std::getenv("LCPOOL_DATA_ROOT");
  return env ? fs::path(env) : fs::path();
}

TEST(LoadTuDataset, ProteinsMatchesReferenceSummary) {
  const fs::path root = tudataset_root();
  if (root.empty() || !(fs::exists(root / "PROTEINS") || fs::exists(root / "PROTEINS_A.txt")))
    GTEST_SKIP() << "PROTEINS not available (set LCPOOL_DATA_ROOT)";
  const Dataset ds = load_tudataset(root, "PROTEINS");
  EXPECT_EQ(ds.size(), 1113u);
  EXPECT_EQ(ds.num_classes, 2u);
  EXPECT_NEAR(ds.average_nodes(), 39.06, 0.01);
}

TEST(LoadTuDataset, EnzymesMatchesReferenceSummary) {
  const fs::path root = tudataset_root();
  if (root.empty() || !(fs::exists(root / "ENZYMES") || fs::exists(root / "ENZYMES_A.txt")))
    GTEST_SKIP() << "ENZYMES not available (set LCPOOL_DATA_ROOT)";
  const Dataset ds = load_tudataset(root, "ENZYMES");
  EXPECT_EQ(ds.size(), 600u);
  EXPECT_EQ(ds.num_classes, 6u);
  EXPECT_GE(ds.feature_dim, 18u);
}

TEST(GraphTest, RejectsInvalidGraphs) {
  EXPECT_THROW(Graph(DenseMatrix(0, 1), CsrMatrix(0, 0), 0), Error);
  EXPECT_THROW(Graph(DenseMatrix(2, 1), CsrMatrix(3, 3), 0), Error);
  EXPECT_THROW(Graph(DenseMatrix(2, 1), CsrMatrix::identity(2), 0), Error);
  EXPECT_THROW(Graph(DenseMatrix(2, 1), scale(test::path(2), 2.0), 0), Error);
  EXPECT_THROW(Graph(DenseMatrix(1, 1, std::nan("")), CsrMatrix(1, 1), 0), Error);
}

TEST(MakeBatch, SingleGraphIsUnchanged) {
  const Graph g(DenseMatrix{{1}, {2}, {3}}, test::path(3), 1);
  const GraphBatch b = make_batch(std::span<const Graph>(&g, 1));
  EXPECT_EQ(b.x, g.x());
  EXPECT_EQ(b.a, g.a());
  EXPECT_EQ(b.graph_id, (std::vector<std::size_t>{0, 0, 0}));
  EXPECT_EQ(b.labels, (std::vector<std::size_t>{1}));
}

TEST(MakeBatch, TriangleAndEdgeAreBlockDiagonal) {
  const Dataset ds = load_tudataset(kData, "TOY");
  const GraphBatch b = make_batch(std::span<const Graph>(ds.graphs));
  EXPECT_EQ(b.num_nodes(), 5u);
  EXPECT_EQ(b.graph_count, 2u);
  EXPECT_EQ(b.graph_id, (std::vector<std::size_t>{0, 0, 0, 1, 1}));
  EXPECT_EQ(b.node_offset, (std::vector<std::size_t>{0, 3, 5}));
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t c : b.a.row_cols(r)) EXPECT_EQ(b.graph_id[r], b.graph_id[c]);
  EXPECT_EQ(b.a.nnz(), 8u);
}

TEST(MakeBatch, RejectsMixedFeatureWidths) {
  const std::vector<Graph> gs{Graph(DenseMatrix(1, 2), CsrMatrix(1, 1), 0),
                              Graph(DenseMatrix(1, 3), CsrMatrix(1, 1), 0)};
  EXPECT_THROW(make_batch(std::span<const Graph>(gs)), Error);
  EXPECT_THROW(make_batch(std::span<const Graph>()), Error);
}

TEST(MakeBatch, SliceRecoversEveryGraph) {
  Rng rng(11);
  for (int t = 0; t < 20; ++t) {
    const auto gs = gen::graphs(rng, gen::index(rng, 1, 6), 1, 15, 3, 0.3);
    const GraphBatch b = make_batch(std::span<const Graph>(gs));
    for (std::size_t g = 0; g < gs.size(); ++g) {
      const Graph back = slice_batch(b, g);
      EXPECT_EQ(back.x(), gs[g].x());
      EXPECT_EQ(back.a(), gs[g].a());
      EXPECT_EQ(back.label(), gs[g].label());
    }
  }
}

Dataset numbered(std::size_t n) {
  Dataset ds;
  ds.name = "n";
  ds.num_classes = 1;
  ds.feature_dim = 1;
  for (std::size_t i = 0; i < n; ++i)
    ds.graphs.emplace_back(DenseMatrix(1, 1, static_cast<double>(i)), CsrMatrix(1, 1), 0);
  return ds;
}

std::vector<double> ids(const Dataset& d) {
  std::vector<double> v;
  for (const Graph& g : d.graphs) v.push_back(g.x()(0, 0));
  return v;
}

TEST(Split, SizesFollowEightOneOne) {
  const DatasetSplit s = split(numbered(600), {}, 0);
  EXPECT_EQ(s.train.size(), 480u);
  EXPECT_EQ(s.val.size(), 60u);
  EXPECT_EQ(s.test.size(), 60u);
  const DatasetSplit small = split(numbered(10), {}, 3);
  EXPECT_EQ(small.train.size(), 8u);
  EXPECT_EQ(small.val.size(), 1u);
  EXPECT_EQ(small.test.size(), 1u);
}

TEST(Split, IsDeterministicPerSeed) {
  const Dataset ds = numbered(50);
  EXPECT_EQ(ids(split(ds, {}, 5).train), ids(split(ds, {}, 5).train));
  EXPECT_NE(ids(split(ds, {}, 5).train), ids(split(ds, {}, 6).train));
}

TEST(Split, RejectsBadRatiosAndEmptySplits) {
  EXPECT_THROW(split(numbered(100), {0.5, 0.1, 0.1}, 0), Error);
  EXPECT_THROW(split(numbered(100), {1.0, 0.0, 0.0}, 0), Error);
  EXPECT_THROW(split(numbered(5), {}, 0), Error);
}

TEST(Split, PartitionsTheDataset) {
  Rng rng(99);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = gen::index(rng, 10, 300);
    const DatasetSplit s = split(numbered(n), {}, rng());
    std::vector<double> all = ids(s.train);
    for (const Dataset* d : {&s.val, &s.test}) {
      const auto v = ids(*d);
      all.insert(all.end(), v.begin(), v.end());
    }
    std::sort(all.begin(), all.end());
    ASSERT_EQ(all.size(), n);
    for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(all[i], static_cast<double>(i));
  }
}

TEST(Synthetic, CyclesVsPathsIsBalanced) {
  const Dataset ds = make_synthetic("cycles_vs_paths", 200, 7);
  EXPECT_EQ(ds.size(), 200u);
  EXPECT_EQ(ds.num_classes, 2u);
  std::size_t ones = 0;
  for (const Graph& g : ds.graphs) {
    ones += g.label();
    const std::size_t n = g.num_nodes();
    EXPECT_GE(n, 6u);
    EXPECT_LE(n, 20u);
    std::size_t deg1 = 0;
    for (std::size_t i = 0; i < n; ++i) deg1 += g.a().row_cols(i).size() == 1;
    if (g.label() == 0) {
      EXPECT_EQ(g.num_edges(), n);
      EXPECT_EQ(deg1, 0u);
    } else {
      EXPECT_EQ(g.num_edges(), n - 1);
      EXPECT_EQ(deg1, 2u);
    }
  }
  EXPECT_EQ(ones, 100u);
}

TEST(Synthetic, TwoCommunitiesAndUnknownKind) {
  const Dataset ds = make_synthetic("two_communities", 20, 1);
  EXPECT_EQ(ds.size(), 20u);
  for (const Graph& g : ds.graphs) {
    EXPECT_GE(g.num_nodes(), 10u);
    EXPECT_TRUE(is_symmetric(g.a()));
  }
  EXPECT_THROW(make_synthetic("stars", 10, 0), Error);
}

}  // namespace
}  // namespace lcpool
