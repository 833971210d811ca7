#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lcpool/checks.hpp"
#include "lcpool/errors.hpp"
#include "lcpool/generators.hpp"
#include "lcpool/harness.hpp"
#include "support.hpp"

namespace lcpool {
namespace {

namespace fs = std::filesystem;

ModelConfig small_config(Backbone backbone, PoolKind pool) {
  ModelConfig cfg;
  cfg.backbone = backbone;
  cfg.pool = pool;
  cfg.hidden = 8;
  cfg.pre_mlp = {8};
  cfg.post_mlp = {8};
  cfg.dense_clusters = 4;
  return cfg;
}

Graph cycle_graph(std::size_t n, std::size_t dim, std::size_t label) {
  Rng rng(n);
  return Graph(gen::uniform(rng, n, dim), test::cycle(n), label);
}

std::string read_file(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path temp_path(const std::string& name) {
  return fs::temp_directory_path() / ("lcpool_harness_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" + name);
}

RunRecord record(Backbone b, ConvKind c, PoolKind p, const std::string& dataset, double acc,
                 std::uint64_t seed = 0) {
  RunRecord r;
  r.model.backbone = b;
  r.model.conv = c;
  r.model.pool = p;
  r.dataset = dataset;
  r.test_accuracy = acc;
  r.run_seed = seed;
  r.best_epoch = 12;
  r.stop_epoch = 62;
  r.wall_time = 1.25;
  return r;
}

std::vector<RunRecord> fixture_records() {
  const auto h = Backbone::hierarchical;
  const auto p = Backbone::plain;
  return {record(h, ConvKind::gcn, PoolKind::lcpool, "MUTAG", 0.75, 0),
          record(h, ConvKind::gcn, PoolKind::lcpool, "MUTAG", 0.80, 1),
          record(h, ConvKind::gcn, PoolKind::topk, "MUTAG", 0.70, 0),
          record(h, ConvKind::gcn, PoolKind::topk, "MUTAG", 0.70, 1),
          record(h, ConvKind::gcn, PoolKind::lcpool, "PROTEINS", 0.70),
          record(h, ConvKind::gcn, PoolKind::topk, "PROTEINS", 0.70),
          record(p, ConvKind::graphconv, PoolKind::lcpool, "MUTAG", 0.60),
          record(p, ConvKind::graphconv, PoolKind::nopool, "MUTAG", 0.90)};
}

// ---------------------------------------------------------------------------
// Configuration parsing

TEST(Config, ParsesNamesAndRejectsUnknownVariants) {
  EXPECT_EQ(parse_backbone("h"), Backbone::hierarchical);
  EXPECT_EQ(parse_backbone("plain"), Backbone::plain);
  EXPECT_EQ(parse_conv("graphconv"), ConvKind::graphconv);
  EXPECT_EQ(parse_pool("lcpool-star"), PoolKind::lcpool_star);
  EXPECT_EQ(parse_pool("lcpool_star"), PoolKind::lcpool_star);
  for (PoolKind p : {PoolKind::nopool, PoolKind::topk, PoolKind::sag, PoolKind::dense,
                     PoolKind::lcpool, PoolKind::lcpool_star})
    EXPECT_EQ(parse_pool(to_string(p)), p);
  EXPECT_THROW(parse_pool("diffpool"), Error);
  EXPECT_THROW(parse_backbone("x"), Error);
  EXPECT_THROW(parse_conv("gat"), Error);
}

TEST(Config, ValidatesWidthsAndRatio) {
  ModelConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.hidden = 0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = ModelConfig{};
  cfg.ratio = 0.0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = ModelConfig{};
  cfg.post_mlp = {4, 0};
  EXPECT_THROW(cfg.validate(), Error);
  TrainConfig t;
  EXPECT_NO_THROW(t.validate());
  t.patience = 0;
  EXPECT_THROW(t.validate(), Error);
}

TEST(Config, DefaultsFollowTheProtocol) {
  const ModelConfig m;
  EXPECT_EQ(m.hidden, 128u);
  EXPECT_EQ(m.pre_mlp, std::vector<std::size_t>{128});
  EXPECT_EQ(m.post_mlp, (std::vector<std::size_t>{256, 128}));
  EXPECT_EQ(m.ratio, 0.5);
  EXPECT_EQ(m.blocks, 3u);
  const TrainConfig t;
  EXPECT_EQ(t.max_epochs, 500u);
  EXPECT_EQ(t.patience, 50u);
  EXPECT_EQ(t.batch_size, 32u);
  EXPECT_EQ(t.lr, 0.0005);
}

// ---------------------------------------------------------------------------
// Models

TEST(Model, PlainNopoolProducesOneLogitRowPerGraph) {
  Rng rng(1);
  const auto graphs = gen::graphs(rng, 5, 2, 9, 3, 0.4, 4);
  const GraphBatch batch = make_batch(std::span<const Graph>(graphs));
  const Model model(small_config(Backbone::plain, PoolKind::nopool), 3, 4, 7);
  Tape tape;
  const auto out = model.forward(tape, batch);
  EXPECT_EQ(out.logits.rows(), 5u);
  EXPECT_EQ(out.logits.cols(), 4u);
  EXPECT_TRUE(out.stage_sizes.empty());
}

TEST(Model, HierarchicalLcpoolHalvesAFortyNodeGraphThreeTimes) {
  const std::vector<Graph> graphs{cycle_graph(40, 3, 0)};
  const GraphBatch batch = make_batch(std::span<const Graph>(graphs));
  for (PoolKind pool : {PoolKind::lcpool, PoolKind::lcpool_star, PoolKind::topk, PoolKind::sag}) {
    const Model model(small_config(Backbone::hierarchical, pool), 3, 2, 3);
    Tape tape;
    const auto out = model.forward(tape, batch);
    ASSERT_EQ(out.stage_sizes.size(), 3u) << to_string(pool);
    EXPECT_EQ(out.stage_sizes[0], std::vector<std::size_t>{20});
    EXPECT_EQ(out.stage_sizes[1], std::vector<std::size_t>{10});
    EXPECT_EQ(out.stage_sizes[2], std::vector<std::size_t>{5});
  }
}

TEST(Model, PlainBackbonePoolsOnce) {
  const std::vector<Graph> graphs{cycle_graph(40, 3, 0), cycle_graph(7, 3, 1)};
  const GraphBatch batch = make_batch(std::span<const Graph>(graphs));
  const Model model(small_config(Backbone::plain, PoolKind::lcpool), 3, 2, 3);
  Tape tape;
  const auto out = model.forward(tape, batch);
  ASSERT_EQ(out.stage_sizes.size(), 1u);
  EXPECT_EQ(out.stage_sizes[0], (std::vector<std::size_t>{20, 4}));
}

TEST(Model, NonPoolParametersAgreeAcrossPoolChoices) {
  for (Backbone b : {Backbone::hierarchical, Backbone::plain}) {
    const Model base(small_config(b, PoolKind::nopool), 5, 3, 1);
    EXPECT_EQ(base.pool_scalar_count(), 0u);
    const std::size_t shared = base.params().scalar_count();
    for (PoolKind p : {PoolKind::topk, PoolKind::sag, PoolKind::dense, PoolKind::lcpool,
                       PoolKind::lcpool_star}) {
      const Model m(small_config(b, p), 5, 3, 1);
      EXPECT_GT(m.pool_scalar_count(), 0u) << to_string(p);
      EXPECT_EQ(m.params().scalar_count() - m.pool_scalar_count(), shared) << to_string(p);
    }
  }
}

TEST(Model, LcpoolParameterCountFollowsLayerWidths) {
  // Per stage: L_d (d·d + d), L_fd (d·d + d), L_x (d·d + d), L_s (d + 1).
  const Model h(small_config(Backbone::hierarchical, PoolKind::lcpool), 5, 3, 1);
  const std::size_t d = 8;
  EXPECT_EQ(h.pool_scalar_count(), 3 * (3 * (d * d + d) + d + 1));
  const Model p(small_config(Backbone::plain, PoolKind::lcpool), 5, 3, 1);
  EXPECT_EQ(p.pool_scalar_count(), 3 * (d * d + d) + d + 1);
}

TEST(Model, SameSeedGivesIdenticalParameters) {
  const auto cfg = small_config(Backbone::hierarchical, PoolKind::lcpool);
  const Model a(cfg, 4, 2, 99), b(cfg, 4, 2, 99), c(cfg, 4, 2, 100);
  EXPECT_EQ(a.params().snapshot(), b.params().snapshot());
  EXPECT_NE(a.params().snapshot(), c.params().snapshot());
}

class SizeAdaptivity : public ::testing::TestWithParam<int> {};

TEST_P(SizeAdaptivity, EveryStageKeepsTheCeilingOfRatioTimesSize) {
  Rng rng(40 + GetParam());
  const auto graphs = gen::graphs(rng, 6, 1, 30, 3, 0.2);
  const GraphBatch batch = make_batch(std::span<const Graph>(graphs));
  for (PoolKind pool : {PoolKind::topk, PoolKind::sag, PoolKind::lcpool, PoolKind::lcpool_star}) {
    for (Backbone b : {Backbone::hierarchical, Backbone::plain}) {
      ModelConfig cfg = small_config(b, pool);
      cfg.ratio = std::uniform_real_distribution<>(0.1, 1.0)(rng);
      const Model model(cfg, 3, 2, rng());
      Tape tape;
      const auto out = model.forward(tape, batch);
      std::vector<std::size_t> sizes;
      for (const Graph& g : graphs) sizes.push_back(g.num_nodes());
      for (const auto& stage : out.stage_sizes) {
        ASSERT_EQ(stage.size(), sizes.size());
        for (std::size_t g = 0; g < sizes.size(); ++g)
          EXPECT_EQ(stage[g], kept_count(sizes[g], PoolRatio(cfg.ratio)));
        sizes = stage;
      }
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, SizeAdaptivity, ::testing::Range(0, 4));

TEST(Model, DenseAssignmentUsesFixedClusterCounts) {
  Rng rng(5);
  const auto graphs = gen::graphs(rng, 3, 2, 20, 3, 0.3);
  const GraphBatch batch = make_batch(std::span<const Graph>(graphs));
  const Model model(small_config(Backbone::hierarchical, PoolKind::dense), 3, 2, 1);
  Tape tape;
  const auto out = model.forward(tape, batch);
  ASSERT_EQ(out.stage_sizes.size(), 3u);
  EXPECT_EQ(out.stage_sizes[0], (std::vector<std::size_t>{4, 4, 4}));
  EXPECT_EQ(out.stage_sizes[1], (std::vector<std::size_t>{2, 2, 2}));
  EXPECT_EQ(out.stage_sizes[2], (std::vector<std::size_t>{1, 1, 1}));
}

// ---------------------------------------------------------------------------
// Training

TEST(Accuracy, CountsArgmaxHitsWithFirstIndexTieBreak) {
  const DenseMatrix logits{{1, 1}, {0, 2}, {3, -1}, {0.5, 0.5}};
  const std::vector<std::size_t> labels{0, 1, 1, 1};
  EXPECT_DOUBLE_EQ(accuracy(logits, labels), 0.5);
  const std::vector<std::size_t> wrong_size{0};
  EXPECT_THROW(accuracy(logits, wrong_size), Error);
}

TEST(EarlyStopping, RunsToMaxEpochsWhileValidationImproves) {
  EarlyStopping stop(50);
  for (std::size_t e = 1; e <= 500; ++e) {
    EXPECT_TRUE(stop.update(e, static_cast<double>(e) / 1000.0, 1.0));
    EXPECT_FALSE(stop.should_stop(e));
  }
  EXPECT_EQ(stop.best_epoch(), 500u);
}

TEST(EarlyStopping, StopsAtEpochFiftyOneWhenOnlyEpochOneCounts) {
  EarlyStopping stop(50);
  stop.update(1, 0.6, 0.5);
  std::size_t stopped = 0;
  for (std::size_t e = 2; e <= 500 && stopped == 0; ++e) {
    EXPECT_FALSE(stop.update(e, 0.55, 0.4));
    if (stop.should_stop(e)) stopped = e;
  }
  EXPECT_EQ(stopped, 51u);
  EXPECT_EQ(stop.best_epoch(), 1u);
}

TEST(EarlyStopping, AccuracyTieFallsBackToLowerLoss) {
  EarlyStopping stop(5);
  EXPECT_TRUE(stop.update(1, 0.8, 0.5));
  EXPECT_FALSE(stop.update(2, 0.8, 0.6));
  EXPECT_FALSE(stop.update(3, 0.8, 0.5));
  EXPECT_TRUE(stop.update(4, 0.8, 0.4));
  EXPECT_FALSE(stop.update(5, 0.7, 0.1));
  EXPECT_EQ(stop.best_epoch(), 4u);
}

class TinyTraining : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { data_ = new Dataset(make_synthetic("cycles_vs_paths", 40, 3)); }
  static void TearDownTestSuite() { delete data_; }

  static TrainConfig train_config() {
    TrainConfig t;
    t.max_epochs = 4;
    t.patience = 2;
    t.batch_size = 8;
    t.lr = 0.01;
    t.seed = 5;
    return t;
  }

  static Dataset* data_;
};

Dataset* TinyTraining::data_ = nullptr;

TEST_F(TinyTraining, IsDeterministicForASeed) {
  const auto cfg = small_config(Backbone::hierarchical, PoolKind::lcpool);
  const TrainConfig t = train_config();
  auto run = [&] {
    Model m = build_model(cfg, *data_, 5);
    RunRecord r = train(m, split(*data_, t.split, t.seed), t, data_->name);
    r.wall_time = 0.0;
    return std::make_pair(r, m.params().snapshot());
  };
  const auto a = run(), b = run();
  EXPECT_EQ(a.first, b.first);
  EXPECT_EQ(a.second, b.second);
}

TEST_F(TinyTraining, RespectsEpochBounds) {
  const TrainConfig t = train_config();
  for (PoolKind pool : {PoolKind::nopool, PoolKind::lcpool, PoolKind::dense}) {
    Model m = build_model(small_config(Backbone::plain, pool), *data_, 1);
    const RunRecord r = train(m, split(*data_, t.split, t.seed), t, data_->name);
    EXPECT_GE(r.best_epoch, 1u);
    EXPECT_LE(r.best_epoch, t.max_epochs);
    EXPECT_LE(r.stop_epoch, t.max_epochs);
    EXPECT_LE(r.stop_epoch - r.best_epoch, t.patience);
    EXPECT_GE(r.test_accuracy, 0.0);
    EXPECT_LE(r.test_accuracy, 1.0);
    EXPECT_EQ(r.stalled, r.best_epoch <= 1);
    EXPECT_EQ(r.dataset, "synthetic:cycles_vs_paths");
  }
}

TEST_F(TinyTraining, RejectsEmptySplits) {
  Model m = build_model(small_config(Backbone::plain, PoolKind::nopool), *data_, 1);
  DatasetSplit s = split(*data_, SplitRatios{}, 1);
  s.val.graphs.clear();
  EXPECT_THROW(train(m, s, train_config(), "x"), Error);
}

TEST_F(TinyTraining, SuiteResultsDoNotDependOnThreadCount) {
  const std::vector<ModelConfig> models{small_config(Backbone::plain, PoolKind::lcpool),
                                        small_config(Backbone::plain, PoolKind::topk)};
  const std::vector<const Dataset*> datasets{data_};
  std::size_t callbacks = 0;
  auto one = evaluate_suite(models, datasets, 2, train_config(), 1,
                            [&](const RunRecord&) { ++callbacks; });
  auto many = evaluate_suite(models, datasets, 2, train_config(), 3);
  EXPECT_EQ(callbacks, 4u);
  ASSERT_EQ(one.size(), 4u);
  ASSERT_EQ(many.size(), 4u);
  for (std::size_t i = 0; i < one.size(); ++i) {
    one[i].wall_time = many[i].wall_time = 0.0;
    EXPECT_EQ(one[i], many[i]);
  }
  EXPECT_EQ(one[0].model.pool, PoolKind::lcpool);
  EXPECT_EQ(one[0].run_seed, 5u);
  EXPECT_EQ(one[1].run_seed, 6u);
  EXPECT_EQ(one[2].model.pool, PoolKind::topk);
  EXPECT_THROW(evaluate_suite(models, datasets, 0, train_config()), Error);
}

// ---------------------------------------------------------------------------
// Reports and rankings

TEST(Summary, GroupsInFirstSeenOrderWithPopulationStd) {
  const auto s = summarize(fixture_records());
  ASSERT_EQ(s.size(), 6u);
  EXPECT_EQ(s[0].backbone, "hierarchical/gcn");
  EXPECT_EQ(s[0].pool, "lcpool");
  EXPECT_EQ(s[0].dataset, "MUTAG");
  EXPECT_EQ(s[0].values, (std::vector<double>{0.75, 0.80}));
  EXPECT_NEAR(s[0].mean, 0.775, 1e-15);
  EXPECT_NEAR(s[0].stddev, 0.025, 1e-15);
  EXPECT_EQ(s[5].pool, "nopool");
}

TEST(Ranking, SingleApproachRanksFirstEverywhere) {
  const RankingTable t = rank_entries(
      {{"b", "only", "D1", 0.3}, {"b", "only", "D2", 0.9}, {"b", "only", "D3", 0.1}});
  EXPECT_EQ(t.at("b", "only"), 1.0);
}

TEST(Ranking, BetterApproachOnBothDatasets) {
  const RankingTable t = rank_entries(
      {{"b", "A", "D1", 0.8}, {"b", "B", "D1", 0.6}, {"b", "A", "D2", 0.8}, {"b", "B", "D2", 0.6}});
  EXPECT_EQ(t.at("b", "A"), 1.0);
  EXPECT_EQ(t.at("b", "B"), 2.0);
}

TEST(Ranking, TiesShareTheAverageRank) {
  const RankingTable t = rank_entries({{"b", "A", "D", 0.5},
                                       {"b", "B", "D", 0.7},
                                       {"b", "C", "D", 0.5},
                                       {"b", "E", "D", 0.5}});
  EXPECT_EQ(t.at("b", "B"), 1.0);
  EXPECT_EQ(t.at("b", "A"), 3.0);
  EXPECT_EQ(t.at("b", "C"), 3.0);
  EXPECT_EQ(t.at("b", "E"), 3.0);
}

TEST(Ranking, RanksArePermutationsPerBackboneAndDataset) {
  Rng rng(12);
  std::vector<AccuracyEntry> entries;
  const std::vector<std::string> pools{"p0", "p1", "p2", "p3", "p4"};
  for (const char* d : {"D1", "D2", "D3"})
    for (const auto& p : pools)
      entries.push_back({"b", p, d, static_cast<double>(gen::index(rng, 0, 3)) / 4.0});
  const RankingTable t = rank_entries(entries);
  // Average ranks of a permutation of 1..5 sum to 15 on every dataset.
  double total = 0.0;
  for (const auto& p : pools) total += t.at("b", p);
  EXPECT_NEAR(total, 15.0, 1e-12);
}

TEST(Ranking, BackbonesAreRankedSeparately) {
  const RankingTable t = rank(fixture_records());
  EXPECT_EQ(t.backbones, (std::vector<std::string>{"hierarchical/gcn", "plain/graphconv"}));
  EXPECT_EQ(t.at("hierarchical/gcn", "lcpool"), 1.25);
  EXPECT_EQ(t.at("hierarchical/gcn", "topk"), 1.75);
  EXPECT_EQ(t.at("plain/graphconv", "nopool"), 1.0);
  EXPECT_EQ(t.at("plain/graphconv", "lcpool"), 2.0);
  EXPECT_THROW(t.at("plain/graphconv", "topk"), Error);
}

TEST(Ranking, DuplicateEntriesAreRejected) {
  EXPECT_THROW(rank_entries({{"b", "A", "D", 0.5}, {"b", "A", "D", 0.6}}), Error);
}

TEST(Ranking, ReferenceAccuraciesGiveLcpoolAverageRank) {
  checks::Options opt;
  const checks::CheckResult r = checks::ranking_fixture(opt);
  EXPECT_EQ(r.status, checks::Status::pass) << r.detail;
}

TEST(Report, JsonRoundTripRestoresRecords) {
  auto records = fixture_records();
  records[0].model.ratio = 0.1;
  records[0].model.post_mlp = {3, 7};
  records[1].test_accuracy = 1.0 / 3.0;
  records[1].stalled = true;
  records[2].run_seed = 18446744073709551615ULL;
  std::stringstream buf;
  write_results_json(buf, records);
  EXPECT_EQ(read_results_json(buf), records);
}

TEST(Report, EmptyRecordListGivesHeadersOnly) {
  std::stringstream json_buf;
  write_results_json(json_buf, {});
  EXPECT_TRUE(read_results_json(json_buf).empty());
  std::ostringstream summary, ranking;
  write_summary_csv(summary, summarize({}));
  write_ranking_csv(ranking, rank({}));
  EXPECT_EQ(summary.str(), "backbone,pool,dataset,runs,mean,std,values\n");
  EXPECT_EQ(ranking.str(), "backbone\n");
}

TEST(Report, CsvOutputMatchesGoldenFiles) {
  const auto records = fixture_records();
  std::ostringstream summary, ranking;
  write_summary_csv(summary, summarize(records));
  write_ranking_csv(ranking, rank(records));
  const fs::path golden = fs::path(LCPOOL_TEST_DATA) / "golden";
  EXPECT_EQ(summary.str(), read_file(golden / "summary.csv"));
  EXPECT_EQ(ranking.str(), read_file(golden / "ranking.csv"));
}

TEST(Report, FilesRoundTripAndBadPathsAreIoErrors) {
  const fs::path p = temp_path("results.json");
  save_results_json(p, fixture_records());
  EXPECT_EQ(load_results_json(p), fixture_records());
  fs::remove(p);
  try {
    save_results_json("/nonexistent-dir/sub/results.json", fixture_records());
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::io);
  }
  try {
    load_results_json(temp_path("missing.json"));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::io);
  }
}

TEST(Report, MalformedJsonIsAFormatError) {
  auto code_of = [](const std::string& text) {
    std::istringstream is(text);
    try {
      read_results_json(is);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::internal;
  };
  EXPECT_EQ(code_of("{not json"), ErrorCode::format);
  EXPECT_EQ(code_of(R"({"format":"other","records":[]})"), ErrorCode::format);
  EXPECT_EQ(code_of(R"({"format":"lcpool-results","records":[{"dataset":"x"}]})"),
            ErrorCode::format);
  std::stringstream buf;
  auto bad = fixture_records();
  bad.resize(1);
  write_results_json(buf, bad);
  std::string text = buf.str();
  const auto at = text.find("\"test_accuracy\": 0.75");
  ASSERT_NE(at, std::string::npos);
  text.replace(at, std::string("\"test_accuracy\": 0.75").size(), "\"test_accuracy\": 1.5");
  EXPECT_EQ(code_of(text), ErrorCode::format);
}

}  // namespace
}  // namespace lcpool
