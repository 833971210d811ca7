#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "lcpool/dataset.hpp"
#include "lcpool/diff.hpp"
#include "lcpool/layers.hpp"
#include "lcpool/pooling.hpp"

namespace lcpool {

enum class Backbone { hierarchical, plain };
enum class ConvKind { gcn, graphconv };
enum class PoolKind { nopool, topk, sag, dense, lcpool, lcpool_star };

std::string to_string(Backbone b);
std::string to_string(ConvKind c);
std::string to_string(PoolKind p);
Backbone parse_backbone(const std::string& s);  // "h"/"hierarchical", "p"/"plain"
ConvKind parse_conv(const std::string& s);
PoolKind parse_pool(const std::string& s);      // accepts lcpool-star and lcpool_star

struct ModelConfig {
  Backbone backbone = Backbone::hierarchical;
  ConvKind conv = ConvKind::gcn;
  PoolKind pool = PoolKind::lcpool;
  std::size_t hidden = 128;
  double ratio = 0.5;
  std::vector<std::size_t> pre_mlp{128};
  std::vector<std::size_t> post_mlp{256, 128};
  std::size_t blocks = 3;
  /// Cluster count of the first dense-assignment stage; later stages shrink
  /// it by `ratio`. 0 lets build_model derive it from the dataset.
  std::size_t dense_clusters = 0;

  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Backbone label used to group rankings, e.g. "hierarchical/gcn".
std::string backbone_label(const ModelConfig& cfg);

/// Graph-classification network: pre-MLP, conv/pool blocks, readout(s),
/// post-MLP and a class head.
class Model {
 public:
  Model(const ModelConfig& cfg, std::size_t feature_dim, std::size_t num_classes,
        std::uint64_t seed);

  struct Output {
    Tensor logits;
    /// Node count per graph after each pooling stage.
    std::vector<std::vector<std::size_t>> stage_sizes;
  };

  /// Also checks that selection pools keep kept_count(n_g, ratio) nodes of
  /// every graph, throwing Error(internal) otherwise.
  Output forward(Tape& tape, const GraphBatch& batch) const;

  const ModelConfig& config() const noexcept { return cfg_; }
  ParameterSet& params() noexcept { return params_; }
  const ParameterSet& params() const noexcept { return params_; }
  std::size_t num_classes() const noexcept { return num_classes_; }
  /// Scalar count of parameters owned by pooling operators.
  std::size_t pool_scalar_count() const;

 private:
  struct Conv {
    Linear self;       // GCN weight, or GraphConv W1
    Linear neighbour;  // GraphConv W2 (no bias); unused for GCN
  };
  struct Pool {
    Linear score;        // topk / sag score weight, dense assignment, lcpool* conv
    LcsmpParams lcsmp;   // lcpool / lcpool*
    std::size_t clusters = 0;
  };

  Tensor conv(Tape& tape, std::size_t block, Tensor x, const CsrMatrix& a) const;
  PoolResult pool(Tape& tape, std::size_t stage, Tensor x, const CsrMatrix& a,
                  const Segments& seg) const;

  ModelConfig cfg_;
  std::size_t num_classes_;
  ParameterSet params_;
  Mlp pre_;
  std::vector<Conv> convs_;
  std::vector<Pool> pools_;
  Mlp post_;
};

/// Applies the default first-stage cluster count for dense pooling.
Model build_model(ModelConfig cfg, const Dataset& dataset, std::uint64_t seed);

struct TrainConfig {
  std::size_t max_epochs = 500;
  std::size_t patience = 50;
  std::size_t batch_size = 32;
  double lr = 5e-4;
  std::uint64_t seed = 0;
  SplitRatios split;

  void validate() const;
};

/// Validation-accuracy early stopping; an accuracy tie counts as an
/// improvement when the validation loss is lower. Epochs are 1-based.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience) : patience_(patience) {}

  /// Returns true when `epoch` becomes the new best.
  bool update(std::size_t epoch, double val_accuracy, double val_loss);
  bool should_stop(std::size_t epoch) const { return epoch - best_epoch_ >= patience_; }
  std::size_t best_epoch() const noexcept { return best_epoch_; }

 private:
  std::size_t patience_;
  std::size_t best_epoch_ = 0;
  double best_accuracy_ = -1.0;
  double best_loss_ = 0.0;
};

struct RunRecord {
  ModelConfig model;
  std::string dataset;
  std::uint64_t run_seed = 0;
  double test_accuracy = 0.0;
  std::size_t best_epoch = 0;
  std::size_t stop_epoch = 0;
  double wall_time = 0.0;
  /// best_epoch <= 1: the model showed no learning progress after epoch 1.
  bool stalled = false;

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

/// count(argmax(logits) == label) / n with first-index tie-break.
double accuracy(const DenseMatrix& logits, std::span<const std::size_t> labels);

struct Evaluation {
  double accuracy = 0.0;
  double loss = 0.0;
};

Evaluation evaluate(const Model& model, const Dataset& data, std::size_t batch_size);

/// Adam over shuffled mini-batches with early stopping on validation
/// accuracy; reports test accuracy of the best-validation parameters.
RunRecord train(Model& model, const DatasetSplit& split, const TrainConfig& cfg,
                const std::string& dataset_name);

using RunCallback = std::function<void(const RunRecord&)>;

/// runs x models x datasets training runs. Run r uses seed cfg.seed + r for
/// its split, initialisation and shuffling. Runs execute on `threads` workers;
/// `on_done` is called (serialised) as each run finishes. Results come back
/// in dataset, model, run order regardless of completion order.
std::vector<RunRecord> evaluate_suite(const std::vector<ModelConfig>& models,
                                      const std::vector<const Dataset*>& datasets,
                                      std::size_t runs, const TrainConfig& cfg,
                                      std::size_t threads = 1, const RunCallback& on_done = {});

struct Summary {
  std::string backbone;  // backbone_label
  std::string pool;
  std::string dataset;
  std::vector<double> values;
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
};

/// Groups records by (backbone, pool, dataset) in first-seen order.
std::vector<Summary> summarize(const std::vector<RunRecord>& records);

struct AccuracyEntry {
  std::string backbone;
  std::string pool;
  std::string dataset;
  double accuracy;
};

/// Average rank of each pooling approach per backbone. Within each
/// (backbone, dataset) the present approaches are ranked by descending
/// accuracy (ties share the average rank); an approach's ranks are averaged
/// over the datasets where it appears.
struct RankingTable {
  std::vector<std::string> backbones;
  std::vector<std::string> pools;
  std::map<std::pair<std::string, std::string>, double> average_rank;

  double at(const std::string& backbone, const std::string& pool) const;
};

RankingTable rank_entries(const std::vector<AccuracyEntry>& entries);
RankingTable rank(const std::vector<RunRecord>& records);

void write_results_json(std::ostream& os, const std::vector<RunRecord>& records);
std::vector<RunRecord> read_results_json(std::istream& is);
void save_results_json(const std::filesystem::path& path, const std::vector<RunRecord>& records);
std::vector<RunRecord> load_results_json(const std::filesystem::path& path);

void write_summary_csv(std::ostream& os, const std::vector<Summary>& summaries);
void write_ranking_csv(std::ostream& os, const RankingTable& table);

}  // namespace lcpool
