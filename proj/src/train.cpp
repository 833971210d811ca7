#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

#include "lcpool/errors.hpp"
#include "lcpool/harness.hpp"

namespace lcpool {

void TrainConfig::validate() const {
  require(max_epochs > 0 && patience > 0 && batch_size > 0 && lr > 0.0,
          ErrorCode::invalid_argument, "TrainConfig: epochs, patience, batch size and lr must be positive");
}

bool EarlyStopping::update(std::size_t epoch, double val_accuracy, double val_loss) {
  const bool better = val_accuracy > best_accuracy_ ||
                      (val_accuracy == best_accuracy_ && val_loss < best_loss_);
  if (better) {
    best_epoch_ = epoch;
    best_accuracy_ = val_accuracy;
    best_loss_ = val_loss;
  }
  return better;
}

double accuracy(const DenseMatrix& logits, std::span<const std::size_t> labels) {
  require(logits.rows() == labels.size(), ErrorCode::shape_mismatch,
          "accuracy: one label per row required");
  if (labels.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    auto r = logits.row(i);
    const auto best = static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin());
    hits += best == labels[i];
  }
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

namespace {

std::vector<GraphBatch> batches(const Dataset& data, const std::vector<std::size_t>& order,
                                std::size_t batch_size) {
  std::vector<GraphBatch> out;
  std::vector<const Graph*> chunk;
  for (std::size_t i = 0; i < order.size(); i += batch_size) {
    chunk.clear();
    for (std::size_t j = i; j < std::min(order.size(), i + batch_size); ++j)
      chunk.push_back(&data.graphs[order[j]]);
    out.push_back(make_batch(std::span<const Graph* const>(chunk)));
  }
  return out;
}

}  // namespace

Evaluation evaluate(const Model& model, const Dataset& data, std::size_t batch_size) {
  require(data.size() > 0, ErrorCode::invalid_argument, "evaluate: empty dataset");
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  double hits = 0.0, loss = 0.0;
  for (const GraphBatch& b : batches(data, order, batch_size)) {
    Tape tape;
    auto out = model.forward(tape, b);
    const double n = static_cast<double>(b.graph_count);
    hits += accuracy(out.logits.value(), b.labels) * n;
    loss += cross_entropy(out.logits, b.labels).value()(0, 0) * n;
  }
  const double n = static_cast<double>(data.size());
  return {hits / n, loss / n};
}

RunRecord train(Model& model, const DatasetSplit& split, const TrainConfig& cfg,
                const std::string& dataset_name) {
  cfg.validate();
  require(split.train.size() > 0 && split.val.size() > 0 && split.test.size() > 0,
          ErrorCode::invalid_argument, "train: every split must be non-empty");
  const auto start = std::chrono::steady_clock::now();

  ParameterSet& params = model.params();
  Adam adam(params, AdamConfig{cfg.lr, 0.9, 0.999, 1e-8});
  Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  EarlyStopping stopper(cfg.patience);
  std::vector<DenseMatrix> best = params.snapshot();

  std::vector<std::size_t> order(split.train.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t epoch = 1;
  for (; epoch <= cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (const GraphBatch& b : batches(split.train, order, cfg.batch_size)) {
      params.zero_grad();
      try {
        Tape tape;
        auto out = model.forward(tape, b);
        Tensor loss = cross_entropy(out.logits, b.labels);
        tape.backward(loss);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::numeric) throw;
        fail(ErrorCode::numeric, "train: divergence in epoch " + std::to_string(epoch) + " on " +
                                     dataset_name + ": " + e.what());
      }
      adam.step();
    }
    const Evaluation val = evaluate(model, split.val, cfg.batch_size);
    if (stopper.update(epoch, val.accuracy, val.loss)) best = params.snapshot();
    if (stopper.should_stop(epoch)) break;
  }

  RunRecord rec;
  rec.model = model.config();
  rec.dataset = dataset_name;
  rec.run_seed = cfg.seed;
  rec.best_epoch = stopper.best_epoch();
  rec.stop_epoch = std::min(epoch, cfg.max_epochs);
  params.restore(best);
  rec.test_accuracy = evaluate(model, split.test, cfg.batch_size).accuracy;
  rec.stalled = rec.best_epoch <= 1;
  rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

std::vector<RunRecord> evaluate_suite(const std::vector<ModelConfig>& models,
                                      const std::vector<const Dataset*>& datasets,
                                      std::size_t runs, const TrainConfig& cfg,
                                      std::size_t threads, const RunCallback& on_done) {
  require(runs >= 1, ErrorCode::invalid_argument, "evaluate_suite: runs must be >= 1");
  cfg.validate();
  struct Job {
    const ModelConfig* model;
    const Dataset* data;
    std::size_t run;
  };
  std::vector<Job> jobs;
  for (const Dataset* d : datasets)
    for (const ModelConfig& m : models)
      for (std::size_t r = 0; r < runs; ++r) jobs.push_back({&m, d, r});

  std::vector<RunRecord> results(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex mutex;
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      try {
        const Job& job = jobs[j];
        TrainConfig run_cfg = cfg;
        run_cfg.seed = cfg.seed + job.run;
        const DatasetSplit parts = split(*job.data, cfg.split, run_cfg.seed);
        Model model = build_model(*job.model, *job.data, run_cfg.seed);
        results[j] = train(model, parts, run_cfg, job.data->name);
        if (on_done) {
          std::lock_guard lock(mutex);
          on_done(results[j]);
        }
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!error) error = std::current_exception();
        next = jobs.size();
      }
    }
  };
  const std::size_t n_threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(1, jobs.size()));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return results;
}

}  // namespace lcpool
