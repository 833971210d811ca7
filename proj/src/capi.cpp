#include "lcpool/lcpool.h"

#include <algorithm>
#include <charconv>
#include <deque>
#include <exception>
#include <fstream>
#include <memory>
#include <new>
#include <string>
#include <string_view>
#include <vector>

#include "lcpool/checks.hpp"
#include "lcpool/errors.hpp"
#include "lcpool/harness.hpp"

struct lcp_dataset {
  lcpool::Dataset data;
};

struct lcp_experiment {
  lcpool::ModelConfig model;
  lcpool::TrainConfig train;
  std::size_t runs = 10;
  std::size_t threads = 1;
};

struct lcp_results {
  std::vector<lcpool::RunRecord> records;
  // Backing storage for the strings handed out through lcp_run_info and
  // lcp_summary_info. A deque keeps earlier c_str() pointers valid.
  mutable std::deque<std::string> strings;
  mutable std::vector<lcpool::Summary> summaries;

  const char* keep(std::string s) const { return strings.emplace_back(std::move(s)).c_str(); }
};

namespace {

thread_local std::string last_error;

lcp_status set_error(lcp_status status, const std::string& msg) {
  last_error = msg;
  return status;
}

lcp_status to_status(lcpool::ErrorCode code) { return static_cast<lcp_status>(code); }

// Runs `fn`, mapping exceptions onto status codes.
template <typename Fn>
lcp_status guarded(Fn&& fn) {
  try {
    fn();
    return LCP_OK;
  } catch (const lcpool::Error& e) {
    return set_error(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(LCP_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(LCP_INTERNAL, e.what());
  } catch (...) {
    return set_error(LCP_INTERNAL, "unknown error");
  }
}

void require_arg(bool cond, const char* what) {
  lcpool::require(cond, lcpool::ErrorCode::invalid_argument, what);
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T v{};
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  lcpool::require(ec == std::errc() && end == text.data() + text.size() && !text.empty(),
                  lcpool::ErrorCode::invalid_argument,
                  "invalid value '" + std::string(text) + "' for " + std::string(key));
  return v;
}

std::size_t parse_positive(std::string_view key, std::string_view text) {
  const auto v = parse_number<std::size_t>(key, text);
  lcpool::require(v > 0, lcpool::ErrorCode::invalid_argument, std::string(key) + " must be positive");
  return v;
}

lcp_run_info run_info(const lcp_results& owner, const lcpool::RunRecord& r) {
  lcp_run_info info{};
  info.dataset = owner.keep(r.dataset);
  info.backbone = owner.keep(lcpool::to_string(r.model.backbone));
  info.conv = owner.keep(lcpool::to_string(r.model.conv));
  info.pool = owner.keep(lcpool::to_string(r.model.pool));
  info.run_seed = r.run_seed;
  info.test_accuracy = r.test_accuracy;
  info.best_epoch = r.best_epoch;
  info.stop_epoch = r.stop_epoch;
  info.wall_time = r.wall_time;
  info.stalled = r.stalled ? 1 : 0;
  return info;
}

}  // namespace

extern "C" {

const char* lcp_version(void) { return "1.0.0"; }

const char* lcp_status_string(lcp_status status) {
  switch (status) {
    case LCP_OK: return "ok";
    case LCP_INVALID_ARGUMENT: return "invalid argument";
    case LCP_SHAPE_MISMATCH: return "shape mismatch";
    case LCP_IO: return "i/o error";
    case LCP_FORMAT: return "format error";
    case LCP_PRECONDITION: return "precondition violated";
    case LCP_NUMERIC: return "numeric error";
    case LCP_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* lcp_last_error(void) { return last_error.c_str(); }

lcp_status lcp_dataset_load(const char* name, const char* data_root, size_t synthetic_graphs,
                            uint64_t seed, lcp_dataset** out) {
  return guarded([&] {
    require_arg(name && out, "lcp_dataset_load: name and out are required");
    *out = nullptr;
    const std::string_view n(name);
    constexpr std::string_view prefix = "synthetic:";
    auto handle = std::make_unique<lcp_dataset>();
    if (n.substr(0, prefix.size()) == prefix) {
      require_arg(synthetic_graphs > 0, "lcp_dataset_load: synthetic_graphs must be positive");
      handle->data = lcpool::make_synthetic(std::string(n.substr(prefix.size())), synthetic_graphs, seed);
    } else {
      require_arg(data_root && *data_root, "lcp_dataset_load: data_root is required for TUDataset names");
      handle->data = lcpool::load_tudataset(data_root, std::string(n));
    }
    *out = handle.release();
  });
}

void lcp_dataset_free(lcp_dataset* dataset) { delete dataset; }

lcp_status lcp_dataset_get_info(const lcp_dataset* dataset, lcp_dataset_info* info) {
  return guarded([&] {
    require_arg(dataset && info, "lcp_dataset_get_info: null argument");
    info->name = dataset->data.name.c_str();
    info->graphs = dataset->data.size();
    info->classes = dataset->data.num_classes;
    info->feature_dim = dataset->data.feature_dim;
    info->average_nodes = dataset->data.average_nodes();
  });
}

lcp_status lcp_experiment_create(lcp_experiment** out) {
  return guarded([&] {
    require_arg(out, "lcp_experiment_create: out is required");
    *out = new lcp_experiment();
  });
}

void lcp_experiment_free(lcp_experiment* experiment) { delete experiment; }

lcp_status lcp_experiment_set(lcp_experiment* e, const char* key_c, const char* value_c) {
  return guarded([&] {
    require_arg(e && key_c && value_c, "lcp_experiment_set: null argument");
    std::string key(key_c);
    std::replace(key.begin(), key.end(), '-', '_');
    const std::string value(value_c);
    if (key == "backbone") {
      e->model.backbone = lcpool::parse_backbone(value);
    } else if (key == "conv") {
      e->model.conv = lcpool::parse_conv(value);
    } else if (key == "pool") {
      e->model.pool = lcpool::parse_pool(value);
    } else if (key == "ratio") {
      const double r = parse_number<double>(key, value);
      static_cast<void>(lcpool::PoolRatio(r));
      e->model.ratio = r;
    } else if (key == "hidden") {
      e->model.hidden = parse_positive(key, value);
    } else if (key == "runs") {
      e->runs = parse_positive(key, value);
    } else if (key == "seed") {
      e->train.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "max_epochs") {
      e->train.max_epochs = parse_positive(key, value);
    } else if (key == "patience") {
      e->train.patience = parse_positive(key, value);
    } else if (key == "batch_size") {
      e->train.batch_size = parse_positive(key, value);
    } else if (key == "lr") {
      const double lr = parse_number<double>(key, value);
      require_arg(lr > 0.0, "lr must be positive");
      e->train.lr = lr;
    } else if (key == "threads") {
      e->threads = parse_positive(key, value);
    } else {
      lcpool::fail(lcpool::ErrorCode::invalid_argument, "unknown experiment key '" + key + "'");
    }
  });
}

lcp_status lcp_experiment_run(const lcp_experiment* e, const lcp_dataset* dataset,
                              lcp_run_callback callback, void* user, lcp_results** out) {
  return guarded([&] {
    require_arg(e && dataset && out, "lcp_experiment_run: null argument");
    lcpool::ModelConfig model = e->model;
    model.validate();
    std::unique_ptr<lcp_results> fresh;
    lcp_results* target = *out;
    if (!target) {
      fresh = std::make_unique<lcp_results>();
      target = fresh.get();
    }
    lcpool::RunCallback on_done;
    if (callback)
      on_done = [&](const lcpool::RunRecord& r) {
        const lcp_run_info info = run_info(*target, r);
        callback(&info, user);
      };
    auto records = lcpool::evaluate_suite({model}, {&dataset->data}, e->runs, e->train,
                                          e->threads, on_done);
    target->records.insert(target->records.end(), records.begin(), records.end());
    if (fresh) *out = fresh.release();
  });
}

lcp_status lcp_results_create(lcp_results** out) {
  return guarded([&] {
    require_arg(out, "lcp_results_create: out is required");
    *out = new lcp_results();
  });
}

void lcp_results_free(lcp_results* results) { delete results; }

lcp_status lcp_results_load(lcp_results* results, const char* path) {
  return guarded([&] {
    require_arg(results && path, "lcp_results_load: null argument");
    auto records = lcpool::load_results_json(path);
    results->records.insert(results->records.end(), records.begin(), records.end());
  });
}

lcp_status lcp_results_save(const lcp_results* results, const char* path) {
  return guarded([&] {
    require_arg(results && path, "lcp_results_save: null argument");
    lcpool::save_results_json(path, results->records);
  });
}

lcp_status lcp_results_count(const lcp_results* results, size_t* count) {
  return guarded([&] {
    require_arg(results && count, "lcp_results_count: null argument");
    *count = results->records.size();
  });
}

lcp_status lcp_results_get(const lcp_results* results, size_t index, lcp_run_info* info) {
  return guarded([&] {
    require_arg(results && info, "lcp_results_get: null argument");
    require_arg(index < results->records.size(), "lcp_results_get: index out of range");
    *info = run_info(*results, results->records[index]);
  });
}

lcp_status lcp_results_summary_count(const lcp_results* results, size_t* count) {
  return guarded([&] {
    require_arg(results && count, "lcp_results_summary_count: null argument");
    results->summaries = lcpool::summarize(results->records);
    *count = results->summaries.size();
  });
}

lcp_status lcp_results_summary_get(const lcp_results* results, size_t index,
                                   lcp_summary_info* info) {
  return guarded([&] {
    require_arg(results && info, "lcp_results_summary_get: null argument");
    results->summaries = lcpool::summarize(results->records);
    require_arg(index < results->summaries.size(), "lcp_results_summary_get: index out of range");
    const lcpool::Summary& s = results->summaries[index];
    info->backbone = results->keep(s.backbone);
    info->pool = results->keep(s.pool);
    info->dataset = results->keep(s.dataset);
    info->runs = s.values.size();
    info->mean = s.mean;
    info->stddev = s.stddev;
  });
}

lcp_status lcp_results_write_summary_csv(const lcp_results* results, const char* path) {
  return guarded([&] {
    require_arg(results && path, "lcp_results_write_summary_csv: null argument");
    std::ofstream os(path);
    lcpool::require(static_cast<bool>(os), lcpool::ErrorCode::io, std::string("cannot write ") + path);
    lcpool::write_summary_csv(os, lcpool::summarize(results->records));
  });
}

lcp_status lcp_results_write_ranking_csv(const lcp_results* results, const char* path) {
  return guarded([&] {
    require_arg(results && path, "lcp_results_write_ranking_csv: null argument");
    std::ofstream os(path);
    lcpool::require(static_cast<bool>(os), lcpool::ErrorCode::io, std::string("cannot write ") + path);
    lcpool::write_ranking_csv(os, lcpool::rank(results->records));
  });
}

lcp_status lcp_selftest(uint64_t seed, const char* data_root, uint32_t mask,
                        lcp_check_callback callback, void* user, int* passed) {
  return guarded([&] {
    namespace ck = lcpool::checks;
    ck::Options opt;
    opt.seed = seed;
    if (data_root) opt.data_root = data_root;
    using Fn = ck::CheckResult (*)(const ck::Options&);
    const Fn fns[] = {ck::selected_block_oracle,        ck::identity_assignment_equivalence,
                      ck::hop_closure_patterns, ck::edge_preservation,
                      ck::gradient_suite,       ck::difference_cancellation,
                      ck::small_scale_learning,  ck::ranking_fixture,
                      ck::proteins_reference,   ck::size_adaptivity};
    lcpool::require((mask >> std::size(fns)) == 0, lcpool::ErrorCode::invalid_argument,
                    "selftest mask selects an unknown check");
    std::vector<ck::CheckResult> results;
    for (std::size_t i = 0; i < std::size(fns); ++i) {
      if (mask != 0 && !(mask & (1u << i))) continue;
      results.push_back(fns[i](opt));
      if (callback) {
        const ck::CheckResult& r = results.back();
        const std::string line = ck::format(r);
        lcp_check_info info{r.id,
                            r.name.c_str(),
                            static_cast<lcp_check_status>(r.status),
                            r.optional ? 1 : 0,
                            r.detail.c_str(),
                            r.seconds,
                            line.c_str()};
        callback(&info, user);
      }
    }
    if (passed) *passed = ck::suite_passed(results) ? 1 : 0;
  });
}

}  // extern "C"
