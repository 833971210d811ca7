// lcpool command-line front end. Uses only the C interface of liblcpool.
#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lcpool/lcpool.h"

namespace {

struct LcpFailure {
  lcp_status status;
};

void check(lcp_status s, const char* what) {
  if (s == LCP_OK) return;
  std::fprintf(stderr, "lcpool: %s failed (%s): %s\n", what, lcp_status_string(s), lcp_last_error());
  throw LcpFailure{s};
}

// CLI11 only reads config files attached to the top-level app, so the
// subcommand --config is expanded here: each key=value line becomes
// "--key value" unless the same flag was given on the command line.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string file;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) file = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) file = args[i].substr(9);
  }
  if (file.empty() || args.empty()) return args;
  auto given = [&](const std::string& flag) {
    for (const auto& a : args)
      if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
    return false;
  };
  std::vector<std::string> extra;
  for (const CLI::ConfigItem& item : CLI::ConfigINI().from_file(file)) {
    std::string name = item.name;
    for (char& c : name)
      if (c == '_') c = '-';
    const std::string flag = "--" + name;
    if (name == "config" || given(flag)) continue;
    extra.push_back(flag);
    extra.insert(extra.end(), item.inputs.begin(), item.inputs.end());
  }
  args.insert(args.begin() + 1, extra.begin(), extra.end());
  return args;
}

std::string real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct TrainArgs {
  std::string dataset;
  std::string data_root = "data";
  std::size_t graphs = 200;
  std::string backbone = "h";
  std::string conv = "gcn";
  std::string pool = "lcpool";
  double ratio = 0.5;
  std::size_t runs = 10;
  std::uint64_t seed = 0;
  std::size_t max_epochs = 500;
  std::size_t patience = 50;
  std::size_t batch_size = 32;
  double lr = 0.0005;
  std::size_t hidden = 128;
  std::size_t threads = 1;
  std::string out = "results.json";
  std::string summary_csv;
};

void on_run(const lcp_run_info* run, void*) {
  std::printf("%s %s/%s/%s seed %llu: test accuracy %.4f (best epoch %zu, stopped at %zu, %.1f s)\n",
              run->dataset, run->backbone, run->conv, run->pool,
              static_cast<unsigned long long>(run->run_seed), run->test_accuracy, run->best_epoch,
              run->stop_epoch, run->wall_time);
  if (run->stalled)
    std::printf("warning: seed %llu never improved on validation after epoch 1; results may "
                "reflect an untrained model\n",
                static_cast<unsigned long long>(run->run_seed));
  std::fflush(stdout);
}

int run_train(const TrainArgs& a) {
  lcp_dataset* data = nullptr;
  lcp_experiment* exp = nullptr;
  lcp_results* results = nullptr;
  int rc = 0;
  try {
    check(lcp_dataset_load(a.dataset.c_str(), a.data_root.c_str(), a.graphs, a.seed, &data),
          "loading dataset");
    lcp_dataset_info info{};
    check(lcp_dataset_get_info(data, &info), "reading dataset info");
    std::printf("dataset %s: %zu graphs, %zu classes, %zu features, %.2f nodes on average\n",
                info.name, info.graphs, info.classes, info.feature_dim, info.average_nodes);

    check(lcp_experiment_create(&exp), "creating experiment");
    auto set = [&](const char* key, const std::string& value) {
      check(lcp_experiment_set(exp, key, value.c_str()), key);
    };
    set("backbone", a.backbone);
    set("conv", a.conv);
    set("pool", a.pool);
    set("ratio", real(a.ratio));
    set("hidden", std::to_string(a.hidden));
    set("runs", std::to_string(a.runs));
    set("seed", std::to_string(a.seed));
    set("max_epochs", std::to_string(a.max_epochs));
    set("patience", std::to_string(a.patience));
    set("batch_size", std::to_string(a.batch_size));
    set("lr", real(a.lr));
    set("threads", std::to_string(a.threads));

    check(lcp_experiment_run(exp, data, on_run, nullptr, &results), "training");
    check(lcp_results_save(results, a.out.c_str()), "writing results");
    if (!a.summary_csv.empty())
      check(lcp_results_write_summary_csv(results, a.summary_csv.c_str()), "writing summary");

    std::size_t n = 0;
    check(lcp_results_summary_count(results, &n), "summarising");
    for (std::size_t i = 0; i < n; ++i) {
      lcp_summary_info s{};
      check(lcp_results_summary_get(results, i, &s), "summarising");
      std::printf("%s %s on %s: %.2f +/- %.2f over %zu runs\n", s.backbone, s.pool, s.dataset,
                  100.0 * s.mean, 100.0 * s.stddev, s.runs);
    }
    std::printf("results written to %s\n", a.out.c_str());
  } catch (const LcpFailure&) {
    rc = 1;
  }
  lcp_results_free(results);
  lcp_experiment_free(exp);
  lcp_dataset_free(data);
  return rc;
}

int run_rank(const std::vector<std::string>& inputs, const std::string& out) {
  lcp_results* results = nullptr;
  int rc = 0;
  try {
    check(lcp_results_create(&results), "creating results");
    for (const auto& in : inputs) check(lcp_results_load(results, in.c_str()), in.c_str());
    check(lcp_results_write_ranking_csv(results, out.c_str()), "writing ranking");
    std::ifstream written(out);
    std::cout << written.rdbuf();
  } catch (const LcpFailure&) {
    rc = 1;
  }
  lcp_results_free(results);
  return rc;
}

void on_check(const lcp_check_info* c, void*) {
  std::printf("%s\n", c->line);
  std::fflush(stdout);
}

int run_selftest(std::uint64_t seed, const std::string& data_root, const std::vector<int>& only) {
  std::uint32_t mask = 0;
  for (int id : only) mask |= 1u << (id - 1);
  int passed = 0;
  try {
    check(lcp_selftest(seed, data_root.empty() ? nullptr : data_root.c_str(), mask, on_check,
                       nullptr, &passed),
          "selftest");
  } catch (const LcpFailure&) {
    return 1;
  }
  std::printf("selftest %s\n", passed ? "passed" : "FAILED");
  return passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph classification with local cluster pooling"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(lcp_version()));

  std::string config_file;  // consumed by expand_config
  TrainArgs t;
  CLI::App* train = app.add_subcommand("train", "Train and evaluate a model over several runs");
  train->add_option("--config", config_file, "key=value file supplying any option; flags override it");
  train->add_option("--dataset", t.dataset, "TUDataset name or synthetic:<kind>")->required();
  train->add_option("--data-root", t.data_root, "Directory holding TUDataset folders")
      ->capture_default_str();
  train->add_option("--graphs", t.graphs, "Graph count for synthetic datasets")
      ->capture_default_str();
  train->add_option("--backbone", t.backbone, "h (hierarchical) or p (plain)")
      ->check(CLI::IsMember({"h", "p", "hierarchical", "plain"}))
      ->capture_default_str();
  train->add_option("--conv", t.conv, "Graph convolution")
      ->check(CLI::IsMember({"gcn", "graphconv"}))
      ->capture_default_str();
  train->add_option("--pool", t.pool, "Pooling operator")
      ->check(CLI::IsMember({"nopool", "topk", "sag", "dense", "lcpool", "lcpool-star"}))
      ->capture_default_str();
  train->add_option("--ratio", t.ratio, "Fraction of nodes kept per pooling stage")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  train->add_option("--runs", t.runs, "Independent runs (seeds seed..seed+runs-1)")
      ->capture_default_str();
  train->add_option("--seed", t.seed, "Base seed")->capture_default_str();
  train->add_option("--max-epochs", t.max_epochs)->capture_default_str();
  train->add_option("--patience", t.patience)->capture_default_str();
  train->add_option("--batch-size", t.batch_size)->capture_default_str();
  train->add_option("--lr", t.lr)->capture_default_str();
  train->add_option("--hidden", t.hidden)->capture_default_str();
  train->add_option("--threads", t.threads, "Runs trained concurrently")->capture_default_str();
  train->add_option("--out", t.out, "Results JSON")->capture_default_str();
  train->add_option("--summary-csv", t.summary_csv, "Also write mean/std/per-run CSV");

  std::vector<std::string> rank_in;
  std::string rank_out = "ranking.csv";
  CLI::App* rank = app.add_subcommand("rank", "Average rank of pooling approaches per backbone");
  rank->add_option("--config", config_file, "key=value file supplying any option; flags override it");
  rank->add_option("--in", rank_in, "Results JSON file(s)")->required()->check(CLI::ExistingFile);
  rank->add_option("--out", rank_out, "Ranking CSV")->capture_default_str();

  std::uint64_t self_seed = 0;
  std::string self_root;
  if (const char* env = std::getenv("LCPOOL_DATA_ROOT")) self_root = env;
  std::vector<int> only;
  CLI::App* selftest = app.add_subcommand("selftest", "Run the oracle and property suites");
  selftest->add_option("--config", config_file, "key=value file supplying any option; flags override it");
  selftest->add_option("--seed", self_seed)->capture_default_str();
  selftest->add_option("--data-root", self_root,
                       "TUDataset directory for the optional PROTEINS check (or LCPOOL_DATA_ROOT)");
  selftest->add_option("--only", only, "Check ids to run (1-10)")
      ->check(CLI::Range(1, 10))
      ->delimiter(',');

  try {
    std::vector<std::string> args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (train->parsed()) return run_train(t);
  if (rank->parsed()) return run_rank(rank_in, rank_out);
  return run_selftest(self_seed, self_root, only);
}
