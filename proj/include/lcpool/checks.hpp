#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

// Self-contained verification suites: each compares the library against an
// independent dense or hand-computed oracle. Used by the acceptance test and
// by `lcpool selftest`.
namespace lcpool::checks {

enum class Status { pass, fail, skip };

struct CheckResult {
  int id = 0;
  std::string name;
  Status status = Status::fail;
  /// An optional check never fails the suite; its outcome is still reported.
  bool optional = false;
  std::string detail;
  double seconds = 0.0;
};

std::string to_string(Status s);

struct Options {
  std::uint64_t seed = 0;
  /// Directory with TUDataset folders; empty skips the dataset check.
  std::string data_root;
  /// Learning check workload.
  std::size_t learning_graphs = 200;
  std::size_t learning_runs = 3;
  std::size_t learning_max_epochs = 200;
  /// Worker threads for the optional long-running check.
  std::size_t threads = 1;
};

CheckResult selected_block_oracle(const Options& opt);
CheckResult identity_assignment_equivalence(const Options& opt);
CheckResult hop_closure_patterns(const Options& opt);
CheckResult edge_preservation(const Options& opt);
CheckResult gradient_suite(const Options& opt);
CheckResult difference_cancellation(const Options& opt);
CheckResult small_scale_learning(const Options& opt);
CheckResult ranking_fixture(const Options& opt);
CheckResult proteins_reference(const Options& opt);
CheckResult size_adaptivity(const Options& opt);

using Progress = std::function<void(const CheckResult&)>;

/// Runs checks 1..10 in order; `progress` is called after each one.
std::vector<CheckResult> run_all(const Options& opt, const Progress& progress = {});

/// True when no non-optional check failed.
bool suite_passed(const std::vector<CheckResult>& results);

/// "PASS [3] name (1.23 s): detail"
std::string format(const CheckResult& r);

}  // namespace lcpool::checks
