#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <tuple>

#include <nlohmann/json.hpp>

#include "lcpool/errors.hpp"
#include "lcpool/harness.hpp"

namespace lcpool {

using nlohmann::json;

std::vector<Summary> summarize(const std::vector<RunRecord>& records) {
  std::vector<Summary> out;
  for (const RunRecord& r : records) {
    const std::string backbone = backbone_label(r.model);
    const std::string pool = to_string(r.model.pool);
    auto it = std::find_if(out.begin(), out.end(), [&](const Summary& s) {
      return s.backbone == backbone && s.pool == pool && s.dataset == r.dataset;
    });
    if (it == out.end()) {
      out.push_back({backbone, pool, r.dataset, {}, 0.0, 0.0});
      it = out.end() - 1;
    }
    it->values.push_back(r.test_accuracy);
  }
  for (Summary& s : out) {
    const double n = static_cast<double>(s.values.size());
    double m = 0.0;
    for (double v : s.values) m += v;
    m /= n;
    double var = 0.0;
    for (double v : s.values) var += (v - m) * (v - m);
    s.mean = m;
    s.stddev = std::sqrt(var / n);
  }
  return out;
}

double RankingTable::at(const std::string& backbone, const std::string& pool) const {
  auto it = average_rank.find({backbone, pool});
  require(it != average_rank.end(), ErrorCode::invalid_argument,
          "RankingTable: no rank for " + backbone + " / " + pool);
  return it->second;
}

RankingTable rank_entries(const std::vector<AccuracyEntry>& entries) {
  RankingTable table;
  auto remember = [](std::vector<std::string>& v, const std::string& s) {
    if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
  };
  std::vector<std::string> datasets;
  for (const auto& e : entries) {
    remember(table.backbones, e.backbone);
    remember(table.pools, e.pool);
    remember(datasets, e.dataset);
  }
  std::map<std::pair<std::string, std::string>, std::pair<double, std::size_t>> sums;
  for (const auto& backbone : table.backbones) {
    for (const auto& dataset : datasets) {
      std::vector<const AccuracyEntry*> group;
      for (const auto& e : entries)
        if (e.backbone == backbone && e.dataset == dataset) {
          require(std::none_of(group.begin(), group.end(),
                               [&](const AccuracyEntry* g) { return g->pool == e.pool; }),
                  ErrorCode::invalid_argument,
                  "rank: duplicate entry for " + backbone + " / " + e.pool + " / " + dataset);
          group.push_back(&e);
        }
      std::sort(group.begin(), group.end(), [](const AccuracyEntry* a, const AccuracyEntry* b) {
        return a->accuracy > b->accuracy;
      });
      // Equal accuracies share the mean of the ranks they span.
      for (std::size_t i = 0; i < group.size();) {
        std::size_t j = i;
        while (j < group.size() && group[j]->accuracy == group[i]->accuracy) ++j;
        const double shared = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) {
          auto& s = sums[{backbone, group[k]->pool}];
          s.first += shared;
          ++s.second;
        }
        i = j;
      }
    }
  }
  for (const auto& [key, s] : sums) table.average_rank[key] = s.first / static_cast<double>(s.second);
  return table;
}

RankingTable rank(const std::vector<RunRecord>& records) {
  std::vector<AccuracyEntry> entries;
  for (const Summary& s : summarize(records))
    entries.push_back({s.backbone, s.pool, s.dataset, s.mean});
  return rank_entries(entries);
}

// ---------------------------------------------------------------------------
// JSON

namespace {

json to_json(const ModelConfig& m) {
  return json{{"backbone", to_string(m.backbone)},
              {"conv", to_string(m.conv)},
              {"pool", to_string(m.pool)},
              {"hidden", m.hidden},
              {"ratio", m.ratio},
              {"pre_mlp", m.pre_mlp},
              {"post_mlp", m.post_mlp},
              {"blocks", m.blocks},
              {"dense_clusters", m.dense_clusters}};
}

ModelConfig model_from_json(const json& j) {
  ModelConfig m;
  m.backbone = parse_backbone(j.at("backbone").get<std::string>());
  m.conv = parse_conv(j.at("conv").get<std::string>());
  m.pool = parse_pool(j.at("pool").get<std::string>());
  m.hidden = j.at("hidden").get<std::size_t>();
  m.ratio = j.at("ratio").get<double>();
  m.pre_mlp = j.at("pre_mlp").get<std::vector<std::size_t>>();
  m.post_mlp = j.at("post_mlp").get<std::vector<std::size_t>>();
  m.blocks = j.at("blocks").get<std::size_t>();
  m.dense_clusters = j.at("dense_clusters").get<std::size_t>();
  return m;
}

}  // namespace

void write_results_json(std::ostream& os, const std::vector<RunRecord>& records) {
  json arr = json::array();
  for (const RunRecord& r : records) {
    arr.push_back(json{{"model", to_json(r.model)},
                       {"dataset", r.dataset},
                       {"run_seed", r.run_seed},
                       {"test_accuracy", r.test_accuracy},
                       {"best_epoch", r.best_epoch},
                       {"stop_epoch", r.stop_epoch},
                       {"wall_time", r.wall_time},
                       {"stalled", r.stalled}});
  }
  json summaries = json::array();
  for (const Summary& s : summarize(records))
    summaries.push_back(json{{"backbone", s.backbone},
                             {"pool", s.pool},
                             {"dataset", s.dataset},
                             {"mean", s.mean},
                             {"std", s.stddev},
                             {"values", s.values}});
  const json doc{{"format", "lcpool-results"},
                 {"version", 1},
                 {"records", std::move(arr)},
                 {"summary", std::move(summaries)}};
  os << doc.dump(2) << '\n';
  require(static_cast<bool>(os), ErrorCode::io, "write_results_json: write failed");
}

std::vector<RunRecord> read_results_json(std::istream& is) {
  json doc;
  try {
    doc = json::parse(is);
  } catch (const json::exception& e) {
    fail(ErrorCode::format, std::string("read_results_json: ") + e.what());
  }
  std::vector<RunRecord> out;
  try {
    require(doc.value("format", "") == "lcpool-results", ErrorCode::format,
            "read_results_json: not an lcpool results file");
    for (const json& j : doc.at("records")) {
      RunRecord r;
      r.model = model_from_json(j.at("model"));
      r.dataset = j.at("dataset").get<std::string>();
      r.run_seed = j.at("run_seed").get<std::uint64_t>();
      r.test_accuracy = j.at("test_accuracy").get<double>();
      r.best_epoch = j.at("best_epoch").get<std::size_t>();
      r.stop_epoch = j.at("stop_epoch").get<std::size_t>();
      r.wall_time = j.at("wall_time").get<double>();
      r.stalled = j.at("stalled").get<bool>();
      require(r.test_accuracy >= 0.0 && r.test_accuracy <= 1.0, ErrorCode::format,
              "read_results_json: accuracy outside [0, 1]");
      out.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::format, std::string("read_results_json: ") + e.what());
  }
  return out;
}

void save_results_json(const std::filesystem::path& path, const std::vector<RunRecord>& records) {
  std::ofstream os(path);
  require(static_cast<bool>(os), ErrorCode::io, "cannot write " + path.string());
  write_results_json(os, records);
}

std::vector<RunRecord> load_results_json(const std::filesystem::path& path) {
  std::ifstream is(path);
  require(static_cast<bool>(is), ErrorCode::io, "cannot open " + path.string());
  return read_results_json(is);
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

void write_summary_csv(std::ostream& os, const std::vector<Summary>& summaries) {
  os << "backbone,pool,dataset,runs,mean,std,values\n";
  for (const Summary& s : summaries) {
    os << s.backbone << ',' << s.pool << ',' << s.dataset << ',' << s.values.size() << ','
       << fixed(s.mean, 4) << ',' << fixed(s.stddev, 4) << ',';
    for (std::size_t i = 0; i < s.values.size(); ++i) os << (i ? ";" : "") << fixed(s.values[i], 4);
    os << '\n';
  }
  require(static_cast<bool>(os), ErrorCode::io, "write_summary_csv: write failed");
}

void write_ranking_csv(std::ostream& os, const RankingTable& table) {
  os << "backbone";
  for (const auto& p : table.pools) os << ',' << p;
  os << '\n';
  for (const auto& b : table.backbones) {
    os << b;
    for (const auto& p : table.pools) {
      os << ',';
      if (auto it = table.average_rank.find({b, p}); it != table.average_rank.end())
        os << fixed(it->second, 2);
    }
    os << '\n';
  }
  require(static_cast<bool>(os), ErrorCode::io, "write_ranking_csv: write failed");
}

}  // namespace lcpool
