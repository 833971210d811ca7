#include "lcpool/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "lcpool/errors.hpp"

namespace lcpool {

namespace fs = std::filesystem;

Graph::Graph(DenseMatrix x, CsrMatrix a, std::size_t label)
    : x_(std::move(x)), a_(std::move(a)), label_(label) {
  require(x_.rows() > 0, ErrorCode::invalid_argument, "Graph: a graph needs at least one node");
  require(a_.is_square() && a_.n_rows() == x_.rows(), ErrorCode::shape_mismatch,
          "Graph: adjacency must be num_nodes x num_nodes");
  require(x_.all_finite(), ErrorCode::numeric, "Graph: non-finite node feature");
  for (std::size_t r = 0; r < a_.n_rows(); ++r)
    require(!a_.contains(r, r), ErrorCode::invalid_argument, "Graph: self-loop on node " +
                                                                 std::to_string(r));
  require(a_.all_values_equal(1.0), ErrorCode::invalid_argument, "Graph: weighted adjacency");
}

double Dataset::average_nodes() const {
  if (graphs.empty()) return 0.0;
  double total = 0.0;
  for (const auto& g : graphs) total += static_cast<double>(g.num_nodes());
  return total / static_cast<double>(graphs.size());
}

CsrMatrix undirected_adjacency(std::size_t n,
                               std::span<const std::array<std::size_t, 2>> edges) {
  std::vector<Triplet> t;
  t.reserve(edges.size() * 2);
  for (auto [i, j] : edges) {
    if (i == j) continue;
    t.push_back({i, j, 1.0});
    t.push_back({j, i, 1.0});
  }
  return ones_pattern(CsrMatrix::from_triplets(n, n, std::move(t)));
}

// ---------------------------------------------------------------------------
// TUDataset flat files

namespace {

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::io, "cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    lines.push_back(std::move(line));
  }
  return lines;
}

// Splits on commas and trims whitespace around each field.
std::vector<std::string_view> fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t end = line.find(',', start);
    std::string_view f = line.substr(start, end == std::string_view::npos ? end : end - start);
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    out.push_back(b == std::string_view::npos ? std::string_view{} : f.substr(b, e - b + 1));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

long long parse_int(std::string_view s, const fs::path& file, std::size_t line) {
  long long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  require(ec == std::errc{} && p == s.data() + s.size(), ErrorCode::format,
          file.filename().string() + ":" + std::to_string(line + 1) + ": expected integer, got '" +
              std::string(s) + "'");
  return v;
}

double parse_real(std::string_view s, const fs::path& file, std::size_t line) {
  // strtod rather than from_chars<double>: the latter is missing on older libstdc++.
  std::string tmp(s);
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  require(!tmp.empty() && end == tmp.c_str() + tmp.size() && std::isfinite(v), ErrorCode::format,
          file.filename().string() + ":" + std::to_string(line + 1) + ": expected real, got '" +
              tmp + "'");
  return v;
}

fs::path locate(const fs::path& root, const std::string& name) {
  if (fs::exists(root / (name + "_A.txt"))) return root;
  if (fs::exists(root / name / (name + "_A.txt"))) return root / name;
  fail(ErrorCode::io, "load_tudataset: " + name + "_A.txt not found under " + root.string());
}

}  // namespace

Dataset load_tudataset(const fs::path& root, const std::string& name) {
  const fs::path dir = locate(root, name);
  auto file = [&](const char* suffix) { return dir / (name + suffix); };

  const fs::path ind_path = file("_graph_indicator.txt");
  const fs::path lbl_path = file("_graph_labels.txt");
  const fs::path a_path = file("_A.txt");
  for (const auto& p : {ind_path, lbl_path})
    require(fs::exists(p), ErrorCode::io, "load_tudataset: missing mandatory file " + p.string());

  // Graph membership and local numbering.
  const auto ind_lines = read_lines(ind_path);
  const std::size_t n_nodes = ind_lines.size();
  std::vector<std::size_t> node_graph(n_nodes), node_local(n_nodes);
  const auto graph_lines = read_lines(lbl_path);
  const std::size_t n_graphs = graph_lines.size();
  std::vector<std::size_t> graph_size(n_graphs, 0);
  for (std::size_t k = 0; k < n_nodes; ++k) {
    const long long g = parse_int(fields(ind_lines[k]).front(), ind_path, k);
    require(g >= 1 && static_cast<std::size_t>(g) <= n_graphs, ErrorCode::format,
            ind_path.filename().string() + ":" + std::to_string(k + 1) + ": graph id " +
                std::to_string(g) + " outside 1.." + std::to_string(n_graphs));
    node_graph[k] = static_cast<std::size_t>(g - 1);
    node_local[k] = graph_size[node_graph[k]]++;
  }
  for (std::size_t g = 0; g < n_graphs; ++g)
    require(graph_size[g] > 0, ErrorCode::format,
            "load_tudataset: graph " + std::to_string(g + 1) + " has no nodes");

  // Edges, grouped per graph.
  std::vector<std::vector<std::array<std::size_t, 2>>> edges(n_graphs);
  const auto a_lines = read_lines(a_path);
  for (std::size_t l = 0; l < a_lines.size(); ++l) {
    const auto f = fields(a_lines[l]);
    require(f.size() == 2, ErrorCode::format,
            a_path.filename().string() + ":" + std::to_string(l + 1) + ": expected 'i, j'");
    const long long i = parse_int(f[0], a_path, l);
    const long long j = parse_int(f[1], a_path, l);
    for (long long v : {i, j})
      require(v >= 1 && static_cast<std::size_t>(v) <= n_nodes, ErrorCode::format,
              a_path.filename().string() + ":" + std::to_string(l + 1) + ": node " +
                  std::to_string(v) + " outside 1.." + std::to_string(n_nodes));
    const std::size_t ui = static_cast<std::size_t>(i - 1), uj = static_cast<std::size_t>(j - 1);
    require(node_graph[ui] == node_graph[uj], ErrorCode::format,
            a_path.filename().string() + ":" + std::to_string(l + 1) + ": edge " +
                std::to_string(i) + "-" + std::to_string(j) + " crosses graphs");
    edges[node_graph[ui]].push_back({node_local[ui], node_local[uj]});
  }

  // Graph labels remapped through their sorted unique values.
  std::vector<long long> raw_labels(n_graphs);
  for (std::size_t g = 0; g < n_graphs; ++g)
    raw_labels[g] = parse_int(fields(graph_lines[g]).front(), lbl_path, g);
  std::vector<long long> classes(raw_labels);
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());

  // Node features: one-hot(node label) ++ attributes, else a constant column.
  std::vector<std::size_t> node_label_code;
  std::size_t n_node_labels = 0;
  if (const fs::path p = file("_node_labels.txt"); fs::exists(p)) {
    const auto lines = read_lines(p);
    require(lines.size() == n_nodes, ErrorCode::format,
            p.filename().string() + ": expected one line per node");
    std::vector<long long> raw(n_nodes);
    for (std::size_t k = 0; k < n_nodes; ++k) raw[k] = parse_int(fields(lines[k]).front(), p, k);
    std::vector<long long> uniq(raw);
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    n_node_labels = uniq.size();
    node_label_code.resize(n_nodes);
    for (std::size_t k = 0; k < n_nodes; ++k)
      node_label_code[k] = static_cast<std::size_t>(
          std::lower_bound(uniq.begin(), uniq.end(), raw[k]) - uniq.begin());
  }
  std::vector<std::vector<double>> attrs;
  std::size_t attr_dim = 0;
  if (const fs::path p = file("_node_attributes.txt"); fs::exists(p)) {
    const auto lines = read_lines(p);
    require(lines.size() == n_nodes, ErrorCode::format,
            p.filename().string() + ": expected one line per node");
    attrs.resize(n_nodes);
    for (std::size_t k = 0; k < n_nodes; ++k) {
      for (auto f : fields(lines[k])) attrs[k].push_back(parse_real(f, p, k));
      if (k == 0) attr_dim = attrs[k].size();
      require(attrs[k].size() == attr_dim, ErrorCode::format,
              p.filename().string() + ":" + std::to_string(k + 1) + ": attribute width changes");
    }
  }
  const bool constant_feature = n_node_labels == 0 && attr_dim == 0;
  const std::size_t dim = constant_feature ? 1 : n_node_labels + attr_dim;

  std::vector<DenseMatrix> feats;
  feats.reserve(n_graphs);
  for (std::size_t g = 0; g < n_graphs; ++g) feats.emplace_back(graph_size[g], dim);
  for (std::size_t k = 0; k < n_nodes; ++k) {
    auto row = feats[node_graph[k]].row(node_local[k]);
    if (constant_feature) {
      row[0] = 1.0;
      continue;
    }
    if (n_node_labels > 0) row[node_label_code[k]] = 1.0;
    for (std::size_t c = 0; c < attr_dim; ++c) row[n_node_labels + c] = attrs[k][c];
  }

  Dataset ds;
  ds.name = name;
  ds.num_classes = classes.size();
  ds.feature_dim = dim;
  ds.graphs.reserve(n_graphs);
  for (std::size_t g = 0; g < n_graphs; ++g) {
    const auto label = static_cast<std::size_t>(
        std::lower_bound(classes.begin(), classes.end(), raw_labels[g]) - classes.begin());
    ds.graphs.emplace_back(std::move(feats[g]), undirected_adjacency(graph_size[g], edges[g]),
                           label);
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Batching

GraphBatch make_batch(std::span<const Graph* const> graphs) {
  require(!graphs.empty(), ErrorCode::invalid_argument, "make_batch: empty graph list");
  const std::size_t dim = graphs.front()->feature_dim();
  GraphBatch b;
  b.graph_count = graphs.size();
  b.node_offset.assign(1, 0);
  std::size_t total = 0;
  for (const Graph* g : graphs) {
    require(g->feature_dim() == dim, ErrorCode::shape_mismatch,
            "make_batch: feature_dim mismatch (" + std::to_string(g->feature_dim()) + " vs " +
                std::to_string(dim) + ")");
    total += g->num_nodes();
    b.node_offset.push_back(total);
  }
  b.x = DenseMatrix(total, dim);
  b.graph_id.resize(total);
  std::vector<std::size_t> row_ptr(total + 1, 0), col_idx;
  std::vector<double> values;
  for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
    const Graph& g = *graphs[gi];
    const std::size_t off = b.node_offset[gi];
    std::copy(g.x().data().begin(), g.x().data().end(), b.x.data().begin() + off * dim);
    for (std::size_t r = 0; r < g.num_nodes(); ++r) {
      b.graph_id[off + r] = gi;
      for (std::size_t c : g.a().row_cols(r)) col_idx.push_back(off + c);
      auto vals = g.a().row_values(r);
      values.insert(values.end(), vals.begin(), vals.end());
      row_ptr[off + r + 1] = col_idx.size();
    }
    b.labels.push_back(g.label());
  }
  b.a = CsrMatrix::from_raw(total, total, std::move(row_ptr), std::move(col_idx),
                            std::move(values));
  return b;
}

GraphBatch make_batch(std::span<const Graph> graphs) {
  std::vector<const Graph*> ptrs;
  ptrs.reserve(graphs.size());
  for (const auto& g : graphs) ptrs.push_back(&g);
  return make_batch(std::span<const Graph* const>(ptrs));
}

Graph slice_batch(const GraphBatch& batch, std::size_t g) {
  require(g < batch.graph_count, ErrorCode::invalid_argument, "slice_batch: graph out of range");
  const std::size_t lo = batch.node_offset[g], hi = batch.node_offset[g + 1];
  std::vector<std::size_t> rows(hi - lo);
  std::iota(rows.begin(), rows.end(), lo);
  const IndexSet idx(std::move(rows));
  return Graph(select_rows(batch.x, idx.view()), select_rows_cols(batch.a, idx),
               batch.labels[g]);
}

// ---------------------------------------------------------------------------
// Splits

DatasetSplit split(const Dataset& dataset, SplitRatios r, std::uint64_t seed) {
  require(r.train > 0 && r.val > 0 && r.test > 0, ErrorCode::invalid_argument,
          "split: ratios must be positive");
  require(std::abs(r.train + r.val + r.test - 1.0) <= 1e-9, ErrorCode::invalid_argument,
          "split: ratios must sum to 1");
  const std::size_t n = dataset.size();
  const auto n_val = static_cast<std::size_t>(std::floor(static_cast<double>(n) * r.val + 1e-9));
  const auto n_test =
      static_cast<std::size_t>(std::floor(static_cast<double>(n) * r.test + 1e-9));
  require(n_val > 0 && n_test > 0 && n_val + n_test < n, ErrorCode::invalid_argument,
          "split: a split would be empty for " + std::to_string(n) + " graphs");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  auto subset = [&](std::size_t lo, std::size_t hi, const char* suffix) {
    Dataset d;
    d.name = dataset.name + suffix;
    d.num_classes = dataset.num_classes;
    d.feature_dim = dataset.feature_dim;
    d.graphs.reserve(hi - lo);
    for (std::size_t i = lo; i < hi; ++i) d.graphs.push_back(dataset.graphs[order[i]]);
    return d;
  };
  const std::size_t n_train = n - n_val - n_test;
  return {subset(0, n_train, "/train"), subset(n_train, n_train + n_val, "/val"),
          subset(n_train + n_val, n, "/test")};
}

// ---------------------------------------------------------------------------
// Synthetic workloads

namespace {

Graph cycle_or_path(std::size_t k, bool cycle, std::size_t label) {
  std::vector<std::array<std::size_t, 2>> e;
  for (std::size_t i = 0; i + 1 < k; ++i) e.push_back({i, i + 1});
  if (cycle) e.push_back({k - 1, 0});
  return Graph(DenseMatrix(k, 1, 1.0), undirected_adjacency(k, e), label);
}

Graph two_blocks(std::mt19937_64& rng, std::size_t bridges, std::size_t label) {
  std::uniform_int_distribution<std::size_t> size_dist(5, 10);
  std::bernoulli_distribution keep(0.8);
  const std::size_t n1 = size_dist(rng), n2 = size_dist(rng), n = n1 + n2;
  std::vector<std::array<std::size_t, 2>> e;
  auto block = [&](std::size_t lo, std::size_t len) {
    // A spanning path keeps each block connected; the rest is dense random.
    for (std::size_t i = 0; i + 1 < len; ++i) e.push_back({lo + i, lo + i + 1});
    for (std::size_t i = 0; i < len; ++i)
      for (std::size_t j = i + 2; j < len; ++j)
        if (keep(rng)) e.push_back({lo + i, lo + j});
  };
  block(0, n1);
  block(n1, n2);
  std::uniform_int_distribution<std::size_t> left(0, n1 - 1), right(n1, n - 1);
  std::set<std::array<std::size_t, 2>> bridge;
  while (bridge.size() < bridges) bridge.insert({left(rng), right(rng)});
  e.insert(e.end(), bridge.begin(), bridge.end());
  return Graph(DenseMatrix(n, 1, 1.0), undirected_adjacency(n, e), label);
}

}  // namespace

Dataset make_synthetic(const std::string& kind, std::size_t n_graphs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Dataset ds;
  ds.name = "synthetic:" + kind;
  ds.num_classes = 2;
  ds.feature_dim = 1;
  ds.graphs.reserve(n_graphs);
  if (kind == "cycles_vs_paths") {
    std::uniform_int_distribution<std::size_t> len(6, 20);
    for (std::size_t i = 0; i < n_graphs; ++i) {
      const std::size_t label = i % 2;
      ds.graphs.push_back(cycle_or_path(len(rng), label == 0, label));
    }
  } else if (kind == "two_communities") {
    for (std::size_t i = 0; i < n_graphs; ++i) {
      const std::size_t label = i % 2;
      ds.graphs.push_back(two_blocks(rng, label == 0 ? 1 : 3, label));
    }
  } else {
    fail(ErrorCode::invalid_argument, "make_synthetic: unknown kind '" + kind + "'");
  }
  return ds;
}

}  // namespace lcpool
