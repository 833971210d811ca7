#include <cmath>

#include "lcpool/errors.hpp"
#include "lcpool/harness.hpp"

namespace lcpool {

std::string to_string(Backbone b) { return b == Backbone::hierarchical ? "hierarchical" : "plain"; }

std::string to_string(ConvKind c) { return c == ConvKind::gcn ? "gcn" : "graphconv"; }

std::string to_string(PoolKind p) {
  switch (p) {
    case PoolKind::nopool: return "nopool";
    case PoolKind::topk: return "topk";
    case PoolKind::sag: return "sag";
    case PoolKind::dense: return "dense";
    case PoolKind::lcpool: return "lcpool";
    case PoolKind::lcpool_star: return "lcpool-star";
  }
  return "?";
}

Backbone parse_backbone(const std::string& s) {
  if (s == "h" || s == "hierarchical") return Backbone::hierarchical;
  if (s == "p" || s == "plain") return Backbone::plain;
  fail(ErrorCode::invalid_argument, "unknown backbone '" + s + "'");
}

ConvKind parse_conv(const std::string& s) {
  if (s == "gcn") return ConvKind::gcn;
  if (s == "graphconv") return ConvKind::graphconv;
  fail(ErrorCode::invalid_argument, "unknown conv '" + s + "'");
}

PoolKind parse_pool(const std::string& s) {
  if (s == "nopool") return PoolKind::nopool;
  if (s == "topk") return PoolKind::topk;
  if (s == "sag") return PoolKind::sag;
  if (s == "dense") return PoolKind::dense;
  if (s == "lcpool") return PoolKind::lcpool;
  if (s == "lcpool-star" || s == "lcpool_star") return PoolKind::lcpool_star;
  fail(ErrorCode::invalid_argument, "unknown pool '" + s + "'");
}

void ModelConfig::validate() const {
  require(hidden > 0 && blocks > 0, ErrorCode::invalid_argument,
          "ModelConfig: hidden and blocks must be positive");
  static_cast<void>(PoolRatio{ratio});
  for (std::size_t w : pre_mlp)
    require(w > 0, ErrorCode::invalid_argument, "ModelConfig: pre-MLP widths must be positive");
  for (std::size_t w : post_mlp)
    require(w > 0, ErrorCode::invalid_argument, "ModelConfig: post-MLP widths must be positive");
}

std::string backbone_label(const ModelConfig& cfg) {
  return to_string(cfg.backbone) + "/" + to_string(cfg.conv);
}

Model::Model(const ModelConfig& cfg, std::size_t feature_dim, std::size_t num_classes,
             std::uint64_t seed)
    : cfg_(cfg), num_classes_(num_classes) {
  cfg_.validate();
  require(feature_dim > 0 && num_classes > 0, ErrorCode::invalid_argument,
          "Model: feature_dim and num_classes must be positive");
  require(cfg_.pool != PoolKind::dense || cfg_.dense_clusters > 0, ErrorCode::invalid_argument,
          "Model: dense pooling needs dense_clusters > 0");
  Rng rng(seed);

  std::size_t width = feature_dim;
  if (!cfg_.pre_mlp.empty()) {
    pre_ = Mlp::create(params_, "pre", feature_dim, cfg_.pre_mlp, rng);
    width = pre_.out_dim();
  }
  for (std::size_t b = 0; b < cfg_.blocks; ++b) {
    const std::string name = "conv" + std::to_string(b);
    Conv c;
    c.self = Linear::create(params_, name + ".self", width, cfg_.hidden, rng);
    if (cfg_.conv == ConvKind::graphconv)
      c.neighbour = Linear::create(params_, name + ".neighbour", width, cfg_.hidden, rng, false);
    convs_.push_back(c);
    width = cfg_.hidden;
  }

  const std::size_t n_pools =
      cfg_.pool == PoolKind::nopool ? 0 : (cfg_.backbone == Backbone::hierarchical ? cfg_.blocks : 1);
  std::size_t clusters = cfg_.dense_clusters;
  for (std::size_t s = 0; s < n_pools; ++s) {
    const std::string name = "pool" + std::to_string(s);
    Pool p;
    switch (cfg_.pool) {
      case PoolKind::topk:
        p.score = Linear::create(params_, name + ".score", cfg_.hidden, 1, rng, false);
        break;
      case PoolKind::sag:
        p.score = Linear::create(params_, name + ".score", cfg_.hidden, 1, rng);
        break;
      case PoolKind::dense:
        p.clusters = clusters;
        p.score = Linear::create(params_, name + ".assign", cfg_.hidden, clusters, rng);
        clusters = kept_count(clusters, PoolRatio(cfg_.ratio));
        break;
      case PoolKind::lcpool_star:
        p.score = Linear::create(params_, name + ".cluster", cfg_.hidden, cfg_.hidden, rng);
        [[fallthrough]];
      case PoolKind::lcpool:
        p.lcsmp = LcsmpParams::create(params_, name + ".lcsmp", cfg_.hidden, cfg_.hidden, rng);
        break;
      case PoolKind::nopool:
        break;
    }
    pools_.push_back(p);
  }

  std::vector<std::size_t> post = cfg_.post_mlp;
  post.push_back(num_classes);
  post_ = Mlp::create(params_, "post", 2 * cfg_.hidden, post, rng);
}

std::size_t Model::pool_scalar_count() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < params_.size(); ++i)
    if (params_[i].name.rfind("pool", 0) == 0) n += params_[i].value.size();
  return n;
}

Tensor Model::conv(Tape& tape, std::size_t block, Tensor x, const CsrMatrix& a) const {
  const Conv& c = convs_[block];
  Tensor y;
  if (cfg_.conv == ConvKind::gcn) {
    y = gcn_conv(x, a, tape.param(*c.self.weight));
  } else {
    y = graph_conv(x, a, tape.param(*c.self.weight), tape.param(*c.neighbour.weight));
  }
  return relu(add_row(y, tape.param(*c.self.bias)));
}

PoolResult Model::pool(Tape& tape, std::size_t stage, Tensor x, const CsrMatrix& a,
                       const Segments& seg) const {
  const Pool& p = pools_[stage];
  const PoolRatio ratio(cfg_.ratio);
  switch (cfg_.pool) {
    case PoolKind::topk:
      // Score is tanh(x·pᵀ).
      return node_selection_pool(
          x, a, seg, [&](Tensor t, const CsrMatrix&, const Segments&) {
            return lcpool::tanh(p.score(tape, t));
          },
          ratio);
    case PoolKind::sag:
      // Stand-in for self-attention scoring: tanh(GCN(x) to one channel).
      return node_selection_pool(
          x, a, seg, [&](Tensor t, const CsrMatrix& adj, const Segments&) {
            Tensor s = gcn_conv(t, adj, tape.param(*p.score.weight));
            return lcpool::tanh(add_row(s, tape.param(*p.score.bias)));
          },
          ratio);
    case PoolKind::dense:
      return dense_assignment_pool(
          x, a, seg, [&](Tensor t, const CsrMatrix& adj, const Segments&) {
            Tensor s = gcn_conv(t, adj, tape.param(*p.score.weight));
            return row_softmax(add_row(s, tape.param(*p.score.bias)));
          },
          p.clusters);
    case PoolKind::lcpool:
      return lcpool::lcpool(x, a, seg, p.lcsmp, ratio);
    case PoolKind::lcpool_star:
      return lcpool::lcpool_star(x, a, seg, p.score, p.lcsmp, ratio);
    case PoolKind::nopool:
      break;
  }
  fail(ErrorCode::internal, "Model::pool called without a pooling operator");
}

namespace {

void check_size_adaptivity(const std::vector<std::size_t>& before,
                           const std::vector<std::size_t>& after, double ratio) {
  for (std::size_t g = 0; g < before.size(); ++g) {
    const std::size_t expected = kept_count(before[g], PoolRatio(ratio));
    require(after[g] == expected, ErrorCode::internal,
            "size adaptivity violated: graph " + std::to_string(g) + " kept " +
                std::to_string(after[g]) + " of " + std::to_string(before[g]) + ", expected " +
                std::to_string(expected));
  }
}

}  // namespace

Model::Output Model::forward(Tape& tape, const GraphBatch& batch) const {
  Output out;
  Tensor x = tape.constant(batch.x);
  if (!pre_.layers.empty()) x = relu(pre_(tape, x));
  CsrMatrix a = batch.a;
  Segments seg(batch.graph_id, batch.graph_count);

  auto apply_pool = [&](std::size_t stage) {
    const auto before = seg.sizes();
    PoolResult r = pool(tape, stage, x, a, seg);
    x = r.x;
    a = std::move(r.a);
    seg = std::move(r.seg);
    auto after = seg.sizes();
    if (cfg_.pool != PoolKind::dense) check_size_adaptivity(before, after, cfg_.ratio);
    out.stage_sizes.push_back(std::move(after));
  };

  Tensor pooled;
  if (cfg_.backbone == Backbone::hierarchical) {
    for (std::size_t b = 0; b < cfg_.blocks; ++b) {
      x = conv(tape, b, x, a);
      if (!pools_.empty()) apply_pool(b);
      Tensor r = readout(x, seg);
      pooled = pooled.valid() ? add(pooled, r) : r;
    }
  } else {
    for (std::size_t b = 0; b < cfg_.blocks; ++b) x = conv(tape, b, x, a);
    if (!pools_.empty()) apply_pool(0);
    pooled = readout(x, seg);
  }
  out.logits = post_(tape, pooled);
  return out;
}

Model build_model(ModelConfig cfg, const Dataset& dataset, std::uint64_t seed) {
  if (cfg.pool == PoolKind::dense && cfg.dense_clusters == 0)
    cfg.dense_clusters = kept_count(
        static_cast<std::size_t>(std::ceil(dataset.average_nodes())), PoolRatio(cfg.ratio));
  return Model(cfg, dataset.feature_dim, dataset.num_classes, seed);
}

}  // namespace lcpool
