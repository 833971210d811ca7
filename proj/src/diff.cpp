#include "lcpool/diff.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "lcpool/errors.hpp"

namespace lcpool {

// ---------------------------------------------------------------------------
// ParameterSet

Parameter& ParameterSet::create(std::string name, DenseMatrix init) {
  require(find(name) == nullptr, ErrorCode::invalid_argument,
          "ParameterSet: parameter '" + name + "' registered twice");
  require(init.all_finite(), ErrorCode::numeric, "ParameterSet: non-finite init for " + name);
  auto p = std::make_unique<Parameter>();
  p->name = std::move(name);
  p->grad = DenseMatrix(init.rows(), init.cols());
  p->value = std::move(init);
  params_.push_back(std::move(p));
  return *params_.back();
}

const Parameter* ParameterSet::find(const std::string& name) const {
  for (const auto& p : params_)
    if (p->name == name) return p.get();
  return nullptr;
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& p : params_) std::fill(p->grad.data().begin(), p->grad.data().end(), 0.0);
}

std::vector<DenseMatrix> ParameterSet::snapshot() const {
  std::vector<DenseMatrix> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p->value);
  return out;
}

void ParameterSet::restore(const std::vector<DenseMatrix>& values) {
  require(values.size() == params_.size(), ErrorCode::shape_mismatch,
          "ParameterSet::restore: parameter count differs");
  for (std::size_t i = 0; i < values.size(); ++i) {
    require(values[i].same_shape(params_[i]->value), ErrorCode::shape_mismatch,
            "ParameterSet::restore: shape differs for " + params_[i]->name);
    params_[i]->value = values[i];
  }
}

void ParameterSet::save(std::ostream& os) const {
  os << "lcpool-params 1 " << params_.size() << '\n';
  char buf[64];
  for (const auto& p : params_) {
    os << p->name << ' ' << p->value.rows() << ' ' << p->value.cols() << '\n';
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%a", p->value.data()[i]);
      os << buf << (i + 1 == p->value.size() ? '\n' : ' ');
    }
    if (p->value.size() == 0) os << '\n';
  }
  require(static_cast<bool>(os), ErrorCode::io, "ParameterSet::save: write failed");
}

void ParameterSet::load(std::istream& is) {
  std::string magic;
  int version = 0;
  std::size_t count = 0;
  is >> magic >> version >> count;
  require(is && magic == "lcpool-params" && version == 1, ErrorCode::format,
          "ParameterSet::load: not a parameter checkpoint");
  require(count == params_.size(), ErrorCode::shape_mismatch,
          "ParameterSet::load: checkpoint has " + std::to_string(count) + " parameters, model has " +
              std::to_string(params_.size()));
  for (auto& p : params_) {
    std::string name;
    std::size_t rows = 0, cols = 0;
    is >> name >> rows >> cols;
    require(static_cast<bool>(is), ErrorCode::format, "ParameterSet::load: truncated header");
    require(name == p->name && rows == p->value.rows() && cols == p->value.cols(),
            ErrorCode::shape_mismatch, "ParameterSet::load: mismatch at parameter " + name);
    for (double& v : p->value.data()) {
      std::string tok;
      is >> tok;
      char* end = nullptr;
      v = std::strtod(tok.c_str(), &end);
      require(!tok.empty() && end == tok.c_str() + tok.size(), ErrorCode::format,
              "ParameterSet::load: bad value '" + tok + "' in " + name);
    }
  }
}

// ---------------------------------------------------------------------------
// Segments

Segments::Segments(std::vector<std::size_t> ids, std::size_t n) : id(std::move(ids)), count(n) {
  for (std::size_t i = 0; i < id.size(); ++i) {
    require(id[i] < count, ErrorCode::invalid_argument, "Segments: id out of range");
    require(i == 0 || id[i - 1] <= id[i], ErrorCode::invalid_argument,
            "Segments: ids must be non-decreasing");
  }
}

std::vector<std::size_t> Segments::sizes() const {
  std::vector<std::size_t> s(count, 0);
  for (std::size_t g : id) ++s[g];
  return s;
}

// ---------------------------------------------------------------------------
// Tensor / Tape

Tape& Tensor::tape() const {
  require(tape_ != nullptr, ErrorCode::precondition, "Tensor: not attached to a tape");
  return *tape_;
}

const DenseMatrix& Tensor::value() const { return tape().nodes_[id_].value; }
const DenseMatrix& Tensor::grad() const { return tape().nodes_[id_].grad; }
bool Tensor::requires_grad() const { return tape().nodes_[id_].requires_grad; }

Tensor Tape::push(Node node) {
  require(node.value.all_finite(), ErrorCode::numeric, "Tape: non-finite value produced");
  nodes_.push_back(std::move(node));
  return Tensor(this, nodes_.size() - 1);
}

Tensor Tape::constant(DenseMatrix value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

Tensor Tape::variable(DenseMatrix value) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = true;
  return push(std::move(n));
}

Tensor Tape::param(Parameter& p) {
  Node n;
  n.value = p.value;
  n.param = &p;
  n.requires_grad = true;
  return push(std::move(n));
}

Tensor Tape::record(DenseMatrix value, std::vector<Tensor> inputs, BackwardFn fn) {
  Node n;
  n.value = std::move(value);
  for (const Tensor& t : inputs) {
    require(t.tape_ == this, ErrorCode::precondition, "Tape: input recorded on another tape");
    n.inputs.push_back(t.id_);
    n.requires_grad = n.requires_grad || nodes_[t.id_].requires_grad;
  }
  if (n.requires_grad) n.fn = std::move(fn);
  return push(std::move(n));
}

void Tape::backward(const Tensor& loss) {
  require(loss.valid(), ErrorCode::precondition, "backward: no forward pass recorded");
  require(loss.tape_ == this, ErrorCode::precondition, "backward: loss is on another tape");
  require(!backward_done_, ErrorCode::precondition, "backward: already ran on this tape");
  const DenseMatrix& lv = nodes_[loss.id_].value;
  require(lv.rows() == 1 && lv.cols() == 1, ErrorCode::shape_mismatch,
          "backward: loss must be a scalar");
  backward_done_ = true;
  if (!nodes_[loss.id_].requires_grad) return;

  nodes_[loss.id_].grad = DenseMatrix(1, 1, 1.0);
  for (std::size_t k = loss.id_ + 1; k-- > 0;) {
    Node& node = nodes_[k];
    if (node.grad.empty() || !node.requires_grad) continue;
    if (node.param != nullptr) {
      auto& pg = node.param->grad;
      if (!pg.same_shape(node.grad)) pg = DenseMatrix(node.grad.rows(), node.grad.cols());
      for (std::size_t i = 0; i < pg.size(); ++i) pg.data()[i] += node.grad.data()[i];
    }
    if (!node.fn) continue;
    BackwardContext ctx{node.value, node.grad, {}, {}};
    for (std::size_t in : node.inputs) {
      Node& src = nodes_[in];
      ctx.in_values.push_back(&src.value);
      if (src.requires_grad) {
        if (src.grad.empty()) src.grad = DenseMatrix(src.value.rows(), src.value.cols());
        ctx.in_grads.push_back(&src.grad);
      } else {
        ctx.in_grads.push_back(nullptr);
      }
    }
    node.fn(ctx);
  }
}

// ---------------------------------------------------------------------------
// Primitives

namespace {

Tape& same_tape(const Tensor& a, const Tensor& b) {
  require(&a.tape() == &b.tape(), ErrorCode::precondition, "tensors live on different tapes");
  return a.tape();
}

void require_shape(const DenseMatrix& a, const DenseMatrix& b, const char* op) {
  require(a.same_shape(b), ErrorCode::shape_mismatch,
          std::string(op) + ": shape " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
              " vs " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
}

void accumulate(DenseMatrix* dst, const DenseMatrix& src, double factor = 1.0) {
  if (dst == nullptr) return;
  auto& d = dst->data();
  const auto& s = src.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += factor * s[i];
}

void require_segments(const DenseMatrix& x, const Segments& seg, const char* op) {
  require(seg.size() == x.rows(), ErrorCode::shape_mismatch,
          std::string(op) + ": segment ids do not cover the rows");
}

}  // namespace

Tensor matmul(Tensor a, Tensor b) {
  Tape& tape = same_tape(a, b);
  return tape.record(matmul(a.value(), b.value()), {a, b}, [](BackwardContext& c) {
    if (c.in_grads[0]) accumulate(c.in_grads[0], matmul_nt(c.out_grad, *c.in_values[1]));
    if (c.in_grads[1]) accumulate(c.in_grads[1], matmul_tn(*c.in_values[0], c.out_grad));
  });
}

Tensor matmul_nt(Tensor x, Tensor w) {
  Tape& tape = same_tape(x, w);
  return tape.record(matmul_nt(x.value(), w.value()), {x, w}, [](BackwardContext& c) {
    if (c.in_grads[0]) accumulate(c.in_grads[0], matmul(c.out_grad, *c.in_values[1]));
    if (c.in_grads[1]) accumulate(c.in_grads[1], matmul_tn(c.out_grad, *c.in_values[0]));
  });
}

Tensor add(Tensor a, Tensor b) {
  Tape& tape = same_tape(a, b);
  require_shape(a.value(), b.value(), "add");
  DenseMatrix out = a.value();
  accumulate(&out, b.value());
  return tape.record(std::move(out), {a, b}, [](BackwardContext& c) {
    accumulate(c.in_grads[0], c.out_grad);
    accumulate(c.in_grads[1], c.out_grad);
  });
}

Tensor sub(Tensor a, Tensor b) {
  Tape& tape = same_tape(a, b);
  require_shape(a.value(), b.value(), "sub");
  DenseMatrix out = a.value();
  accumulate(&out, b.value(), -1.0);
  return tape.record(std::move(out), {a, b}, [](BackwardContext& c) {
    accumulate(c.in_grads[0], c.out_grad);
    accumulate(c.in_grads[1], c.out_grad, -1.0);
  });
}

Tensor mul(Tensor a, Tensor b) {
  Tape& tape = same_tape(a, b);
  require_shape(a.value(), b.value(), "mul");
  DenseMatrix out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= b.value().data()[i];
  return tape.record(std::move(out), {a, b}, [](BackwardContext& c) {
    const auto& g = c.out_grad.data();
    for (int k = 0; k < 2; ++k) {
      if (!c.in_grads[k]) continue;
      const auto& other = c.in_values[1 - k]->data();
      auto& d = c.in_grads[k]->data();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[i] * other[i];
    }
  });
}

Tensor scale(Tensor a, double factor) {
  DenseMatrix out = a.value();
  for (double& v : out.data()) v *= factor;
  return a.tape().record(std::move(out), {a}, [factor](BackwardContext& c) {
    accumulate(c.in_grads[0], c.out_grad, factor);
  });
}

Tensor add_row(Tensor x, Tensor bias) {
  Tape& tape = same_tape(x, bias);
  require(bias.rows() == 1 && bias.cols() == x.cols(), ErrorCode::shape_mismatch,
          "add_row: bias must be 1 x cols");
  DenseMatrix out = x.value();
  const auto& b = bias.value().data();
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += b[j];
  }
  return tape.record(std::move(out), {x, bias}, [](BackwardContext& c) {
    accumulate(c.in_grads[0], c.out_grad);
    if (auto* gb = c.in_grads[1]) {
      for (std::size_t i = 0; i < c.out_grad.rows(); ++i) {
        auto r = c.out_grad.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) gb->data()[j] += r[j];
      }
    }
  });
}

Tensor broadcast_col(Tensor x, Tensor h) {
  Tape& tape = same_tape(x, h);
  require(h.cols() == 1 && h.rows() == x.rows(), ErrorCode::shape_mismatch,
          "broadcast_col: h must be a rows x 1 column");
  DenseMatrix out = x.value();
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (double& v : out.row(i)) v *= h.value()(i, 0);
  return tape.record(std::move(out), {x, h}, [](BackwardContext& c) {
    const DenseMatrix& xv = *c.in_values[0];
    const DenseMatrix& hv = *c.in_values[1];
    for (std::size_t i = 0; i < xv.rows(); ++i) {
      auto g = c.out_grad.row(i);
      if (auto* gx = c.in_grads[0]) {
        auto r = gx->row(i);
        for (std::size_t j = 0; j < g.size(); ++j) r[j] += g[j] * hv(i, 0);
      }
      if (auto* gh = c.in_grads[1]) {
        double acc = 0.0;
        auto xr = xv.row(i);
        for (std::size_t j = 0; j < g.size(); ++j) acc += g[j] * xr[j];
        (*gh)(i, 0) += acc;
      }
    }
  });
}

Tensor relu(Tensor x) {
  DenseMatrix out = x.value();
  for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
  return x.tape().record(std::move(out), {x}, [](BackwardContext& c) {
    if (!c.in_grads[0]) return;
    const auto& xv = c.in_values[0]->data();
    auto& d = c.in_grads[0]->data();
    for (std::size_t i = 0; i < d.size(); ++i)
      if (xv[i] > 0.0) d[i] += c.out_grad.data()[i];
  });
}

Tensor tanh(Tensor x) {
  DenseMatrix out = x.value();
  for (double& v : out.data()) v = std::tanh(v);
  return x.tape().record(std::move(out), {x}, [](BackwardContext& c) {
    if (!c.in_grads[0]) return;
    const auto& y = c.out_value.data();
    auto& d = c.in_grads[0]->data();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += c.out_grad.data()[i] * (1.0 - y[i] * y[i]);
  });
}

Tensor sum(Tensor x) {
  double s = 0.0;
  for (double v : x.value().data()) s += v;
  return x.tape().record(DenseMatrix(1, 1, s), {x}, [](BackwardContext& c) {
    if (!c.in_grads[0]) return;
    const double g = c.out_grad(0, 0);
    for (double& d : c.in_grads[0]->data()) d += g;
  });
}

Tensor concat_cols(Tensor u, Tensor v) {
  Tape& tape = same_tape(u, v);
  require(u.rows() == v.rows(), ErrorCode::shape_mismatch, "concat_cols: row counts differ");
  const std::size_t cu = u.cols(), cv = v.cols();
  DenseMatrix out(u.rows(), cu + cv);
  for (std::size_t i = 0; i < out.rows(); ++i) {
    std::copy(u.value().row(i).begin(), u.value().row(i).end(), out.row(i).begin());
    std::copy(v.value().row(i).begin(), v.value().row(i).end(), out.row(i).begin() + cu);
  }
  return tape.record(std::move(out), {u, v}, [cu, cv](BackwardContext& c) {
    for (std::size_t i = 0; i < c.out_grad.rows(); ++i) {
      auto g = c.out_grad.row(i);
      if (auto* gu = c.in_grads[0])
        for (std::size_t j = 0; j < cu; ++j) (*gu)(i, j) += g[j];
      if (auto* gv = c.in_grads[1])
        for (std::size_t j = 0; j < cv; ++j) (*gv)(i, j) += g[cu + j];
    }
  });
}

Tensor gather_rows(Tensor x, const IndexSet& rows) {
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  DenseMatrix out = select_rows(x.value(), idx);
  return x.tape().record(std::move(out), {x}, [idx = std::move(idx)](BackwardContext& c) {
    if (!c.in_grads[0]) return;
    for (std::size_t r = 0; r < idx.size(); ++r) {
      auto g = c.out_grad.row(r);
      auto d = c.in_grads[0]->row(idx[r]);
      for (std::size_t j = 0; j < g.size(); ++j) d[j] += g[j];
    }
  });
}

Tensor spmm_const(const CsrMatrix& a, Tensor x) {
  DenseMatrix out = spmm(a, x.value());
  return x.tape().record(std::move(out), {x}, [a](BackwardContext& c) {
    if (c.in_grads[0]) accumulate(c.in_grads[0], spmm(transpose(a), c.out_grad));
  });
}

Tensor row_softmax(Tensor x) {
  DenseMatrix out = x.value();
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    const double m = *std::max_element(r.begin(), r.end());
    double z = 0.0;
    for (double& v : r) z += (v = std::exp(v - m));
    for (double& v : r) v /= z;
  }
  return x.tape().record(std::move(out), {x}, [](BackwardContext& c) {
    if (!c.in_grads[0]) return;
    for (std::size_t i = 0; i < c.out_value.rows(); ++i) {
      auto y = c.out_value.row(i);
      auto g = c.out_grad.row(i);
      double dot = 0.0;
      for (std::size_t j = 0; j < y.size(); ++j) dot += y[j] * g[j];
      auto d = c.in_grads[0]->row(i);
      for (std::size_t j = 0; j < y.size(); ++j) d[j] += y[j] * (g[j] - dot);
    }
  });
}

Tensor segment_softmax(Tensor h, const Segments& seg) {
  require(h.cols() == 1, ErrorCode::shape_mismatch, "segment_softmax: expects a score column");
  require_segments(h.value(), seg, "segment_softmax");
  const std::size_t n = h.rows();
  DenseMatrix out(n, 1);
  std::vector<double> mx(seg.count, -std::numeric_limits<double>::infinity());
  std::vector<double> z(seg.count, 0.0);
  for (std::size_t i = 0; i < n; ++i) mx[seg.id[i]] = std::max(mx[seg.id[i]], h.value()(i, 0));
  for (std::size_t i = 0; i < n; ++i) z[seg.id[i]] += (out(i, 0) = std::exp(h.value()(i, 0) - mx[seg.id[i]]));
  for (std::size_t i = 0; i < n; ++i) out(i, 0) /= z[seg.id[i]];
  return h.tape().record(std::move(out), {h}, [ids = seg.id, count = seg.count](BackwardContext& c) {
    if (!c.in_grads[0]) return;
    std::vector<double> dot(count, 0.0);
    for (std::size_t i = 0; i < ids.size(); ++i) dot[ids[i]] += c.out_value(i, 0) * c.out_grad(i, 0);
    for (std::size_t i = 0; i < ids.size(); ++i)
      (*c.in_grads[0])(i, 0) += c.out_value(i, 0) * (c.out_grad(i, 0) - dot[ids[i]]);
  });
}

Tensor segment_mean(Tensor x, const Segments& seg) {
  require_segments(x.value(), seg, "segment_mean");
  const auto sizes = seg.sizes();
  for (std::size_t g = 0; g < seg.count; ++g)
    require(sizes[g] > 0, ErrorCode::precondition,
            "segment_mean: graph " + std::to_string(g) + " has no nodes");
  DenseMatrix out(seg.count, x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto o = out.row(seg.id[i]);
    auto r = x.value().row(i);
    for (std::size_t j = 0; j < r.size(); ++j) o[j] += r[j];
  }
  for (std::size_t g = 0; g < seg.count; ++g)
    for (double& v : out.row(g)) v /= static_cast<double>(sizes[g]);
  return x.tape().record(std::move(out), {x}, [ids = seg.id, sizes](BackwardContext& c) {
    if (!c.in_grads[0]) return;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      auto g = c.out_grad.row(ids[i]);
      auto d = c.in_grads[0]->row(i);
      const double inv = 1.0 / static_cast<double>(sizes[ids[i]]);
      for (std::size_t j = 0; j < g.size(); ++j) d[j] += g[j] * inv;
    }
  });
}

Tensor segment_max(Tensor x, const Segments& seg) {
  require_segments(x.value(), seg, "segment_max");
  const std::size_t d = x.cols();
  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> arg(seg.count * d, none);
  DenseMatrix out(seg.count, d);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const std::size_t g = seg.id[i];
    for (std::size_t j = 0; j < d; ++j) {
      std::size_t& a = arg[g * d + j];
      // Strict comparison keeps the first argmax.
      if (a == none || x.value()(i, j) > out(g, j)) {
        a = i;
        out(g, j) = x.value()(i, j);
      }
    }
  }
  for (std::size_t g = 0; g < seg.count; ++g)
    require(d == 0 || arg[g * d] != none, ErrorCode::precondition,
            "segment_max: graph " + std::to_string(g) + " has no nodes");
  return x.tape().record(std::move(out), {x}, [arg = std::move(arg), d](BackwardContext& c) {
    if (!c.in_grads[0]) return;
    for (std::size_t k = 0; k < arg.size(); ++k)
      (*c.in_grads[0])(arg[k], k % d) += c.out_grad.data()[k];
  });
}

Tensor segment_assign(Tensor s, Tensor x, const Segments& seg) {
  Tape& tape = same_tape(s, x);
  require(s.rows() == x.rows(), ErrorCode::shape_mismatch, "segment_assign: row counts differ");
  require_segments(x.value(), seg, "segment_assign");
  const std::size_t k = s.cols(), d = x.cols();
  DenseMatrix out(seg.count * k, d);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto xr = x.value().row(i);
    for (std::size_t c = 0; c < k; ++c) {
      const double w = s.value()(i, c);
      auto o = out.row(seg.id[i] * k + c);
      for (std::size_t j = 0; j < d; ++j) o[j] += w * xr[j];
    }
  }
  return tape.record(std::move(out), {s, x}, [ids = seg.id, k, d](BackwardContext& c) {
    const DenseMatrix& sv = *c.in_values[0];
    const DenseMatrix& xv = *c.in_values[1];
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (std::size_t cl = 0; cl < k; ++cl) {
        auto g = c.out_grad.row(ids[i] * k + cl);
        if (auto* gs = c.in_grads[0]) {
          double acc = 0.0;
          for (std::size_t j = 0; j < d; ++j) acc += g[j] * xv(i, j);
          (*gs)(i, cl) += acc;
        }
        if (auto* gx = c.in_grads[1]) {
          const double w = sv(i, cl);
          auto r = gx->row(i);
          for (std::size_t j = 0; j < d; ++j) r[j] += w * g[j];
        }
      }
    }
  });
}

Tensor cross_entropy(Tensor logits, std::span<const std::size_t> labels) {
  const DenseMatrix& z = logits.value();
  require(labels.size() == z.rows() && z.rows() > 0, ErrorCode::shape_mismatch,
          "cross_entropy: one label per logit row required");
  DenseMatrix prob(z.rows(), z.cols());
  double loss = 0.0;
  for (std::size_t i = 0; i < z.rows(); ++i) {
    require(labels[i] < z.cols(), ErrorCode::invalid_argument, "cross_entropy: label out of range");
    auto r = z.row(i);
    const double m = *std::max_element(r.begin(), r.end());
    double s = 0.0;
    for (double v : r) s += std::exp(v - m);
    const double lse = m + std::log(s);
    loss += lse - r[labels[i]];
    for (std::size_t j = 0; j < r.size(); ++j) prob(i, j) = std::exp(r[j] - lse);
  }
  const double n = static_cast<double>(z.rows());
  std::vector<std::size_t> lab(labels.begin(), labels.end());
  return logits.tape().record(
      DenseMatrix(1, 1, loss / n), {logits},
      [prob = std::move(prob), lab = std::move(lab), n](BackwardContext& c) {
        if (!c.in_grads[0]) return;
        const double g = c.out_grad(0, 0) / n;
        for (std::size_t i = 0; i < prob.rows(); ++i)
          for (std::size_t j = 0; j < prob.cols(); ++j)
            (*c.in_grads[0])(i, j) += g * (prob(i, j) - (j == lab[i] ? 1.0 : 0.0));
      });
}

// ---------------------------------------------------------------------------
// Adam

Adam::Adam(ParameterSet& params, AdamConfig cfg) : params_(params), cfg_(cfg) {
  require(cfg.lr > 0 && cfg.eps > 0 && cfg.beta1 >= 0 && cfg.beta1 < 1 && cfg.beta2 >= 0 &&
              cfg.beta2 < 1,
          ErrorCode::invalid_argument, "Adam: invalid hyperparameters");
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_.emplace_back(params[i].value.rows(), params[i].value.cols());
    v_.emplace_back(params[i].value.rows(), params[i].value.cols());
  }
}

void Adam::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t p = 0; p < params_.size(); ++p) {
    auto& w = params_[p].value.data();
    const auto& g = params_[p].grad.data();
    auto& m = m_[p].data();
    auto& v = v_[p].data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
      w[i] -= cfg_.lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + cfg_.eps);
    }
  }
}

}  // namespace lcpool
