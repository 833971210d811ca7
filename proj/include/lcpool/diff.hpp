#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "lcpool/dense.hpp"
#include "lcpool/sparse.hpp"

namespace lcpool {

/// Learnable matrix with its accumulated gradient.
struct Parameter {
  std::string name;
  DenseMatrix value;
  DenseMatrix grad;
};

/// Owns the parameters of one model. Names are unique; addresses are stable.
class ParameterSet {
 public:
  Parameter& create(std::string name, DenseMatrix init);

  std::size_t size() const noexcept { return params_.size(); }
  Parameter& operator[](std::size_t i) { return *params_[i]; }
  const Parameter& operator[](std::size_t i) const { return *params_[i]; }
  const Parameter* find(const std::string& name) const;

  /// Total number of scalar entries across all parameters.
  std::size_t scalar_count() const;
  void zero_grad();

  std::vector<DenseMatrix> snapshot() const;
  void restore(const std::vector<DenseMatrix>& values);

  /// Text checkpoint: values are written as hex floats so a load restores
  /// every bit.
  void save(std::ostream& os) const;
  void load(std::istream& is);

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
};

/// Per-node graph membership of a batch; ids are non-decreasing.
struct Segments {
  std::vector<std::size_t> id;
  std::size_t count = 0;

  Segments() = default;
  Segments(std::vector<std::size_t> ids, std::size_t count);
  static Segments single(std::size_t n) { return Segments(std::vector<std::size_t>(n, 0), 1); }

  std::size_t size() const noexcept { return id.size(); }
  std::vector<std::size_t> sizes() const;
};

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; valid while the
/// tape lives.
class Tensor {
 public:
  Tensor() = default;

  bool valid() const noexcept { return tape_ != nullptr; }
  Tape& tape() const;
  std::size_t id() const noexcept { return id_; }

  const DenseMatrix& value() const;
  /// Gradient after Tape::backward; empty if the node was not reached.
  const DenseMatrix& grad() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  bool requires_grad() const;

 private:
  friend class Tape;
  Tensor(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

struct BackwardContext {
  const DenseMatrix& out_value;
  const DenseMatrix& out_grad;
  std::vector<const DenseMatrix*> in_values;
  std::vector<DenseMatrix*> in_grads;  // nullptr where no gradient is needed
};

using BackwardFn = std::function<void(BackwardContext&)>;

/// Records operations in execution order (which is a topological order) and
/// replays their vector-Jacobian products in reverse.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Tensor constant(DenseMatrix value);
  Tensor variable(DenseMatrix value);  // leaf that collects a gradient
  Tensor param(Parameter& p);          // leaf whose gradient is added to p.grad

  Tensor record(DenseMatrix value, std::vector<Tensor> inputs, BackwardFn fn);

  /// Seeds d(loss)/d(loss) = 1 and runs every reachable backward rule once.
  void backward(const Tensor& loss);

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  friend class Tensor;
  struct Node {
    DenseMatrix value;
    DenseMatrix grad;
    std::vector<std::size_t> inputs;
    BackwardFn fn;
    Parameter* param = nullptr;
    bool requires_grad = false;
  };

  Tensor push(Node node);

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

// Differentiable primitives. All inputs must live on the same tape.
Tensor matmul(Tensor a, Tensor b);
Tensor matmul_nt(Tensor x, Tensor w);  // x·wᵀ
Tensor add(Tensor a, Tensor b);
Tensor sub(Tensor a, Tensor b);
Tensor mul(Tensor a, Tensor b);        // elementwise
Tensor scale(Tensor a, double factor);
Tensor add_row(Tensor x, Tensor bias);  // bias is 1 x cols, added to every row
/// Row-wise gating x ⊙ h: row i of x is multiplied by the scalar h(i, 0).
Tensor broadcast_col(Tensor x, Tensor h);
Tensor relu(Tensor x);
Tensor tanh(Tensor x);
Tensor sum(Tensor x);  // 1 x 1
Tensor concat_cols(Tensor u, Tensor v);
Tensor gather_rows(Tensor x, const IndexSet& rows);
/// a·x with `a` treated as a constant.
Tensor spmm_const(const CsrMatrix& a, Tensor x);
Tensor row_softmax(Tensor x);

/// Softmax of a score column within each segment (max-subtracted).
Tensor segment_softmax(Tensor h, const Segments& seg);
Tensor segment_mean(Tensor x, const Segments& seg);
/// Column-wise max per segment; gradient flows to the first argmax row.
Tensor segment_max(Tensor x, const Segments& seg);
/// Per-segment Sᵀ·X: row g*k + c is Σ_{i in g} s(i, c) x(i, :).
Tensor segment_assign(Tensor s, Tensor x, const Segments& seg);

/// Mean over rows of -log softmax(logits)[label].
Tensor cross_entropy(Tensor logits, std::span<const std::size_t> labels);

struct AdamConfig {
  double lr = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias correction over every parameter of a set.
class Adam {
 public:
  Adam(ParameterSet& params, AdamConfig cfg);
  void step();
  long steps() const noexcept { return t_; }

 private:
  ParameterSet& params_;
  AdamConfig cfg_;
  std::vector<DenseMatrix> m_, v_;
  long t_ = 0;
};

}  // namespace lcpool
