#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace recnet::ad {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

// Thrown when operand extents do not line up. The message names every shape
// involved.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Node;
using NodePtr = std::shared_ptr<Node>;

// One recorded primitive. Interior nodes keep their parents alive and carry a
// closure that pushes `grad` into the parents' grads; leaves have neither.
struct Node {
  Shape shape;
  std::vector<double> values;
  std::optional<std::vector<double>> grad;
  bool requires_grad = false;
  std::uint64_t seq = 0;  // creation order; reverse order is a valid topological order
  std::vector<NodePtr> parents;
  std::function<void(Node&)> backward_fn;

  bool is_leaf() const { return parents.empty(); }
  // Zero-initialised gradient buffer, created on first use.
  std::vector<double>& grad_buffer();
};

// Value handle onto a graph node. Copies alias the same node, so a parameter
// tensor handed to several modules is updated in one place.
class Tensor {
 public:
  Tensor() = default;

  static Tensor constant(Shape shape, std::vector<double> values);
  static Tensor zeros(Shape shape);
  static Tensor scalar(double value);
  static Tensor vector(std::vector<double> values);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values);
  // Leaf that accumulates gradients.
  static Tensor variable(Shape shape, std::vector<double> values);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t size() const { return node_->values.size(); }
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const double> values() const { return node_->values; }
  // Direct storage access for leaves (optimizers, checkpoint loading, tests).
  std::span<double> mutable_values();
  double operator[](std::size_t i) const { return node_->values[i]; }
  double at(std::size_t r, std::size_t c) const;
  double item() const;

  bool requires_grad() const { return node_->requires_grad; }
  bool has_grad() const { return node_->grad.has_value(); }
  // Empty span when no gradient reached this tensor.
  std::span<const double> grad() const;
  void clear_grad() { node_->grad.reset(); }

  const NodePtr& node() const { return node_; }
  explicit Tensor(NodePtr node) : node_(std::move(node)) {}

 private:
  NodePtr node_;
};

// Disables graph recording on the current thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

// Builds the result node of a primitive. Parents and the backward closure are
// only retained when recording is on and some parent requires a gradient.
Tensor make_result(Shape shape, std::vector<double> values,
                   std::initializer_list<Tensor> parents,
                   std::function<void(Node&)> backward_fn);
Tensor make_result(Shape shape, std::vector<double> values,
                   std::span<const Tensor> parents,
                   std::function<void(Node&)> backward_fn);

// Reverse sweep from a scalar. Leaves accumulate into existing gradients;
// interior gradients are released once propagated.
void backward(const Tensor& loss);

}  // namespace recnet::ad
