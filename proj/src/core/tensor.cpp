#include "recnet/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <sstream>
#include <unordered_set>

namespace recnet::ad {

namespace {

std::atomic<std::uint64_t> g_next_seq{1};
thread_local bool t_grad_enabled = true;

NodePtr new_node(Shape shape, std::vector<double> values) {
  if (shape_size(shape) != values.size()) {
    throw DimensionError("value count " + std::to_string(values.size()) +
                         " does not match shape " + shape_string(shape));
  }
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->values = std::move(values);
  node->seq = g_next_seq.fetch_add(1, std::memory_order_relaxed);
  return node;
}

}  // namespace

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (auto e : shape) {
    if (e == 0) throw DimensionError("zero extent in shape " + shape_string(shape));
    n *= e;
  }
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::vector<double>& Node::grad_buffer() {
  if (!grad) grad.emplace(values.size(), 0.0);
  return *grad;
}

Tensor Tensor::constant(Shape shape, std::vector<double> values) {
  return Tensor(new_node(std::move(shape), std::move(values)));
}

Tensor Tensor::zeros(Shape shape) {
  auto n = shape_size(shape);
  return constant(std::move(shape), std::vector<double>(n, 0.0));
}

Tensor Tensor::scalar(double value) { return constant({1}, {value}); }

Tensor Tensor::vector(std::vector<double> values) {
  Shape s{values.size()};
  return constant(std::move(s), std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
  return constant({rows, cols}, std::move(values));
}

Tensor Tensor::variable(Shape shape, std::vector<double> values) {
  auto node = new_node(std::move(shape), std::move(values));
  node->requires_grad = true;
  return Tensor(std::move(node));
}

std::size_t Tensor::rows() const {
  if (rank() != 2) throw DimensionError("rows() on non-matrix " + shape_string(shape()));
  return shape()[0];
}

std::size_t Tensor::cols() const {
  if (rank() != 2) throw DimensionError("cols() on non-matrix " + shape_string(shape()));
  return shape()[1];
}

std::span<double> Tensor::mutable_values() {
  if (!node_->is_leaf()) throw std::logic_error("mutable_values() on an interior node");
  return node_->values;
}

double Tensor::at(std::size_t r, std::size_t c) const { return node_->values[r * cols() + c]; }

double Tensor::item() const {
  if (size() != 1) throw DimensionError("item() on tensor of shape " + shape_string(shape()));
  return node_->values[0];
}

std::span<const double> Tensor::grad() const {
  if (!node_->grad) return {};
  return *node_->grad;
}

NoGradGuard::NoGradGuard() : previous_(t_grad_enabled) { t_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { t_grad_enabled = previous_; }

bool grad_enabled() { return t_grad_enabled; }

Tensor make_result(Shape shape, std::vector<double> values, std::span<const Tensor> parents,
                   std::function<void(Node&)> backward_fn) {
  auto node = new_node(std::move(shape), std::move(values));
  if (t_grad_enabled) {
    bool any = std::any_of(parents.begin(), parents.end(),
                           [](const Tensor& p) { return p.requires_grad(); });
    if (any) {
      node->requires_grad = true;
      node->parents.reserve(parents.size());
      for (const auto& p : parents) node->parents.push_back(p.node());
      node->backward_fn = std::move(backward_fn);
    }
  }
  return Tensor(std::move(node));
}

Tensor make_result(Shape shape, std::vector<double> values, std::initializer_list<Tensor> parents,
                   std::function<void(Node&)> backward_fn) {
  return make_result(std::move(shape), std::move(values),
                     std::span<const Tensor>(parents.begin(), parents.size()),
                     std::move(backward_fn));
}

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1) {
    throw DimensionError("backward() needs a scalar loss, got " +
                         (loss.defined() ? shape_string(loss.shape()) : std::string("undefined")));
  }
  Node* root = loss.node().get();
  if (!root->requires_grad) return;

  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<Node*> stack{root};
  seen.insert(root);
  while (!stack.empty()) {
    Node* n = stack.back();
    stack.pop_back();
    order.push_back(n);
    for (const auto& p : n->parents) {
      if (p->requires_grad && seen.insert(p.get()).second) stack.push_back(p.get());
    }
  }
  std::sort(order.begin(), order.end(), [](const Node* a, const Node* b) { return a->seq > b->seq; });

  root->grad_buffer()[0] += 1.0;
  for (Node* n : order) {
    if (n->is_leaf()) continue;
    if (n->grad && n->backward_fn) n->backward_fn(*n);
    n->grad.reset();
  }
}

}  // namespace recnet::ad
