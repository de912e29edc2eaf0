#include "addn/tensor.hpp"

#include <cmath>
#include <sstream>
#include <unordered_set>

#include "addn/error.hpp"

namespace addn {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t e : shape) n *= e;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace detail {

std::vector<double>& Node::grad_buffer() {
  if (grad.empty()) grad.assign(data->size(), 0.0);
  return grad;
}

}  // namespace detail

namespace {

void check_shape(const Shape& shape, std::size_t count) {
  for (std::size_t e : shape) {
    if (e == 0) throw DimensionError("tensor extents must be positive, got " + shape_str(shape));
  }
  if (shape_numel(shape) != count) {
    throw DimensionError("tensor data length " + std::to_string(count) +
                         " does not match shape " + shape_str(shape));
  }
}

void check_finite(const char* op, const std::vector<double>& values) {
  // x - x is NaN exactly for NaN and infinities, and the sum vectorizes.
  double probe = 0.0;
  for (double v : values) probe += v - v;
  if (probe == probe) return;
  throw NumericError(std::string("non-finite value produced by ") + op);
}

std::string& fault_slot() {
  static std::string slot;
  return slot;
}

}  // namespace

void set_gradient_fault(std::string op_name) { fault_slot() = std::move(op_name); }
const std::string& gradient_fault() { return fault_slot(); }

Tensor Tensor::from_data(Shape shape, std::vector<double> values, bool requires_grad) {
  check_shape(shape, values.size());
  check_finite("from_data", values);
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->data = std::make_shared<std::vector<double>>(std::move(values));
  node->requires_grad = requires_grad;
  if (requires_grad) node->grad_buffer();
  return Tensor(std::move(node));
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  const std::size_t n = shape_numel(shape);
  return from_data(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  const std::size_t n = shape_numel(shape);
  return from_data(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from_data({1}, {value}, requires_grad);
}

Tensor Tensor::from_node(std::shared_ptr<detail::Node> node) { return Tensor(std::move(node)); }

const Shape& Tensor::shape() const {
  if (!node_) throw ContractError("use of an undefined tensor");
  return node_->shape;
}

std::size_t Tensor::extent(std::size_t axis) const {
  const Shape& s = shape();
  if (axis >= s.size()) throw DimensionError("axis " + std::to_string(axis) + " out of range for " + shape_str(s));
  return s[axis];
}

std::size_t Tensor::numel() const { return shape_numel(shape()); }

std::size_t Tensor::rows() const {
  if (dim() != 2) throw DimensionError("expected a matrix, got " + shape_str(shape()));
  return shape()[0];
}

std::size_t Tensor::cols() const {
  if (dim() != 2) throw DimensionError("expected a matrix, got " + shape_str(shape()));
  return shape()[1];
}

std::span<const double> Tensor::data() const {
  shape();
  return {node_->data->data(), node_->data->size()};
}

std::span<double> Tensor::mutable_data() {
  shape();
  return {node_->data->data(), node_->data->size()};
}

std::vector<double> Tensor::to_vector() const {
  auto d = data();
  return {d.begin(), d.end()};
}

double Tensor::item() const {
  if (numel() != 1) throw ContractError("item() on tensor of shape " + shape_str(shape()));
  return (*node_->data)[0];
}

double Tensor::at(std::size_t r, std::size_t c) const { return data()[r * cols() + c]; }

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

std::span<const double> Tensor::grad() const {
  shape();
  return {node_->grad_buffer().data(), node_->grad.size()};
}

void Tensor::zero_grad() {
  shape();
  if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

const char* Tensor::op_name() const { return node_ ? node_->op : "undefined"; }

Tensor Tensor::bind(bool requires_grad) const {
  shape();
  auto node = std::make_shared<detail::Node>();
  node->shape = node_->shape;
  node->data = node_->data;
  node->requires_grad = requires_grad;
  if (requires_grad) node->grad_buffer();
  return Tensor(std::move(node));
}

Tensor Tensor::clone(bool requires_grad) const { return from_data(shape(), to_vector(), requires_grad); }

void Tensor::backward() const {
  if (numel() != 1) {
    throw ContractError("backward() requires a scalar loss, got shape " + shape_str(shape()));
  }
  if (!node_->requires_grad) return;

  // Iterative post-order DFS gives a topological order of the reachable graph.
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> visited;
  std::vector<std::pair<detail::Node*, std::size_t>> stack{{node_.get(), 0}};
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      detail::Node* parent = node->parents[next++].get();
      if (parent->requires_grad && visited.insert(parent).second) stack.push_back({parent, 0});
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  node_->grad_buffer()[0] += 1.0;
  const std::string& fault = gradient_fault();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node* node = *it;
    if (!node->backward || node->grad.empty()) continue;
    if (!fault.empty() && fault == node->op) {
      std::vector<double> scaled = node->grad;
      for (double& g : scaled) g *= 1.5;
      node->backward(scaled);
    } else {
      node->backward(node->grad);
    }
  }
  for (detail::Node* node : order) {
    if (node->backward) {
      node->backward = nullptr;
      node->parents.clear();
      if (node != node_.get()) std::vector<double>().swap(node->grad);
    }
  }
}

ComplexTensor::ComplexTensor(Tensor real, Tensor imag) : re(std::move(real)), im(std::move(imag)) {
  if (re.shape() != im.shape()) {
    throw DimensionError("complex parts differ in shape: " + shape_str(re.shape()) + " vs " +
                         shape_str(im.shape()));
  }
}

namespace detail {

Tensor make_result(const char* op, Shape shape, std::vector<double> values, std::vector<Tensor> parents,
                   BackwardFn backward) {
  check_finite(op, values);
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->data = std::make_shared<std::vector<double>>(std::move(values));
  node->op = op;
  bool needs_grad = false;
  for (const Tensor& p : parents) needs_grad = needs_grad || p.requires_grad();
  if (needs_grad) {
    node->requires_grad = true;
    node->parents.reserve(parents.size());
    for (const Tensor& p : parents) node->parents.push_back(p.node());
    node->backward = std::move(backward);
  }
  return Tensor::from_node(std::move(node));
}

}  // namespace detail

}  // namespace addn
