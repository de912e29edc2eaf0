#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace addn {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {

using BackwardFn = std::function<void(const std::vector<double>& out_grad)>;

// One vertex of the differentiation graph. Values live in shared storage so
// parameter leaves can be re-bound per sample without copying.
struct Node {
  Shape shape;
  std::shared_ptr<std::vector<double>> data;
  std::vector<double> grad;
  bool requires_grad = false;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> parents;
  BackwardFn backward;

  std::vector<double>& grad_buffer();
  bool is_leaf() const noexcept { return parents.empty() && !backward; }
};

}  // namespace detail

/// Dense row-major double tensor taking part in reverse-mode differentiation.
///
/// Tensors are cheap handles. Values are immutable once an operation has
/// produced them; leaves may be updated in place through mutable_data() by an
/// optimizer between graph constructions.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from_data(Shape shape, std::vector<double> values, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const noexcept { return static_cast<bool>(node_); }
  const Shape& shape() const;
  std::size_t dim() const { return shape().size(); }
  std::size_t extent(std::size_t axis) const;
  std::size_t numel() const;
  std::size_t rows() const;  // 2D helpers
  std::size_t cols() const;

  std::span<const double> data() const;
  std::span<double> mutable_data();
  std::vector<double> to_vector() const;
  double item() const;
  double operator[](std::size_t i) const { return data()[i]; }
  double at(std::size_t r, std::size_t c) const;

  bool requires_grad() const;
  /// Gradient accumulated by backward(); zeros when the tensor was unreachable.
  std::span<const double> grad() const;
  void zero_grad();

  /// Reverse pass from this scalar. Frees the tape of intermediate nodes.
  void backward() const;

  /// Fresh leaf sharing this tensor's value storage, with its own gradient.
  Tensor bind(bool requires_grad) const;
  /// Deep copy as a leaf.
  Tensor clone(bool requires_grad = false) const;

  const char* op_name() const;
  std::shared_ptr<detail::Node> node() const { return node_; }
  static Tensor from_node(std::shared_ptr<detail::Node> node);

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  std::shared_ptr<detail::Node> node_;
};

/// Complex array as a pair of real tensors of identical shape.
struct ComplexTensor {
  Tensor re;
  Tensor im;

  ComplexTensor() = default;
  ComplexTensor(Tensor real, Tensor imag);
  const Shape& shape() const { return re.shape(); }
};

/// Test hook: when set, the backward rule of the named op receives a scaled
/// upstream gradient, which the gradient checker must detect. Empty disables.
void set_gradient_fault(std::string op_name);
const std::string& gradient_fault();

namespace detail {

/// Builds an op result. Throws NumericError if any value is non-finite.
/// The backward closure is only kept when some parent requires grad.
Tensor make_result(const char* op, Shape shape, std::vector<double> values,
                   std::vector<Tensor> parents, BackwardFn backward);

/// Adds into a parent's gradient when that parent takes part in differentiation.
template <typename F>
void accumulate(const Tensor& parent, F&& fn) {
  auto node = parent.node();
  if (node && node->requires_grad) fn(node->grad_buffer());
}

}  // namespace detail

}  // namespace addn
