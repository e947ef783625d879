#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace asim {

using Shape = std::vector<std::size_t>;

/// Boolean validity mask over sequence positions (true = real token).
using Mask = std::vector<bool>;

std::string shape_str(const Shape& shape);
std::size_t shape_numel(const Shape& shape);

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // empty until needed
  bool requires_grad = false;
  bool is_leaf = true;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this node's grad and accumulates into the parents' grads.
  std::function<void(Node&)> backward_fn;

  void ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
  }
};

}  // namespace detail

/// Dense row-major tensor of doubles and a handle to a node of the
/// reverse-mode computation graph.
///
/// Copies share the underlying node. Rank is 0, 1 or 2; rank-1 tensors act
/// as a single row where a matrix is expected.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> data, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const noexcept { return node_ != nullptr; }

  const Shape& shape() const { return node_->shape; }
  std::size_t numel() const { return node_->value.size(); }
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const double> data() const { return node_->value; }
  /// Writable view of the values. Only meaningful on leaves; mutating an
  /// interior node does not re-run its producers.
  std::span<double> mutable_data() { return node_->value; }
  double at(std::size_t r, std::size_t c) const { return node_->value[r * cols() + c]; }
  double item() const;

  bool requires_grad() const { return node_->requires_grad; }
  bool has_grad() const { return node_->grad.size() == node_->value.size() && !node_->value.empty(); }
  std::span<const double> grad() const { return node_->grad; }
  std::span<double> mutable_grad() { return node_->grad; }
  void zero_grad();
  bool is_leaf() const { return node_->is_leaf; }
  const char* op_name() const { return node_->op; }

  /// Populates dloss/dleaf for every requires_grad leaf reachable from this
  /// scalar. Leaf gradients accumulate across calls.
  void backward() const;

  /// New leaf holding a copy of the values, cut from the graph.
  Tensor detach() const;

  detail::Node* node() const { return node_.get(); }
  const std::shared_ptr<detail::Node>& node_ptr() const { return node_; }

  static Tensor make_result(Shape shape, std::vector<double> value, const char* op,
                            std::vector<Tensor> parents,
                            std::function<void(detail::Node&)> backward_fn);

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

  std::shared_ptr<detail::Node> node_;
};

}  // namespace asim
