// SPDX-License-Identifier: Apache-2.0
/**
 * @file   autodiff.hpp
 * @brief  Dense row-major tensors and a reverse-mode differentiation tape.
 *
 * Every value produced while building a loss lives on a Tape. Operations
 * append a node holding the forward value plus a closure that pushes the
 * node's gradient back to its inputs. Parameters outlive tapes: a tape
 * leaf refers to a Parameter and, on backward, accumulates into its grad.
 *
 * Shapes are statically known everywhere in the model, so broadcasting is
 * limited to a trailing-axis bias in add() and a one-element factor in
 * mul().
 */
#ifndef MORPHKIT_AUTODIFF_HPP
#define MORPHKIT_AUTODIFF_HPP

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace morphkit::ad {

using Shape = std::vector<std::size_t>;

std::string shape_str(const Shape &s);
std::size_t shape_numel(const Shape &s);

class ShapeError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class Tensor {
public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor scalar(double v) { return Tensor(Shape{}, std::vector<double>{v}); }
  static Tensor row(std::vector<double> v) {
    const std::size_t n = v.size();
    return Tensor(Shape{1, n}, std::move(v));
  }

  const Shape &shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t numel() const { return data_.size(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  double &operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double &at(std::size_t r, std::size_t c) { return data_[r * shape_.back() + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * shape_.back() + c]; }
  double item() const;

  void fill(double v);
  void reshape(Shape s);

private:
  Shape shape_;
  std::vector<double> data_;
};

/// A trainable array that survives across tapes.
struct Parameter {
  std::string name;
  std::string group;
  Tensor value;
  Tensor grad;

  Parameter(std::string n, std::string g, Tensor v)
      : name(std::move(n)), group(std::move(g)), value(std::move(v)),
        grad(value.shape()) {}
  void zero_grad() { grad.fill(0.0); }
};

/// Owns parameters with stable addresses, in registration order.
class ParamStore {
public:
  Parameter &add(std::string name, std::string group, Tensor init);
  Parameter &get(const std::string &name);
  const Parameter &get(const std::string &name) const;
  bool contains(const std::string &name) const;

  std::vector<Parameter *> all();
  std::vector<const Parameter *> all() const;
  std::vector<Parameter *> group(const std::string &group);
  void zero_grad();
  std::size_t size() const { return params_.size(); }

private:
  std::vector<std::unique_ptr<Parameter>> params_;
};

class Tape;

/// Handle to a node on a tape.
struct Var {
  Tape *tape = nullptr;
  std::size_t index = 0;

  const Tensor &value() const;
  const Tensor &grad() const;
  const Shape &shape() const { return value().shape(); }
};

class Tape {
public:
  using BackwardFn = std::function<void(Tape &, std::size_t self)>;

  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    Parameter *param = nullptr;
    BackwardFn backward;
  };

  Var constant(Tensor value);
  /// Leaf for a parameter. Repeated calls return the same node.
  Var param(Parameter &p);

  /// Records a derived node. requires_grad is inherited from the inputs.
  Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn fn);
  Var record(Tensor value, std::span<const Var> inputs, BackwardFn fn);

  /// Runs reverse accumulation from a scalar loss. Parameter leaves add
  /// their gradient into Parameter::grad.
  void backward(Var loss);

  Node &node(std::size_t i) { return nodes_[i]; }
  const Node &node(std::size_t i) const { return nodes_[i]; }
  /// Gradient buffer of node i, allocated on first use.
  Tensor &grad_of(std::size_t i);
  bool needs_grad(std::size_t i) const { return nodes_[i].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

private:
  std::vector<Node> nodes_;
  std::unordered_map<const Parameter *, std::size_t> param_nodes_;
};

// Primitive set. All throw ShapeError on incompatible shapes.
Var matmul(Var a, Var b);
Var transpose(Var a);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double k);
Var sigmoid(Var a);
Var tanh(Var a);
Var relu(Var a);
Var exp(Var a);
/// Natural log of max(a, floor). Clamped entries get zero gradient.
Var log(Var a, double floor = 0.0);
Var concat(std::span<const Var> parts, std::size_t axis);
Var concat(std::initializer_list<Var> parts, std::size_t axis);
Var slice(Var a, std::size_t axis, std::size_t begin, std::size_t end);
Var reshape(Var a, Shape shape);
Var sum(Var a, std::size_t axis);
Var sum_all(Var a);
Var mean(Var a, std::size_t axis);
/// Ties route the gradient to the first maximal index.
Var max(Var a, std::size_t axis);
Var softmax(Var a, std::size_t axis);
/// Row gather: out[i, :] = table[ids[i], :].
Var rows(Var table, std::span<const int> ids);
/// Sliding windows over the rows of a (len x d) matrix:
/// out[i, :] = flatten(a[i:i+width, :]), shape (len-width+1) x (width*d).
Var unfold(Var a, std::size_t width);

/// How grad_check normalises a coordinate's |analytic - numeric|.
///   Elementwise: by max(|analytic_i|, |numeric_i|, 1e-8).
///   PerTensor:   by the largest |analytic| or |numeric| in the same
///                parameter (floor 1e-8), so coordinates whose gradient sits
///                below finite-difference resolution do not dominate.
enum class ErrorScale { Elementwise, PerTensor };

/// Max relative error over all coordinates, with central differences of
/// step eps. f must be deterministic.
double grad_check(const std::function<Var(Tape &)> &f,
                  std::span<Parameter *const> params, double eps = 1e-6,
                  ErrorScale scale = ErrorScale::Elementwise);

} // namespace morphkit::ad

#endif // MORPHKIT_AUTODIFF_HPP
