// Copyright 2026 The CocoAAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cocoaan/rng.hpp"

namespace cocoaan {

using Shape = std::vector<std::int64_t>;

std::int64_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);
/// Throws ShapeError unless the shape is nonempty with every dim >= 1.
void validate_shape(const Shape& shape);

/// Arithmetic used inside the GEMM-backed kernels (conv, deconv, linear).
/// Storage is always double; f32 only lowers the matrix products.
enum class Precision { f64, f32 };

class Tensor;

namespace detail {

struct Node;

struct TensorImpl {
  Shape shape;
  std::shared_ptr<std::vector<double>> storage;
  std::vector<double> grad;
  bool requires_grad = false;
  std::shared_ptr<Node> grad_fn;
};

using BackwardFn = std::function<void(std::span<const double> grad_out)>;

// One recorded primitive. `inputs` keeps the operands alive until the
// adjoint has been replayed; the closure accumulates into their grads.
struct Node {
  const char* name = "";
  std::vector<Tensor> inputs;
  BackwardFn backward;
};

}  // namespace detail

/// Dense row-major float64 array with optional reverse-mode gradient tracking.
///
/// Copies are shallow (they alias the same node); `clone()` deep-copies.
/// A result of an op records a graph node only when some input requires a
/// gradient, so forward passes over detached parameters cost nothing extra.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> data, bool requires_grad = false);

  static Tensor zeros(const Shape& shape);
  static Tensor full(const Shape& shape, double value);
  static Tensor randn(const Shape& shape, Rng& rng, double mean = 0.0, double stddev = 1.0);
  static Tensor uniform(const Shape& shape, Rng& rng, double lo = 0.0, double hi = 1.0);
  static Tensor scalar(double value) { return Tensor({1}, {value}); }

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const;
  std::int64_t dim() const { return static_cast<std::int64_t>(shape().size()); }
  std::int64_t size(std::int64_t axis) const;
  std::int64_t numel() const;

  std::span<const double> data() const;
  /// Direct write access. Mutating a tensor that is captured by a live graph
  /// invalidates that graph's adjoints.
  std::span<double> mutable_data();
  double item() const;
  bool all_finite() const;

  bool requires_grad() const;
  Tensor& set_requires_grad(bool on);
  bool is_leaf() const;
  bool has_grad() const;
  /// Accumulated gradient; empty span when no backward pass has reached it.
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  /// Shares storage, drops gradient tracking.
  Tensor detach() const;
  Tensor clone() const;

  /// Identity of the underlying node, used for hashing/maps in tests.
  const void* id() const { return impl_.get(); }

  detail::TensorImpl& impl() const;

 private:
  friend Tensor make_result(Shape, std::vector<double>, std::vector<Tensor>, const char*,
                            detail::BackwardFn);
  std::shared_ptr<detail::TensorImpl> impl_;
};

/// Creates an op output. Records a node only if any input requires grad;
/// the backward closure must not capture the output tensor itself.
Tensor make_result(Shape shape, std::vector<double> data, std::vector<Tensor> inputs,
                   const char* name, detail::BackwardFn backward);

/// Gradient buffer of `t`, zero-allocated on first use.
std::span<double> grad_buffer(const Tensor& t);

/// Reverse-mode sweep from a scalar loss. Every reachable leaf with
/// requires_grad receives exactly one accumulated adjoint (added onto any
/// existing grad); the recorded graph is released afterwards. Returns the
/// leaves that were reached, in first-visit order.
std::vector<Tensor> backward(const Tensor& loss);

struct NormalFill {
  double mean = 0.0;
  double stddev = 1.0;
};
struct UniformFill {
  double lo = 0.0;
  double hi = 1.0;
};
using Fill = std::variant<double, NormalFill, UniformFill>;

Tensor tensor_create(const Shape& shape, const Fill& fill, std::uint64_t seed = 0);

}  // namespace cocoaan
