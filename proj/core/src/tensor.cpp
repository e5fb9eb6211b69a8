// Copyright 2026 The CocoAAN Authors
// SPDX-License-Identifier: Apache-2.0

#include "cocoaan/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "cocoaan/errors.hpp"

namespace cocoaan {

std::int64_t shape_numel(const Shape& shape) {
  std::int64_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

void validate_shape(const Shape& shape) {
  if (shape.empty()) throw ShapeError("invalid shape: empty");
  for (auto d : shape) {
    if (d < 1) throw ShapeError("invalid shape: " + shape_str(shape));
  }
}

Tensor::Tensor(Shape shape, std::vector<double> data, bool requires_grad) {
  validate_shape(shape);
  if (shape_numel(shape) != static_cast<std::int64_t>(data.size())) {
    throw ShapeError("data length " + std::to_string(data.size()) + " does not match shape " +
                     shape_str(shape));
  }
  impl_ = std::make_shared<detail::TensorImpl>();
  impl_->shape = std::move(shape);
  impl_->storage = std::make_shared<std::vector<double>>(std::move(data));
  impl_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(const Shape& shape) { return full(shape, 0.0); }

Tensor Tensor::full(const Shape& shape, double value) {
  validate_shape(shape);
  return Tensor(shape, std::vector<double>(static_cast<std::size_t>(shape_numel(shape)), value));
}

Tensor Tensor::randn(const Shape& shape, Rng& rng, double mean, double stddev) {
  validate_shape(shape);
  std::vector<double> v(static_cast<std::size_t>(shape_numel(shape)));
  for (auto& x : v) x = mean + stddev * rng.normal();
  return Tensor(shape, std::move(v));
}

Tensor Tensor::uniform(const Shape& shape, Rng& rng, double lo, double hi) {
  validate_shape(shape);
  std::vector<double> v(static_cast<std::size_t>(shape_numel(shape)));
  for (auto& x : v) x = rng.uniform(lo, hi);
  return Tensor(shape, std::move(v));
}

detail::TensorImpl& Tensor::impl() const {
  if (!impl_) throw ShapeError("use of undefined tensor");
  return *impl_;
}

const Shape& Tensor::shape() const { return impl().shape; }

std::int64_t Tensor::size(std::int64_t axis) const {
  const auto& s = shape();
  if (axis < 0) axis += static_cast<std::int64_t>(s.size());
  if (axis < 0 || axis >= static_cast<std::int64_t>(s.size())) {
    throw ShapeError("axis out of range for shape " + shape_str(s));
  }
  return s[static_cast<std::size_t>(axis)];
}

std::int64_t Tensor::numel() const { return shape_numel(shape()); }

std::span<const double> Tensor::data() const { return *impl().storage; }
std::span<double> Tensor::mutable_data() { return *impl().storage; }

double Tensor::item() const {
  if (numel() != 1) throw ShapeError("item() on non-scalar tensor " + shape_str(shape()));
  return data()[0];
}

bool Tensor::all_finite() const {
  return std::all_of(data().begin(), data().end(), [](double x) { return std::isfinite(x); });
}

bool Tensor::requires_grad() const { return impl().requires_grad; }

Tensor& Tensor::set_requires_grad(bool on) {
  impl().requires_grad = on;
  return *this;
}

bool Tensor::is_leaf() const { return impl().grad_fn == nullptr; }
bool Tensor::has_grad() const { return !impl().grad.empty(); }
std::span<const double> Tensor::grad() const { return impl().grad; }
std::span<double> Tensor::mutable_grad() { return grad_buffer(*this); }
void Tensor::zero_grad() { impl().grad.clear(); }

Tensor Tensor::detach() const {
  Tensor t;
  t.impl_ = std::make_shared<detail::TensorImpl>();
  t.impl_->shape = shape();
  t.impl_->storage = impl().storage;
  return t;
}

Tensor Tensor::clone() const {
  Tensor t(shape(), std::vector<double>(data().begin(), data().end()));
  t.impl_->requires_grad = impl().requires_grad;
  return t;
}

Tensor make_result(Shape shape, std::vector<double> data, std::vector<Tensor> inputs,
                   const char* name, detail::BackwardFn backward) {
  Tensor out(std::move(shape), std::move(data));
  const bool track = std::any_of(inputs.begin(), inputs.end(),
                                 [](const Tensor& t) { return t.requires_grad(); });
  if (track) {
    auto node = std::make_shared<detail::Node>();
    node->name = name;
    node->inputs = std::move(inputs);
    node->backward = std::move(backward);
    out.impl_->requires_grad = true;
    out.impl_->grad_fn = std::move(node);
  }
  return out;
}

std::span<double> grad_buffer(const Tensor& t) {
  auto& impl = t.impl();
  if (impl.grad.empty()) impl.grad.assign(impl.storage->size(), 0.0);
  return impl.grad;
}

std::vector<Tensor> backward(const Tensor& loss) {
  if (loss.numel() != 1) {
    throw ShapeError("backward() needs a scalar loss, got " + shape_str(loss.shape()));
  }
  if (!loss.requires_grad()) return {};
  if (loss.is_leaf()) {
    grad_buffer(loss)[0] += 1.0;
    return {loss};
  }

  // Iterative post-order DFS gives a topological order of graph nodes.
  std::vector<Tensor> order;
  std::vector<Tensor> leaves;
  std::unordered_set<const void*> visited;
  struct Frame {
    Tensor t;
    std::size_t next = 0;
  };
  std::vector<Frame> stack;
  stack.push_back({loss});
  visited.insert(loss.id());
  while (!stack.empty()) {
    auto& top = stack.back();
    const auto& fn = top.t.impl().grad_fn;
    if (!fn) {
      leaves.push_back(top.t);
      stack.pop_back();
      continue;
    }
    if (top.next < fn->inputs.size()) {
      const Tensor& in = fn->inputs[top.next++];
      if (in.requires_grad() && visited.insert(in.id()).second) stack.push_back({in});
      continue;
    }
    order.push_back(top.t);
    stack.pop_back();
  }

  // Adjoints of interior nodes start from zero; leaves keep accumulating.
  for (auto& t : order) t.impl().grad.assign(t.impl().storage->size(), 0.0);
  loss.impl().grad.assign(1, 1.0);

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    auto& impl = it->impl();
    auto node = std::move(impl.grad_fn);
    std::vector<double> g = std::move(impl.grad);
    impl.grad.clear();
    impl.requires_grad = false;
    node->backward(g);
  }
  return leaves;
}

Tensor tensor_create(const Shape& shape, const Fill& fill, std::uint64_t seed) {
  Rng rng(seed);
  return std::visit(
      [&](const auto& f) -> Tensor {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, double>) {
          return Tensor::full(shape, f);
        } else if constexpr (std::is_same_v<F, NormalFill>) {
          return Tensor::randn(shape, rng, f.mean, f.stddev);
        } else {
          return Tensor::uniform(shape, rng, f.lo, f.hi);
        }
      },
      fill);
}

}  // namespace cocoaan
