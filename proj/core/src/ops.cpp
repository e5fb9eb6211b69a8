// Copyright 2026 The CocoAAN Authors
// SPDX-License-Identifier: Apache-2.0

#include "cocoaan/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cocoaan/errors.hpp"
#include "gemm.hpp"

namespace cocoaan {
namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
  }
}

void require_dim(const Tensor& t, std::int64_t dims, const char* op, const char* what) {
  if (t.dim() != dims) {
    throw ShapeError(std::string(op) + ": " + what + " must be " + std::to_string(dims) +
                     "-d, got " + shape_str(t.shape()));
  }
}

template <class F, class G>
Tensor unary(const Tensor& a, const char* name, F forward, G derivative) {
  const auto x = a.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = forward(x[i]);
  return make_result(a.shape(), std::move(out), {a}, name,
                     [a, derivative](std::span<const double> g) {
                       const auto xs = a.data();
                       auto ga = grad_buffer(a);
                       for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * derivative(xs[i]);
                     });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  const auto x = a.data();
  const auto y = b.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + y[i];
  return make_result(a.shape(), std::move(out), {a, b}, "add", [a, b](std::span<const double> g) {
    for (const Tensor* t : {&a, &b}) {
      if (!t->requires_grad()) continue;
      auto gt = grad_buffer(*t);
      for (std::size_t i = 0; i < g.size(); ++i) gt[i] += g[i];
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  const auto x = a.data();
  const auto y = b.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - y[i];
  return make_result(a.shape(), std::move(out), {a, b}, "sub", [a, b](std::span<const double> g) {
    if (a.requires_grad()) {
      auto ga = grad_buffer(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (b.requires_grad()) {
      auto gb = grad_buffer(b);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  const auto x = a.data();
  const auto y = b.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * y[i];
  return make_result(a.shape(), std::move(out), {a, b}, "mul", [a, b](std::span<const double> g) {
    const auto xs = a.data();
    const auto ys = b.data();
    if (a.requires_grad()) {
      auto ga = grad_buffer(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * ys[i];
    }
    if (b.requires_grad()) {
      auto gb = grad_buffer(b);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * xs[i];
    }
  });
}

Tensor scale(const Tensor& a, double factor) {
  return unary(a, "scale", [factor](double x) { return factor * x; },
               [factor](double) { return factor; });
}

Tensor add_scalar(const Tensor& a, double value) {
  return unary(a, "add_scalar", [value](double x) { return x + value; }, [](double) { return 1.0; });
}

Tensor tanh(const Tensor& a) {
  return unary(a, "tanh", [](double x) { return std::tanh(x); },
               [](double x) {
                 const double t = std::tanh(x);
                 return 1.0 - t * t;
               });
}

Tensor relu(const Tensor& a) {
  return unary(a, "relu", [](double x) { return x > 0.0 ? x : 0.0; },
               [](double x) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor leaky_relu(const Tensor& a, double slope) {
  return unary(a, "leaky_relu", [slope](double x) { return x > 0.0 ? x : slope * x; },
               [slope](double x) { return x > 0.0 ? 1.0 : slope; });
}

Tensor abs(const Tensor& a) {
  return unary(a, "abs", [](double x) { return std::fabs(x); },
               [](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

Tensor log_sigmoid(const Tensor& a) {
  return unary(a, "log_sigmoid",
               [](double x) { return std::min(x, 0.0) - std::log1p(std::exp(-std::fabs(x))); },
               [](double x) {
                 // d/dx log sigmoid(x) = sigmoid(-x)
                 if (x >= 0.0) {
                   const double e = std::exp(-x);
                   return e / (1.0 + e);
                 }
                 return 1.0 / (1.0 + std::exp(x));
               });
}

Tensor sum(const Tensor& a) {
  const auto x = a.data();
  const double s = std::accumulate(x.begin(), x.end(), 0.0);
  return make_result({1}, {s}, {a}, "sum", [a](std::span<const double> g) {
    auto ga = grad_buffer(a);
    for (auto& v : ga) v += g[0];
  });
}

Tensor mean(const Tensor& a) {
  const auto x = a.data();
  const double n = static_cast<double>(x.size());
  const double s = std::accumulate(x.begin(), x.end(), 0.0) / n;
  return make_result({1}, {s}, {a}, "mean", [a, n](std::span<const double> g) {
    auto ga = grad_buffer(a);
    const double d = g[0] / n;
    for (auto& v : ga) v += d;
  });
}

Tensor reshape(const Tensor& a, Shape shape) {
  validate_shape(shape);
  if (shape_numel(shape) != a.numel()) {
    throw ShapeError("reshape: " + shape_str(a.shape()) + " -> " + shape_str(shape));
  }
  const auto x = a.data();
  return make_result(std::move(shape), std::vector<double>(x.begin(), x.end()), {a}, "reshape",
                     [a](std::span<const double> g) {
                       auto ga = grad_buffer(a);
                       for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                     });
}

Tensor concat(std::span<const Tensor> parts, std::int64_t axis) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  const Shape& first = parts[0].shape();
  if (axis < 0 || axis >= static_cast<std::int64_t>(first.size())) {
    throw ShapeError("concat: axis out of range for " + shape_str(first));
  }
  const auto ax = static_cast<std::size_t>(axis);
  std::int64_t outer = 1;
  std::int64_t inner = 1;
  for (std::size_t d = 0; d < ax; ++d) outer *= first[d];
  for (std::size_t d = ax + 1; d < first.size(); ++d) inner *= first[d];

  Shape out_shape = first;
  out_shape[ax] = 0;
  std::vector<std::int64_t> widths;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    bool ok = s.size() == first.size();
    for (std::size_t d = 0; ok && d < s.size(); ++d) ok = d == ax || s[d] == first[d];
    if (!ok) throw ShapeError("concat: incompatible shapes " + shape_str(first) + ", " + shape_str(s));
    widths.push_back(s[ax] * inner);
    out_shape[ax] += s[ax];
  }
  const std::int64_t row = out_shape[ax] * inner;
  std::vector<double> out(static_cast<std::size_t>(outer * row));
  std::int64_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto x = parts[k].data();
    for (std::int64_t o = 0; o < outer; ++o) {
      std::copy_n(x.begin() + o * widths[k], widths[k], out.begin() + o * row + offset);
    }
    offset += widths[k];
  }
  std::vector<Tensor> inputs(parts.begin(), parts.end());
  auto captured = inputs;
  return make_result(std::move(out_shape), std::move(out), std::move(inputs), "concat",
                     [captured, widths, outer, row](std::span<const double> g) {
                       std::int64_t off = 0;
                       for (std::size_t k = 0; k < captured.size(); ++k) {
                         if (captured[k].requires_grad()) {
                           auto gk = grad_buffer(captured[k]);
                           for (std::int64_t o = 0; o < outer; ++o) {
                             for (std::int64_t i = 0; i < widths[k]; ++i) {
                               gk[o * widths[k] + i] += g[o * row + off + i];
                             }
                           }
                         }
                         off += widths[k];
                       }
                     });
}

Tensor narrow(const Tensor& a, std::int64_t axis, std::int64_t start, std::int64_t length) {
  const Shape& s = a.shape();
  if (axis < 0 || axis >= a.dim() || start < 0 || length < 1 ||
      start + length > s[static_cast<std::size_t>(axis)]) {
    throw ShapeError("narrow: bad range on " + shape_str(s));
  }
  const auto ax = static_cast<std::size_t>(axis);
  std::int64_t outer = 1;
  std::int64_t inner = 1;
  for (std::size_t d = 0; d < ax; ++d) outer *= s[d];
  for (std::size_t d = ax + 1; d < s.size(); ++d) inner *= s[d];
  const std::int64_t src_row = s[ax] * inner;
  const std::int64_t dst_row = length * inner;
  Shape out_shape = s;
  out_shape[ax] = length;
  const auto x = a.data();
  std::vector<double> out(static_cast<std::size_t>(outer * dst_row));
  for (std::int64_t o = 0; o < outer; ++o) {
    std::copy_n(x.begin() + o * src_row + start * inner, dst_row, out.begin() + o * dst_row);
  }
  return make_result(std::move(out_shape), std::move(out), {a}, "narrow",
                     [a, outer, src_row, dst_row, start, inner](std::span<const double> g) {
                       auto ga = grad_buffer(a);
                       for (std::int64_t o = 0; o < outer; ++o) {
                         for (std::int64_t i = 0; i < dst_row; ++i) {
                           ga[o * src_row + start * inner + i] += g[o * dst_row + i];
                         }
                       }
                     });
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  require_dim(x, 2, "linear", "input");
  require_dim(weight, 2, "linear", "weight");
  const std::int64_t batch = x.size(0);
  const std::int64_t in = x.size(1);
  const std::int64_t out = weight.size(0);
  if (weight.size(1) != in) {
    throw ShapeError("linear: input dim " + std::to_string(in) + " vs weight " +
                     shape_str(weight.shape()));
  }
  if (bias.defined() && bias.shape() != Shape{out}) {
    throw ShapeError("linear: bias shape " + shape_str(bias.shape()));
  }
  const auto xs = x.data();
  const auto ws = weight.data();
  std::vector<double> y(static_cast<std::size_t>(batch * out), 0.0);
  for (std::int64_t b = 0; b < batch; ++b) {
    for (std::int64_t o = 0; o < out; ++o) {
      double acc = bias.defined() ? bias.data()[static_cast<std::size_t>(o)] : 0.0;
      for (std::int64_t i = 0; i < in; ++i) acc += ws[o * in + i] * xs[b * in + i];
      y[b * out + o] = acc;
    }
  }
  std::vector<Tensor> inputs{x, weight};
  if (bias.defined()) inputs.push_back(bias);
  return make_result({batch, out}, std::move(y), std::move(inputs), "linear",
                     [x, weight, bias, batch, in, out](std::span<const double> g) {
                       const auto xs = x.data();
                       const auto ws = weight.data();
                       if (x.requires_grad()) {
                         auto gx = grad_buffer(x);
                         for (std::int64_t b = 0; b < batch; ++b)
                           for (std::int64_t o = 0; o < out; ++o)
                             for (std::int64_t i = 0; i < in; ++i)
                               gx[b * in + i] += g[b * out + o] * ws[o * in + i];
                       }
                       if (weight.requires_grad()) {
                         auto gw = grad_buffer(weight);
                         for (std::int64_t b = 0; b < batch; ++b)
                           for (std::int64_t o = 0; o < out; ++o)
                             for (std::int64_t i = 0; i < in; ++i)
                               gw[o * in + i] += g[b * out + o] * xs[b * in + i];
                       }
                       if (bias.defined() && bias.requires_grad()) {
                         auto gb = grad_buffer(bias);
                         for (std::int64_t b = 0; b < batch; ++b)
                           for (std::int64_t o = 0; o < out; ++o) gb[o] += g[b * out + o];
                       }
                     });
}

Tensor add_channelwise(const Tensor& x, const Tensor& offsets) {
  require_dim(x, 4, "add_channelwise", "input");
  const std::int64_t batch = x.size(0);
  const std::int64_t channels = x.size(1);
  const std::int64_t plane = x.size(2) * x.size(3);
  if (offsets.shape() != Shape{batch, channels}) {
    throw ShapeError("add_channelwise: offsets " + shape_str(offsets.shape()) + " for input " +
                     shape_str(x.shape()));
  }
  const auto xs = x.data();
  const auto os = offsets.data();
  std::vector<double> y(xs.size());
  for (std::int64_t bc = 0; bc < batch * channels; ++bc) {
    for (std::int64_t p = 0; p < plane; ++p) y[bc * plane + p] = xs[bc * plane + p] + os[bc];
  }
  return make_result(x.shape(), std::move(y), {x, offsets}, "add_channelwise",
                     [x, offsets, batch, channels, plane](std::span<const double> g) {
                       if (x.requires_grad()) {
                         auto gx = grad_buffer(x);
                         for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
                       }
                       if (offsets.requires_grad()) {
                         auto go = grad_buffer(offsets);
                         for (std::int64_t bc = 0; bc < batch * channels; ++bc) {
                           double acc = 0.0;
                           for (std::int64_t p = 0; p < plane; ++p) acc += g[bc * plane + p];
                           go[bc] += acc;
                         }
                       }
                     });
}

// ---------------------------------------------------------------------------
// Convolutions via im2col + GEMM.

namespace {

// Geometry shared by conv and transposed conv. The "image" is the padded
// side (conv input / deconv output); the "grid" is the strided side.
struct Geometry {
  std::int64_t batch, channels, img_h, img_w, grid_h, grid_w, k, stride, pad;
  std::int64_t rows() const { return channels * k * k; }
  std::int64_t cols() const { return batch * grid_h * grid_w; }
};

// col[(c,ki,kj), (b,gh,gw)] = img[b, c, gh*s - p + ki, gw*s - p + kj]
template <class T>
std::vector<T> im2col(std::span<const double> img, const Geometry& g) {
  std::vector<T> col(static_cast<std::size_t>(g.rows() * g.cols()), T(0));
  const std::int64_t grid = g.grid_h * g.grid_w;
  for (std::int64_t c = 0; c < g.channels; ++c) {
    for (std::int64_t ki = 0; ki < g.k; ++ki) {
      for (std::int64_t kj = 0; kj < g.k; ++kj) {
        T* dst = col.data() + ((c * g.k + ki) * g.k + kj) * g.cols();
        for (std::int64_t b = 0; b < g.batch; ++b) {
          const double* src = img.data() + (b * g.channels + c) * g.img_h * g.img_w;
          for (std::int64_t gh = 0; gh < g.grid_h; ++gh) {
            const std::int64_t ih = gh * g.stride - g.pad + ki;
            T* row = dst + b * grid + gh * g.grid_w;
            if (ih < 0 || ih >= g.img_h) continue;
            for (std::int64_t gw = 0; gw < g.grid_w; ++gw) {
              const std::int64_t iw = gw * g.stride - g.pad + kj;
              if (iw >= 0 && iw < g.img_w) row[gw] = static_cast<T>(src[ih * g.img_w + iw]);
            }
          }
        }
      }
    }
  }
  return col;
}

template <class T>
void col2im_add(const std::vector<T>& col, const Geometry& g, std::span<double> img) {
  const std::int64_t grid = g.grid_h * g.grid_w;
  for (std::int64_t c = 0; c < g.channels; ++c) {
    for (std::int64_t ki = 0; ki < g.k; ++ki) {
      for (std::int64_t kj = 0; kj < g.k; ++kj) {
        const T* srcrow = col.data() + ((c * g.k + ki) * g.k + kj) * g.cols();
        for (std::int64_t b = 0; b < g.batch; ++b) {
          double* dst = img.data() + (b * g.channels + c) * g.img_h * g.img_w;
          for (std::int64_t gh = 0; gh < g.grid_h; ++gh) {
            const std::int64_t ih = gh * g.stride - g.pad + ki;
            if (ih < 0 || ih >= g.img_h) continue;
            const T* row = srcrow + b * grid + gh * g.grid_w;
            for (std::int64_t gw = 0; gw < g.grid_w; ++gw) {
              const std::int64_t iw = gw * g.stride - g.pad + kj;
              if (iw >= 0 && iw < g.img_w) dst[ih * g.img_w + iw] += static_cast<double>(row[gw]);
            }
          }
        }
      }
    }
  }
}

template <class T>
std::vector<T> convert(std::span<const double> v) {
  std::vector<T> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [](double x) { return static_cast<T>(x); });
  return out;
}

// [B, C, P] <-> [C, B*P]
template <class T>
std::vector<T> batch_to_channel_major(std::span<const double> x, std::int64_t batch,
                                      std::int64_t channels, std::int64_t plane) {
  std::vector<T> out(x.size());
  for (std::int64_t b = 0; b < batch; ++b)
    for (std::int64_t c = 0; c < channels; ++c)
      for (std::int64_t p = 0; p < plane; ++p)
        out[(c * batch + b) * plane + p] = static_cast<T>(x[(b * channels + c) * plane + p]);
  return out;
}

template <class T>
void channel_major_to_batch_add(const std::vector<T>& m, std::int64_t batch, std::int64_t channels,
                                std::int64_t plane, std::span<double> out) {
  for (std::int64_t c = 0; c < channels; ++c)
    for (std::int64_t b = 0; b < batch; ++b)
      for (std::int64_t p = 0; p < plane; ++p)
        out[(b * channels + c) * plane + p] += static_cast<double>(m[(c * batch + b) * plane + p]);
}

void add_bias(std::span<double> y, const Tensor& bias, std::int64_t batch, std::int64_t channels,
              std::int64_t plane) {
  if (!bias.defined()) return;
  const auto bs = bias.data();
  for (std::int64_t b = 0; b < batch; ++b)
    for (std::int64_t c = 0; c < channels; ++c)
      for (std::int64_t p = 0; p < plane; ++p) y[(b * channels + c) * plane + p] += bs[c];
}

void accumulate_bias_grad(std::span<const double> g, const Tensor& bias, std::int64_t batch,
                          std::int64_t channels, std::int64_t plane) {
  if (!bias.defined() || !bias.requires_grad()) return;
  auto gb = grad_buffer(bias);
  for (std::int64_t b = 0; b < batch; ++b)
    for (std::int64_t c = 0; c < channels; ++c) {
      double acc = 0.0;
      for (std::int64_t p = 0; p < plane; ++p) acc += g[(b * channels + c) * plane + p];
      gb[c] += acc;
    }
}

void check_conv_args(const Tensor& x, const Tensor& weight, const Tensor& bias, int stride,
                     int padding, std::int64_t bias_channels, const char* op) {
  require_dim(x, 4, op, "input");
  require_dim(weight, 4, op, "weight");
  if (weight.size(2) != weight.size(3)) throw ShapeError(std::string(op) + ": kernel not square");
  if (stride < 1 || padding < 0) throw ShapeError(std::string(op) + ": bad stride/padding");
  if (bias.defined() && bias.shape() != Shape{bias_channels}) {
    throw ShapeError(std::string(op) + ": bias shape " + shape_str(bias.shape()));
  }
}

template <class T>
Tensor conv2d_impl(const Tensor& x, const Tensor& weight, const Tensor& bias, int stride,
                   int padding) {
  const std::int64_t out_ch = weight.size(0);
  const std::int64_t k = weight.size(2);
  const std::int64_t span_h = x.size(2) + 2 * padding - k;
  const std::int64_t span_w = x.size(3) + 2 * padding - k;
  if (span_h < 0 || span_w < 0) {
    throw ShapeError("conv2d: kernel larger than padded input " + shape_str(x.shape()));
  }
  const Geometry g{x.size(0), x.size(1), x.size(2), x.size(3), span_h / stride + 1,
                   span_w / stride + 1, k, stride, padding};
  const std::int64_t plane = g.grid_h * g.grid_w;

  auto col = std::make_shared<std::vector<T>>(im2col<T>(x.data(), g));
  const auto w = convert<T>(weight.data());
  std::vector<T> ymat(static_cast<std::size_t>(out_ch * g.cols()));
  detail::gemm<T>(false, false, out_ch, g.cols(), g.rows(), w.data(), col->data(), T(0),
                  ymat.data());
  std::vector<double> y(static_cast<std::size_t>(g.batch * out_ch * plane), 0.0);
  channel_major_to_batch_add(ymat, g.batch, out_ch, plane, y);
  add_bias(y, bias, g.batch, out_ch, plane);

  if (!weight.requires_grad()) col.reset();
  std::vector<Tensor> inputs{x, weight};
  if (bias.defined()) inputs.push_back(bias);
  return make_result(
      {g.batch, out_ch, g.grid_h, g.grid_w}, std::move(y), std::move(inputs), "conv2d",
      [x, weight, bias, g, out_ch, plane, col](std::span<const double> grad) {
        const auto gmat = batch_to_channel_major<T>(grad, g.batch, out_ch, plane);
        if (weight.requires_grad()) {
          std::vector<T> gw(static_cast<std::size_t>(out_ch * g.rows()));
          detail::gemm<T>(false, true, out_ch, g.rows(), g.cols(), gmat.data(), col->data(), T(0),
                          gw.data());
          auto dst = grad_buffer(weight);
          for (std::size_t i = 0; i < gw.size(); ++i) dst[i] += static_cast<double>(gw[i]);
        }
        accumulate_bias_grad(grad, bias, g.batch, out_ch, plane);
        if (x.requires_grad()) {
          const auto w = convert<T>(weight.data());
          std::vector<T> gcol(static_cast<std::size_t>(g.rows() * g.cols()));
          detail::gemm<T>(true, false, g.rows(), g.cols(), out_ch, w.data(), gmat.data(), T(0),
                          gcol.data());
          col2im_add(gcol, g, grad_buffer(x));
        }
      });
}

template <class T>
Tensor conv_transpose2d_impl(const Tensor& x, const Tensor& weight, const Tensor& bias, int stride,
                             int padding) {
  const std::int64_t in_ch = weight.size(0);
  const std::int64_t out_ch = weight.size(1);
  const std::int64_t k = weight.size(2);
  const std::int64_t out_h = (x.size(2) - 1) * stride - 2 * padding + k;
  const std::int64_t out_w = (x.size(3) - 1) * stride - 2 * padding + k;
  if (out_h < 1 || out_w < 1) {
    throw ShapeError("conv_transpose2d: empty output for input " + shape_str(x.shape()));
  }
  // The output is the image side; the input grid is the strided side.
  const Geometry g{x.size(0), out_ch, out_h, out_w, x.size(2), x.size(3), k, stride, padding};
  const std::int64_t in_plane = g.grid_h * g.grid_w;

  auto xmat = std::make_shared<std::vector<T>>(
      batch_to_channel_major<T>(x.data(), g.batch, in_ch, in_plane));
  const auto w = convert<T>(weight.data());
  std::vector<T> col(static_cast<std::size_t>(g.rows() * g.cols()));
  detail::gemm<T>(true, false, g.rows(), g.cols(), in_ch, w.data(), xmat->data(), T(0),
                  col.data());
  std::vector<double> y(static_cast<std::size_t>(g.batch * out_ch * out_h * out_w), 0.0);
  col2im_add(col, g, y);
  add_bias(y, bias, g.batch, out_ch, out_h * out_w);

  if (!weight.requires_grad()) xmat.reset();
  std::vector<Tensor> inputs{x, weight};
  if (bias.defined()) inputs.push_back(bias);
  return make_result(
      {g.batch, out_ch, out_h, out_w}, std::move(y), std::move(inputs), "conv_transpose2d",
      [x, weight, bias, g, in_ch, out_ch, in_plane, xmat](std::span<const double> grad) {
        accumulate_bias_grad(grad, bias, g.batch, out_ch, g.img_h * g.img_w);
        if (!weight.requires_grad() && !x.requires_grad()) return;
        const auto gcol = im2col<T>(grad, g);
        if (weight.requires_grad()) {
          std::vector<T> gw(static_cast<std::size_t>(in_ch * g.rows()));
          detail::gemm<T>(false, true, in_ch, g.rows(), g.cols(), xmat->data(), gcol.data(), T(0),
                          gw.data());
          auto dst = grad_buffer(weight);
          for (std::size_t i = 0; i < gw.size(); ++i) dst[i] += static_cast<double>(gw[i]);
        }
        if (x.requires_grad()) {
          const auto w = convert<T>(weight.data());
          std::vector<T> gx(static_cast<std::size_t>(in_ch * g.cols()));
          detail::gemm<T>(false, false, in_ch, g.cols(), g.rows(), w.data(), gcol.data(), T(0),
                          gx.data());
          channel_major_to_batch_add(gx, g.batch, in_ch, in_plane, grad_buffer(x));
        }
      });
}

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias, int stride, int padding,
              Precision precision) {
  check_conv_args(x, weight, bias, stride, padding, weight.defined() ? weight.size(0) : 0,
                  "conv2d");
  if (x.size(1) != weight.size(1)) {
    throw ShapeError("conv2d: input channels " + std::to_string(x.size(1)) + " vs weight " +
                     shape_str(weight.shape()));
  }
  return precision == Precision::f32 ? conv2d_impl<float>(x, weight, bias, stride, padding)
                                     : conv2d_impl<double>(x, weight, bias, stride, padding);
}

Tensor conv_transpose2d(const Tensor& x, const Tensor& weight, const Tensor& bias, int stride,
                        int padding, Precision precision) {
  check_conv_args(x, weight, bias, stride, padding, weight.defined() ? weight.size(1) : 0,
                  "conv_transpose2d");
  if (x.size(1) != weight.size(0)) {
    throw ShapeError("conv_transpose2d: input channels " + std::to_string(x.size(1)) +
                     " vs weight " + shape_str(weight.shape()));
  }
  return precision == Precision::f32
             ? conv_transpose2d_impl<float>(x, weight, bias, stride, padding)
             : conv_transpose2d_impl<double>(x, weight, bias, stride, padding);
}

// ---------------------------------------------------------------------------

namespace {

void check_bn_args(const Tensor& x, const Tensor& gamma, const Tensor& beta) {
  if (x.dim() != 4 && x.dim() != 2) {
    throw ShapeError("batch_norm: input must be [B,C] or [B,C,H,W], got " + shape_str(x.shape()));
  }
  const Shape ch{x.size(1)};
  if (gamma.shape() != ch || beta.shape() != ch) {
    throw ShapeError("batch_norm: affine params must be " + shape_str(ch));
  }
}

std::int64_t bn_plane(const Tensor& x) { return x.dim() == 4 ? x.size(2) * x.size(3) : 1; }

}  // namespace

Tensor batch_norm_train(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps,
                        BatchMoments* moments) {
  check_bn_args(x, gamma, beta);
  const std::int64_t batch = x.size(0);
  if (batch < 2) throw ShapeError("batch_norm: degenerate batch of 1 in train mode");
  const std::int64_t channels = x.size(1);
  const std::int64_t plane = bn_plane(x);
  const double count = static_cast<double>(batch * plane);
  const auto xs = x.data();
  const auto gs = gamma.data();
  const auto bs = beta.data();

  std::vector<double> mu(static_cast<std::size_t>(channels), 0.0);
  std::vector<double> var(static_cast<std::size_t>(channels), 0.0);
  for (std::int64_t b = 0; b < batch; ++b)
    for (std::int64_t c = 0; c < channels; ++c)
      for (std::int64_t p = 0; p < plane; ++p) mu[c] += xs[(b * channels + c) * plane + p];
  for (auto& m : mu) m /= count;
  for (std::int64_t b = 0; b < batch; ++b)
    for (std::int64_t c = 0; c < channels; ++c)
      for (std::int64_t p = 0; p < plane; ++p) {
        const double d = xs[(b * channels + c) * plane + p] - mu[c];
        var[c] += d * d;
      }
  for (auto& v : var) v /= count;

  std::vector<double> inv_std(static_cast<std::size_t>(channels));
  for (std::int64_t c = 0; c < channels; ++c) inv_std[c] = 1.0 / std::sqrt(var[c] + eps);
  auto xhat = std::make_shared<std::vector<double>>(xs.size());
  std::vector<double> y(xs.size());
  for (std::int64_t b = 0; b < batch; ++b)
    for (std::int64_t c = 0; c < channels; ++c)
      for (std::int64_t p = 0; p < plane; ++p) {
        const auto i = (b * channels + c) * plane + p;
        (*xhat)[i] = (xs[i] - mu[c]) * inv_std[c];
        y[i] = gs[c] * (*xhat)[i] + bs[c];
      }
  if (moments) *moments = {mu, var};

  return make_result(
      x.shape(), std::move(y), {x, gamma, beta}, "batch_norm_train",
      [x, gamma, beta, xhat, inv_std, batch, channels, plane, count](std::span<const double> g) {
        const auto gs = gamma.data();
        std::vector<double> sum_g(static_cast<std::size_t>(channels), 0.0);
        std::vector<double> sum_gx(static_cast<std::size_t>(channels), 0.0);
        for (std::int64_t b = 0; b < batch; ++b)
          for (std::int64_t c = 0; c < channels; ++c)
            for (std::int64_t p = 0; p < plane; ++p) {
              const auto i = (b * channels + c) * plane + p;
              sum_g[c] += g[i];
              sum_gx[c] += g[i] * (*xhat)[i];
            }
        if (gamma.requires_grad()) {
          auto gg = grad_buffer(gamma);
          for (std::int64_t c = 0; c < channels; ++c) gg[c] += sum_gx[c];
        }
        if (beta.requires_grad()) {
          auto gb = grad_buffer(beta);
          for (std::int64_t c = 0; c < channels; ++c) gb[c] += sum_g[c];
        }
        if (x.requires_grad()) {
          auto gx = grad_buffer(x);
          for (std::int64_t b = 0; b < batch; ++b)
            for (std::int64_t c = 0; c < channels; ++c) {
              const double k = gs[c] * inv_std[c] / count;
              for (std::int64_t p = 0; p < plane; ++p) {
                const auto i = (b * channels + c) * plane + p;
                gx[i] += k * (count * g[i] - sum_g[c] - (*xhat)[i] * sum_gx[c]);
              }
            }
        }
      });
}

Tensor batch_norm_eval(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                       std::span<const double> mean, std::span<const double> var, double eps) {
  check_bn_args(x, gamma, beta);
  const std::int64_t batch = x.size(0);
  const std::int64_t channels = x.size(1);
  const std::int64_t plane = bn_plane(x);
  if (static_cast<std::int64_t>(mean.size()) != channels ||
      static_cast<std::int64_t>(var.size()) != channels) {
    throw ShapeError("batch_norm: running statistics size mismatch");
  }
  const auto xs = x.data();
  const auto gs = gamma.data();
  const auto bs = beta.data();
  std::vector<double> inv_std(static_cast<std::size_t>(channels));
  for (std::int64_t c = 0; c < channels; ++c) inv_std[c] = 1.0 / std::sqrt(var[c] + eps);
  std::vector<double> mu(mean.begin(), mean.end());
  std::vector<double> y(xs.size());
  for (std::int64_t b = 0; b < batch; ++b)
    for (std::int64_t c = 0; c < channels; ++c)
      for (std::int64_t p = 0; p < plane; ++p) {
        const auto i = (b * channels + c) * plane + p;
        y[i] = gs[c] * (xs[i] - mu[c]) * inv_std[c] + bs[c];
      }
  return make_result(x.shape(), std::move(y), {x, gamma, beta}, "batch_norm_eval",
                     [x, gamma, beta, mu, inv_std, batch, channels, plane](std::span<const double> g) {
                       const auto xs = x.data();
                       const auto gs = gamma.data();
                       for (std::int64_t b = 0; b < batch; ++b)
                         for (std::int64_t c = 0; c < channels; ++c)
                           for (std::int64_t p = 0; p < plane; ++p) {
                             const auto i = (b * channels + c) * plane + p;
                             const double xhat = (xs[i] - mu[c]) * inv_std[c];
                             if (x.requires_grad()) grad_buffer(x)[i] += g[i] * gs[c] * inv_std[c];
                             if (gamma.requires_grad()) grad_buffer(gamma)[c] += g[i] * xhat;
                             if (beta.requires_grad()) grad_buffer(beta)[c] += g[i];
                           }
                     });
}

Tensor spectral_divide(const Tensor& weight, std::span<const double> u, std::span<const double> v) {
  const std::int64_t rows = weight.size(0);
  const std::int64_t cols = weight.numel() / rows;
  if (static_cast<std::int64_t>(u.size()) != rows || static_cast<std::int64_t>(v.size()) != cols) {
    throw ShapeError("spectral_divide: singular vector sizes do not match " +
                     shape_str(weight.shape()));
  }
  const auto w = weight.data();
  double sigma = 0.0;
  for (std::int64_t r = 0; r < rows; ++r) {
    double acc = 0.0;
    for (std::int64_t c = 0; c < cols; ++c) acc += w[r * cols + c] * v[c];
    sigma += u[r] * acc;
  }
  if (!(std::fabs(sigma) > 1e-12)) {
    throw NumericError("spectral_divide: estimated spectral norm is zero");
  }
  std::vector<double> y(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) y[i] = w[i] / sigma;
  std::vector<double> uu(u.begin(), u.end());
  std::vector<double> vv(v.begin(), v.end());
  return make_result(weight.shape(), std::move(y), {weight}, "spectral_divide",
                     [weight, uu, vv, sigma, rows, cols](std::span<const double> g) {
                       const auto w = weight.data();
                       double gw_dot = 0.0;
                       for (std::size_t i = 0; i < g.size(); ++i) gw_dot += g[i] * w[i];
                       const double k = gw_dot / (sigma * sigma);
                       auto gwt = grad_buffer(weight);
                       for (std::int64_t r = 0; r < rows; ++r)
                         for (std::int64_t c = 0; c < cols; ++c)
                           gwt[r * cols + c] += g[r * cols + c] / sigma - k * uu[r] * vv[c];
                     });
}

}  // namespace cocoaan
