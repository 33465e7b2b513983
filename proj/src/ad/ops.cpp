#include "fsegan/ad/ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Core>

namespace fsegan::ad {

namespace {

/// Extents shared by the three convolution kernels. "big" is the conv2d
/// input side, "small" the conv2d output side.
struct ConvDims {
  std::size_t n, big_h, big_w, big_c, small_h, small_w, small_c, kh, kw;
  ConvGeometry geom;

  // Range of output rows whose receptive field includes input row via tap ky.
  bool in_row(std::size_t oh, std::size_t ky, std::size_t& ih) const {
    const std::ptrdiff_t r = static_cast<std::ptrdiff_t>(oh * geom.stride_h + ky) -
                             static_cast<std::ptrdiff_t>(geom.pad_top);
    if (r < 0 || r >= static_cast<std::ptrdiff_t>(big_h)) return false;
    ih = static_cast<std::size_t>(r);
    return true;
  }
  bool in_col(std::size_t ow, std::size_t kx, std::size_t& iw) const {
    const std::ptrdiff_t c = static_cast<std::ptrdiff_t>(ow * geom.stride_w + kx) -
                             static_cast<std::ptrdiff_t>(geom.pad_left);
    if (c < 0 || c >= static_cast<std::ptrdiff_t>(big_w)) return false;
    iw = static_cast<std::size_t>(c);
    return true;
  }
};

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapM = Eigen::Map<RowMatrix<T>>;
template <typename T>
using MapCM = Eigen::Map<const RowMatrix<T>>;

// Unrolls sample n of `big` into a (positions x taps*cin) matrix, zero in
// the padding.
template <typename T>
void im2col(const ConvDims& d, std::size_t n, const T* big, std::vector<T>& col) {
  const std::size_t cin = d.big_c, taps = d.kh * d.kw;
  col.assign(d.small_h * d.small_w * taps * cin, T{0});
  T* out = col.data();
  for (std::size_t oh = 0; oh < d.small_h; ++oh) {
    for (std::size_t ow = 0; ow < d.small_w; ++ow) {
      for (std::size_t ky = 0; ky < d.kh; ++ky) {
        std::size_t ih;
        const bool row_ok = d.in_row(oh, ky, ih);
        for (std::size_t kx = 0; kx < d.kw; ++kx, out += cin) {
          std::size_t iw;
          if (!row_ok || !d.in_col(ow, kx, iw)) continue;
          const T* x = big + ((n * d.big_h + ih) * d.big_w + iw) * cin;
          std::copy(x, x + cin, out);
        }
      }
    }
  }
}

// Adds the columns back onto sample n of `big`, the adjoint of im2col.
template <typename T>
void col2im(const ConvDims& d, std::size_t n, const std::vector<T>& col, T* big) {
  const std::size_t cin = d.big_c;
  const T* in = col.data();
  for (std::size_t oh = 0; oh < d.small_h; ++oh) {
    for (std::size_t ow = 0; ow < d.small_w; ++ow) {
      for (std::size_t ky = 0; ky < d.kh; ++ky) {
        std::size_t ih;
        const bool row_ok = d.in_row(oh, ky, ih);
        for (std::size_t kx = 0; kx < d.kw; ++kx, in += cin) {
          std::size_t iw;
          if (!row_ok || !d.in_col(ow, kx, iw)) continue;
          T* x = big + ((n * d.big_h + ih) * d.big_w + iw) * cin;
          for (std::size_t ci = 0; ci < cin; ++ci) x[ci] += in[ci];
        }
      }
    }
  }
}

// small[n, oh, ow, co] += sum big[n, ih, iw, ci] * K[ky, kx, ci, co]
template <typename T>
void conv_gather(const ConvDims& d, const T* big, const T* kernel, T* small) {
  const auto positions = static_cast<Eigen::Index>(d.small_h * d.small_w);
  const auto depth = static_cast<Eigen::Index>(d.kh * d.kw * d.big_c);
  const auto cout = static_cast<Eigen::Index>(d.small_c);
  MapCM<T> k(kernel, depth, cout);
  std::vector<T> col;
  for (std::size_t n = 0; n < d.n; ++n) {
    im2col(d, n, big, col);
    MapM<T> out(small + n * positions * cout, positions, cout);
    out.noalias() += MapCM<T>(col.data(), positions, depth) * k;
  }
}

// big[n, ih, iw, ci] += sum small[n, oh, ow, co] * K[ky, kx, ci, co]
template <typename T>
void conv_scatter(const ConvDims& d, const T* small, const T* kernel, T* big) {
  const auto positions = static_cast<Eigen::Index>(d.small_h * d.small_w);
  const auto depth = static_cast<Eigen::Index>(d.kh * d.kw * d.big_c);
  const auto cout = static_cast<Eigen::Index>(d.small_c);
  MapCM<T> k(kernel, depth, cout);
  std::vector<T> col(static_cast<std::size_t>(positions * depth));
  for (std::size_t n = 0; n < d.n; ++n) {
    MapM<T> c(col.data(), positions, depth);
    c.noalias() = MapCM<T>(small + n * positions * cout, positions, cout) * k.transpose();
    col2im(d, n, col, big);
  }
}

// dK[ky, kx, ci, co] += sum big[n, ih, iw, ci] * small[n, oh, ow, co]
template <typename T>
void conv_kernel_grad(const ConvDims& d, const T* big, const T* small, T* dkernel) {
  const auto positions = static_cast<Eigen::Index>(d.small_h * d.small_w);
  const auto depth = static_cast<Eigen::Index>(d.kh * d.kw * d.big_c);
  const auto cout = static_cast<Eigen::Index>(d.small_c);
  MapM<T> dk(dkernel, depth, cout);
  std::vector<T> col;
  for (std::size_t n = 0; n < d.n; ++n) {
    im2col(d, n, big, col);
    dk.noalias() += MapCM<T>(col.data(), positions, depth).transpose() *
                    MapCM<T>(small + n * positions * cout, positions, cout);
  }
}

void require_rank(const Shape& s, std::size_t rank, const char* what) {
  if (s.size() != rank) {
    throw std::invalid_argument(std::string(what) + ": expected rank " + std::to_string(rank) + ", got " +
                                shape_string(s));
  }
}

template <typename T, typename F, typename G>
Tensor<T> unary(const Tensor<T>& x, F forward, G derivative) {
  std::vector<T> out(x.size());
  const auto in = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = forward(in[i]);
  return make_result<T>(x.shape(), std::move(out), {x}, [derivative](Node<T>& self) {
    auto& p = *self.parents[0];
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      p.grad[i] += self.grad[i] * derivative(p.data[i], self.data[i]);
    }
  });
}

}  // namespace

ConvGeometry ConvGeometry::same(std::size_t kernel_h, std::size_t kernel_w, std::size_t stride_h,
                                std::size_t stride_w) {
  auto split = [](std::size_t k, std::size_t& lo, std::size_t& hi) {
    if (k % 2 == 0) {
      lo = k / 2 - 1;
      hi = k / 2;
    } else {
      lo = hi = k / 2;
    }
  };
  ConvGeometry g;
  g.stride_h = stride_h;
  g.stride_w = stride_w;
  split(kernel_h, g.pad_top, g.pad_bottom);
  split(kernel_w, g.pad_left, g.pad_right);
  return g;
}

std::size_t conv_out_extent(std::size_t in, std::size_t kernel, std::size_t stride, std::size_t pad_lo,
                            std::size_t pad_hi) {
  const std::size_t padded = in + pad_lo + pad_hi;
  if (padded < kernel) throw std::invalid_argument("convolution kernel larger than padded input");
  return (padded - kernel) / stride + 1;
}

template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& kernel, const ConvGeometry& geom) {
  require_rank(input.shape(), 4, "conv2d input");
  require_rank(kernel.shape(), 4, "conv2d kernel");
  if (input.dim(3) != kernel.dim(2)) {
    throw std::invalid_argument("conv2d channel mismatch: input " + shape_string(input.shape()) + ", kernel " +
                                shape_string(kernel.shape()));
  }
  ConvDims d{input.dim(0), input.dim(1), input.dim(2), input.dim(3), 0, 0, kernel.dim(3),
             kernel.dim(0), kernel.dim(1), geom};
  d.small_h = conv_out_extent(d.big_h, d.kh, geom.stride_h, geom.pad_top, geom.pad_bottom);
  d.small_w = conv_out_extent(d.big_w, d.kw, geom.stride_w, geom.pad_left, geom.pad_right);
  std::vector<T> out(d.n * d.small_h * d.small_w * d.small_c, T{0});
  conv_gather(d, input.data().data(), kernel.data().data(), out.data());
  return make_result<T>({d.n, d.small_h, d.small_w, d.small_c}, std::move(out), {input, kernel},
                        [d](Node<T>& self) {
                          auto& x = *self.parents[0];
                          auto& k = *self.parents[1];
                          if (x.requires_grad) conv_scatter(d, self.grad.data(), k.data.data(), x.grad.data());
                          if (k.requires_grad) {
                            conv_kernel_grad(d, x.data.data(), self.grad.data(), k.grad.data());
                          }
                        });
}

template <typename T>
Tensor<T> conv2d_transpose(const Tensor<T>& input, const Tensor<T>& kernel, const ConvGeometry& geom,
                           std::size_t out_h, std::size_t out_w) {
  require_rank(input.shape(), 4, "conv2d_transpose input");
  require_rank(kernel.shape(), 4, "conv2d_transpose kernel");
  if (input.dim(3) != kernel.dim(3)) {
    throw std::invalid_argument("conv2d_transpose channel mismatch: input " + shape_string(input.shape()) +
                                ", kernel " + shape_string(kernel.shape()));
  }
  ConvDims d{input.dim(0), out_h, out_w, kernel.dim(2), input.dim(1), input.dim(2), input.dim(3),
             kernel.dim(0), kernel.dim(1), geom};
  if (conv_out_extent(out_h, d.kh, geom.stride_h, geom.pad_top, geom.pad_bottom) != d.small_h ||
      conv_out_extent(out_w, d.kw, geom.stride_w, geom.pad_left, geom.pad_right) != d.small_w) {
    throw std::invalid_argument("conv2d_transpose output extent inconsistent with geometry");
  }
  std::vector<T> out(d.n * out_h * out_w * d.big_c, T{0});
  conv_scatter(d, input.data().data(), kernel.data().data(), out.data());
  return make_result<T>({d.n, out_h, out_w, d.big_c}, std::move(out), {input, kernel}, [d](Node<T>& self) {
    auto& x = *self.parents[0];
    auto& k = *self.parents[1];
    if (x.requires_grad) conv_gather(d, self.grad.data(), k.data.data(), x.grad.data());
    if (k.requires_grad) conv_kernel_grad(d, self.grad.data(), x.data.data(), k.grad.data());
  });
}

template <typename T>
Tensor<T> conv1d(const Tensor<T>& input, const Tensor<T>& kernel, std::size_t stride, std::size_t pad_left,
                 std::size_t pad_right) {
  require_rank(input.shape(), 3, "conv1d input");
  require_rank(kernel.shape(), 3, "conv1d kernel");
  ConvGeometry g;
  g.stride_w = stride;
  g.pad_left = pad_left;
  g.pad_right = pad_right;
  auto x4 = reshape(input, {input.dim(0), 1, input.dim(1), input.dim(2)});
  auto k4 = reshape(kernel, {1, kernel.dim(0), kernel.dim(1), kernel.dim(2)});
  auto y = conv2d(x4, k4, g);
  return reshape(y, {y.dim(0), y.dim(2), y.dim(3)});
}

template <typename T>
Tensor<T> conv1d_transpose(const Tensor<T>& input, const Tensor<T>& kernel, std::size_t stride,
                           std::size_t pad_left, std::size_t pad_right, std::size_t out_len) {
  require_rank(input.shape(), 3, "conv1d_transpose input");
  require_rank(kernel.shape(), 3, "conv1d_transpose kernel");
  ConvGeometry g;
  g.stride_w = stride;
  g.pad_left = pad_left;
  g.pad_right = pad_right;
  auto x4 = reshape(input, {input.dim(0), 1, input.dim(1), input.dim(2)});
  auto k4 = reshape(kernel, {1, kernel.dim(0), kernel.dim(1), kernel.dim(2)});
  auto y = conv2d_transpose(x4, k4, g, 1, out_len);
  return reshape(y, {y.dim(0), y.dim(2), y.dim(3)});
}

template <typename T>
Tensor<T> add_bias(const Tensor<T>& input, const Tensor<T>& bias) {
  const std::size_t c = bias.size();
  if (input.rank() == 0 || input.shape().back() != c) {
    throw std::invalid_argument("add_bias: bias of size " + std::to_string(c) + " does not match " +
                                shape_string(input.shape()));
  }
  std::vector<T> out(input.data().begin(), input.data().end());
  const auto b = bias.data();
  for (std::size_t i = 0; i < out.size(); i += c) {
    for (std::size_t j = 0; j < c; ++j) out[i + j] += b[j];
  }
  return make_result<T>(input.shape(), std::move(out), {input, bias}, [c](Node<T>& self) {
    auto& x = *self.parents[0];
    auto& b = *self.parents[1];
    if (x.requires_grad) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) x.grad[i] += self.grad[i];
    }
    if (b.requires_grad) {
      for (std::size_t i = 0; i < self.grad.size(); i += c) {
        for (std::size_t j = 0; j < c; ++j) b.grad[j] += self.grad[i + j];
      }
    }
  });
}

template <typename T>
Tensor<T> leaky_relu(const Tensor<T>& x, T slope) {
  return unary(
      x, [slope](T v) { return v > T{0} ? v : slope * v; },
      [slope](T in, T) { return in > T{0} ? T{1} : slope; });
}

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  return unary(
      x, [](T v) { return v > T{0} ? v : T{0}; }, [](T in, T) { return in > T{0} ? T{1} : T{0}; });
}

template <typename T>
Tensor<T> tanh(const Tensor<T>& x) {
  return unary(
      x, [](T v) { return std::tanh(v); }, [](T, T out) { return T{1} - out * out; });
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x) {
  return unary(
      x,
      [](T v) {
        if (v >= T{0}) return T{1} / (T{1} + std::exp(-v));
        const T e = std::exp(v);
        return e / (T{1} + e);
      },
      [](T, T out) { return out * (T{1} - out); });
}

template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.rank() != b.rank() || a.rank() == 0) throw std::invalid_argument("concat_channels: rank mismatch");
  for (std::size_t i = 0; i + 1 < a.rank(); ++i) {
    if (a.dim(i) != b.dim(i)) {
      throw std::invalid_argument("concat_channels: shape mismatch " + shape_string(a.shape()) + " vs " +
                                  shape_string(b.shape()));
    }
  }
  const std::size_t ca = a.shape().back(), cb = b.shape().back(), rows = a.size() / ca;
  Shape shape = a.shape();
  shape.back() = ca + cb;
  std::vector<T> out(rows * (ca + cb));
  const auto da = a.data();
  const auto db = b.data();
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(da.begin() + r * ca, ca, out.begin() + r * (ca + cb));
    std::copy_n(db.begin() + r * cb, cb, out.begin() + r * (ca + cb) + ca);
  }
  return make_result<T>(std::move(shape), std::move(out), {a, b}, [ca, cb, rows](Node<T>& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    for (std::size_t r = 0; r < rows; ++r) {
      const T* g = self.grad.data() + r * (ca + cb);
      if (pa.requires_grad) {
        for (std::size_t j = 0; j < ca; ++j) pa.grad[r * ca + j] += g[j];
      }
      if (pb.requires_grad) {
        for (std::size_t j = 0; j < cb; ++j) pb.grad[r * cb + j] += g[ca + j];
      }
    }
  });
}

template <typename T>
Tensor<T> batch_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, T eps) {
  const std::size_t c = gamma.size();
  if (x.rank() == 0 || x.shape().back() != c || beta.size() != c) {
    throw std::invalid_argument("batch_norm: parameter size does not match " + shape_string(x.shape()));
  }
  const std::size_t m = x.size() / c;
  if (m == 0) throw std::invalid_argument("batch_norm on empty tensor");
  const auto in = x.data();
  std::vector<double> mu(c, 0.0), var(c, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < c; ++j) mu[j] += in[i * c + j];
  }
  for (auto& v : mu) v /= static_cast<double>(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      const double dv = in[i * c + j] - mu[j];
      var[j] += dv * dv;
    }
  }
  std::vector<T> inv_std(c);
  for (std::size_t j = 0; j < c; ++j) {
    inv_std[j] = static_cast<T>(1.0 / std::sqrt(var[j] / static_cast<double>(m) + static_cast<double>(eps)));
  }
  std::vector<T> xhat(x.size());
  std::vector<T> out(x.size());
  const auto g = gamma.data();
  const auto b = beta.data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      const T h = static_cast<T>((in[i * c + j] - mu[j])) * inv_std[j];
      xhat[i * c + j] = h;
      out[i * c + j] = g[j] * h + b[j];
    }
  }
  return make_result<T>(x.shape(), std::move(out), {x, gamma, beta},
                        [c, m, xhat = std::move(xhat), inv_std = std::move(inv_std)](Node<T>& self) {
                          auto& px = *self.parents[0];
                          auto& pg = *self.parents[1];
                          auto& pb = *self.parents[2];
                          std::vector<double> sum_dy(c, 0.0), sum_dy_xhat(c, 0.0);
                          for (std::size_t i = 0; i < m; ++i) {
                            for (std::size_t j = 0; j < c; ++j) {
                              const double dy = self.grad[i * c + j];
                              sum_dy[j] += dy;
                              sum_dy_xhat[j] += dy * xhat[i * c + j];
                            }
                          }
                          if (pg.requires_grad) {
                            for (std::size_t j = 0; j < c; ++j) pg.grad[j] += static_cast<T>(sum_dy_xhat[j]);
                          }
                          if (pb.requires_grad) {
                            for (std::size_t j = 0; j < c; ++j) pb.grad[j] += static_cast<T>(sum_dy[j]);
                          }
                          if (px.requires_grad) {
                            const double inv_m = 1.0 / static_cast<double>(m);
                            for (std::size_t i = 0; i < m; ++i) {
                              for (std::size_t j = 0; j < c; ++j) {
                                const double dy = self.grad[i * c + j];
                                const double dx = pg.data[j] * inv_std[j] *
                                                  (dy - inv_m * sum_dy[j] - xhat[i * c + j] * inv_m * sum_dy_xhat[j]);
                                px.grad[i * c + j] += static_cast<T>(dx);
                              }
                            }
                          }
                        });
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape) {
  if (shape_size(shape) != x.size()) {
    throw std::invalid_argument("reshape " + shape_string(x.shape()) + " -> " + shape_string(shape));
  }
  std::vector<T> out(x.data().begin(), x.data().end());
  return make_result<T>(std::move(shape), std::move(out), {x}, [](Node<T>& self) {
    auto& p = *self.parents[0];
    for (std::size_t i = 0; i < self.grad.size(); ++i) p.grad[i] += self.grad[i];
  });
}

template <typename T>
Tensor<T> mean_spatial(const Tensor<T>& x) {
  require_rank(x.shape(), 4, "mean_spatial");
  const std::size_t n = x.dim(0), hw = x.dim(1) * x.dim(2), c = x.dim(3);
  std::vector<T> out(n * c, T{0});
  const auto in = x.data();
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t p = 0; p < hw; ++p) {
      for (std::size_t j = 0; j < c; ++j) out[b * c + j] += in[(b * hw + p) * c + j];
    }
    for (std::size_t j = 0; j < c; ++j) out[b * c + j] /= static_cast<T>(hw);
  }
  return make_result<T>({n, c}, std::move(out), {x}, [n, hw, c](Node<T>& self) {
    auto& p = *self.parents[0];
    for (std::size_t b = 0; b < n; ++b) {
      for (std::size_t q = 0; q < hw; ++q) {
        for (std::size_t j = 0; j < c; ++j) p.grad[(b * hw + q) * c + j] += self.grad[b * c + j] / static_cast<T>(hw);
      }
    }
  });
}

template <typename T>
Tensor<T> sum(const Tensor<T>& x) {
  T acc{0};
  for (T v : x.data()) acc += v;
  return make_result<T>({1}, {acc}, {x}, [](Node<T>& self) {
    auto& p = *self.parents[0];
    for (auto& g : p.grad) g += self.grad[0];
  });
}

template <typename T>
Tensor<T> mean(const Tensor<T>& x) {
  return scale(sum(x), T{1} / static_cast<T>(x.size()));
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape()) {
    throw std::invalid_argument("add: shape mismatch " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  }
  std::vector<T> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
  return make_result<T>(a.shape(), std::move(out), {a, b}, [](Node<T>& self) {
    for (auto& p : self.parents) {
      if (!p->requires_grad) continue;
      for (std::size_t i = 0; i < self.grad.size(); ++i) p->grad[i] += self.grad[i];
    }
  });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& x, T factor) {
  std::vector<T> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.data()[i] * factor;
  return make_result<T>(x.shape(), std::move(out), {x}, [factor](Node<T>& self) {
    auto& p = *self.parents[0];
    for (std::size_t i = 0; i < self.grad.size(); ++i) p.grad[i] += self.grad[i] * factor;
  });
}

#define FSEGAN_INSTANTIATE_OPS(T)                                                                          \
  template Tensor<T> conv2d(const Tensor<T>&, const Tensor<T>&, const ConvGeometry&);                     \
  template Tensor<T> conv2d_transpose(const Tensor<T>&, const Tensor<T>&, const ConvGeometry&, std::size_t, \
                                      std::size_t);                                                       \
  template Tensor<T> conv1d(const Tensor<T>&, const Tensor<T>&, std::size_t, std::size_t, std::size_t);    \
  template Tensor<T> conv1d_transpose(const Tensor<T>&, const Tensor<T>&, std::size_t, std::size_t,       \
                                      std::size_t, std::size_t);                                          \
  template Tensor<T> add_bias(const Tensor<T>&, const Tensor<T>&);                                        \
  template Tensor<T> leaky_relu(const Tensor<T>&, T);                                                     \
  template Tensor<T> relu(const Tensor<T>&);                                                              \
  template Tensor<T> tanh(const Tensor<T>&);                                                              \
  template Tensor<T> sigmoid(const Tensor<T>&);                                                           \
  template Tensor<T> concat_channels(const Tensor<T>&, const Tensor<T>&);                                 \
  template Tensor<T> batch_norm(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, T);                 \
  template Tensor<T> reshape(const Tensor<T>&, Shape);                                                    \
  template Tensor<T> mean_spatial(const Tensor<T>&);                                                      \
  template Tensor<T> sum(const Tensor<T>&);                                                               \
  template Tensor<T> mean(const Tensor<T>&);                                                              \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                                             \
  template Tensor<T> scale(const Tensor<T>&, T);

FSEGAN_INSTANTIATE_OPS(float)
FSEGAN_INSTANTIATE_OPS(double)

#undef FSEGAN_INSTANTIATE_OPS

}  // namespace fsegan::ad
