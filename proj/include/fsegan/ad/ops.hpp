#pragma once

#include <cstddef>

#include "fsegan/ad/tensor.hpp"

namespace fsegan::ad {

/// Stride and explicit per-side zero padding for 2-D convolutions.
struct ConvGeometry {
  std::size_t stride_h = 1;
  std::size_t stride_w = 1;
  std::size_t pad_top = 0;
  std::size_t pad_bottom = 0;
  std::size_t pad_left = 0;
  std::size_t pad_right = 0;

  /// "Same-halving" padding: for even kernels k/2 - 1 before and k/2 after,
  /// for odd kernels k/2 on both sides. Output extent is ceil(in / stride).
  static ConvGeometry same(std::size_t kernel_h, std::size_t kernel_w, std::size_t stride_h,
                           std::size_t stride_w);
};

std::size_t conv_out_extent(std::size_t in, std::size_t kernel, std::size_t stride, std::size_t pad_lo,
                            std::size_t pad_hi);

/// Cross-correlation. input N x H x W x Cin, kernel kh x kw x Cin x Cout.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& kernel, const ConvGeometry& geom);

/// Adjoint of conv2d with the same kernel and geometry: input N x h x w x Cout,
/// output N x out_h x out_w x Cin, where conv2d maps out_h x out_w back to h x w.
template <typename T>
Tensor<T> conv2d_transpose(const Tensor<T>& input, const Tensor<T>& kernel, const ConvGeometry& geom,
                           std::size_t out_h, std::size_t out_w);

/// 1-D analogues on N x T x C tensors with kernel k x Cin x Cout.
template <typename T>
Tensor<T> conv1d(const Tensor<T>& input, const Tensor<T>& kernel, std::size_t stride, std::size_t pad_left,
                 std::size_t pad_right);

template <typename T>
Tensor<T> conv1d_transpose(const Tensor<T>& input, const Tensor<T>& kernel, std::size_t stride,
                           std::size_t pad_left, std::size_t pad_right, std::size_t out_len);

/// Adds bias[c] along the last axis.
template <typename T>
Tensor<T> add_bias(const Tensor<T>& input, const Tensor<T>& bias);

template <typename T>
Tensor<T> leaky_relu(const Tensor<T>& x, T slope = T(0.2));

template <typename T>
Tensor<T> relu(const Tensor<T>& x);

template <typename T>
Tensor<T> tanh(const Tensor<T>& x);

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x);

/// Concatenates along the last axis; all other extents must match.
template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b);

/// Per-channel normalization with batch statistics over every axis but the
/// last, followed by scale and shift.
template <typename T>
Tensor<T> batch_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, T eps = T(1e-5));

/// Same data, new shape.
template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape);

/// N x H x W x C -> N x C, averaging over the spatial axes.
template <typename T>
Tensor<T> mean_spatial(const Tensor<T>& x);

template <typename T>
Tensor<T> sum(const Tensor<T>& x);

template <typename T>
Tensor<T> mean(const Tensor<T>& x);

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> scale(const Tensor<T>& x, T factor);

}  // namespace fsegan::ad
