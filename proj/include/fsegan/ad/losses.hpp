#pragma once

#include "fsegan/ad/tensor.hpp"

namespace fsegan::ad {

/// Probabilities are clamped to [1e-7, 1 - 1e-7] inside every log.
inline constexpr double kLogClamp = 1e-7;

/// mean |prediction - target|. The target is treated as a constant.
template <typename T>
Tensor<T> l1_loss(const Tensor<T>& prediction, const Tensor<T>& target);

/// -mean log D(real) - mean log(1 - D(fake)).
template <typename T>
Tensor<T> gan_bce_d(const Tensor<T>& d_real, const Tensor<T>& d_fake);

/// Non-saturating generator loss, -mean log D(fake).
template <typename T>
Tensor<T> gan_bce_g(const Tensor<T>& d_fake);

/// 1/2 mean (D(real) - 1)^2 + 1/2 mean D(fake)^2.
template <typename T>
Tensor<T> lsgan_d(const Tensor<T>& d_real, const Tensor<T>& d_fake);

/// 1/2 mean (D(fake) - 1)^2.
template <typename T>
Tensor<T> lsgan_g(const Tensor<T>& d_fake);

}  // namespace fsegan::ad
