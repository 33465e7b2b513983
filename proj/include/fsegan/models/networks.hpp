#pragma once

#include <vector>

#include "fsegan/ad/tensor.hpp"
#include "fsegan/models/params.hpp"

namespace fsegan::models {

/// FSEGAN generator. x is B x frames x bins x input_channels (normalized
/// log-Mel, time on the H axis); returns B x frames x bins x 1. Frames and
/// bins must be multiples of 2^depth.
template <typename T>
ad::Tensor<T> fsegan_generator(const ModelParams<T>& params, const ad::Tensor<T>& x);

/// Encoder activations, shallowest first. Exposed for inspection.
template <typename T>
std::vector<ad::Tensor<T>> fsegan_encoder(const ModelParams<T>& params, const ad::Tensor<T>& x);

/// FSEGAN patch discriminator: one probability per group of 2^d_layers
/// frames, B x (frames / 2^d_layers). `cand` is B x frames x bins x 1.
template <typename T>
ad::Tensor<T> fsegan_discriminator(const ModelParams<T>& params, const ad::Tensor<T>& x,
                                   const ad::Tensor<T>& cand);

/// Deterministic SEGAN generator on B x T x input_channels waveforms,
/// T divisible by 2^depth. Output B x T x 1 in [-1, 1].
template <typename T>
ad::Tensor<T> segan_generator(const ModelParams<T>& params, const ad::Tensor<T>& w);

template <typename T>
std::vector<ad::Tensor<T>> segan_encoder(const ModelParams<T>& params, const ad::Tensor<T>& w);

/// Raw (unbounded) SEGAN discriminator scores, shape B.
template <typename T>
ad::Tensor<T> segan_discriminator(const ModelParams<T>& params, const ad::Tensor<T>& x, const ad::Tensor<T>& cand);

/// Dispatches on params.config.kind.
template <typename T>
ad::Tensor<T> generator_forward(const ModelParams<T>& params, const ad::Tensor<T>& x);

/// Discriminator output on the probability scale for FSEGAN and raw scores
/// for SEGAN.
template <typename T>
ad::Tensor<T> discriminator_forward(const ModelParams<T>& params, const ad::Tensor<T>& x, const ad::Tensor<T>& cand);

}  // namespace fsegan::models
