#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fsegan/ad/tensor.hpp"

namespace fsegan::models {

enum class ModelKind { kFsegan, kSegan };
enum class Role { kGenerator, kDiscriminator };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& text);

/// Architecture hyper-parameters for either model family. Fields that do not
/// apply to a family are ignored by it but still recorded in checkpoints.
struct ModelConfig {
  ModelKind kind = ModelKind::kFsegan;
  Role role = Role::kGenerator;
  int depth = 7;             // encoder (= decoder) layers
  int base_channels = 64;
  int channel_cap = 512;
  int input_channels = 2;    // noisy channels fed to the generator
  int patch_frames = 128;    // FSEGAN window height (time)
  int patch_bins = 128;      // FSEGAN window width (Mel bins)
  int filter_width = 31;     // SEGAN 1-D kernel
  int window_samples = 20480;
  int d_layers = 4;          // FSEGAN discriminator stride-2 layers

  /// Output channels of encoder layer i.
  std::size_t encoder_channels(int i) const;
  /// Output channels of discriminator conv layer i.
  std::size_t discriminator_channels(int i) const;

  std::string tag() const;
  void validate() const;

  bool operator==(const ModelConfig&) const = default;
};

ModelConfig fsegan_config(Role role = Role::kGenerator);
/// Desk-scale FSEGAN: depth 4, base 16, 16 x 16 patches.
ModelConfig fsegan_miniature(Role role = Role::kGenerator);
ModelConfig segan_config(Role role = Role::kGenerator);

/// Ordered, uniquely named learnable tensors of one network.
template <typename T>
struct ModelParams {
  ModelConfig config;
  std::vector<std::pair<std::string, ad::Tensor<T>>> entries;

  const ad::Tensor<T>& get(const std::string& name) const;
  ad::Tensor<T>& get(const std::string& name);
  void add(std::string name, ad::Tensor<T> tensor);

  std::vector<ad::Tensor<T>> tensors() const;
  std::size_t parameter_count() const;
  void set_trainable(bool on);
  void zero_grad();

  /// Independent copy (new leaves).
  ModelParams clone() const;
};

/// Shapes of every named tensor implied by `config`, in canonical order.
std::vector<std::pair<std::string, ad::Shape>> parameter_layout(const ModelConfig& config);

/// Kernels ~ Normal(0, 0.02), biases 0, norm scales 1 and shifts 0.
ModelParams<float> init_params(const ModelConfig& config, std::uint64_t seed);

template <typename To, typename From>
ModelParams<To> cast_params(const ModelParams<From>& params, bool requires_grad = true) {
  ModelParams<To> out;
  out.config = params.config;
  for (const auto& [name, t] : params.entries) out.add(name, ad::cast<To>(t, requires_grad));
  return out;
}

std::string encode_checkpoint(const ModelParams<float>& params);
ModelParams<float> decode_checkpoint(std::string_view bytes);
void save_checkpoint(const ModelParams<float>& params, const std::filesystem::path& path);
ModelParams<float> load_checkpoint(const std::filesystem::path& path);
/// Also checks every tensor against the layout of `expected`.
ModelParams<float> load_checkpoint(const std::filesystem::path& path, const ModelConfig& expected);

extern template struct ModelParams<float>;
extern template struct ModelParams<double>;

}  // namespace fsegan::models
