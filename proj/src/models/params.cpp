#include "fsegan/models/params.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

#include "fsegan/common/binary_io.hpp"
#include "fsegan/common/rng.hpp"

namespace fsegan::models {

namespace {

constexpr std::uint32_t kCheckpointVersion = 1;
constexpr std::array<int, 11> kSeganMultipliers{1, 2, 2, 4, 4, 8, 8, 16, 16, 32, 64};

[[noreturn]] void corrupt(const std::string& why) { throw std::runtime_error("corrupt checkpoint: " + why); }

std::vector<std::pair<std::string, int>> config_fields(const ModelConfig& c) {
  return {{"kind", static_cast<int>(c.kind)},
          {"role", static_cast<int>(c.role)},
          {"depth", c.depth},
          {"base_channels", c.base_channels},
          {"channel_cap", c.channel_cap},
          {"input_channels", c.input_channels},
          {"patch_frames", c.patch_frames},
          {"patch_bins", c.patch_bins},
          {"filter_width", c.filter_width},
          {"window_samples", c.window_samples},
          {"d_layers", c.d_layers}};
}

void set_config_field(ModelConfig& c, const std::string& key, int value) {
  if (key == "kind") c.kind = static_cast<ModelKind>(value);
  else if (key == "role") c.role = static_cast<Role>(value);
  else if (key == "depth") c.depth = value;
  else if (key == "base_channels") c.base_channels = value;
  else if (key == "channel_cap") c.channel_cap = value;
  else if (key == "input_channels") c.input_channels = value;
  else if (key == "patch_frames") c.patch_frames = value;
  else if (key == "patch_bins") c.patch_bins = value;
  else if (key == "filter_width") c.filter_width = value;
  else if (key == "window_samples") c.window_samples = value;
  else if (key == "d_layers") c.d_layers = value;
  else corrupt("unknown config field '" + key + "'");
}

void check_layout(const ModelParams<float>& params, const ModelConfig& config) {
  const auto layout = parameter_layout(config);
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const auto& [name, shape] = layout[i];
    if (i >= params.entries.size()) {
      throw std::runtime_error("checkpoint is missing tensor '" + name + "'");
    }
    const auto& [got_name, tensor] = params.entries[i];
    if (got_name != name) {
      throw std::runtime_error("checkpoint tensor '" + got_name + "' found where '" + name + "' was expected");
    }
    if (tensor.shape() != shape) {
      throw std::runtime_error("checkpoint tensor '" + name + "' has shape " + ad::shape_string(tensor.shape()) +
                               ", config expects " + ad::shape_string(shape));
    }
  }
  if (params.entries.size() > layout.size()) {
    throw std::runtime_error("checkpoint has unexpected tensor '" + params.entries[layout.size()].first + "'");
  }
}

}  // namespace

std::string to_string(ModelKind kind) { return kind == ModelKind::kFsegan ? "fsegan" : "segan"; }

ModelKind parse_model_kind(const std::string& text) {
  if (text == "fsegan") return ModelKind::kFsegan;
  if (text == "segan") return ModelKind::kSegan;
  throw std::invalid_argument("unknown model '" + text + "' (expected fsegan or segan)");
}

std::size_t ModelConfig::encoder_channels(int i) const {
  if (kind == ModelKind::kSegan) {
    return static_cast<std::size_t>(std::min(base_channels * kSeganMultipliers.at(static_cast<std::size_t>(i)),
                                             channel_cap));
  }
  return static_cast<std::size_t>(std::min(base_channels << i, channel_cap));
}

std::size_t ModelConfig::discriminator_channels(int i) const { return encoder_channels(i); }

std::string ModelConfig::tag() const {
  return to_string(kind) + (role == Role::kGenerator ? "-generator" : "-discriminator");
}

void ModelConfig::validate() const {
  if (depth < 1 || base_channels < 1 || channel_cap < 1 || input_channels < 1) {
    throw std::invalid_argument("model config: counts must be positive");
  }
  if (kind == ModelKind::kFsegan) {
    const int side = 1 << depth;
    if (patch_frames % side != 0 || patch_bins % side != 0) {
      throw std::invalid_argument("fsegan patch " + std::to_string(patch_frames) + "x" + std::to_string(patch_bins) +
                                  " is not a multiple of 2^depth = " + std::to_string(side));
    }
    if (role == Role::kDiscriminator) {
      const int d_side = 1 << d_layers;
      if (d_layers < 1 || patch_frames % d_side != 0 || patch_bins % d_side != 0) {
        throw std::invalid_argument("fsegan discriminator needs patch sides divisible by 2^d_layers");
      }
    }
  } else {
    if (depth > static_cast<int>(kSeganMultipliers.size())) {
      throw std::invalid_argument("segan depth is at most 11");
    }
    if (filter_width < 1) throw std::invalid_argument("segan filter width must be positive");
    if (window_samples % (1 << depth) != 0) {
      throw std::invalid_argument("segan window " + std::to_string(window_samples) +
                                  " is not divisible by 2^depth = " + std::to_string(1 << depth));
    }
  }
}

ModelConfig fsegan_config(Role role) {
  ModelConfig c;
  c.role = role;
  return c;
}

ModelConfig fsegan_miniature(Role role) {
  ModelConfig c;
  c.role = role;
  c.depth = 4;
  c.base_channels = 16;
  c.patch_frames = 16;
  c.patch_bins = 16;
  return c;
}

ModelConfig segan_config(Role role) {
  ModelConfig c;
  c.kind = ModelKind::kSegan;
  c.role = role;
  c.depth = 11;
  c.base_channels = 16;
  c.channel_cap = 1024;
  c.window_samples = 20480;
  return c;
}

std::vector<std::pair<std::string, ad::Shape>> parameter_layout(const ModelConfig& c) {
  c.validate();
  std::vector<std::pair<std::string, ad::Shape>> layout;
  const bool is_2d = c.kind == ModelKind::kFsegan;
  const std::size_t kw = is_2d ? 4 : static_cast<std::size_t>(c.filter_width);
  // 2-D kernels are kh x kw x Cbig x Csmall; 1-D kernels drop kh.
  auto kernel = [&](std::size_t big, std::size_t small) {
    return is_2d ? ad::Shape{4, 4, big, small} : ad::Shape{kw, big, small};
  };

  if (c.role == Role::kGenerator) {
    std::size_t cin = static_cast<std::size_t>(c.input_channels);
    for (int i = 0; i < c.depth; ++i) {
      const std::size_t ch = c.encoder_channels(i);
      layout.emplace_back("enc" + std::to_string(i) + ".w", kernel(cin, ch));
      layout.emplace_back("enc" + std::to_string(i) + ".b", ad::Shape{ch});
      cin = ch;
    }
    for (int level = c.depth - 1; level >= 0; --level) {
      const std::size_t mirror = c.encoder_channels(level);
      const std::size_t in = level == c.depth - 1 ? mirror : 2 * mirror;
      const std::size_t out = level > 0 ? c.encoder_channels(level - 1) : 1;
      layout.emplace_back("dec" + std::to_string(level) + ".w", kernel(out, in));
      layout.emplace_back("dec" + std::to_string(level) + ".b", ad::Shape{out});
    }
    return layout;
  }

  const int layers = is_2d ? c.d_layers : c.depth;
  std::size_t cin = static_cast<std::size_t>(c.input_channels) + 1;
  for (int i = 0; i < layers; ++i) {
    const std::size_t ch = c.discriminator_channels(i);
    layout.emplace_back("conv" + std::to_string(i) + ".w", kernel(cin, ch));
    if (i == 0) {
      layout.emplace_back("conv0.b", ad::Shape{ch});
    } else {
      layout.emplace_back("bn" + std::to_string(i) + ".gamma", ad::Shape{ch});
      layout.emplace_back("bn" + std::to_string(i) + ".beta", ad::Shape{ch});
    }
    cin = ch;
  }
  if (is_2d) {
    const auto band = static_cast<std::size_t>(c.patch_bins >> c.d_layers);
    layout.emplace_back("out.w", ad::Shape{1, band, cin, 1});
  } else {
    layout.emplace_back("out.w", ad::Shape{1, cin, 1});
  }
  layout.emplace_back("out.b", ad::Shape{1});
  return layout;
}

template <typename T>
const ad::Tensor<T>& ModelParams<T>::get(const std::string& name) const {
  for (const auto& [n, t] : entries) {
    if (n == name) return t;
  }
  throw std::out_of_range("no parameter named '" + name + "'");
}

template <typename T>
ad::Tensor<T>& ModelParams<T>::get(const std::string& name) {
  for (auto& [n, t] : entries) {
    if (n == name) return t;
  }
  throw std::out_of_range("no parameter named '" + name + "'");
}

template <typename T>
void ModelParams<T>::add(std::string name, ad::Tensor<T> tensor) {
  for (const auto& e : entries) {
    if (e.first == name) throw std::invalid_argument("duplicate parameter name '" + name + "'");
  }
  entries.emplace_back(std::move(name), std::move(tensor));
}

template <typename T>
std::vector<ad::Tensor<T>> ModelParams<T>::tensors() const {
  std::vector<ad::Tensor<T>> out;
  for (const auto& e : entries) out.push_back(e.second);
  return out;
}

template <typename T>
std::size_t ModelParams<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.second.size();
  return n;
}

template <typename T>
void ModelParams<T>::set_trainable(bool on) {
  for (auto& e : entries) e.second.set_requires_grad(on);
}

template <typename T>
void ModelParams<T>::zero_grad() {
  for (auto& e : entries) e.second.zero_grad();
}

template <typename T>
ModelParams<T> ModelParams<T>::clone() const {
  ModelParams out;
  out.config = config;
  for (const auto& [name, t] : entries) {
    auto copy = t.detach();
    copy.set_requires_grad(t.requires_grad());
    out.add(name, copy);
  }
  return out;
}

template struct ModelParams<float>;
template struct ModelParams<double>;

ModelParams<float> init_params(const ModelConfig& config, std::uint64_t seed) {
  ModelParams<float> params;
  params.config = config;
  const auto layout = parameter_layout(config);
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const auto& [name, shape] = layout[i];
    auto t = ad::Tensor<float>::zeros(shape, true);
    const bool is_kernel = name.ends_with(".w");
    const bool is_scale = name.ends_with(".gamma");
    if (is_kernel) {
      Rng rng(hash_seed(seed, i));
      for (auto& v : t.data()) v = static_cast<float>(rng.normal(0.0, 0.02));
    } else if (is_scale) {
      std::fill(t.data().begin(), t.data().end(), 1.0f);
    }
    params.add(name, std::move(t));
  }
  return params;
}

std::string encode_checkpoint(const ModelParams<float>& params) {
  ByteWriter out;
  out.bytes("FSGN");
  out.u32(kCheckpointVersion);
  const std::string tag = params.config.tag();
  out.u32(static_cast<std::uint32_t>(tag.size()));
  out.bytes(tag);
  const auto fields = config_fields(params.config);
  out.u32(static_cast<std::uint32_t>(fields.size()));
  for (const auto& [key, value] : fields) {
    out.u32(static_cast<std::uint32_t>(key.size()));
    out.bytes(key);
    out.u32(static_cast<std::uint32_t>(value));
  }
  for (const auto& [name, t] : params.entries) {
    out.u32(static_cast<std::uint32_t>(name.size()));
    out.bytes(name);
    out.u32(static_cast<std::uint32_t>(t.rank()));
    for (auto d : t.shape()) out.u32(static_cast<std::uint32_t>(d));
    for (float v : t.data()) out.f32(v);
  }
  return out.release();
}

ModelParams<float> decode_checkpoint(std::string_view bytes) {
  ByteReader in(bytes);
  ModelParams<float> params;
  try {
    if (in.bytes(4) != "FSGN") throw std::runtime_error("not a checkpoint (bad magic)");
    const auto version = in.u32();
    if (version != kCheckpointVersion) {
      throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
    }
    const std::string tag(in.bytes(in.u32()));
    const auto n_fields = in.u32();
    for (std::uint32_t i = 0; i < n_fields; ++i) {
      const std::string key(in.bytes(in.u32()));
      set_config_field(params.config, key, static_cast<int>(in.u32()));
    }
    if (tag != params.config.tag()) corrupt("architecture tag '" + tag + "' disagrees with config");
    while (in.remaining() > 0) {
      std::string name(in.bytes(in.u32()));
      const auto rank = in.u32();
      if (rank > 8) corrupt("tensor '" + name + "' has implausible rank");
      ad::Shape shape(rank);
      for (auto& d : shape) d = in.u32();
      const std::size_t count = ad::shape_size(shape);
      if (count * 4 > in.remaining()) corrupt("tensor '" + name + "' is truncated");
      std::vector<float> values(count);
      for (auto& v : values) v = in.f32();
      params.add(std::move(name), ad::Tensor<float>::from(std::move(shape), std::move(values), true));
    }
  } catch (const TruncatedInput& e) {
    corrupt(e.what());
  } catch (const std::invalid_argument& e) {
    corrupt(e.what());
  }
  check_layout(params, params.config);
  return params;
}

void save_checkpoint(const ModelParams<float>& params, const std::filesystem::path& path) {
  atomic_write_file(path, encode_checkpoint(params));
}

ModelParams<float> load_checkpoint(const std::filesystem::path& path) {
  try {
    return decode_checkpoint(read_file(path));
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

ModelParams<float> load_checkpoint(const std::filesystem::path& path, const ModelConfig& expected) {
  auto params = load_checkpoint(path);
  try {
    check_layout(params, expected);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  if (!(params.config == expected)) {
    throw std::runtime_error(path.string() + ": checkpoint config differs from the requested config");
  }
  return params;
}

}  // namespace fsegan::models
