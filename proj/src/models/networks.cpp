#include "fsegan/models/networks.hpp"

#include <stdexcept>
#include <string>

#include "fsegan/ad/ops.hpp"

namespace fsegan::models {

namespace {

using ad::Shape;
using ad::Tensor;

constexpr std::size_t kSeganStride = 2;

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

void check_kind(const ModelConfig& c, ModelKind kind, Role role, const char* what) {
  if (c.kind != kind || c.role != role) {
    throw std::invalid_argument(std::string(what) + ": parameters belong to a " + c.tag());
  }
}

std::string name(const char* prefix, int i, const char* suffix) {
  return prefix + std::to_string(i) + suffix;
}

ad::ConvGeometry halving_2d() { return ad::ConvGeometry::same(4, 4, 2, 2); }

// Same-halving split, so a stride-2 layer yields ceil(T / 2).
std::pair<std::size_t, std::size_t> segan_pads(const ModelConfig& c) {
  const auto k = static_cast<std::size_t>(c.filter_width);
  if (k % 2 == 1) return {k / 2, k / 2};
  return {k / 2 - 1, k / 2};
}

}  // namespace

template <typename T>
std::vector<Tensor<T>> fsegan_encoder(const ModelParams<T>& params, const Tensor<T>& x) {
  const auto& c = params.config;
  check_kind(c, ModelKind::kFsegan, Role::kGenerator, "fsegan_generator");
  require(x.rank() == 4, "fsegan_generator: input must be B x frames x bins x C, got " + ad::shape_string(x.shape()));
  const std::size_t side = std::size_t{1} << c.depth;
  require(x.dim(1) % side == 0 && x.dim(2) % side == 0 && x.dim(1) > 0 && x.dim(2) > 0,
          "fsegan_generator: patch " + std::to_string(x.dim(1)) + "x" + std::to_string(x.dim(2)) +
              " is not a multiple of 2^depth = " + std::to_string(side));
  require(x.dim(3) == static_cast<std::size_t>(c.input_channels),
          "fsegan_generator: expected " + std::to_string(c.input_channels) + " input channels, got " +
              std::to_string(x.dim(3)));
  std::vector<Tensor<T>> enc;
  Tensor<T> h = x;
  for (int i = 0; i < c.depth; ++i) {
    h = ad::conv2d(h, params.get(name("enc", i, ".w")), halving_2d());
    h = ad::leaky_relu(ad::add_bias(h, params.get(name("enc", i, ".b"))));
    enc.push_back(h);
  }
  return enc;
}

template <typename T>
Tensor<T> fsegan_generator(const ModelParams<T>& params, const Tensor<T>& x) {
  const auto& c = params.config;
  const auto enc = fsegan_encoder(params, x);
  Tensor<T> h;
  for (int level = c.depth - 1; level >= 0; --level) {
    const Tensor<T> in = level == c.depth - 1 ? enc[level] : ad::concat_channels(h, enc[level]);
    const std::size_t out_h = x.dim(1) >> level, out_w = x.dim(2) >> level;
    h = ad::conv2d_transpose(in, params.get(name("dec", level, ".w")), halving_2d(), out_h, out_w);
    h = ad::add_bias(h, params.get(name("dec", level, ".b")));
    if (level > 0) h = ad::relu(h);
  }
  return h;
}

template <typename T>
Tensor<T> fsegan_discriminator(const ModelParams<T>& params, const Tensor<T>& x, const Tensor<T>& cand) {
  const auto& c = params.config;
  check_kind(c, ModelKind::kFsegan, Role::kDiscriminator, "fsegan_discriminator");
  require(x.rank() == 4 && cand.rank() == 4, "fsegan_discriminator: inputs must be rank 4");
  require(x.dim(3) == static_cast<std::size_t>(c.input_channels) && cand.dim(3) == 1,
          "fsegan_discriminator: expected " + std::to_string(c.input_channels) + "+1 channels, got " +
              ad::shape_string(x.shape()) + " and " + ad::shape_string(cand.shape()));
  require(x.dim(0) == cand.dim(0) && x.dim(1) == cand.dim(1) && x.dim(2) == cand.dim(2),
          "fsegan_discriminator: shape mismatch " + ad::shape_string(x.shape()) + " vs " +
              ad::shape_string(cand.shape()));
  const std::size_t side = std::size_t{1} << c.d_layers;
  require(x.dim(1) % side == 0, "fsegan_discriminator: frames not divisible by 2^d_layers");
  require(x.dim(2) == static_cast<std::size_t>(c.patch_bins),
          "fsegan_discriminator: expected " + std::to_string(c.patch_bins) + " bins, got " + std::to_string(x.dim(2)));

  Tensor<T> h = ad::concat_channels(x, cand);
  for (int i = 0; i < c.d_layers; ++i) {
    h = ad::conv2d(h, params.get(name("conv", i, ".w")), halving_2d());
    if (i == 0) {
      h = ad::add_bias(h, params.get("conv0.b"));
    } else {
      h = ad::batch_norm(h, params.get(name("bn", i, ".gamma")), params.get(name("bn", i, ".beta")));
    }
    h = ad::leaky_relu(h);
  }
  // One decision per time step: the band kernel spans every frequency row.
  h = ad::conv2d(h, params.get("out.w"), ad::ConvGeometry{});
  h = ad::sigmoid(ad::add_bias(h, params.get("out.b")));
  return ad::reshape(h, {x.dim(0), x.dim(1) / side});
}

template <typename T>
std::vector<Tensor<T>> segan_encoder(const ModelParams<T>& params, const Tensor<T>& w) {
  const auto& c = params.config;
  check_kind(c, ModelKind::kSegan, Role::kGenerator, "segan_generator");
  require(w.rank() == 3, "segan_generator: input must be B x T x C, got " + ad::shape_string(w.shape()));
  const std::size_t side = std::size_t{1} << c.depth;
  require(w.dim(1) > 0 && w.dim(1) % side == 0, "segan_generator: length " + std::to_string(w.dim(1)) +
                                                    " is not divisible by 2^depth = " + std::to_string(side));
  require(w.dim(2) == static_cast<std::size_t>(c.input_channels),
          "segan_generator: expected " + std::to_string(c.input_channels) + " channels, got " +
              std::to_string(w.dim(2)));
  const auto [lo, hi] = segan_pads(c);
  std::vector<Tensor<T>> enc;
  Tensor<T> h = w;
  for (int i = 0; i < c.depth; ++i) {
    h = ad::conv1d(h, params.get(name("enc", i, ".w")), kSeganStride, lo, hi);
    h = ad::leaky_relu(ad::add_bias(h, params.get(name("enc", i, ".b"))));
    enc.push_back(h);
  }
  return enc;
}

template <typename T>
Tensor<T> segan_generator(const ModelParams<T>& params, const Tensor<T>& w) {
  const auto& c = params.config;
  const auto enc = segan_encoder(params, w);
  const auto [lo, hi] = segan_pads(c);
  Tensor<T> h;
  for (int level = c.depth - 1; level >= 0; --level) {
    const Tensor<T> in = level == c.depth - 1 ? enc[level] : ad::concat_channels(h, enc[level]);
    h = ad::conv1d_transpose(in, params.get(name("dec", level, ".w")), kSeganStride, lo, hi, w.dim(1) >> level);
    h = ad::add_bias(h, params.get(name("dec", level, ".b")));
    h = level > 0 ? ad::leaky_relu(h) : ad::tanh(h);
  }
  return h;
}

template <typename T>
Tensor<T> segan_discriminator(const ModelParams<T>& params, const Tensor<T>& x, const Tensor<T>& cand) {
  const auto& c = params.config;
  check_kind(c, ModelKind::kSegan, Role::kDiscriminator, "segan_discriminator");
  require(x.rank() == 3 && cand.rank() == 3, "segan_discriminator: inputs must be rank 3");
  require(x.dim(0) == cand.dim(0) && x.dim(1) == cand.dim(1) && cand.dim(2) == 1 &&
              x.dim(2) == static_cast<std::size_t>(c.input_channels),
          "segan_discriminator: shape mismatch " + ad::shape_string(x.shape()) + " vs " +
              ad::shape_string(cand.shape()));
  const std::size_t side = std::size_t{1} << c.depth;
  require(x.dim(1) % side == 0, "segan_discriminator: length not divisible by 2^depth");
  const auto [lo, hi] = segan_pads(c);

  Tensor<T> h = ad::concat_channels(x, cand);
  for (int i = 0; i < c.depth; ++i) {
    h = ad::conv1d(h, params.get(name("conv", i, ".w")), kSeganStride, lo, hi);
    if (i == 0) {
      h = ad::add_bias(h, params.get("conv0.b"));
    } else {
      h = ad::batch_norm(h, params.get(name("bn", i, ".gamma")), params.get(name("bn", i, ".beta")));
    }
    h = ad::leaky_relu(h);
  }
  h = ad::add_bias(ad::conv1d(h, params.get("out.w"), 1, 0, 0), params.get("out.b"));
  const std::size_t batch = h.dim(0), steps = h.dim(1);
  h = ad::mean_spatial(ad::reshape(h, {batch, 1, steps, 1}));
  return ad::reshape(h, {batch});
}

template <typename T>
Tensor<T> generator_forward(const ModelParams<T>& params, const Tensor<T>& x) {
  return params.config.kind == ModelKind::kFsegan ? fsegan_generator(params, x) : segan_generator(params, x);
}

template <typename T>
Tensor<T> discriminator_forward(const ModelParams<T>& params, const Tensor<T>& x, const Tensor<T>& cand) {
  return params.config.kind == ModelKind::kFsegan ? fsegan_discriminator(params, x, cand)
                                                  : segan_discriminator(params, x, cand);
}

#define FSEGAN_INSTANTIATE_NETWORKS(T)                                                                     \
  template std::vector<Tensor<T>> fsegan_encoder(const ModelParams<T>&, const Tensor<T>&);                \
  template Tensor<T> fsegan_generator(const ModelParams<T>&, const Tensor<T>&);                           \
  template Tensor<T> fsegan_discriminator(const ModelParams<T>&, const Tensor<T>&, const Tensor<T>&);     \
  template std::vector<Tensor<T>> segan_encoder(const ModelParams<T>&, const Tensor<T>&);                 \
  template Tensor<T> segan_generator(const ModelParams<T>&, const Tensor<T>&);                            \
  template Tensor<T> segan_discriminator(const ModelParams<T>&, const Tensor<T>&, const Tensor<T>&);      \
  template Tensor<T> generator_forward(const ModelParams<T>&, const Tensor<T>&);                          \
  template Tensor<T> discriminator_forward(const ModelParams<T>&, const Tensor<T>&, const Tensor<T>&);

FSEGAN_INSTANTIATE_NETWORKS(float)
FSEGAN_INSTANTIATE_NETWORKS(double)

}  // namespace fsegan::models
