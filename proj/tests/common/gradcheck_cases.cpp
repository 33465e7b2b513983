#include "gradcheck_cases.hpp"

#include <functional>
#include <sstream>

#include "fsegan/ad/gradcheck.hpp"
#include "fsegan/ad/losses.hpp"
#include "fsegan/ad/ops.hpp"
#include "fsegan/ad/tensor.hpp"
#include "fsegan/common/rng.hpp"
#include "fsegan/models/networks.hpp"
#include "fsegan/models/params.hpp"

namespace fsegan::testing {

using namespace fsegan::ad;
using T64 = Tensor<double>;

namespace {

T64 rand_tensor(Rng& rng, Shape shape, double lo = -1.0, double hi = 1.0, bool grad = true) {
  std::vector<double> v(shape_size(shape));
  for (auto& x : v) x = rng.uniform(lo, hi);
  return T64::from(std::move(shape), std::move(v), grad);
}

// Values bounded away from zero so kinks never sit within the FD step.
T64 rand_away_from_zero(Rng& rng, Shape shape) {
  std::vector<double> v(shape_size(shape));
  for (auto& x : v) x = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.1, 1.0);
  return T64::from(std::move(shape), std::move(v), true);
}

// sum_i w_i x_i; spreads non-uniform upstream gradients into every op.
T64 weighted_sum(const T64& x, std::vector<double> w) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += w[i] * x.data()[i];
  return make_result<double>({1}, {acc}, {x}, [w = std::move(w)](Node<double>& self) {
    auto& p = *self.parents[0];
    for (std::size_t i = 0; i < p.grad.size(); ++i) p.grad[i] += w[i] * self.grad[0];
  });
}

class Ledger {
 public:
  OpCheck& at(const std::string& op) {
    for (auto& c : checks_) {
      if (c.op == op) return c;
    }
    checks_.push_back(OpCheck{op});
    return checks_.back();
  }

  void record(const std::string& op, const GradCheckResult& r, const std::string& where = {}) {
    auto& c = at(op);
    ++c.trials;
    c.checked += r.checked;
    c.refined += r.refined;
    if (c.trials == 1 || r.max_rel_error > c.max_rel_error) {
      c.max_rel_error = r.max_rel_error;
      c.worst = r.summary() + where;
    }
  }

  std::vector<OpCheck> take() { return std::move(checks_); }

 private:
  std::vector<OpCheck> checks_;
};

void check_op(Ledger& ledger, const std::string& name, const std::function<T64(std::vector<T64>&)>& f,
              std::vector<T64> inputs, Rng& rng) {
  std::size_t out_size = 0;
  {
    NoGradGuard guard;
    out_size = f(inputs).size();
  }
  std::vector<double> w(out_size);
  for (auto& x : w) x = rng.uniform(-1.0, 1.0);
  ledger.record(name, check_gradients([&] { return weighted_sum(f(inputs), w); }, inputs, kGradStep));
}

struct RandConv {
  std::size_t n, h, w, cin, cout, kh, kw;
  ConvGeometry g;
};

RandConv rand_conv(Rng& rng) {
  RandConv c{};
  c.n = 1 + rng.below(2);
  c.cin = 1 + rng.below(3);
  c.cout = 1 + rng.below(3);
  c.kh = 1 + rng.below(4);
  c.kw = 1 + rng.below(4);
  c.g.stride_h = 1 + rng.below(2);
  c.g.stride_w = 1 + rng.below(2);
  c.g.pad_top = rng.below(c.kh);
  c.g.pad_bottom = rng.below(c.kh);
  c.g.pad_left = rng.below(c.kw);
  c.g.pad_right = rng.below(c.kw);
  c.h = c.kh + rng.below(4);
  c.w = c.kw + rng.below(4);
  return c;
}

// Kernels scaled up from the 0.02 init so activations sit well away from the
// ReLU kinks relative to the FD step; biases randomized so they matter.
models::ModelParams<double> rescaled(const models::ModelConfig& cfg, std::uint64_t seed, double w_scale) {
  auto p = models::cast_params<double>(models::init_params(cfg, seed));
  Rng rng(seed + 100);
  for (auto& [name, t] : p.entries) {
    const bool is_kernel = name.size() > 2 && name.compare(name.size() - 2, 2, ".w") == 0;
    const bool is_bias = name.size() > 2 && name.compare(name.size() - 2, 2, ".b") == 0;
    for (auto& v : t.data()) {
      if (is_kernel) v *= w_scale;
      if (is_bias) v = rng.uniform(-0.2, 0.2);
    }
  }
  return p;
}

// L1 target 0.02-0.04 away from the starting output: far beyond what a
// 1e-5 weight step moves any output, and small enough that 100 * L1 keeps the
// loss near unit scale, where central-difference roundoff stays below 1e-10.
T64 offset_target(const T64& out, Rng& rng) {
  std::vector<double> v(out.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = out.data()[i] + (rng.uniform() < 0.5 ? -1 : 1) * rng.uniform(0.02, 0.04);
  }
  return T64::from(out.shape(), std::move(v));
}

// Gradient of adv(D(x, G(x))) + 100 * l1(G(x), y) w.r.t. every G parameter.
template <typename GenFn, typename DiscFn, typename AdvFn>
GradCheckResult check_full_loss(models::ModelParams<double>& g, const T64& x, Rng& rng, GenFn gen, DiscFn disc,
                                AdvFn adv) {
  T64 y;
  {
    NoGradGuard guard;
    y = offset_target(gen(g, x), rng);
  }
  auto params = g.tensors();
  return check_gradients(
      [&] {
        const auto out = gen(g, x);
        return add(adv(disc(x, out)), scale(l1_loss(out, y), 100.0));
      },
      params, kGradStep, 1e-6, kGradTol, 1);
}

std::string where(const models::ModelParams<double>& g, const GradCheckResult& r) {
  std::ostringstream s;
  s << " in " << g.entries[r.worst_tensor].first << " (" << g.config.tag() << ")";
  return s.str();
}

}  // namespace

std::vector<OpCheck> gradcheck_ops(std::size_t trials, std::uint64_t seed) {
  Ledger ledger;
  Rng rng(seed);
  for (std::size_t t = 0; t < trials; ++t) {
    const auto c = rand_conv(rng);
    check_op(ledger, "conv2d", [&](std::vector<T64>& in) { return conv2d(in[0], in[1], c.g); },
             {rand_tensor(rng, {c.n, c.h, c.w, c.cin}), rand_tensor(rng, {c.kh, c.kw, c.cin, c.cout})}, rng);
    const auto oh = conv_out_extent(c.h, c.kh, c.g.stride_h, c.g.pad_top, c.g.pad_bottom);
    const auto ow = conv_out_extent(c.w, c.kw, c.g.stride_w, c.g.pad_left, c.g.pad_right);
    check_op(ledger, "conv2d_transpose", [&](std::vector<T64>& in) { return conv2d_transpose(in[0], in[1], c.g, c.h, c.w); },
             {rand_tensor(rng, {c.n, oh, ow, c.cout}), rand_tensor(rng, {c.kh, c.kw, c.cin, c.cout})}, rng);

    const std::size_t kw = 1 + rng.below(6), stride = 1 + rng.below(3), pl = rng.below(kw), pr = rng.below(kw);
    const std::size_t len = kw + rng.below(10), cin = 1 + rng.below(3), cout = 1 + rng.below(3);
    const std::size_t out = conv_out_extent(len, kw, stride, pl, pr);
    check_op(ledger, "conv1d", [&](std::vector<T64>& in) { return conv1d(in[0], in[1], stride, pl, pr); },
             {rand_tensor(rng, {2, len, cin}), rand_tensor(rng, {kw, cin, cout})}, rng);
    check_op(ledger, "conv1d_transpose",
             [&](std::vector<T64>& in) { return conv1d_transpose(in[0], in[1], stride, pl, pr, len); },
             {rand_tensor(rng, {2, out, cout}), rand_tensor(rng, {kw, cin, cout})}, rng);

    const Shape s{1 + rng.below(2), 1 + rng.below(4), 1 + rng.below(4), 1 + rng.below(3)};
    const std::size_t ch = s[3];
    check_op(ledger, "leaky_relu", [](std::vector<T64>& in) { return leaky_relu(in[0]); }, {rand_away_from_zero(rng, s)},
             rng);
    check_op(ledger, "relu", [](std::vector<T64>& in) { return relu(in[0]); }, {rand_away_from_zero(rng, s)}, rng);
    check_op(ledger, "tanh", [](std::vector<T64>& in) { return ad::tanh(in[0]); }, {rand_tensor(rng, s, -2, 2)}, rng);
    check_op(ledger, "sigmoid", [](std::vector<T64>& in) { return sigmoid(in[0]); }, {rand_tensor(rng, s, -4, 4)}, rng);
    check_op(ledger, "add_bias", [](std::vector<T64>& in) { return add_bias(in[0], in[1]); },
             {rand_tensor(rng, s), rand_tensor(rng, {ch})}, rng);
    Shape s2 = s;
    s2[3] = 1 + rng.below(3);
    check_op(ledger, "concat_channels", [](std::vector<T64>& in) { return concat_channels(in[0], in[1]); },
             {rand_tensor(rng, s), rand_tensor(rng, s2)}, rng);
    // Batch statistics need more than one element per channel.
    Shape sb = s;
    sb[1] += 1;
    check_op(ledger, "batch_norm", [](std::vector<T64>& in) { return batch_norm(in[0], in[1], in[2]); },
             {rand_tensor(rng, sb, -2, 2), rand_tensor(rng, {ch}, 0.5, 1.5), rand_tensor(rng, {ch})}, rng);
    check_op(ledger, "reshape", [&](std::vector<T64>& in) { return reshape(in[0], {shape_size(s)}); },
             {rand_tensor(rng, s)}, rng);
    check_op(ledger, "mean_spatial", [](std::vector<T64>& in) { return mean_spatial(in[0]); }, {rand_tensor(rng, s)}, rng);
    check_op(ledger, "sum", [](std::vector<T64>& in) { return ad::sum(in[0]); }, {rand_tensor(rng, s)}, rng);
    check_op(ledger, "mean", [](std::vector<T64>& in) { return mean(in[0]); }, {rand_tensor(rng, s)}, rng);
    check_op(ledger, "add", [](std::vector<T64>& in) { return add(in[0], in[1]); },
             {rand_tensor(rng, s), rand_tensor(rng, s)}, rng);
    const double f = rng.uniform(-3, 3);
    check_op(ledger, "scale", [f](std::vector<T64>& in) { return scale(in[0], f); }, {rand_tensor(rng, s)}, rng);

    const Shape sl{1 + rng.below(4), 1 + rng.below(9)};
    const auto target = rand_tensor(rng, sl, -1, 1, false);
    // |pred - target| >= 0.05 so the FD step never crosses the kink.
    std::vector<double> p(target.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] = target.data()[i] + (rng.uniform() < 0.5 ? -1 : 1) * rng.uniform(0.05, 1.0);
    }
    check_op(ledger, "l1_loss", [&](std::vector<T64>& in) { return l1_loss(in[0], target); }, {T64::from(sl, p, true)},
             rng);
    check_op(ledger, "gan_bce_d", [](std::vector<T64>& in) { return gan_bce_d(in[0], in[1]); },
             {rand_tensor(rng, sl, 0.05, 0.95), rand_tensor(rng, sl, 0.05, 0.95)}, rng);
    check_op(ledger, "gan_bce_g", [](std::vector<T64>& in) { return gan_bce_g(in[0]); },
             {rand_tensor(rng, sl, 0.05, 0.95)}, rng);
    check_op(ledger, "lsgan_d", [](std::vector<T64>& in) { return lsgan_d(in[0], in[1]); },
             {rand_tensor(rng, sl, -1, 2), rand_tensor(rng, sl, -1, 2)}, rng);
    check_op(ledger, "lsgan_g", [](std::vector<T64>& in) { return lsgan_g(in[0]); }, {rand_tensor(rng, sl, -1, 2)}, rng);
  }
  return ledger.take();
}

std::vector<OpCheck> gradcheck_generator_losses(std::size_t shapes, std::uint64_t seed) {
  Ledger ledger;
  Rng rng(seed);
  for (std::size_t t = 0; t < shapes; ++t) {
    {
      auto gcfg = models::fsegan_miniature();
      gcfg.depth = 3 + static_cast<int>(rng.below(2));
      gcfg.patch_frames = 16 * (1 + static_cast<int>(rng.below(2)));
      gcfg.base_channels = 1 + static_cast<int>(rng.below(3));
      gcfg.channel_cap = 4 + 2 * static_cast<int>(rng.below(2));
      gcfg.d_layers = 2 + static_cast<int>(rng.below(3));
      auto dcfg = gcfg;
      dcfg.role = models::Role::kDiscriminator;
      auto g = rescaled(gcfg, 1000 + 2 * t, 12.0);
      auto d = rescaled(dcfg, 1001 + 2 * t, 12.0);
      d.set_trainable(false);
      const std::size_t batch = 1 + rng.below(2);
      const auto x = rand_tensor(rng, {batch, static_cast<std::size_t>(gcfg.patch_frames),
                                       static_cast<std::size_t>(gcfg.patch_bins), 2}, -1, 1, false);
      const auto r = check_full_loss(
          g, x, rng, [](const auto& p, const T64& in) { return models::fsegan_generator(p, in); },
          [&](const T64& in, const T64& cand) { return models::fsegan_discriminator(d, in, cand); },
          [](const T64& dz) { return gan_bce_g(dz); });
      ledger.record("fsegan G loss (bce + 100 l1)", r, where(g, r));
    }
    {
      auto gcfg = models::segan_config();
      gcfg.depth = 2 + static_cast<int>(rng.below(2));
      gcfg.base_channels = 1 + static_cast<int>(rng.below(2));
      gcfg.channel_cap = 4;
      gcfg.filter_width = 3 + 2 * static_cast<int>(rng.below(2));
      gcfg.window_samples = (1 << gcfg.depth) * (2 + static_cast<int>(rng.below(5)));
      auto dcfg = gcfg;
      dcfg.role = models::Role::kDiscriminator;
      auto g = rescaled(gcfg, 2000 + 2 * t, 10.0);
      auto d = rescaled(dcfg, 2001 + 2 * t, 10.0);
      d.set_trainable(false);
      const std::size_t batch = 1 + rng.below(2);
      const auto x = rand_tensor(rng, {batch, static_cast<std::size_t>(gcfg.window_samples), 2}, -1, 1, false);
      const auto r = check_full_loss(
          g, x, rng, [](const auto& p, const T64& in) { return models::segan_generator(p, in); },
          [&](const T64& in, const T64& cand) { return models::segan_discriminator(d, in, cand); },
          [](const T64& dz) { return lsgan_g(dz); });
      ledger.record("segan G loss (lsgan + 100 l1)", r, where(g, r));
    }
  }
  return ledger.take();
}

}  // namespace fsegan::testing
