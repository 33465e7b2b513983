#include "fsegan/ad/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace fsegan::ad {

namespace {

template <typename T>
T clamp_prob(T p) {
  const T lo = static_cast<T>(kLogClamp);
  return p < lo ? lo : (p > T{1} - lo ? T{1} - lo : p);
}

template <typename T>
bool clamped(T p) {
  const T lo = static_cast<T>(kLogClamp);
  return p < lo || p > T{1} - lo;
}

}  // namespace

template <typename T>
Tensor<T> l1_loss(const Tensor<T>& prediction, const Tensor<T>& target) {
  if (prediction.shape() != target.shape()) {
    throw std::invalid_argument("l1_loss: shape mismatch " + shape_string(prediction.shape()) + " vs " +
                                shape_string(target.shape()));
  }
  const auto p = prediction.data();
  const auto t = target.data();
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) acc += std::abs(static_cast<double>(p[i]) - t[i]);
  const double n = static_cast<double>(p.size());
  auto target_values = std::vector<T>(t.begin(), t.end());
  return make_result<T>({1}, {static_cast<T>(acc / n)}, {prediction},
                        [n, target_values = std::move(target_values)](Node<T>& self) {
                          auto& pr = *self.parents[0];
                          const T g = static_cast<T>(self.grad[0] / n);
                          for (std::size_t i = 0; i < pr.data.size(); ++i) {
                            const T diff = pr.data[i] - target_values[i];
                            pr.grad[i] += diff > T{0} ? g : (diff < T{0} ? -g : T{0});
                          }
                        });
}

template <typename T>
Tensor<T> gan_bce_d(const Tensor<T>& d_real, const Tensor<T>& d_fake) {
  double real = 0.0, fake = 0.0;
  for (T p : d_real.data()) real -= std::log(static_cast<double>(clamp_prob(p)));
  for (T p : d_fake.data()) fake -= std::log(1.0 - static_cast<double>(clamp_prob(p)));
  const double nr = static_cast<double>(d_real.size()), nf = static_cast<double>(d_fake.size());
  return make_result<T>({1}, {static_cast<T>(real / nr + fake / nf)}, {d_real, d_fake}, [nr, nf](Node<T>& self) {
    auto& r = *self.parents[0];
    auto& f = *self.parents[1];
    const double g = self.grad[0];
    if (r.requires_grad) {
      for (std::size_t i = 0; i < r.data.size(); ++i) {
        if (!clamped(r.data[i])) r.grad[i] += static_cast<T>(-g / (nr * r.data[i]));
      }
    }
    if (f.requires_grad) {
      for (std::size_t i = 0; i < f.data.size(); ++i) {
        if (!clamped(f.data[i])) f.grad[i] += static_cast<T>(g / (nf * (1.0 - f.data[i])));
      }
    }
  });
}

template <typename T>
Tensor<T> gan_bce_g(const Tensor<T>& d_fake) {
  double acc = 0.0;
  for (T p : d_fake.data()) acc -= std::log(static_cast<double>(clamp_prob(p)));
  const double n = static_cast<double>(d_fake.size());
  return make_result<T>({1}, {static_cast<T>(acc / n)}, {d_fake}, [n](Node<T>& self) {
    auto& f = *self.parents[0];
    const double g = self.grad[0];
    for (std::size_t i = 0; i < f.data.size(); ++i) {
      if (!clamped(f.data[i])) f.grad[i] += static_cast<T>(-g / (n * f.data[i]));
    }
  });
}

template <typename T>
Tensor<T> lsgan_d(const Tensor<T>& d_real, const Tensor<T>& d_fake) {
  double real = 0.0, fake = 0.0;
  for (T v : d_real.data()) real += (static_cast<double>(v) - 1.0) * (static_cast<double>(v) - 1.0);
  for (T v : d_fake.data()) fake += static_cast<double>(v) * v;
  const double nr = static_cast<double>(d_real.size()), nf = static_cast<double>(d_fake.size());
  return make_result<T>({1}, {static_cast<T>(0.5 * real / nr + 0.5 * fake / nf)}, {d_real, d_fake},
                        [nr, nf](Node<T>& self) {
                          auto& r = *self.parents[0];
                          auto& f = *self.parents[1];
                          const double g = self.grad[0];
                          if (r.requires_grad) {
                            for (std::size_t i = 0; i < r.data.size(); ++i) {
                              r.grad[i] += static_cast<T>(g * (r.data[i] - 1.0) / nr);
                            }
                          }
                          if (f.requires_grad) {
                            for (std::size_t i = 0; i < f.data.size(); ++i) {
                              f.grad[i] += static_cast<T>(g * f.data[i] / nf);
                            }
                          }
                        });
}

template <typename T>
Tensor<T> lsgan_g(const Tensor<T>& d_fake) {
  double acc = 0.0;
  for (T v : d_fake.data()) acc += (static_cast<double>(v) - 1.0) * (static_cast<double>(v) - 1.0);
  const double n = static_cast<double>(d_fake.size());
  return make_result<T>({1}, {static_cast<T>(0.5 * acc / n)}, {d_fake}, [n](Node<T>& self) {
    auto& f = *self.parents[0];
    const double g = self.grad[0];
    for (std::size_t i = 0; i < f.data.size(); ++i) f.grad[i] += static_cast<T>(g * (f.data[i] - 1.0) / n);
  });
}

#define FSEGAN_INSTANTIATE_LOSSES(T)                                   \
  template Tensor<T> l1_loss(const Tensor<T>&, const Tensor<T>&);     \
  template Tensor<T> gan_bce_d(const Tensor<T>&, const Tensor<T>&);   \
  template Tensor<T> gan_bce_g(const Tensor<T>&);                     \
  template Tensor<T> lsgan_d(const Tensor<T>&, const Tensor<T>&);     \
  template Tensor<T> lsgan_g(const Tensor<T>&);

FSEGAN_INSTANTIATE_LOSSES(float)
FSEGAN_INSTANTIATE_LOSSES(double)

#undef FSEGAN_INSTANTIATE_LOSSES

}  // namespace fsegan::ad
