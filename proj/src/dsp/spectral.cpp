#include "fsegan/dsp/spectral.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fsegan::dsp {

void StftConfig::validate() const {
  if (window_len == 0 || hop == 0 || fft_size == 0) {
    throw std::invalid_argument("stft sizes must be positive");
  }
  if (hop > window_len || window_len > fft_size) {
    throw std::invalid_argument("stft requires hop <= window_len <= fft_size");
  }
  if (!std::has_single_bit(fft_size)) throw std::invalid_argument("fft_size must be a power of two");
}

void fft_inplace(std::span<std::complex<double>> data) {
  const std::size_t n = data.size();
  if (!std::has_single_bit(n)) throw std::invalid_argument("fft length must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = -2.0 * std::numbers::pi / static_cast<double>(len);
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        // Twiddles are evaluated directly rather than by recurrence to keep
        // rounding error flat across k.
        const std::complex<double> w(std::cos(angle * k), std::sin(angle * k));
        const auto u = data[start + k];
        const auto v = data[start + k + len / 2] * w;
        data[start + k] = u + v;
        data[start + k + len / 2] = u - v;
      }
    }
  }
}

std::vector<double> make_window(WindowFn fn, std::size_t length) {
  std::vector<double> w(length, 1.0);
  if (fn == WindowFn::kHannPeriodic) {
    for (std::size_t i = 0; i < length; ++i) {
      w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                  static_cast<double>(length));
    }
  }
  return w;
}

std::size_t stft_frame_count(std::size_t n_samples, const StftConfig& cfg) {
  if (n_samples < cfg.window_len) return 0;
  return 1 + (n_samples - cfg.window_len) / cfg.hop;
}

std::vector<Grid> stft_magnitude(const AudioClip& clip, const StftConfig& cfg) {
  cfg.validate();
  clip.validate();
  if (clip.length() < cfg.window_len) {
    throw std::invalid_argument("clip shorter than one stft window (" + std::to_string(clip.length()) +
                                " < " + std::to_string(cfg.window_len) + ")");
  }
  const std::size_t n_frames = stft_frame_count(clip.length(), cfg);
  const std::size_t n_bins = cfg.n_bins();
  const auto window = make_window(cfg.window, cfg.window_len);

  std::vector<Grid> out;
  std::vector<std::complex<double>> buf(cfg.fft_size);
  for (const auto& ch : clip.channels) {
    Grid mag(n_frames, n_bins);
    for (std::size_t f = 0; f < n_frames; ++f) {
      const std::size_t offset = f * cfg.hop;
      std::fill(buf.begin(), buf.end(), std::complex<double>{});
      for (std::size_t i = 0; i < cfg.window_len; ++i) buf[i] = ch[offset + i] * window[i];
      fft_inplace(buf);
      for (std::size_t k = 0; k < n_bins; ++k) mag.at(f, k) = std::abs(buf[k]);
    }
    out.push_back(std::move(mag));
  }
  return out;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

MelFilterBank build_mel_filterbank(const MelConfig& mel, const StftConfig& stft) {
  stft.validate();
  const std::size_t n_bins = stft.n_bins();
  const double nyquist = mel.sample_rate / 2.0;
  if (mel.n_filters == 0) throw std::invalid_argument("mel filterbank needs at least one filter");
  if (!(mel.f_min >= 0.0 && mel.f_min < mel.f_max && mel.f_max <= nyquist)) {
    throw std::invalid_argument("mel range must satisfy 0 <= f_min < f_max <= nyquist");
  }
  if (mel.n_filters + 2 > n_bins) {
    throw std::invalid_argument("too many mel filters (" + std::to_string(mel.n_filters) +
                                ") for " + std::to_string(n_bins) + " fft bins");
  }

  MelFilterBank fb;
  fb.config = mel;
  const double mel_lo = hz_to_mel(mel.f_min);
  const double mel_hi = hz_to_mel(mel.f_max);
  const std::size_t n_points = mel.n_filters + 2;
  fb.breakpoints_hz.resize(n_points);
  for (std::size_t i = 0; i < n_points; ++i) {
    const double m = mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) / (n_points - 1);
    fb.breakpoints_hz[i] = mel_to_hz(m);
  }
  fb.breakpoints_hz.front() = mel.f_min;
  fb.breakpoints_hz.back() = mel.f_max;

  const double bin_hz = static_cast<double>(mel.sample_rate) / static_cast<double>(stft.fft_size);
  fb.weights = Grid(mel.n_filters, n_bins);
  for (std::size_t i = 0; i < mel.n_filters; ++i) {
    const double lo = fb.breakpoints_hz[i];
    const double centre = fb.breakpoints_hz[i + 1];
    const double hi = fb.breakpoints_hz[i + 2];
    bool any = false;
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double f = bin_hz * static_cast<double>(k);
      double w = 0.0;
      if (f > lo && f <= centre) {
        w = (f - lo) / (centre - lo);
      } else if (f > centre && f < hi) {
        w = (hi - f) / (hi - centre);
      }
      fb.weights.at(i, k) = w;
      any = any || w > 0.0;
    }
    if (!any) {
      const auto k = static_cast<std::size_t>(std::lround(centre / bin_hz));
      fb.weights.at(i, std::min(k, n_bins - 1)) = 1.0;
    }
  }
  return fb;
}

}  // namespace fsegan::dsp
