#include "fsegan/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fsegan/common/binary_io.hpp"

namespace fsegan::eval {

double lsd(const dsp::LogMelSpectrogram& a, const dsp::LogMelSpectrogram& b) {
  if (a.n_channels != 1 || b.n_channels != 1) throw std::invalid_argument("lsd expects single-channel spectrograms");
  if (a.n_frames != b.n_frames || a.n_bins != b.n_bins) {
    throw std::invalid_argument("lsd shape mismatch: " + std::to_string(a.n_frames) + "x" + std::to_string(a.n_bins) +
                                " vs " + std::to_string(b.n_frames) + "x" + std::to_string(b.n_bins));
  }
  if (a.n_frames == 0 || a.n_bins == 0) throw std::invalid_argument("lsd of an empty spectrogram");
  const double to_db = 10.0 / std::numbers::ln10;
  double total = 0.0;
  for (std::size_t f = 0; f < a.n_frames; ++f) {
    double acc = 0.0;
    for (std::size_t k = 0; k < a.n_bins; ++k) {
      const double d = to_db * (a.at(f, k, 0) - b.at(f, k, 0));
      acc += d * d;
    }
    total += std::sqrt(acc / static_cast<double>(a.n_bins));
  }
  return total / static_cast<double>(a.n_frames);
}

double seg_snr(const dsp::AudioClip& ref, const dsp::AudioClip& est, std::size_t frame, std::size_t hop) {
  if (ref.n_channels() != 1 || est.n_channels() != 1) throw std::invalid_argument("seg_snr expects mono clips");
  if (ref.length() != est.length()) {
    throw std::invalid_argument("seg_snr length mismatch: " + std::to_string(ref.length()) + " vs " +
                                std::to_string(est.length()));
  }
  if (frame == 0 || hop == 0) throw std::invalid_argument("seg_snr frame and hop must be positive");
  const auto r = ref.channel(0);
  const auto e = est.channel(0);
  double total = 0.0;
  std::size_t frames = 0;
  for (std::size_t start = 0; start + frame <= r.size(); start += hop) {
    double signal = 0.0, noise = 0.0;
    for (std::size_t i = start; i < start + frame; ++i) {
      const double s = r[i];
      const double d = s - static_cast<double>(e[i]);
      signal += s * s;
      noise += d * d;
    }
    if (signal == 0.0) continue;
    const double db = noise == 0.0 ? kSegSnrCeilDb : 10.0 * std::log10(signal / noise);
    total += std::clamp(db, kSegSnrFloorDb, kSegSnrCeilDb);
    ++frames;
  }
  if (frames == 0) throw std::invalid_argument("seg_snr: reference has no voiced frames");
  return total / static_cast<double>(frames);
}

std::string encode_pgm(const dsp::LogMelSpectrogram& spec) {
  if (spec.n_channels != 1) throw std::invalid_argument("spectrogram image needs a single channel");
  if (spec.n_frames == 0 || spec.n_bins == 0) throw std::invalid_argument("spectrogram image of an empty spectrogram");
  double lo = spec.values[0], hi = spec.values[0];
  for (double v : spec.values) {
    if (!std::isfinite(v)) throw std::invalid_argument("spectrogram image needs finite values");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  std::string out = "P5\n" + std::to_string(spec.n_frames) + " " + std::to_string(spec.n_bins) + "\n255\n";
  const std::size_t header = out.size();
  out.resize(header + spec.n_frames * spec.n_bins);
  for (std::size_t row = 0; row < spec.n_bins; ++row) {
    const std::size_t bin = spec.n_bins - 1 - row;
    for (std::size_t t = 0; t < spec.n_frames; ++t) {
      unsigned pixel = 128;
      if (hi > lo) pixel = static_cast<unsigned>(std::lround((spec.at(t, bin, 0) - lo) / (hi - lo) * 255.0));
      out[header + row * spec.n_frames + t] = static_cast<char>(pixel);
    }
  }
  return out;
}

void spectrogram_image(const dsp::LogMelSpectrogram& spec, const std::filesystem::path& path) {
  atomic_write_file(path, encode_pgm(spec));
}

dsp::LogMelSpectrogram hybrid_features(const dsp::LogMelSpectrogram& noisy, const dsp::LogMelSpectrogram& enhanced) {
  if (noisy.n_channels != 2) throw std::invalid_argument("hybrid export needs 2-channel noisy features");
  if (enhanced.n_channels != 1) throw std::invalid_argument("hybrid export needs 1-channel enhanced features");
  if (noisy.n_frames != enhanced.n_frames || noisy.n_bins != enhanced.n_bins) {
    throw std::invalid_argument("hybrid export frame mismatch: noisy " + std::to_string(noisy.n_frames) +
                                " frames, enhanced " + std::to_string(enhanced.n_frames));
  }
  const dsp::LogMelSpectrogram parts[] = {enhanced, noisy};
  return dsp::stack_channels(parts);
}

void hybrid_export(const dsp::LogMelSpectrogram& noisy, const dsp::LogMelSpectrogram& enhanced,
                   const std::filesystem::path& path) {
  dsp::save_features(hybrid_features(noisy, enhanced), path);
}

}  // namespace fsegan::eval
