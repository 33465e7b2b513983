#include "fsegan/dsp/features.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fsegan/common/binary_io.hpp"

namespace fsegan::dsp {

namespace {

constexpr std::uint32_t kFeatureVersion = 1;

void require_stats_match(const LogMelSpectrogram& spec, const NormStats& stats) {
  if (stats.n_bins() != spec.n_bins || stats.std.size() != spec.n_bins) {
    throw std::invalid_argument("normalization stats have " + std::to_string(stats.n_bins()) +
                                " bins, spectrogram has " + std::to_string(spec.n_bins));
  }
}

}  // namespace

LogMelSpectrogram LogMelSpectrogram::channel(std::size_t ch) const {
  if (ch >= n_channels) throw std::out_of_range("channel index out of range");
  LogMelSpectrogram out(n_frames, n_bins, 1);
  out.normalized = normalized;
  out.frame_hop_s = frame_hop_s;
  for (std::size_t f = 0; f < n_frames; ++f) {
    for (std::size_t b = 0; b < n_bins; ++b) out.at(f, b, 0) = at(f, b, ch);
  }
  return out;
}

void LogMelSpectrogram::validate() const {
  if (values.size() != n_frames * n_bins * n_channels) {
    throw std::invalid_argument("spectrogram value count does not match its shape");
  }
  if (n_channels < 1 || n_channels > 3) throw std::invalid_argument("spectrogram must have 1-3 channels");
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("spectrogram contains non-finite values");
  }
}

LogMelSpectrogram stack_channels(std::span<const LogMelSpectrogram> parts) {
  if (parts.empty()) throw std::invalid_argument("nothing to stack");
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (p.n_frames != parts[0].n_frames || p.n_bins != parts[0].n_bins) {
      throw std::invalid_argument("cannot stack spectrograms with different frame/bin counts");
    }
    total += p.n_channels;
  }
  LogMelSpectrogram out(parts[0].n_frames, parts[0].n_bins, total);
  out.normalized = parts[0].normalized;
  out.frame_hop_s = parts[0].frame_hop_s;
  for (std::size_t f = 0; f < out.n_frames; ++f) {
    for (std::size_t b = 0; b < out.n_bins; ++b) {
      std::size_t c = 0;
      for (const auto& p : parts) {
        for (std::size_t pc = 0; pc < p.n_channels; ++pc) out.at(f, b, c++) = p.at(f, b, pc);
      }
    }
  }
  return out;
}

LogMelSpectrogram log_mel(std::span<const Grid> magnitudes, const MelFilterBank& fb, double floor) {
  if (magnitudes.empty()) throw std::invalid_argument("no magnitude channels");
  const std::size_t n_frames = magnitudes[0].rows;
  for (const auto& m : magnitudes) {
    if (m.cols != fb.n_fft_bins()) {
      throw std::invalid_argument("magnitude width " + std::to_string(m.cols) +
                                  " does not match filterbank width " + std::to_string(fb.n_fft_bins()));
    }
    if (m.rows != n_frames) throw std::invalid_argument("magnitude channels differ in frame count");
  }
  LogMelSpectrogram out(n_frames, fb.n_filters(), magnitudes.size());
  for (std::size_t c = 0; c < magnitudes.size(); ++c) {
    for (std::size_t f = 0; f < n_frames; ++f) {
      const auto frame = magnitudes[c].row(f);
      for (std::size_t i = 0; i < fb.n_filters(); ++i) {
        const auto w = fb.weights.row(i);
        double acc = 0.0;
        for (std::size_t k = 0; k < frame.size(); ++k) acc += w[k] * frame[k];
        out.at(f, i, c) = std::log(std::max(acc, floor));
      }
    }
  }
  return out;
}

LogMelSpectrogram FrontEnd::operator()(const AudioClip& clip) const {
  const auto mags = stft_magnitude(clip, stft);
  auto spec = log_mel(mags, filterbank());
  spec.frame_hop_s = static_cast<double>(stft.hop) / clip.sample_rate;
  return spec;
}

NormStats fit_norm_stats(std::span<const LogMelSpectrogram> corpus) {
  if (corpus.empty()) throw std::invalid_argument("cannot fit normalization stats on an empty corpus");
  const std::size_t n_bins = corpus[0].n_bins;
  std::vector<double> count(n_bins, 0.0), mean(n_bins, 0.0), m2(n_bins, 0.0);
  for (const auto& spec : corpus) {
    if (spec.n_bins != n_bins) throw std::invalid_argument("corpus spectrograms differ in bin count");
    if (spec.normalized) throw std::invalid_argument("stats must be fitted on unnormalized features");
    const double n = static_cast<double>(spec.n_frames * spec.n_channels);
    if (n == 0) continue;
    for (std::size_t b = 0; b < n_bins; ++b) {
      double sum = 0.0;
      for (std::size_t f = 0; f < spec.n_frames; ++f) {
        for (std::size_t c = 0; c < spec.n_channels; ++c) sum += spec.at(f, b, c);
      }
      const double local_mean = sum / n;
      double local_m2 = 0.0;
      for (std::size_t f = 0; f < spec.n_frames; ++f) {
        for (std::size_t c = 0; c < spec.n_channels; ++c) {
          const double d = spec.at(f, b, c) - local_mean;
          local_m2 += d * d;
        }
      }
      // Chan et al. pairwise merge of (count, mean, M2).
      const double total = count[b] + n;
      const double delta = local_mean - mean[b];
      mean[b] += delta * n / total;
      m2[b] += local_m2 + delta * delta * count[b] * n / total;
      count[b] = total;
    }
  }
  NormStats stats;
  stats.mean.resize(n_bins);
  stats.std.resize(n_bins);
  for (std::size_t b = 0; b < n_bins; ++b) {
    if (count[b] == 0) throw std::invalid_argument("corpus has no frames");
    const double sd = std::max(std::sqrt(m2[b] / count[b]), kStdFloor);
    stats.mean[b] = static_cast<float>(mean[b]);
    stats.std[b] = std::max(static_cast<double>(static_cast<float>(sd)), kStdFloor);
  }
  return stats;
}

LogMelSpectrogram normalize(const LogMelSpectrogram& spec, const NormStats& stats) {
  require_stats_match(spec, stats);
  if (spec.normalized) throw std::invalid_argument("spectrogram is already normalized");
  LogMelSpectrogram out = spec;
  out.normalized = true;
  for (std::size_t f = 0; f < spec.n_frames; ++f) {
    for (std::size_t b = 0; b < spec.n_bins; ++b) {
      for (std::size_t c = 0; c < spec.n_channels; ++c) {
        out.at(f, b, c) = (spec.at(f, b, c) - stats.mean[b]) / stats.std[b];
      }
    }
  }
  return out;
}

LogMelSpectrogram denormalize(const LogMelSpectrogram& spec, const NormStats& stats) {
  require_stats_match(spec, stats);
  if (!spec.normalized) throw std::invalid_argument("spectrogram is not normalized");
  LogMelSpectrogram out = spec;
  out.normalized = false;
  for (std::size_t f = 0; f < spec.n_frames; ++f) {
    for (std::size_t b = 0; b < spec.n_bins; ++b) {
      for (std::size_t c = 0; c < spec.n_channels; ++c) {
        out.at(f, b, c) = spec.at(f, b, c) * stats.std[b] + stats.mean[b];
      }
    }
  }
  return out;
}

std::vector<WindowPlacement> window_placements(std::size_t n_frames, std::size_t width, double overlap_frac) {
  if (width == 0) throw std::invalid_argument("window width must be positive");
  if (!(overlap_frac >= 0.0 && overlap_frac < 1.0)) {
    throw std::invalid_argument("overlap fraction must lie in [0, 1)");
  }
  const auto stride = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(static_cast<double>(width) * (1.0 - overlap_frac))));
  std::vector<WindowPlacement> out;
  std::size_t start = 0;
  while (true) {
    out.push_back({start, std::min(width, n_frames > start ? n_frames - start : 0)});
    if (start + width >= n_frames) break;
    start += stride;
  }
  return out;
}

FeatureWindows frame_windows(const LogMelSpectrogram& spec, std::size_t width, double overlap_frac) {
  FeatureWindows out;
  out.width = width;
  out.placement = window_placements(spec.n_frames, width, overlap_frac);
  const std::size_t stride_frame = spec.n_bins * spec.n_channels;
  for (const auto& [start, valid] : out.placement) {
    LogMelSpectrogram patch(width, spec.n_bins, spec.n_channels, 0.0);
    patch.normalized = spec.normalized;
    patch.frame_hop_s = spec.frame_hop_s;
    std::copy_n(spec.values.begin() + static_cast<std::ptrdiff_t>(start * stride_frame),
                valid * stride_frame, patch.values.begin());
    out.patches.push_back(std::move(patch));
  }
  return out;
}

LogMelSpectrogram reassemble(std::span<const LogMelSpectrogram> patches,
                             std::span<const WindowPlacement> placement, std::size_t total_frames) {
  if (patches.size() != placement.size()) throw std::invalid_argument("patch/placement count mismatch");
  if (patches.empty()) throw std::invalid_argument("nothing to reassemble");
  const auto& first = patches[0];
  LogMelSpectrogram out(total_frames, first.n_bins, first.n_channels, 0.0);
  out.normalized = first.normalized;
  out.frame_hop_s = first.frame_hop_s;
  const std::size_t stride_frame = first.n_bins * first.n_channels;
  std::size_t expected_start = 0;
  for (std::size_t i = 0; i < patches.size(); ++i) {
    const auto& p = patches[i];
    const auto& where = placement[i];
    if (p.n_bins != first.n_bins || p.n_channels != first.n_channels) {
      throw std::invalid_argument("patches differ in bin or channel count");
    }
    if (where.start != expected_start) {
      throw std::invalid_argument("reassemble supports only non-overlapping placements");
    }
    if (where.valid > p.n_frames) throw std::invalid_argument("placement valid length exceeds patch");
    if (i + 1 < patches.size() && where.valid != p.n_frames) {
      throw std::invalid_argument("only the final window may be partial");
    }
    const std::size_t n = std::min(where.valid, total_frames > where.start ? total_frames - where.start : 0);
    std::copy_n(p.values.begin(), n * stride_frame,
                out.values.begin() + static_cast<std::ptrdiff_t>(where.start * stride_frame));
    expected_start += p.n_frames;
  }
  return out;
}

std::string encode_features(const LogMelSpectrogram& spec) {
  if (spec.values.size() != spec.n_frames * spec.n_bins * spec.n_channels) {
    throw std::invalid_argument("spectrogram value count does not match its shape");
  }
  ByteWriter out;
  out.bytes("LMFB");
  out.u32(kFeatureVersion);
  out.u32(static_cast<std::uint32_t>(spec.n_frames));
  out.u32(static_cast<std::uint32_t>(spec.n_bins));
  out.u32(static_cast<std::uint32_t>(spec.n_channels));
  out.u8(spec.normalized ? 1 : 0);
  for (double v : spec.values) out.f32(static_cast<float>(v));
  return out.release();
}

LogMelSpectrogram decode_features(std::string_view bytes) {
  ByteReader in(bytes);
  try {
    if (in.bytes(4) != "LMFB") throw std::runtime_error("bad magic (expected LMFB)");
    const auto version = in.u32();
    if (version != kFeatureVersion) {
      throw std::runtime_error("unsupported feature file version " + std::to_string(version));
    }
    LogMelSpectrogram spec;
    spec.n_frames = in.u32();
    spec.n_bins = in.u32();
    spec.n_channels = in.u32();
    spec.normalized = in.u8() != 0;
    const std::size_t count = spec.n_frames * spec.n_bins * spec.n_channels;
    if (in.remaining() != count * 4) throw std::runtime_error("payload size does not match header");
    spec.values.resize(count);
    for (auto& v : spec.values) v = in.f32();
    return spec;
  } catch (const TruncatedInput& e) {
    throw std::runtime_error(std::string("truncated feature file: ") + e.what());
  }
}

void save_features(const LogMelSpectrogram& spec, const std::filesystem::path& path) {
  atomic_write_file(path, encode_features(spec));
}

LogMelSpectrogram load_features(const std::filesystem::path& path) {
  try {
    return decode_features(read_file(path));
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

std::string encode_stats(const NormStats& stats) {
  if (stats.mean.size() != stats.std.size()) throw std::invalid_argument("stats mean/std size mismatch");
  ByteWriter out;
  out.bytes("NSTA");
  out.u32(static_cast<std::uint32_t>(stats.n_bins()));
  for (double v : stats.mean) out.f32(static_cast<float>(v));
  for (double v : stats.std) out.f32(static_cast<float>(v));
  return out.release();
}

NormStats decode_stats(std::string_view bytes) {
  ByteReader in(bytes);
  try {
    if (in.bytes(4) != "NSTA") throw std::runtime_error("bad magic (expected NSTA)");
    const std::size_t n = in.u32();
    if (in.remaining() != n * 8) throw std::runtime_error("payload size does not match header");
    NormStats stats;
    stats.mean.resize(n);
    stats.std.resize(n);
    for (auto& v : stats.mean) v = in.f32();
    for (auto& v : stats.std) {
      v = in.f32();
      if (!(v > 0.0)) throw std::runtime_error("stats file has non-positive std");
    }
    return stats;
  } catch (const TruncatedInput& e) {
    throw std::runtime_error(std::string("truncated stats file: ") + e.what());
  }
}

void save_stats(const NormStats& stats, const std::filesystem::path& path) {
  atomic_write_file(path, encode_stats(stats));
}

NormStats load_stats(const std::filesystem::path& path) {
  try {
    return decode_stats(read_file(path));
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

}  // namespace fsegan::dsp
