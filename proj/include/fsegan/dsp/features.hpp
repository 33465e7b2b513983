#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fsegan/dsp/spectral.hpp"

namespace fsegan::dsp {

inline constexpr double kLogFloor = 1e-8;
inline constexpr double kStdFloor = 1e-5;

/// Log-Mel features laid out frame-major: values[(frame * n_bins + bin) * n_channels + ch].
struct LogMelSpectrogram {
  std::size_t n_frames = 0;
  std::size_t n_bins = 0;
  std::size_t n_channels = 0;
  bool normalized = false;
  double frame_hop_s = 0.01;
  std::vector<double> values;

  LogMelSpectrogram() = default;
  LogMelSpectrogram(std::size_t frames, std::size_t bins, std::size_t channels, double fill = 0.0)
      : n_frames(frames), n_bins(bins), n_channels(channels), values(frames * bins * channels, fill) {}

  std::size_t index(std::size_t frame, std::size_t bin, std::size_t ch) const {
    return (frame * n_bins + bin) * n_channels + ch;
  }
  double& at(std::size_t frame, std::size_t bin, std::size_t ch) { return values[index(frame, bin, ch)]; }
  double at(std::size_t frame, std::size_t bin, std::size_t ch) const {
    return values[index(frame, bin, ch)];
  }

  /// Copy of one channel as a single-channel spectrogram.
  LogMelSpectrogram channel(std::size_t ch) const;

  void validate() const;
};

/// Stacks channels of `parts` in order; frame and bin counts must agree.
LogMelSpectrogram stack_channels(std::span<const LogMelSpectrogram> parts);

/// ln(max(filterbank . magnitude_frame, floor)) for each frame and channel.
LogMelSpectrogram log_mel(std::span<const Grid> magnitudes, const MelFilterBank& fb,
                          double floor = kLogFloor);

/// STFT, filterbank and log in one call.
struct FrontEnd {
  StftConfig stft;
  MelConfig mel;

  LogMelSpectrogram operator()(const AudioClip& clip) const;
  MelFilterBank filterbank() const { return build_mel_filterbank(mel, stft); }
};

/// Per-bin statistics shared across channels.
struct NormStats {
  std::vector<double> mean;
  std::vector<double> std;

  std::size_t n_bins() const { return mean.size(); }
};

/// Pooled over every frame and channel of every spectrogram. Values are
/// rounded to float so they survive the stats file unchanged.
NormStats fit_norm_stats(std::span<const LogMelSpectrogram> corpus);

LogMelSpectrogram normalize(const LogMelSpectrogram& spec, const NormStats& stats);
LogMelSpectrogram denormalize(const LogMelSpectrogram& spec, const NormStats& stats);

struct WindowPlacement {
  std::size_t start = 0;
  std::size_t valid = 0;  // frames before zero padding
};

struct FeatureWindows {
  std::vector<LogMelSpectrogram> patches;
  std::vector<WindowPlacement> placement;
  std::size_t width = 0;
};

/// Window starts with stride width * (1 - overlap), rounded. The last window
/// is the first one reaching the end of the sequence.
std::vector<WindowPlacement> window_placements(std::size_t n_frames, std::size_t width, double overlap_frac);

/// Cuts `spec` into `width`-frame windows with stride width * (1 - overlap).
/// A window that would run past the end is zero-padded and flagged with its
/// valid length.
FeatureWindows frame_windows(const LogMelSpectrogram& spec, std::size_t width, double overlap_frac);

/// Inverse of frame_windows for non-overlapping placements.
LogMelSpectrogram reassemble(std::span<const LogMelSpectrogram> patches,
                             std::span<const WindowPlacement> placement, std::size_t total_frames);

// File formats. Both are little-endian with f32 payloads.
std::string encode_features(const LogMelSpectrogram& spec);
LogMelSpectrogram decode_features(std::string_view bytes);
void save_features(const LogMelSpectrogram& spec, const std::filesystem::path& path);
LogMelSpectrogram load_features(const std::filesystem::path& path);

std::string encode_stats(const NormStats& stats);
NormStats decode_stats(std::string_view bytes);
void save_stats(const NormStats& stats, const std::filesystem::path& path);
NormStats load_stats(const std::filesystem::path& path);

}  // namespace fsegan::dsp
