#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "fsegan/dsp/audio.hpp"

namespace fsegan::dsp {

/// Row-major 2-D array of doubles.
struct Grid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Grid() = default;
  Grid(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), values(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {values.data() + r * cols, cols}; }
  std::span<double> row(std::size_t r) { return {values.data() + r * cols, cols}; }
};

enum class WindowFn { kHannPeriodic, kRectangular };

struct StftConfig {
  std::size_t window_len = 512;  // 32 ms at 16 kHz
  std::size_t hop = 160;         // 10 ms
  std::size_t fft_size = 512;
  WindowFn window = WindowFn::kHannPeriodic;

  std::size_t n_bins() const { return fft_size / 2 + 1; }
  void validate() const;
};

/// In-place iterative radix-2 FFT. `data.size()` must be a power of two.
void fft_inplace(std::span<std::complex<double>> data);

std::vector<double> make_window(WindowFn fn, std::size_t length);

std::size_t stft_frame_count(std::size_t n_samples, const StftConfig& cfg);

/// Magnitude STFT of each channel: result[c] is n_frames x n_bins.
std::vector<Grid> stft_magnitude(const AudioClip& clip, const StftConfig& cfg = {});

/// HTK Mel scale.
double hz_to_mel(double hz);
double mel_to_hz(double mel);

struct MelConfig {
  std::size_t n_filters = 128;
  double f_min = 125.0;
  double f_max = 7500.0;
  int sample_rate = kDefaultSampleRate;
};

/// Triangular filters on Mel-spaced breakpoints.
///
/// Filter i rises from breakpoint i to i+1 and falls to breakpoint i+2,
/// evaluated at FFT bin centre frequencies. A filter narrower than the bin
/// spacing that would otherwise catch no bin gets unit weight on the bin
/// nearest its centre, so every row has exactly one maximum.
struct MelFilterBank {
  MelConfig config;
  std::vector<double> breakpoints_hz;  // n_filters + 2 entries
  Grid weights;                        // n_filters x n_fft_bins

  std::size_t n_filters() const { return weights.rows; }
  std::size_t n_fft_bins() const { return weights.cols; }
};

MelFilterBank build_mel_filterbank(const MelConfig& mel, const StftConfig& stft = {});

}  // namespace fsegan::dsp
