#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fsegan/ad/tensor.hpp"
#include "fsegan/common/rng.hpp"
#include "fsegan/dsp/audio.hpp"
#include "fsegan/dsp/features.hpp"

namespace fsegan::train {

/// Fixed-shape (noisy, clean) training windows stored back to back.
/// The leading axis of each example is time (frames or samples); `valid`
/// counts the rows before zero padding.
struct WindowCorpus {
  ad::Shape noisy_shape;
  ad::Shape clean_shape;
  std::vector<float> noisy;
  std::vector<float> clean;
  std::vector<std::size_t> valid;

  std::size_t size() const { return valid.size(); }
  bool empty() const { return valid.empty(); }
  std::size_t noisy_stride() const { return ad::shape_size(noisy_shape); }
  std::size_t clean_stride() const { return ad::shape_size(clean_shape); }

  void add(std::span<const float> noisy_window, std::span<const float> clean_window, std::size_t valid_rows);
};

/// Windows of normalized features. noisy and clean must pair up by frame
/// count; every window is `width` frames.
WindowCorpus windows_from_features(std::span<const dsp::LogMelSpectrogram> noisy,
                                   std::span<const dsp::LogMelSpectrogram> clean, std::size_t width,
                                   double overlap);

/// Waveform windows of `width` samples, same placement rule as features.
WindowCorpus windows_from_audio(std::span<const dsp::AudioClip> noisy, std::span<const dsp::AudioClip> clean,
                                std::size_t width, double overlap);

struct Batch {
  ad::Tensor<float> noisy;
  ad::Tensor<float> clean;
  std::vector<std::size_t> windows;
};

Batch gather_batch(const WindowCorpus& corpus, std::span<const std::size_t> windows);

/// One epoch: a shuffled permutation cut into full batches; the short tail
/// is dropped.
std::vector<std::vector<std::size_t>> make_batches(std::size_t n_windows, std::size_t batch_size, Rng& rng);

/// Endless epoch-by-epoch stream over make_batches.
class BatchStream {
 public:
  BatchStream(std::size_t n_windows, std::size_t batch_size, Rng rng);

  /// Window indices of the next batch.
  const std::vector<std::size_t>& next();
  std::size_t epoch() const { return epoch_; }
  /// Position of the last returned batch within its epoch.
  std::size_t batch_in_epoch() const { return cursor_ - 1; }

 private:
  std::size_t n_windows_, batch_size_;
  Rng rng_;
  std::vector<std::vector<std::size_t>> batches_;
  std::size_t cursor_ = 0;
  std::size_t epoch_ = 0;
};

}  // namespace fsegan::train
