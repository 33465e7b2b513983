#include "fsegan/train/data.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace fsegan::train {

void WindowCorpus::add(std::span<const float> noisy_window, std::span<const float> clean_window,
                       std::size_t valid_rows) {
  if (noisy_window.size() != noisy_stride() || clean_window.size() != clean_stride()) {
    throw std::invalid_argument("window does not match corpus shapes " + ad::shape_string(noisy_shape) + " / " +
                                ad::shape_string(clean_shape));
  }
  noisy.insert(noisy.end(), noisy_window.begin(), noisy_window.end());
  clean.insert(clean.end(), clean_window.begin(), clean_window.end());
  valid.push_back(valid_rows);
}

WindowCorpus windows_from_features(std::span<const dsp::LogMelSpectrogram> noisy,
                                   std::span<const dsp::LogMelSpectrogram> clean, std::size_t width,
                                   double overlap) {
  if (noisy.size() != clean.size()) throw std::invalid_argument("noisy and clean feature counts differ");
  if (noisy.empty()) throw std::invalid_argument("no features to window");
  WindowCorpus corpus;
  const std::size_t bins = noisy[0].n_bins;
  corpus.noisy_shape = {width, bins, noisy[0].n_channels};
  corpus.clean_shape = {width, bins, 1};
  std::vector<float> nbuf, cbuf;
  for (std::size_t u = 0; u < noisy.size(); ++u) {
    const auto& n = noisy[u];
    const auto& c = clean[u];
    if (n.n_frames != c.n_frames || n.n_bins != bins || c.n_bins != bins || c.n_channels != 1 ||
        n.n_channels != corpus.noisy_shape[2]) {
      throw std::invalid_argument("feature pair " + std::to_string(u) + " has inconsistent shape");
    }
    const auto nw = dsp::frame_windows(n, width, overlap);
    const auto cw = dsp::frame_windows(c, width, overlap);
    for (std::size_t w = 0; w < nw.patches.size(); ++w) {
      nbuf.assign(nw.patches[w].values.begin(), nw.patches[w].values.end());
      cbuf.assign(cw.patches[w].values.begin(), cw.patches[w].values.end());
      corpus.add(nbuf, cbuf, nw.placement[w].valid);
    }
  }
  return corpus;
}

WindowCorpus windows_from_audio(std::span<const dsp::AudioClip> noisy, std::span<const dsp::AudioClip> clean,
                                std::size_t width, double overlap) {
  if (noisy.size() != clean.size()) throw std::invalid_argument("noisy and clean clip counts differ");
  if (noisy.empty()) throw std::invalid_argument("no clips to window");
  WindowCorpus corpus;
  const std::size_t channels = noisy[0].n_channels();
  corpus.noisy_shape = {width, channels};
  corpus.clean_shape = {width, 1};
  std::vector<float> nbuf(width * channels), cbuf(width);
  for (std::size_t u = 0; u < noisy.size(); ++u) {
    const auto& n = noisy[u];
    const auto& c = clean[u];
    if (n.n_channels() != channels || c.n_channels() != 1 || n.length() != c.length()) {
      throw std::invalid_argument("clip pair " + std::to_string(u) + " has inconsistent shape");
    }
    for (const auto& [start, valid] : dsp::window_placements(n.length(), width, overlap)) {
      std::fill(nbuf.begin(), nbuf.end(), 0.0f);
      std::fill(cbuf.begin(), cbuf.end(), 0.0f);
      for (std::size_t t = 0; t < valid; ++t) {
        for (std::size_t ch = 0; ch < channels; ++ch) nbuf[t * channels + ch] = n.channels[ch][start + t];
        cbuf[t] = c.channels[0][start + t];
      }
      corpus.add(nbuf, cbuf, valid);
    }
  }
  return corpus;
}

Batch gather_batch(const WindowCorpus& corpus, std::span<const std::size_t> windows) {
  const std::size_t ns = corpus.noisy_stride(), cs = corpus.clean_stride();
  std::vector<float> noisy(windows.size() * ns), clean(windows.size() * cs);
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const std::size_t w = windows[i];
    if (w >= corpus.size()) throw std::out_of_range("window index out of range");
    std::copy_n(corpus.noisy.begin() + static_cast<std::ptrdiff_t>(w * ns), ns, noisy.begin() + i * ns);
    std::copy_n(corpus.clean.begin() + static_cast<std::ptrdiff_t>(w * cs), cs, clean.begin() + i * cs);
  }
  ad::Shape nshape{windows.size()}, cshape{windows.size()};
  nshape.insert(nshape.end(), corpus.noisy_shape.begin(), corpus.noisy_shape.end());
  cshape.insert(cshape.end(), corpus.clean_shape.begin(), corpus.clean_shape.end());
  Batch b;
  b.noisy = ad::Tensor<float>::from(std::move(nshape), std::move(noisy));
  b.clean = ad::Tensor<float>::from(std::move(cshape), std::move(clean));
  b.windows.assign(windows.begin(), windows.end());
  return b;
}

std::vector<std::vector<std::size_t>> make_batches(std::size_t n_windows, std::size_t batch_size, Rng& rng) {
  if (n_windows == 0) throw std::invalid_argument("cannot batch an empty corpus");
  if (batch_size == 0) throw std::invalid_argument("batch size must be positive");
  if (n_windows < batch_size) {
    throw std::invalid_argument("corpus has " + std::to_string(n_windows) + " windows, fewer than one batch of " +
                                std::to_string(batch_size));
  }
  std::vector<std::size_t> order(n_windows);
  for (std::size_t i = 0; i < n_windows; ++i) order[i] = i;
  for (std::size_t i = n_windows - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t b = 0; b + batch_size <= n_windows; b += batch_size) {
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(b),
                         order.begin() + static_cast<std::ptrdiff_t>(b + batch_size));
  }
  return batches;
}

BatchStream::BatchStream(std::size_t n_windows, std::size_t batch_size, Rng rng)
    : n_windows_(n_windows), batch_size_(batch_size), rng_(std::move(rng)) {
  batches_ = make_batches(n_windows_, batch_size_, rng_);
}

const std::vector<std::size_t>& BatchStream::next() {
  if (cursor_ == batches_.size()) {
    batches_ = make_batches(n_windows_, batch_size_, rng_);
    cursor_ = 0;
    ++epoch_;
  }
  return batches_[cursor_++];
}

}  // namespace fsegan::train
