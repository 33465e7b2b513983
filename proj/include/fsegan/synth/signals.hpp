#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "fsegan/common/rng.hpp"
#include "fsegan/dsp/audio.hpp"
#include "fsegan/synth/room.hpp"

namespace fsegan::synth {

/// Deterministic speech-like stand-in: a pitch-modulated harmonic source
/// through three time-varying formant resonators, gated into syllables with
/// pauses, plus a faint noise floor. Peak-normalized to 0.5.
dsp::AudioClip synth_clean_utterance(std::uint64_t seed, double duration_s);

enum class NoiseKind { kColored, kBursts, kHum, kBabble, kRecorded };

/// One entry of a noise bank: either a synthetic texture rendered on demand
/// or a recorded mono clip that is looped from a random offset.
struct NoiseSource {
  NoiseKind kind = NoiseKind::kColored;
  std::vector<float> recording;
};

using NoiseBank = std::vector<NoiseSource>;

/// The four synthetic textures.
NoiseBank default_noise_bank();

/// Appends channel 0 of each WAV file as a recorded source.
void add_recordings(NoiseBank& bank, std::span<const std::filesystem::path> wavs);

dsp::AudioClip render_noise(const NoiseSource& source, std::size_t length, Rng& rng);

/// Linear convolution of a mono clip with each RIR channel, trimmed to the
/// clip length.
dsp::AudioClip convolve_rir(const dsp::AudioClip& clip, const Rir& rir);

/// Full-length (N + K - 1) linear convolution, FFT based.
std::vector<double> convolve_full(std::span<const float> signal, std::span<const double> kernel);

/// Discrete SNR distribution; test draws are shifted by `test_offset_db`.
struct SnrSampler {
  std::vector<double> support_db{0, 5, 10, 15, 20, 25, 30};
  std::vector<double> weights{0.2, 0.2, 0.2, 0.15, 0.1, 0.1, 0.05};
  double test_offset_db = 0.2;

  double mean_db() const;
  void validate() const;
};

double sample_snr(const SnrSampler& sampler, Split split, Rng& rng);

/// RMS over all channels and samples.
double pooled_rms(const dsp::AudioClip& clip);

/// Gain applied to `noise` so that speech/noise power matches `snr_db`.
double snr_gain(const dsp::AudioClip& speech, const dsp::AudioClip& noise, double snr_db);

/// speech + g * noise, g = (rms(speech) / rms(noise)) * 10^(-snr_db / 20).
dsp::AudioClip mix_at_snr(const dsp::AudioClip& speech, const dsp::AudioClip& noise, double snr_db);

}  // namespace fsegan::synth
