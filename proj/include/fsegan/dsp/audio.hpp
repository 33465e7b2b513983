#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fsegan::dsp {

inline constexpr int kDefaultSampleRate = 16000;

/// Multi-channel PCM waveform. Amplitudes are nominally in [-1, 1].
struct AudioClip {
  std::vector<std::vector<float>> channels;
  int sample_rate = kDefaultSampleRate;

  static AudioClip mono(std::vector<float> samples, int sample_rate = kDefaultSampleRate);
  static AudioClip silent(std::size_t n_channels, std::size_t length,
                          int sample_rate = kDefaultSampleRate);

  std::size_t n_channels() const { return channels.size(); }
  std::size_t length() const { return channels.empty() ? 0 : channels.front().size(); }
  double duration_s() const { return static_cast<double>(length()) / sample_rate; }

  std::span<const float> channel(std::size_t c) const { return channels.at(c); }
  std::span<float> channel(std::size_t c) { return channels.at(c); }

  /// Throws std::invalid_argument when channel lengths differ, the sample
  /// rate is not positive, or a sample is not finite.
  void validate() const;
};

/// Reads a RIFF/WAVE file holding 16-bit PCM at 16 kHz with one or two
/// channels. Samples are scaled by 1/32768.
AudioClip load_wav(const std::filesystem::path& path);

/// Parses WAV bytes already in memory; same contract as load_wav.
AudioClip parse_wav(std::string_view bytes);

/// Quantizes to 16-bit PCM (round to nearest, clamped to [-32768, 32767]).
void save_wav(const AudioClip& clip, const std::filesystem::path& path);

std::string encode_wav(const AudioClip& clip);

std::int16_t quantize_pcm16(float amplitude);

}  // namespace fsegan::dsp
