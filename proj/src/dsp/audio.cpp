#include "fsegan/dsp/audio.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "fsegan/common/binary_io.hpp"

namespace fsegan::dsp {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

[[noreturn]] void reject(const std::string& reason) {
  throw std::runtime_error("invalid wav: " + reason);
}

}  // namespace

AudioClip AudioClip::mono(std::vector<float> samples, int sample_rate) {
  AudioClip clip;
  clip.channels.push_back(std::move(samples));
  clip.sample_rate = sample_rate;
  return clip;
}

AudioClip AudioClip::silent(std::size_t n_channels, std::size_t length, int sample_rate) {
  AudioClip clip;
  clip.channels.assign(n_channels, std::vector<float>(length, 0.0f));
  clip.sample_rate = sample_rate;
  return clip;
}

void AudioClip::validate() const {
  if (sample_rate <= 0) throw std::invalid_argument("sample rate must be positive");
  if (channels.empty()) throw std::invalid_argument("clip has no channels");
  for (const auto& ch : channels) {
    if (ch.size() != channels.front().size()) {
      throw std::invalid_argument("clip channels have different lengths");
    }
    for (float v : ch) {
      if (!std::isfinite(v)) throw std::invalid_argument("clip contains non-finite samples");
    }
  }
}

AudioClip parse_wav(std::string_view bytes) {
  ByteReader in(bytes);
  try {
    if (in.bytes(4) != "RIFF") reject("missing RIFF header");
    in.u32();  // riff size; trust chunk sizes instead
    if (in.bytes(4) != "WAVE") reject("missing WAVE tag");

    bool have_fmt = false;
    std::uint16_t n_channels = 0;
    std::uint32_t rate = 0;
    std::uint16_t bits = 0;
    while (in.remaining() >= 8) {
      const std::string_view id = in.bytes(4);
      const std::uint32_t size = in.u32();
      if (id == "fmt ") {
        if (size < 16) reject("fmt chunk too small");
        const std::size_t start = in.position();
        std::uint16_t format = in.u16();
        n_channels = in.u16();
        rate = in.u32();
        in.u32();  // byte rate
        in.u16();  // block align
        bits = in.u16();
        if (format == kFormatExtensible && size >= 40) {
          in.u16();  // cb size
          in.u16();  // valid bits
          in.u32();  // channel mask
          format = in.u16();  // first two bytes of the subformat GUID
        }
        if (format != kFormatPcm) reject("unsupported encoding (only PCM)");
        in.seek(start + size + (size & 1u));
        have_fmt = true;
      } else if (id == "data") {
        if (!have_fmt) reject("data chunk before fmt chunk");
        if (bits != 16) reject("unsupported bit depth " + std::to_string(bits));
        if (rate != static_cast<std::uint32_t>(kDefaultSampleRate)) {
          reject("unsupported sample rate " + std::to_string(rate));
        }
        if (n_channels < 1 || n_channels > 2) {
          reject("unsupported channel count " + std::to_string(n_channels));
        }
        const std::size_t frames = size / (2u * n_channels);
        AudioClip clip = AudioClip::silent(n_channels, frames, static_cast<int>(rate));
        for (std::size_t i = 0; i < frames; ++i) {
          for (std::size_t c = 0; c < n_channels; ++c) {
            clip.channels[c][i] = static_cast<float>(in.i16()) / 32768.0f;
          }
        }
        return clip;
      } else {
        in.seek(in.position() + size + (size & 1u));
      }
    }
  } catch (const TruncatedInput& e) {
    reject(std::string("truncated file: ") + e.what());
  }
  reject("no data chunk");
}

AudioClip load_wav(const std::filesystem::path& path) {
  try {
    return parse_wav(read_file(path));
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

std::int16_t quantize_pcm16(float amplitude) {
  const double scaled = std::round(static_cast<double>(amplitude) * 32768.0);
  if (scaled > 32767.0) return 32767;
  if (scaled < -32768.0) return -32768;
  return static_cast<std::int16_t>(scaled);
}

std::string encode_wav(const AudioClip& clip) {
  clip.validate();
  const auto n_channels = static_cast<std::uint16_t>(clip.n_channels());
  const auto data_bytes = static_cast<std::uint32_t>(clip.length() * n_channels * 2);
  ByteWriter out;
  out.bytes("RIFF");
  out.u32(36 + data_bytes);
  out.bytes("WAVE");
  out.bytes("fmt ");
  out.u32(16);
  out.u16(kFormatPcm);
  out.u16(n_channels);
  out.u32(static_cast<std::uint32_t>(clip.sample_rate));
  out.u32(static_cast<std::uint32_t>(clip.sample_rate) * n_channels * 2);
  out.u16(static_cast<std::uint16_t>(n_channels * 2));
  out.u16(16);
  out.bytes("data");
  out.u32(data_bytes);
  for (std::size_t i = 0; i < clip.length(); ++i) {
    for (std::size_t c = 0; c < n_channels; ++c) out.i16(quantize_pcm16(clip.channels[c][i]));
  }
  return out.release();
}

void save_wav(const AudioClip& clip, const std::filesystem::path& path) {
  atomic_write_file(path, encode_wav(clip));
}

}  // namespace fsegan::dsp
