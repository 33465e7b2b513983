#pragma once

#include <cstddef>
#include <filesystem>
#include <string>

#include "fsegan/dsp/audio.hpp"
#include "fsegan/dsp/features.hpp"

namespace fsegan::eval {

/// Log-spectral distance in dB between two single-channel, denormalized
/// (natural-log) spectrograms: mean over frames of the RMS over bins of
/// 10/ln(10) * (a - b).
double lsd(const dsp::LogMelSpectrogram& a, const dsp::LogMelSpectrogram& b);

inline constexpr double kSegSnrFloorDb = -10.0;
inline constexpr double kSegSnrCeilDb = 35.0;

/// Segmental SNR of mono `est` against mono `ref`. Frames whose reference
/// is all zero are skipped; each frame is clamped to [-10, 35] dB.
double seg_snr(const dsp::AudioClip& ref, const dsp::AudioClip& est, std::size_t frame = 512,
               std::size_t hop = 256);

/// 8-bit binary PGM: time runs left to right, bin 0 on the bottom row,
/// values min-max scaled per image (a constant image is mid gray, 128).
std::string encode_pgm(const dsp::LogMelSpectrogram& spec);
void spectrogram_image(const dsp::LogMelSpectrogram& spec, const std::filesystem::path& path);

/// Channel 0 = enhanced, channels 1-2 = the noisy channels.
dsp::LogMelSpectrogram hybrid_features(const dsp::LogMelSpectrogram& noisy, const dsp::LogMelSpectrogram& enhanced);
void hybrid_export(const dsp::LogMelSpectrogram& noisy, const dsp::LogMelSpectrogram& enhanced,
                   const std::filesystem::path& path);

}  // namespace fsegan::eval
