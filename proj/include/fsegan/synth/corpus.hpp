#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fsegan/dsp/audio.hpp"
#include "fsegan/synth/room.hpp"
#include "fsegan/synth/signals.hpp"

namespace fsegan::synth {

/// Matched pair: reverberant stereo mixture and the dry mono source.
struct UtterancePair {
  dsp::AudioClip noisy;
  dsp::AudioClip clean;
  double snr_db = 0.0;
  int room_id = 0;
  std::uint64_t seed = 0;
};

struct PairOptions {
  double min_duration_s = 1.5;
  double max_duration_s = 3.0;
  int max_order = 30;
  SnrSampler snr;
  std::optional<double> snr_override_db;
};

/// Reverberant speech and scaled reverberant noise exactly as summed into
/// the noisy mixture.
struct PairComponents {
  dsp::AudioClip speech;
  dsp::AudioClip noise;
};

/// Deterministic in (master_seed, index, split, noise bank, options).
///
/// Speech and noise are convolved with responses from two distinct source
/// positions in one room, the reverberant speech is rescaled to the dry
/// signal's RMS, and the direct-path delay is removed so the pair is time
/// aligned. If the mixture would clip, noisy and clean are scaled together.
/// Train rows seed from hash(master, index); test rows use a salted master.
UtterancePair build_pair(std::uint64_t master_seed, std::uint64_t index, Split split,
                         const NoiseBank& noise_bank, const PairOptions& options = {},
                         PairComponents* components = nullptr);

struct ManifestEntry {
  std::uint64_t index = 0;
  Split split = Split::kTrain;
  std::uint64_t seed = 0;
  double snr_db = 0.0;
  int room_id = 0;
  std::string noisy;  // paths relative to the manifest's directory
  std::string clean;
};

std::string format_manifest(const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> parse_manifest(const std::string& text);
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path);

}  // namespace fsegan::synth
