#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fsegan/dsp/audio.hpp"
#include "fsegan/dsp/features.hpp"
#include "fsegan/models/params.hpp"
#include "fsegan/synth/corpus.hpp"

namespace fsegan::eval {

/// Runs an FSEGAN generator over normalized noisy features in
/// non-overlapping windows and stitches the result. Output is normalized,
/// single channel, with the input's frame count.
dsp::LogMelSpectrogram enhance_features(const models::ModelParams<float>& g, const dsp::LogMelSpectrogram& noisy);

/// SEGAN counterpart on waveforms; output is mono with the input's length.
dsp::AudioClip enhance_waveform(const models::ModelParams<float>& g, const dsp::AudioClip& noisy);

struct UtteranceMetrics {
  std::uint64_t index = 0;
  double lsd_db = 0.0;
  double l1 = 0.0;
  std::optional<double> seg_snr_db;
  double baseline_lsd_db = 0.0;
};

struct MetricReport {
  std::string system;  // "none" or the checkpoint tag
  std::vector<UtteranceMetrics> rows;
  std::vector<std::string> missing;

  double mean_lsd_db() const;
  double mean_l1() const;
  std::optional<double> mean_seg_snr_db() const;
  double mean_baseline_lsd_db() const;
  /// Baseline (noisy vs clean) LSD minus system LSD; positive is better.
  double improvement_db() const { return mean_baseline_lsd_db() - mean_lsd_db(); }
};

struct EvalSetup {
  dsp::FrontEnd front_end;
  dsp::NormStats stats;
  /// Generator; empty scores the unenhanced noisy input.
  std::optional<models::ModelParams<float>> generator;
};

/// Scores every manifest entry whose files exist; missing files are listed
/// and skipped. Rows follow manifest order.
MetricReport evaluate_corpus(const EvalSetup& setup, const std::vector<synth::ManifestEntry>& entries,
                             const std::filesystem::path& base_dir);

/// Scores one in-memory pair. Noisy channel 0 is the baseline.
UtteranceMetrics evaluate_pair(const EvalSetup& setup, const dsp::AudioClip& noisy, const dsp::AudioClip& clean,
                               std::uint64_t index = 0);

/// Tab-separated table "index lsd_db l1 seg_snr_db" plus '#' summary lines.
std::string format_report(const MetricReport& report);

}  // namespace fsegan::eval
