#include "fsegan/eval/evaluate.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "fsegan/eval/metrics.hpp"
#include "fsegan/models/networks.hpp"

namespace fsegan::eval {

namespace {

constexpr std::size_t kWindowsPerForward = 16;

void require_generator(const models::ModelParams<float>& g, models::ModelKind kind) {
  if (g.config.role != models::Role::kGenerator) {
    throw std::invalid_argument("enhancement needs a generator checkpoint, got " + g.config.tag());
  }
  if (g.config.kind != kind) {
    throw std::invalid_argument(kind == models::ModelKind::kFsegan
                                    ? "domain mismatch: waveform (segan) checkpoint fed spectral features"
                                    : "domain mismatch: spectral (fsegan) checkpoint fed a waveform");
  }
}

double mean_abs_diff(const dsp::LogMelSpectrogram& a, const dsp::LogMelSpectrogram& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) sum += std::abs(a.values[i] - b.values[i]);
  return sum / static_cast<double>(a.values.size());
}

dsp::AudioClip first_channel(const dsp::AudioClip& clip) {
  return dsp::AudioClip::mono(clip.channels.at(0), clip.sample_rate);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

dsp::LogMelSpectrogram enhance_features(const models::ModelParams<float>& g, const dsp::LogMelSpectrogram& noisy) {
  require_generator(g, models::ModelKind::kFsegan);
  const auto& c = g.config;
  if (!noisy.normalized) throw std::invalid_argument("enhance_features expects normalized features");
  if (noisy.n_channels != static_cast<std::size_t>(c.input_channels) ||
      noisy.n_bins != static_cast<std::size_t>(c.patch_bins)) {
    throw std::invalid_argument("features are " + std::to_string(noisy.n_bins) + " bins x " +
                                std::to_string(noisy.n_channels) + " channels, checkpoint expects " +
                                std::to_string(c.patch_bins) + " x " + std::to_string(c.input_channels));
  }
  const auto width = static_cast<std::size_t>(c.patch_frames);
  const auto windows = dsp::frame_windows(noisy, width, 0.0);
  const std::size_t in_stride = width * noisy.n_bins * noisy.n_channels;
  const std::size_t out_stride = width * noisy.n_bins;
  std::vector<dsp::LogMelSpectrogram> patches;
  ad::NoGradGuard no_grad;
  for (std::size_t b = 0; b < windows.patches.size(); b += kWindowsPerForward) {
    const std::size_t n = std::min(kWindowsPerForward, windows.patches.size() - b);
    std::vector<float> input(n * in_stride);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& v = windows.patches[b + i].values;
      std::copy(v.begin(), v.end(), input.begin() + static_cast<std::ptrdiff_t>(i * in_stride));
    }
    const auto x = ad::Tensor<float>::from({n, width, noisy.n_bins, noisy.n_channels}, std::move(input));
    const auto y = models::fsegan_generator(g, x);
    const auto out = y.data();
    for (std::size_t i = 0; i < n; ++i) {
      dsp::LogMelSpectrogram patch(width, noisy.n_bins, 1);
      patch.normalized = true;
      patch.frame_hop_s = noisy.frame_hop_s;
      std::copy(out.begin() + static_cast<std::ptrdiff_t>(i * out_stride),
                out.begin() + static_cast<std::ptrdiff_t>((i + 1) * out_stride), patch.values.begin());
      patches.push_back(std::move(patch));
    }
  }
  return dsp::reassemble(patches, windows.placement, noisy.n_frames);
}

dsp::AudioClip enhance_waveform(const models::ModelParams<float>& g, const dsp::AudioClip& noisy) {
  require_generator(g, models::ModelKind::kSegan);
  const auto& c = g.config;
  if (noisy.n_channels() != static_cast<std::size_t>(c.input_channels)) {
    throw std::invalid_argument("clip has " + std::to_string(noisy.n_channels()) + " channels, checkpoint expects " +
                                std::to_string(c.input_channels));
  }
  const auto width = static_cast<std::size_t>(c.window_samples);
  const std::size_t channels = noisy.n_channels();
  std::vector<float> out(noisy.length(), 0.0f);
  ad::NoGradGuard no_grad;
  for (const auto& [start, valid] : dsp::window_placements(noisy.length(), width, 0.0)) {
    std::vector<float> input(width * channels, 0.0f);
    for (std::size_t t = 0; t < valid; ++t) {
      for (std::size_t ch = 0; ch < channels; ++ch) input[t * channels + ch] = noisy.channels[ch][start + t];
    }
    const auto y = models::segan_generator(g, ad::Tensor<float>::from({1, width, channels}, std::move(input)));
    std::copy_n(y.data().begin(), valid, out.begin() + static_cast<std::ptrdiff_t>(start));
  }
  return dsp::AudioClip::mono(std::move(out), noisy.sample_rate);
}

UtteranceMetrics evaluate_pair(const EvalSetup& setup, const dsp::AudioClip& noisy, const dsp::AudioClip& clean,
                               std::uint64_t index) {
  if (clean.n_channels() != 1) throw std::invalid_argument("clean reference must be mono");
  const auto noisy_raw = setup.front_end(noisy);
  const auto clean_raw = setup.front_end(clean);
  const auto noisy_norm = dsp::normalize(noisy_raw, setup.stats);
  const auto clean_norm = dsp::normalize(clean_raw, setup.stats);

  UtteranceMetrics m;
  m.index = index;
  m.baseline_lsd_db = lsd(noisy_raw.channel(0), clean_raw);
  if (!setup.generator) {
    m.lsd_db = m.baseline_lsd_db;
    m.l1 = mean_abs_diff(noisy_norm.channel(0), clean_norm);
    m.seg_snr_db = seg_snr(clean, first_channel(noisy));
    return m;
  }
  const auto& g = *setup.generator;
  if (g.config.kind == models::ModelKind::kFsegan) {
    const auto enhanced = enhance_features(g, noisy_norm);
    m.lsd_db = lsd(dsp::denormalize(enhanced, setup.stats), clean_raw);
    m.l1 = mean_abs_diff(enhanced, clean_norm);
  } else {
    const auto wave = enhance_waveform(g, noisy);
    const auto feats = setup.front_end(wave);
    m.lsd_db = lsd(feats, clean_raw);
    m.l1 = mean_abs_diff(dsp::normalize(feats, setup.stats), clean_norm);
    m.seg_snr_db = seg_snr(clean, wave);
  }
  return m;
}

MetricReport evaluate_corpus(const EvalSetup& setup, const std::vector<synth::ManifestEntry>& entries,
                             const std::filesystem::path& base_dir) {
  MetricReport report;
  report.system = setup.generator ? setup.generator->config.tag() : "none";
  for (const auto& e : entries) {
    const auto noisy_path = base_dir / e.noisy;
    const auto clean_path = base_dir / e.clean;
    bool missing = false;
    for (const auto& p : {noisy_path, clean_path}) {
      if (!std::filesystem::exists(p)) {
        report.missing.push_back(p.string());
        missing = true;
      }
    }
    if (missing) continue;
    report.rows.push_back(evaluate_pair(setup, dsp::load_wav(noisy_path), dsp::load_wav(clean_path), e.index));
  }
  return report;
}

double MetricReport::mean_lsd_db() const {
  if (rows.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : rows) s += r.lsd_db;
  return s / static_cast<double>(rows.size());
}

double MetricReport::mean_l1() const {
  if (rows.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : rows) s += r.l1;
  return s / static_cast<double>(rows.size());
}

std::optional<double> MetricReport::mean_seg_snr_db() const {
  double s = 0.0;
  std::size_t n = 0;
  for (const auto& r : rows) {
    if (r.seg_snr_db) {
      s += *r.seg_snr_db;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return s / static_cast<double>(n);
}

double MetricReport::mean_baseline_lsd_db() const {
  if (rows.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : rows) s += r.baseline_lsd_db;
  return s / static_cast<double>(rows.size());
}

std::string format_report(const MetricReport& report) {
  std::string out = "# system: " + report.system + "\n";
  out += "# metrics are proxies: log-spectral distance and normalized L1, not recognizer WER\n";
  out += "index\tlsd_db\tl1\tseg_snr_db\n";
  for (const auto& r : report.rows) {
    out += std::to_string(r.index) + "\t" + fmt(r.lsd_db) + "\t" + fmt(r.l1) + "\t" +
           (r.seg_snr_db ? fmt(*r.seg_snr_db) : std::string("-")) + "\n";
  }
  const auto snr = report.mean_seg_snr_db();
  out += "# utterances: " + std::to_string(report.rows.size()) + "\n";
  out += "# missing: " + std::to_string(report.missing.size()) + "\n";
  for (const auto& m : report.missing) out += "#   " + m + "\n";
  out += "# mean_lsd_db: " + fmt(report.mean_lsd_db()) + "\n";
  out += "# mean_l1: " + fmt(report.mean_l1()) + "\n";
  out += "# mean_seg_snr_db: " + (snr ? fmt(*snr) : std::string("-")) + "\n";
  out += "# baseline_lsd_db: " + fmt(report.mean_baseline_lsd_db()) + "\n";
  out += "# improvement_db: " + fmt(report.improvement_db()) + "\n";
  return out;
}

}  // namespace fsegan::eval
