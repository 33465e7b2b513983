#include "fsegan/synth/signals.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include "fsegan/dsp/spectral.hpp"

namespace fsegan::synth {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kFs = dsp::kDefaultSampleRate;

struct Vowel {
  double f1, f2, f3;
};

constexpr std::array<Vowel, 6> kVowels{{
    {730, 1090, 2440},  // a
    {530, 1840, 2480},  // e
    {270, 2290, 3010},  // i
    {570, 840, 2410},   // o
    {300, 870, 2240},   // u
    {490, 1350, 1690},  // er
}};

/// Two-pole resonator with per-sample centre frequency, unity gain at DC.
class Resonator {
 public:
  explicit Resonator(double bandwidth_hz) : r_(std::exp(-std::numbers::pi * bandwidth_hz / kFs)) {}

  double operator()(double x, double centre_hz) {
    const double c = 2.0 * r_ * std::cos(kTwoPi * centre_hz / kFs);
    const double gain = 1.0 - c + r_ * r_;
    const double y = gain * x + c * y1_ - r_ * r_ * y2_;
    y2_ = y1_;
    y1_ = y;
    return y;
  }

 private:
  double r_;
  double y1_ = 0.0;
  double y2_ = 0.0;
};

void normalize_peak(std::vector<float>& x, double peak) {
  double m = 0.0;
  for (float v : x) m = std::max(m, static_cast<double>(std::abs(v)));
  if (m <= 0.0) return;
  const double g = peak / m;
  for (auto& v : x) v = static_cast<float>(v * g);
}

void normalize_rms(std::vector<double>& x, double target) {
  double e = 0.0;
  for (double v : x) e += v * v;
  if (e <= 0.0) return;
  const double g = target / std::sqrt(e / static_cast<double>(x.size()));
  for (auto& v : x) v *= g;
}

std::vector<double> colored_noise(std::size_t n, Rng& rng) {
  const double cutoff = rng.uniform(300.0, 3000.0);
  const double a = std::exp(-kTwoPi * cutoff / kFs);
  const double white_mix = rng.uniform(0.05, 0.3);
  std::vector<double> out(n);
  double lp = 0.0;
  for (auto& v : out) {
    const double w = rng.normal();
    lp = (1.0 - a) * w + a * lp;
    v = lp + white_mix * w;
  }
  return out;
}

std::vector<double> burst_noise(std::size_t n, Rng& rng) {
  std::vector<double> base = colored_noise(n, rng);
  std::vector<double> out(n, 0.0);
  std::size_t pos = static_cast<std::size_t>(rng.uniform(0.0, 0.2) * kFs);
  while (pos < n) {
    const auto len = static_cast<std::size_t>(rng.uniform(0.05, 0.3) * kFs);
    const double level = rng.uniform(0.3, 1.0);
    for (std::size_t i = 0; i < len && pos + i < n; ++i) {
      const double env = std::sin(std::numbers::pi * static_cast<double>(i) / static_cast<double>(len));
      out[pos + i] = base[pos + i] * level * env;
    }
    pos += len + static_cast<std::size_t>(rng.uniform(0.05, 0.4) * kFs);
  }
  // Low background so the texture is never silent.
  for (std::size_t i = 0; i < n; ++i) out[i] += 0.05 * base[i];
  return out;
}

std::vector<double> hum_noise(std::size_t n, Rng& rng) {
  const double f0 = rng.uniform() < 0.5 ? 50.0 : 60.0;
  std::array<double, 10> amp{};
  std::array<double, 10> phase{};
  for (std::size_t h = 0; h < amp.size(); ++h) {
    amp[h] = rng.uniform(0.2, 1.0) / static_cast<double>(h + 1);
    phase[h] = rng.uniform(0.0, kTwoPi);
  }
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / kFs;
    double v = 0.0;
    for (std::size_t h = 0; h < amp.size(); ++h) v += amp[h] * std::sin(kTwoPi * f0 * (h + 1) * t + phase[h]);
    out[i] = v + 0.02 * rng.normal();
  }
  return out;
}

std::vector<double> babble_noise(std::size_t n, Rng& rng) {
  std::vector<double> out(n, 0.0);
  const double dur = std::clamp(static_cast<double>(n) / kFs, 1.0, 10.0);
  for (int talker = 0; talker < 4; ++talker) {
    const auto clip = synth_clean_utterance(rng.next_u64(), dur);
    const auto& x = clip.channels[0];
    const std::size_t offset = rng.below(x.size());
    for (std::size_t i = 0; i < n; ++i) out[i] += x[(offset + i) % x.size()];
  }
  return out;
}

}  // namespace

dsp::AudioClip synth_clean_utterance(std::uint64_t seed, double duration_s) {
  if (!(duration_s >= 1.0 && duration_s <= 10.0)) {
    throw std::invalid_argument("utterance duration must lie in [1, 10] s");
  }
  Rng rng(hash_seed(seed, 0x5EEC));
  const auto n = static_cast<std::size_t>(std::lround(duration_s * kFs));

  // Syllable plan: (start, length, vowel, voiced) with pauses in between.
  struct Syllable {
    std::size_t start, length;
    Vowel vowel;
    bool fricative;
  };
  std::vector<Syllable> plan;
  std::size_t pos = static_cast<std::size_t>(rng.uniform(0.02, 0.15) * kFs);
  while (pos < n) {
    const auto len = static_cast<std::size_t>(rng.uniform(0.12, 0.3) * kFs);
    plan.push_back({pos, len, kVowels[rng.below(kVowels.size())], rng.uniform() < 0.3});
    pos += len;
    if (rng.uniform() < 0.25) pos += static_cast<std::size_t>(rng.uniform(0.1, 0.35) * kFs);
  }

  const double f0_base = rng.uniform(90.0, 220.0);
  const double vibrato_rate = rng.uniform(0.5, 2.0);
  const double vibrato_phase = rng.uniform(0.0, kTwoPi);
  std::array<Resonator, 3> formants{Resonator(80.0), Resonator(100.0), Resonator(140.0)};

  std::vector<double> x(n, 0.0);
  double phase = 0.0;
  Vowel prev = kVowels[0];
  std::size_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (next + 1 < plan.size() && i >= plan[next].start + plan[next].length) {
      prev = plan[next].vowel;
      ++next;
    }
    const double t = static_cast<double>(i) / kFs;
    const double declination = 1.0 - 0.15 * t / duration_s;
    const double f0 = f0_base * declination * (1.0 + 0.08 * std::sin(kTwoPi * vibrato_rate * t + vibrato_phase));
    phase = std::fmod(phase + kTwoPi * f0 / kFs, kTwoPi);

    double env = 0.0;
    double glide = 1.0;
    bool fricative = false;
    Vowel target = prev;
    if (!plan.empty()) {
      const auto& s = plan[next];
      if (i >= s.start && i < s.start + s.length) {
        const double u = static_cast<double>(i - s.start) / static_cast<double>(s.length);
        env = std::sin(std::numbers::pi * u);
        glide = std::min(1.0, u / 0.3);
        fricative = s.fricative && u < 0.2;
        target = s.vowel;
      }
    }
    const Vowel v{prev.f1 + glide * (target.f1 - prev.f1), prev.f2 + glide * (target.f2 - prev.f2),
                  prev.f3 + glide * (target.f3 - prev.f3)};

    double source = 0.0;
    if (env > 0.0) {
      const int harmonics = std::max(1, static_cast<int>(4000.0 / f0));
      for (int k = 1; k <= harmonics; ++k) source += std::sin(k * phase) / k;
      source *= env;
      if (fricative) source += 0.3 * rng.normal() * env;
    }
    double y = formants[0](source, v.f1);
    y = formants[1](y, v.f2);
    y = formants[2](y, v.f3);
    x[i] = y;
  }

  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  const double floor_std = 1e-4 * (peak > 0.0 ? peak : 1.0);
  std::vector<float> samples(n);
  for (std::size_t i = 0; i < n; ++i) samples[i] = static_cast<float>(x[i] + floor_std * rng.normal());
  normalize_peak(samples, 0.5);
  return dsp::AudioClip::mono(std::move(samples));
}

NoiseBank default_noise_bank() {
  return {{NoiseKind::kColored, {}}, {NoiseKind::kBursts, {}}, {NoiseKind::kHum, {}}, {NoiseKind::kBabble, {}}};
}

void add_recordings(NoiseBank& bank, std::span<const std::filesystem::path> wavs) {
  for (const auto& path : wavs) {
    auto clip = dsp::load_wav(path);
    if (clip.length() == 0) throw std::invalid_argument(path.string() + ": empty noise recording");
    bank.push_back({NoiseKind::kRecorded, std::move(clip.channels[0])});
  }
}

dsp::AudioClip render_noise(const NoiseSource& source, std::size_t length, Rng& rng) {
  std::vector<double> x;
  switch (source.kind) {
    case NoiseKind::kColored: x = colored_noise(length, rng); break;
    case NoiseKind::kBursts: x = burst_noise(length, rng); break;
    case NoiseKind::kHum: x = hum_noise(length, rng); break;
    case NoiseKind::kBabble: x = babble_noise(length, rng); break;
    case NoiseKind::kRecorded: {
      if (source.recording.empty()) throw std::invalid_argument("recorded noise source is empty");
      x.resize(length);
      const std::size_t offset = rng.below(source.recording.size());
      for (std::size_t i = 0; i < length; ++i) x[i] = source.recording[(offset + i) % source.recording.size()];
      break;
    }
  }
  normalize_rms(x, 0.1);
  std::vector<float> samples(x.begin(), x.end());
  return dsp::AudioClip::mono(std::move(samples));
}

std::vector<double> convolve_full(std::span<const float> signal, std::span<const double> kernel) {
  if (signal.empty() || kernel.empty()) return {};
  const std::size_t out_len = signal.size() + kernel.size() - 1;
  const std::size_t m = std::bit_ceil(out_len);
  std::vector<std::complex<double>> a(m), b(m);
  for (std::size_t i = 0; i < signal.size(); ++i) a[i] = signal[i];
  for (std::size_t i = 0; i < kernel.size(); ++i) b[i] = kernel[i];
  dsp::fft_inplace(a);
  dsp::fft_inplace(b);
  // Inverse transform through conjugation: ifft(z) = conj(fft(conj(z))) / m.
  for (std::size_t i = 0; i < m; ++i) a[i] = std::conj(a[i] * b[i]);
  dsp::fft_inplace(a);
  std::vector<double> out(out_len);
  for (std::size_t i = 0; i < out_len; ++i) out[i] = a[i].real() / static_cast<double>(m);
  return out;
}

dsp::AudioClip convolve_rir(const dsp::AudioClip& clip, const Rir& rir) {
  if (clip.n_channels() != 1) throw std::invalid_argument("convolve_rir expects a mono clip");
  dsp::AudioClip out;
  out.sample_rate = clip.sample_rate;
  for (const auto& taps : rir.taps) {
    const auto full = convolve_full(clip.channels[0], taps);
    std::vector<float> ch(clip.length());
    for (std::size_t i = 0; i < ch.size(); ++i) ch[i] = static_cast<float>(full[i]);
    out.channels.push_back(std::move(ch));
  }
  return out;
}

double SnrSampler::mean_db() const {
  double m = 0.0;
  for (std::size_t i = 0; i < support_db.size(); ++i) m += support_db[i] * weights[i];
  return m;
}

void SnrSampler::validate() const {
  if (support_db.empty() || support_db.size() != weights.size()) {
    throw std::invalid_argument("snr sampler support and weights must be non-empty and equal length");
  }
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw std::invalid_argument("snr weights must be non-negative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("snr weights must sum to 1");
}

double sample_snr(const SnrSampler& sampler, Split split, Rng& rng) {
  sampler.validate();
  const double u = rng.uniform();
  double cumulative = 0.0;
  std::size_t pick = sampler.support_db.size() - 1;
  for (std::size_t i = 0; i < sampler.weights.size(); ++i) {
    cumulative += sampler.weights[i];
    if (u < cumulative) {
      pick = i;
      break;
    }
  }
  const double offset = split == Split::kTest ? sampler.test_offset_db : 0.0;
  return sampler.support_db[pick] + offset;
}

double pooled_rms(const dsp::AudioClip& clip) {
  double e = 0.0;
  std::size_t n = 0;
  for (const auto& ch : clip.channels) {
    for (float v : ch) e += static_cast<double>(v) * v;
    n += ch.size();
  }
  return n == 0 ? 0.0 : std::sqrt(e / static_cast<double>(n));
}

double snr_gain(const dsp::AudioClip& speech, const dsp::AudioClip& noise, double snr_db) {
  const double rs = pooled_rms(speech);
  const double rn = pooled_rms(noise);
  if (!(rs > 0.0)) throw std::invalid_argument("cannot mix: speech is silent");
  if (!(rn > 0.0)) throw std::invalid_argument("cannot mix: noise is silent");
  return rs / rn * std::pow(10.0, -snr_db / 20.0);
}

dsp::AudioClip mix_at_snr(const dsp::AudioClip& speech, const dsp::AudioClip& noise, double snr_db) {
  if (speech.n_channels() != noise.n_channels() || speech.length() != noise.length()) {
    throw std::invalid_argument("speech and noise must have equal channel counts and lengths");
  }
  const double g = snr_gain(speech, noise, snr_db);
  dsp::AudioClip out = speech;
  for (std::size_t c = 0; c < out.n_channels(); ++c) {
    for (std::size_t i = 0; i < out.length(); ++i) {
      out.channels[c][i] = static_cast<float>(static_cast<double>(speech.channels[c][i]) +
                                              g * static_cast<double>(noise.channels[c][i]));
    }
  }
  return out;
}

}  // namespace fsegan::synth
