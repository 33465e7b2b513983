#include <cmath>
#include <complex>
#include <numbers>
#include <set>

#include "doctest.h"
#include "fsegan/dsp/features.hpp"
#include "fsegan/dsp/spectral.hpp"
#include "fsegan/eval/metrics.hpp"
#include "fsegan/synth/corpus.hpp"
#include "fsegan/synth/room.hpp"
#include "fsegan/synth/signals.hpp"
#include "helpers.hpp"

using namespace fsegan;
using namespace fsegan::synth;

namespace {

RoomConfig office(double t60) {
  RoomConfig r;
  r.dims = {4.5, 3.5, 2.7};
  r.t60 = t60;
  r.speech_pos = {1.2, 1.0, 1.5};
  r.noise_pos = {3.6, 0.8, 1.1};
  r.mic_l = {3.2, 2.3, 1.4};
  r.mic_r = {3.3, 2.3, 1.4};
  return r;
}

double power(const std::vector<float>& x) {
  double s = 0.0;
  for (float v : x) s += static_cast<double>(v) * v;
  return s / static_cast<double>(x.size());
}

double pooled_power(const dsp::AudioClip& c) {
  double s = 0.0;
  std::size_t n = 0;
  for (const auto& ch : c.channels) {
    for (float v : ch) s += static_cast<double>(v) * v;
    n += ch.size();
  }
  return s / static_cast<double>(n);
}

}  // namespace

TEST_SUITE("synth.speech") {
  TEST_CASE("determinism and length") {
    const auto a = synth_clean_utterance(42, 2.0);
    const auto b = synth_clean_utterance(42, 2.0);
    CHECK(a.channels == b.channels);
    CHECK(a.n_channels() == 1);
    CHECK(a.length() == 32000);
    float peak = 0.0f;
    for (float v : a.channels[0]) peak = std::max(peak, std::abs(v));
    CHECK(peak == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(synth_clean_utterance(43, 2.0).channels != a.channels);
    CHECK_THROWS(synth_clean_utterance(1, 0.5));
  }

  TEST_CASE("power concentrated below 4 kHz (periodogram)") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const auto clip = synth_clean_utterance(seed, 1.5);
      // Averaged periodogram over 1024-point Hann frames, via direct FFT.
      const std::size_t n = 1024;
      double below = 0.0, total = 0.0;
      for (std::size_t start = 0; start + n <= clip.length(); start += n / 2) {
        std::vector<std::complex<double>> buf(n);
        for (std::size_t t = 0; t < n; ++t) {
          const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(t) / n);
          buf[t] = w * clip.channels[0][start + t];
        }
        dsp::fft_inplace(buf);
        for (std::size_t k = 0; k <= n / 2; ++k) {
          const double p = std::norm(buf[k]);
          total += p;
          if (static_cast<double>(k) * 16000.0 / n < 4000.0) below += p;
        }
      }
      CHECK(below / total >= 0.8);
    }
  }
}

TEST_SUITE("synth.room") {
  TEST_CASE("test catalog is fixed and positions are inside") {
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
      const auto a = sample_room(seed, Split::kTest);
      const auto b = sample_room(seed, Split::kTest);
      CHECK(a.dims.x == b.dims.x);
      CHECK(a.t60 == b.t60);
      CHECK(a.speech_pos.y == b.speech_pos.y);
      CHECK(a.room_id == static_cast<int>(seed % kTestCatalogSize));
      CHECK_NOTHROW(a.validate());
      const auto t = sample_room(seed, Split::kTrain);
      CHECK_NOTHROW(t.validate());
      for (const auto& p : {t.speech_pos, t.noise_pos, t.mic_l, t.mic_r}) CHECK(t.contains(p));
    }
  }

  TEST_CASE("train and test geometries are disjoint") {
    double test_min_volume = 1e9, test_max_volume = 0;
    for (std::uint64_t s = 0; s < kTestCatalogSize; ++s) {
      const auto v = sample_room(s, Split::kTest).volume();
      test_min_volume = std::min(test_min_volume, v);
      test_max_volume = std::max(test_max_volume, v);
    }
    std::set<std::tuple<double, double, double>> test_dims;
    for (std::uint64_t s = 0; s < kTestCatalogSize; ++s) {
      const auto r = sample_room(s, Split::kTest);
      test_dims.insert({r.dims.x, r.dims.y, r.dims.z});
    }
    for (std::uint64_t s = 0; s < 500; ++s) {
      const auto r = sample_room(s, Split::kTrain);
      CHECK(test_dims.count({r.dims.x, r.dims.y, r.dims.z}) == 0);
    }
  }

  TEST_CASE("1000 train rooms span t60 [0.15, 0.9]") {
    double lo = 10.0, hi = 0.0;
    for (std::uint64_t s = 0; s < 1000; ++s) {
      const auto r = sample_room(hash_seed(99, s), Split::kTrain);
      lo = std::min(lo, r.t60);
      hi = std::max(hi, r.t60);
    }
    CHECK(lo <= 0.15);
    CHECK(hi >= 0.9);
  }

  TEST_CASE("Sabine absorption") {
    CHECK(t60_to_absorption(0.5, {5, 4, 3}) == doctest::Approx(0.161 * 60.0 / (94.0 * 0.5)).epsilon(1e-12));
    CHECK(t60_to_absorption(0.5, {5, 4, 3}) == doctest::Approx(0.2055).epsilon(1e-3));
    CHECK(t60_to_absorption(0.05, {1, 1, 1}) == doctest::Approx(0.161 / 0.3).epsilon(1e-12));
    CHECK(t60_to_absorption(1e6, {5, 4, 3}) < 1e-6);
    CHECK_THROWS_WITH(t60_to_absorption(0.01, {1, 1, 1}), doctest::Contains("room too small"));
  }

  TEST_CASE("direct path tap") {
    RoomConfig r = office(0.3);
    r.dims = {10, 10, 10};
    r.speech_pos = {2, 5, 5};
    r.mic_l = {5.43, 5, 5};
    r.mic_r = {5.43, 5.1, 5};
    const auto rir = rir_image_source(r, r.speech_pos, 0);
    REQUIRE(rir.taps.size() == 2);
    CHECK(rir.image_count == 1);
    CHECK(rir.direct_delay == 160);
    int nonzero = 0;
    for (std::size_t i = 0; i < rir.length(); ++i) nonzero += rir.taps[0][i] != 0.0;
    CHECK(nonzero == 1);
    CHECK(rir.taps[0][160] == doctest::Approx(1.0 / (4.0 * std::numbers::pi * 3.43)).epsilon(1e-12));

    r.mic_l = {3, 5, 5};
    const auto one = rir_image_source(r, r.speech_pos, 0);
    double peak = 0.0;
    for (double v : one.taps[0]) peak = std::max(peak, v);
    CHECK(peak == doctest::Approx(1.0 / (4.0 * std::numbers::pi)).epsilon(1e-12));
  }

  TEST_CASE("image enumeration oracle") {
    // Oracle: count lattice points with |i|+|j|+|k| <= n by brute force.
    for (int n = 0; n <= 4; ++n) {
      std::size_t count = 0;
      for (int i = -n; i <= n; ++i) {
        for (int j = -n; j <= n; ++j) {
          for (int k = -n; k <= n; ++k) count += (std::abs(i) + std::abs(j) + std::abs(k) <= n);
        }
      }
      CHECK(rir_image_source(office(0.4), office(0.4).speech_pos, n).image_count == count);
    }
    // Order 1: the direct path plus six first-order images, at distances
    // computed here from explicit mirror positions.
    const auto r = office(0.4);
    const auto& s = r.speech_pos;
    const std::vector<Vec3> images{s,
                                   {-s.x, s.y, s.z},
                                   {2 * r.dims.x - s.x, s.y, s.z},
                                   {s.x, -s.y, s.z},
                                   {s.x, 2 * r.dims.y - s.y, s.z},
                                   {s.x, s.y, -s.z},
                                   {s.x, s.y, 2 * r.dims.z - s.z}};
    const double beta = std::sqrt(1.0 - t60_to_absorption(0.4, r.dims));
    std::vector<double> want;
    for (std::size_t i = 0; i < images.size(); ++i) {
      const double d = distance(images[i], r.mic_l);
      const auto delay = static_cast<std::size_t>(std::lround(d / kSpeedOfSound * 16000.0));
      if (want.size() <= delay) want.resize(delay + 1, 0.0);
      want[delay] += (i == 0 ? 1.0 : beta) / (4.0 * std::numbers::pi * d);
    }
    const auto rir = rir_image_source(r, s, 1);
    REQUIRE(rir.length() == want.size());
    for (std::size_t i = 0; i < want.size(); ++i) CHECK(rir.taps[0][i] == doctest::Approx(want[i]).epsilon(1e-12));
  }

  TEST_CASE("Schroeder T60 within 20% (order 60)") {
    for (double t60 : {0.2, 0.5, 0.8}) {
      const auto r = office(t60);
      const auto rir = rir_image_source(r, r.speech_pos, 60);
      for (const auto& taps : rir.taps) {
        const double est = estimate_t60_schroeder(taps);
        CHECK(std::abs(est / t60 - 1.0) < 0.2);
      }
    }
  }

  TEST_CASE("Schroeder estimate of a synthetic exponential decay") {
    // Gaussian noise with a known 0.4 s decay envelope.
    Rng rng(4);
    std::vector<double> h(16000);
    for (std::size_t i = 0; i < h.size(); ++i) {
      h[i] = rng.normal() * std::pow(10.0, -3.0 * static_cast<double>(i) / 16000.0 / 0.4);
    }
    CHECK(estimate_t60_schroeder(h) == doctest::Approx(0.4).epsilon(0.05));
  }
}

TEST_SUITE("synth.convolve") {
  TEST_CASE("identity and delay kernels") {
    Rng rng(3);
    std::vector<float> x(300);
    for (auto& v : x) v = static_cast<float>(rng.uniform(-1, 1));
    const auto clip = dsp::AudioClip::mono(x);
    Rir id;
    id.taps = {{1.0}, {1.0}};
    const auto same = convolve_rir(clip, id);
    REQUIRE(same.n_channels() == 2);
    for (std::size_t i = 0; i < x.size(); ++i) {
      CHECK(same.channels[0][i] == doctest::Approx(x[i]).epsilon(1e-6));
      CHECK(same.channels[1][i] == same.channels[0][i]);
    }
    Rir delay;
    delay.taps = {std::vector<double>(8, 0.0), std::vector<double>(8, 0.0)};
    delay.taps[0][7] = 1.0;
    delay.taps[1][7] = 1.0;
    const auto shifted = convolve_rir(clip, delay);
    CHECK(shifted.length() == x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double want = i < 7 ? 0.0 : x[i - 7];
      CHECK(std::abs(shifted.channels[0][i] - want) < 1e-6);
    }
  }

  TEST_CASE("random kernel matches direct O(NK) convolution") {
    Rng rng(8);
    std::vector<float> x(1000);
    for (auto& v : x) v = static_cast<float>(rng.uniform(-1, 1));
    std::vector<double> k(333);
    for (auto& v : k) v = rng.uniform(-0.5, 0.5);
    const auto full = convolve_full(x, k);
    REQUIRE(full.size() == x.size() + k.size() - 1);
    for (std::size_t n = 0; n < full.size(); ++n) {
      double acc = 0.0;
      for (std::size_t j = 0; j < k.size(); ++j) {
        if (n >= j && n - j < x.size()) acc += k[j] * x[n - j];
      }
      CHECK(std::abs(full[n] - acc) < 1e-6);
    }
    Rir rir;
    rir.taps = {k, k};
    const auto trimmed = convolve_rir(dsp::AudioClip::mono(x), rir);
    for (std::size_t n = 0; n < x.size(); ++n) CHECK(std::abs(trimmed.channels[1][n] - full[n]) < 1e-5);
  }
}

TEST_SUITE("synth.snr") {
  TEST_CASE("sampler mean and offset") {
    SnrSampler s;
    CHECK_NOTHROW(s.validate());
    double want = 0.0;
    for (std::size_t i = 0; i < s.support_db.size(); ++i) want += s.support_db[i] * s.weights[i];
    CHECK(want == doctest::Approx(11.25).epsilon(1e-12));
    CHECK(s.mean_db() == doctest::Approx(11.25).epsilon(1e-12));

    Rng a(5), b(5);
    for (int i = 0; i < 50; ++i) {
      const double train = sample_snr(s, Split::kTrain, a);
      const double test = sample_snr(s, Split::kTest, b);
      CHECK(test == doctest::Approx(train + 0.2).epsilon(1e-12));
    }
    SnrSampler zero;
    zero.support_db = {0.0};
    zero.weights = {1.0};
    Rng c(1);
    CHECK(sample_snr(zero, Split::kTest, c) == doctest::Approx(0.2).epsilon(1e-12));

    Rng mc(77);
    double sum = 0.0;
    for (int i = 0; i < 10000; ++i) sum += sample_snr(s, Split::kTrain, mc);
    CHECK(std::abs(sum / 10000.0 - 11.25) < 0.3);
  }

  TEST_CASE("mixing gain and achieved SNR") {
    const auto speech = dsp::AudioClip::mono(std::vector<float>(100, 0.5f));
    const auto noise = dsp::AudioClip::mono(std::vector<float>(100, -0.5f));
    CHECK(snr_gain(speech, noise, 20.0) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(snr_gain(speech, noise, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS(mix_at_snr(speech, dsp::AudioClip::silent(1, 100), 5.0));

    Rng rng(12);
    dsp::AudioClip s2, n2;
    for (int c = 0; c < 2; ++c) {
      std::vector<float> a(4000), b(4000);
      for (auto& v : a) v = static_cast<float>(rng.uniform(-0.3, 0.3));
      for (auto& v : b) v = static_cast<float>(rng.normal(0.0, 0.7));
      s2.channels.push_back(a);
      n2.channels.push_back(b);
    }
    const double g = snr_gain(s2, n2, 7.0);
    CHECK(10.0 * std::log10(pooled_power(s2) / (pooled_power(n2) * g * g)) == doctest::Approx(7.0).epsilon(1e-4));
  }
}

TEST_SUITE("synth.pairs") {
  TEST_CASE("determinism and shapes") {
    const auto bank = default_noise_bank();
    PairOptions opts;
    opts.max_order = 2;
    const auto a = build_pair(7, 3, Split::kTrain, bank, opts);
    const auto b = build_pair(7, 3, Split::kTrain, bank, opts);
    CHECK(a.noisy.channels == b.noisy.channels);
    CHECK(a.clean.channels == b.clean.channels);
    CHECK(a.seed == hash_seed(7, 3));
    CHECK(a.noisy.n_channels() == 2);
    CHECK(a.clean.n_channels() == 1);
    CHECK(a.noisy.length() == a.clean.length());
    CHECK(a.snr_db >= 0.0);
    CHECK(a.snr_db <= 30.0);
    const auto t = build_pair(7, 3, Split::kTest, bank, opts);
    CHECK(t.clean.channels != a.clean.channels);
    CHECK(t.room_id < kTestCatalogSize);
    for (const auto& ch : a.noisy.channels) {
      for (float v : ch) CHECK(std::abs(v) <= 1.0f);
    }
  }

  TEST_CASE("achieved SNR matches the request") {
    const auto bank = default_noise_bank();
    PairOptions opts;
    opts.max_order = 4;
    for (std::uint64_t i = 0; i < 6; ++i) {
      PairComponents parts;
      const auto p = build_pair(11, i, Split::kTrain, bank, opts, &parts);
      const double measured = 10.0 * std::log10(pooled_power(parts.speech) / pooled_power(parts.noise));
      CHECK(std::abs(measured - p.snr_db) < 0.01);
    }
  }

  TEST_CASE("anechoic pair at 30 dB is closer to clean than at 0 dB") {
    const auto bank = default_noise_bank();
    PairOptions opts;
    opts.max_order = 0;
    dsp::FrontEnd fe;
    for (std::uint64_t i = 0; i < 3; ++i) {
      opts.snr_override_db = 30.0;
      const auto hi = build_pair(5, i, Split::kTrain, bank, opts);
      opts.snr_override_db = 0.0;
      const auto lo = build_pair(5, i, Split::kTrain, bank, opts);
      const auto clean = fe(hi.clean);
      for (std::size_t ch = 0; ch < 2; ++ch) {
        const double lsd_hi = eval::lsd(fe(hi.noisy).channel(ch), clean);
        const double lsd_lo = eval::lsd(fe(lo.noisy).channel(ch), fe(lo.clean));
        CHECK(lsd_hi < lsd_lo);
      }
    }
  }

  TEST_CASE("noise textures render deterministically with the requested length") {
    for (const auto& src : default_noise_bank()) {
      Rng a(3), b(3);
      const auto x = render_noise(src, 5000, a);
      const auto y = render_noise(src, 5000, b);
      CHECK(x.length() == 5000);
      CHECK(x.channels == y.channels);
      CHECK(power(x.channels[0]) > 0.0);
    }
  }

  TEST_CASE("manifest round trip") {
    std::vector<ManifestEntry> rows{{0, Split::kTrain, 123, 5.0, 21, "wav/a_noisy.wav", "wav/a_clean.wav"},
                                    {4, Split::kTest, 99, 10.2, 3, "wav/b_noisy.wav", "wav/b_clean.wav"}};
    const auto text = format_manifest(rows);
    CHECK(text.rfind("# ", 0) == 0);
    const auto back = parse_manifest(text);
    REQUIRE(back.size() == 2);
    CHECK(back[1].index == 4);
    CHECK(back[1].split == Split::kTest);
    CHECK(back[1].seed == 99);
    CHECK(back[1].snr_db == doctest::Approx(10.2));
    CHECK(back[1].room_id == 3);
    CHECK(back[0].clean == "wav/a_clean.wav");
    CHECK_THROWS(parse_manifest("1\ttrain\t3\n"));
  }
}
