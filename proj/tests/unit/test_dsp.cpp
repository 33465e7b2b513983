#include <cmath>
#include <complex>
#include <numbers>

#include "doctest.h"
#include "fsegan/common/binary_io.hpp"
#include "fsegan/dsp/audio.hpp"
#include "fsegan/dsp/features.hpp"
#include "fsegan/dsp/spectral.hpp"
#include "helpers.hpp"

using namespace fsegan;
using namespace fsegan::dsp;
using fsegan::testing::random_spec;
using fsegan::testing::TempDir;

namespace {

// Hand-built RIFF header for 16-bit PCM.
std::string wav_bytes(int channels, int rate, const std::vector<std::int16_t>& interleaved) {
  ByteWriter w;
  const auto data_len = static_cast<std::uint32_t>(interleaved.size() * 2);
  w.bytes("RIFF");
  w.u32(36 + data_len);
  w.bytes("WAVE");
  w.bytes("fmt ");
  w.u32(16);
  w.u16(1);
  w.u16(static_cast<std::uint16_t>(channels));
  w.u32(static_cast<std::uint32_t>(rate));
  w.u32(static_cast<std::uint32_t>(rate * channels * 2));
  w.u16(static_cast<std::uint16_t>(channels * 2));
  w.u16(16);
  w.bytes("data");
  w.u32(data_len);
  for (auto s : interleaved) w.i16(s);
  return w.release();
}

// Textbook O(N^2) DFT.
std::vector<std::complex<double>> naive_dft(const std::vector<std::complex<double>>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double ang = -2.0 * std::numbers::pi * static_cast<double>(k * t % n) / static_cast<double>(n);
      acc += x[t] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    out[k] = acc;
  }
  return out;
}

}  // namespace

TEST_SUITE("dsp.wav") {
  TEST_CASE("stereo header and sample scaling") {
    std::vector<std::int16_t> samples(2 * 32000, 0);
    samples[0] = 16384;
    const auto clip = parse_wav(wav_bytes(2, 16000, samples));
    CHECK(clip.n_channels() == 2);
    CHECK(clip.length() == 32000);
    CHECK(clip.channels[0][0] == 0.5f);
    CHECK(clip.channels[1][0] == 0.0f);
  }

  TEST_CASE("8 kHz input is rejected") {
    CHECK_THROWS_WITH_AS(parse_wav(wav_bytes(1, 8000, {0, 1, 2})), doctest::Contains("unsupported sample rate"),
                         std::runtime_error);
  }

  TEST_CASE("quantization rules") {
    CHECK(quantize_pcm16(1.0f) == 32767);
    CHECK(quantize_pcm16(-1.0f) == -32768);
    CHECK(quantize_pcm16(-0.25f) == -8192);
    CHECK(quantize_pcm16(3.0f) == 32767);
  }

  TEST_CASE("file round trip") {
    TempDir dir("wav");
    const auto zeros = AudioClip::silent(2, 1000);
    save_wav(zeros, dir / "z.wav");
    const auto back = load_wav(dir / "z.wav");
    CHECK(back.channels == zeros.channels);

    Rng rng(5);
    std::vector<float> v(777);
    for (auto& x : v) x = static_cast<float>(rng.uniform(-1, 1));
    save_wav(AudioClip::mono(v), dir / "r.wav");
    const auto r = load_wav(dir / "r.wav");
    REQUIRE(r.length() == v.size());
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(std::abs(r.channels[0][i] - v[i]) <= 1.0f / 32768.0f);
  }

  TEST_CASE("truncated data chunk is an error") {
    auto bytes = wav_bytes(1, 16000, std::vector<std::int16_t>(100, 1));
    bytes.resize(bytes.size() - 10);
    CHECK_THROWS(parse_wav(bytes));
  }
}

TEST_SUITE("dsp.stft") {
  TEST_CASE("fft matches naive DFT") {
    Rng rng(11);
    for (std::size_t n : {1u, 2u, 8u, 64u, 512u}) {
      std::vector<std::complex<double>> x(n);
      for (auto& c : x) c = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
      const auto want = naive_dft(x);
      auto got = x;
      fft_inplace(got);
      for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(got[k] - want[k]) < 1e-9 * static_cast<double>(n));
    }
  }

  TEST_CASE("frame count") {
    CHECK(stft_frame_count(16000, {}) == 97);
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
      const std::size_t n = 512 + rng.below(40000);
      CHECK(stft_frame_count(n, {}) == 1 + (n - 512) / 160);
      const auto grid = stft_magnitude(AudioClip::silent(1, n), {});
      CHECK(grid[0].rows == 1 + (n - 512) / 160);
    }
    CHECK_THROWS(stft_magnitude(AudioClip::silent(1, 511), {}));
  }

  TEST_CASE("silence gives zero magnitude") {
    const auto g = stft_magnitude(AudioClip::silent(2, 4000), {});
    REQUIRE(g.size() == 2);
    CHECK(g[0].cols == 257);
    for (double v : g[1].values) CHECK(v == 0.0);
  }

  TEST_CASE("1 kHz sine peaks at bin 32 and matches a direct DFT") {
    std::vector<float> s(8000);
    for (std::size_t i = 0; i < s.size(); ++i) {
      s[i] = static_cast<float>(std::sin(2.0 * std::numbers::pi * 1000.0 * static_cast<double>(i) / 16000.0));
    }
    const auto clip = AudioClip::mono(s);
    const auto g = stft_magnitude(clip, {})[0];
    for (std::size_t f = 0; f < g.rows; ++f) {
      std::size_t best = 0;
      for (std::size_t k = 1; k < g.cols; ++k) {
        if (g.at(f, k) > g.at(f, best)) best = k;
      }
      CHECK(best == 32);
    }
    // Independent evaluation of frame 3 with an explicit periodic Hann window.
    const std::size_t start = 3 * 160;
    for (std::size_t k : {0u, 31u, 32u, 33u, 100u, 256u}) {
      std::complex<double> acc = 0.0;
      for (std::size_t t = 0; t < 512; ++t) {
        const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(t) / 512.0);
        const double ang = -2.0 * std::numbers::pi * static_cast<double>(k * t) / 512.0;
        acc += w * static_cast<double>(s[start + t]) * std::complex<double>(std::cos(ang), std::sin(ang));
      }
      CHECK(g.at(3, k) == doctest::Approx(std::abs(acc)).epsilon(1e-9).scale(1.0));
    }
  }
}

TEST_SUITE("dsp.mel") {
  TEST_CASE("scale values") {
    CHECK(hz_to_mel(0.0) == 0.0);
    // 30-digit evaluations of 2595 log10(1 + f / 700).
    CHECK(hz_to_mel(125.0) == doctest::Approx(185.168582650059126669860279655).epsilon(1e-12));
    CHECK(hz_to_mel(7500.0) == doctest::Approx(2773.31753309874833413337499143).epsilon(1e-12));
    for (double hz : {50.0, 440.0, 3999.0}) CHECK(mel_to_hz(hz_to_mel(hz)) == doctest::Approx(hz).epsilon(1e-12));
  }

  TEST_CASE("filterbank rows and coverage") {
    for (std::size_t n : {32u, 40u, 128u}) {
      MelConfig mc;
      mc.n_filters = n;
      const auto fb = build_mel_filterbank(mc, {});
      REQUIRE(fb.n_filters() == n);
      REQUIRE(fb.n_fft_bins() == 257);
      for (std::size_t i = 0; i < n; ++i) {
        const auto row = fb.weights.row(i);
        double peak = 0.0;
        int peaks = 0;
        for (double v : row) {
          CHECK(v >= 0.0);
          peak = std::max(peak, v);
        }
        REQUIRE(peak > 0.0);
        for (double v : row) peaks += (v == peak);
        CHECK(peaks == 1);
      }
      // Every FFT bin strictly inside [125, 7500] Hz has some weight.
      for (std::size_t k = 0; k < 257; ++k) {
        const double hz = static_cast<double>(k) * 16000.0 / 512.0;
        if (hz <= 125.0 || hz >= 7500.0) continue;
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) total += fb.weights.at(i, k);
        CHECK(total > 0.0);
      }
    }
  }
}

TEST_SUITE("dsp.logmel") {
  TEST_CASE("floor path") {
    const auto fb = build_mel_filterbank({}, {});
    std::vector<Grid> mags{Grid(4, 257, 0.0)};
    const auto spec = log_mel(mags, fb);
    for (double v : spec.values) CHECK(v == doctest::Approx(std::log(1e-8)).epsilon(1e-12));
    CHECK(std::log(1e-8) == doctest::Approx(-18.42).epsilon(1e-3));
  }

  TEST_CASE("random frame against a dot-product oracle, and log scaling") {
    const auto fb = build_mel_filterbank({}, {});
    Rng rng(9);
    Grid m(3, 257);
    for (auto& v : m.values) v = rng.uniform(0.0, 2.0);
    std::vector<Grid> mags{m};
    const auto spec = log_mel(mags, fb);
    for (std::size_t f = 0; f < 3; ++f) {
      for (std::size_t i = 0; i < fb.n_filters(); ++i) {
        double dot = 0.0;
        for (std::size_t k = 0; k < 257; ++k) dot += fb.weights.at(i, k) * m.at(f, k);
        CHECK(spec.at(f, i, 0) == doctest::Approx(std::log(std::max(dot, 1e-8))).epsilon(1e-6));
      }
    }
    Grid m3 = m;
    for (auto& v : m3.values) v *= 3.0;
    std::vector<Grid> scaled{m3};
    const auto s3 = log_mel(scaled, fb);
    for (std::size_t i = 0; i < s3.values.size(); ++i) {
      CHECK(s3.values[i] - spec.values[i] == doctest::Approx(std::log(3.0)).epsilon(1e-9));
    }
  }

  TEST_CASE("flat magnitude through a row summing to s") {
    const auto fb = build_mel_filterbank({}, {});
    std::vector<Grid> mags{Grid(1, 257, 0.7)};
    const auto spec = log_mel(mags, fb);
    for (std::size_t i = 0; i < fb.n_filters(); ++i) {
      double s = 0.0;
      for (double v : fb.weights.row(i)) s += v;
      CHECK(spec.at(0, i, 0) == doctest::Approx(std::log(s * 0.7)).epsilon(1e-12));
    }
  }
}

TEST_SUITE("dsp.norm") {
  TEST_CASE("degenerate and two-point corpora") {
    std::vector<LogMelSpectrogram> c{LogMelSpectrogram(5, 3, 2, 4.25)};
    const auto s = fit_norm_stats(c);
    for (std::size_t b = 0; b < 3; ++b) {
      CHECK(s.mean[b] == 4.25);
      CHECK(s.std[b] == 1e-5);
    }
    LogMelSpectrogram two(2, 1, 1);
    two.values = {0.0, 2.0};
    std::vector<LogMelSpectrogram> c2{two};
    const auto s2 = fit_norm_stats(c2);
    CHECK(s2.mean[0] == 1.0);
    CHECK(s2.std[0] == 1.0);
  }

  TEST_CASE("random corpus against two-pass oracle") {
    Rng rng(21);
    std::vector<LogMelSpectrogram> corpus;
    for (int i = 0; i < 5; ++i) corpus.push_back(random_spec(rng, 10 + i * 7, 6, 2, -3.0, 4.0));
    const auto s = fit_norm_stats(corpus);
    for (std::size_t b = 0; b < 6; ++b) {
      double sum = 0.0, n = 0.0;
      for (const auto& sp : corpus) {
        for (std::size_t f = 0; f < sp.n_frames; ++f) {
          for (std::size_t c = 0; c < 2; ++c) {
            sum += sp.at(f, b, c);
            n += 1.0;
          }
        }
      }
      const double mean = sum / n;
      double ss = 0.0;
      for (const auto& sp : corpus) {
        for (std::size_t f = 0; f < sp.n_frames; ++f) {
          for (std::size_t c = 0; c < 2; ++c) ss += (sp.at(f, b, c) - mean) * (sp.at(f, b, c) - mean);
        }
      }
      CHECK(std::abs(s.mean[b] - mean) < 1e-6);
      CHECK(std::abs(s.std[b] - std::sqrt(ss / n)) < 1e-6);
    }
  }

  TEST_CASE("normalize maps mean to 0 and mean+std to 1; round trip") {
    NormStats st{{1.5, -2.0}, {0.5, 3.0}};
    LogMelSpectrogram s(2, 2, 1);
    s.values = {1.5, -2.0, 2.0, 1.0};
    const auto n = normalize(s, st);
    CHECK(n.normalized);
    CHECK(n.values[0] == 0.0);
    CHECK(n.values[1] == 0.0);
    CHECK(n.values[2] == 1.0);
    CHECK(n.values[3] == 1.0);
    Rng rng(4);
    const auto r = random_spec(rng, 30, 2, 2);
    const auto back = denormalize(normalize(r, st), st);
    for (std::size_t i = 0; i < r.values.size(); ++i) CHECK(std::abs(back.values[i] - r.values[i]) < 1e-6);
    CHECK_THROWS(normalize(n, st));
  }

  TEST_CASE("stats file round trip") {
    TempDir dir("stats");
    Rng rng(8);
    std::vector<LogMelSpectrogram> c{random_spec(rng, 20, 4, 2)};
    const auto s = fit_norm_stats(c);
    save_stats(s, dir / "s.nsta");
    const auto back = load_stats(dir / "s.nsta");
    CHECK(back.mean == s.mean);
    CHECK(back.std == s.std);
  }
}

TEST_SUITE("dsp.windows") {
  TEST_CASE("placements") {
    LogMelSpectrogram s(384, 4, 1);
    const auto w = frame_windows(s, 128, 0.5);
    REQUIRE(w.placement.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(w.placement[i].start == 64 * i);
      CHECK(w.placement[i].valid == 128);
    }
    CHECK(frame_windows(s, 128, 0.0).placement.size() == 3);
    LogMelSpectrogram s130(130, 4, 1);
    const auto w130 = frame_windows(s130, 128, 0.0);
    REQUIRE(w130.placement.size() == 2);
    CHECK(w130.placement[1].start == 128);
    CHECK(w130.placement[1].valid == 2);
    CHECK(w130.patches[1].n_frames == 128);
  }

  TEST_CASE("no-overlap round trips") {
    Rng rng(13);
    for (std::size_t frames : {384u, 130u}) {
      const auto s = random_spec(rng, frames, 8, 2);
      const auto w = frame_windows(s, 128, 0.0);
      const auto back = reassemble(w.patches, w.placement, frames);
      CHECK(back.values == s.values);
    }
    // Padding region is zero.
    const auto s = random_spec(rng, 130, 3, 1);
    const auto w = frame_windows(s, 128, 0.0);
    for (std::size_t f = 2; f < 128; ++f) {
      for (std::size_t b = 0; b < 3; ++b) CHECK(w.patches[1].at(f, b, 0) == 0.0);
    }
  }

  TEST_CASE("frame count preserved for lengths 1..300") {
    Rng rng(17);
    for (std::size_t n = 1; n <= 300; ++n) {
      const auto s = random_spec(rng, n, 2, 1);
      const auto w = frame_windows(s, 32, 0.0);
      const auto back = reassemble(w.patches, w.placement, n);
      CHECK(back.n_frames == n);
      CHECK(back.values == s.values);
    }
  }
}

TEST_SUITE("dsp.files") {
  TEST_CASE("feature file round trip and corruption") {
    TempDir dir("lmfb");
    Rng rng(2);
    auto s = random_spec(rng, 17, 5, 3);
    for (auto& v : s.values) v = static_cast<float>(v);
    s.normalized = true;
    save_features(s, dir / "a.lmfb");
    const auto back = load_features(dir / "a.lmfb");
    CHECK(back.values == s.values);
    CHECK(back.n_frames == 17);
    CHECK(back.n_bins == 5);
    CHECK(back.n_channels == 3);
    CHECK(back.normalized);
    auto bytes = encode_features(s);
    bytes.pop_back();
    CHECK_THROWS(decode_features(bytes));
  }

  TEST_CASE("front end output layout") {
    std::vector<float> v(16000, 0.0f);
    Rng rng(6);
    for (auto& x : v) x = static_cast<float>(rng.uniform(-0.3, 0.3));
    AudioClip stereo;
    stereo.channels = {v, v};
    FrontEnd fe;
    const auto spec = fe(stereo);
    CHECK(spec.n_frames == 97);
    CHECK(spec.n_bins == 128);
    CHECK(spec.n_channels == 2);
    CHECK(spec.frame_hop_s == doctest::Approx(0.01));
    for (std::size_t f = 0; f < spec.n_frames; ++f) {
      for (std::size_t b = 0; b < 128; ++b) CHECK(spec.at(f, b, 0) == spec.at(f, b, 1));
    }
  }
}
