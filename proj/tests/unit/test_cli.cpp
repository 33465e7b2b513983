#include <algorithm>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "fsegan/cli/cli.hpp"
#include "fsegan/common/binary_io.hpp"
#include "fsegan/dsp/features.hpp"
#include "fsegan/synth/corpus.hpp"
#include "helpers.hpp"

using namespace fsegan;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

// Short utterances and 16 Mel bins keep the pipeline quick.
const char* kSmallConfig =
    "# desk-scale pipeline\n"
    "min_duration_s = 1.0\n"
    "max_duration_s = 1.2\n"
    "n_mels = 16\n"
    "patch_bins = 16\n"
    "patch_frames = 16\n"
    "depth = 4\n"
    "batch = 4\n"
    "steps = 4\n"
    "eval_every = 2\n";

std::string dir_digest(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    // The effective config records the output path itself.
    if (e.is_regular_file() && e.path().extension() != ".cfg") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::string all;
  for (const auto& f : files) all += fs::relative(f, dir).string() + "\n" + read_file(f);
  return all;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage errors exit 1, runtime failures exit 2") {
    CHECK(run({}).code == cli::kExitUsage);
    CHECK(run({"bogus"}).code == cli::kExitUsage);
    const auto unknown_flag = run({"synth", "--colour", "red"});
    CHECK(unknown_flag.code == cli::kExitUsage);
    CHECK(unknown_flag.err.find("error") != std::string::npos);
    CHECK(run({"synth", "--count", "x", "--out", "/tmp/none"}).code == cli::kExitUsage);
    CHECK(run({"synth", "--split", "dev", "--out", "/tmp/none"}).code == cli::kExitUsage);
    CHECK(run({"synth"}).code == cli::kExitUsage);  // --out is required
    CHECK(run({"render", "--in", "/nonexistent/x.lmfb", "--out", "/tmp/x.pgm"}).code == cli::kExitFailure);
    const auto v = run({"--version"});
    CHECK(v.code == cli::kExitOk);
    CHECK(v.out == cli::version_line() + "\n");
    CHECK(run({"--help"}).code == cli::kExitOk);

    testing::TempDir dir("cli_cfg");
    atomic_write_file(dir / "bad.cfg", "seed = 3\nwarp_factor = 9\n");
    const auto bad = run({"synth", "--config", (dir / "bad.cfg").string(), "--out", (dir / "s").string()});
    CHECK(bad.code == cli::kExitUsage);
    CHECK(bad.err.find("warp_factor") != std::string::npos);
  }

  TEST_CASE("synth is deterministic and merges splits into one manifest") {
    testing::TempDir dir("cli_synth");
    atomic_write_file(dir / "c.cfg", kSmallConfig);
    const std::string cfg = (dir / "c.cfg").string();
    for (const char* sub : {"a", "b"}) {
      const auto r = run({"synth", "--config", cfg, "--split", "test", "--count", "4", "--seed", "7", "--out",
                          (dir / sub).string()});
      REQUIRE(r.code == 0);
    }
    CHECK(dir_digest(dir / "a") == dir_digest(dir / "b"));
    CHECK(fs::exists(dir / "a" / "synth.effective.cfg"));
    CHECK(read_file(dir / "a" / "synth.effective.cfg").find(cli::version_line()) != std::string::npos);

    REQUIRE(run({"synth", "--config", cfg, "--split", "train", "--count", "3", "--seed", "7", "--out",
                 (dir / "a").string()})
                .code == 0);
    const auto m = synth::load_manifest(dir / "a" / "manifest.tsv");
    CHECK(m.size() == 7);
    std::size_t test_rows = 0;
    for (const auto& e : m) test_rows += e.split == synth::Split::kTest;
    CHECK(test_rows == 4);
  }

  TEST_CASE("pipeline plumbing: featurize, train, eval, enhance, render, export-hybrid") {
    testing::TempDir dir("cli_pipe");
    atomic_write_file(dir / "c.cfg", kSmallConfig);
    const std::string cfg = (dir / "c.cfg").string();
    const std::string data = (dir / "data").string();
    REQUIRE(run({"synth", "--config", cfg, "--split", "train", "--count", "5", "--seed", "3", "--out", data}).code == 0);
    REQUIRE(run({"synth", "--config", cfg, "--split", "test", "--count", "4", "--seed", "3", "--out", data}).code == 0);
    const std::string manifest = data + "/manifest.tsv";

    const std::string feat = (dir / "feat").string();
    const auto fz = run({"featurize", "--config", cfg, "--in", manifest, "--out", feat});
    REQUIRE_MESSAGE(fz.code == 0, fz.err);

    // Normalized train features: pooled mean ~0 and std ~1.
    double sum = 0.0, sq = 0.0;
    std::size_t n = 0;
    for (int i = 0; i < 5; ++i) {
      const auto s = dsp::load_features(feat + "/feat/train_" + std::to_string(i) + "_noisy.lmfb");
      CHECK(s.n_channels == 2);
      CHECK(s.normalized);
      for (double v : s.values) {
        sum += v;
        sq += v * v;
        ++n;
      }
      CHECK(dsp::load_features(feat + "/feat/train_" + std::to_string(i) + "_clean.lmfb").n_channels == 1);
    }
    const double mean = sum / static_cast<double>(n);
    const double sd = std::sqrt(sq / static_cast<double>(n) - mean * mean);
    CHECK(std::abs(mean) < 0.01);
    CHECK(std::abs(sd - 1.0) < 0.01);

    // Rerun with the same inputs gives the same bytes.
    const std::string feat2 = (dir / "feat2").string();
    REQUIRE(run({"featurize", "--config", cfg, "--in", manifest, "--out", feat2}).code == 0);
    CHECK(read_file(feat + "/feat/test_2_noisy.lmfb") == read_file(feat2 + "/feat/test_2_noisy.lmfb"));
    CHECK(read_file(feat + "/stats.nsta") == read_file(feat2 + "/stats.nsta"));

    const std::string tdir = (dir / "train").string();
    const auto tr = run({"train", "--config", cfg, "--loss", "l1", "--in", feat + "/features.tsv", "--out", tdir});
    REQUIRE_MESSAGE(tr.code == 0, tr.err);
    CHECK(fs::exists(tdir + "/generator.ckpt"));
    const auto hist = read_file(tdir + "/history.tsv");
    CHECK(std::count(hist.begin(), hist.end(), '\n') == 2 + 4);
    CHECK(read_file(tdir + "/train.effective.cfg").find("loss=l1") != std::string::npos);

    const std::string report = (dir / "report.tsv").string();
    const auto ev = run({"eval", "--config", cfg, "--in", manifest, "--out", report, "--ckpt", tdir + "/generator.ckpt",
                         "--stats", feat + "/stats.nsta"});
    REQUIRE_MESSAGE(ev.code == 0, ev.err);
    std::istringstream rs(read_file(report));
    std::size_t rows = 0;
    for (std::string line; std::getline(rs, line);) rows += !line.empty() && line[0] != '#' && line[0] != 'i';
    CHECK(rows == 4);
    CHECK(fs::exists(report + ".effective.cfg"));

    const std::string one = feat + "/feat/test_1_noisy.lmfb";
    REQUIRE(run({"enhance", "--in", one, "--ckpt", tdir + "/generator.ckpt", "--out", (dir / "e.lmfb").string()})
                .code == 0);
    const auto enh = dsp::load_features(dir / "e.lmfb");
    CHECK(enh.n_frames == dsp::load_features(one).n_frames);
    CHECK(enh.n_channels == 1);
    CHECK(run({"enhance", "--in", data + "/wav/test_1_noisy.wav", "--ckpt", tdir + "/generator.ckpt", "--out",
               (dir / "e.wav").string()})
              .code == cli::kExitFailure);

    REQUIRE(run({"export-hybrid", "--in", one, "--ckpt", tdir + "/generator.ckpt", "--out", (dir / "h.lmfb").string()})
                .code == 0);
    const auto hyb = dsp::load_features(dir / "h.lmfb");
    CHECK(hyb.n_channels == 3);
    CHECK(hyb.channel(0).values == enh.values);

    // Full 128-bin features for the image.
    const std::string full = (dir / "full").string();
    REQUIRE(run({"featurize", "--in", manifest, "--out", full}).code == 0);
    const std::string pgm = (dir / "s.pgm").string();
    REQUIRE(run({"render", "--in", full + "/feat/test_0_noisy.lmfb", "--out", pgm}).code == 0);
    const auto img = read_file(pgm);
    const auto frames = dsp::load_features(full + "/feat/test_0_noisy.lmfb").n_frames;
    CHECK(img.rfind("P5\n" + std::to_string(frames) + " 128\n255\n", 0) == 0);

    // Test-only manifests cannot fit statistics.
    testing::TempDir only_test("cli_test_only");
    REQUIRE(run({"synth", "--config", cfg, "--split", "test", "--count", "1", "--out", only_test.path().string()})
                .code == 0);
    const auto no_stats = run({"featurize", "--config", cfg, "--in", (only_test / "manifest.tsv").string(), "--out",
                               (only_test / "f").string()});
    CHECK(no_stats.code == cli::kExitFailure);
    CHECK(no_stats.err.find("--stats") != std::string::npos);
  }
}
