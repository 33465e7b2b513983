#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "fsegan/common/rng.hpp"
#include "fsegan/dsp/features.hpp"

namespace fsegan::testing {

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("fsegan_test_" + tag + "_" + std::to_string(std::random_device{}()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::vector<double> random_values(Rng& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

inline dsp::LogMelSpectrogram random_spec(Rng& rng, std::size_t frames, std::size_t bins, std::size_t channels,
                                          double lo = -5.0, double hi = 5.0) {
  dsp::LogMelSpectrogram s(frames, bins, channels);
  for (auto& x : s.values) x = rng.uniform(lo, hi);
  return s;
}

}  // namespace fsegan::testing
