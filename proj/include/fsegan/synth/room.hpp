#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fsegan::synth {

inline constexpr double kSpeedOfSound = 343.0;
inline constexpr int kRirSampleRate = 16000;
inline constexpr int kTestCatalogSize = 20;

enum class Split { kTrain, kTest };

std::string to_string(Split split);
Split parse_split(const std::string& text);

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

double distance(const Vec3& a, const Vec3& b);

/// Shoebox room with one speech source, one noise source and a stereo
/// microphone pair. Dimensions and positions are in metres.
struct RoomConfig {
  Vec3 dims;
  double t60 = 0.3;
  Vec3 speech_pos;
  Vec3 noise_pos;
  Vec3 mic_l;
  Vec3 mic_r;
  int room_id = 0;
  Split split = Split::kTrain;

  bool contains(const Vec3& p) const;
  double volume() const { return dims.x * dims.y * dims.z; }
  double surface() const { return 2.0 * (dims.x * dims.y + dims.x * dims.z + dims.y * dims.z); }

  /// Throws std::invalid_argument naming the violated invariant.
  void validate() const;
};

/// Train rooms are drawn fresh from `seed`; test rooms come from a fixed
/// 20-entry catalog (entry seed % 20) whose dimensions lie outside the
/// training range.
RoomConfig sample_room(std::uint64_t seed, Split split);

/// Sabine: alpha = 0.161 V / (S T60). Throws when alpha would reach 1.
double t60_to_absorption(double t60, const Vec3& dims);

struct Rir {
  std::vector<std::vector<double>> taps;  // one sequence per microphone
  std::size_t direct_delay = 0;           // earliest direct-path tap over all mics
  std::size_t image_count = 0;            // images contributing per microphone

  std::size_t length() const { return taps.empty() ? 0 : taps.front().size(); }
};

/// Image-source response from `source` to both microphones of `room`.
///
/// Images are indexed by an integer lattice (i, j, k); image (i, j, k) has
/// undergone |i| + |j| + |k| wall reflections and contributes
/// (1 - alpha)^(order / 2) / (4 pi d) at sample round(d / c * fs). Images with
/// order above `max_order` are skipped. Alpha comes from the room's T60 and
/// is only needed when max_order > 0.
Rir rir_image_source(const RoomConfig& room, const Vec3& source, int max_order);

/// Backward-integrated energy decay, fitted linearly between -5 dB and
/// -25 dB and extrapolated to -60 dB. The response is first high-passed at
/// 100 Hz (4th-order Butterworth) to drop the DC build-up that positive-only
/// image sums accumulate late in the tail.
double estimate_t60_schroeder(std::span<const double> taps, int sample_rate = kRirSampleRate);

}  // namespace fsegan::synth
