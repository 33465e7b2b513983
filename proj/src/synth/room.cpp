#include "fsegan/synth/room.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fsegan/common/rng.hpp"

namespace fsegan::synth {

namespace {

constexpr double kWallMargin = 0.5;
constexpr std::uint64_t kCatalogSeed = 0x7E57C47A106ULL;
constexpr double kT60HighpassHz = 100.0;

// Second-order Butterworth high-pass (bilinear transform), in place.
void butterworth_highpass(std::vector<double>& x, double cutoff_hz, int sample_rate) {
  const double w = 2.0 * std::numbers::pi * cutoff_hz / sample_rate;
  const double alpha = std::sin(w) / std::numbers::sqrt2;
  const double c = std::cos(w);
  const double a0 = 1.0 + alpha;
  const double b0 = (1.0 + c) / 2.0 / a0, b1 = -(1.0 + c) / a0, b2 = b0;
  const double a1 = -2.0 * c / a0, a2 = (1.0 - alpha) / a0;
  double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
  for (auto& v : x) {
    const double y = b0 * v + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
    x2 = x1;
    x1 = v;
    y2 = y1;
    y1 = y;
    v = y;
  }
}

struct DimRange {
  double lo[3];
  double hi[3];
};

// Test dimensions start where training dimensions stop.
constexpr DimRange kTrainDims{{3.0, 3.0, 2.4}, {7.0, 5.0, 3.0}};
constexpr DimRange kTestDims{{7.5, 5.5, 3.2}, {9.5, 7.0, 3.8}};

Vec3 random_point(Rng& rng, const Vec3& dims, double z_lo, double z_hi) {
  return {rng.uniform(kWallMargin, dims.x - kWallMargin), rng.uniform(kWallMargin, dims.y - kWallMargin),
          rng.uniform(std::min(z_lo, dims.z - kWallMargin), std::min(z_hi, dims.z - kWallMargin))};
}

RoomConfig draw_room(Rng& rng, const DimRange& range, double t60_lo, double t60_hi) {
  RoomConfig room;
  room.dims = {rng.uniform(range.lo[0], range.hi[0]), rng.uniform(range.lo[1], range.hi[1]),
               rng.uniform(range.lo[2], range.hi[2])};
  // Keep Sabine absorption below 0.95 so every draw is physically valid.
  const double t60_min = 0.161 * room.volume() / (room.surface() * 0.95);
  room.t60 = std::max(rng.uniform(t60_lo, t60_hi), t60_min);

  const Vec3 centre = random_point(rng, room.dims, 1.0, 1.8);
  const double spacing = rng.uniform(0.05, 0.3);
  const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double dx = 0.5 * spacing * std::cos(angle);
  const double dy = 0.5 * spacing * std::sin(angle);
  room.mic_l = {centre.x - dx, centre.y - dy, centre.z};
  room.mic_r = {centre.x + dx, centre.y + dy, centre.z};

  // Sources at least 0.5 m from the array centre and from each other.
  do {
    room.speech_pos = random_point(rng, room.dims, 1.2, 1.9);
  } while (distance(room.speech_pos, centre) < 0.5);
  do {
    room.noise_pos = random_point(rng, room.dims, 0.3, 2.2);
  } while (distance(room.noise_pos, centre) < 0.5 || distance(room.noise_pos, room.speech_pos) < 0.5);
  return room;
}

}  // namespace

std::string to_string(Split split) { return split == Split::kTrain ? "train" : "test"; }

Split parse_split(const std::string& text) {
  if (text == "train") return Split::kTrain;
  if (text == "test") return Split::kTest;
  throw std::invalid_argument("unknown split '" + text + "' (expected train or test)");
}

double distance(const Vec3& a, const Vec3& b) {
  const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

bool RoomConfig::contains(const Vec3& p) const {
  return p.x > 0.0 && p.x < dims.x && p.y > 0.0 && p.y < dims.y && p.z > 0.0 && p.z < dims.z;
}

void RoomConfig::validate() const {
  if (!(dims.x > 0 && dims.y > 0 && dims.z > 0)) throw std::invalid_argument("room dimensions must be positive");
  if (!(t60 >= 0.1 && t60 <= 1.0)) throw std::invalid_argument("t60 must lie in [0.1, 1.0]");
  for (const Vec3* p : {&speech_pos, &noise_pos, &mic_l, &mic_r}) {
    if (!contains(*p)) throw std::invalid_argument("position outside the room");
  }
  const double sep = distance(mic_l, mic_r);
  if (sep < 0.05 - 1e-12 || sep > 0.3 + 1e-12) {
    throw std::invalid_argument("microphone separation must lie in [0.05, 0.3] m");
  }
}

RoomConfig sample_room(std::uint64_t seed, Split split) {
  if (split == Split::kTrain) {
    Rng rng(hash_seed(seed, 0x7A1));
    RoomConfig room = draw_room(rng, kTrainDims, 0.12, 1.0);
    room.split = Split::kTrain;
    room.room_id = kTestCatalogSize + static_cast<int>(seed % 1000000);
    return room;
  }
  const auto index = static_cast<int>(seed % kTestCatalogSize);
  Rng rng(hash_seed(kCatalogSeed, static_cast<std::uint64_t>(index)));
  RoomConfig room = draw_room(rng, kTestDims, 0.2, 0.9);
  room.split = Split::kTest;
  room.room_id = index;
  return room;
}

double t60_to_absorption(double t60, const Vec3& dims) {
  if (!(t60 > 0.0)) throw std::invalid_argument("t60 must be positive");
  const double volume = dims.x * dims.y * dims.z;
  const double surface = 2.0 * (dims.x * dims.y + dims.x * dims.z + dims.y * dims.z);
  const double alpha = 0.161 * volume / (surface * t60);
  if (alpha >= 1.0) throw std::invalid_argument("room too small for requested T60");
  return alpha;
}

Rir rir_image_source(const RoomConfig& room, const Vec3& source, int max_order) {
  if (max_order < 0) throw std::invalid_argument("max_order must be non-negative");
  if (!room.contains(source)) throw std::invalid_argument("source outside the room");
  if (!room.contains(room.mic_l) || !room.contains(room.mic_r)) {
    throw std::invalid_argument("microphone outside the room");
  }
  const double beta = max_order > 0 ? std::sqrt(1.0 - t60_to_absorption(room.t60, room.dims)) : 1.0;
  const double samples_per_metre = kRirSampleRate / kSpeedOfSound;

  // 1-D image coordinate along one axis: even i -> i*L + s, odd i -> (i+1)*L - s.
  auto image_coord = [](int i, double length, double s) {
    return (i % 2 == 0) ? i * length + s : (i + 1) * length - s;
  };

  struct Contribution {
    std::size_t delay;
    double amplitude;
  };
  const std::array<Vec3, 2> mics{room.mic_l, room.mic_r};
  std::array<std::vector<Contribution>, 2> contributions;
  std::size_t images = 0;
  for (int i = -max_order; i <= max_order; ++i) {
    const double ix = image_coord(i, room.dims.x, source.x);
    const int rem_i = max_order - std::abs(i);
    for (int j = -rem_i; j <= rem_i; ++j) {
      const double iy = image_coord(j, room.dims.y, source.y);
      const int rem_j = rem_i - std::abs(j);
      for (int k = -rem_j; k <= rem_j; ++k) {
        const double iz = image_coord(k, room.dims.z, source.z);
        const int order = std::abs(i) + std::abs(j) + std::abs(k);
        const double gain = std::pow(beta, order);
        ++images;
        for (std::size_t m = 0; m < 2; ++m) {
          const double d = distance({ix, iy, iz}, mics[m]);
          const auto delay = static_cast<std::size_t>(std::lround(d * samples_per_metre));
          contributions[m].push_back({delay, gain / (4.0 * std::numbers::pi * d)});
        }
      }
    }
  }

  std::size_t longest = 0;
  std::size_t direct = SIZE_MAX;
  for (std::size_t m = 0; m < 2; ++m) {
    for (const auto& c : contributions[m]) longest = std::max(longest, c.delay);
    direct = std::min(
        direct, static_cast<std::size_t>(std::lround(distance(source, mics[m]) * samples_per_metre)));
  }
  Rir rir;
  rir.image_count = images;
  rir.direct_delay = direct;
  rir.taps.assign(2, std::vector<double>(longest + 1, 0.0));
  for (std::size_t m = 0; m < 2; ++m) {
    for (const auto& c : contributions[m]) rir.taps[m][c.delay] += c.amplitude;
  }
  return rir;
}

double estimate_t60_schroeder(std::span<const double> taps, int sample_rate) {
  // Image amplitudes are all positive, so coincident late images pile up a
  // non-physical low-frequency tail; measure above it.
  std::vector<double> h(taps.begin(), taps.end());
  for (int pass = 0; pass < 2; ++pass) butterworth_highpass(h, kT60HighpassHz, sample_rate);
  std::vector<double> edc(h.size() + 1, 0.0);
  for (std::size_t i = h.size(); i-- > 0;) edc[i] = edc[i + 1] + h[i] * h[i];
  if (!(edc[0] > 0.0)) throw std::invalid_argument("impulse response has no energy");

  // Least-squares line through the EDC (in dB) between -5 and -25 dB.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (edc[i] <= 0.0) break;
    const double db = 10.0 * std::log10(edc[i] / edc[0]);
    if (db > -5.0) continue;
    if (db < -25.0) break;
    const double t = static_cast<double>(i) / sample_rate;
    sx += t;
    sy += db;
    sxx += t * t;
    sxy += t * db;
    ++n;
  }
  if (n < 2) throw std::invalid_argument("impulse response too short to estimate T60");
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return -60.0 / slope;
}

}  // namespace fsegan::synth
