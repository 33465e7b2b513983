#include "fsegan/synth/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "fsegan/common/binary_io.hpp"
#include "fsegan/common/rng.hpp"

namespace fsegan::synth {

namespace {

constexpr std::uint64_t kTestSplitSalt = 0x7E57;

/// Convolves and drops the first `offset` samples so the output starts at
/// the direct path.
dsp::AudioClip reverberate_aligned(const dsp::AudioClip& mono, const Rir& rir, std::size_t offset) {
  dsp::AudioClip out;
  out.sample_rate = mono.sample_rate;
  for (const auto& taps : rir.taps) {
    const auto full = convolve_full(mono.channels[0], taps);
    std::vector<float> ch(mono.length(), 0.0f);
    for (std::size_t i = 0; i < ch.size() && offset + i < full.size(); ++i) {
      ch[i] = static_cast<float>(full[offset + i]);
    }
    out.channels.push_back(std::move(ch));
  }
  return out;
}

}  // namespace

UtterancePair build_pair(std::uint64_t master_seed, std::uint64_t index, Split split,
                         const NoiseBank& noise_bank, const PairOptions& options,
                         PairComponents* components) {
  if (noise_bank.empty()) throw std::invalid_argument("noise bank is empty");
  // Test rows draw from a salted master so index i never repeats train speech.
  const std::uint64_t split_master = split == Split::kTrain ? master_seed : hash_seed(master_seed, kTestSplitSalt);
  const std::uint64_t seed = hash_seed(split_master, index);
  Rng rng(seed);

  const double duration = rng.uniform(options.min_duration_s, options.max_duration_s);
  dsp::AudioClip clean = synth_clean_utterance(rng.next_u64(), duration);

  const RoomConfig room = sample_room(rng.next_u64(), split);
  const Rir speech_rir = rir_image_source(room, room.speech_pos, options.max_order);
  const Rir noise_rir = rir_image_source(room, room.noise_pos, options.max_order);

  const NoiseSource& source = noise_bank[rng.below(noise_bank.size())];
  Rng noise_rng = rng.fork(0x4015E);
  const dsp::AudioClip noise = render_noise(source, clean.length(), noise_rng);

  dsp::AudioClip speech = reverberate_aligned(clean, speech_rir, speech_rir.direct_delay);
  const dsp::AudioClip noise_rev = reverberate_aligned(noise, noise_rir, speech_rir.direct_delay);

  const double level = pooled_rms(clean) / pooled_rms(speech);
  for (auto& ch : speech.channels) {
    for (auto& v : ch) v = static_cast<float>(v * level);
  }

  const double snr = options.snr_override_db ? *options.snr_override_db : sample_snr(options.snr, split, rng);
  dsp::AudioClip noisy = mix_at_snr(speech, noise_rev, snr);

  double peak = 0.0;
  for (const auto& ch : noisy.channels) {
    for (float v : ch) peak = std::max(peak, static_cast<double>(std::abs(v)));
  }
  if (peak > 0.99) {
    const double g = 0.99 / peak;
    for (auto* clip : {&noisy, &clean}) {
      for (auto& ch : clip->channels) {
        for (auto& v : ch) v = static_cast<float>(v * g);
      }
    }
  }
  for (auto& ch : noisy.channels) {
    for (auto& v : ch) v = std::clamp(v, -1.0f, 1.0f);
  }
  if (components) {
    const double g = snr_gain(speech, noise_rev, snr) * (peak > 0.99 ? 0.99 / peak : 1.0);
    const double s = peak > 0.99 ? 0.99 / peak : 1.0;
    components->speech = speech;
    components->noise = noise_rev;
    for (auto& ch : components->speech.channels) {
      for (auto& v : ch) v = static_cast<float>(v * s);
    }
    for (auto& ch : components->noise.channels) {
      for (auto& v : ch) v = static_cast<float>(v * g);
    }
  }

  UtterancePair pair;
  pair.noisy = std::move(noisy);
  pair.clean = std::move(clean);
  pair.snr_db = snr;
  pair.room_id = room.room_id;
  pair.seed = seed;
  return pair;
}

std::string format_manifest(const std::vector<ManifestEntry>& entries) {
  std::string out = "# index\tsplit\tseed\tsnr_db\troom_id\tnoisy\tclean\n";
  char buf[64];
  for (const auto& e : entries) {
    std::snprintf(buf, sizeof(buf), "%.4f", e.snr_db);
    out += std::to_string(e.index) + '\t' + to_string(e.split) + '\t' + std::to_string(e.seed) + '\t' + buf +
           '\t' + std::to_string(e.room_id) + '\t' + e.noisy + '\t' + e.clean + '\n';
  }
  return out;
}

std::vector<ManifestEntry> parse_manifest(const std::string& text) {
  std::vector<ManifestEntry> entries;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() != 7) {
      throw std::runtime_error("manifest line " + std::to_string(line_no) + ": expected 7 fields, got " +
                               std::to_string(fields.size()));
    }
    try {
      ManifestEntry e;
      e.index = std::stoull(fields[0]);
      e.split = parse_split(fields[1]);
      e.seed = std::stoull(fields[2]);
      e.snr_db = std::stod(fields[3]);
      e.room_id = std::stoi(fields[4]);
      e.noisy = fields[5];
      e.clean = fields[6];
      entries.push_back(std::move(e));
    } catch (const std::logic_error& err) {
      throw std::runtime_error("manifest line " + std::to_string(line_no) + ": " + err.what());
    }
  }
  return entries;
}

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_file(path));
}

}  // namespace fsegan::synth
