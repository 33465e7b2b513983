#include "fsegan/train/config.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>

#include "fsegan/common/binary_io.hpp"

namespace fsegan::train {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename N>
N parse_number(const std::string& key, const std::string& value) {
  N out{};
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw std::invalid_argument("bad value for " + key + ": '" + value + "'");
  }
  return out;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string to_string(AdversarialKind kind) {
  switch (kind) {
    case AdversarialKind::kBce: return "gan";
    case AdversarialKind::kLsgan: return "lsgan";
    case AdversarialKind::kNone: return "l1";
  }
  return "?";
}

AdversarialKind parse_adversarial_kind(const std::string& text) {
  if (text == "gan" || text == "bce") return AdversarialKind::kBce;
  if (text == "lsgan") return AdversarialKind::kLsgan;
  if (text == "l1" || text == "none") return AdversarialKind::kNone;
  throw std::invalid_argument("unknown loss '" + text + "' (expected gan, lsgan or l1)");
}

KeyValues parse_key_values(const std::string& text) {
  KeyValues out;
  std::size_t line_no = 0, pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    std::string line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key=value");
    }
    std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty key");
    out.emplace_back(std::move(key), trim(line.substr(eq + 1)));
  }
  return out;
}

KeyValues load_key_values(const std::string& path) { return parse_key_values(read_file(path)); }

std::string format_key_values(const KeyValues& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

models::ModelConfig TrainConfig::discriminator() const {
  models::ModelConfig d = generator;
  d.role = models::Role::kDiscriminator;
  return d;
}

bool TrainConfig::set(const std::string& key, const std::string& value) {
  auto& g = generator;
  if (key == "model") {
    const auto kind = models::parse_model_kind(value);
    if (kind != g.kind) {
      // Switching family resets the architecture to that family's defaults.
      g = kind == models::ModelKind::kFsegan ? models::fsegan_miniature() : models::segan_config();
    }
  } else if (key == "loss") {
    loss.kind = parse_adversarial_kind(value);
  } else if (key == "l1_weight") {
    loss.l1_weight = parse_number<double>(key, value);
  } else if (key == "depth") {
    g.depth = parse_number<int>(key, value);
  } else if (key == "base_channels") {
    g.base_channels = parse_number<int>(key, value);
  } else if (key == "channel_cap") {
    g.channel_cap = parse_number<int>(key, value);
  } else if (key == "input_channels") {
    g.input_channels = parse_number<int>(key, value);
  } else if (key == "patch_frames") {
    g.patch_frames = parse_number<int>(key, value);
  } else if (key == "patch_bins") {
    g.patch_bins = parse_number<int>(key, value);
  } else if (key == "filter_width") {
    g.filter_width = parse_number<int>(key, value);
  } else if (key == "window_samples") {
    g.window_samples = parse_number<int>(key, value);
  } else if (key == "d_layers") {
    g.d_layers = parse_number<int>(key, value);
  } else if (key == "batch" || key == "batch_size") {
    batch_size = parse_number<int>(key, value);
  } else if (key == "steps" || key == "max_steps") {
    max_steps = parse_number<int>(key, value);
  } else if (key == "d_steps_per_g") {
    d_steps_per_g = parse_number<int>(key, value);
  } else if (key == "eval_every") {
    eval_every = parse_number<int>(key, value);
  } else if (key == "patience") {
    patience = parse_number<int>(key, value);
  } else if (key == "seed") {
    seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "lr_g") {
    lr_g = parse_number<double>(key, value);
  } else if (key == "lr_d") {
    lr_d = parse_number<double>(key, value);
  } else if (key == "beta1") {
    beta1 = parse_number<double>(key, value);
  } else if (key == "beta2") {
    beta2 = parse_number<double>(key, value);
  } else if (key == "train_overlap") {
    train_overlap = parse_number<double>(key, value);
  } else {
    return false;
  }
  return true;
}

KeyValues TrainConfig::to_key_values() const {
  const auto& g = generator;
  return {{"model", models::to_string(g.kind)},
          {"loss", to_string(loss.kind)},
          {"l1_weight", format_double(loss.l1_weight)},
          {"depth", std::to_string(g.depth)},
          {"base_channels", std::to_string(g.base_channels)},
          {"channel_cap", std::to_string(g.channel_cap)},
          {"input_channels", std::to_string(g.input_channels)},
          {"patch_frames", std::to_string(g.patch_frames)},
          {"patch_bins", std::to_string(g.patch_bins)},
          {"filter_width", std::to_string(g.filter_width)},
          {"window_samples", std::to_string(g.window_samples)},
          {"d_layers", std::to_string(g.d_layers)},
          {"batch_size", std::to_string(batch_size)},
          {"max_steps", std::to_string(max_steps)},
          {"d_steps_per_g", std::to_string(d_steps_per_g)},
          {"eval_every", std::to_string(eval_every)},
          {"patience", std::to_string(patience)},
          {"seed", std::to_string(seed)},
          {"lr_g", format_double(lr_g)},
          {"lr_d", format_double(lr_d)},
          {"beta1", format_double(beta1)},
          {"beta2", format_double(beta2)},
          {"train_overlap", format_double(train_overlap)}};
}

void TrainConfig::validate() const {
  generator.validate();
  if (loss.adversarial()) discriminator().validate();
  if (loss.l1_weight < 0) throw std::invalid_argument("l1_weight must be >= 0");
  if (batch_size < 1 || max_steps < 1 || d_steps_per_g < 1 || eval_every < 1) {
    throw std::invalid_argument("batch_size, max_steps, d_steps_per_g and eval_every must be positive");
  }
  if (patience < 1) throw std::invalid_argument("patience must be >= 1");
  if (!(lr_g > 0) || !(lr_d > 0)) throw std::invalid_argument("learning rates must be positive");
  if (!(train_overlap >= 0 && train_overlap < 1)) throw std::invalid_argument("train_overlap must be in [0, 1)");
}

}  // namespace fsegan::train
