#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fsegan/models/params.hpp"

namespace fsegan::train {

enum class AdversarialKind { kBce, kLsgan, kNone };

std::string to_string(AdversarialKind kind);
/// Accepts "gan"/"bce", "lsgan", and "l1"/"none".
AdversarialKind parse_adversarial_kind(const std::string& text);

struct GanLossConfig {
  AdversarialKind kind = AdversarialKind::kBce;
  double l1_weight = 100.0;

  bool adversarial() const { return kind != AdversarialKind::kNone; }
};

/// Ordered key=value pairs. '#' starts a comment; blank lines are skipped.
using KeyValues = std::vector<std::pair<std::string, std::string>>;

KeyValues parse_key_values(const std::string& text);
KeyValues load_key_values(const std::string& path);
std::string format_key_values(const KeyValues& kv);

struct TrainConfig {
  models::ModelConfig generator = models::fsegan_miniature();
  GanLossConfig loss;
  int batch_size = 8;
  int max_steps = 2000;
  int d_steps_per_g = 1;
  int eval_every = 100;
  int patience = 5;
  std::uint64_t seed = 1;
  double lr_g = 2e-4;
  double lr_d = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double train_overlap = 0.5;

  /// Discriminator matching the generator's family and input geometry.
  models::ModelConfig discriminator() const;

  /// Applies one key; returns false for keys this struct does not own.
  /// Malformed values throw std::invalid_argument.
  bool set(const std::string& key, const std::string& value);
  KeyValues to_key_values() const;
  void validate() const;
};

}  // namespace fsegan::train
