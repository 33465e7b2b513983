#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fsegan/ad/adam.hpp"
#include "fsegan/common/rng.hpp"
#include "fsegan/models/params.hpp"
#include "fsegan/train/config.hpp"
#include "fsegan/train/data.hpp"

namespace fsegan::train {

struct TrainState {
  TrainConfig config;
  std::uint64_t step = 0;
  models::ModelParams<float> g;
  ad::AdamState<float> g_opt;
  std::optional<models::ModelParams<float>> d;  // absent for L1-only training
  ad::AdamState<float> d_opt;
  double best_metric = 0.0;
  std::uint64_t best_step = 0;
  bool has_best = false;
  int evals_since_best = 0;
  models::ModelParams<float> best_g;
};

/// Fresh state: G and D initialized from independent streams of cfg.seed.
TrainState init_state(const TrainConfig& cfg);

struct DStepResult {
  double loss = 0.0;
  /// Fraction of decisions on the right side of 0.5 (real high, fake low),
  /// measured on the forward pass that produced `loss`.
  double accuracy = 0.0;
};

struct GStepResult {
  double adv = 0.0;
  double l1 = 0.0;
  double total = 0.0;
};

/// One Adam step on D with G frozen.
DStepResult d_step(TrainState& state, const Batch& batch);

/// One Adam step on G minimizing adv + l1_weight * l1 with D frozen.
GStepResult g_step(TrainState& state, const Batch& batch);

/// Mean |G(noisy) - clean| over the valid rows of every window.
double validate(const models::ModelParams<float>& g, const WindowCorpus& val, std::size_t batch_size = 16);

struct HistoryRow {
  std::uint64_t step = 0;
  std::optional<double> d_loss;
  double adv_loss = 0.0;
  double l1_loss = 0.0;
  std::optional<double> val_metric;
  std::optional<double> d_accuracy;
};

std::string format_history(const std::vector<HistoryRow>& rows);

struct TrainResult {
  models::ModelParams<float> best_g;
  std::uint64_t best_step = 0;
  double best_metric = 0.0;
  std::uint64_t steps_run = 0;
  bool stopped_early = false;
  std::vector<HistoryRow> history;
};

/// Called after every step with the row just recorded.
using StepObserver = std::function<void(const HistoryRow&)>;

/// Alternates d_steps_per_g D steps and one G step on the same batch,
/// validating every eval_every steps and after the last step. Stops at
/// max_steps or after `patience` evaluations without improvement.
TrainResult train(const TrainConfig& cfg, const WindowCorpus& train_set, const WindowCorpus& val_set,
                  const StepObserver& observer = {});

/// Early-stopping bookkeeping for one evaluation; returns true to stop.
bool record_evaluation(TrainState& state, double metric, int patience);

}  // namespace fsegan::train
