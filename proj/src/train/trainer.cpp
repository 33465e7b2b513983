#include "fsegan/train/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "fsegan/ad/losses.hpp"
#include "fsegan/ad/ops.hpp"
#include "fsegan/models/networks.hpp"

namespace fsegan::train {

namespace {

using ad::Tensor;

class NonFiniteLoss : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NonFiniteLoss(std::string("non-finite ") + what);
}

// D output on the scale the loss expects: probabilities for the BCE loss,
// raw scores (SEGAN) or probabilities (FSEGAN) for least squares.
Tensor<float> d_output(const TrainState& s, const Tensor<float>& x, const Tensor<float>& cand) {
  auto out = models::discriminator_forward(*s.d, x, cand);
  if (s.config.loss.kind == AdversarialKind::kBce && s.d->config.kind == models::ModelKind::kSegan) {
    out = ad::sigmoid(out);
  }
  return out;
}

void update(models::ModelParams<float>& params, ad::AdamState<float>& opt) {
  auto tensors = params.tensors();
  ad::adam_step<float>(tensors, opt);
}

// Restores D's trainable flag however g_step exits.
struct FreezeGuard {
  models::ModelParams<float>* params;
  explicit FreezeGuard(models::ModelParams<float>* p) : params(p) {
    if (params) params->set_trainable(false);
  }
  ~FreezeGuard() {
    if (params) params->set_trainable(true);
  }
};

void check_corpus(const TrainConfig& cfg, const WindowCorpus& corpus, const char* what) {
  const auto& g = cfg.generator;
  const ad::Shape expected =
      g.kind == models::ModelKind::kFsegan
          ? ad::Shape{static_cast<std::size_t>(g.patch_frames), static_cast<std::size_t>(g.patch_bins),
                      static_cast<std::size_t>(g.input_channels)}
          : ad::Shape{static_cast<std::size_t>(g.window_samples), static_cast<std::size_t>(g.input_channels)};
  if (corpus.noisy_shape != expected) {
    throw std::invalid_argument(std::string(what) + " windows are " + ad::shape_string(corpus.noisy_shape) +
                                ", the model expects " + ad::shape_string(expected));
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

TrainState init_state(const TrainConfig& cfg) {
  cfg.validate();
  TrainState s;
  s.config = cfg;
  s.g = models::init_params(cfg.generator, hash_seed(cfg.seed, 1));
  ad::AdamConfig g_adam{cfg.lr_g, cfg.beta1, cfg.beta2};
  s.g_opt = ad::AdamState<float>::for_params(s.g.tensors(), g_adam);
  if (cfg.loss.adversarial()) {
    s.d = models::init_params(cfg.discriminator(), hash_seed(cfg.seed, 2));
    ad::AdamConfig d_adam{cfg.lr_d, cfg.beta1, cfg.beta2};
    s.d_opt = ad::AdamState<float>::for_params(s.d->tensors(), d_adam);
  }
  return s;
}

DStepResult d_step(TrainState& state, const Batch& batch) {
  if (!state.d) throw std::logic_error("d_step called in L1-only mode");
  Tensor<float> fake;
  {
    ad::NoGradGuard frozen;
    fake = models::generator_forward(state.g, batch.noisy);
  }
  state.d->zero_grad();
  const auto real_out = d_output(state, batch.noisy, batch.clean);
  const auto fake_out = d_output(state, batch.noisy, fake);
  auto loss = state.config.loss.kind == AdversarialKind::kLsgan ? ad::lsgan_d(real_out, fake_out)
                                                                       : ad::gan_bce_d(real_out, fake_out);
  DStepResult r;
  r.loss = loss.item();
  require_finite(r.loss, "discriminator loss");
  std::size_t correct = 0;
  for (float v : real_out.data()) correct += v > 0.5f;
  for (float v : fake_out.data()) correct += v < 0.5f;
  r.accuracy = static_cast<double>(correct) / static_cast<double>(real_out.size() + fake_out.size());
  loss.backward();
  update(*state.d, state.d_opt);
  return r;
}

GStepResult g_step(TrainState& state, const Batch& batch) {
  const auto& lc = state.config.loss;
  FreezeGuard freeze(state.d ? &*state.d : nullptr);
  state.g.zero_grad();
  const auto fake = models::generator_forward(state.g, batch.noisy);
  const auto l1 = ad::l1_loss(fake, batch.clean);
  Tensor<float> total = ad::scale(l1, static_cast<float>(lc.l1_weight));
  GStepResult r;
  if (lc.adversarial()) {
    const auto out = d_output(state, batch.noisy, fake);
    const auto adv = lc.kind == AdversarialKind::kLsgan ? ad::lsgan_g(out) : ad::gan_bce_g(out);
    r.adv = adv.item();
    total = ad::add(adv, total);
  }
  r.l1 = l1.item();
  r.total = total.item();
  require_finite(r.total, "generator loss");
  total.backward();
  update(state.g, state.g_opt);
  ++state.step;
  return r;
}

double validate(const models::ModelParams<float>& g, const WindowCorpus& val, std::size_t batch_size) {
  if (val.empty()) throw std::invalid_argument("validation set is empty");
  if (batch_size == 0) batch_size = 1;
  ad::NoGradGuard no_grad;
  const std::size_t row = val.clean_stride() / val.clean_shape[0];
  double sum = 0.0;
  std::size_t count = 0;
  std::vector<std::size_t> idx;
  for (std::size_t b = 0; b < val.size(); b += batch_size) {
    idx.clear();
    for (std::size_t w = b; w < std::min(val.size(), b + batch_size); ++w) idx.push_back(w);
    const auto batch = gather_batch(val, idx);
    const auto out = models::generator_forward(g, batch.noisy);
    const auto pred = out.data();
    const auto ref = batch.clean.data();
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const std::size_t base = i * val.clean_stride();
      const std::size_t n = val.valid[idx[i]] * row;
      for (std::size_t j = 0; j < n; ++j) sum += std::abs(static_cast<double>(pred[base + j]) - ref[base + j]);
      count += n;
    }
  }
  if (count == 0) throw std::invalid_argument("validation set has no valid frames");
  return sum / static_cast<double>(count);
}

bool record_evaluation(TrainState& state, double metric, int patience) {
  if (!state.has_best || metric < state.best_metric) {
    state.has_best = true;
    state.best_metric = metric;
    state.best_step = state.step;
    state.best_g = state.g.clone();
    state.evals_since_best = 0;
  } else {
    ++state.evals_since_best;
  }
  return state.evals_since_best >= patience;
}

std::string format_history(const std::vector<HistoryRow>& rows) {
  std::string out =
      "# early-stopping metric: validation L1 on normalized features, a proxy (recognizer WER is not computed)\n"
      "step\td_loss\tadv_loss\tl1_loss\tval_metric\n";
  for (const auto& r : rows) {
    out += std::to_string(r.step) + "\t" + (r.d_loss ? fmt(*r.d_loss) : "-") + "\t" + fmt(r.adv_loss) + "\t" +
           fmt(r.l1_loss) + "\t" + (r.val_metric ? fmt(*r.val_metric) : "-") + "\n";
  }
  return out;
}

TrainResult train(const TrainConfig& cfg, const WindowCorpus& train_set, const WindowCorpus& val_set,
                  const StepObserver& observer) {
  cfg.validate();
  if (train_set.empty()) throw std::invalid_argument("training set is empty");
  if (val_set.empty()) throw std::invalid_argument("validation set is empty");
  check_corpus(cfg, train_set, "training");
  check_corpus(cfg, val_set, "validation");

  TrainState state = init_state(cfg);
  BatchStream stream(train_set.size(), static_cast<std::size_t>(cfg.batch_size), Rng(hash_seed(cfg.seed, 3)));
  TrainResult result;
  for (int step = 1; step <= cfg.max_steps; ++step) {
    const auto& windows = stream.next();
    const Batch batch = gather_batch(train_set, windows);
    HistoryRow row;
    row.step = static_cast<std::uint64_t>(step);
    try {
      if (cfg.loss.adversarial()) {
        for (int k = 0; k < cfg.d_steps_per_g; ++k) {
          const auto d = d_step(state, batch);
          row.d_loss = d.loss;
          row.d_accuracy = d.accuracy;
        }
      }
      const auto g = g_step(state, batch);
      row.adv_loss = g.adv;
      row.l1_loss = g.l1;
    } catch (const NonFiniteLoss& e) {
      std::string ids;
      for (auto w : windows) ids += (ids.empty() ? "" : ",") + std::to_string(w);
      throw std::runtime_error(std::string(e.what()) + " at step " + std::to_string(step) + " (epoch " +
                               std::to_string(stream.epoch()) + ", batch " +
                               std::to_string(stream.batch_in_epoch()) + ", windows " + ids + ")");
    }
    bool stop = false;
    if (step % cfg.eval_every == 0 || step == cfg.max_steps) {
      const double metric = validate(state.g, val_set);
      row.val_metric = metric;
      stop = record_evaluation(state, metric, cfg.patience);
    }
    result.history.push_back(row);
    if (observer) observer(row);
    result.steps_run = static_cast<std::uint64_t>(step);
    if (stop) {
      result.stopped_early = step < cfg.max_steps;
      break;
    }
  }
  result.best_g = std::move(state.best_g);
  result.best_step = state.best_step;
  result.best_metric = state.best_metric;
  return result;
}

}  // namespace fsegan::train
