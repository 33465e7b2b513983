#include "fsegan/cli/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "CLI11.hpp"
#include "fsegan/common/binary_io.hpp"
#include "fsegan/dsp/audio.hpp"
#include "fsegan/dsp/features.hpp"
#include "fsegan/eval/evaluate.hpp"
#include "fsegan/eval/metrics.hpp"
#include "fsegan/models/params.hpp"
#include "fsegan/synth/corpus.hpp"
#include "fsegan/synth/signals.hpp"
#include "fsegan/train/config.hpp"
#include "fsegan/train/trainer.hpp"

namespace fsegan::cli {

namespace fs = std::filesystem;

namespace {

/// Raised for bad settings; reported as a usage error.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad values found while reading settings are the caller's fault.
template <typename F>
auto as_usage(F&& f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

// Flag name -> settings key. Flags are long-form only.
const std::map<std::string, std::string> kFlagKeys = {
    {"config", "config"}, {"seed", "seed"},   {"out", "out"},     {"split", "split"}, {"count", "count"},
    {"model", "model"},   {"loss", "loss"},   {"depth", "depth"}, {"batch", "batch_size"},
    {"steps", "max_steps"}, {"ckpt", "ckpt"}, {"in", "in"},       {"stats", "stats"}, {"val", "val"}};

struct Command {
  std::string name;
  std::string help;
  std::vector<std::string> flags;
  bool out_is_dir;
};

const std::vector<Command> kCommands = {
    {"synth", "Synthesize a paired noisy/clean corpus", {"config", "seed", "out", "split", "count"}, true},
    {"featurize", "Compute normalized log-Mel features for a manifest", {"config", "in", "out", "stats"}, true},
    {"train",
     "Train an enhancement generator",
     {"config", "seed", "out", "in", "val", "model", "loss", "depth", "batch", "steps", "ckpt"},
     true},
    {"enhance", "Enhance one feature file or waveform", {"config", "in", "out", "ckpt"}, false},
    {"eval", "Score a test manifest with or without enhancement", {"config", "in", "out", "ckpt", "stats", "split"}, false},
    {"render", "Render a feature file as a PGM image", {"config", "in", "out"}, false},
    {"export-hybrid", "Stack enhanced and noisy features into one file", {"config", "in", "out", "ckpt"}, false},
};

// Settings each command reads, with defaults ("" = unset).
using Settings = std::vector<std::pair<std::string, std::string>>;

Settings front_end_defaults() {
  return {{"n_mels", "128"}, {"f_min", "125"}, {"f_max", "7500"}, {"fft_size", "512"}, {"hop", "160"}};
}

Settings defaults_for(const std::string& cmd) {
  Settings s;
  auto add = [&](Settings more) { s.insert(s.end(), more.begin(), more.end()); };
  if (cmd == "synth") {
    add({{"out", ""}, {"seed", "1"}, {"split", "train"}, {"count", "8"}, {"first_index", "0"},
         {"min_duration_s", "1.5"}, {"max_duration_s", "3.0"}, {"max_order", "30"}});
  } else if (cmd == "featurize") {
    add({{"in", ""}, {"out", ""}, {"stats", ""}});
    add(front_end_defaults());
  } else if (cmd == "train") {
    add({{"in", ""}, {"val", ""}, {"out", ""}, {"ckpt", ""}, {"val_fraction", "0.1"}});
    add(train::TrainConfig{}.to_key_values());
  } else if (cmd == "enhance" || cmd == "export-hybrid") {
    add({{"in", ""}, {"out", ""}, {"ckpt", ""}});
  } else if (cmd == "eval") {
    add({{"in", ""}, {"out", ""}, {"ckpt", "none"}, {"stats", ""}, {"split", "test"}});
    auto fe = front_end_defaults();
    fe.erase(fe.begin());  // the Mel count comes from the stats file
    add(fe);
  } else if (cmd == "render") {
    add({{"in", ""}, {"out", ""}, {"channel", "0"}});
  }
  return s;
}

bool known_anywhere(const std::string& key) {
  if (key == "config" || key == "batch" || key == "steps") return true;
  for (const auto& c : kCommands) {
    for (const auto& [k, v] : defaults_for(c.name)) {
      if (k == key) return true;
    }
  }
  return false;
}

class Options {
 public:
  explicit Options(Settings s) : s_(std::move(s)) {}

  bool has(const std::string& key) const {
    return std::any_of(s_.begin(), s_.end(), [&](const auto& kv) { return kv.first == key; });
  }

  void set(const std::string& key, const std::string& value) {
    for (auto& kv : s_) {
      if (kv.first == key) {
        kv.second = value;
        return;
      }
    }
    throw UsageError("setting '" + key + "' does not apply here");
  }

  const std::string& str(const std::string& key) const {
    for (const auto& kv : s_) {
      if (kv.first == key) return kv.second;
    }
    throw std::logic_error("no setting " + key);
  }

  const std::string& required(const std::string& key) const {
    const auto& v = str(key);
    if (v.empty()) throw UsageError("missing required setting --" + key);
    return v;
  }

  template <typename N>
  N number(const std::string& key) const {
    const auto& v = str(key);
    N out{};
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
      throw UsageError("bad value for " + key + ": '" + v + "'");
    }
    return out;
  }

  const Settings& all() const { return s_; }

 private:
  Settings s_;
};

dsp::FrontEnd front_end(const Options& o, std::optional<std::size_t> n_mels = std::nullopt) {
  dsp::FrontEnd fe;
  fe.stft.fft_size = o.number<std::size_t>("fft_size");
  fe.stft.window_len = fe.stft.fft_size;
  fe.stft.hop = o.number<std::size_t>("hop");
  fe.mel.n_filters = n_mels ? *n_mels : o.number<std::size_t>("n_mels");
  fe.mel.f_min = o.number<double>("f_min");
  fe.mel.f_max = o.number<double>("f_max");
  as_usage([&] { fe.stft.validate(); });
  return fe;
}

void write_effective(const Command& cmd, const Options& o, const std::string& extra = "") {
  const fs::path out = o.required("out");
  const fs::path target = cmd.out_is_dir ? out / (cmd.name + ".effective.cfg") : fs::path(out.string() + ".effective.cfg");
  std::string text = "# " + version_line() + "\n# command: " + cmd.name + "\n";
  for (const auto& [k, v] : o.all()) text += k + "=" + v + "\n";
  text += extra;
  atomic_write_file(target, text);
}

// ---- feature index: "index<TAB>split<TAB>noisy<TAB>clean", paths relative.

struct FeatureEntry {
  std::uint64_t index;
  synth::Split split;
  std::string noisy, clean;
};

std::string format_feature_index(const std::vector<FeatureEntry>& entries) {
  std::string out = "# index\tsplit\tnoisy\tclean\n";
  for (const auto& e : entries) {
    out += std::to_string(e.index) + "\t" + synth::to_string(e.split) + "\t" + e.noisy + "\t" + e.clean + "\n";
  }
  return out;
}

std::vector<FeatureEntry> load_feature_index(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::vector<FeatureEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> f;
    std::istringstream ls(line);
    for (std::string field; std::getline(ls, field, '\t');) f.push_back(field);
    if (f.size() != 4) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected 4 tab-separated fields");
    }
    entries.push_back({std::stoull(f[0]), synth::parse_split(f[1]), f[2], f[3]});
  }
  if (entries.empty()) throw std::runtime_error(path.string() + ": no feature entries");
  return entries;
}

bool is_wav_path(const fs::path& p) { return p.extension() == ".wav"; }

// ---- subcommands

int cmd_synth(const Command& cmd, const Options& o, std::ostream& out) {
  const fs::path dir = o.required("out");
  const auto split = as_usage([&] { return synth::parse_split(o.str("split")); });
  const auto seed = o.number<std::uint64_t>("seed");
  const auto count = o.number<std::uint64_t>("count");
  const auto first = o.number<std::uint64_t>("first_index");
  synth::PairOptions opts;
  opts.min_duration_s = o.number<double>("min_duration_s");
  opts.max_duration_s = o.number<double>("max_duration_s");
  opts.max_order = o.number<int>("max_order");
  if (count == 0) throw UsageError("--count must be positive");

  fs::create_directories(dir / "wav");
  const auto bank = synth::default_noise_bank();
  std::vector<synth::ManifestEntry> entries;
  for (std::uint64_t i = first; i < first + count; ++i) {
    const auto pair = synth::build_pair(seed, i, split, bank, opts);
    const std::string stem = "wav/" + synth::to_string(split) + "_" + std::to_string(i);
    dsp::save_wav(pair.noisy, dir / (stem + "_noisy.wav"));
    dsp::save_wav(pair.clean, dir / (stem + "_clean.wav"));
    entries.push_back({i, split, pair.seed, pair.snr_db, pair.room_id, stem + "_noisy.wav", stem + "_clean.wav"});
  }
  // Merge with an existing manifest: rows of other splits or outside this
  // index range survive, the rest are replaced.
  const fs::path manifest_path = dir / "manifest.tsv";
  if (fs::exists(manifest_path)) {
    for (const auto& e : synth::load_manifest(manifest_path)) {
      if (e.split != split || e.index < first || e.index >= first + count) entries.push_back(e);
    }
  }
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    return std::pair(a.split, a.index) < std::pair(b.split, b.index);
  });
  atomic_write_file(manifest_path, synth::format_manifest(entries));
  write_effective(cmd, o);
  out << "synth: wrote " << count << " " << synth::to_string(split) << " pairs to " << dir.string() << "\n";
  return kExitOk;
}

int cmd_featurize(const Command& cmd, const Options& o, std::ostream& out) {
  const fs::path manifest_path = o.required("in");
  const fs::path dir = o.required("out");
  const auto entries = synth::load_manifest(manifest_path);
  if (entries.empty()) throw std::runtime_error(manifest_path.string() + ": manifest is empty");
  const fs::path base = manifest_path.parent_path();
  const auto fe = front_end(o);

  std::vector<dsp::LogMelSpectrogram> noisy, clean;
  for (const auto& e : entries) {
    noisy.push_back(fe(dsp::load_wav(base / e.noisy)));
    clean.push_back(fe(dsp::load_wav(base / e.clean)));
  }

  fs::create_directories(dir / "feat");
  dsp::NormStats stats;
  std::string stats_note;
  if (!o.str("stats").empty()) {
    stats = dsp::load_stats(o.str("stats"));
    stats_note = "# stats: loaded from " + o.str("stats") + "\n";
  } else {
    std::vector<dsp::LogMelSpectrogram> train_noisy;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (entries[i].split == synth::Split::kTrain) train_noisy.push_back(noisy[i]);
    }
    if (train_noisy.empty()) {
      throw std::runtime_error("manifest has no train rows; featurizing test data needs --stats from a train run");
    }
    stats = dsp::fit_norm_stats(train_noisy);
    dsp::save_stats(stats, dir / "stats.nsta");
    stats_note = "# stats: fitted on noisy train features, written to stats.nsta\n";
  }
  if (stats.n_bins() != fe.mel.n_filters) {
    throw std::runtime_error("stats have " + std::to_string(stats.n_bins()) + " bins but n_mels is " +
                             std::to_string(fe.mel.n_filters));
  }

  std::vector<FeatureEntry> index;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    const std::string stem = "feat/" + synth::to_string(e.split) + "_" + std::to_string(e.index);
    dsp::save_features(dsp::normalize(noisy[i], stats), dir / (stem + "_noisy.lmfb"));
    dsp::save_features(dsp::normalize(clean[i], stats), dir / (stem + "_clean.lmfb"));
    index.push_back({e.index, e.split, stem + "_noisy.lmfb", stem + "_clean.lmfb"});
  }
  atomic_write_file(dir / "features.tsv", format_feature_index(index));
  write_effective(cmd, o, stats_note);
  out << "featurize: wrote " << index.size() << " feature pairs to " << dir.string() << "\n";
  return kExitOk;
}

struct LoadedSet {
  std::vector<dsp::LogMelSpectrogram> noisy_feat, clean_feat;
  std::vector<dsp::AudioClip> noisy_wav, clean_wav;
  std::size_t size() const { return std::max(noisy_feat.size(), noisy_wav.size()); }
};

// Loads the rows of `path` (a feature index or manifest); with `only`, rows
// of other splits are skipped.
LoadedSet load_set(const fs::path& path, models::ModelKind kind, std::optional<synth::Split> only = std::nullopt) {
  LoadedSet s;
  const fs::path base = path.parent_path();
  if (kind == models::ModelKind::kFsegan) {
    for (const auto& e : load_feature_index(path)) {
      if (only && e.split != *only) continue;
      s.noisy_feat.push_back(dsp::load_features(base / e.noisy));
      s.clean_feat.push_back(dsp::load_features(base / e.clean));
    }
  } else {
    for (const auto& e : synth::load_manifest(path)) {
      if (only && e.split != *only) continue;
      s.noisy_wav.push_back(dsp::load_wav(base / e.noisy));
      s.clean_wav.push_back(dsp::load_wav(base / e.clean));
    }
  }
  if (s.size() == 0) throw std::runtime_error(path.string() + ": no usable rows");
  return s;
}

// Moves the trailing `n` utterances of `from` into a new set.
LoadedSet split_tail(LoadedSet& from, std::size_t n) {
  LoadedSet tail;
  auto move_tail = [n](auto& src, auto& dst) {
    if (src.empty()) return;
    dst.assign(std::make_move_iterator(src.end() - static_cast<std::ptrdiff_t>(n)), std::make_move_iterator(src.end()));
    src.resize(src.size() - n);
  };
  move_tail(from.noisy_feat, tail.noisy_feat);
  move_tail(from.clean_feat, tail.clean_feat);
  move_tail(from.noisy_wav, tail.noisy_wav);
  move_tail(from.clean_wav, tail.clean_wav);
  return tail;
}

train::WindowCorpus windows(const LoadedSet& s, const train::TrainConfig& cfg, double overlap) {
  const auto& g = cfg.generator;
  if (g.kind == models::ModelKind::kFsegan) {
    for (const auto& f : s.noisy_feat) {
      if (!f.normalized) throw std::runtime_error("training features must be normalized (run featurize)");
      if (f.n_bins != static_cast<std::size_t>(g.patch_bins)) {
        throw std::runtime_error("features have " + std::to_string(f.n_bins) + " bins but patch_bins is " +
                                 std::to_string(g.patch_bins));
      }
    }
    return train::windows_from_features(s.noisy_feat, s.clean_feat, static_cast<std::size_t>(g.patch_frames),
                                        overlap);
  }
  return train::windows_from_audio(s.noisy_wav, s.clean_wav, static_cast<std::size_t>(g.window_samples), overlap);
}

int cmd_train(const Command& cmd, const Options& o, std::ostream& out) {
  train::TrainConfig cfg;
  as_usage([&] {
    for (const auto& [k, v] : cfg.to_key_values()) cfg.set(k, o.str(k));
    cfg.validate();
  });
  const fs::path dir = o.required("out");
  const fs::path ckpt = o.str("ckpt").empty() ? dir / "generator.ckpt" : fs::path(o.str("ckpt"));
  const auto kind = cfg.generator.kind;

  LoadedSet train_set = load_set(o.required("in"), kind, synth::Split::kTrain);
  LoadedSet val_set;
  std::string val_note;
  if (!o.str("val").empty()) {
    val_set = load_set(o.str("val"), kind);
    val_note = "# validation: " + o.str("val") + "\n";
  } else {
    const double frac = o.number<double>("val_fraction");
    if (!(frac > 0 && frac < 1)) throw UsageError("val_fraction must lie in (0, 1)");
    const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(frac * static_cast<double>(train_set.size())));
    if (n >= train_set.size()) throw std::runtime_error("too few utterances to hold out a validation split");
    val_set = split_tail(train_set, n);
    val_note = "# validation: last " + std::to_string(n) + " utterances of the training input\n";
  }
  const auto train_windows = windows(train_set, cfg, cfg.train_overlap);
  const auto val_windows = windows(val_set, cfg, 0.0);

  fs::create_directories(dir);
  if (ckpt.has_parent_path()) fs::create_directories(ckpt.parent_path());
  out << "train: " << train_windows.size() << " training windows, " << val_windows.size()
      << " validation windows, " << models::to_string(kind) << " loss=" << train::to_string(cfg.loss.kind) << "\n";
  const auto result = train::train(cfg, train_windows, val_windows, [&](const train::HistoryRow& r) {
    if (!r.val_metric) return;
    out << "step " << r.step << " l1 " << r.l1_loss << " adv " << r.adv_loss;
    if (r.d_loss) out << " d " << *r.d_loss;
    out << " val " << *r.val_metric << "\n";
    out.flush();
  });
  models::save_checkpoint(result.best_g, ckpt);
  atomic_write_file(dir / "history.tsv", train::format_history(result.history));
  write_effective(cmd, o, val_note + "# checkpoint: " + ckpt.string() + "\n");
  out << "train: best validation L1 " << result.best_metric << " at step " << result.best_step << " of "
      << result.steps_run << (result.stopped_early ? " (early stop)" : "") << ", checkpoint " << ckpt.string()
      << "\n";
  return kExitOk;
}

int cmd_enhance(const Command& cmd, const Options& o, std::ostream& out) {
  const fs::path in = o.required("in");
  const fs::path dst = o.required("out");
  const auto g = models::load_checkpoint(o.required("ckpt"));
  if (g.config.kind == models::ModelKind::kFsegan) {
    if (is_wav_path(in)) throw std::runtime_error("domain mismatch: spectral (fsegan) checkpoint fed a waveform");
    dsp::save_features(eval::enhance_features(g, dsp::load_features(in)), dst);
  } else {
    if (!is_wav_path(in)) throw std::runtime_error("domain mismatch: waveform (segan) checkpoint fed spectral features");
    dsp::save_wav(eval::enhance_waveform(g, dsp::load_wav(in)), dst);
  }
  write_effective(cmd, o);
  out << "enhance: wrote " << dst.string() << "\n";
  return kExitOk;
}

int cmd_eval(const Command& cmd, const Options& o, std::ostream& out) {
  const fs::path manifest_path = o.required("in");
  const fs::path dst = o.required("out");
  eval::EvalSetup setup;
  setup.stats = dsp::load_stats(o.required("stats"));
  setup.front_end = front_end(o, setup.stats.n_bins());
  const auto& ckpt = o.str("ckpt");
  if (!ckpt.empty() && ckpt != "none") setup.generator = models::load_checkpoint(ckpt);
  const auto split = as_usage([&] { return synth::parse_split(o.str("split")); });
  std::vector<synth::ManifestEntry> entries;
  for (const auto& e : synth::load_manifest(manifest_path)) {
    if (e.split == split) entries.push_back(e);
  }
  if (entries.empty()) {
    throw std::runtime_error(manifest_path.string() + ": no " + synth::to_string(split) + " rows");
  }
  const auto report = eval::evaluate_corpus(setup, entries, manifest_path.parent_path());
  atomic_write_file(dst, eval::format_report(report));
  write_effective(cmd, o);
  out << "eval: " << report.rows.size() << " utterances, mean LSD " << report.mean_lsd_db() << " dB (noisy "
      << report.mean_baseline_lsd_db() << " dB)";
  if (!report.missing.empty()) out << ", " << report.missing.size() << " missing files";
  out << "\n";
  return kExitOk;
}

int cmd_render(const Command& cmd, const Options& o, std::ostream& out) {
  const auto spec = dsp::load_features(o.required("in"));
  const auto ch = o.number<std::size_t>("channel");
  eval::spectrogram_image(spec.channel(ch), o.required("out"));
  write_effective(cmd, o);
  out << "render: wrote " << o.str("out") << " (" << spec.n_frames << "x" << spec.n_bins << ")\n";
  return kExitOk;
}

int cmd_export_hybrid(const Command& cmd, const Options& o, std::ostream& out) {
  const auto noisy = dsp::load_features(o.required("in"));
  const auto g = models::load_checkpoint(o.required("ckpt"));
  const auto enhanced = eval::enhance_features(g, noisy);
  eval::hybrid_export(noisy, enhanced, o.required("out"));
  write_effective(cmd, o);
  out << "export-hybrid: wrote " << o.str("out") << " (3 channels, " << noisy.n_frames << " frames)\n";
  return kExitOk;
}

int dispatch(const Command& cmd, const Options& o, std::ostream& out) {
  if (cmd.name == "synth") return cmd_synth(cmd, o, out);
  if (cmd.name == "featurize") return cmd_featurize(cmd, o, out);
  if (cmd.name == "train") return cmd_train(cmd, o, out);
  if (cmd.name == "enhance") return cmd_enhance(cmd, o, out);
  if (cmd.name == "eval") return cmd_eval(cmd, o, out);
  if (cmd.name == "render") return cmd_render(cmd, o, out);
  return cmd_export_hybrid(cmd, o, out);
}

}  // namespace

std::string version_line() { return std::string("fsegan ") + FSEGAN_VERSION; }

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Speech enhancement pipeline: synth, featurize, train, enhance, eval, render, export-hybrid", "fsegan"};
  app.set_version_flag("--version", version_line());
  app.require_subcommand(1);
  std::map<std::string, std::map<std::string, std::string>> values;
  std::map<std::string, CLI::App*> subs;
  for (const auto& c : kCommands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    for (const auto& f : c.flags) sub->add_option("--" + f, values[c.name][f]);
    subs[c.name] = sub;
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << version_line() << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  const Command* cmd = nullptr;
  for (const auto& c : kCommands) {
    if (subs[c.name]->parsed()) cmd = &c;
  }
  Options opts(defaults_for(cmd->name));
  try {
    auto& given = values[cmd->name];
    if (subs[cmd->name]->count("--config") > 0) {
      const auto kv = as_usage([&] { return train::load_key_values(given["config"]); });
      for (const auto& [k, v] : kv) {
        if (!known_anywhere(k)) throw UsageError("unknown config key '" + k + "' in " + given["config"]);
        const std::string key = k == "batch" ? "batch_size" : k == "steps" ? "max_steps" : k;
        if (opts.has(key)) opts.set(key, v);
      }
    }
    for (const auto& f : cmd->flags) {
      if (f == "config" || subs[cmd->name]->count("--" + f) == 0) continue;
      opts.set(kFlagKeys.at(f), given[f]);
    }
    return dispatch(*cmd, opts, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << subs[cmd->name]->help();
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << cmd->name << " failed: " << e.what() << "\n";
    return kExitFailure;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace fsegan::cli
