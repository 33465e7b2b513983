#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>
#include <sstream>
#include <stdexcept>

#include "fsegan/cli/cli.hpp"
#include "fsegan/dsp/audio.hpp"
#include "fsegan/dsp/features.hpp"
#include "fsegan/eval/evaluate.hpp"
#include "fsegan/eval/metrics.hpp"
#include "fsegan/models/params.hpp"
#include "fsegan/synth/corpus.hpp"
#include "fsegan/synth/signals.hpp"

namespace py = pybind11;
using namespace fsegan;

namespace {

using AudioArray = py::array_t<float, py::array::c_style | py::array::forcecast>;
using FeatureArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

// (channels, samples) float32, or a 1-D array for mono.
dsp::AudioClip to_clip(const AudioArray& a, int sample_rate) {
  if (a.ndim() != 1 && a.ndim() != 2) throw std::invalid_argument("audio must be 1-D or (channels, samples)");
  const std::size_t ch = a.ndim() == 1 ? 1 : a.shape(0);
  const std::size_t n = a.ndim() == 1 ? a.shape(0) : a.shape(1);
  dsp::AudioClip clip;
  clip.sample_rate = sample_rate;
  clip.channels.assign(ch, std::vector<float>(n));
  for (std::size_t c = 0; c < ch; ++c) std::memcpy(clip.channels[c].data(), a.data() + c * n, n * sizeof(float));
  clip.validate();
  return clip;
}

AudioArray from_clip(const dsp::AudioClip& clip) {
  AudioArray out({clip.n_channels(), clip.length()});
  for (std::size_t c = 0; c < clip.n_channels(); ++c) {
    std::memcpy(out.mutable_data() + c * clip.length(), clip.channels[c].data(), clip.length() * sizeof(float));
  }
  return out;
}

// (frames, bins, channels) float64, or (frames, bins) for one channel.
dsp::LogMelSpectrogram to_spec(const FeatureArray& a, bool normalized) {
  if (a.ndim() != 2 && a.ndim() != 3) throw std::invalid_argument("features must be (frames, bins[, channels])");
  dsp::LogMelSpectrogram s(a.shape(0), a.shape(1), a.ndim() == 3 ? a.shape(2) : 1);
  std::memcpy(s.values.data(), a.data(), s.values.size() * sizeof(double));
  s.normalized = normalized;
  s.validate();
  return s;
}

FeatureArray from_spec(const dsp::LogMelSpectrogram& s) {
  FeatureArray out({s.n_frames, s.n_bins, s.n_channels});
  std::memcpy(out.mutable_data(), s.values.data(), s.values.size() * sizeof(double));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bindings over the fsegan C++ core.";
  m.attr("__version__") = FSEGAN_VERSION;

  m.def(
      "load_wav",
      [](const std::filesystem::path& path) {
        const auto clip = dsp::load_wav(path);
        return py::make_tuple(from_clip(clip), clip.sample_rate);
      },
      py::arg("path"), "Reads 16-bit PCM; returns ((channels, samples) float32, sample_rate).");
  m.def(
      "save_wav",
      [](const std::filesystem::path& path, const AudioArray& samples, int sample_rate) {
        dsp::save_wav(to_clip(samples, sample_rate), path);
      },
      py::arg("path"), py::arg("samples"), py::arg("sample_rate") = dsp::kDefaultSampleRate);

  m.def(
      "log_mel",
      [](const AudioArray& samples, int sample_rate, std::size_t n_mels) {
        dsp::FrontEnd fe;
        fe.mel.n_filters = n_mels;
        return from_spec(fe(to_clip(samples, sample_rate)));
      },
      py::arg("samples"), py::arg("sample_rate") = dsp::kDefaultSampleRate, py::arg("n_mels") = 128,
      "Log-Mel features, (frames, bins, channels) float64.");

  m.def(
      "load_features",
      [](const std::filesystem::path& path) {
        const auto s = dsp::load_features(path);
        return py::make_tuple(from_spec(s), s.normalized);
      },
      py::arg("path"), "Returns ((frames, bins, channels) float64, normalized flag).");
  m.def(
      "save_features",
      [](const std::filesystem::path& path, const FeatureArray& values, bool normalized) {
        dsp::save_features(to_spec(values, normalized), path);
      },
      py::arg("path"), py::arg("values"), py::arg("normalized") = false);

  m.def(
      "build_pair",
      [](std::uint64_t master_seed, std::uint64_t index, const std::string& split) {
        const auto p = synth::build_pair(master_seed, index, synth::parse_split(split), synth::default_noise_bank());
        py::dict d;
        d["noisy"] = from_clip(p.noisy);
        d["clean"] = from_clip(p.clean);
        d["snr_db"] = p.snr_db;
        d["room_id"] = p.room_id;
        d["seed"] = p.seed;
        return d;
      },
      py::arg("master_seed"), py::arg("index"), py::arg("split") = "train",
      "One synthetic (noisy stereo, clean mono) pair from the built-in noise bank.");

  m.def(
      "lsd", [](const FeatureArray& a, const FeatureArray& b) { return eval::lsd(to_spec(a, false), to_spec(b, false)); },
      py::arg("a"), py::arg("b"), "Log-spectral distance in dB between natural-log Mel features.");
  m.def(
      "seg_snr",
      [](const AudioArray& ref, const AudioArray& est) {
        return eval::seg_snr(to_clip(ref, dsp::kDefaultSampleRate), to_clip(est, dsp::kDefaultSampleRate));
      },
      py::arg("ref"), py::arg("est"));

  m.def(
      "enhance_features",
      [](const std::filesystem::path& checkpoint, const FeatureArray& noisy) {
        const auto g = models::load_checkpoint(checkpoint);
        return from_spec(eval::enhance_features(g, to_spec(noisy, true)));
      },
      py::arg("checkpoint"), py::arg("noisy"), "Runs a saved FSEGAN generator over normalized features.");
  m.def(
      "hybrid_features",
      [](const FeatureArray& noisy, const FeatureArray& enhanced) {
        return from_spec(eval::hybrid_features(to_spec(noisy, true), to_spec(enhanced, true)));
      },
      py::arg("noisy"), py::arg("enhanced"));

  m.def(
      "parameter_count",
      [](const std::string& model, const std::string& role) {
        const auto r = role == "generator"       ? models::Role::kGenerator
                       : role == "discriminator" ? models::Role::kDiscriminator
                                                 : throw std::invalid_argument("role must be generator or discriminator");
        const auto kind = models::parse_model_kind(model);
        const auto cfg = kind == models::ModelKind::kFsegan ? models::fsegan_config(r) : models::segan_config(r);
        std::size_t n = 0;
        for (const auto& [name, shape] : models::parameter_layout(cfg)) n += ad::shape_size(shape);
        return n;
      },
      py::arg("model") = "fsegan", py::arg("role") = "generator", "Learnable scalars of a full-size network.");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs one CLI invocation in-process; returns (exit_code, stdout, stderr).");
}
