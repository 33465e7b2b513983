import math

import numpy as np
import pytest

import fsegan


def test_version_and_parameter_counts():
    assert fsegan.__version__
    assert fsegan.parameter_count("fsegan", "generator") == 41_820_545
    assert fsegan.parameter_count("segan", "discriminator") == 24_371_041
    with pytest.raises(ValueError):
        fsegan.parameter_count("fsegan", "critic")


def test_pair_features_and_lsd():
    pair = fsegan.build_pair(5, 0, "train")
    assert pair["noisy"].shape[0] == 2
    assert pair["clean"].shape[0] == 1
    assert pair["noisy"].shape[1] == pair["clean"].shape[1]
    again = fsegan.build_pair(5, 0, "train")
    assert np.array_equal(pair["noisy"], again["noisy"])

    noisy = fsegan.log_mel(pair["noisy"], n_mels=32)
    clean = fsegan.log_mel(pair["clean"], n_mels=32)
    assert noisy.shape[1:] == (32, 2)
    assert clean.shape == (noisy.shape[0], 32, 1)
    assert fsegan.lsd(clean, clean) == 0.0
    assert fsegan.lsd(noisy[:, :, :1], clean) > 0.0


def test_wav_and_feature_round_trips(tmp_path):
    t = np.arange(1600, dtype=np.float32) / 16000.0
    tone = (0.5 * np.sin(2 * math.pi * 440.0 * t)).astype(np.float32)
    fsegan.save_wav(tmp_path / "tone.wav", tone)
    back, rate = fsegan.load_wav(tmp_path / "tone.wav")
    assert rate == 16000
    assert back.shape == (1, 1600)
    assert np.max(np.abs(back[0] - tone)) <= 1.0 / 32768.0

    spec = np.random.default_rng(0).normal(size=(12, 8, 2))
    fsegan.save_features(tmp_path / "x.lmfb", spec, normalized=True)
    loaded, normalized = fsegan.load_features(tmp_path / "x.lmfb")
    assert normalized
    assert np.allclose(loaded, spec.astype(np.float32), atol=0)

    assert fsegan.seg_snr(back, back) == pytest.approx(35.0)


def test_cli_pipeline_and_hybrid(tmp_path):
    cfg = tmp_path / "small.cfg"
    cfg.write_text(
        "min_duration_s = 1.0\nmax_duration_s = 1.2\nn_mels = 16\npatch_bins = 16\n"
        "patch_frames = 16\ndepth = 4\nbatch = 4\nsteps = 4\neval_every = 2\n"
    )
    data, feat, run = tmp_path / "data", tmp_path / "feat", tmp_path / "run"
    for split, count in (("train", "4"), ("test", "2")):
        code, _, err = fsegan.run_cli(
            ["synth", "--config", str(cfg), "--split", split, "--count", count, "--out", str(data)]
        )
        assert code == 0, err
    code, _, err = fsegan.run_cli(
        ["featurize", "--config", str(cfg), "--in", str(data / "manifest.tsv"), "--out", str(feat)]
    )
    assert code == 0, err
    code, _, err = fsegan.run_cli(
        ["train", "--config", str(cfg), "--in", str(feat / "features.tsv"), "--out", str(run)]
    )
    assert code == 0, err

    noisy, _ = fsegan.load_features(feat / "feat" / "test_0_noisy.lmfb")
    enhanced = fsegan.enhance_features(run / "generator.ckpt", noisy)
    assert enhanced.shape == noisy.shape[:2] + (1,)
    stacked = fsegan.hybrid_features(noisy, enhanced)
    assert stacked.shape == noisy.shape[:2] + (3,)
    assert np.array_equal(stacked[:, :, 0], enhanced[:, :, 0])
    assert np.array_equal(stacked[:, :, 1:], noisy)

    assert fsegan.run_cli(["bogus"])[0] == 1
