"""Log-Mel speech enhancement toolkit: corpus synthesis, features, models, metrics."""

from fsegan._core import (
    __version__,
    build_pair,
    enhance_features,
    hybrid_features,
    load_features,
    load_wav,
    log_mel,
    lsd,
    parameter_count,
    run_cli,
    save_features,
    save_wav,
    seg_snr,
)

__all__ = [
    "__version__",
    "build_pair",
    "enhance_features",
    "hybrid_features",
    "load_features",
    "load_wav",
    "log_mel",
    "lsd",
    "parameter_count",
    "run_cli",
    "save_features",
    "save_wav",
    "seg_snr",
]
