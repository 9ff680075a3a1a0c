"""Topological data analysis toolkit for malware feature tables."""

from ._tdamal import (
    Error,
    add_noise,
    bottleneck,
    feature_names,
    local_features,
    mapper,
    minmax_scale,
    oracle_betti,
    pca,
    rips_diagram,
    synth_blobs,
    tomato,
    train_evaluate,
)

__all__ = [
    "Error",
    "add_noise",
    "bottleneck",
    "feature_names",
    "local_features",
    "mapper",
    "minmax_scale",
    "oracle_betti",
    "pca",
    "rips_diagram",
    "synth_blobs",
    "tomato",
    "train_evaluate",
]
