"""Python bindings for the BlissCam simulator."""

from ._core import (
    BlissError,
    ConfigError,
    ContractError,
    CorruptStreamError,
    FormatError,
    RoiNet,
    VitSegmenter,
    WeightBundle,
    binomial_lut,
    eventify,
    rle_decode,
    rle_encode,
    roi_tensor_specs,
    run,
    theta_for,
    vit_tensor_specs,
)

__all__ = [
    "BlissError",
    "ConfigError",
    "ContractError",
    "CorruptStreamError",
    "FormatError",
    "RoiNet",
    "VitSegmenter",
    "WeightBundle",
    "binomial_lut",
    "eventify",
    "rle_decode",
    "rle_encode",
    "roi_tensor_specs",
    "run",
    "theta_for",
    "vit_tensor_specs",
]
