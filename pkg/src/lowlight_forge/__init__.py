"""Paired low-light training data synthesis.

Screens candidate photographs, darkens and degrades them with a physically
motivated sensor model, derives attention and noise supervision maps, builds
contrast amplified references, and writes the whole dataset behind a
verifiable manifest.
"""

from .curves import ToneCurve, apply_curve, curve_severity, dataset_curve_report, estimate_curve
from .errors import (
    ConfigurationError,
    ContractError,
    DomainError,
    FormatError,
    LowlightForgeError,
)
from .fusion import FusionConfig, amplify_contrast, detail_enhance, l0_smooth, pyramid_fuse
from .image import (
    clamp01,
    dequantize,
    load_image,
    luma_plane,
    quantize,
    save_image,
    value_plane,
)
from .metrics import (
    LossWeights,
    QualityReport,
    SsimParams,
    average_brightness_delta,
    bright_loss,
    composite_loss,
    loe,
    psnr,
    quality_report,
    regional_loss,
    ssim,
    structural_loss,
)
from .pipeline import (
    DatasetRecord,
    PipelineConfig,
    build_dataset,
    load_manifest,
    record_seed,
    split_dataset,
    verify_dataset,
)
from .selection import SelectionConfig, SelectionReport, oversegment, select
from .simulation import (
    NoiseParams,
    NoiseSampling,
    SimulationParams,
    darken,
    demosaic,
    mosaic,
    sample_noise_params,
    sample_params,
    sensor_noise,
    synthesize_noise,
    synthesize_pair,
)
from .supervision import load_map, noise_map, save_map, ue_attention_map

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError",
    "ContractError",
    "DatasetRecord",
    "DomainError",
    "FormatError",
    "FusionConfig",
    "LossWeights",
    "LowlightForgeError",
    "NoiseParams",
    "NoiseSampling",
    "PipelineConfig",
    "QualityReport",
    "SelectionConfig",
    "SelectionReport",
    "SimulationParams",
    "SsimParams",
    "ToneCurve",
    "amplify_contrast",
    "apply_curve",
    "average_brightness_delta",
    "bright_loss",
    "build_dataset",
    "clamp01",
    "composite_loss",
    "curve_severity",
    "darken",
    "dataset_curve_report",
    "demosaic",
    "dequantize",
    "detail_enhance",
    "estimate_curve",
    "l0_smooth",
    "load_image",
    "load_manifest",
    "load_map",
    "loe",
    "luma_plane",
    "mosaic",
    "noise_map",
    "oversegment",
    "psnr",
    "pyramid_fuse",
    "quality_report",
    "quantize",
    "record_seed",
    "regional_loss",
    "sample_noise_params",
    "sample_params",
    "save_image",
    "save_map",
    "select",
    "sensor_noise",
    "split_dataset",
    "ssim",
    "structural_loss",
    "synthesize_noise",
    "synthesize_pair",
    "ue_attention_map",
    "value_plane",
    "verify_dataset",
]
