"""Intermodulation interference toolkit for OFDM uplink measurements.

Synthesizes labeled per-PRB interference data from a physics-grounded
mixing-product model, detects interference with a linear-regression
test, tunes the two decision thresholds by ROC grid search, and
benchmarks the detector's runtime scaling.
"""

from .bench import BenchResult, run_bench
from .detector import (
    DetectionResult,
    DetectorParams,
    RegressionFit,
    detect_matrix,
    detect_record,
    ols_fit,
    user_plane_slice,
)
from .linkmodel import (
    DatasetSpec,
    LinkBudget,
    MeasurementRecord,
    RipMatrix,
    ScenarioSpec,
    default_carrier,
    mean_rtp,
    noise_floor_per_prb,
    rip_bound_profile,
    synth_dataset,
    synth_record,
)
from .spectrum import (
    CarrierConfig,
    ImProduct,
    Nonlinearity,
    enumerate_im_products,
    im_power_scaling,
    products_in_band,
    spectral_support,
)
from .tuner import (
    ConfusionMatrix,
    DegenerateLabelsError,
    RocPoint,
    TuningReport,
    auc,
    confusion,
    roc_grid,
)

__version__ = "0.1.0"

__all__ = [
    "BenchResult",
    "CarrierConfig",
    "ConfusionMatrix",
    "DatasetSpec",
    "DegenerateLabelsError",
    "DetectionResult",
    "DetectorParams",
    "ImProduct",
    "LinkBudget",
    "MeasurementRecord",
    "Nonlinearity",
    "RegressionFit",
    "RipMatrix",
    "RocPoint",
    "ScenarioSpec",
    "TuningReport",
    "auc",
    "confusion",
    "default_carrier",
    "detect_matrix",
    "detect_record",
    "enumerate_im_products",
    "im_power_scaling",
    "mean_rtp",
    "noise_floor_per_prb",
    "ols_fit",
    "products_in_band",
    "rip_bound_profile",
    "roc_grid",
    "run_bench",
    "spectral_support",
    "synth_dataset",
    "synth_record",
    "user_plane_slice",
]
