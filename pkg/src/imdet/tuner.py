"""Threshold tuning: grid search, ROC curves, AUC, confusion matrix.

One (eps_linear, eps_slope) pair is a single operating point, so each
ROC curve fixes eps_linear and sweeps eps_slope over its grid. Curves
are anchored by two sentinel operating points: eps_slope = +inf (the
never-flag extreme, always (0, 0)) and the fully permissive detector
(both gates open, pinned at (1, 1), carrying no in-grid parameters).
The winning eps_linear maximizes AUC; the operating eps_slope on that
curve maximizes Youden's J = TPR - FPR, ties broken toward the larger
(stricter) threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .detector import DetectionResult, DetectorParams, fit_record
from .linkmodel import RipMatrix

DEFAULT_EPS_LINEAR_GRID = (0.95, 0.9, 0.85, 0.8)
DEFAULT_EPS_SLOPE_GRID = (1.03, 1.05, 1.07, 1.09, 1.11)


class DegenerateLabelsError(ValueError):
    """Raised when the label set contains only one class."""


@dataclass(frozen=True)
class RocPoint:
    fpr: float
    tpr: float
    params: DetectorParams | None = None

    def __post_init__(self):
        if not 0.0 <= self.fpr <= 1.0:
            raise ValueError("fpr must be in [0, 1]")
        if not 0.0 <= self.tpr <= 1.0:
            raise ValueError("tpr must be in [0, 1]")


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError("counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def as_dict(self) -> dict[str, int]:
        return {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn}


@dataclass
class TuningReport:
    roc_curves: dict[float, list[RocPoint]]
    auc_per_eps_linear: dict[float, float]
    best_params: DetectorParams
    confusion_at_best: ConfusionMatrix

    def to_dict(self) -> dict:
        curves = []
        for eps_lin, points in self.roc_curves.items():
            curves.append(
                {
                    "eps_linear": eps_lin,
                    "auc": self.auc_per_eps_linear[eps_lin],
                    "points": [
                        {
                            "fpr": p.fpr,
                            "tpr": p.tpr,
                            "eps_slope": None
                            if p.params is None
                            else (
                                "inf"
                                if math.isinf(p.params.eps_slope)
                                else p.params.eps_slope
                            ),
                        }
                        for p in points
                    ],
                }
            )
        return {
            "curves": curves,
            "best_params": {
                "eps_linear": self.best_params.eps_linear,
                "eps_slope": self.best_params.eps_slope,
            },
            "confusion_at_best": self.confusion_at_best.as_dict(),
        }


def _as_decision(item) -> bool:
    if isinstance(item, DetectionResult):
        return item.detected
    return bool(item)


def confusion(results, labels) -> ConfusionMatrix:
    """Count tp/fp/tn/fn for detection results against boolean labels."""
    if len(results) != len(labels):
        raise ValueError("results and labels must have equal length")
    if len(labels) == 0:
        raise ValueError("need at least one labeled record")
    tp = fp = tn = fn = 0
    for res, lab in zip(results, labels):
        pred = _as_decision(res)
        if lab:
            tp, fn = (tp + 1, fn) if pred else (tp, fn + 1)
        else:
            fp, tn = (fp + 1, tn) if pred else (fp, tn + 1)
    return ConfusionMatrix(tp=tp, fp=fp, tn=tn, fn=fn)


def auc(points: list[RocPoint]) -> float:
    """Trapezoidal area under TPR over FPR, points sorted by (FPR, TPR)."""
    if len(points) < 2:
        raise ValueError("need at least 2 ROC points")
    pts = sorted((p.fpr, p.tpr) for p in points)
    area = 0.0
    for (f1, t1), (f2, t2) in zip(pts, pts[1:]):
        area += (f2 - f1) * (t1 + t2) / 2.0
    return area


def roc_grid(
    matrix: RipMatrix,
    labels,
    eps_linear_grid=DEFAULT_EPS_LINEAR_GRID,
    eps_slope_grid=DEFAULT_EPS_SLOPE_GRID,
) -> TuningReport:
    """Exhaustive grid search over both thresholds with per-curve AUC.

    Regression fits are computed once per record; every grid cell is a
    pure re-thresholding of those fits, identical to running the
    detector at that cell. ``best_params`` is always drawn from the
    searched grid (sentinel anchors never win).
    """
    if len(eps_linear_grid) == 0 or len(eps_slope_grid) == 0:
        raise ValueError("threshold grids must be non-empty")
    if len(labels) != len(matrix.records):
        raise ValueError("labels must cover every record")
    if any(lab is None for lab in labels):
        raise ValueError("labels must not contain missing values")
    y = np.asarray([bool(lab) for lab in labels])
    n_pos = int(y.sum())
    n_neg = int(len(y) - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise DegenerateLabelsError(
            "degenerate labels: need at least one positive and one negative"
        )

    fits = [fit_record(rec, matrix.carrier) for rec in matrix.records]
    r2 = np.array([f.r_squared for f in fits])
    slope = np.array([f.slope for f in fits])

    def cell_counts(eps_lin: float, eps_slope: float) -> tuple[int, int, int, int]:
        pred = (r2 > eps_lin) & (slope > eps_slope)
        tp = int((pred & y).sum())
        fp = int((pred & ~y).sum())
        return tp, fp, n_neg - fp, n_pos - tp

    curves: dict[float, list[RocPoint]] = {}
    aucs: dict[float, float] = {}
    for eps_lin in eps_linear_grid:
        points = []
        for eps_slope in (float("inf"), *eps_slope_grid):
            tp, fp, tn, fn = cell_counts(eps_lin, eps_slope)
            points.append(
                RocPoint(
                    fpr=fp / n_neg,
                    tpr=tp / n_pos,
                    params=DetectorParams(eps_linear=eps_lin, eps_slope=eps_slope),
                )
            )
        points.append(RocPoint(fpr=1.0, tpr=1.0, params=None))
        points.sort(key=lambda p: (p.fpr, p.tpr))
        curves[eps_lin] = points
        aucs[eps_lin] = auc(points)

    # Highest AUC wins; AUC ties resolve toward the stricter eps_linear.
    best_lin = max(eps_linear_grid, key=lambda e: (aucs[e], e))
    best_slope = max(
        eps_slope_grid,
        key=lambda es: (
            (lambda c: c[0] / n_pos - c[1] / n_neg)(cell_counts(best_lin, es)),
            es,
        ),
    )
    best = DetectorParams(eps_linear=best_lin, eps_slope=best_slope)
    tp, fp, tn, fn = cell_counts(best_lin, best_slope)
    return TuningReport(
        roc_curves=curves,
        auc_per_eps_linear=aucs,
        best_params=best,
        confusion_at_best=ConfusionMatrix(tp=tp, fp=fp, tn=tn, fn=fn),
    )
