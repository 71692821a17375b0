import math

import numpy as np
import pytest

from imdet.detector import DetectorParams, detect_matrix
from imdet.linkmodel import (
    DatasetSpec,
    LinkBudget,
    RipMatrix,
    ScenarioSpec,
    default_carrier,
    synth_dataset,
    synth_record,
)
from imdet.tuner import (
    DEFAULT_EPS_LINEAR_GRID,
    DEFAULT_EPS_SLOPE_GRID,
    ConfusionMatrix,
    DegenerateLabelsError,
    RocPoint,
    auc,
    confusion,
    roc_grid,
)

CARRIER = default_carrier()


def points(*pairs):
    return [RocPoint(fpr=f, tpr=t) for f, t in pairs]


class TestConfusion:
    def test_perfect_detector_on_reference_dataset(self, default_matrix, default_labels):
        params = DetectorParams(eps_linear=0.9, eps_slope=1.05)
        results = detect_matrix(default_matrix, params)
        cm = confusion(results, default_labels)
        assert (cm.tp, cm.fp, cm.tn, cm.fn) == (6, 0, 94, 0)

    def test_prefilter_partition_still_yields_no_errors(self, default_matrix, default_labels):
        # Gating out the two quiet receivers moves them from tn to tn:
        # they are negatives either way, so the matrix is unchanged.
        params = DetectorParams(eps_linear=0.9, eps_slope=1.05, rtp_prefilter_dbm=-104.0)
        results = detect_matrix(default_matrix, params)
        cm = confusion(results, default_labels)
        assert (cm.tp, cm.fp, cm.tn, cm.fn) == (6, 0, 94, 0)
        assert sum(1 for r in results if r.prefiltered) == 2

    def test_all_negative_predictor(self, default_labels):
        cm = confusion([False] * len(default_labels), default_labels)
        assert (cm.tp, cm.fp, cm.tn, cm.fn) == (0, 0, 94, 6)

    def test_echoed_labels_have_no_errors(self, default_labels):
        cm = confusion(list(default_labels), default_labels)
        assert cm.fp == 0 and cm.fn == 0

    def test_counts_sum_to_record_count(self, default_labels):
        rng = np.random.default_rng(0)
        preds = rng.integers(0, 2, size=len(default_labels)).astype(bool)
        cm = confusion(list(preds), default_labels)
        assert cm.total == len(default_labels)
        assert cm.tp + cm.fn == sum(default_labels)
        assert cm.tn + cm.fp == len(default_labels) - sum(default_labels)

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            confusion([True], [True, False])
        with pytest.raises(ValueError):
            confusion([], [])

    def test_negative_counts_rejected(self):
        with pytest.raises(ValueError):
            ConfusionMatrix(tp=-1, fp=0, tn=0, fn=0)


class TestAuc:
    def test_perfect_classifier(self):
        assert auc(points((0, 0), (0, 1), (1, 1))) == pytest.approx(1.0)

    def test_chance_diagonal(self):
        assert auc(points((0, 0), (1, 1))) == pytest.approx(0.5)

    def test_piecewise_diagonal(self):
        assert auc(points((0, 0), (0.5, 0.5), (1, 1))) == pytest.approx(0.5)

    def test_duplicate_points_change_nothing(self):
        base = points((0, 0), (0.2, 0.6), (1, 1))
        with_dup = base + [RocPoint(0.2, 0.6)]
        assert auc(with_dup) == pytest.approx(auc(base))

    def test_reversed_decisions_mirror_the_area(self):
        # Holds for curves spanning (0,0)..(1,1), which the grid search
        # guarantees through its sentinel anchors.
        rng = np.random.default_rng(1)
        for _ in range(50):
            n = int(rng.integers(2, 8))
            fpr = np.concatenate([[0.0], np.sort(rng.uniform(size=n)), [1.0]])
            tpr = np.concatenate([[0.0], np.sort(rng.uniform(size=n)), [1.0]])
            fwd = [RocPoint(f, t) for f, t in zip(fpr, tpr)]
            rev = [RocPoint(1 - f, 1 - t) for f, t in zip(fpr, tpr)]
            assert auc(rev) == pytest.approx(1.0 - auc(fwd), abs=1e-12)

    def test_too_few_points_rejected(self):
        with pytest.raises(ValueError):
            auc(points((0, 0)))

    def test_out_of_range_rates_rejected(self):
        with pytest.raises(ValueError):
            RocPoint(fpr=1.2, tpr=0.0)


class TestRocGrid:
    def test_reference_dataset_reaches_perfect_area(self, default_matrix, default_labels):
        report = roc_grid(default_matrix, default_labels)
        assert max(report.auc_per_eps_linear.values()) == 1.0
        cm = report.confusion_at_best
        assert cm.fp == 0 and cm.fn == 0
        assert report.best_params.eps_linear in DEFAULT_EPS_LINEAR_GRID
        assert report.best_params.eps_slope in DEFAULT_EPS_SLOPE_GRID

    def test_curves_span_the_unit_square(self, default_matrix, default_labels):
        report = roc_grid(default_matrix, default_labels)
        for pts in report.roc_curves.values():
            coords = [(p.fpr, p.tpr) for p in pts]
            assert (0.0, 0.0) in coords
            assert (1.0, 1.0) in coords
            # sentinel anchors carry no searched parameters
            assert any(p.params is None for p in pts)
            assert any(p.params is not None and math.isinf(p.params.eps_slope)
                       for p in pts)

    def test_grid_cells_match_a_direct_detector_run(self, default_matrix, default_labels):
        report = roc_grid(default_matrix, default_labels,
                          eps_linear_grid=(0.9,), eps_slope_grid=(1.05, 3.0))
        direct = {}
        for eps_slope in (1.05, 3.0):
            params = DetectorParams(eps_linear=0.9, eps_slope=eps_slope)
            cm = confusion(detect_matrix(default_matrix, params), default_labels)
            direct[eps_slope] = (cm.fp / (cm.fp + cm.tn), cm.tp / (cm.tp + cm.fn))
        for p in report.roc_curves[0.9]:
            if p.params is not None and not math.isinf(p.params.eps_slope):
                assert (p.fpr, p.tpr) == direct[p.params.eps_slope]

    def test_rerun_is_identical(self, default_matrix, default_labels):
        a = roc_grid(default_matrix, default_labels)
        b = roc_grid(default_matrix, default_labels)
        assert a.best_params == b.best_params
        assert a.auc_per_eps_linear == b.auc_per_eps_linear
        assert a.roc_curves == b.roc_curves

    def test_single_class_labels_rejected(self, default_matrix):
        with pytest.raises(DegenerateLabelsError):
            roc_grid(default_matrix, [False] * len(default_matrix.records))
        with pytest.raises(DegenerateLabelsError):
            roc_grid(default_matrix, [True] * len(default_matrix.records))

    def test_missing_labels_rejected(self, default_matrix):
        labels = [r.label_im_present for r in default_matrix.records]
        labels[3] = None
        with pytest.raises(ValueError):
            roc_grid(default_matrix, labels)
        with pytest.raises(ValueError):
            roc_grid(default_matrix, labels[:-1])

    def test_empty_grid_rejected(self, default_matrix, default_labels):
        with pytest.raises(ValueError):
            roc_grid(default_matrix, default_labels, eps_linear_grid=())

    def test_single_cell_grid_keeps_sentinels(self, default_matrix, default_labels):
        report = roc_grid(default_matrix, default_labels,
                          eps_linear_grid=(0.9,), eps_slope_grid=(1.05,))
        pts = report.roc_curves[0.9]
        assert len(pts) == 3  # never-flag sentinel, the cell, always-flag anchor
        assert report.best_params == DetectorParams(eps_linear=0.9, eps_slope=1.05)

    def test_random_labels_average_to_chance_area(self):
        # Clutter-only records: the detector never fires inside the
        # grid, so every curve collapses to the chance diagonal no
        # matter how the labels fall.
        recs = [
            synth_record(CARRIER, LinkBudget(),
                         ScenarioSpec(im_present=False, clutter_sigma_db=0.5), i)
            for i in range(30)
        ]
        matrix = RipMatrix(records=recs, carrier=CARRIER)
        rng = np.random.default_rng(2)
        aucs = []
        for _ in range(100):
            labels = np.zeros(30, bool)
            labels[rng.choice(30, size=6, replace=False)] = True
            report = roc_grid(matrix, list(labels))
            aucs.append(max(report.auc_per_eps_linear.values()))
        assert 0.3 <= float(np.mean(aucs)) <= 0.7

    def test_ties_break_toward_stricter_thresholds(self, default_matrix, default_labels):
        # Perfect separation everywhere: every grid cell has J = 1, so
        # the strictest pair must win.
        report = roc_grid(default_matrix, default_labels)
        assert report.best_params.eps_linear == max(DEFAULT_EPS_LINEAR_GRID)
        assert report.best_params.eps_slope == max(DEFAULT_EPS_SLOPE_GRID)


class TestReportShape:
    def test_report_serializes_round_trip_friendly(self, default_matrix, default_labels):
        report = roc_grid(default_matrix, default_labels)
        doc = report.to_dict()
        assert set(doc) == {"curves", "best_params", "confusion_at_best"}
        assert len(doc["curves"]) == len(DEFAULT_EPS_LINEAR_GRID)
        for curve in doc["curves"]:
            slopes = [p["eps_slope"] for p in curve["points"]]
            assert None in slopes and "inf" in slopes
        assert doc["confusion_at_best"]["tp"] == 6
