"""File formats: measurement/label CSVs, sidecar JSON, reports, band plans.

CSV dialect is fixed for byte-stable fixtures: comma separator, '.'
decimal point, mandatory header row, UTF-8, LF line endings. Power
values are written with six decimals, which round-trips to well within
1e-6 dB.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .detector import DetectionResult, DetectorParams
from .linkmodel import (
    NEG_INF,
    DatasetSpec,
    LinkBudget,
    MeasurementRecord,
    RipMatrix,
    ScenarioSpec,
)
from .spectrum import CarrierConfig
from .tuner import TuningReport

FLOAT_FMT = "%.6f"
MEASUREMENT_FIXED_COLUMNS = ("bs_id", "timestamp", "branch_count")
LABEL_COLUMNS = ("bs_id", "timestamp", "im_present", "source")
RESULT_COLUMNS = ("bs_id", "timestamp", "detected", "r_squared", "slope", "case", "source")
ROC_COLUMNS = ("eps_linear", "eps_slope", "fpr", "tpr")
BENCH_COLUMNS = ("n_prb", "mean_runtime_ns", "baseline_ns", "normalized_runtime")
SIDECAR_NAME = "metadata.json"


class SchemaError(ValueError):
    """A file does not match its documented schema."""


def _fmt(value: float) -> str:
    return FLOAT_FMT % value


def _open_write(path):
    return open(path, "w", encoding="utf-8", newline="")


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def measurement_header(n_branches: int, n_prb_user: int) -> list[str]:
    return (
        list(MEASUREMENT_FIXED_COLUMNS)
        + [f"rtp_dbm_branch_{j}" for j in range(n_branches)]
        + [f"rip_dbm_prb_{u}" for u in range(n_prb_user)]
    )


def write_measurements_csv(
    path,
    records: list[MeasurementRecord],
    n_prb_user: int,
    n_branches: int,
) -> None:
    for i, rec in enumerate(records):
        if len(rec.rtp_dbm_per_branch) != n_branches:
            raise SchemaError(f"record {i}: branch count differs from {n_branches}")
        if len(rec.rip_dbm) != n_prb_user:
            raise SchemaError(f"record {i}: rip length differs from {n_prb_user}")
    with _open_write(path) as fh:
        w = _writer(fh)
        w.writerow(measurement_header(n_branches, n_prb_user))
        for rec in records:
            w.writerow(
                [rec.bs_id, rec.timestamp, str(n_branches)]
                + [_fmt(v) for v in rec.rtp_dbm_per_branch]
                + [_fmt(v) for v in rec.rip_dbm]
            )


def _parse_measurement_header(header: list[str]) -> tuple[int, int]:
    for i, name in enumerate(MEASUREMENT_FIXED_COLUMNS):
        if i >= len(header) or header[i] != name:
            found = header[i] if i < len(header) else "<missing>"
            raise SchemaError(f"column {i}: expected '{name}', found '{found}'")
    n_branches = 0
    pos = len(MEASUREMENT_FIXED_COLUMNS)
    while pos < len(header) and header[pos] == f"rtp_dbm_branch_{n_branches}":
        n_branches += 1
        pos += 1
    if n_branches == 0:
        raise SchemaError(f"column {pos}: expected 'rtp_dbm_branch_0'")
    n_prb_user = 0
    while pos < len(header) and header[pos] == f"rip_dbm_prb_{n_prb_user}":
        n_prb_user += 1
        pos += 1
    if n_prb_user == 0:
        raise SchemaError(f"column {pos}: expected 'rip_dbm_prb_0'")
    if pos != len(header):
        raise SchemaError(f"column {pos}: unexpected trailing column '{header[pos]}'")
    return n_branches, n_prb_user


def read_measurements_csv(
    path, max_bad_fraction: float = 0.01
) -> tuple[list[MeasurementRecord], list[str]]:
    """Read a measurements table; returns (records, per-row diagnostics).

    Malformed rows are skipped with a diagnostic. If more than
    ``max_bad_fraction`` of the data rows are malformed, the whole read
    is rejected with a SchemaError.
    """
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError("empty file: missing header row") from None
        n_branches, n_prb_user = _parse_measurement_header(header)
        n_cols = len(header)
        records = []
        diagnostics = []
        n_rows = 0
        for row_no, row in enumerate(reader, start=2):
            n_rows += 1
            if len(row) != n_cols:
                diagnostics.append(
                    f"row {row_no}: expected {n_cols} fields, found {len(row)}"
                )
                continue
            try:
                values = [float(v) for v in row[2:]]
            except ValueError as exc:
                diagnostics.append(f"row {row_no}: {exc}")
                continue
            if int(values[0]) != n_branches:
                diagnostics.append(
                    f"row {row_no}: branch_count {int(values[0])} != header ({n_branches})"
                )
                continue
            records.append(
                MeasurementRecord(
                    bs_id=row[0],
                    timestamp=row[1],
                    rtp_dbm_per_branch=np.array(values[1 : 1 + n_branches]),
                    rip_dbm=np.array(values[1 + n_branches :]),
                )
            )
    if n_rows and len(diagnostics) > max_bad_fraction * n_rows:
        raise SchemaError(
            f"{len(diagnostics)} of {n_rows} rows malformed "
            f"(limit {max_bad_fraction:.0%}); first: {diagnostics[0]}"
        )
    return records, diagnostics


def write_labels_csv(path, records: list[MeasurementRecord]) -> None:
    with _open_write(path) as fh:
        w = _writer(fh)
        w.writerow(LABEL_COLUMNS)
        for i, rec in enumerate(records):
            if rec.label_im_present is None or rec.label_source is None:
                raise SchemaError(f"record {i}: unlabeled record in labels table")
            w.writerow(
                [
                    rec.bs_id,
                    rec.timestamp,
                    "true" if rec.label_im_present else "false",
                    rec.label_source,
                ]
            )


def read_labels_csv(path) -> dict[tuple[str, str], tuple[bool, str]]:
    """Labels keyed by (bs_id, timestamp)."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != LABEL_COLUMNS:
            raise SchemaError(f"labels header must be {','.join(LABEL_COLUMNS)}")
        out = {}
        for row_no, row in enumerate(reader, start=2):
            if len(row) != len(LABEL_COLUMNS):
                raise SchemaError(f"row {row_no}: expected {len(LABEL_COLUMNS)} fields")
            if row[2] not in ("true", "false"):
                raise SchemaError(f"row {row_no}: im_present must be true/false")
            out[(row[0], row[1])] = (row[2] == "true", row[3])
    return out


def labels_for_records(
    records: list[MeasurementRecord],
    label_map: dict[tuple[str, str], tuple[bool, str]],
) -> list[bool]:
    labels = []
    for rec in records:
        key = (rec.bs_id, rec.timestamp)
        if key not in label_map:
            raise SchemaError(f"no label for record {key[0]} @ {key[1]}")
        labels.append(label_map[key][0])
    return labels


# --- JSON sidecar / config -------------------------------------------------

def carrier_to_dict(carrier: CarrierConfig) -> dict:
    return asdict(carrier)


def carrier_from_dict(d: dict, where: str = "carrier") -> CarrierConfig:
    try:
        return CarrierConfig(**d)
    except TypeError as exc:
        raise SchemaError(f"{where}: {exc}") from None
    except ValueError as exc:
        raise SchemaError(f"{where}: {exc}") from None


def budget_to_dict(budget: LinkBudget) -> dict:
    d = asdict(budget)
    if d["p_other_interf_dbm"] == NEG_INF:
        d["p_other_interf_dbm"] = None
    return d


def budget_from_dict(d: dict, where: str = "budget") -> LinkBudget:
    d = dict(d)
    if d.get("p_other_interf_dbm") is None:
        d["p_other_interf_dbm"] = NEG_INF
    try:
        return LinkBudget(**d)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{where}: {exc}") from None


def scenario_to_dict(s: ScenarioSpec) -> dict:
    d = asdict(s)
    d["narrowband"] = [list(pair) for pair in s.narrowband]
    return d


def scenario_from_dict(d: dict, where: str = "scenario") -> ScenarioSpec:
    d = dict(d)
    if "narrowband" in d:
        d["narrowband"] = tuple((int(i), float(b)) for i, b in d["narrowband"])
    try:
        return ScenarioSpec(**d)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{where}: {exc}") from None


def dataset_spec_to_dict(spec: DatasetSpec) -> dict:
    return {
        "n_records": spec.n_records,
        "n_positive": spec.n_positive,
        "n_low_rtp": spec.n_low_rtp,
        "n_internal": spec.n_internal,
        "start_timestamp": spec.start_timestamp,
        "carrier": carrier_to_dict(spec.carrier),
        "budget": budget_to_dict(spec.budget),
        "low_rtp_budget": budget_to_dict(spec.low_rtp_budget),
        "positive_scenario": scenario_to_dict(spec.positive_scenario),
        "negative_scenario": scenario_to_dict(spec.negative_scenario),
    }


def dataset_spec_from_dict(d: dict) -> DatasetSpec:
    kwargs = {}
    plain = ("n_records", "n_positive", "n_low_rtp", "n_internal", "start_timestamp")
    known = set(plain) | {
        "carrier",
        "budget",
        "low_rtp_budget",
        "positive_scenario",
        "negative_scenario",
    }
    for key in d:
        if key not in known:
            raise SchemaError(f"dataset: unknown field '{key}'")
    for key in plain:
        if key in d:
            kwargs[key] = d[key]
    if "carrier" in d:
        kwargs["carrier"] = carrier_from_dict(d["carrier"], "dataset.carrier")
    if "budget" in d:
        kwargs["budget"] = budget_from_dict(d["budget"], "dataset.budget")
    if "low_rtp_budget" in d:
        kwargs["low_rtp_budget"] = budget_from_dict(
            d["low_rtp_budget"], "dataset.low_rtp_budget"
        )
    if "positive_scenario" in d:
        kwargs["positive_scenario"] = scenario_from_dict(
            d["positive_scenario"], "dataset.positive_scenario"
        )
    if "negative_scenario" in d:
        kwargs["negative_scenario"] = scenario_from_dict(
            d["negative_scenario"], "dataset.negative_scenario"
        )
    try:
        return DatasetSpec(**kwargs)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"dataset: {exc}") from None


def load_generator_config(path) -> DatasetSpec:
    """Generator config: {"carrier": ..., "budget": ..., "dataset": {...}}.

    All sections are optional; omitted fields take the defaults. A
    top-level carrier/budget applies to the dataset unless the dataset
    section overrides them.
    """
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"config is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise SchemaError("config root must be a JSON object")
    for key in doc:
        if key not in ("carrier", "budget", "dataset"):
            raise SchemaError(f"config: unknown field '{key}'")
    dataset = dict(doc.get("dataset", {}))
    if "carrier" in doc and "carrier" not in dataset:
        dataset["carrier"] = doc["carrier"]
    if "budget" in doc and "budget" not in dataset:
        dataset["budget"] = doc["budget"]
    return dataset_spec_from_dict(dataset)


def write_sidecar(path, spec: DatasetSpec, seed: int) -> None:
    doc = {
        "format": "imdet-dataset",
        "seed": seed,
        "carrier": carrier_to_dict(spec.carrier),
        "generator": dataset_spec_to_dict(spec),
    }
    with _open_write(path) as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_sidecar(path) -> tuple[CarrierConfig, DatasetSpec, int]:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    carrier = carrier_from_dict(doc["carrier"])
    spec = dataset_spec_from_dict(doc["generator"])
    return carrier, spec, int(doc["seed"])


def write_dataset(out_dir, matrix: RipMatrix, spec: DatasetSpec, seed: int) -> dict:
    """Write measurements.csv, labels.csv and the sidecar; returns paths."""
    out = Path(out_dir)
    n_branches = spec.positive_scenario.branch_count
    paths = {
        "measurements": out / "measurements.csv",
        "labels": out / "labels.csv",
        "sidecar": out / SIDECAR_NAME,
    }
    write_measurements_csv(
        paths["measurements"], matrix.records, matrix.carrier.n_prb_user, n_branches
    )
    write_labels_csv(paths["labels"], matrix.records)
    write_sidecar(paths["sidecar"], spec, seed)
    return paths


def load_matrix(measurements_path, carrier: CarrierConfig | None = None):
    """Assemble a RipMatrix from a measurements CSV.

    Without an explicit carrier the sidecar next to the CSV is used when
    present; otherwise a minimal stand-in carrier is derived from the
    column count (detection only depends on the user-plane PRB count,
    so results are identical).
    """
    records, diagnostics = read_measurements_csv(measurements_path)
    if carrier is None:
        sidecar = Path(measurements_path).parent / SIDECAR_NAME
        if sidecar.exists():
            carrier, _, _ = read_sidecar(sidecar)
    if carrier is None:
        if not records:
            raise SchemaError("cannot infer carrier from an empty table")
        n_u = len(records[0].rip_dbm)
        carrier = CarrierConfig(
            center_freq_hz=1.95e9,
            bandwidth_hz=max(2.0, n_u * 12 * 15e3 * 1.2),
            subcarrier_spacing_hz=15e3,
            n_prb=n_u,
            n_sc_per_prb=12,
            n_prb_control=0,
            direction="uplink",
        )
    return RipMatrix(records=records, carrier=carrier), diagnostics


# --- results / reports -----------------------------------------------------

def write_results_csv(path, records, results: list[DetectionResult]) -> None:
    with _open_write(path) as fh:
        w = _writer(fh)
        w.writerow(RESULT_COLUMNS)
        for rec, res in zip(records, results):
            w.writerow(
                [
                    rec.bs_id,
                    rec.timestamp,
                    "true" if res.detected else "false",
                    _fmt(res.fit.r_squared),
                    _fmt(res.fit.slope),
                    res.case,
                    res.source,
                ]
            )


def write_results_jsonl(path, records, results: list[DetectionResult]) -> None:
    with _open_write(path) as fh:
        for rec, res in zip(records, results):
            json.dump(
                {
                    "bs_id": rec.bs_id,
                    "timestamp": rec.timestamp,
                    "detected": res.detected,
                    "r_squared": res.fit.r_squared,
                    "slope": res.fit.slope,
                    "intercept": res.fit.intercept,
                    "case": res.case,
                    "source": res.source,
                    "prefiltered": res.prefiltered,
                },
                fh,
            )
            fh.write("\n")


def write_tuning_report(path, report: TuningReport) -> None:
    with _open_write(path) as fh:
        json.dump(report.to_dict(), fh, indent=2)
        fh.write("\n")


def read_best_params(path) -> DetectorParams:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    try:
        best = doc["best_params"]
        return DetectorParams(
            eps_linear=float(best["eps_linear"]), eps_slope=float(best["eps_slope"])
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"report: missing or invalid best_params ({exc})") from None


def write_roc_csv(path, report: TuningReport) -> None:
    """All curves in one table; the sentinel anchor rows carry an empty
    eps_slope field."""
    with _open_write(path) as fh:
        w = _writer(fh)
        w.writerow(ROC_COLUMNS)
        for eps_lin, points in report.roc_curves.items():
            for p in points:
                if p.params is None:
                    slope_field = ""
                elif math.isinf(p.params.eps_slope):
                    slope_field = "inf"
                else:
                    slope_field = _fmt(p.params.eps_slope)
                w.writerow([_fmt(eps_lin), slope_field, _fmt(p.fpr), _fmt(p.tpr)])


def read_roc_csv(path) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != ROC_COLUMNS:
            raise SchemaError(f"roc header must be {','.join(ROC_COLUMNS)}")
        rows = []
        for row in reader:
            rows.append(
                {
                    "eps_linear": float(row[0]),
                    "eps_slope": float(row[1]) if row[1] else None,
                    "fpr": float(row[2]),
                    "tpr": float(row[3]),
                }
            )
    return rows


def load_band_plan(path) -> list[CarrierConfig]:
    """Band plan: {"carriers": [carrier objects...]}."""
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"band plan is not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or "carriers" not in doc:
        raise SchemaError("band plan must be an object with a 'carriers' list")
    carriers = doc["carriers"]
    if not isinstance(carriers, list):
        raise SchemaError("'carriers' must be a list")
    return [
        carrier_from_dict(c, where=f"carriers[{i}]") for i, c in enumerate(carriers)
    ]
