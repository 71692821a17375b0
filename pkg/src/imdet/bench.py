"""Runtime scaling benchmark of the per-record detector.

Times only the regression + decision path on pre-generated records with
a monotonic clock and reports per-PRB-count means alongside a no-op
baseline so the timed region can be sanity checked. A least-squares fit
of mean runtime against the PRB count quantifies the linear-scaling
claim.

Measurement discipline: timing is pinned to a single CPU where the
platform allows, calls are timed individually and interleaved across
the PRB counts in rounds so clock drift hits every count evenly, a
warm-up phase is discarded, and samples blown up by scheduler
preemption (far above the per-count median) are discarded with it
before the mean is taken.
"""

from __future__ import annotations

import contextlib
import os
import time
from dataclasses import dataclass, replace

import numpy as np

from .detector import DetectorParams, detect_record, ols_fit
from .linkmodel import LinkBudget, ScenarioSpec, default_carrier, synth_record

_BENCH_PARAMS = DetectorParams(eps_linear=0.9, eps_slope=1.05)
_RECORD_POOL = 8
# The timed call does identical work every repetition, so its sample
# distribution is a tight cluster plus scheduler-interrupt outliers;
# samples above this multiple of the median are treated as interrupts.
_SPIKE_FACTOR = 1.5


@dataclass(frozen=True)
class BenchResult:
    n_prb_values: list[int]
    mean_runtime_ns: list[float]
    baseline_ns: list[float]
    fit_slope_ns_per_prb: float
    fit_r2: float

    def __post_init__(self):
        n = len(self.n_prb_values)
        if n < 4:
            raise ValueError("need at least 4 PRB counts")
        if len(self.mean_runtime_ns) != n or len(self.baseline_ns) != n:
            raise ValueError("result lists must have equal length")
        if any(v <= 0 for v in self.mean_runtime_ns):
            raise ValueError("runtimes must be positive")

    @property
    def normalized_runtime(self) -> list[float]:
        """Runtime divided by the runtime at the smallest PRB count."""
        ref = self.mean_runtime_ns[0]
        return [v / ref for v in self.mean_runtime_ns]


def _noop(record, carrier, params):
    return None


@contextlib.contextmanager
def _pin_to_one_cpu():
    try:
        previous = os.sched_getaffinity(0)
        os.sched_setaffinity(0, {min(previous)})
    except (AttributeError, OSError):
        previous = None
    try:
        yield
    finally:
        if previous is not None:
            os.sched_setaffinity(0, previous)


def _timed_samples(func, pool, carrier, count):
    clock = time.perf_counter_ns
    out = np.empty(count, dtype=np.int64)
    for k in range(count):
        rec = pool[k % _RECORD_POOL]
        t0 = clock()
        func(rec, carrier, _BENCH_PARAMS)
        out[k] = clock() - t0
    return out


def _robust_mean(samples: np.ndarray) -> float:
    cut = _SPIKE_FACTOR * float(np.median(samples))
    kept = samples[samples <= cut]
    return float(kept.mean())


def run_bench(
    n_prb_list,
    repetitions: int,
    *,
    seed: int = 0,
    warmup: int | None = None,
    rounds: int = 10,
) -> BenchResult:
    """Benchmark detect_record across PRB counts.

    Requires >= 4 distinct counts spanning at least an 8x range and
    >= 100 repetitions per count. Per count, a small pool of noisy
    synthetic records is generated up front (generation sits outside
    the timed region) and the detector is applied round-robin.
    """
    n_values = sorted(set(int(n) for n in n_prb_list))
    if len(n_values) < 4:
        raise ValueError("need at least 4 distinct PRB counts")
    if n_values[-1] < 8 * n_values[0]:
        raise ValueError("PRB counts must span at least an 8x range")
    if repetitions < 100:
        raise ValueError("repetitions must be >= 100")
    warmup = max(50, repetitions // 10) if warmup is None else warmup
    rounds = max(1, min(rounds, repetitions // 50))
    batch = repetitions // rounds

    base = default_carrier()
    scenario = ScenarioSpec(im_present=False, clutter_sigma_db=0.5)
    budget = LinkBudget()
    carriers = {}
    pools = {}
    for n_prb in n_values:
        carriers[n_prb] = replace(
            base,
            n_prb=n_prb,
            n_prb_control=min(base.n_prb_control, 2 * ((n_prb - 1) // 2)),
            bandwidth_hz=n_prb * base.n_sc_per_prb * base.subcarrier_spacing_hz * 1.1,
        )
        pools[n_prb] = [
            synth_record(carriers[n_prb], budget, scenario, (seed, n_prb, k))
            for k in range(_RECORD_POOL)
        ]

    samples = {n: [] for n in n_values}
    samples_noop = {n: [] for n in n_values}
    with _pin_to_one_cpu():
        # Warm every code path before the first timed batch.
        for n_prb in n_values:
            _timed_samples(detect_record, pools[n_prb], carriers[n_prb], warmup)
        for _ in range(rounds):
            for n_prb in n_values:
                pool, carrier = pools[n_prb], carriers[n_prb]
                samples[n_prb].append(
                    _timed_samples(detect_record, pool, carrier, batch)
                )
                samples_noop[n_prb].append(_timed_samples(_noop, pool, carrier, batch))

    means = [_robust_mean(np.concatenate(samples[n])) for n in n_values]
    baselines = [_robust_mean(np.concatenate(samples_noop[n])) for n in n_values]
    fit = ols_fit([float(n) for n in n_values], means)
    return BenchResult(
        n_prb_values=n_values,
        mean_runtime_ns=means,
        baseline_ns=baselines,
        fit_slope_ns_per_prb=fit.slope,
        fit_r2=fit.r_squared,
    )
