"""Link budget composition and labeled synthetic measurement generation.

Power composition is done in linear milliwatts and presented in dBm;
adding powers is only valid in the linear domain. The generator emulates
an operator dataset of per-PRB received interference power (RIP) rows
plus per-branch received total power (RTP), with ground-truth labels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta

import numpy as np

from .spectrum import CarrierConfig

NEG_INF = float("-inf")


def dbm_to_mw(p_dbm: float) -> float:
    """dBm to linear milliwatts (-inf maps to 0)."""
    if p_dbm == NEG_INF:
        return 0.0
    return 10.0 ** (p_dbm / 10.0)


def mw_to_dbm(p_mw: float) -> float:
    """Linear milliwatts to dBm (0 maps to -inf)."""
    if p_mw <= 0.0:
        return NEG_INF
    return 10.0 * math.log10(p_mw)


@dataclass(frozen=True)
class LinkBudget:
    """Transmit power, path loss and noise context of one base station.

    ``p_other_interf_dbm`` is interference not caused by intermodulation
    and defaults to absent (-inf).
    """

    p_bs_dbm: float = 43.0
    path_loss_db: float = 150.0
    n0_dbm_hz: float = -174.0
    p_other_interf_dbm: float = NEG_INF

    def __post_init__(self):
        if self.path_loss_db <= 0:
            raise ValueError("path_loss_db must be positive")
        if self.n0_dbm_hz >= -100.0:
            raise ValueError("n0_dbm_hz must be below -100 dBm/Hz")

    @property
    def p_carrier_dbm(self) -> float:
        """Received power of the fundamental carriers, P_BS - L."""
        return self.p_bs_dbm - self.path_loss_db


def noise_floor_per_prb(n0_dbm_hz: float, n_sc: int, delta_f_hz: float) -> float:
    """Thermal noise power over one PRB: N0 + 10*log10(n_sc * delta_f)."""
    if n_sc < 1:
        raise ValueError("n_sc must be >= 1")
    if delta_f_hz <= 0:
        raise ValueError("delta_f_hz must be positive")
    return n0_dbm_hz + 10.0 * math.log10(n_sc * delta_f_hz)


def rip_bound_profile(
    budget: LinkBudget,
    carrier: CarrierConfig,
    m: int = 2,
    prb_base: int = 0,
) -> np.ndarray:
    """Upper bound on per-PRB RIP across the user-plane PRBs, in dBm.

    The bound is noise + other interference + an intermodulation term
    that grows as exp((u - prb_base) / n_prb) with the PRB index u
    because higher-order products overlap ever more neighboring PRBs.
    In dBm the intermodulation term alone is exactly linear in u with
    slope 10*log10(e)/n_prb dB per PRB; when it vanishes the profile
    collapses to the flat noise floor.

    ``prb_base`` must lie below the first user-plane PRB index.
    """
    if m < 2:
        raise ValueError("m must be >= 2 (at least two mixing carriers)")
    first_user = carrier.n_prb_control // 2
    if prb_base >= first_user:
        raise ValueError("prb_base must precede the first user-plane PRB")

    u = np.arange(first_user, carrier.n_prb - carrier.n_prb_control // 2)
    noise_lin = dbm_to_mw(
        noise_floor_per_prb(
            budget.n0_dbm_hz, carrier.n_sc_per_prb, carrier.subcarrier_spacing_hz
        )
    )
    p_i_lin = dbm_to_mw(budget.p_other_interf_dbm)
    p_tx_lin = dbm_to_mw(budget.p_bs_dbm)
    loss_lin = 10.0 ** (budget.path_loss_db / 10.0)
    im_base = m * p_tx_lin / (carrier.n_sc_per_prb * carrier.n_prb * loss_lin)
    im = im_base * np.exp((u - prb_base) / carrier.n_prb)
    return 10.0 * np.log10(noise_lin + p_i_lin + im)


@dataclass(frozen=True)
class ScenarioSpec:
    """Per-record generation recipe.

    When ``im_present`` the per-PRB profile is an exact line in dBm,
    anchored ``im_offset_db`` above the noise floor at the first
    user-plane PRB and rising ``slope_db_per_prb`` per PRB (the
    intermodulation-dominated regime of the RIP bound). Narrowband
    interferers boost single PRBs; traffic occupancy boosts a random
    subset; clutter is zero-mean Gaussian in dB. ``internal_source``
    confines the interference excess to one receive branch.
    """

    im_present: bool = False
    slope_db_per_prb: float = 0.15
    im_offset_db: float = 6.0
    clutter_sigma_db: float = 0.0
    narrowband: tuple[tuple[int, float], ...] = ()
    traffic_occupancy: float = 0.0
    traffic_boost_db: float = 0.0
    branch_count: int = 2
    internal_source: bool = False

    def __post_init__(self):
        if self.clutter_sigma_db < 0:
            raise ValueError("clutter_sigma_db must be >= 0")
        if self.im_present and self.slope_db_per_prb <= 0:
            raise ValueError("slope_db_per_prb must be positive when im_present")
        if self.im_present and self.im_offset_db <= 0:
            raise ValueError("im_offset_db must be positive when im_present")
        if not 0.0 <= self.traffic_occupancy <= 1.0:
            raise ValueError("traffic_occupancy must be in [0, 1]")
        if self.traffic_boost_db < 0:
            raise ValueError("traffic_boost_db must be >= 0")
        if self.branch_count < 1:
            raise ValueError("branch_count must be >= 1")
        for idx, boost in self.narrowband:
            if idx < 0:
                raise ValueError("narrowband PRB index must be >= 0")
            if boost < 0:
                raise ValueError("narrowband boost must be >= 0")


@dataclass(eq=False)
class MeasurementRecord:
    """One hourly measurement row: user-plane RIP vector plus branch RTPs."""

    bs_id: str
    timestamp: str
    rip_dbm: np.ndarray
    rtp_dbm_per_branch: np.ndarray
    label_im_present: bool | None = None
    label_source: str | None = None

    def __post_init__(self):
        self.rip_dbm = np.asarray(self.rip_dbm, dtype=float)
        self.rtp_dbm_per_branch = np.asarray(self.rtp_dbm_per_branch, dtype=float)
        if self.rtp_dbm_per_branch.size == 0:
            raise ValueError("rtp_dbm_per_branch must be non-empty")
        if self.label_source is not None and self.label_source not in (
            "internal",
            "external",
            "none",
        ):
            raise ValueError("label_source must be internal, external or none")


@dataclass(eq=False)
class RipMatrix:
    """Ordered measurement records sharing one carrier configuration."""

    records: list[MeasurementRecord]
    carrier: CarrierConfig

    def __post_init__(self):
        n_u = self.carrier.n_prb_user
        last_ts: dict[str, str] = {}
        for i, rec in enumerate(self.records):
            if len(rec.rip_dbm) != n_u:
                raise ValueError(
                    f"record {i}: rip vector length {len(rec.rip_dbm)} != "
                    f"user-plane PRB count {n_u}"
                )
            prev = last_ts.get(rec.bs_id)
            if prev is not None and rec.timestamp < prev:
                raise ValueError(
                    f"record {i}: timestamps for {rec.bs_id} must be non-decreasing"
                )
            last_ts[rec.bs_id] = rec.timestamp

    def __len__(self) -> int:
        return len(self.records)


def mean_rtp(record: MeasurementRecord) -> float:
    """Mean branch RTP, averaged in linear power and returned in dBm."""
    lin = 10.0 ** (record.rtp_dbm_per_branch / 10.0)
    return 10.0 * math.log10(float(lin.mean()))


def synth_record(
    carrier: CarrierConfig,
    budget: LinkBudget,
    scenario: ScenarioSpec,
    rng_seed,
    *,
    bs_id: str = "bs0000",
    timestamp: str = "2025-06-01T00:00:00",
) -> MeasurementRecord:
    """Generate one labeled measurement record. Deterministic per seed.

    RIP construction (dB domain on the user-plane PRBs): flat noise
    floor; if ``im_present`` an exact line anchored above the floor;
    plus traffic/narrowband boosts and Gaussian clutter; finally
    clamped at floor - 3 dB. Branch RTPs are composed in linear power:
    carrier power + full-band noise + the record's interference excess
    over the floor, the excess landing on a single random branch for
    internal sources and on every branch otherwise.

    Randomness is drawn in a fixed order (traffic mask, clutter,
    internal branch choice) from ``numpy.random.default_rng(rng_seed)``.
    """
    n_u = carrier.n_prb_user
    band_hz = carrier.n_prb * carrier.n_sc_per_prb * carrier.subcarrier_spacing_hz
    if band_hz > carrier.bandwidth_hz:
        raise ValueError(
            "n_prb * n_sc_per_prb * subcarrier_spacing exceeds the carrier "
            "bandwidth; per-PRB noise would not fit the band"
        )
    for idx, _ in scenario.narrowband:
        if idx >= n_u:
            raise ValueError(
                f"narrowband PRB index {idx} outside user plane (0..{n_u - 1})"
            )

    rng = np.random.default_rng(rng_seed)
    nf_dbm = noise_floor_per_prb(
        budget.n0_dbm_hz, carrier.n_sc_per_prb, carrier.subcarrier_spacing_hz
    )

    if scenario.im_present:
        rip = (
            nf_dbm
            + scenario.im_offset_db
            + scenario.slope_db_per_prb * np.arange(n_u, dtype=float)
        )
    else:
        rip = np.full(n_u, nf_dbm)

    if scenario.traffic_occupancy > 0:
        occupied = rng.random(n_u) < scenario.traffic_occupancy
        rip = rip + occupied * scenario.traffic_boost_db
    for idx, boost in scenario.narrowband:
        rip[idx] += boost
    if scenario.clutter_sigma_db > 0:
        rip = rip + rng.normal(0.0, scenario.clutter_sigma_db, n_u)
    rip = np.maximum(rip, nf_dbm - 3.0)

    # Branch RTPs in linear mW. The interference excess is the record's
    # per-PRB power above the thermal floor.
    nf_lin = dbm_to_mw(nf_dbm)
    excess_lin = float((10.0 ** (rip / 10.0) - nf_lin).sum())
    base_lin = (
        dbm_to_mw(budget.p_carrier_dbm)
        + dbm_to_mw(budget.n0_dbm_hz) * carrier.bandwidth_hz
        + dbm_to_mw(budget.p_other_interf_dbm)
    )
    rtp_lin = np.full(scenario.branch_count, base_lin)
    if scenario.im_present and scenario.internal_source:
        hot = int(rng.integers(scenario.branch_count))
        rtp_lin[hot] += excess_lin
    else:
        rtp_lin += excess_lin
    rtp_dbm = 10.0 * np.log10(rtp_lin)

    if scenario.im_present:
        source = "internal" if scenario.internal_source else "external"
    else:
        source = "none"
    return MeasurementRecord(
        bs_id=bs_id,
        timestamp=timestamp,
        rip_dbm=rip,
        rtp_dbm_per_branch=rtp_dbm,
        label_im_present=scenario.im_present,
        label_source=source,
    )


def default_carrier() -> CarrierConfig:
    """10 MHz uplink carrier, 15 kHz spacing, 50 PRBs of which 42 user-plane."""
    return CarrierConfig(
        center_freq_hz=1.95e9,
        bandwidth_hz=10e6,
        subcarrier_spacing_hz=15e3,
        n_prb=50,
        n_sc_per_prb=12,
        n_prb_control=8,
        direction="uplink",
    )


def default_low_rtp_budget() -> LinkBudget:
    """Budget for receivers whose total power sits at/below -104 dBm."""
    return LinkBudget(p_bs_dbm=0.0, path_loss_db=150.0, n0_dbm_hz=-177.0)


@dataclass(frozen=True)
class DatasetSpec:
    """Composition of a synthetic dataset.

    Defaults reproduce the reference composition: 100 records, 6
    intermodulation-positive (alternating internal/external sources),
    92 ordinary negatives with mean RTP above -104 dBm, and 2 negatives
    on a quieter budget whose mean RTP falls at or below -104 dBm.
    """

    n_records: int = 100
    n_positive: int = 6
    n_low_rtp: int = 2
    n_internal: int = 3
    carrier: CarrierConfig = field(default_factory=default_carrier)
    budget: LinkBudget = field(default_factory=LinkBudget)
    low_rtp_budget: LinkBudget = field(default_factory=default_low_rtp_budget)
    positive_scenario: ScenarioSpec = field(
        default_factory=lambda: ScenarioSpec(im_present=True, clutter_sigma_db=0.3)
    )
    negative_scenario: ScenarioSpec = field(
        default_factory=lambda: ScenarioSpec(im_present=False, clutter_sigma_db=0.3)
    )
    start_timestamp: str = "2025-06-01T00:00:00"

    def __post_init__(self):
        if self.n_records < 0:
            raise ValueError("n_records must be >= 0")
        if self.n_positive < 0 or self.n_positive > self.n_records:
            raise ValueError("n_positive must be in [0, n_records]")
        if self.n_low_rtp < 0 or self.n_positive + self.n_low_rtp > self.n_records:
            raise ValueError("n_positive + n_low_rtp must not exceed n_records")
        if not 0 <= self.n_internal <= self.n_positive:
            raise ValueError("n_internal must be in [0, n_positive]")
        if not self.positive_scenario.im_present:
            raise ValueError("positive_scenario must have im_present=True")
        if self.negative_scenario.im_present:
            raise ValueError("negative_scenario must have im_present=False")
        if (
            self.positive_scenario.branch_count
            != self.negative_scenario.branch_count
        ):
            raise ValueError("all scenarios must share one branch_count")
        datetime.fromisoformat(self.start_timestamp)  # fail fast on bad format


def record_seed(dataset_seed: int, index: int) -> np.random.SeedSequence:
    """Child seed of record ``index``; fixed so records can be generated
    independently (and therefore concurrently) in any order."""
    return np.random.SeedSequence(dataset_seed, spawn_key=(0, index))


def synth_dataset(spec: DatasetSpec, rng_seed: int) -> RipMatrix:
    """Generate a labeled dataset with exactly the requested class counts.

    Record ``i`` draws from :func:`record_seed`; the class placement
    shuffle draws from spawn_key (1, 0). Two runs with equal seed and
    spec produce bit-identical matrices.
    """
    scenarios: list[tuple[ScenarioSpec, LinkBudget]] = []
    for i in range(spec.n_positive):
        scen = replace(spec.positive_scenario, internal_source=i < spec.n_internal)
        scenarios.append((scen, spec.budget))
    n_plain_neg = spec.n_records - spec.n_positive - spec.n_low_rtp
    scenarios += [(spec.negative_scenario, spec.budget)] * n_plain_neg
    scenarios += [(spec.negative_scenario, spec.low_rtp_budget)] * spec.n_low_rtp

    order_rng = np.random.default_rng(
        np.random.SeedSequence(rng_seed, spawn_key=(1, 0))
    )
    order = order_rng.permutation(spec.n_records)

    start = datetime.fromisoformat(spec.start_timestamp)
    records = []
    for i in range(spec.n_records):
        scen, budget = scenarios[order[i]]
        records.append(
            synth_record(
                spec.carrier,
                budget,
                scen,
                record_seed(rng_seed, i),
                bs_id=f"bs{i:04d}",
                timestamp=(start + timedelta(hours=i)).isoformat(),
            )
        )
    return RipMatrix(records=records, carrier=spec.carrier)
