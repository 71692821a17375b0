"""Carrier geometry and intermodulation-product enumeration.

Carriers are modeled as rectangular spectral envelopes. A memoryless
polynomial non-linearity mixing m carriers produces products at every
signed integer combination of the carrier center frequencies; each
product is characterized by its coefficient vector, order, center
frequency, bandwidth and power relative to the fundamental.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

DIRECTIONS = ("uplink", "downlink")


@dataclass(frozen=True)
class CarrierConfig:
    """One carrier: center frequency, bandwidth and PRB layout.

    ``n_sc_per_prb`` is the per-PRB subcarrier count (3GPP convention);
    the full-band subcarrier budget floor(bandwidth / spacing) is *not*
    enforced against it. Control-plane PRBs sit half per band edge, so
    ``n_prb_control`` must be even.
    """

    center_freq_hz: float
    bandwidth_hz: float
    subcarrier_spacing_hz: float
    n_prb: int
    n_sc_per_prb: int
    n_prb_control: int
    direction: str = "uplink"

    def __post_init__(self):
        if self.center_freq_hz <= 0:
            raise ValueError("center_freq_hz must be positive")
        if self.bandwidth_hz <= 1.0:
            raise ValueError("bandwidth_hz must exceed 1 Hz")
        if self.subcarrier_spacing_hz <= 0:
            raise ValueError("subcarrier_spacing_hz must be positive")
        if self.n_prb < 1:
            raise ValueError("n_prb must be >= 1")
        if self.n_sc_per_prb < 1:
            raise ValueError("n_sc_per_prb must be >= 1")
        if self.n_prb_control < 0 or self.n_prb_control % 2 != 0:
            raise ValueError("n_prb_control must be even and non-negative")
        if self.n_prb_control >= self.n_prb:
            raise ValueError("n_prb_control must be smaller than n_prb")
        if self.direction not in DIRECTIONS:
            raise ValueError(f"direction must be one of {DIRECTIONS}")

    @property
    def n_prb_user(self) -> int:
        return self.n_prb - self.n_prb_control

    @property
    def band_edges_hz(self) -> tuple[float, float]:
        half = self.bandwidth_hz / 2.0
        return (self.center_freq_hz - half, self.center_freq_hz + half)


@dataclass(frozen=True)
class Nonlinearity:
    """Memoryless polynomial x -> sum(a_k * x**k), k = 1..order."""

    coefficients: tuple[float, ...]

    def __post_init__(self):
        if len(self.coefficients) < 2:
            raise ValueError("non-linearity order must be >= 2")
        if any(a == 0 for a in self.coefficients):
            raise ValueError("all listed coefficients must be non-zero")

    @property
    def order(self) -> int:
        return len(self.coefficients)


@dataclass(frozen=True)
class ImProduct:
    """One intermodulation product of a carrier set.

    ``coeffs`` are the signed integer multipliers of the carrier center
    frequencies; the order is the L1 norm of that vector and the
    bandwidth is the coefficient-weighted sum of carrier bandwidths
    (order times B when all carriers share bandwidth B). ``rel_power``
    is the power of the product relative to the fundamental.
    ``overlap_fraction`` is filled in by :func:`products_in_band`.
    """

    coeffs: tuple[int, ...]
    order: int
    center_freq_hz: float
    bandwidth_hz: float
    rel_power: float
    overlap_fraction: float | None = None

    def __post_init__(self):
        if self.order != sum(abs(k) for k in self.coeffs):
            raise ValueError("order must equal the sum of |coefficients|")
        if self.order < 2:
            raise ValueError("product order must be >= 2")
        if self.bandwidth_hz <= 0:
            raise ValueError("bandwidth_hz must be positive")
        if self.rel_power <= 0:
            raise ValueError("rel_power must be positive")


def im_power_scaling(order: int, t_symbol: float, b_tilde: float) -> float:
    """Power of the order-p mixing product, 1 / (T * |b_tilde|**(p+1)).

    ``b_tilde`` is the collective pulse-amplitude coefficient and must
    exceed 1 so that power strictly decreases with the order.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    if t_symbol <= 0:
        raise ValueError("t_symbol must be positive")
    if b_tilde <= 1.0:
        raise ValueError("b_tilde must exceed 1")
    return 1.0 / (t_symbol * abs(b_tilde) ** (order + 1))


def _coeff_vectors(n_carriers: int, max_order: int):
    """Yield all integer vectors with 1 <= sum(|k_i|) <= max_order."""
    vec = [0] * n_carriers

    def rec(i: int, budget: int):
        if i == n_carriers:
            yield tuple(vec)
            return
        for k in range(-budget, budget + 1):
            vec[i] = k
            yield from rec(i + 1, budget - abs(k))
        vec[i] = 0

    yield from rec(0, max_order)


def enumerate_im_products(
    carriers: list[CarrierConfig],
    max_order: int,
    *,
    b_tilde: float = 2.0,
) -> list[ImProduct]:
    """Enumerate all mixing products of order 2..max_order.

    Products are deduplicated up to a global sign flip of the
    coefficient vector by keeping only positive center frequencies
    (the negative-frequency mirror of a real passband signal carries
    no extra information). Output is sorted by (order, center
    frequency, coefficients) and is therefore deterministic.
    """
    if len(carriers) < 2:
        raise ValueError("need at least two carriers to form mixing products")
    if not 2 <= max_order <= 9:
        raise ValueError("max_order must be in [2, 9]")
    freqs = [c.center_freq_hz for c in carriers]
    bws = [c.bandwidth_hz for c in carriers]
    # T cancels in the fundamental-relative ratio; any positive value works.
    p_fund = im_power_scaling(1, 1.0, b_tilde)

    out = []
    for coeffs in _coeff_vectors(len(carriers), max_order):
        order = sum(abs(k) for k in coeffs)
        if order < 2:
            continue
        center = sum(k * f for k, f in zip(coeffs, freqs))
        if center <= 0:
            continue
        bandwidth = sum(abs(k) * b for k, b in zip(coeffs, bws))
        rel_power = im_power_scaling(order, 1.0, b_tilde) / p_fund
        out.append(
            ImProduct(
                coeffs=coeffs,
                order=order,
                center_freq_hz=center,
                bandwidth_hz=bandwidth,
                rel_power=rel_power,
            )
        )
    out.sort(key=lambda p: (p.order, p.center_freq_hz, p.coeffs))
    return out


def products_in_band(
    products: list[ImProduct], victim: CarrierConfig
) -> list[ImProduct]:
    """Keep products whose spectral support overlaps the victim band.

    Each kept product carries the fraction of its own bandwidth that
    falls inside the victim band (1.0 for full containment). Input
    ordering is preserved.
    """
    lo, hi = victim.band_edges_hz
    kept = []
    for p in products:
        p_lo = p.center_freq_hz - p.bandwidth_hz / 2.0
        p_hi = p.center_freq_hz + p.bandwidth_hz / 2.0
        overlap = min(hi, p_hi) - max(lo, p_lo)
        if overlap > 0:
            kept.append(replace(p, overlap_fraction=overlap / p.bandwidth_hz))
    return kept


def spectral_support(
    order: int,
    bandwidth_hz: float,
    grid_points: int,
    *,
    span_hz: float | None = None,
    b_tilde: float = 2.0,
    rel_threshold: float = 0.0,
) -> tuple[float, float]:
    """Measure the support of the p-fold self-convolution of a carrier pulse.

    The carrier envelope is a rectangular pulse of width ``bandwidth_hz``
    and amplitude 1/b_tilde (b_tilde > 1, so the cascade attenuates).
    Convolving ``order`` copies on a discrete frequency grid yields the
    envelope of the order-p mixing product; its support grows to
    order * bandwidth while its peak shrinks.

    Returns ``(support_hz, peak_rel_amplitude)`` where the peak is
    relative to the order-1 pulse. Support is the extent of bins with
    magnitude strictly above ``rel_threshold`` times the peak; the
    default 0.0 counts every non-zero bin, which for direct convolution
    of exact rectangle samples recovers order * bandwidth to within a
    grid bin. Raising the threshold trims the d**(p-1) edge tails and
    shortens the measured support accordingly.

    When ``span_hz`` is omitted the grid is sized to (order + 1) times
    the bandwidth with the pulse width an exact number of bins; an
    explicit span below (order + 1) * bandwidth is rejected.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    if bandwidth_hz <= 1.0:
        raise ValueError("bandwidth_hz must exceed 1 Hz")
    if grid_points < 1024:
        raise ValueError("grid_points must be >= 1024")
    if b_tilde <= 1.0:
        raise ValueError("b_tilde must exceed 1")
    if rel_threshold < 0 or rel_threshold >= 1:
        raise ValueError("rel_threshold must be in [0, 1)")

    # Work in units of the pulse bandwidth: width 1.0, grid step 1/bins_per_b.
    if span_hz is None:
        bins_per_b = grid_points // (order + 1)
    else:
        if span_hz < (order + 1) * bandwidth_hz:
            raise ValueError(
                "span_hz must cover at least (order + 1) * bandwidth_hz"
            )
        bins_per_b = int(round(grid_points * bandwidth_hz / span_hz))
    if bins_per_b < 2:
        raise ValueError("grid too coarse for the requested span")
    du = 1.0 / bins_per_b

    pulse = np.full(bins_per_b + 1, 1.0 / b_tilde)
    acc = pulse
    for _ in range(order - 1):
        # du factor keeps the discrete convolution a Riemann sum of the
        # continuous one.
        acc = np.convolve(acc, pulse) * du

    peak = float(acc.max())
    above = np.flatnonzero(np.abs(acc) > rel_threshold * peak)
    support_u = (above[-1] - above[0]) * du
    peak_rel = peak * b_tilde
    return support_u * bandwidth_hz, peak_rel
