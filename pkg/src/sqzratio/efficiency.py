"""Loss-budget analysis: extract the channel efficiency and factor out the
escape efficiency, with a dual-quadrature consistency check of the
minimum-uncertainty assumption.

Comparing the detected variance against the reconstructed ideal variance
yields the total efficiency once per quadrature. If the source really emitted
a minimum-uncertainty state the two numbers agree; a significant discrepancy
is direct evidence of excess noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .estimator import r_of_ratio
from .variance import apply_loss, linear_from_db

__all__ = [
    "EtaEstimate",
    "ConsistencyVerdict",
    "EfficiencyBudget",
    "RatioCurve",
    "extract_efficiency",
    "extract_efficiency_db",
    "consistency_check",
    "escape_efficiency",
    "total_efficiency",
    "variance_vs_ratio_curve",
]


@dataclass(frozen=True)
class EtaEstimate:
    """An extracted efficiency with its interval-propagated uncertainty."""

    eta: float
    sigma: float
    unphysical: bool


@dataclass(frozen=True)
class ConsistencyVerdict:
    """Outcome of the dual-quadrature minimum-uncertainty consistency test."""

    eta_plus: float
    sigma_plus: float
    eta_minus: float
    sigma_minus: float
    z: float
    k: float
    consistent: bool


@dataclass(frozen=True)
class EfficiencyBudget:
    """Known component efficiencies and the escape efficiency derived from them."""

    eta_det: float
    eta_vis: float
    eta_opt: float
    eta_esc: float
    unphysical: bool


@dataclass(frozen=True)
class RatioCurve:
    """Detected squeezing and anti-squeezing in dB as functions of the ratio."""

    eta: float
    ratio: np.ndarray
    sq_db: np.ndarray
    asq_db: np.ndarray


def _eta_point(det: float, mu: float, qnl: float, dark: float) -> float:
    if mu == 1.0:
        raise ValueError("efficiency is undefined at the QNL (ideal variance = 1)")
    if not qnl > dark:
        raise ValueError("need qnl > dark for an efficiency extraction")
    return (det - qnl) / ((mu - 1.0) * (qnl - dark))


def _interval(values) -> tuple[float, float]:
    lo, hi = min(values), max(values)
    center = values[0]  # first entry is the central evaluation by convention
    return center, 0.5 * (hi - lo)


def extract_efficiency(
    det: float,
    mu: float,
    qnl: float = 1.0,
    dark: float = 0.0,
    det_sigma: float = 0.0,
    mu_sigma: float = 0.0,
    qnl_sigma: float = 0.0,
    dark_sigma: float = 0.0,
) -> EtaEstimate:
    """Efficiency from one quadrature: (det - qnl) / ((mu - 1)(qnl - dark)).

    All inputs are linear variances. The uncertainty is propagated by
    evaluating the formula on the corners of the input sigma box and taking
    half the spread; the formula is monotone in each argument, so the corners
    bound the range. A result outside [0, 1 + sigma] is flagged unphysical.
    """
    corners = [_eta_point(det, mu, qnl, dark)]
    offsets = [
        (ds, ms, qs, ks)
        for ds, ms, qs, ks in product(*[(-s, s) if s else (0.0,) for s in (det_sigma, mu_sigma, qnl_sigma, dark_sigma)])
    ]
    for ds, ms, qs, ks in offsets:
        if (ds, ms, qs, ks) == (0.0, 0.0, 0.0, 0.0):
            continue
        if (mu + ms - 1.0) * (mu - 1.0) <= 0.0:
            raise ValueError("mu sigma box straddles the QNL; extraction is undefined")
        corners.append(_eta_point(det + ds, mu + ms, qnl + qs, dark + ks))
    eta, sigma = _interval(corners)
    unphysical = eta < 0.0 or eta > 1.0 + sigma
    return EtaEstimate(eta=eta, sigma=sigma, unphysical=unphysical)


def extract_efficiency_db(
    det_db: float,
    mu_db: float,
    gap_db: float,
    det_sigma_db: float = 0.0,
    mu_sigma_db: float = 0.0,
    gap_sigma_db: float = 0.0,
) -> EtaEstimate:
    """Efficiency from dB inputs relative to the QNL.

    ``det_db`` is the detected level, ``mu_db`` the reconstructed ideal level,
    ``gap_db`` the QNL-to-dark-noise gap (inf when dark noise is negligible).
    Sigmas are in dB and propagate through the same corner-box rule.
    """

    def eta_at(ddb: float, mdb: float, gdb: float) -> float:
        dark = 0.0 if math.isinf(gdb) else float(linear_from_db(-gdb))
        return _eta_point(float(linear_from_db(ddb)), float(linear_from_db(mdb)), 1.0, dark)

    corners = [eta_at(det_db, mu_db, gap_db)]
    for ds, ms, gs in product(
        *[(-s, s) if s else (0.0,) for s in (det_sigma_db, mu_sigma_db, gap_sigma_db)]
    ):
        if (ds, ms, gs) == (0.0, 0.0, 0.0):
            continue
        if (mu_db + ms) * mu_db <= 0.0:
            raise ValueError("mu sigma box straddles the QNL; extraction is undefined")
        corners.append(eta_at(det_db + ds, mu_db + ms, gap_db + gs))
    eta, sigma = _interval(corners)
    unphysical = eta < 0.0 or eta > 1.0 + sigma
    return EtaEstimate(eta=eta, sigma=sigma, unphysical=unphysical)


def consistency_check(
    eta_plus: float,
    sigma_plus: float,
    eta_minus: float,
    sigma_minus: float,
    k: float = 2.0,
) -> ConsistencyVerdict:
    """Compare the two quadrature efficiencies in units of their combined sigma.

    consistent iff |eta_plus - eta_minus| <= k * sqrt(sigma_plus^2 +
    sigma_minus^2). Two exact values that differ have z = inf.
    """
    if not (math.isfinite(eta_plus) and math.isfinite(eta_minus)):
        raise ValueError("efficiencies must be finite")
    if sigma_plus < 0.0 or sigma_minus < 0.0:
        raise ValueError("sigmas must be >= 0")
    if k <= 0.0:
        raise ValueError(f"threshold k must be > 0, got {k!r}")
    diff = abs(eta_plus - eta_minus)
    denom = math.hypot(sigma_plus, sigma_minus)
    if denom == 0.0:
        z = 0.0 if diff == 0.0 else math.inf
    else:
        z = diff / denom
    return ConsistencyVerdict(
        eta_plus=eta_plus,
        sigma_plus=sigma_plus,
        eta_minus=eta_minus,
        sigma_minus=sigma_minus,
        z=z,
        k=k,
        consistent=z <= k,
    )


def total_efficiency(components) -> float:
    """Product of component efficiencies; an empty list is the identity 1."""
    eta = 1.0
    for c in components:
        if not 0.0 < c <= 1.0:
            raise ValueError(f"component efficiency must be in (0, 1], got {c!r}")
        eta *= c
    return eta


def escape_efficiency(
    eta_total: float, eta_det: float, eta_vis: float, eta_opt: float
) -> EfficiencyBudget:
    """Factor the cavity escape efficiency out of the measured total.

    eta_esc = eta_total / (eta_det * eta_vis * eta_opt). A result above 1 is
    flagged unphysical rather than rejected: it is evidence against either
    the budget or the minimum-uncertainty assumption.
    """
    if not eta_total > 0.0:
        raise ValueError(f"total efficiency must be > 0, got {eta_total!r}")
    known = total_efficiency([eta_det, eta_vis, eta_opt])
    esc = eta_total / known
    return EfficiencyBudget(
        eta_det=eta_det,
        eta_vis=eta_vis,
        eta_opt=eta_opt,
        eta_esc=esc,
        unphysical=esc > 1.0,
    )


def variance_vs_ratio_curve(eta: float, ratios) -> RatioCurve:
    """Detected squeezing/anti-squeezing in dB versus the crossing ratio.

    For each ratio the implied r is computed and pushed through a dark-free
    loss channel of efficiency eta. Both curves approach 0 dB as the ratio
    approaches 1 (no squeezing).
    """
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"efficiency must be in (0, 1], got {eta!r}")
    grid = np.asarray(ratios, dtype=float)
    if grid.ndim != 1 or len(grid) == 0:
        raise ValueError("ratio grid must be a non-empty 1-d array")
    if np.any(grid <= 0.0) or np.any(grid >= 1.0):
        raise ValueError("ratio grid values must lie in (0, 1)")
    r = np.array([r_of_ratio(float(v)) for v in grid])
    sq = apply_loss(np.exp(-2.0 * r), eta)
    asq = apply_loss(np.exp(2.0 * r), eta)
    return RatioCurve(
        eta=eta,
        ratio=grid,
        sq_db=10.0 * np.log10(sq),
        asq_db=10.0 * np.log10(asq),
    )
