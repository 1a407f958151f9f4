"""Synthetic zero-span spectrum-analyzer traces of phase-scanned homodyne data.

A trace emulates what a spectrum analyzer records while a PZT ramps the local
oscillator phase back and forth: alternating monotone sweeps, an optional
nonlinear ramp, and Gaussian trace noise applied in the dB domain. Traces
serve as estimator fixtures and demo data; they carry their acquisition
metadata so the analysis side can run without extra configuration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .variance import ChannelModel, SqueezeState, db_from_linear, detected_variance

__all__ = [
    "ScanSpec",
    "NoiseSpec",
    "Trace",
    "synthesize_trace",
    "synthesize_trace_from_variance",
    "segment_monotone",
    "detect_turning_points",
    "moving_average",
    "robust_noise_db",
]

REQUIRED_META = ("qnl_dbm", "dark_dbm")


@dataclass(frozen=True)
class ScanSpec:
    """Phase-scan geometry: sweeps, endpoints and optional ramp distortion.

    ``n_samples`` counts samples per monotone segment; sweep direction
    alternates between segments. ``ramp_distortion`` holds polynomial
    coefficients (a1, a2, ...) of a strictly increasing map
    p(u) = a1 u + a2 u^2 + ... from nominal scan fraction to actual scan
    fraction, with p(0) = 0 and p(1) = 1 enforced. Empty means a linear ramp.
    A quadratic distortion of coefficient c is written (1 - c, c).
    """

    n_samples: int = 1024
    theta_start: float = -0.6
    theta_end: float = -0.6 + 1.2 * math.pi
    n_sweeps: int = 2
    ramp_distortion: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.n_samples < 16:
            raise ValueError(f"need at least 16 samples per segment, got {self.n_samples}")
        if self.n_sweeps < 1:
            raise ValueError(f"need at least one sweep, got {self.n_sweeps}")
        if not (math.isfinite(self.theta_start) and math.isfinite(self.theta_end)):
            raise ValueError("scan endpoints must be finite")
        if self.theta_end == self.theta_start:
            raise ValueError("scan endpoints must differ")
        object.__setattr__(self, "ramp_distortion", tuple(float(c) for c in self.ramp_distortion))
        if self.ramp_distortion:
            if abs(sum(self.ramp_distortion) - 1.0) > 1e-9:
                raise ValueError("ramp polynomial must map 1 -> 1 (coefficients must sum to 1)")
            u = np.linspace(0.0, 1.0, 513)
            dp = np.polyval(np.polyder(self._poly()), u)
            if np.any(dp <= 0.0):
                raise ValueError("ramp polynomial must be strictly increasing on [0, 1]")

    def _poly(self) -> np.ndarray:
        # np.polyval coefficient order: highest degree first, constant term 0
        return np.array(self.ramp_distortion[::-1] + (0.0,), dtype=float)

    def phase_fraction(self, u):
        """Map nominal scan fraction to actual scan fraction through the ramp."""
        if not self.ramp_distortion:
            return np.asarray(u, dtype=float)
        return np.polyval(self._poly(), np.asarray(u, dtype=float))

    def thetas(self) -> np.ndarray:
        """Quadrature angle at every sample, all sweeps concatenated."""
        u = np.linspace(0.0, 1.0, self.n_samples)
        v = self.phase_fraction(u)
        span = self.theta_end - self.theta_start
        fwd = self.theta_start + span * v
        rev = self.theta_end - span * v
        return np.concatenate([fwd if k % 2 == 0 else rev for k in range(self.n_sweeps)])

    def segment_bounds(self) -> list[tuple[int, int]]:
        """Half-open [start, stop) index range of each monotone segment."""
        n = self.n_samples
        return [(k * n, (k + 1) * n) for k in range(self.n_sweeps)]

    @property
    def total_samples(self) -> int:
        return self.n_samples * self.n_sweeps


@dataclass(frozen=True)
class NoiseSpec:
    """Additive Gaussian trace noise in the dB domain, with a fixed RNG seed."""

    sigma_db: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.sigma_db) and self.sigma_db >= 0.0):
            raise ValueError(f"noise sigma must be finite and >= 0, got {self.sigma_db!r}")


@dataclass(frozen=True, eq=False)
class Trace:
    """An acquired (or synthesized) trace: scan coordinate vs power in dBm.

    ``x`` is a time-like scan coordinate, strictly increasing over the whole
    trace. ``meta`` must contain the numeric keys ``qnl_dbm`` and ``dark_dbm``
    with qnl_dbm > dark_dbm (dark_dbm may be -inf when there is no dark
    noise).
    """

    x: np.ndarray
    power_dbm: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=float)
        p = np.asarray(self.power_dbm, dtype=float)
        if x.ndim != 1 or p.ndim != 1 or len(x) != len(p):
            raise ValueError("x and power_dbm must be 1-d arrays of equal length")
        if not np.all(np.isfinite(x)):
            raise ValueError("scan coordinates must be finite")
        if len(x) > 1 and not np.all(np.diff(x) > 0):
            raise ValueError("scan coordinates must be strictly increasing")
        if not np.all(np.isfinite(p)):
            raise ValueError("power values must be finite")
        for key in REQUIRED_META:
            if key not in self.meta:
                raise ValueError(f"trace metadata is missing required key {key!r}")
            float(self.meta[key])
        if not float(self.meta["qnl_dbm"]) > float(self.meta["dark_dbm"]):
            raise ValueError("metadata must satisfy qnl_dbm > dark_dbm")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "power_dbm", p)

    def __len__(self) -> int:
        return len(self.x)

    @property
    def qnl_dbm(self) -> float:
        return float(self.meta["qnl_dbm"])

    @property
    def dark_dbm(self) -> float:
        return float(self.meta["dark_dbm"])


def synthesize_trace(
    state: SqueezeState,
    chan: ChannelModel,
    scan: ScanSpec = ScanSpec(),
    noise: NoiseSpec = NoiseSpec(),
    qnl_dbm: float = 0.0,
    extra_meta: dict | None = None,
) -> Trace:
    """Forward-model a scanned homodyne trace of a minimum-uncertainty state.

    Each sample is the detected variance at the swept quadrature angle,
    expressed in dB relative to the channel QNL, anchored at ``qnl_dbm`` and
    jittered by the dB-domain noise. Deterministic for a fixed seed.
    """

    def variance(theta):
        return detected_variance(state, theta, chan)

    meta = {
        "r": state.r,
        "theta_s": state.theta_s,
        "eta": chan.eta,
        **(extra_meta or {}),
    }
    return synthesize_trace_from_variance(variance, chan, scan, noise, qnl_dbm, extra_meta=meta)


def synthesize_trace_from_variance(
    variance_of_theta,
    chan: ChannelModel,
    scan: ScanSpec = ScanSpec(),
    noise: NoiseSpec = NoiseSpec(),
    qnl_dbm: float = 0.0,
    extra_meta: dict | None = None,
) -> Trace:
    """Synthesize a trace from an arbitrary detected-variance function of theta.

    ``variance_of_theta`` must return linear variance in units of ``chan.qnl``.
    This is the escape hatch for non-minimum-uncertainty fixtures; the loss
    and dark-noise model then has to be part of the callable itself when it
    bypasses :func:`synthesize_trace`.
    """
    thetas = scan.thetas()
    v = np.asarray(variance_of_theta(thetas), dtype=float)
    if v.shape != thetas.shape or np.any(v <= 0.0):
        raise ValueError("variance function must return positive values for every angle")
    power = db_from_linear(v, chan.qnl) + qnl_dbm
    if noise.sigma_db > 0.0:
        rng = np.random.default_rng(noise.seed)
        power = power + rng.normal(0.0, noise.sigma_db, power.shape)
    dark_dbm = -math.inf if chan.dark == 0.0 else qnl_dbm + 10.0 * math.log10(chan.dark / chan.qnl)
    meta = {
        "qnl_dbm": qnl_dbm,
        "dark_dbm": dark_dbm,
        "sigma_db": noise.sigma_db,
        "seed": noise.seed,
        "n_samples": scan.n_samples,
        "n_sweeps": scan.n_sweeps,
        "theta_start": scan.theta_start,
        "theta_end": scan.theta_end,
    }
    if scan.ramp_distortion:
        meta["ramp_distortion"] = ",".join(repr(c) for c in scan.ramp_distortion)
    meta.update(extra_meta or {})
    return Trace(x=np.arange(scan.total_samples, dtype=float), power_dbm=power, meta=meta)


def moving_average(values: np.ndarray, window: int) -> np.ndarray:
    """Centered moving average with reflect padding; window forced odd."""
    values = np.asarray(values, dtype=float)
    if window <= 1:
        return values.copy()
    if window % 2 == 0:
        window += 1
    pad = window // 2
    padded = np.pad(values, (pad, pad), mode="reflect")
    return np.convolve(padded, np.ones(window) / window, mode="valid")


def robust_noise_db(values: np.ndarray) -> float:
    """Noise level of a trace in dB, from the MAD of second differences.

    Second differences suppress the smooth fringe structure, so the estimate
    reflects the additive trace noise even on strongly curved traces.
    """
    values = np.asarray(values, dtype=float)
    if len(values) < 4:
        return 0.0
    d2 = np.diff(values, n=2)
    return float(1.4826 * np.median(np.abs(d2)) / math.sqrt(6.0))


def default_window(n: int) -> int:
    """Smoothing window used for segmentation and crossing detection."""
    w = max(5, n // 64)
    return w + 1 if w % 2 == 0 else w


def detect_turning_points(power_dbm: np.ndarray, window: int | None = None) -> list[int]:
    """Locate PZT direction changes in an ingested trace.

    The trace is smoothed, its local extrema are collected, and extrema whose
    level sits well inside the dip-to-hump range are kept: a direction change
    at a generic phase produces an extremum at an intermediate level, while
    fringe extrema sit at the dip or hump level. Nearby candidates are merged
    and refined by a quadratic fit. A reversal that happens to coincide with
    a fringe extremum is not detectable by this rule.
    """
    power = np.asarray(power_dbm, dtype=float)
    n = len(power)
    w = default_window(n) if window is None else max(3, int(window) | 1)
    smooth = moving_average(power, w)

    d = np.sign(np.diff(smooth))
    for i in range(1, len(d)):  # carry sign through flat runs
        if d[i] == 0:
            d[i] = d[i - 1]
    extrema = np.nonzero(d[1:] * d[:-1] < 0)[0] + 1

    lo, hi = float(smooth.min()), float(smooth.max())
    margin = 0.2 * (hi - lo)
    mid = [int(i) for i in extrema if lo + margin < smooth[i] < hi - margin]
    # drop candidates too close to the trace ends (padding artifacts)
    mid = [i for i in mid if 3 * w <= i <= n - 1 - 3 * w]

    clusters: list[list[int]] = []
    for i in mid:
        if clusters and i - clusters[-1][-1] <= 2 * w:
            clusters[-1].append(i)
        else:
            clusters.append([i])

    turns = []
    for grp in clusters:
        c = int(round(float(np.mean(grp))))
        half = 2 * w
        a, b = max(0, c - half), min(n, c + half + 1)
        xs = np.arange(a, b, dtype=float)
        coef = np.polyfit(xs, smooth[a:b], 2)
        if abs(coef[0]) > 1e-12:
            vertex = -coef[1] / (2.0 * coef[0])
            if a <= vertex <= b - 1:
                c = int(round(vertex))
        if not turns or c - turns[-1] > 4 * w:
            turns.append(c)
    return turns


def segment_monotone(trace: Trace, scan: ScanSpec | None = None) -> list[tuple[int, int]]:
    """Split a trace into half-open index ranges of monotone phase.

    With a ScanSpec the boundaries are exact by construction. Without one,
    boundaries come from synthesized metadata when present, and otherwise
    from :func:`detect_turning_points`.
    """
    n = len(trace)
    if scan is not None:
        if scan.total_samples != n:
            raise ValueError(
                f"scan spec describes {scan.total_samples} samples but trace has {n}"
            )
        return scan.segment_bounds()
    if "n_samples" in trace.meta and "n_sweeps" in trace.meta:
        seg = int(trace.meta["n_samples"])
        sweeps = int(trace.meta["n_sweeps"])
        if seg * sweeps == n and seg >= 16:
            return [(k * seg, (k + 1) * seg) for k in range(sweeps)]
    if n < 16:
        raise ValueError(f"trace of {n} samples is shorter than one minimal segment")
    boundaries = [0] + detect_turning_points(trace.power_dbm) + [n]
    return [(boundaries[i], boundaries[i + 1]) for i in range(len(boundaries) - 1)]
