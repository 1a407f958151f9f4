"""The ratio method: recover the squeezing parameter from QNL crossings.

A phase-scanned variance trace crosses its quantum-noise limit at angles that
depend only on the squeezing parameter r, not on loss or dark noise. Three
consecutive crossings therefore split the scan into a below-QNL interval (the
squeezing dip) and an above-QNL interval whose length ratio inverts in closed
form to r. This module finds the crossings in a trace, forms the ratios,
aggregates them, and maps the result to the minimum-uncertainty state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .synth import Trace, default_window, moving_average, robust_noise_db
from .variance import SqueezeState, squeeze_db_from_r

__all__ = [
    "Crossing",
    "CrossingSet",
    "RatioEstimate",
    "SqueezeEstimate",
    "InsufficientScanError",
    "lambda_of_r",
    "crossing_angles",
    "ratio_of_r",
    "r_of_ratio",
    "find_crossings",
    "estimate_ratio",
    "estimate_squeeze",
]

# Traces whose robust noise estimate falls below this are treated as
# noise-free: crossings are then interpolated directly between raw samples,
# which keeps the localization bias at the sampling-grid level.
NOISELESS_DB = 1e-3

# Half-width of the local quadratic refinement window, as a fraction of the
# distance to the nearest neighboring crossing. 0.2 balances curvature bias
# against noise for typical fringe shapes.
REFINE_FRACTION = 0.2


class InsufficientScanError(RuntimeError):
    """The scan does not contain enough QNL crossings to form a ratio."""


@dataclass(frozen=True)
class Crossing:
    """One QNL crossing: position on the scan axis, direction, uncertainty."""

    x: float
    direction: str  # "down" enters the squeezing dip, "up" leaves it
    sigma_x: float

    def __post_init__(self) -> None:
        if self.direction not in ("up", "down"):
            raise ValueError(f"direction must be 'up' or 'down', got {self.direction!r}")


@dataclass(frozen=True)
class CrossingSet:
    """All crossings found within one monotone scan segment."""

    segment: tuple[int, int]
    crossings: tuple[Crossing, ...]

    def __post_init__(self) -> None:
        xs = [c.x for c in self.crossings]
        if sorted(xs) != xs:
            raise ValueError("crossings must be sorted by scan coordinate")
        for a, b in zip(self.crossings, self.crossings[1:]):
            if a.direction == b.direction:
                raise ValueError("crossing directions must alternate")


@dataclass(frozen=True)
class RatioEstimate:
    """Aggregated dip-to-hump interval ratios: per-triple values, mean, standard error."""

    ratios: tuple[float, ...]
    mean: float
    sigma: float
    n: int


@dataclass(frozen=True)
class SqueezeEstimate:
    """Recovered squeezing parameter and the implied minimum-uncertainty state in dB."""

    r: float
    sigma_r: float
    mu_sq_db: float
    mu_asq_db: float
    sigma_db: float
    clipped: bool = False


def lambda_of_r(r: float) -> float:
    """Crossing-condition cosine (cosh 2r - 1) / sinh 2r, which reduces to tanh r.

    Continuous at r = 0 where the value is 0; output lies in [0, 1).
    """
    if r < 0.0:
        raise ValueError(f"squeezing parameter must be >= 0, got {r!r}")
    return math.tanh(r)


def crossing_angles(state: SqueezeState) -> tuple[float, float, float]:
    """Angles of three consecutive QNL crossings of the ideal variance.

    With the squeezing angle at zero these are (-arccos(l)/2, +arccos(l)/2,
    -arccos(l)/2 + pi); a nonzero squeezing angle shifts all three. The first
    two bracket the squeezing dip.
    """
    if state.r == 0.0:
        raise ValueError("r = 0 has no QNL crossings (the variance is flat at the QNL)")
    half = 0.5 * math.acos(lambda_of_r(state.r))
    return (state.theta_s - half, state.theta_s + half, state.theta_s - half + math.pi)


def ratio_of_r(r: float) -> float:
    """Dip-to-hump interval ratio arccos(l) / (pi - arccos(l)); strictly decreasing in r."""
    if r <= 0.0:
        raise ValueError(f"squeezing parameter must be > 0, got {r!r}")
    a = math.acos(lambda_of_r(r))
    return a / (math.pi - a)


def r_of_ratio(ratio: float) -> float:
    """Invert :func:`ratio_of_r`: r = artanh(cos(ratio * pi / (1 + ratio))).

    Accepts ratios in (0, 1]; 1 maps to r = 0 (equal intervals, no squeezing).
    Written with the half-angle identity artanh(cos x) =
    ln((1 - sin^2(x/2)) / sin^2(x/2)) / 2 so that tiny ratios stay finite
    instead of tripping the artanh domain when cos rounds to 1.
    """
    if not 0.0 < ratio <= 1.0:
        raise ValueError(f"ratio must be in (0, 1], got {ratio!r}")
    if ratio == 1.0:
        return 0.0
    half = 0.5 * ratio * math.pi / (1.0 + ratio)
    s2 = math.sin(half) ** 2
    return 0.5 * math.log((1.0 - s2) / s2)


def _refine_crossing(x: np.ndarray, rel: np.ndarray, x0: float, m: int, passes: int = 3) -> float:
    """Polish a crossing by root-centered quadratic fits on the raw samples.

    Re-centering the fit window on the current root estimate cancels the
    odd-order curvature bias that a fixed window would leave behind.
    """
    n = len(rel)
    h = (x[-1] - x[0]) / (n - 1)
    xr = x0
    for _ in range(passes):
        center = int(np.clip(np.searchsorted(x, xr), 1, n - 1))
        a = max(0, center - m)
        b = min(n, center + m + 1)
        if b - a < 5:
            break
        xs = x[a:b] - xr
        coef = np.polyfit(xs, rel[a:b], 2)
        disc = coef[1] ** 2 - 4.0 * coef[0] * coef[2]
        if coef[0] != 0.0 and disc >= 0.0:
            sq = math.sqrt(disc)
            r1 = (-coef[1] + sq) / (2.0 * coef[0])
            r2 = (-coef[1] - sq) / (2.0 * coef[0])
            dx = r1 if abs(r1) < abs(r2) else r2
        elif coef[1] != 0.0:
            dx = -coef[2] / coef[1]
        else:
            break
        if abs(dx) > m * h:
            break
        xr = xr + dx
    return xr


# Levels this close to the QNL (in dB) are numerical dust, not signal; a flat
# vacuum trace sits within round-off of the reference everywhere.
DUST_DB = 1e-9


def _raw_crossings(x: np.ndarray, rel: np.ndarray, h: float) -> list[Crossing]:
    """Sign changes of a noise-free series, located by linear interpolation.

    Samples within DUST_DB of the reference count as exactly on it; a sign
    change across such a run is placed at the run's midpoint.
    """
    sgn = np.where(np.abs(rel) <= DUST_DB, 0.0, np.sign(rel))
    nonzero = np.nonzero(sgn)[0]
    out: list[Crossing] = []
    for a, b in zip(nonzero[:-1], nonzero[1:]):
        if sgn[a] * sgn[b] < 0:
            if b == a + 1:
                xi = x[a] - rel[a] * (x[b] - x[a]) / (rel[b] - rel[a])
            else:
                xi = 0.5 * (x[a] + x[b])
            out.append(Crossing(float(xi), "down" if sgn[a] > 0 else "up", h / 2.0))
    return out


def _hysteresis_crossings(
    x: np.ndarray, rel: np.ndarray, h: float, sigma_db: float, window: int
) -> list[Crossing]:
    """Crossings of a noisy series: hysteresis detection, quadratic refinement.

    Detection runs on the smoothed series with a +-delta hysteresis band so
    that noise wiggles around the QNL cannot register as extra crossings.
    Each detected crossing is then localized on the raw samples.
    """
    n = len(rel)
    smooth = moving_average(rel, window)
    delta = max(4.0 * sigma_db / math.sqrt(window), 0.02 * (smooth.max() - smooth.min()))

    found: list[tuple[int, str]] = []
    state = 0
    pending: int | None = None
    for i in range(n):
        s = smooth[i]
        if state == 0:
            if s > delta:
                state = 1
            elif s < -delta:
                state = -1
            continue
        if pending is None and ((state == 1 and s < 0.0) or (state == -1 and s > 0.0)):
            pending = i
        if pending is not None:
            if state == 1 and s < -delta:
                found.append((pending, "down"))
                state, pending = -1, None
            elif state == -1 and s > delta:
                found.append((pending, "up"))
                state, pending = 1, None
            elif (state == 1 and s > delta) or (state == -1 and s < -delta):
                pending = None  # retreated before confirming: noise excursion

    out: list[Crossing] = []
    for k, (i, direction) in enumerate(found):
        j = max(1, i)
        if smooth[j] != smooth[j - 1]:
            x0 = x[j - 1] - smooth[j - 1] * (x[j] - x[j - 1]) / (smooth[j] - smooth[j - 1])
        else:
            x0 = x[j]
        left = x[found[k - 1][0]] if k > 0 else x[0]
        right = x[found[k + 1][0]] if k + 1 < len(found) else x[-1]
        gap = min(abs(x0 - left), abs(right - x0))
        m = max(4, min(int(round(REFINE_FRACTION * gap / h)), 6 * window))
        xr = _refine_crossing(x, rel, float(x0), m)
        center = int(np.clip(np.searchsorted(x, x0), 1, n - 2))
        slope = abs(smooth[center + 1] - smooth[center - 1]) / (2.0 * h)
        sigma_x = h / 2.0 + (sigma_db / slope if slope > 0.0 else 0.0)
        out.append(Crossing(float(xr), direction, float(sigma_x)))
    return out


def find_crossings(
    trace: Trace,
    segment: tuple[int, int],
    qnl_dbm: float | None = None,
    window: int | None = None,
) -> CrossingSet:
    """Locate all QNL crossings within one monotone segment of a trace.

    The reference level defaults to the trace's ``qnl_dbm`` metadata. At
    least three crossings are required to form a ratio; fewer raise
    :class:`InsufficientScanError`. ``sigma_x`` on each crossing is half the
    sample spacing plus the noise level divided by the local slope.
    """
    start, stop = segment
    if not (0 <= start < stop <= len(trace)):
        raise ValueError(f"segment {segment!r} is not inside the trace")
    if stop - start < 16:
        raise InsufficientScanError(f"segment {segment!r} is shorter than 16 samples")
    ref = trace.qnl_dbm if qnl_dbm is None else float(qnl_dbm)
    x = trace.x[start:stop]
    rel = trace.power_dbm[start:stop] - ref
    h = float(abs(x[-1] - x[0])) / (len(x) - 1)

    sigma_db = robust_noise_db(rel)
    if sigma_db < NOISELESS_DB:
        crossings = _raw_crossings(x, rel, h)
    else:
        w = default_window(len(rel)) if window is None else max(3, int(window) | 1)
        crossings = _hysteresis_crossings(x, rel, h, sigma_db, w)

    if len(crossings) < 3:
        raise InsufficientScanError(
            f"segment {segment!r} has {len(crossings)} QNL crossing(s); "
            "at least 3 are needed, scan a wider phase range"
        )
    return CrossingSet(segment=(start, stop), crossings=tuple(crossings))


def estimate_ratio(crossing_sets) -> RatioEstimate:
    """Pool dip-to-hump ratios from disjoint crossing triples across segments.

    Within each segment, consecutive crossings are grouped into
    non-overlapping triples. The interval that follows a downward crossing
    lies below the QNL, so the triple's ratio is always dip length over hump
    length regardless of which interval comes first. The aggregate is the
    unweighted mean with the standard error over all triples.
    """
    ratios: list[float] = []
    for cs in crossing_sets:
        c = cs.crossings
        for i in range(0, len(c) - 2, 3):
            first = c[i + 1].x - c[i].x
            second = c[i + 2].x - c[i + 1].x
            if c[i].direction == "down":
                ratios.append(first / second)
            else:
                ratios.append(second / first)
    if not ratios:
        raise InsufficientScanError("no segment contains a full crossing triple")
    arr = np.asarray(ratios)
    mean = float(arr.mean())
    sigma = float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else 0.0
    return RatioEstimate(ratios=tuple(float(v) for v in arr), mean=mean, sigma=sigma, n=len(arr))


def estimate_squeeze(ratio: RatioEstimate) -> SqueezeEstimate:
    """Invert a ratio estimate to the minimum-uncertainty state.

    The uncertainty on r is half the range of the inverse over
    [mean - sigma, mean + sigma], which stays meaningful near the ratio -> 1
    boundary where a first-order derivative would not. A mean at or above 1
    means no measurable squeezing and maps to r = 0. Interval ends outside
    (0, 1] are clipped and flagged.
    """
    eps = 1e-12
    clipped = False
    mean = ratio.mean
    if mean <= 0.0:
        raise ValueError(f"ratio mean must be > 0, got {mean!r}")
    if mean > 1.0:
        mean = 1.0
        clipped = True

    lo = mean - ratio.sigma
    hi = mean + ratio.sigma
    if lo < eps:
        lo, clipped = eps, True
    if hi > 1.0:
        hi, clipped = 1.0, True

    r = r_of_ratio(mean)
    sigma_r = 0.5 * (r_of_ratio(lo) - r_of_ratio(hi))
    sq_db = squeeze_db_from_r(r)
    sigma_db = (20.0 / math.log(10.0)) * sigma_r
    return SqueezeEstimate(
        r=r,
        sigma_r=sigma_r,
        mu_sq_db=sq_db,
        mu_asq_db=-sq_db,
        sigma_db=sigma_db,
        clipped=clipped,
    )
