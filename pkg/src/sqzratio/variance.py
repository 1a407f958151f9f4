"""Closed-form variance models for squeezed light under loss and dark noise.

All computation is done in linear variance units relative to an explicit
quantum-noise-limit (QNL) reference. Decibel values appear only at the I/O
boundary, through :func:`db_from_linear` and :func:`linear_from_db`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SqueezeState",
    "ChannelModel",
    "VarianceSample",
    "mu_variance",
    "apply_loss",
    "detected_variance",
    "db_from_linear",
    "linear_from_db",
    "squeeze_db_from_r",
    "r_from_squeeze_db",
]


@dataclass(frozen=True)
class SqueezeState:
    """A minimum-uncertainty squeezed state.

    ``r`` is the (dimensionless) squeezing parameter, ``theta_s`` the
    squeezing angle in radians. The quadrature variance is pi-periodic in
    ``theta_s``, so the angle is normalized into [0, pi) on construction.
    """

    r: float
    theta_s: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.r) and self.r >= 0.0):
            raise ValueError(f"squeezing parameter must be finite and >= 0, got {self.r!r}")
        if not math.isfinite(self.theta_s):
            raise ValueError(f"squeezing angle must be finite, got {self.theta_s!r}")
        object.__setattr__(self, "theta_s", self.theta_s % math.pi)


@dataclass(frozen=True)
class ChannelModel:
    """Detection channel: total efficiency, QNL reference and dark noise.

    ``qnl`` and ``dark`` are linear variances in the same (arbitrary) units;
    ``eta`` is the total efficiency of the optical path, in [0, 1].
    """

    eta: float
    qnl: float = 1.0
    dark: float = 0.0

    def __post_init__(self) -> None:
        if not (0.0 <= self.eta <= 1.0):
            raise ValueError(f"efficiency must be in [0, 1], got {self.eta!r}")
        if not (math.isfinite(self.qnl) and self.qnl > 0.0):
            raise ValueError(f"QNL variance must be > 0, got {self.qnl!r}")
        if not (0.0 <= self.dark < self.qnl):
            raise ValueError(
                f"dark variance must satisfy 0 <= dark < qnl, got dark={self.dark!r}, qnl={self.qnl!r}"
            )

    @classmethod
    def from_gap_db(cls, eta: float, gap_db: float, qnl: float = 1.0) -> "ChannelModel":
        """Build a channel from the QNL-to-dark gap in dB (gap > 0; inf means no dark noise)."""
        if not gap_db > 0.0:
            raise ValueError(f"QNL-to-dark gap must be > 0 dB, got {gap_db!r}")
        dark = 0.0 if math.isinf(gap_db) else qnl * 10.0 ** (-gap_db / 10.0)
        return cls(eta=eta, qnl=qnl, dark=dark)


@dataclass(frozen=True)
class VarianceSample:
    """A single (quadrature angle, linear variance) point."""

    theta: float
    value: float

    def __post_init__(self) -> None:
        if not self.value > 0.0:
            raise ValueError(f"variance must be > 0, got {self.value!r}")


def mu_variance(state: SqueezeState, theta):
    """Quadrature variance of the minimum-uncertainty state at rotation angle theta.

    cosh(2r) - sinh(2r) * cos(2 (theta - theta_s)), in QNL units. Minimum
    exp(-2r) at theta_s, maximum exp(+2r) a quarter turn away; the product of
    the two extremes is 1 (the minimum-uncertainty condition).

    Evaluated as exp(-2r) cos^2(d) + exp(+2r) sin^2(d), which is the same
    function without the catastrophic cancellation near the squeezed
    quadrature that the cosh/sinh form suffers at large r.
    """
    delta = np.asarray(theta) - state.theta_s
    c, s = np.cos(delta), np.sin(delta)
    return math.exp(-2.0 * state.r) * c * c + math.exp(2.0 * state.r) * s * s


def apply_loss(mu, eta: float):
    """Variance after a loss channel of efficiency eta: 1 + eta * (mu - 1).

    The QNL (mu = 1) is a fixed point for every eta.
    """
    if not (0.0 <= eta <= 1.0):
        raise ValueError(f"efficiency must be in [0, 1], got {eta!r}")
    if np.any(np.asarray(mu) <= 0.0):
        raise ValueError("input variance must be > 0")
    return 1.0 + eta * (np.asarray(mu) - 1.0)


def detected_variance(state: SqueezeState, theta, chan: ChannelModel):
    """Detected variance in absolute units of ``chan.qnl``, dark noise included.

    (1 + eta (mu - 1)) * (qnl - dark) + dark. Equals qnl exactly wherever
    mu_variance is 1, independent of eta and dark, which is what makes the
    QNL crossings of a scanned trace loss-invariant.
    """
    loss = apply_loss(mu_variance(state, theta), chan.eta)
    return loss * (chan.qnl - chan.dark) + chan.dark


def db_from_linear(value, ref: float = 1.0):
    """10 log10(value / ref). Inputs must be positive."""
    if not ref > 0.0:
        raise ValueError(f"reference must be > 0, got {ref!r}")
    arr = np.asarray(value, dtype=float)
    if np.any(arr <= 0.0):
        raise ValueError("value must be > 0 for a dB conversion")
    return 10.0 * np.log10(arr / ref)


def linear_from_db(value_db, ref: float = 1.0):
    """Inverse of :func:`db_from_linear`: ref * 10^(dB / 10)."""
    if not ref > 0.0:
        raise ValueError(f"reference must be > 0, got {ref!r}")
    return ref * 10.0 ** (np.asarray(value_db, dtype=float) / 10.0)


def squeeze_db_from_r(r: float) -> float:
    """Squeezed-quadrature variance of an ideal state, in dB: 10 log10(exp(-2r))."""
    if r < 0.0:
        raise ValueError(f"squeezing parameter must be >= 0, got {r!r}")
    return -20.0 * r / math.log(10.0)


def r_from_squeeze_db(squeeze_db: float) -> float:
    """Squeezing parameter from the squeezed-quadrature dB value (<= 0)."""
    if squeeze_db > 0.0:
        raise ValueError(f"squeezed-quadrature level must be <= 0 dB, got {squeeze_db!r}")
    return -squeeze_db * math.log(10.0) / 20.0
