"""Rational discrete transfer functions: simulation, frequency response,
interconnection, and self-contained polynomial root finding.

Polynomial coefficients are stored in descending powers of z. A pole at
z=1 (integrator) is legal for simulation over finite horizons; only
frequency-response evaluation guards against landing on a pole.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.signal import lfilter

from .errors import (
    ImproperTransferFunction,
    PoleOnGrid,
    RootFindingError,
    SampleRateMismatch,
)
from .signals import Sequence, delta

_TRIM_REL = 1e-14


def trim_leading(coeffs: np.ndarray) -> np.ndarray:
    """Drop leading coefficients below 1e-14 of the coefficient norm."""
    c = np.asarray(coeffs, dtype=float)
    if len(c) == 0:
        return c
    tol = _TRIM_REL * np.linalg.norm(c)
    k = 0
    while k < len(c) - 1 and abs(c[k]) <= tol:
        k += 1
    return c[k:].copy()


def polyadd(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Add two descending-power coefficient arrays of any lengths."""
    n = max(len(a), len(b))
    out = np.zeros(n)
    out[n - len(a):] += a
    out[n - len(b):] += b
    return out


def aberth_roots(coeffs, max_iter: int = 400) -> np.ndarray:
    """All complex roots of a polynomial by Aberth-Ehrlich simultaneous iteration.

    Initial guesses sit on a circle sized from the Cauchy coefficient bound.
    Each returned root r satisfies |poly(r)| < 1e-10 * ||coeffs||_2, else
    RootFindingError reports the residuals.
    """
    c = trim_leading(np.asarray(coeffs, dtype=float))
    scale = np.linalg.norm(c)
    if len(c) <= 1 or scale == 0:
        return np.array([], dtype=complex)
    # factor out exact roots at the origin (trailing zeros)
    nz = 0
    while nz < len(c) - 1 and c[-1 - nz] == 0.0:
        nz += 1
    zeros_at_origin = np.zeros(nz, dtype=complex)
    c_red = c[: len(c) - nz]
    n = len(c_red) - 1
    if n == 0:
        return zeros_at_origin
    if n == 1:
        roots = np.array([-c_red[1] / c_red[0]], dtype=complex)
        return np.concatenate([roots, zeros_at_origin])

    monic = c_red / c_red[0]
    deriv = monic[:-1] * np.arange(n, 0, -1)
    radius = 1.0 + np.max(np.abs(monic[1:]))
    angles = 2 * np.pi * np.arange(n) / n + 0.379
    x = radius * np.exp(1j * angles)

    for _ in range(max_iter):
        p = np.polyval(monic, x)
        dp = np.polyval(deriv, x)
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = np.where(dp != 0, p / dp, 0.0)
        diff = x[:, None] - x[None, :]
        np.fill_diagonal(diff, np.inf)
        repulse = np.sum(1.0 / diff, axis=1)
        denom = 1.0 - newton * repulse
        step = np.where(np.abs(denom) > 1e-300, newton / denom, newton)
        x = x - step
        if np.all(np.abs(step) < 1e-14 * (1.0 + np.abs(x))):
            break

    residuals = np.abs(np.polyval(c_red, x))
    if np.any(residuals >= 1e-10 * scale):
        raise RootFindingError(residuals.tolist())
    return np.concatenate([x, zeros_at_origin])


@dataclass(frozen=True, eq=False)
class RationalTf:
    """SISO rational transfer function num(z)/den(z) at a fixed sample rate.

    Improper functions are representable (they appear transiently during
    frequency-weight splitting) but refuse to be simulated.
    """

    num: np.ndarray
    den: np.ndarray
    sample_rate_hz: float

    def __post_init__(self):
        num = trim_leading(np.asarray(self.num, dtype=float))
        den = trim_leading(np.asarray(self.den, dtype=float))
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)
        if len(den) == 0 or den[0] == 0.0 or not np.any(den):
            raise ValueError("denominator must have a nonzero leading coefficient")
        if len(num) == 0:
            object.__setattr__(self, "num", np.zeros(1))
        if not self.sample_rate_hz > 0:
            raise ValueError("sample_rate_hz must be positive")

    @property
    def relative_order(self) -> int:
        return (len(self.den) - 1) - (len(self.num) - 1)

    @property
    def is_proper(self) -> bool:
        return self.relative_order >= 0

    def freq_response(self, omega) -> np.ndarray:
        return freq_response(self, omega)

    @staticmethod
    def identity(sample_rate_hz: float) -> "RationalTf":
        return RationalTf(np.array([1.0]), np.array([1.0]), sample_rate_hz)

    @property
    def is_identity(self) -> bool:
        return (
            len(self.num) == 1 and len(self.den) == 1 and self.num[0] == self.den[0]
        )


@dataclass(frozen=True, eq=False)
class Cascade:
    """Product of rational factors, evaluated factor-by-factor.

    Keeping high-order interconnections factored avoids the catastrophic
    cancellation that expanding into one long polynomial causes near
    unit-circle roots.
    """

    factors: tuple

    def __post_init__(self):
        if len(self.factors) == 0:
            raise ValueError("cascade needs at least one factor")
        fs = self.factors[0].sample_rate_hz
        for f in self.factors[1:]:
            if f.sample_rate_hz != fs:
                raise SampleRateMismatch("cascade factors disagree on sample rate")

    @property
    def sample_rate_hz(self) -> float:
        return self.factors[0].sample_rate_hz

    def freq_response(self, omega) -> np.ndarray:
        omega = np.atleast_1d(np.asarray(omega, dtype=float))
        out = np.ones(len(omega), dtype=complex)
        for f in self.factors:
            out = out * f.freq_response(omega)
        return out

    def as_rational(self) -> RationalTf:
        num = np.array([1.0])
        den = np.array([1.0])
        for f in self.factors:
            num = np.polymul(num, f.num)
            den = np.polymul(den, f.den)
        return RationalTf(num, den, self.sample_rate_hz)


def simulate(tf: RationalTf, inp: Sequence) -> Sequence:
    """Run the linear difference equation with zero initial conditions.

    Output has the same length, anchor, and sample rate as the input.
    """
    if not tf.is_proper:
        raise ImproperTransferFunction(
            f"cannot simulate improper transfer function (relative order {tf.relative_order})"
        )
    if tf.sample_rate_hz != inp.sample_rate_hz:
        raise SampleRateMismatch(
            f"tf at {tf.sample_rate_hz} Hz, input at {inp.sample_rate_hz} Hz"
        )
    b = np.concatenate([np.zeros(len(tf.den) - len(tf.num)), tf.num])
    out = lfilter(b, tf.den, inp.samples)
    return Sequence(out, inp.anchor, inp.sample_rate_hz)


def impulse_response(tf: RationalTf, length: int) -> Sequence:
    return simulate(tf, delta(length, 0, tf.sample_rate_hz))


def step_response(tf: RationalTf, length: int) -> Sequence:
    return simulate(tf, Sequence(np.ones(length), 0, tf.sample_rate_hz))


def freq_response(tf: RationalTf, omega) -> np.ndarray:
    """num(e^{j omega}) / den(e^{j omega}) with a guard against pole hits."""
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    z = np.exp(1j * omega)
    den_v = np.polyval(tf.den, z)
    bad = np.abs(den_v) < 1e-13 * np.sum(np.abs(tf.den))
    if np.any(bad):
        raise PoleOnGrid(float(omega[np.argmax(bad)]))
    return np.polyval(tf.num, z) / den_v


def series(a: RationalTf, b: RationalTf) -> RationalTf:
    if a.sample_rate_hz != b.sample_rate_hz:
        raise SampleRateMismatch("series connection needs matching sample rates")
    return RationalTf(np.polymul(a.num, b.num), np.polymul(a.den, b.den), a.sample_rate_hz)


def feedback_unity(L: RationalTf) -> RationalTf:
    """Closed loop L/(1+L) under unity negative feedback."""
    den = trim_leading(polyadd(L.den, L.num))
    if not np.any(np.abs(den) > _TRIM_REL * max(np.linalg.norm(L.den), 1.0)):
        raise ValueError("1 + L is identically zero; closed loop undefined")
    return RationalTf(L.num, den, L.sample_rate_hz)


def poles(tf: RationalTf) -> np.ndarray:
    return aberth_roots(tf.den)


def zeros(tf: RationalTf) -> np.ndarray:
    return aberth_roots(tf.num)


def save_tf(path, tf: RationalTf) -> None:
    payload = {
        "num": [float(v) for v in tf.num],
        "den": [float(v) for v in tf.den],
        "fs_hz": tf.sample_rate_hz,
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def load_tf(path) -> RationalTf:
    payload = json.loads(Path(path).read_text())
    return RationalTf(
        np.array(payload["num"], dtype=float),
        np.array(payload["den"], dtype=float),
        float(payload["fs_hz"]),
    )
