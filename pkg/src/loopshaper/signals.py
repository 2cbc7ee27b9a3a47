"""Discrete-time sequences, two-sided FIR filters, and the shared signal algebra.

Every signal carries an explicit anchor: the array index holding time k=0.
Filters may have taps at negative lags (anticausal advance), which is what
makes plant-inverse filters representable without tricks.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.polynomial import polynomial as npp
from scipy.signal import convolve as _sp_convolve


@dataclass(frozen=True, eq=False)
class Sequence:
    """Finite real-valued discrete-time signal.

    samples[i] is the value at time i - anchor, so samples[anchor] is k=0.
    Treat instances as immutable; operations always return new objects.
    """

    samples: np.ndarray
    anchor: int
    sample_rate_hz: float

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        object.__setattr__(self, "samples", samples)
        if samples.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        n = len(samples)
        if n == 0:
            if self.anchor != 0:
                raise ValueError("empty sequence must have anchor 0")
        elif not 0 <= self.anchor < n:
            raise ValueError(f"anchor {self.anchor} outside [0, {n})")
        if not self.sample_rate_hz > 0:
            raise ValueError("sample_rate_hz must be positive")

    def __len__(self) -> int:
        return len(self.samples)

    def times(self) -> np.ndarray:
        """Sample times in seconds relative to k=0."""
        return (np.arange(len(self.samples)) - self.anchor) / self.sample_rate_hz


@dataclass(frozen=True, eq=False)
class TwoSidedFir:
    """FIR filter with causal and anticausal taps.

    taps[k] multiplies z^{-(k - anchor)}: taps before the anchor are an
    advance (anticausal), taps after it are ordinary delays.
    """

    taps: np.ndarray
    anchor: int

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=float)
        object.__setattr__(self, "taps", taps)
        if taps.ndim != 1 or len(taps) == 0:
            raise ValueError("taps must be a non-empty 1-d array")
        if not 0 <= self.anchor < len(taps):
            raise ValueError(f"anchor {self.anchor} outside [0, {len(taps)})")

    def __len__(self) -> int:
        return len(self.taps)

    def freq_response(self, omega) -> np.ndarray:
        """Sum_k taps[k] e^{-j omega (k - anchor)} evaluated on a grid."""
        omega = np.atleast_1d(np.asarray(omega, dtype=float))
        x = np.exp(-1j * omega)
        return npp.polyval(x, self.taps) * np.exp(1j * omega * self.anchor)

    def lags(self) -> np.ndarray:
        return np.arange(len(self.taps)) - self.anchor


def delta(length: int, anchor: int, sample_rate_hz: float = 1.0) -> Sequence:
    """Unit impulse of the given length with the 1 at the anchor index."""
    if not 0 <= anchor < length:
        raise ValueError(f"anchor {anchor} outside [0, {length})")
    samples = np.zeros(length)
    samples[anchor] = 1.0
    return Sequence(samples, anchor, sample_rate_hz)


def convolve(x: Sequence, f: TwoSidedFir) -> Sequence:
    """Full linear convolution; time alignment preserved via anchor addition."""
    if len(x) == 0:
        raise ValueError("cannot convolve an empty sequence")
    out = _sp_convolve(x.samples, f.taps, mode="full", method="auto")
    return Sequence(out, x.anchor + f.anchor, x.sample_rate_hz)


def rewindow(x: Sequence, anchor: int, length: int) -> Sequence:
    """Project a sequence onto the window [-anchor, length-anchor), zero padding
    outside and dropping samples beyond it."""
    out = np.zeros(length)
    shift = x.anchor - anchor  # index in x.samples of the window start
    lo = max(0, -shift)
    hi = min(length, len(x.samples) - shift)
    if hi > lo:
        out[lo:hi] = x.samples[shift + lo: shift + hi]
    return Sequence(out, anchor, x.sample_rate_hz)


def l2_norm(x: Sequence | np.ndarray) -> float:
    samples = x.samples if isinstance(x, Sequence) else np.asarray(x, dtype=float)
    return float(np.linalg.norm(samples))


def rms(x: Sequence | np.ndarray) -> float:
    samples = x.samples if isinstance(x, Sequence) else np.asarray(x, dtype=float)
    if len(samples) == 0:
        return 0.0
    return float(np.linalg.norm(samples) / np.sqrt(len(samples)))


def to_db(v: float) -> float:
    if not v > 0:
        raise ValueError(f"to_db requires a positive value, got {v!r}")
    return 20.0 * float(np.log10(v))


def zero_phase_lowpass(cutoff_normalized: float, half_length: int) -> TwoSidedFir:
    """Symmetric windowed-sinc low-pass filter with unit DC gain.

    cutoff_normalized is the cutoff as a fraction of Nyquist, in (0, 1].
    The Blackman window keeps stopband leakage low while the symmetry about
    the anchor makes the phase exactly zero.
    """
    if not 0 < cutoff_normalized <= 1:
        raise ValueError("cutoff_normalized must lie in (0, 1]")
    if half_length < 1:
        raise ValueError("half_length must be positive")
    n = np.arange(-half_length, half_length + 1)
    taps = cutoff_normalized * np.sinc(cutoff_normalized * n)
    taps *= np.blackman(2 * half_length + 1)
    taps /= taps.sum()
    return TwoSidedFir(taps, half_length)


# --- CSV persistence: header "# anchor=<int> fs=<real>", one sample per line.

def _save_csv(path, samples: np.ndarray, anchor: int, fs: float) -> None:
    lines = [f"# anchor={anchor} fs={fs!r}"]
    lines.extend(f"{v:.17g}" for v in samples)
    Path(path).write_text("\n".join(lines) + "\n")


def _load_csv(path) -> tuple[np.ndarray, int, float]:
    lines = Path(path).read_text().strip().splitlines()
    header = lines[0]
    if not header.startswith("#"):
        raise ValueError(f"{path}: missing '# anchor=... fs=...' header")
    fields = dict(part.split("=", 1) for part in header[1:].split())
    samples = np.array([float(v) for v in lines[1:]])
    return samples, int(fields["anchor"]), float(fields["fs"])


def save_sequence(path, seq: Sequence) -> None:
    _save_csv(path, seq.samples, seq.anchor, seq.sample_rate_hz)


def load_sequence(path) -> Sequence:
    samples, anchor, fs = _load_csv(path)
    return Sequence(samples, anchor, fs)


def save_fir(path, fir: TwoSidedFir, sample_rate_hz: float = 1.0) -> None:
    _save_csv(path, fir.taps, fir.anchor, sample_rate_hz)


def load_fir(path) -> TwoSidedFir:
    samples, anchor, _ = _load_csv(path)
    return TwoSidedFir(samples, anchor)
