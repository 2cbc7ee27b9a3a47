"""Learn a two-sided FIR plant inverse from trials alone.

The learner tracks an impulse placed at the center of a two-sided window,
so the learned input *is* the inverse filter (anticausal half to the left
of the center, causal half to the right). Replacing the learning filter
with the current learned input every few iterations compounds the
contraction: each replacement raises the deviation 1 - P F to the power of
the period, which is what makes convergence practical in ~100 trials.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateOracle, DivergenceError
from .ilc import DIVERGENCE_FACTOR, IlcResult
from .plant import PlantOracle
from .signals import (
    Sequence,
    TwoSidedFir,
    convolve,
    delta,
    l2_norm,
    rewindow,
    zero_phase_lowpass,
)

# tail-to-peak ratio above which the impulse measurement is treated as
# non-settling (pole on or near the unit circle)
_SETTLE_TOL = 1e-8


@dataclass(frozen=True)
class ReferenceShaping:
    """Zero-phase low-pass pre-filter for the tracked impulse."""

    cutoff_normalized: float
    half_length: int


@dataclass(frozen=True)
class InverseLearnConfig:
    filter_half_length: int
    total_iterations: int
    cross_update_period: int
    initial_gain_alpha: float = 0.5
    reference_shaping: ReferenceShaping | None = None

    def __post_init__(self):
        if self.filter_half_length < 1:
            raise ValueError("filter_half_length must be positive")
        if self.total_iterations < 1:
            raise ValueError("total_iterations must be positive")
        if not 1 <= self.cross_update_period <= self.total_iterations:
            raise ValueError("cross_update_period must lie in [1, total_iterations]")
        if not 0 < self.initial_gain_alpha <= 1:
            raise ValueError("initial_gain_alpha must lie in (0, 1]")


def initial_learning_filter(impulse_measurement: Sequence, alpha: float) -> TwoSidedFir:
    """Reverse-time initial learning filter.

    Taps are the time-reversed impulse measurement scaled by
    rho = alpha / max_w |M(w)|^2 over a 1024-point grid, so the loop
    deviation |1 - rho |P|^2| stays below one wherever the measurement
    captures the plant.
    """
    m = impulse_measurement.samples
    if not np.any(m):
        raise DegenerateOracle("impulse measurement is identically zero")
    grid = np.linspace(0.0, np.pi, 1024)
    spectrum = np.exp(-1j * np.outer(grid, np.arange(len(m)) - impulse_measurement.anchor)) @ m
    rho = alpha / np.max(np.abs(spectrum) ** 2)
    taps = rho * m[::-1]
    return TwoSidedFir(taps, len(m) - 1 - impulse_measurement.anchor)


def _differenced_initial_filter(m: np.ndarray, alpha: float) -> TwoSidedFir:
    """Initial filter for plants whose impulse response does not settle.

    A pole at z=1 makes the truncated measurement useless near DC, so the
    reverse-time construction is applied to the first-differenced
    measurement (which settles) and composed with a (1 - z^{-1}) factor.
    The contraction bound then holds against (1 - z^{-1}) P, which is the
    settled system the data actually identifies.
    """
    base = np.diff(m)  # samples of (1 - z^{-1}) P at times 1 .. len(m)-1
    if not np.any(base):
        raise DegenerateOracle("differenced impulse measurement is identically zero")
    nfft = 1 << max(17, int(4 * len(base)).bit_length())
    rho = alpha / np.max(np.abs(np.fft.rfft(base, nfft)) ** 2)
    # reversed base has its lag-0 tap one slot past the array end (anchor
    # len(base)); composing with the two-tap difference kernel restores a
    # valid in-range anchor.
    rev = Sequence(rho * base[::-1], len(base) - 1, 1.0)
    composed = convolve(rev, TwoSidedFir(np.array([1.0, -1.0]), 0))
    return TwoSidedFir(composed.samples, len(base))


def learn_inverse(
    oracle: PlantOracle, config: InverseLearnConfig
) -> tuple[TwoSidedFir, IlcResult]:
    """Learn an inversion-based FIR filter by tracking a centered impulse.

    Runs one impulse trial to build the initial learning filter, then
    config.total_iterations learning trials, replacing the learning filter
    with the current learned input every cross_update_period iterations.
    """
    window = 2 * config.filter_half_length
    fs = oracle.sample_rate_hz

    measurement = oracle(delta(window, 0, fs))
    m = measurement.samples
    peak = np.max(np.abs(m))
    if peak == 0.0:
        raise DegenerateOracle("plant impulse response is identically zero")
    tail = np.max(np.abs(m[int(0.95 * window):]))
    if tail <= _SETTLE_TOL * peak:
        learning = initial_learning_filter(measurement, config.initial_gain_alpha)
    else:
        learning = _differenced_initial_filter(m, config.initial_gain_alpha)

    reference = delta(window, config.filter_half_length, fs)
    if config.reference_shaping is not None:
        shaper = zero_phase_lowpass(
            config.reference_shaping.cutoff_normalized,
            config.reference_shaping.half_length,
        )
        reference = rewindow(convolve(reference, shaper), reference.anchor, window)

    anchor = reference.anchor
    u_next = rewindow(convolve(reference, learning), anchor, window)
    history: list[float] = []
    best = np.inf
    u = y = None
    for j in range(config.total_iterations):
        u = u_next
        if j > 0 and j % config.cross_update_period == 0:
            learning = TwoSidedFir(u.samples.copy(), u.anchor)
        if not np.all(np.isfinite(u.samples)):
            raise DivergenceError(j, "non-finite values in the learned filter")
        y = oracle(u)
        e = Sequence(reference.samples - y.samples, anchor, fs)
        err = l2_norm(e)
        if not np.isfinite(err):
            raise DivergenceError(j, "non-finite tracking error")
        history.append(err)
        if err > DIVERGENCE_FACTOR * best:
            raise DivergenceError(
                j, f"error {err:.3e} grew past 10x its minimum {best:.3e}"
            )
        best = min(best, err)
        u_next = Sequence(
            u.samples + rewindow(convolve(e, learning), anchor, window).samples,
            anchor,
            fs,
        )
        if err == 0.0:
            break
    result = IlcResult(
        learned_input=u,
        final_output=y,
        error_l2_history=np.array(history),
        iterations_run=len(history),
    )
    return TwoSidedFir(u.samples.copy(), u.anchor), result
