"""The generic iterative learning loop and its convergence bookkeeping.

Each iteration runs one plant trial, records the l2 tracking error, and
updates the input by filtering the error. Filtered sequences are
re-windowed onto the reference support, so all iterates share the
reference's length and anchor.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DivergenceError
from .plant import PlantOracle
from .signals import Sequence, TwoSidedFir, convolve, l2_norm, rewindow, to_db

DIVERGENCE_FACTOR = 10.0


@dataclass(frozen=True)
class IlcConfig:
    max_iterations: int
    stop_error_db: float = -300.0
    record_history: bool = True

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")


@dataclass(frozen=True, eq=False)
class IlcResult:
    learned_input: Sequence
    final_output: Sequence
    error_l2_history: np.ndarray
    iterations_run: int


def ilc_run(
    oracle: PlantOracle,
    reference: Sequence,
    learning_filter: TwoSidedFir,
    config: IlcConfig,
) -> IlcResult:
    """Learn the input that makes the plant output track the reference.

    u_0 = F r, then u_{j+1} = u_j + F (r - y_j) with y_j = oracle(u_j).
    Returns after max_iterations trials or once the relative error drops
    below the stop threshold. Aborts on non-finite iterates or when the
    error grows past ten times its running minimum.
    """
    if len(reference) == 0:
        raise ValueError("reference must be non-empty")
    ref_norm = l2_norm(reference)
    anchor, length = reference.anchor, len(reference)

    u_next = rewindow(convolve(reference, learning_filter), anchor, length)
    history: list[float] = []
    best = np.inf
    u = y = None
    for j in range(config.max_iterations):
        u = u_next
        if not np.all(np.isfinite(u.samples)):
            raise DivergenceError(j, "non-finite values in the learned input")
        y = oracle(u)
        e = Sequence(reference.samples - y.samples, anchor, reference.sample_rate_hz)
        err = l2_norm(e)
        if not np.isfinite(err):
            raise DivergenceError(j, "non-finite tracking error")
        history.append(err)
        if err > DIVERGENCE_FACTOR * best:
            raise DivergenceError(
                j, f"error {err:.3e} grew past 10x its minimum {best:.3e}"
            )
        best = min(best, err)
        if ref_norm > 0 and (err == 0.0 or to_db(err / ref_norm) <= config.stop_error_db):
            break
        u_next = Sequence(
            u.samples + rewindow(convolve(e, learning_filter), anchor, length).samples,
            anchor,
            reference.sample_rate_hz,
        )
    hist = np.array(history) if config.record_history else np.array(history[-1:])
    return IlcResult(
        learned_input=u,
        final_output=y,
        error_l2_history=hist,
        iterations_run=len(history),
    )


def empirical_convergence_rate(history, reference_norm: float | None = None) -> float:
    """Geometric mean of successive error ratios.

    Ratios whose denominator has fallen to the numerical floor
    (1e-13 of the reference norm) are dropped; a zero numerator makes the
    rate exactly zero (immediate convergence).
    """
    h = np.asarray(history, dtype=float)
    if len(h) < 2 or not np.any(h > 0):
        raise ValueError("need at least 2 history entries with a positive start")
    floor = 1e-13 * (reference_norm if reference_norm is not None else float(h.max()))
    ratios = [
        h[j + 1] / h[j]
        for j in range(len(h) - 1)
        if h[j] > floor
    ]
    if not ratios:
        raise ValueError("fewer than 2 usable entries above the numerical floor")
    ratios = np.array(ratios)
    if np.any(ratios == 0.0):
        return 0.0
    return float(np.exp(np.mean(np.log(ratios))))


def save_learning_curve(path, history, reference_norm: float = 1.0) -> None:
    """CSV export: iteration, error_l2, error_db (relative to the reference norm)."""
    lines = ["iteration,error_l2,error_db"]
    for j, err in enumerate(history):
        db = to_db(err / reference_norm) if err > 0 and reference_norm > 0 else float("-inf")
        lines.append(f"{j},{err:.17g},{db:.17g}")
    Path(path).write_text("\n".join(lines) + "\n")
