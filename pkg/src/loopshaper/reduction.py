"""FIR-to-IIR controller reduction via the Hankel SVD (Kung's realization).

The causal taps after the anchor are Markov parameters; the lag-0 tap is
the direct feedthrough and stays out of the Hankel matrix. The singular
values give the classical twice-the-tail error bound for the reduced
model, checked against a measured grid error.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.linalg import hankel, svd

from .errors import BoundCertificationWarning, UnstableReduction
from .lti import RationalTf, aberth_roots
from .signals import TwoSidedFir, to_db

ANTICAUSAL_ENERGY_LIMIT = 1e-6


@dataclass(frozen=True, eq=False)
class ReductionResult:
    reduced: RationalTf
    hankel_singular_values: np.ndarray
    selected_order: int
    error_bound: float
    measured_grid_error: float

    @property
    def certified(self) -> bool:
        sigma1 = self.hankel_singular_values[0] if len(self.hankel_singular_values) else 0.0
        return self.measured_grid_error <= self.error_bound + 1e-9 * sigma1

    @property
    def error_bound_db(self) -> float:
        return to_db(self.error_bound) if self.error_bound > 0 else float("-inf")


def _causal_markov(fir: TwoSidedFir) -> np.ndarray:
    """Markov parameters h(1), h(2), ... after the anticausal-energy gate."""
    total = float(np.sum(fir.taps**2))
    if total == 0.0:
        raise ValueError("FIR filter is identically zero")
    anticausal = float(np.sum(fir.taps[: fir.anchor] ** 2))
    if anticausal > ANTICAUSAL_ENERGY_LIMIT * total:
        raise ValueError(
            f"anticausal tap energy fraction {anticausal / total:.3e} exceeds "
            "1e-6; only causal systems can be reduced"
        )
    return fir.taps[fir.anchor + 1:]


def _hankel_matrix(h: np.ndarray) -> np.ndarray:
    n_c = len(h)
    n_h = int(np.ceil(n_c / 2))
    col = h[:n_h]
    row = np.zeros(n_h)
    rest = h[n_h - 1:]
    row[: min(n_h, len(rest))] = rest[:n_h]
    return hankel(col, row)


def hankel_singular_values(fir: TwoSidedFir) -> np.ndarray:
    """Descending singular values of the ceil(Nc/2)-square Hankel matrix."""
    h = _causal_markov(fir)
    if len(h) == 0:
        return np.array([])
    return svd(_hankel_matrix(h), compute_uv=False)


def grid_hinf_error(a, b, grid_size: int = 4096) -> tuple[float, float]:
    """Max |a - b| over a uniform frequency grid, also in dB.

    Both arguments only need a freq_response(omega) method. The grid spans
    (0, pi]: the DC endpoint is excluded because loop gains with
    integrators are legitimately unbounded there.
    """
    omega = np.pi * np.arange(1, grid_size + 1) / grid_size
    diff = np.max(np.abs(a.freq_response(omega) - b.freq_response(omega)))
    db = to_db(diff) if diff > 0 else float("-inf")
    return float(diff), db


def balanced_reduce(
    fir: TwoSidedFir,
    order: int | None = None,
    energy_fraction: float | None = None,
    sample_rate_hz: float = 1.0,
    grid_size: int = 4096,
) -> ReductionResult:
    """Reduce an FIR filter to a low-order rational model by Kung's method.

    Exactly one of `order` / `energy_fraction` picks the model order: an
    explicit r, or the smallest r whose leading singular values hold the
    requested fraction of the singular-value sum. The (A, B, C) realization
    comes from the rank-r SVD factors, with A solved from the
    shift-invariance least squares of the observability factor, and is
    converted to a transfer function by the Leverrier-Faddeev recursion.
    """
    if (order is None) == (energy_fraction is None):
        raise ValueError("specify exactly one of order / energy_fraction")
    h = _causal_markov(fir)
    feedthrough = float(fir.taps[fir.anchor])

    if len(h) == 0:
        sigmas = np.array([])
        r = 0
    else:
        matrix = _hankel_matrix(h)
        u_f, sigmas, vt_f = svd(matrix, full_matrices=False)
        if order is not None:
            if order < 0 or order > len(sigmas):
                raise ValueError(f"order must lie in [0, {len(sigmas)}]")
            r = order
        else:
            if not 0 < energy_fraction <= 1:
                raise ValueError("energy_fraction must lie in (0, 1]")
            total = sigmas.sum()
            r = int(np.searchsorted(np.cumsum(sigmas), energy_fraction * total)) + 1

    if r == 0:
        reduced = RationalTf(np.array([feedthrough]), np.array([1.0]), sample_rate_hz)
        bound = float(2.0 * sigmas.sum())
        measured, _ = grid_hinf_error(fir, reduced, grid_size)
    else:
        sqrt_s = np.sqrt(sigmas[:r])
        observability = u_f[:, :r] * sqrt_s
        a_mat = np.linalg.lstsq(observability[:-1], observability[1:], rcond=None)[0]
        b_vec = (sqrt_s[:, None] * vt_f[:r, :])[:, 0]
        c_vec = observability[0, :]
        num, den = _leverrier_tf(a_mat, b_vec, c_vec, feedthrough)
        pole_mags = np.abs(aberth_roots(den))
        if np.any(pole_mags >= 1.0):
            raise UnstableReduction(sorted(pole_mags, reverse=True))
        reduced = RationalTf(num, den, sample_rate_hz)
        bound = float(2.0 * sigmas[r:].sum())
        measured, _ = grid_hinf_error(fir, reduced, grid_size)

    sigma1 = sigmas[0] if len(sigmas) else 0.0
    if measured > bound + 1e-9 * sigma1:
        warnings.warn(
            BoundCertificationWarning(
                f"measured grid error {measured:.3e} exceeds the singular-value "
                f"bound {bound:.3e}; the FIR tail has likely not settled"
            )
        )
    return ReductionResult(
        reduced=reduced,
        hankel_singular_values=sigmas,
        selected_order=r,
        error_bound=bound,
        measured_grid_error=float(measured),
    )


def _leverrier_tf(
    a_mat: np.ndarray, b_vec: np.ndarray, c_vec: np.ndarray, feedthrough: float
) -> tuple[np.ndarray, np.ndarray]:
    """State space to transfer function by the Leverrier-Faddeev recursion.

    den is the characteristic polynomial built from traces; num follows
    from C adj(zI - A) B plus the feedthrough, with no eigensolver needed.
    """
    r = a_mat.shape[0]
    den = np.zeros(r + 1)
    den[0] = 1.0
    m_k = np.eye(r)
    markov = np.zeros(r)
    for k in range(1, r + 1):
        markov[k - 1] = c_vec @ m_k @ b_vec
        a_k = -np.trace(a_mat @ m_k) / k
        den[k] = a_k
        m_k = a_mat @ m_k + a_k * np.eye(r)
    num = feedthrough * den + np.concatenate([[0.0], markov])
    return num, den


def save_reduction(path, result: ReductionResult) -> None:
    payload = {
        "reduced": {
            "num": [float(v) for v in result.reduced.num],
            "den": [float(v) for v in result.reduced.den],
            "fs_hz": result.reduced.sample_rate_hz,
        },
        "hankel_singular_values": [float(v) for v in result.hankel_singular_values],
        "selected_order": result.selected_order,
        "error_bound": result.error_bound,
        "measured_grid_error": result.measured_grid_error,
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")
