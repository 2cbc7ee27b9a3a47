"""Closed-loop formation, step-response metrics, stability margins, and
requirement checking."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np

from .errors import NoCrossover, SettlingHorizonWarning, UnstableSystem
from .lti import Cascade, RationalTf, feedback_unity, poles, step_response


@dataclass(frozen=True)
class DesignSpec:
    rise_time_max_s: float
    settling_time_max_s: float
    overshoot_max_fraction: float
    phase_margin_min_deg: float
    steady_state_error_max_fraction: float
    settling_band_fraction: float = 0.02

    def __post_init__(self):
        for name in (
            "rise_time_max_s",
            "settling_time_max_s",
            "overshoot_max_fraction",
            "phase_margin_min_deg",
            "steady_state_error_max_fraction",
        ):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.settling_band_fraction <= 0.1:
            raise ValueError("settling_band_fraction must lie in (0, 0.1]")


@dataclass
class StepMetrics:
    rise_time_s: float
    settling_time_s: float
    overshoot_fraction: float
    steady_state_error_fraction: float
    phase_margin_deg: float = float("nan")
    gain_crossover_hz: float = float("nan")


def closed_loop(loop_gain: RationalTf | Cascade) -> RationalTf:
    """Unity-feedback closed loop L/(1+L) in reduced rational form."""
    if isinstance(loop_gain, Cascade):
        loop_gain = loop_gain.as_rational()
    return feedback_unity(loop_gain)


def _first_crossing(t: np.ndarray, y: np.ndarray, level: float) -> float:
    """Time of the first crossing of `level`, linearly interpolated."""
    hit = np.flatnonzero(y >= level) if level >= 0 else np.flatnonzero(y <= level)
    if len(hit) == 0:
        return float("nan")
    i = hit[0]
    if i == 0:
        return float(t[0])
    frac = (level - y[i - 1]) / (y[i] - y[i - 1])
    return float(t[i - 1] + frac * (t[i] - t[i - 1]))


def step_metrics(
    closed: RationalTf, horizon_s: float, band: float = 0.02
) -> StepMetrics:
    """Time-domain step metrics from a simulated response.

    The final value is the mean of the last 5% of the horizon, so the same
    code path serves rational and FIR loop gains. Rise time is 10%-90%,
    settling time the last entry into the +-band around the final value.
    """
    pole_mags = np.abs(poles(closed))
    if np.any(pole_mags >= 1.0):
        raise UnstableSystem(
            f"closed loop has pole magnitude {pole_mags.max():.6f} >= 1"
        )
    n = int(round(horizon_s * closed.sample_rate_hz))
    if n < 20:
        raise ValueError("horizon too short for metric extraction")
    y = step_response(closed, n).samples
    t = np.arange(n) / closed.sample_rate_hz
    final = float(np.mean(y[int(0.95 * n):]))
    if final == 0.0:
        raise ValueError("step response settles to zero; metrics undefined")
    if abs(y[-1] - final) > band * abs(final):
        warnings.warn(
            SettlingHorizonWarning(
                f"response has not settled within the {band:.0%} band by "
                f"{horizon_s} s; metrics may be biased"
            )
        )
    t10 = _first_crossing(t, y, 0.1 * final)
    t90 = _first_crossing(t, y, 0.9 * final)
    rise = t90 - t10 if np.isfinite(t10) and np.isfinite(t90) else float("nan")
    outside = np.flatnonzero(np.abs(y - final) > band * abs(final))
    settling = 0.0 if len(outside) == 0 else float(t[min(outside[-1] + 1, n - 1)])
    overshoot = max(0.0, (float(np.max(y)) - final) / abs(final))
    return StepMetrics(
        rise_time_s=max(rise, 0.0),
        settling_time_s=settling,
        overshoot_fraction=overshoot,
        steady_state_error_fraction=abs(1.0 - final),
    )


def stability_margins(
    loop_gain: RationalTf | Cascade, grid_size: int = 16384
) -> tuple[float, float]:
    """Phase margin (degrees) and gain-crossover frequency (Hz).

    The crossover is bracketed on the grid and refined by bisection of
    |L| - 1; the phase is unwrapped along the grid before reading it off at
    the crossover.
    """
    omega = np.pi * np.arange(1, grid_size + 1) / grid_size
    resp = loop_gain.freq_response(omega)
    mag = np.abs(resp)
    crossings = np.flatnonzero((mag[:-1] >= 1.0) & (mag[1:] < 1.0))
    if len(crossings) == 0:
        raise NoCrossover("|L| never crosses unity on the grid")
    i = int(crossings[0])
    lo, hi = omega[i], omega[i + 1]
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if np.abs(loop_gain.freq_response(np.array([mid]))[0]) >= 1.0:
            lo = mid
        else:
            hi = mid
    w_c = 0.5 * (lo + hi)
    phase_grid = np.unwrap(np.angle(resp))
    raw = float(np.angle(loop_gain.freq_response(np.array([w_c]))[0]))
    # re-anchor the principal angle onto the unwrapped branch at the bracket
    branch = round((phase_grid[i] - raw) / (2 * np.pi))
    phase = raw + 2 * np.pi * branch
    pm = 180.0 + np.degrees(phase)
    fs = loop_gain.sample_rate_hz
    return float(pm), float(w_c * fs / (2 * np.pi))


def loop_step_metrics(
    loop_gain: RationalTf | Cascade,
    horizon_s: float,
    band: float = 0.02,
    grid_size: int = 16384,
) -> StepMetrics:
    """Step metrics of the closed loop plus margins of the open loop."""
    metrics = step_metrics(closed_loop(loop_gain), horizon_s, band)
    pm, f_c = stability_margins(loop_gain, grid_size)
    metrics.phase_margin_deg = pm
    metrics.gain_crossover_hz = f_c
    return metrics


@dataclass(frozen=True)
class RequirementCheck:
    name: str
    measured: float
    bound: float
    passed: bool


@dataclass(frozen=True)
class SpecReport:
    checks: tuple
    all_passed: bool


def check_specs(metrics: StepMetrics, spec: DesignSpec) -> SpecReport:
    """Pass/fail per requirement; comparisons are non-strict, so a value
    exactly at its bound passes."""
    rows = [
        RequirementCheck(
            "rise_time_s", metrics.rise_time_s, spec.rise_time_max_s,
            metrics.rise_time_s <= spec.rise_time_max_s,
        ),
        RequirementCheck(
            "settling_time_s", metrics.settling_time_s, spec.settling_time_max_s,
            metrics.settling_time_s <= spec.settling_time_max_s,
        ),
        RequirementCheck(
            "overshoot_fraction", metrics.overshoot_fraction, spec.overshoot_max_fraction,
            metrics.overshoot_fraction <= spec.overshoot_max_fraction,
        ),
        RequirementCheck(
            "phase_margin_deg", metrics.phase_margin_deg, spec.phase_margin_min_deg,
            metrics.phase_margin_deg >= spec.phase_margin_min_deg,
        ),
        RequirementCheck(
            "steady_state_error_fraction",
            metrics.steady_state_error_fraction,
            spec.steady_state_error_max_fraction,
            metrics.steady_state_error_fraction <= spec.steady_state_error_max_fraction,
        ),
    ]
    return SpecReport(checks=tuple(rows), all_passed=all(r.passed for r in rows))


def save_step_response(path, closed: RationalTf, horizon_s: float) -> None:
    """CSV export: t_s,y."""
    n = int(round(horizon_s * closed.sample_rate_hz))
    y = step_response(closed, n)
    lines = ["t_s,y"]
    lines.extend(
        f"{k / closed.sample_rate_hz:.17g},{v:.17g}" for k, v in enumerate(y.samples)
    )
    Path(path).write_text("\n".join(lines) + "\n")


def save_report(path, report_payload: dict) -> None:
    Path(path).write_text(json.dumps(report_payload, indent=2, sort_keys=True) + "\n")


def metrics_as_dict(metrics: StepMetrics) -> dict:
    return asdict(metrics)


def report_as_dict(report: SpecReport) -> dict:
    return {
        "all_passed": report.all_passed,
        "checks": [asdict(c) for c in report.checks],
    }
