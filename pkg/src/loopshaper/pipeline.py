"""From a desired loop gain and a plant oracle to a learned FIR controller.

The four stages: measure the plant relative order, learn an inverse
learning filter, track the (weight-split) desired impulse response with
ILC, and hand the learned taps to model reduction. Slow poles of the
desired loop gain move into a rational weight H(z) so the tracked
reference settles inside the horizon.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    AnticausalController,
    AssumptionViolation,
    ImproperTransferFunction,
    TailSettlingWarning,
    UnstableReference,
)
from .ilc import IlcConfig, IlcResult, ilc_run
from .inverse_filter import InverseLearnConfig, learn_inverse
from .lti import RationalTf, aberth_roots, impulse_response, poles, simulate
from .plant import PlantOracle, probe_relative_order
from .signals import Sequence, TwoSidedFir

ANTICAUSAL_ENERGY_LIMIT = 1e-6


@dataclass(frozen=True)
class LoopShapeConfig:
    horizon_length: int
    inverse_learn: InverseLearnConfig
    ilc: IlcConfig
    truncation_threshold: float = 1e-10
    slow_pole_radius: float = 0.995
    anticausal_margin: int = 32
    settle_pad: int = 64
    probe_length: int = 64

    def __post_init__(self):
        if self.horizon_length < 2 or self.horizon_length % 2 != 0:
            raise ValueError("horizon_length must be a positive even integer")
        if not 0 < self.truncation_threshold < 1:
            raise ValueError("truncation_threshold must lie in (0, 1)")
        if not 0 < self.slow_pole_radius < 1:
            raise ValueError("slow_pole_radius must lie in (0, 1)")
        if self.anticausal_margin < 1 or self.settle_pad < 0:
            raise ValueError("anticausal_margin must be >= 1 and settle_pad >= 0")


@dataclass(frozen=True, eq=False)
class LoopShapeResult:
    controller_fir: TwoSidedFir
    weight: RationalTf
    tracking: IlcResult
    relative_order_plant: int
    relative_order_target: int
    learning_filter: TwoSidedFir
    inverse_tracking: IlcResult


def check_assumption_2(
    oracle: PlantOracle,
    desired_loop_gain: RationalTf,
    probe_length: int = 64,
    threshold: float = 1e-8,
) -> tuple[int, int]:
    """Probe the plant relative order and gate it against the target's.

    The learned controller is causal only when the desired loop gain rolls
    off at least as fast as the plant, so target order below plant order is
    an error carrying both numbers.
    """
    if not desired_loop_gain.is_proper:
        raise ImproperTransferFunction("desired loop gain must be proper")
    plant_order = probe_relative_order(oracle, probe_length, threshold)
    target_order = desired_loop_gain.relative_order
    if target_order < plant_order:
        raise AssumptionViolation(plant_order, target_order)
    return plant_order, target_order


def _real_poly_from_roots(roots: np.ndarray) -> np.ndarray:
    if len(roots) == 0:
        return np.array([1.0])
    return np.real(np.poly(roots))


def split_frequency_weight(
    desired_loop_gain: RationalTf, slow_pole_radius: float
) -> tuple[RationalTf, RationalTf]:
    """Separate L_d = H * L_d' with H holding every pole of magnitude >= radius.

    If removing the slow poles leaves L_d' improper by n, both parts gain n
    pole-zero pairs at the origin (poles placed "infinitely fast"): L_d'
    gets z^{-n}, H gets z^{n}. Ties at the radius go to H.
    """
    fs = desired_loop_gain.sample_rate_hz
    all_poles = aberth_roots(desired_loop_gain.den)
    slow = all_poles[np.abs(all_poles) >= slow_pole_radius]
    fast = all_poles[np.abs(all_poles) < slow_pole_radius]
    if len(slow) == 0:
        return RationalTf.identity(fs), desired_loop_gain

    lead = desired_loop_gain.den[0]
    h_den = _real_poly_from_roots(slow)
    lp_den = lead * _real_poly_from_roots(fast)
    h_num = np.array([1.0])
    lp_num = desired_loop_gain.num.copy()

    improper_by = (len(lp_num) - 1) - (len(lp_den) - 1)
    if improper_by > 0:
        lp_den = np.polymul(lp_den, np.concatenate([[1.0], np.zeros(improper_by)]))
        h_num = np.concatenate([[1.0], np.zeros(improper_by)])
    return RationalTf(h_num, h_den, fs), RationalTf(lp_num, lp_den, fs)


def _shift_weight(H: RationalTf, L_prime: RationalTf, n: int) -> tuple[RationalTf, RationalTf]:
    """Move n more pole-zero pairs at the origin from L_d' into H."""
    zn = np.concatenate([[1.0], np.zeros(n)])
    return (
        RationalTf(np.polymul(H.num, zn), H.den, H.sample_rate_hz),
        RationalTf(L_prime.num, np.polymul(L_prime.den, zn), L_prime.sample_rate_hz),
    )


def build_reference(
    reference_tf: RationalTf, length: int, truncation_threshold: float
) -> Sequence:
    """Impulse response of the split loop gain over the tracking horizon.

    Warns when the last 5% of the response still exceeds the truncation
    threshold relative to the peak (the horizon is too short for the
    remaining poles); errors when a pole sits on or outside the unit circle.
    """
    if not reference_tf.is_proper:
        raise ImproperTransferFunction("reference system must be proper")
    pole_mags = np.abs(poles(reference_tf))
    if np.any(pole_mags >= 1.0 - 1e-12):
        raise UnstableReference(
            f"reference pole magnitude {pole_mags.max():.6f} >= 1; enlarge the "
            "frequency weight so the remaining impulse response settles"
        )
    ref = impulse_response(reference_tf, length)
    peak = np.max(np.abs(ref.samples))
    tail = np.max(np.abs(ref.samples[int(0.95 * length):]))
    if peak > 0 and tail > truncation_threshold * peak:
        warnings.warn(
            TailSettlingWarning(
                f"reference tail ratio {tail / peak:.3e} exceeds the truncation "
                f"threshold {truncation_threshold:.1e}; consider a larger horizon "
                "or a wider frequency weight"
            )
        )
    return ref


def run_loopshaping(
    oracle: PlantOracle,
    desired_loop_gain: RationalTf,
    config: LoopShapeConfig,
    learning_filter: TwoSidedFir | None = None,
    inverse_tracking: IlcResult | None = None,
) -> LoopShapeResult:
    """Full loop-shaping run: probe, learn inverse, split, track, package.

    A pre-learned inverse filter may be injected to avoid repeating the
    learning trials. The tracking window is extended by settle_pad samples
    beyond the horizon and cropped afterwards: the taps next to the window
    edge absorb reference-truncation artifacts and must not end up in the
    delivered controller.
    """
    plant_order, target_order = check_assumption_2(
        oracle, desired_loop_gain, config.probe_length
    )
    if learning_filter is None:
        learning_filter, inverse_tracking = learn_inverse(oracle, config.inverse_learn)

    weight, l_prime = split_frequency_weight(desired_loop_gain, config.slow_pole_radius)
    deficit = plant_order - l_prime.relative_order
    if deficit > 0:
        # the split left L_d' rolling off slower than the plant; borrow
        # origin pole-zero pairs so the learned input stays causal
        weight, l_prime = _shift_weight(weight, l_prime, deficit)

    margin = config.anticausal_margin
    horizon = config.horizon_length + config.settle_pad
    core = build_reference(l_prime, horizon, config.truncation_threshold)
    reference = Sequence(
        np.concatenate([np.zeros(margin), core.samples]),
        margin,
        oracle.sample_rate_hz,
    )

    tracking = ilc_run(oracle, reference, learning_filter, config.ilc)

    taps = tracking.learned_input.samples[: margin + config.horizon_length].copy()
    mx = np.max(np.abs(taps))
    keep = np.flatnonzero(np.abs(taps) > config.truncation_threshold * mx)
    end = max(keep[-1] + 1, margin + 1) if len(keep) else margin + 1
    taps = taps[:end]

    total_energy = float(np.sum(taps**2))
    anticausal_energy = float(np.sum(taps[:margin] ** 2))
    if total_energy > 0 and anticausal_energy > ANTICAUSAL_ENERGY_LIMIT * total_energy:
        raise AnticausalController(anticausal_energy / total_energy)

    return LoopShapeResult(
        controller_fir=TwoSidedFir(taps, margin),
        weight=weight,
        tracking=tracking,
        relative_order_plant=plant_order,
        relative_order_target=target_order,
        learning_filter=learning_filter,
        inverse_tracking=inverse_tracking,
    )


def reconstruct_controller(
    c_prime: TwoSidedFir, weight: RationalTf, sample_rate_hz: float = 1.0
) -> TwoSidedFir:
    """Compose the learned taps with the frequency weight: c = H(z) c'.

    Only meaningful when H's impulse response settles within the tap window;
    weights holding unit-circle poles should stay rational and be composed
    with the reduced controller analytically instead.
    """
    if weight.is_identity:
        return c_prime
    if not weight.is_proper:
        raise ImproperTransferFunction(
            "frequency weight is improper; split_frequency_weight should have "
            "padded it with origin zeros"
        )
    seq = Sequence(c_prime.taps, c_prime.anchor, sample_rate_hz)
    out = simulate(RationalTf(weight.num, weight.den, sample_rate_hz), seq)
    return TwoSidedFir(out.samples, c_prime.anchor)
