"""The iterative learning loop: exact cases, the error recursion, and
convergence-rate estimation."""

import numpy as np
import pytest

from loopshaper import (
    DivergenceError,
    IlcConfig,
    RationalTf,
    Sequence,
    TfPlant,
    TwoSidedFir,
    convolve,
    empirical_convergence_rate,
    ilc_run,
    l2_norm,
    rewindow,
    simulate,
)
from conftest import random_stable_tf


def tf(num, den, fs=1.0):
    return RationalTf(np.asarray(num, float), np.asarray(den, float), fs)


def unit_filter(gain=1.0, advance=0):
    taps = np.zeros(advance + 1)
    taps[0] = gain
    return TwoSidedFir(taps, advance)


class TestExactCases:
    def test_identity_plant_identity_filter(self):
        rng = np.random.default_rng(0)
        r = Sequence(rng.standard_normal(32), 0, 1.0)
        res = ilc_run(TfPlant(tf([1.0], [1.0])), r, unit_filter(), IlcConfig(5))
        assert res.error_l2_history[0] == 0.0
        assert res.iterations_run == 1

    def test_delay_plant_exact_inverse(self):
        # advance-by-2 filter inverts z^-2 exactly: zero error from the start
        rng = np.random.default_rng(1)
        r = Sequence(np.concatenate([np.zeros(2), rng.standard_normal(30)]), 0, 1.0)
        res = ilc_run(
            TfPlant(tf([1.0], [1.0, 0.0, 0.0])), r, unit_filter(advance=2), IlcConfig(5)
        )
        assert res.error_l2_history[0] < 1e-14

    def test_outputs_are_fresh_objects(self):
        rng = np.random.default_rng(2)
        r_samples = rng.standard_normal(16)
        r = Sequence(r_samples.copy(), 0, 1.0)
        f = unit_filter(gain=0.5)
        res1 = ilc_run(TfPlant(tf([1.0], [1.0])), r, f, IlcConfig(4))
        res2 = ilc_run(TfPlant(tf([1.0], [1.0])), r, f, IlcConfig(4))
        assert np.array_equal(r.samples, r_samples)
        assert np.array_equal(res1.error_l2_history, res2.error_l2_history)
        assert np.array_equal(res1.learned_input.samples, res2.learned_input.samples)


class TestErrorRecursion:
    def test_error_signal_equivalence_interior(self):
        """Measured e_j equals (1 - P F)^{j+1} r computed by unwindowed
        convolution/simulation, away from the window edges."""
        rng = np.random.default_rng(8)
        n = 256
        for _ in range(3):
            plant_sys = random_stable_tf(rng, 2, max_pole=0.6)
            # small filter gain keeps growth under the divergence guard even
            # where the plant phase makes |1 - P F| exceed one
            grid = np.linspace(0.0, np.pi, 512)
            peak = np.max(np.abs(
                np.polyval(plant_sys.num, np.exp(1j * grid))
                / np.polyval(plant_sys.den, np.exp(1j * grid))
            ))
            f = TwoSidedFir(np.array([0.0, 0.0, 0.25 / peak, 0.0, 0.1 / peak]), 2)
            r = Sequence(rng.standard_normal(n), 0, 1.0)

            captured = []

            class Capture(TfPlant):
                def _run(self, inp):
                    out = super()._run(inp)
                    captured.append(out)
                    return out

            res = ilc_run(Capture(plant_sys), r, f, IlcConfig(5, stop_error_db=-400.0))
            assert res.iterations_run == 5

            # independent path: expand the window each application instead of
            # truncating, so no boundary effect enters the prediction
            memory = 80  # 0.6^80 ~ 2e-18, well under the tolerance
            e_pred = r
            for j in range(5):
                fe = convolve(e_pred, f)
                grown = rewindow(
                    fe, fe.anchor + memory, len(fe) + 2 * memory
                )
                pfe = simulate(plant_sys, grown)
                e_pred = Sequence(
                    rewindow(e_pred, grown.anchor, len(grown)).samples - pfe.samples,
                    grown.anchor,
                    1.0,
                )
                measured = r.samples - captured[j].samples
                lo = memory                      # left-edge plant memory
                hi = n - (j + 1) * (f.anchor + 1)  # right-edge anticausal reach
                pred_window = rewindow(e_pred, 0, n).samples
                scale = np.max(np.abs(pred_window)) or 1.0
                np.testing.assert_allclose(
                    measured[lo:hi], pred_window[lo:hi], atol=1e-9 * scale
                )


class TestContraction:
    def test_monotone_contraction_bound(self):
        """With gamma_hat = max |1 - P F| < 1 the error contracts geometrically."""
        plant_sys = tf([1.0, -0.5], [1.0, 0.0])  # FIR plant 1 - 0.5 z^-1
        f = TwoSidedFir(np.array([0.5]), 0)
        omega = np.linspace(0, np.pi, 2048)
        pf = 0.5 * (
            np.polyval(plant_sys.num, np.exp(1j * omega))
            / np.polyval(plant_sys.den, np.exp(1j * omega))
        )
        gamma_hat = np.max(np.abs(1 - pf))
        assert gamma_hat < 1
        rng = np.random.default_rng(12)
        r = Sequence(rng.standard_normal(96), 0, 1.0)
        res = ilc_run(TfPlant(plant_sys), r, f, IlcConfig(10, stop_error_db=-400.0))
        hist = res.error_l2_history
        assert np.all(np.diff(hist) <= 1e-12)
        bound = (gamma_hat + 0.05) ** np.arange(1, 11) * l2_norm(r)
        assert np.all(hist <= bound)

    def test_divergence_guard(self):
        # wrong-sign filter: |1 - PF| > 1 at every frequency
        plant_sys = tf([1.0, -0.5], [1.0, 0.0])
        f = TwoSidedFir(np.array([-1.0]), 0)
        rng = np.random.default_rng(13)
        r = Sequence(rng.standard_normal(64), 0, 1.0)
        with pytest.raises(DivergenceError):
            ilc_run(TfPlant(plant_sys), r, f, IlcConfig(200, stop_error_db=-400.0))


class TestConvergenceRate:
    def test_exact_geometric_decay(self):
        assert empirical_convergence_rate([1.0, 0.5, 0.25]) == pytest.approx(0.5)

    def test_immediate_convergence(self):
        assert empirical_convergence_rate([1.0, 0.0]) == 0.0

    def test_scalar_plant_rate(self):
        # plant gain 2, filter gain 0.25: rate |1 - pf| = 0.5
        plant_sys = tf([2.0], [1.0])
        f = TwoSidedFir(np.array([0.25]), 0)
        rng = np.random.default_rng(14)
        r = Sequence(rng.standard_normal(40), 0, 1.0)
        res = ilc_run(TfPlant(plant_sys), r, f, IlcConfig(12, stop_error_db=-400.0))
        rate = empirical_convergence_rate(res.error_l2_history, l2_norm(r))
        assert rate == pytest.approx(0.5, abs=1e-9)

    def test_needs_two_entries(self):
        with pytest.raises(ValueError):
            empirical_convergence_rate([1.0])

    def test_floor_drops_noise_pairs(self):
        history = [1.0, 1e-2, 1e-16, 2e-16, 1.5e-16]
        rate = empirical_convergence_rate(history, reference_norm=1.0)
        # only the pairs with denominators above 1e-13 survive
        assert rate == pytest.approx(np.exp(np.mean(np.log([1e-2, 1e-14]))))
