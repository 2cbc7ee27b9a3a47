"""Transfer functions: simulation, frequency response, interconnection, roots."""

import numpy as np
import pytest

from loopshaper import (
    ImproperTransferFunction,
    PoleOnGrid,
    RationalTf,
    SampleRateMismatch,
    Sequence,
    aberth_roots,
    convolve,
    delta,
    feedback_unity,
    freq_response,
    impulse_response,
    load_tf,
    poles,
    save_tf,
    series,
    simulate,
    step_response,
    zeros,
    TwoSidedFir,
)
from conftest import FS, random_stable_tf


def tf(num, den, fs=1.0):
    return RationalTf(np.asarray(num, float), np.asarray(den, float), fs)


class TestSimulate:
    def test_identity_system(self):
        rng = np.random.default_rng(0)
        x = Sequence(rng.standard_normal(32), 3, 1.0)
        y = simulate(tf([1.0], [1.0]), x)
        np.testing.assert_array_equal(y.samples, x.samples)
        assert y.anchor == x.anchor

    def test_pure_delay(self):
        x = Sequence(np.array([1.0, 2.0, 3.0, 4.0]), 0, 1.0)
        y = simulate(tf([1.0], [1.0, 0.0]), x)
        np.testing.assert_array_equal(y.samples, [0.0, 1.0, 2.0, 3.0])

    def test_benchmark_plant_settles_to_pole_residue(self, plant_tf):
        # partial fractions at the z=1 pole: num(1) / ((1-0.4)(1-0.998))
        y = simulate(plant_tf, delta(6000, 0, FS))
        assert y.samples[-1] == pytest.approx(-0.0041667, abs=1e-6)
        assert y.samples[-100] == pytest.approx(-0.0041667, abs=1e-6)

    def test_improper_rejected(self):
        with pytest.raises(ImproperTransferFunction):
            simulate(tf([1.0, 0.0], [1.0]), delta(4, 0))

    def test_sample_rate_mismatch(self):
        with pytest.raises(SampleRateMismatch):
            simulate(tf([1.0], [1.0], 100.0), delta(4, 0, 200.0))


class TestResponses:
    def test_impulse_of_delay(self):
        y = impulse_response(tf([1.0], [1.0, 0.0]), 4)
        assert y.samples.tolist() == [0.0, 1.0, 0.0, 0.0]

    def test_step_of_identity(self):
        y = step_response(tf([1.0], [1.0]), 8)
        assert np.all(y.samples == 1.0)

    def test_target_loop_gain_first_samples(self, loop_target):
        # long division of 0.3(z-0.9) by (z-0.999)(z-0.7): h(0)=0, h(1)=0.3
        y = impulse_response(loop_target, 8)
        assert y.samples[0] == 0.0
        assert y.samples[1] == pytest.approx(0.3, abs=1e-12)


class TestFreqResponse:
    def test_unity(self):
        w = np.linspace(0, np.pi, 17)
        np.testing.assert_allclose(freq_response(tf([1.0], [1.0]), w), 1.0)

    def test_target_dc_gain(self, loop_target):
        val = freq_response(loop_target, np.array([0.0]))[0]
        assert abs(val) == pytest.approx(100.0, abs=1e-9)

    def test_pole_on_grid_reported(self):
        sys = tf([1.0], [1.0, -1.0])  # pole at z=1
        with pytest.raises(PoleOnGrid) as exc:
            freq_response(sys, np.array([0.5, 0.0]))
        assert exc.value.omega == 0.0

    def test_matches_impulse_dtft_for_stable_tf(self):
        rng = np.random.default_rng(21)
        for _ in range(5):
            sys = random_stable_tf(rng, int(rng.integers(1, 5)), max_pole=0.9)
            length = 600  # 0.9^600 ~ 3e-28, far below the tolerance
            h = impulse_response(sys, length)
            w = np.linspace(0.0, np.pi, 33)
            dtft = np.array(
                [np.sum(h.samples * np.exp(-1j * wk * np.arange(length))) for wk in w]
            )
            np.testing.assert_allclose(freq_response(sys, w), dtft, atol=1e-9)


class TestInterconnect:
    def test_series_of_delays(self):
        z1 = tf([1.0], [1.0, 0.0])
        z2 = series(z1, z1)
        y = impulse_response(z2, 5)
        assert y.samples.tolist() == [0.0, 0.0, 1.0, 0.0, 0.0]

    def test_series_is_convolution(self):
        rng = np.random.default_rng(5)
        a = random_stable_tf(rng, 3)
        b = random_stable_tf(rng, 2)
        n = 256
        lhs = impulse_response(series(a, b), n)
        ha = impulse_response(a, n)
        hb = impulse_response(b, n)
        prod = convolve(ha, TwoSidedFir(hb.samples, 0))
        np.testing.assert_allclose(lhs.samples, prod.samples[:n], atol=1e-9)

    def test_feedback_dc_value(self, loop_target):
        closed = feedback_unity(loop_target)
        val = freq_response(closed, np.array([0.0]))[0]
        assert abs(val) == pytest.approx(100.0 / 101.0, abs=1e-9)

    def test_closed_loop_poles_of_target(self, loop_target):
        closed = feedback_unity(loop_target)
        got = sorted(np.real(poles(closed)))
        assert got[0] == pytest.approx(0.4546, abs=1e-3)
        assert got[1] == pytest.approx(0.9444, abs=1e-3)

    def test_sample_rate_mismatch(self):
        with pytest.raises(SampleRateMismatch):
            series(tf([1.0], [1.0], 1.0), tf([1.0], [1.0], 2.0))


class TestRoots:
    def test_close_real_pair(self):
        got = sorted(aberth_roots([1.0, -1.998, 0.998]).real)
        assert got[0] == pytest.approx(0.998, abs=1e-9)
        assert got[1] == pytest.approx(1.0, abs=1e-9)

    def test_benchmark_plant_zeros(self, plant_tf):
        got = sorted(zeros(plant_tf).real)
        assert got[0] == pytest.approx(0.99, abs=1e-9)
        assert got[1] == pytest.approx(0.995, abs=1e-9)

    def test_delay_pole_at_origin(self):
        got = poles(tf([1.0], [1.0, 0.0]))
        assert got.tolist() == [0.0]

    def test_residual_bound_on_random_polynomials(self):
        rng = np.random.default_rng(3)
        for _ in range(25):
            deg = int(rng.integers(1, 9))
            c = rng.standard_normal(deg + 1)
            c[0] += np.sign(c[0]) or 1.0
            roots = aberth_roots(c)
            res = np.abs(np.polyval(c, roots))
            assert np.all(res < 1e-10 * np.linalg.norm(c))

    def test_complex_conjugate_pairs(self):
        # (z^2 - 1.2 z + 0.72) has roots 0.6 +- 0.6j
        got = aberth_roots([1.0, -1.2, 0.72])
        got = sorted(got, key=lambda v: v.imag)
        assert got[0] == pytest.approx(0.6 - 0.6j, abs=1e-10)
        assert got[1] == pytest.approx(0.6 + 0.6j, abs=1e-10)


class TestLtiProperties:
    def test_superposition_and_shift(self):
        rng = np.random.default_rng(9)
        for _ in range(4):
            sys = random_stable_tf(rng, int(rng.integers(1, 5)))
            n = 256
            x1 = Sequence(rng.standard_normal(n), 0, 1.0)
            x2 = Sequence(rng.standard_normal(n), 0, 1.0)
            a, b = rng.standard_normal(2)
            lhs = simulate(sys, Sequence(a * x1.samples + b * x2.samples, 0, 1.0))
            rhs = a * simulate(sys, x1).samples + b * simulate(sys, x2).samples
            np.testing.assert_allclose(lhs.samples, rhs, atol=1e-10)
            # shift invariance: delaying the input delays the output
            d = 5
            xs = np.concatenate([np.zeros(d), x1.samples[:-d]])
            ys = simulate(sys, Sequence(xs, 0, 1.0)).samples
            y = simulate(sys, x1).samples
            np.testing.assert_allclose(ys[d:], y[:-d], atol=1e-10)


class TestPersistence:
    def test_json_round_trip(self, tmp_path, plant_tf):
        path = tmp_path / "plant.json"
        save_tf(path, plant_tf)
        back = load_tf(path)
        np.testing.assert_array_equal(back.num, plant_tf.num)
        np.testing.assert_array_equal(back.den, plant_tf.den)
        assert back.sample_rate_hz == plant_tf.sample_rate_hz
