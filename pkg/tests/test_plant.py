"""Plant oracles: determinism, the black-box contract, order probing, and
the external process protocol."""

import sys

import numpy as np
import pytest

from loopshaper import (
    DegenerateOracle,
    RationalTf,
    SubprocessPlant,
    TfPlant,
    delta,
    probe_relative_order,
    save_tf,
)
from conftest import FS, benchmark_plant_tf


def tf(num, den, fs=1.0):
    return RationalTf(np.asarray(num, float), np.asarray(den, float), fs)


class TestTfPlant:
    def test_counts_trials(self):
        oracle = TfPlant(tf([1.0], [1.0]))
        oracle(delta(4, 0))
        oracle(delta(4, 0))
        assert oracle.trials == 2

    def test_deterministic_bit_identical(self, plant):
        rng = np.random.default_rng(2)
        x = delta(256, 0, FS)
        x = type(x)(rng.standard_normal(256), 0, FS)
        y1 = plant(x)
        y2 = plant(x)
        assert np.array_equal(y1.samples, y2.samples)


class TestProbeRelativeOrder:
    def test_pure_delay(self):
        assert probe_relative_order(TfPlant(tf([1.0], [1.0, 0.0, 0.0, 0.0]))) == 3

    def test_benchmark_plant(self, plant):
        assert probe_relative_order(plant) == 1

    def test_biproper_plant(self):
        assert probe_relative_order(TfPlant(tf([1.0, -0.5], [1.0, -0.2]))) == 0

    def test_zero_plant(self):
        with pytest.raises(DegenerateOracle):
            probe_relative_order(TfPlant(tf([0.0], [1.0])))


class TestSubprocessPlant:
    def _server_cmd(self, tf_path):
        return [sys.executable, "-m", "loopshaper.plant_server", "--tf", str(tf_path)]

    def test_matches_in_process_simulation(self, tmp_path, plant):
        tf_path = tmp_path / "plant.json"
        save_tf(tf_path, benchmark_plant_tf())
        rng = np.random.default_rng(4)
        x = delta(128, 0, FS)
        x = type(x)(rng.standard_normal(128), 0, FS)
        with SubprocessPlant(self._server_cmd(tf_path), FS) as external:
            y_ext = external(x)
            y_ext2 = external(x)
        y_ref = plant(x)
        assert np.array_equal(y_ext.samples, y_ref.samples)
        assert np.array_equal(y_ext.samples, y_ext2.samples)

    def test_probe_through_protocol(self, tmp_path):
        tf_path = tmp_path / "plant.json"
        save_tf(tf_path, benchmark_plant_tf())
        with SubprocessPlant(self._server_cmd(tf_path), FS) as external:
            assert probe_relative_order(external) == 1
