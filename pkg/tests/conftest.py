"""Shared systems for the test suite.

The benchmark plant is third order with a marginally stable pole at z=1
and minimum-phase zeros; the matching target loop gain is second order
with a slow pole near the unit circle and a lead zero. Both are used at a
10 kHz sample rate throughout.
"""

import numpy as np
import pytest

from loopshaper import RationalTf, TfPlant

FS = 10_000.0


def benchmark_plant_tf() -> RationalTf:
    num = -0.1 * np.polymul([1, -0.995], [1, -0.99])
    den = np.polymul([1, -0.4], [1, -1.998, 0.998])
    return RationalTf(num, den, FS)


def target_loop_gain_tf() -> RationalTf:
    num = 0.3 * np.array([1, -0.9])
    den = np.polymul([1, -0.999], [1, -0.7])
    return RationalTf(num, den, FS)


@pytest.fixture
def plant_tf() -> RationalTf:
    return benchmark_plant_tf()


@pytest.fixture
def plant(plant_tf) -> TfPlant:
    return TfPlant(plant_tf)


@pytest.fixture
def loop_target() -> RationalTf:
    return target_loop_gain_tf()


def random_stable_tf(rng: np.random.Generator, order: int, fs: float = 1.0,
                     max_pole: float = 0.9) -> RationalTf:
    """Random strictly stable transfer function with real coefficients."""
    poles = []
    remaining = order
    while remaining > 0:
        if remaining >= 2 and rng.random() < 0.4:
            radius = max_pole * rng.random()
            angle = rng.uniform(0.1, np.pi - 0.1)
            p = radius * np.exp(1j * angle)
            poles.extend([p, np.conj(p)])
            remaining -= 2
        else:
            poles.append(rng.uniform(-max_pole, max_pole))
            remaining -= 1
    den = np.real(np.poly(poles))
    num_order = rng.integers(0, order + 1)
    num = rng.standard_normal(num_order + 1)
    if abs(num[0]) < 0.1:
        num[0] = 0.1 * np.sign(num[0]) if num[0] != 0 else 0.1
    return RationalTf(num, den, fs)
