"""Black-box plant access: the only way learning code may touch a plant.

A PlantOracle maps an input Sequence to an output Sequence of the same
length and sample rate, deterministically. Learning algorithms receive the
oracle and nothing else; plant coefficients stay out of reach.
"""

from __future__ import annotations

import subprocess

import numpy as np

from .errors import DegenerateOracle, LoopShaperError
from .lti import RationalTf, simulate
from .signals import Sequence, delta


class PlantOracle:
    """Deterministic trial executor with an invocation counter.

    Subclasses implement _run(); __call__ validates the contract (same
    length, same sample rate) and counts trials. Trials are serialized --
    one at a time, like a physical experiment.
    """

    def __init__(self, sample_rate_hz: float):
        self.sample_rate_hz = float(sample_rate_hz)
        self.trials = 0

    def __call__(self, inp: Sequence) -> Sequence:
        if inp.sample_rate_hz != self.sample_rate_hz:
            raise LoopShaperError(
                f"oracle runs at {self.sample_rate_hz} Hz, input at {inp.sample_rate_hz} Hz"
            )
        self.trials += 1
        out = self._run(inp)
        if len(out) != len(inp):
            raise LoopShaperError(
                f"oracle returned {len(out)} samples for a {len(inp)}-sample input"
            )
        return out

    def _run(self, inp: Sequence) -> Sequence:
        raise NotImplementedError


class TfPlant(PlantOracle):
    """Oracle backed by simulating a rational transfer function."""

    def __init__(self, tf: RationalTf):
        super().__init__(tf.sample_rate_hz)
        self._tf = tf

    def _run(self, inp: Sequence) -> Sequence:
        return simulate(self._tf, inp)


class SubprocessPlant(PlantOracle):
    """Oracle backed by an external process speaking the line protocol:

    request:   "TRIAL <n>\\n" followed by n decimal samples, one per line
    response:  n decimal samples, one per line

    The child is spawned once and reused; responses must be deterministic.
    """

    def __init__(self, command: list[str], sample_rate_hz: float):
        super().__init__(sample_rate_hz)
        self._proc = subprocess.Popen(
            command,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )

    def _run(self, inp: Sequence) -> Sequence:
        n = len(inp)
        lines = [f"TRIAL {n}"]
        lines.extend(f"{v:.17g}" for v in inp.samples)
        self._proc.stdin.write("\n".join(lines) + "\n")
        self._proc.stdin.flush()
        out = np.empty(n)
        for i in range(n):
            line = self._proc.stdout.readline()
            if not line:
                raise LoopShaperError("plant process closed its output mid-trial")
            out[i] = float(line)
        return Sequence(out, inp.anchor, inp.sample_rate_hz)

    def close(self) -> None:
        if self._proc.stdin:
            self._proc.stdin.close()
        self._proc.wait(timeout=10)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def probe_relative_order(
    oracle: PlantOracle, length: int = 64, threshold: float = 1e-8
) -> int:
    """Measure the plant relative order from one impulse trial.

    Returns the index of the first output sample exceeding threshold times
    the peak output magnitude.
    """
    if length < 2:
        raise ValueError("probe length must be at least 2")
    y = oracle(delta(length, 0, oracle.sample_rate_hz))
    mag = np.abs(y.samples)
    peak = mag.max()
    if peak == 0.0:
        raise DegenerateOracle("impulse response is identically zero")
    return int(np.argmax(mag > threshold * peak))
