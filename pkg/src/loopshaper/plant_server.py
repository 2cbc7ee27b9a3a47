"""Stand-alone plant process speaking the TRIAL line protocol over stdio.

Serves a rational transfer function so the learning pipeline can be
exercised against a genuinely external black box:

    python -m loopshaper.plant_server --num 1 --den 1 -0.5 --fs 10000
    python -m loopshaper.plant_server --tf plant.json
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .lti import RationalTf, load_tf, simulate
from .signals import Sequence


def serve(tf: RationalTf, stdin=None, stdout=None) -> None:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    while True:
        header = stdin.readline()
        if not header:
            return
        header = header.strip()
        if not header:
            continue
        if not header.startswith("TRIAL "):
            raise ValueError(f"malformed request line: {header!r}")
        n = int(header.split()[1])
        samples = np.empty(n)
        for i in range(n):
            samples[i] = float(stdin.readline())
        out = simulate(tf, Sequence(samples, 0, tf.sample_rate_hz))
        stdout.write("\n".join(f"{v:.17g}" for v in out.samples) + "\n")
        stdout.flush()


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--tf", help="path to a transfer-function JSON file")
    parser.add_argument("--num", nargs="+", type=float, help="numerator coefficients")
    parser.add_argument("--den", nargs="+", type=float, help="denominator coefficients")
    parser.add_argument("--fs", type=float, default=1.0, help="sample rate in Hz")
    args = parser.parse_args(argv)
    if args.tf:
        tf = load_tf(args.tf)
    elif args.num and args.den:
        tf = RationalTf(np.array(args.num), np.array(args.den), args.fs)
    else:
        parser.error("provide either --tf or both --num and --den")
    serve(tf)
    return 0


if __name__ == "__main__":
    sys.exit(main())
