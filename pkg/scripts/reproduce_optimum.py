"""Reproduce the ideal-test numbers end to end.

Prints the closed-form optimum, the multistart search result, the
moment-relaxation upper bounds, the Hardy special case, and the
self-test fidelity for a lumpy direct sum, each with the deviation
from its reference.

Usage: python3 scripts/reproduce_optimum.py [--starts N] [--seed S]
"""

import argparse
import time

import numpy as np

from cabello.npa import npa_upper_bound
from cabello.optimize import optimize_hardy, optimize_ideal
from cabello.qubit import (
    ConstrainedStateParams,
    MeasurementParams,
    analytic_optimum,
    constrained_state,
)
from cabello.selftest import assemble_direct_sum, verify_selftest


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--starts", type=int, default=64)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    opt = analytic_optimum()
    print(f"closed-form score      {opt.score:.15f}")
    print(f"closed-form alpha=beta {opt.alpha:.15f}")
    print(f"closed-form c          {opt.c:.15f}")

    t0 = time.perf_counter()
    res = optimize_ideal(starts=args.starts, seed=args.seed)
    dt = time.perf_counter() - t0
    print(f"multistart score       {res.score:.15f}"
          f"   (err {res.score - opt.score:+.2e}, {dt:.2f} s,"
          f" {res.starts_used} starts)")

    m = MeasurementParams(alpha=opt.alpha, beta=opt.beta, phi=0.0, xi=0.0)
    state = constrained_state(
        ConstrainedStateParams(c=opt.c, delta=np.pi, meas=m))
    amps = " ".join(f"{a.real:+.10f}" for a in state)
    print(f"optimal amplitudes     {amps}")

    for level in ("2", "3"):
        t0 = time.perf_counter()
        ub = npa_upper_bound(level, eps=0.0)
        dt = time.perf_counter() - t0
        print(f"upper bound level {level}    {ub:.15f}"
              f"   (gap {ub - opt.score:+.2e}, {dt:.2f} s)")

    hardy = optimize_hardy(starts=args.starts, seed=args.seed)
    print(f"hardy maximum          {hardy.score:.15f}"
          f"   (expected {(5 * np.sqrt(5) - 11) / 2:.15f})")

    rep = verify_selftest(assemble_direct_sum([0.3, 0.7]))
    print(f"selftest fidelity      {rep.fidelity:.15f}   (weights 0.3/0.7)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
