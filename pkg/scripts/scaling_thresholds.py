#!/usr/bin/env python3
"""Empirical sample-size thresholds of the identity tester vs domain size.

Runs the tester on the cascading-swap family over a geometric sample grid
for several domain sizes at fixed epsilon, locates the smallest grid point
where both error rates drop to 1/3, and writes all rate rows to a CSV.
Sub-4x threshold growth per 4x domain growth is the polylogarithmic
signature; square-root scaling would at least double per step.
"""

from pathlib import Path

import permtest as pt

DOMAIN_SIZES = (2**12, 2**14, 2**16)
EPSILON = 0.1
GRID = tuple(int(8e8 * 1.363**i) for i in range(12))
TRIALS = 40
# Same stream as the acceptance run, so the committed artifact matches.
MASTER_SEED = pt.derive_seed(0xACC, 10)
OUT = Path(__file__).resolve().parent.parent / "results" / "scaling_thresholds.csv"


def main() -> None:
    OUT.parent.mkdir(exist_ok=True)
    study = pt.run_scaling_study(
        DOMAIN_SIZES, EPSILON, GRID, TRIALS, MASTER_SEED, out_csv=OUT
    )
    print(f"wrote {OUT}")
    prev = None
    for n in DOMAIN_SIZES:
        _, thr = study[n]
        growth = "" if prev is None or thr is None else f"  growth x{thr / prev:.2f}"
        print(f"n=2^{n.bit_length() - 1:<3d} threshold={thr}{growth}")
        prev = thr


if __name__ == "__main__":
    main()
