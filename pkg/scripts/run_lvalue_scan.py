#!/usr/bin/env python3
"""Waldspurger proportionality scan and prime-twist probe.

Builds the certified form, computes central values of discriminant-form
twists with both cutoff kernels, and prints the ratio table

    a_f(D)^2 / L(1/2, D-twist)

which is constant over fundamental D > 0 (the constant absorbs the
Petersson norms).  Fundamental discriminants with root number -1 vanish
identically and are skipped.

    $ python scripts/run_lvalue_scan.py --dmax 200
"""

import argparse

import numpy as np

from kohnen.forms import ShimuraLiftOracle, build_plus_cusp_form
from kohnen.lcentral import (
    TwistedLSpec,
    central_value,
    siegel_probe,
    waldspurger_ratio_scan,
)
from kohnen.sieve import FactorSieve


def run(d_max: int) -> None:
    form = build_plus_cusp_form(6, max(d_max + 50, 250))
    tau = np.asarray(ShimuraLiftOracle.build(64 * d_max + 1).tau, dtype=np.float64)

    scan = waldspurger_ratio_scan(form, d_max, tau)
    print(f"{'D':>5} {'a_f(D)^2':>12} {'L(1/2)':>12} {'ratio':>12}")
    for row in scan.rows:
        ratio = f"{row.ratio:.8f}" if row.ratio is not None else "-"
        print(f"{row.D:>5} {row.af_squared:>12.6f} {row.l_value:>12.6f} {ratio:>12}")
    print(f"\nratio spread max/min = {scan.spread:.10f} "
          f"over rows with L >= {scan.l_cutoff}")

    # kernel cross-check on the largest few discriminants
    worst = 0.0
    for row in scan.rows[-5:]:
        alt = central_value(TwistedLSpec(tau, row.D), kernel="gaussian")
        worst = max(worst, abs(alt.value - row.l_value))
    print(f"dual-kernel agreement on the last 5 rows: {worst:.2e}")

    sieve = FactorSieve.build(max(d_max, 100))
    probe = siegel_probe(tau, d_max, sieve)
    print(f"\nprime twists p = 1 (mod 4), p <= {d_max}: "
          f"min nonzero L = {probe.min_nonzero:.6f}")
    for eps in probe.epsilons:
        print(f"  all nonzero values above p^-{eps}: {probe.all_above(eps)}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--dmax", type=int, default=200)
    args = ap.parse_args()
    run(args.dmax)
