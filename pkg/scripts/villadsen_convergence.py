"""Table of stage sizes, ratios and certified failure radii for Villadsen-type systems.

    python3 scripts/villadsen_convergence.py --c 7/3 --stages 6
"""

from __future__ import annotations

import argparse
from fractions import Fraction

from ahdrr.villadsen import comparison_failure_radius, generate_params, track_y_class


def digits(x: int) -> str:
    s = str(x)
    return s if len(s) <= 12 else f"~10^{len(s) - 1}"


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--c", action="append", type=Fraction, help="target dimension ratio (repeatable)")
    ap.add_argument("--stages", type=int, default=6)
    args = ap.parse_args()
    targets = args.c or [Fraction(1, 2), Fraction(1), Fraction(2), Fraction(7, 3)]

    for c in targets:
        p = generate_params(c, args.stages)
        print(f"c = {c}  (c/2 = {float(c / 2):.6f})")
        print(f"{'i':>3} {'P_i':>14} {'n_i':>14} {'P_i/n_i':>10} {'radius':>10} {'|r - c/2|':>10}  certificate")
        for i in range(1, args.stages + 1):
            fr = comparison_failure_radius(p, i)
            cert = type(track_y_class(p, i).verdict.certificate).__name__
            err = abs(fr.radius - c / 2)
            print(
                f"{i:>3} {digits(p.P(i)):>14} {digits(p.n(i)):>14} {float(p.ratio(i)):>10.6f}"
                f" {float(fr.radius):>10.6f} {float(err):>10.2e}  {cert}"
            )
        print()


if __name__ == "__main__":
    main()
