"""Grid of verified radius-of-comparison lower bounds from the sphere-pair witness.

    python3 scripts/rc_bound_table.py --max-dim 13 --max-rank 6
"""

from __future__ import annotations

import argparse

from ahdrr.cuntz import rc_witness_build, rc_witness_verify


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-dim", type=int, default=13)
    ap.add_argument("--max-rank", type=int, default=6)
    args = ap.parse_args()

    ranks = range(1, args.max_rank + 1)
    print("dim \\ rank " + "".join(f"{R:>8}" for R in ranks))
    for n in range(2, args.max_dim + 1):
        cells = []
        for R in ranks:
            w = rc_witness_build(n, R)
            ok = rc_witness_verify(w).verified
            cells.append(str(w.bound) + ('' if ok else '!'))
        print(f"{n:>10} " + "".join(f"{c:>8}" for c in cells))
    print("\n'!' marks a witness that failed verification.")


if __name__ == "__main__":
    main()
