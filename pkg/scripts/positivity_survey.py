"""How often each positivity rule fires on random classes, by number of factors.

    python3 scripts/positivity_survey.py --samples 2000 --max-factors 8
"""

from __future__ import annotations

import argparse
import random
from collections import Counter

from ahdrr.kring import KClass
from ahdrr.positivity import decide_positive


def random_class(rng: random.Random, n: int) -> KClass:
    coeffs = {rng.randrange(1 << n): rng.randint(-3, 3) for _ in range(rng.randint(1, 6))}
    coeffs[0] = rng.randint(0, n + 2)
    return KClass(n, coeffs)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=2000)
    ap.add_argument("--max-factors", type=int, default=8)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    names = ["ZeroClass", "ThresholdRule", "ChernObstruction", "NegativeRank", "NonzeroRankZero", "NoRuleFired"]
    print(f"{'n':>3} " + "".join(f"{k:>18}" for k in names))
    for n in range(1, args.max_factors + 1):
        tally = Counter(type(decide_positive(random_class(rng, n), n).certificate).__name__ for _ in range(args.samples))
        print(f"{n:>3} " + "".join(f"{tally[k] / args.samples:>18.3f}" for k in names))


if __name__ == "__main__":
    main()
