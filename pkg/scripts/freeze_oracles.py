"""Recompute the reference values in tests/data/frozen_oracles.json from tests/oracles.py."""

from __future__ import annotations

import json
import sys
from fractions import Fraction
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))

import oracles  # noqa: E402


def key(mono) -> str:
    return ",".join(map(str, mono))


def keyed(terms: dict) -> dict:
    return {key(m): c for m, c in sorted(terms.items())}


def main() -> None:
    out = {}
    out["sum_t_squared_n2"] = keyed(oracles.dense_mul(2, {(1,): 1, (2,): 1}, {(1,): 1, (2,): 1}))
    out["sym_n3_deg1_times_deg2"] = keyed(
        oracles.dense_mul(3, {(1,): 1, (2,): 1, (3,): 1}, {(1, 2): 1, (1, 3): 1, (2, 3): 1})
    )
    out["line_basis_t1"] = keyed(oracles.line_basis(1, {(1,): 1}))
    out["line_basis_L1L2"] = keyed(oracles.line_basis(2, {(): 1, (1,): 1, (2,): 1, (1, 2): 1}))
    out["chern_t1"] = keyed(oracles.chern_product(1, {(1,): 1}))
    out["chern_line_sums"] = {
        str(m): keyed(oracles.chern_product(m, {(): m, **{(i,): 1 for i in range(1, m + 1)}})) for m in range(1, 7)
    }
    out["chern_y_m4"] = keyed(oracles.chern_product(4, {(): 3, **{(i,): 1 for i in range(1, 5)}}))
    out["chern_1_t1_t2"] = keyed(oracles.chern_product(2, {(): 1, (1,): 1, (2,): 1}))
    out["chern_L1L2"] = keyed(oracles.chern_product(2, {(): 1, (1,): 1, (2,): 1, (1, 2): 1}))
    out["chern_mixed_n3"] = keyed(oracles.chern_product(3, {(): 2, (1,): -1, (2, 3): 3, (1, 2, 3): -2}))
    out["semigroup_2_3_upto_20"] = sorted(oracles.semigroup_members([2, 3], 20))
    out["villadsen"] = {
        c: oracles.villadsen_search(Fraction(c), 4) for c in ("1/2", "1", "2", "7/3")
    }
    path = ROOT / "tests" / "data" / "frozen_oracles.json"
    path.write_text(json.dumps(out, indent=1, sort_keys=True) + "\n")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
