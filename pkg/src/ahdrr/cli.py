"""Command-line front end.

Reports are JSON objects ``{"metadata": ..., "body": ...}`` written to stdout with
sorted keys, so identical inputs give byte-identical output.  Rationals are
strings ``"p/q"``; plain counts stay JSON integers.

Exit codes: 0 computed, 2 computed but some verdict is Unknown, 3 input error.
"""

from __future__ import annotations

import argparse
import dataclasses
import enum
import hashlib
import json
import os
import re
import sys
from fractions import Fraction
from importlib import resources

import jsonschema

from . import __version__
from .ah import (
    AbstractCW,
    BlockMap,
    BuildingBlock,
    Eval,
    InductiveSystem,
    Proj,
    ProjBlocks,
    Summand,
    SphereProduct,
    drr_of_system,
    drr_sr_bound_check,
    nistor_stable_rank,
)
from .cuntz import (
    almost_unperforated_check,
    almost_unperforation_witness,
    aup_amplify,
    rc_witness_build,
    rc_witness_verify,
    witness_amplify,
)
from .kring import KClass, LineSum, SymKClass
from .ordered import (
    SphereEven,
    check_r_cancellation,
    check_r_fcq,
    check_r_interpolation,
    check_r_strict_comparison,
    sphere_product_model,
)
from .positivity import Status, Verdict, decide_positive
from .villadsen import (
    POINT_CHOICE_NOTE,
    build_system,
    comparison_failure_radius,
    generate_params,
    push_forward_offset,
    pushed_y_class,
    rc_lower_bound_drr_half,
    track_y_class,
)

EXIT_OK, EXIT_UNKNOWN, EXIT_INPUT = 0, 2, 3
DENSE_CAP_ENV = "AH_DENSE_MAX_FACTORS"
DEFAULT_DENSE_CAP = 16

_RATIONAL = re.compile(r"^(-?\d+)(?:/(\d+))?$")


class InputError(Exception):
    def __init__(self, location: str, message: str):
        super().__init__(f"{location}: {message}")
        self.location = location
        self.message = message


def parse_rational(text: str, location: str = "$") -> Fraction:
    """``"p/q"`` or ``"p"``; decimals are rejected so nothing is silently rounded."""
    m = _RATIONAL.match(text.strip()) if isinstance(text, str) else None
    if not m or (m.group(2) is not None and int(m.group(2)) == 0):
        raise InputError(location, f"expected a rational 'p/q', got {text!r}")
    return Fraction(int(m.group(1)), int(m.group(2) or 1))


def render_rational(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def dense_cap() -> int:
    raw = os.environ.get(DENSE_CAP_ENV, str(DEFAULT_DENSE_CAP))
    try:
        cap = int(raw)
    except ValueError:
        raise InputError(f"${DENSE_CAP_ENV}", f"not an integer: {raw!r}") from None
    return cap


def to_jsonable(obj):
    """Exact, deterministic JSON rendering of results and certificates."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, Fraction):
        return render_rational(obj)
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, range):
        return {"first": obj.start, "last": obj.stop - 1}
    if isinstance(obj, KClass):
        return {"n": obj.n, "terms": [{"monomial": _coords(mask), "coeff": c} for mask, c in obj.items()]}
    if isinstance(obj, LineSum):
        return {"line_sum": {"m": obj.m, "offset": obj.offset}}
    if isinstance(obj, SymKClass):
        return {"n": obj.n, "by_size": list(obj.by_size)}
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        out = {"type": type(obj).__name__}
        for f in dataclasses.fields(obj):
            if f.name == "metadata" or callable(getattr(obj, f.name)):
                continue
            out[f.name] = to_jsonable(getattr(obj, f.name))
        return out
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    raise TypeError(f"cannot render {type(obj).__name__}")


def _coords(mask: int) -> list[int]:
    from .kring import coords_of

    return list(coords_of(mask))


def verdict_json(v: Verdict) -> dict:
    return {"verdict": v.value.value, "certificate": to_jsonable(v.certificate)}


# ---------------------------------------------------------------------------
# input


def load_schema() -> dict:
    return json.loads(resources.files("ahdrr").joinpath("data/algebra_spec.schema.json").read_text())


def _json_path(path) -> str:
    out = "$"
    for p in path:
        out += f"[{p}]" if isinstance(p, int) else f".{p}"
    return out


def load_spec(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            spec = json.load(fh)
    except OSError as exc:
        raise InputError(path, f"cannot read: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}", exc.msg) from None
    validator = jsonschema.Draft202012Validator(load_schema())
    errors = sorted(validator.iter_errors(spec), key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if errors:
        err = jsonschema.exceptions.best_match(errors)
        raise InputError(_json_path(err.absolute_path), err.message)
    return spec


def _summand(d: dict) -> Summand:
    space = SphereProduct(d["spheres"]) if "spheres" in d else AbstractCW(d["dim"])
    return Summand(space, d["rank"])


def _block(d: dict) -> BuildingBlock:
    return BuildingBlock(tuple(_summand(s) for s in d["summands"]))


def _eigen(d: dict):
    if "proj" in d:
        return Proj(d["proj"]["source"], d["proj"]["embedding"])
    if "proj_blocks" in d:
        p = d["proj_blocks"]
        return ProjBlocks(p["source"], p["count"], p.get("offset", 0))
    return Eval(d["eval"]["source"], d["eval"].get("point", ""))


def _guard(location: str, build):
    try:
        return build()
    except (ValueError, TypeError) as exc:
        raise InputError(location, str(exc)) from None


def system_from_spec(spec: dict) -> InductiveSystem:
    if "block" in spec:
        return InductiveSystem((_guard("$.block", lambda: _block(spec["block"])),), ())
    if "villadsen" in spec:
        v = spec["villadsen"]
        c = parse_rational(v["c"], "$.villadsen.c")
        return _guard("$.villadsen", lambda: build_system(generate_params(c, v["stages"])))
    if "blocks" not in spec:
        raise InputError("$", "expected an algebra: 'block', 'blocks' with 'maps', or 'villadsen'")
    blocks = [_guard(f"$.blocks[{i}]", lambda b=b: _block(b)) for i, b in enumerate(spec["blocks"])]
    if len(spec["maps"]) != len(blocks) - 1:
        raise InputError("$.maps", f"{len(blocks)} blocks need {len(blocks) - 1} maps, got {len(spec['maps'])}")
    maps = []
    for i, m in enumerate(spec["maps"]):
        comps = tuple(tuple(_eigen(e) for e in comp) for comp in m["components"])
        maps.append(
            _guard(f"$.maps[{i}]", lambda comps=comps, m=m, i=i: BlockMap(blocks[i], blocks[i + 1], comps, m.get("unital", True)))
        )
    return _guard("$", lambda: InductiveSystem(tuple(blocks), tuple(maps)))


def class_from_spec(d: dict, location: str, cap: int):
    if "line_sum" in d:
        return LineSum(d["line_sum"]["m"], d["line_sum"].get("offset", 0))
    n = d["n"]
    if n > cap:
        raise InputError(location, f"{n} factors exceeds the dense cap {cap} (set {DENSE_CAP_ENV} to raise it)")
    if "by_size" in d:
        return _guard(location, lambda: SymKClass(n, tuple(d["by_size"])))
    terms: dict[tuple[int, ...], int] = {}
    for t in d["terms"]:
        key = tuple(sorted(t["monomial"]))
        terms[key] = terms.get(key, 0) + t["coeff"]
    return _guard(location, lambda: KClass.from_terms(n, terms))


def _digest(payload) -> str:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()
    return "sha256:" + hashlib.sha256(blob).hexdigest()


# ---------------------------------------------------------------------------
# subcommands; each returns (body, certificates, has_unknown)


def cmd_drr(args, spec):
    system = system_from_spec(spec)
    tail = spec.get("tail_from", 0)
    if tail >= len(system.blocks):
        raise InputError("$.tail_from", f"only {len(system.blocks)} stages")
    res = drr_of_system(system, tail)
    body = {
        "stage_ratios": [to_jsonable(r) for r in res.stage_ratios],
        "tail_from": res.tail_from,
        "reported_limsup": to_jsonable(res.reported_limsup),
        "note": "upper bound for drr of the limit, taken over this decomposition only",
    }
    return body, [], False


def cmd_sr(args, spec):
    system = system_from_spec(spec)
    stages = []
    for i, b in enumerate(system.blocks):
        chk = drr_sr_bound_check(b)
        stages.append(
            {
                "stage": i + 1,
                "sr": nistor_stable_rank(b),
                "drr": to_jsonable(chk.drr),
                "drr_at_least_half_sr_minus_one": chk.holds,
            }
        )
    return {"stages": stages}, [], False


def cmd_construct(args, spec):
    c = parse_rational(args.c, "--c")
    if c <= 0:
        raise InputError("--c", "c must be positive")
    if args.stages < 1:
        raise InputError("--stages", "need at least one stage")
    p = _guard("--c", lambda: generate_params(c, args.stages))
    system = build_system(p)
    params = []
    for k, st in enumerate(p.stages, start=1):
        lo, hi = p.bracket(k)
        params.append(
            {"stage": k, "m": st.m, "s": st.s, "n": st.n, "P": p.P(k), "ratio": to_jsonable(p.ratio(k)),
             "bracket": [to_jsonable(lo), to_jsonable(hi)]}
        )
    maps = []
    for i, bm in enumerate(system.maps, start=1):
        (comp,) = bm.components
        maps.append(
            {"from_stage": i, "projections": sum(e.count for e in comp if isinstance(e, ProjBlocks)),
             "evaluations": [e.point for e in comp if isinstance(e, Eval)]}
        )
    y_classes, radii, pushes, certs = [], [], [], []
    for k in range(1, len(p) + 1):
        y = track_y_class(p, k)
        y_classes.append({"stage": k, "class": to_jsonable(y.cls), "state": to_jsonable(y.state), **verdict_json(y.verdict)})
        fr = comparison_failure_radius(p, k)
        radii.append({"stage": k, "radius": to_jsonable(fr.radius), "state_gap": to_jsonable(fr.state_gap),
                      **verdict_json(fr.verdict)})
        certs.append({"stage": k, "y_class": verdict_json(y.verdict), "comparison": verdict_json(fr.verdict)})
        if k < len(p):
            img = pushed_y_class(p, k)
            expected = push_forward_offset(p, k)
            nxt = track_y_class(p, k + 1).cls
            pushes.append({"stage": k, "image": to_jsonable(img), "offset": expected,
                           "consistent": img.m == nxt.m and img.offset - nxt.offset == expected})
    unknown = any(r["verdict"] == Status.UNKNOWN.value for r in y_classes + radii)
    body = {
        "c": to_jsonable(c),
        "params": params,
        "system": {"blocks": [{"spheres": p.P(k), "rank": p.n(k)} for k in range(1, len(p) + 1)], "maps": maps,
                   "points": POINT_CHOICE_NOTE},
        "y_classes": y_classes,
        "push_forward": pushes,
        "failure_radii": radii,
        "rc_lower_bound": to_jsonable(rc_lower_bound_drr_half(p)),
    }
    return body, certs, unknown


def cmd_positivity(args, spec):
    if "classes" not in spec:
        raise InputError("$", "positivity needs a 'classes' list")
    cap = dense_cap()
    results, certs = [], []
    for i, d in enumerate(spec["classes"]):
        loc = f"$.classes[{i}]"
        cls = class_from_spec(d, loc, cap)
        n = spec.get("n_factors", d.get("n", cls.m if isinstance(cls, LineSum) else None))
        v = _guard(loc, lambda: decide_positive(cls, n))
        results.append({"index": i, "n_factors": n, **verdict_json(v)})
        certs.append({"index": i, **verdict_json(v)})
    unknown = any(r["verdict"] == Status.UNKNOWN.value for r in results)
    return {"results": results}, certs, unknown


def _model_from_spec(spec: dict):
    if "model" not in spec:
        raise InputError("$", "compare needs a 'model'")
    m = spec["model"]
    if "sphere_even" in m:
        return _guard("$.model.sphere_even", lambda: SphereEven(m["sphere_even"]["m"], m["sphere_even"]["rank"]))
    n = m["sphere_product"]["n"]
    if n > dense_cap():
        raise InputError("$.model.sphere_product.n", f"{n} factors exceeds the dense cap {dense_cap()}")
    return sphere_product_model(n, m["sphere_product"]["rank"])


def _check_lengths(model, vectors, location):
    for i, v in enumerate(vectors):
        if len(v) != model.dim:
            raise InputError(f"{location}[{i}]", f"length {len(v)} but the model has rank {model.dim}")


def cmd_compare(args, spec):
    r = parse_rational(args.r, "--r")
    if r < 0:
        raise InputError("--r", "r must be nonnegative")
    model = _model_from_spec(spec)
    pairs = [tuple(p) for p in spec.get("pairs", [])]
    for i, p in enumerate(pairs):
        _check_lengths(model, p, f"$.pairs[{i}]")
    body, certs, unknown = {"r": to_jsonable(r)}, [], False
    for name, check in (
        ("strict_comparison", check_r_strict_comparison),
        ("cancellation", check_r_cancellation),
        ("fcq", check_r_fcq),
    ):
        res = check(model, r, pairs)
        body[name] = {"holds": res.holds, "exercised": res.exercised, "failures": to_jsonable(res.failures),
                      "inconclusive": to_jsonable(res.inconclusive), "skipped": to_jsonable(res.skipped)}
        unknown |= bool(res.inconclusive)
        if res.failures:
            certs.append({"check": name, "witness": to_jsonable(res.witness)})
    box = spec.get("search_box", 2)
    interp = []
    for i, q in enumerate(spec.get("quadruples", [])):
        _check_lengths(model, q, f"$.quadruples[{i}]")
        res = check_r_interpolation(model, r, q, box)
        interp.append(to_jsonable(res))
        unknown |= res.status == "inconclusive"
        if res.status == "no_interpolant":
            certs.append({"check": "interpolation", "quadruple": to_jsonable(q), "box": box})
    body["interpolation"] = interp
    return body, certs, unknown


def cmd_rc_bound(args, spec):
    if args.dim < 1 or args.rank < 1:
        raise InputError("--dim/--rank", "both must be at least 1")
    if args.amplify < 1:
        raise InputError("--amplify", "must be at least 1")
    w = rc_witness_build(args.dim, args.rank)
    if args.amplify > 1:
        w = witness_amplify(w, args.amplify)
    v = rc_witness_verify(w)
    body = {"m": w.m, "unit_rank": w.unit_rank, "bound": to_jsonable(w.bound), "degenerate": w.degenerate,
            "witness": to_jsonable(w), "verification": to_jsonable(v)}
    return body, [to_jsonable(v)], False


def cmd_aup_witness(args, spec):
    if args.dim < 5:
        raise InputError("--dim", f"need dimension at least 5, got {args.dim}")
    w = almost_unperforation_witness(args.dim, 1)
    if args.rank > 1:
        w = aup_amplify(w, args.rank)
    found = almost_unperforated_check([w.y, w.x], args.max_mn)
    search = None if found is None else {"x": to_jsonable(found.x), "y": to_jsonable(found.y), "m": found.m, "n": found.n}
    body = {"witness": to_jsonable(w), "search": search, "max_mn": args.max_mn}
    return body, [to_jsonable(w)], False


# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ahdrr", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"ahdrr {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def with_out(p):
        p.add_argument("--out", help="write machine-readable certificates to this path")
        return p

    p = with_out(sub.add_parser("drr", help="dimension-rank ratio of each stage"))
    p.add_argument("spec")
    p.set_defaults(func=cmd_drr, needs_spec=True)
    p = with_out(sub.add_parser("sr", help="stable rank of each stage"))
    p.add_argument("spec")
    p.set_defaults(func=cmd_sr, needs_spec=True)
    p = with_out(sub.add_parser("construct", help="Villadsen-type system with drr = c"))
    p.add_argument("--c", required=True, help="target ratio as p/q")
    p.add_argument("--stages", type=int, required=True)
    p.set_defaults(func=cmd_construct, needs_spec=False)
    p = with_out(sub.add_parser("positivity", help="decide positivity of listed classes"))
    p.add_argument("spec")
    p.set_defaults(func=cmd_positivity, needs_spec=True)
    p = with_out(sub.add_parser("compare", help="run the r-property checkers on a model"))
    p.add_argument("spec")
    p.add_argument("--r", required=True, help="radius as p/q")
    p.set_defaults(func=cmd_compare, needs_spec=True)
    p = with_out(sub.add_parser("rc-bound", help="radius-of-comparison lower-bound witness"))
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--amplify", type=int, default=1)
    p.set_defaults(func=cmd_rc_bound, needs_spec=False)
    p = with_out(sub.add_parser("aup-witness", help="failure of almost unperforation"))
    p.add_argument("--dim", type=int, default=5)
    p.add_argument("--rank", type=int, default=1)
    p.add_argument("--max-mn", type=int, default=4)
    p.set_defaults(func=cmd_aup_witness, needs_spec=False)
    return parser


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    options = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "needs_spec", "out", "spec")}
    try:
        spec = load_spec(args.spec) if args.needs_spec else None
        body, certs, unknown = args.func(args, spec)
    except InputError as exc:
        print(f"ahdrr: input error at {exc.location}: {exc.message}", file=stderr)
        return EXIT_INPUT
    metadata = {
        "tool": "ahdrr",
        "version": __version__,
        "subcommand": args.command,
        "input_digest": _digest({"options": options, "spec": spec}),
    }
    stdout.write(json.dumps({"metadata": metadata, "body": body}, sort_keys=True, indent=2) + "\n")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump({"input_digest": metadata["input_digest"], "certificates": certs}, fh, sort_keys=True, indent=2)
            fh.write("\n")
    return EXIT_UNKNOWN if unknown else EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
