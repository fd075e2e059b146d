from __future__ import annotations

import io
import json
import re
import subprocess
import sys
from fractions import Fraction
from pathlib import Path

import pytest

from ahdrr.cli import load_schema, parse_rational, render_rational, run, InputError

SPECS = Path(__file__).parent / "data" / "specs"
DOCS_SCHEMA = Path(__file__).parents[1] / "docs" / "algebra_spec.schema.json"
P_Q = re.compile(r"^-?\d+/\d+$")


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    report = json.loads(out.getvalue()) if out.getvalue() else None
    return code, report, err.getvalue()


def walk_strings(obj):
    if isinstance(obj, dict):
        for v in obj.values():
            yield from walk_strings(v)
    elif isinstance(obj, list):
        for v in obj:
            yield from walk_strings(v)
    elif isinstance(obj, str):
        yield obj


class TestSubcommands:
    def test_construct_c2(self):
        code, rep, _ = call("construct", "--c", "2/1", "--stages", "2")
        body = rep["body"]
        assert code == 0
        assert [(p["m"], p["n"]) for p in body["params"]] == [(4, 3), (4, 15)]
        assert (body["params"][1]["s"]) == 1
        assert body["failure_radii"][1]["radius"] == "1/1"
        assert all(r["verdict"] == "NotPositive" for r in body["y_classes"])
        assert body["push_forward"][0]["consistent"] and body["push_forward"][0]["offset"] == 0

    def test_construct_eight_stages_is_fast_and_exact(self):
        code, rep, _ = call("construct", "--c", "7/3", "--stages", "8")
        assert code == 0 and len(rep["body"]["params"]) == 8
        assert all(p["consistent"] for p in rep["body"]["push_forward"])

    def test_sr(self):
        code, rep, _ = call("sr", str(SPECS / "block_5_1.json"))
        assert code == 0 and rep["body"]["stages"][0]["sr"] == 3

    def test_drr_system(self):
        code, rep, _ = call("drr", str(SPECS / "two_stage.json"))
        assert code == 0
        assert rep["body"]["stage_ratios"] == ["2/1", "4/3"] and rep["body"]["reported_limsup"] == "4/3"

    def test_drr_villadsen(self):
        code, rep, _ = call("drr", str(SPECS / "villadsen_c2.json"))
        assert rep["body"]["stage_ratios"] == ["8/3", "32/15", "512/255"]

    def test_rc_bound(self):
        code, rep, _ = call("rc-bound", "--dim", "5", "--rank", "1")
        assert code == 0 and rep["body"]["bound"] == "1/1" and rep["body"]["verification"]["verified"]

    def test_rc_bound_amplified(self):
        _, rep, _ = call("rc-bound", "--dim", "9", "--rank", "1", "--amplify", "3")
        assert rep["body"]["bound"] == "1/1"

    def test_aup(self):
        code, rep, _ = call("aup-witness")
        assert code == 0 and rep["body"]["witness"]["verified"]
        assert (rep["body"]["search"]["m"], rep["body"]["search"]["n"]) == (4, 3)

    def test_positivity_unknown_downgrades_exit(self):
        code, rep, _ = call("positivity", str(SPECS / "classes.json"))
        assert code == 2
        assert [r["verdict"] for r in rep["body"]["results"]] == ["NotPositive", "Positive", "NotPositive", "Unknown"]
        assert rep["body"]["results"][2]["certificate"]["degree"] == 1000

    def test_compare(self, tmp_path):
        out = tmp_path / "certs.json"
        code, rep, _ = call("compare", "--r", "1/4", str(SPECS / "sphere_even.json"), "--out", str(out))
        body = rep["body"]
        assert code == 0
        assert not body["strict_comparison"]["holds"]
        assert body["interpolation"][0]["status"] == "no_interpolant"
        certs = json.loads(out.read_text())
        assert certs["input_digest"] == rep["metadata"]["input_digest"]
        assert {c["check"] for c in certs["certificates"]} == {"strict_comparison", "fcq", "interpolation"}


class TestInputErrors:
    def test_decimal_rejected(self):
        code, rep, err = call("construct", "--c", "0.5", "--stages", "2")
        assert code == 3 and rep is None and "--c" in err

    def test_schema_location(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"block": {"summands": [{"dim": 5, "rank": 0}]}}))
        code, _, err = call("sr", str(bad))
        assert code == 3 and "$.block.summands[0].rank" in err

    def test_villadsen_decimal_in_file(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"villadsen": {"c": "0.5", "stages": 2}}))
        code, _, err = call("drr", str(bad))
        assert code == 3 and "$.villadsen.c" in err

    def test_nonunital_map(self, tmp_path):
        spec = json.loads((SPECS / "two_stage.json").read_text())
        spec["maps"][0]["components"][0].pop()
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(spec))
        code, _, err = call("drr", str(bad))
        assert code == 3 and "$.maps[0]" in err

    def test_malformed_json(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{")
        assert call("sr", str(bad))[0] == 3

    def test_missing_file(self, tmp_path):
        assert call("sr", str(tmp_path / "nope.json"))[0] == 3

    def test_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            call("construct", "--stages", "2")
        assert exc.value.code == 3

    def test_dense_cap(self, tmp_path, monkeypatch):
        spec = {"classes": [{"n": 5, "by_size": [1, 0, 0, 0, 0, 0]}]}
        path = tmp_path / "c.json"
        path.write_text(json.dumps(spec))
        assert call("positivity", str(path))[0] == 0
        monkeypatch.setenv("AH_DENSE_MAX_FACTORS", "4")
        code, _, err = call("positivity", str(path))
        assert code == 3 and "$.classes[0]" in err

    def test_aup_small_dim(self):
        assert call("aup-witness", "--dim", "4")[0] == 3


class TestReports:
    @pytest.mark.parametrize(
        "argv",
        [
            ("construct", "--c", "7/3", "--stages", "5"),
            ("compare", "--r", "1/4", str(SPECS / "sphere_even.json")),
            ("positivity", str(SPECS / "classes.json")),
            ("rc-bound", "--dim", "11", "--rank", "6"),
        ],
    )
    def test_byte_identical(self, argv):
        a, b = io.StringIO(), io.StringIO()
        run(list(argv), stdout=a)
        run(list(argv), stdout=b)
        assert a.getvalue() == b.getvalue()
        assert "time" not in json.loads(a.getvalue())["body"]

    def test_digest_depends_on_options(self):
        _, a, _ = call("rc-bound", "--dim", "5", "--rank", "1")
        _, b, _ = call("rc-bound", "--dim", "5", "--rank", "2")
        assert a["metadata"]["input_digest"] != b["metadata"]["input_digest"]

    def test_rationals_round_trip(self):
        _, rep, _ = call("construct", "--c", "7/3", "--stages", "4")
        fracs = [s for s in walk_strings(rep["body"]) if P_Q.match(s)]
        assert fracs
        for s in fracs:
            assert render_rational(parse_rational(s)) == s

    def test_parse_rational(self):
        assert parse_rational("-6/4") == Fraction(-3, 2)
        assert parse_rational("3") == 3
        for bad in ("1.5", "1/0", "a/b", "1e3"):
            with pytest.raises(InputError):
                parse_rational(bad)

    def test_schema_copies_agree(self):
        assert load_schema() == json.loads(DOCS_SCHEMA.read_text())


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "ahdrr.cli", "sr", str(SPECS / "block_5_1.json")], capture_output=True, text=True
    )
    assert proc.returncode == 0 and json.loads(proc.stdout)["body"]["stages"][0]["sr"] == 3
