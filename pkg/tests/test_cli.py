"""Command-line front end: parsing, printing, exit codes, report envelope."""

import json
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from kltrace.cli import main, parse_cts, print_cts
from kltrace.cts import CTS, random_cts
from kltrace.errors import (
    AntisymmetryViolation,
    CtsSyntaxError,
    DanglingReference,
)
from kltrace.orders import FinSet, chain, discrete

E1 = "src/kltrace/data/e1.cts"
E2 = "src/kltrace/data/e2.cts"

ENVELOPE_KEYS = {
    "command", "input_digest", "verdict", "witnesses", "laws", "depth",
    "stabilized",
}


def run(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def seeded_instances():
    return st.integers(0, 10_000).map(lambda s: random_cts(random.Random(s)))


# parsing and printing


def test_parse_the_shipped_examples():
    with open(E1) as handle:
        doc = parse_cts(handle.read())
    assert doc.cts == CTS(
        discrete(["p", "q"]), FinSet(["a", "b"]), FinSet(["x", "y", "z"]),
        [("x", "a", "p", "y"), ("x", "a", "q", "z"), ("y", "b", "p", "z")],
        ["z"])
    with open(E2) as handle:
        doc = parse_cts(handle.read())
    assert doc.cts.conditions == chain(["k2", "k1"])


def test_print_then_parse_is_identity_on_the_examples():
    for path in (E1, E2):
        with open(path) as handle:
            text = handle.read()
        assert print_cts(parse_cts(text).cts) == text


@given(seeded_instances())
def test_parse_inverts_print(cts):
    assert parse_cts(print_cts(cts)).cts == cts


def test_parser_accepts_comments_and_blank_lines():
    doc = parse_cts("# a comment\n\nconditions: k\nalphabet: a\n"
                    "states: x # trailing note\naccepting:\n")
    assert doc.cts.states.members == frozenset({"x"})
    assert doc.cts.accepting == frozenset()


def test_parse_errors_carry_line_numbers():
    with pytest.raises(CtsSyntaxError) as err:
        parse_cts("conditions: k\nwibble: x\n")
    assert err.value.line_no == 2
    with pytest.raises(CtsSyntaxError) as err:
        parse_cts("conditions: k\nalphabet: a\naccepting:\n")
    assert err.value.line_no == 0  # missing states section
    with pytest.raises(DanglingReference) as err:
        parse_cts("conditions: k\nalphabet: a\nstates: x\naccepting:\n"
                  "trans: x a k zz\n")
    assert "line 5" in str(err.value)
    with pytest.raises(AntisymmetryViolation) as err:
        parse_cts("conditions: j k\norder: j <= k\norder: k <= j\n"
                  "alphabet: a\nstates: x\naccepting:\n")
    assert "line 3" in str(err.value)


def test_parse_rejects_malformed_transition_arity():
    with pytest.raises(CtsSyntaxError) as err:
        parse_cts("conditions: k\nalphabet: a\nstates: x\naccepting:\n"
                  "trans: x a k\n")
    assert err.value.line_no == 5


# subcommands and exit codes


def test_validate_then_complete_roundtrip(capsys, tmp_path):
    doc = tmp_path / "gap.cts"
    doc.write_text("conditions: k1 k2\norder: k2 <= k1\nalphabet: a\n"
                   "states: x\naccepting:\ntrans: x a k1 x\n")
    code, out, _ = run(["validate", str(doc)], capsys)
    assert code == 1
    assert "missing transition: x a k2 x" in out
    code, out, _ = run(["complete", str(doc)], capsys)
    assert code == 0
    # completion output (canonical text) validates cleanly from stdin
    import io
    import sys
    stdin = sys.stdin
    sys.stdin = io.StringIO(out)
    try:
        assert main(["validate", "-"]) == 0
    finally:
        sys.stdin = stdin
    capsys.readouterr()


def test_semantics_modes_agree_between_methods(capsys):
    cell = {E1: ["--state", "x", "--condition", "p"],
            E2: ["--state", "x", "--condition", "k1"]}
    for path in (E1, E2):
        for mode in ("lang", "ready", "fail"):
            for upgrades in ([], ["--upgrades"]):
                if mode == "fail" and upgrades:
                    continue
                base = ["semantics", path, "--mode", mode] + upgrades + cell[path]
                code, fix_out, _ = run(base + ["--method", "fixpoint"], capsys)
                assert code == 0
                code, dir_out, _ = run(base + ["--method", "direct"], capsys)
                assert code == 0
                # same decorated traces; head and stabilized lines may differ
                assert fix_out.splitlines()[2:] == dir_out.splitlines()[2:]


def test_semantics_lists_decorated_traces(capsys):
    code, out, _ = run(
        ["semantics", E1, "--mode", "lang", "--state", "x",
         "--condition", "p"], capsys)
    assert code == 0
    assert "  p : ab / accept" in out.splitlines()
    code, out, _ = run(
        ["semantics", E1, "--mode", "lang", "--state", "x",
         "--condition", "q"], capsys)
    assert "  q : a / accept" in out.splitlines()


def test_equiv_reports_the_branching_witness(capsys):
    code, out, _ = run(
        ["equiv", E1, "--mode", "lang", "--pair", "x", "z"], capsys)
    assert code == 1
    assert out.splitlines() == ["inequivalent", "witness: p : ab / accept"]
    code, out, _ = run(
        ["equiv", E1, "--mode", "lang", "--pair", "x", "x"], capsys)
    assert code == 0


def test_coincide_runs_the_report(capsys):
    code, out, _ = run(["coincide", E2, "--mode", "lang", "--upgrades"], capsys)
    assert code == 0
    assert "fixpoint equals direct semantics" in out


def test_laws_suites_exit_zero(capsys):
    code, out, _ = run(["laws", "--suite", "quantale", "--seed", "5"], capsys)
    assert code == 0
    assert "unit transport is total variation" in out


def test_dlaw_show_prints_the_table(capsys):
    code, out, _ = run(["dlaw-show", "--carrier-size", "2"], capsys)
    assert code == 0
    assert "theta[letter] over set" in out
    code, _, err = run(["dlaw-show", "--json"], capsys)
    assert code == 2
    assert "error:" in err


def test_error_paths_exit_two(capsys):
    cell = ["--state", "x", "--condition", "p"]
    code, _, err = run(
        ["semantics", E1, "--mode", "fail", "--upgrades"] + cell, capsys)
    assert code == 2
    assert "refusal sets" in err
    code, _, err = run(
        ["semantics", E1, "--mode", "lang", "--state", "zz",
         "--condition", "p"], capsys)
    assert code == 2
    assert "unknown state" in err
    code, _, err = run(
        ["semantics", "no-such-file.cts", "--mode", "lang"] + cell, capsys)
    assert code == 2
    code, _, err = run(
        ["semantics", E1, "--mode", "lang", "--depth", "-1"] + cell, capsys)
    assert code == 2


# the report envelope


def test_json_envelope_has_the_fixed_schema(capsys):
    code, out, _ = run(
        ["equiv", E1, "--mode", "lang", "--pair", "x", "z", "--json"], capsys)
    assert code == 1
    payload = json.loads(out)
    assert set(payload) == ENVELOPE_KEYS
    assert payload["command"] == "equiv"
    assert payload["verdict"] == "inequivalent"
    assert payload["witnesses"] == [
        {"condition": "p", "word": "ab", "observation": "accept"}]
    assert payload["laws"] == []
    assert payload["depth"] is None and payload["stabilized"] is None
    assert len(payload["input_digest"]) == 64


def test_json_envelope_renders_empty_words_as_eps(capsys):
    code, out, _ = run(
        ["equiv", E2, "--mode", "lang", "--upgrades", "--pair", "x", "y",
         "--json"], capsys)
    assert code == 1
    payload = json.loads(out)
    assert payload["witnesses"][0]["word"] == "eps"


def test_json_envelope_for_laws_lists_checks(capsys):
    code, out, _ = run(
        ["laws", "--suite", "quantale", "--json"], capsys)
    assert code == 0
    payload = json.loads(out)
    assert set(payload) == ENVELOPE_KEYS
    assert payload["verdict"] == "pass"
    assert all(row["status"] == "pass" for row in payload["laws"])
    assert all("counterexample" not in row for row in payload["laws"])


def test_json_output_is_byte_deterministic(capsys):
    args = ["semantics", E2, "--mode", "ready", "--upgrades",
            "--state", "x", "--condition", "k1", "--json"]
    _, first, _ = run(args, capsys)
    _, second, _ = run(args, capsys)
    assert first == second
    payload = json.loads(first)
    assert payload["stabilized"] is True
