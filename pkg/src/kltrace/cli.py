"""Command-line front end: parse system descriptions, run semantics,
equivalence and coincidence commands, and drive the law suites.

File grammar (line oriented, '#' starts a comment, tokens are
whitespace separated; sections may appear in any order and repeat):

    conditions: <id> ...
    order: <id> <= <id>
    alphabet: <id> ...
    states: <id> ...
    accepting: <id> ...
    trans: <state> <action> <condition> <state>

'order:' lines are closed reflexively and transitively; antisymmetry is
re-checked after each line so a violation is attributed to the line that
introduced it.  Parse errors carry a line number (0 means the document
as a whole, e.g. a missing section).

Exit codes: 0 success, equivalent, or all laws pass; 1 inequivalent or
violation found (witness printed); 2 usage or input error.  Output is
deterministic: identical inputs, flags and seeds give byte-identical
reports.  --json switches to a fixed envelope {command, input_digest,
verdict, witnesses, laws, depth, stabilized} serialized with sorted
keys; words print as concatenated letters ('eps' when empty) and
observations as 'accept' or sorted letter sets like '{a,b}'.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import dataclass

from .cts import (
    ACCEPT,
    CTS,
    ObservationMode,
    behaviour_equiv,
    build_alpha,
    closed_form_cell,
    coincidence_check,
    complete,
    fixpoint_traces,
    validate,
)
from .dlaw import (
    build_dlaw,
    check_beck_chevalley,
    check_fabric,
    check_kl_law,
    check_lifting_preserves,
    is_weak_pullback,
    lambda_square,
    letter_lifting,
    machine_lifting,
    non_pullback_square,
    validate_lifting,
)
from .errors import (
    AntisymmetryViolation,
    CtsSyntaxError,
    DanglingReference,
    KltraceError,
    UnknownCondition,
    UnknownState,
)
from .kleisli import PlainKl, RelKl, check_kleisli_laws, check_lifting_theorems
from .monads import check_monad_laws, monad_for
from .orders import (
    FinSet,
    all_maps,
    canon_sorted,
    chain,
    closure,
    discrete,
    fmt_element,
    monotone_maps,
    posets_on,
)
from .report import LawReport
from .transport import check_quantale_laws, probe_family


# ---------------------------------------------------------------------------
# parsing and printing


@dataclass(frozen=True)
class CtsDocument:
    """A parsed system description together with its source text."""

    raw: str
    cts: CTS


def parse_cts(text: str) -> CtsDocument:
    """Parse the line grammar above; every failure carries a position."""
    conditions: list[str] = []
    alphabet: list[str] = []
    states: list[str] = []
    accepting: list[tuple[int, str]] = []
    order_lines: list[tuple[int, str, str]] = []
    trans_lines: list[tuple[int, tuple]] = []

    for line_no, full_line in enumerate(text.splitlines(), start=1):
        tokens = full_line.split("#", 1)[0].split()
        if not tokens:
            continue
        head, rest = tokens[0], tokens[1:]
        if head == "conditions:":
            conditions += [t for t in rest if t not in conditions]
        elif head == "alphabet:":
            alphabet += [t for t in rest if t not in alphabet]
        elif head == "states:":
            states += [t for t in rest if t not in states]
        elif head == "accepting:":
            accepting += [(line_no, t) for t in rest]
        elif head == "order:":
            if len(rest) != 3 or rest[1] != "<=":
                raise CtsSyntaxError(line_no, "expected 'order: <id> <= <id>'")
            order_lines.append((line_no, rest[0], rest[2]))
        elif head == "trans:":
            if len(rest) != 4:
                raise CtsSyntaxError(
                    line_no, "expected 'trans: <state> <action> <condition> <state>'"
                )
            trans_lines.append((line_no, tuple(rest)))
        else:
            raise CtsSyntaxError(line_no, f"unknown directive {head!r}")

    for section, found in (
        ("conditions", conditions),
        ("alphabet", alphabet),
        ("states", states),
    ):
        if not found:
            raise CtsSyntaxError(0, f"missing '{section}:' line")

    cond_set = FinSet(conditions)
    pairs: list[tuple[str, str]] = []
    for line_no, low, high in order_lines:
        for k in (low, high):
            if k not in conditions:
                raise DanglingReference(f"line {line_no}: unknown condition {k!r}")
        pairs.append((low, high))
        try:
            closure(cond_set, pairs)
        except AntisymmetryViolation as exc:
            raise AntisymmetryViolation(f"line {line_no}: {exc}") from None

    for line_no, s in accepting:
        if s not in states:
            raise DanglingReference(f"line {line_no}: unknown accepting state {s!r}")
    transitions = []
    for line_no, (x, a, k, y) in trans_lines:
        for s in (x, y):
            if s not in states:
                raise DanglingReference(f"line {line_no}: unknown state {s!r}")
        if a not in alphabet:
            raise DanglingReference(f"line {line_no}: unknown action {a!r}")
        if k not in conditions:
            raise DanglingReference(f"line {line_no}: unknown condition {k!r}")
        transitions.append((x, a, k, y))

    cts = CTS(
        closure(cond_set, pairs),
        FinSet(alphabet),
        FinSet(states),
        transitions,
        frozenset(s for _, s in accepting),
    )
    return CtsDocument(raw=text, cts=cts)


def _covers(poset) -> list[tuple]:
    out = []
    elements = poset.elements
    for a in elements:
        for b in elements:
            if a == b or not poset.leq(a, b):
                continue
            if any(c not in (a, b) and poset.leq(a, c) and poset.leq(c, b) for c in elements):
                continue
            out.append((a, b))
    return sorted(out)


def print_cts(cts: CTS) -> str:
    """Canonical document: sorted names, covering order pairs only."""
    lines = ["conditions: " + " ".join(sorted(cts.conditions.elements))]
    lines += [f"order: {a} <= {b}" for a, b in _covers(cts.conditions)]
    lines.append("alphabet: " + " ".join(sorted(cts.alphabet)))
    lines.append("states: " + " ".join(sorted(cts.states)))
    lines.append(("accepting: " + " ".join(sorted(cts.accepting))).rstrip())
    lines += [f"trans: {x} {a} {k} {y}" for x, a, k, y in sorted(cts.transitions)]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# report plumbing


def format_word(word) -> str:
    return "".join(word) if word else "eps"


def format_observation(obs) -> str:
    if obs == ACCEPT:
        return "accept"
    return "{" + ",".join(sorted(obs)) + "}"


def _witness_json(condition, word, obs) -> dict:
    return {
        "condition": condition,
        "word": format_word(word),
        "observation": format_observation(obs),
    }


def _witness_line(condition, word, obs) -> str:
    return f"{condition} : {format_word(word)} / {format_observation(obs)}"


def _digest(data: str) -> str:
    return hashlib.sha256(data.encode("utf-8")).hexdigest()


def _envelope(command, digest, verdict, *, witnesses=(), laws=(), depth=None,
              stabilized=None) -> dict:
    return {
        "command": command,
        "input_digest": digest,
        "verdict": verdict,
        "witnesses": list(witnesses),
        "laws": list(laws),
        "depth": depth,
        "stabilized": stabilized,
    }


def _law_rows(reports) -> list[dict]:
    rows = []
    for report in reports:
        for check in report.checks:
            row = {"name": f"{report.title} :: {check.name}", "status": check.status}
            if check.counterexample is not None:
                row["counterexample"] = str(check.counterexample)
            rows.append(row)
    return rows


def _emit(json_mode: bool, payload: dict, lines: list[str]) -> None:
    if json_mode:
        sys.stdout.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    else:
        sys.stdout.write("\n".join(lines) + "\n")


def _read_document(path: str) -> CtsDocument:
    if path == "-":
        return parse_cts(sys.stdin.read())
    with open(path, encoding="utf-8") as handle:
        return parse_cts(handle.read())


_MODES = {"lang": "acceptance", "ready": "ready", "fail": "failure"}


def _mode_from_flags(args) -> ObservationMode:
    return ObservationMode(_MODES[args.mode], args.upgrades)


def _default_depth(cts: CTS) -> int:
    return len(cts.states) * len(cts.conditions) + 1


def _yn(flag) -> str:
    return "unknown" if flag is None else ("yes" if flag else "no")


# ---------------------------------------------------------------------------
# commands


def _cmd_validate(args) -> int:
    doc = _read_document(args.file)
    missing = validate(doc.cts)
    verdict = "valid" if not missing else "invalid"
    witnesses = [
        {"condition": k, "word": a, "observation": f"{x} -> {y}"}
        for x, a, k, y in missing
    ]
    lines = [verdict] + [f"missing transition: {x} {a} {k} {y}" for x, a, k, y in missing]
    _emit(args.json, _envelope("validate", _digest(doc.raw), verdict, witnesses=witnesses), lines)
    return 0 if not missing else 1


def _cmd_complete(args) -> int:
    doc = _read_document(args.file)
    completed = complete(doc.cts)
    if args.json:
        added = canon_sorted(completed.transitions - doc.cts.transitions)
        witnesses = [
            {"condition": k, "word": a, "observation": f"{x} -> {y}"}
            for x, a, k, y in added
        ]
        _emit(True, _envelope("complete", _digest(doc.raw), "ok", witnesses=witnesses), [])
    else:
        sys.stdout.write(print_cts(completed))
    return 0


def _cmd_semantics(args) -> int:
    mode = _mode_from_flags(args)
    doc = _read_document(args.file)
    cts = doc.cts
    if args.state not in cts.states:
        raise UnknownState(f"unknown state {args.state!r}")
    if args.condition not in cts.conditions:
        raise UnknownCondition(f"unknown condition {args.condition!r}")
    depth = args.depth if args.depth is not None else _default_depth(cts)
    if depth < 0:
        raise KltraceError("--depth must be nonnegative")

    if args.method == "fixpoint":
        behaviour = fixpoint_traces(build_alpha(cts, mode), depth)
        entries = behaviour.cell(args.condition, args.state)
        stabilized = behaviour.stabilized
    else:
        entries = (
            closed_form_cell(cts, mode, args.state, args.condition, depth - 1)
            if depth
            else frozenset()
        )
        stabilized = None

    rows = sorted(
        entries,
        key=lambda e: (e[0], len(e[1][0]), e[1][0], format_observation(e[1][1])),
    )
    head = (
        f"semantics of {args.state} at {args.condition} "
        f"(mode={args.mode}, upgrades={'yes' if args.upgrades else 'no'}, "
        f"depth={depth}, method={args.method})"
    )
    lines = [head, f"stabilized: {_yn(stabilized)}"]
    lines += ["  " + _witness_line(k, word, obs) for k, (word, obs) in rows]
    payload = _envelope(
        "semantics",
        _digest(doc.raw),
        "ok",
        witnesses=[_witness_json(k, word, obs) for k, (word, obs) in rows],
        depth=depth,
        stabilized=stabilized,
    )
    _emit(args.json, payload, lines)
    return 0


def _cmd_equiv(args) -> int:
    mode = _mode_from_flags(args)
    doc = _read_document(args.file)
    cts = doc.cts
    first, second = args.pair
    for s in (first, second):
        if s not in cts.states:
            raise UnknownState(f"unknown state {s!r}")
    if args.condition is not None and args.condition not in cts.conditions:
        raise UnknownCondition(f"unknown condition {args.condition!r}")

    equivalent, witness = behaviour_equiv(cts, mode, first, second, args.condition)
    digest = _digest(doc.raw)
    if equivalent:
        _emit(args.json, _envelope("equiv", digest, "equivalent"), ["equivalent"])
        return 0
    k, word, obs = witness
    payload = _envelope(
        "equiv", digest, "inequivalent", witnesses=[_witness_json(k, word, obs)]
    )
    _emit(args.json, payload, ["inequivalent", "witness: " + _witness_line(k, word, obs)])
    return 1


def _cmd_coincide(args) -> int:
    mode = _mode_from_flags(args)
    doc = _read_document(args.file)
    depth = args.depth if args.depth is not None else _default_depth(doc.cts)
    if depth < 0:
        raise KltraceError("--depth must be nonnegative")
    report = coincidence_check(doc.cts, mode, depth)
    verdict = "pass" if report.ok else "fail"
    payload = _envelope(
        "coincide", _digest(doc.raw), verdict, laws=_law_rows([report]), depth=depth
    )
    _emit(args.json, payload, [report.render()])
    return 0 if report.ok else 1


def _cmd_laws(args) -> int:
    reports = _SUITES[args.suite](args.size_bound, args.seed)
    digest = _digest(f"suite={args.suite} size-bound={args.size_bound} seed={args.seed}")
    ok = all(report.ok for report in reports)
    payload = _envelope("laws", digest, "pass" if ok else "fail", laws=_law_rows(reports))
    _emit(args.json, payload, [report.render() for report in reports])
    return 0 if ok else 1


def _cmd_dlaw_show(args) -> int:
    if args.json:
        sys.stderr.write("error: dlaw-show prints a table, not the report envelope\n")
        return 2
    if args.carrier_size < 1:
        raise KltraceError("--carrier-size must be positive")
    alphabet = FinSet(["a"])
    obs = discrete(["o"])
    lines = []
    for backend in ("set", "pos"):
        monad = monad_for(backend)
        atoms = [f"x{i}" for i in range(args.carrier_size)]
        carrier = discrete(atoms) if backend == "set" else chain(atoms)
        shape = "discrete" if backend == "set" else "chain"
        for lifting in (letter_lifting(alphabet), machine_lifting(alphabet, obs)):
            arrow = build_dlaw(lifting, monad, carrier)
            lines.append(
                f"theta[{lifting.name}] over {backend} on the {shape} carrier "
                "{" + ", ".join(atoms) + "}"
            )
            lines += [
                f"  {fmt_element(e)} -> {fmt_element(arrow.table[e])}"
                for e in canon_sorted(arrow.dom)
            ]
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


# ---------------------------------------------------------------------------
# law suites


def _suite_monads(size_bound: int, seed: int) -> list[LawReport]:
    del seed  # exhaustive, nothing to sample
    bound = max(1, min(size_bound, 4))
    reports = []
    for n in range(1, bound + 1):
        reports.append(check_monad_laws(monad_for("set"), discrete([f"x{i}" for i in range(n)])))
    for n in range(1, bound + 1):
        for poset in posets_on([f"x{i}" for i in range(n)]):
            reports.append(check_monad_laws(monad_for("pos"), poset))
    return reports


def _suite_kleisli(size_bound: int, seed: int) -> list[LawReport]:
    del seed
    bound = max(1, min(size_bound, 3))
    conds = [discrete(["k0", "k1"]), chain(["k0", "k1"])]
    reports = []
    for backend in ("set", "pos"):
        objects = [discrete([f"u{i}" for i in range(n)]) for n in range(1, bound + 1)]
        if backend == "pos" and bound >= 2:
            objects.append(chain(["u0", "u1"]))
        reports.append(check_kleisli_laws(PlainKl(backend), objects))
        for cond in conds:
            reports.append(check_kleisli_laws(RelKl(backend, cond), objects))
        reports.append(
            check_lifting_theorems(
                backend, chain(["k0", "k1"]), FinSet(["a"]), discrete(["o"]), objects[:2]
            )
        )
    return reports


def _beck_chevalley_report(backend: str, carriers, liftings) -> LawReport:
    report = LawReport(f"change of base at substitution squares ({backend})")
    n, bad = 0, None
    for lifting in liftings:
        functor = lifting.functor
        for dom in carriers:
            for cod in carriers:
                if backend == "pos":
                    maps = monotone_maps(dom, cod)
                else:
                    maps = all_maps(dom.carrier, cod.carrier)
                for mapping in maps:
                    for other in carriers:
                        square = lambda_square(functor, mapping, dom, cod, other)
                        n += 1
                        if not (is_weak_pullback(square)
                                and check_beck_chevalley(square, backend, budget=256).ok):
                            bad = bad or f"{functor.name} along {mapping!r}"
    report.record("substitution squares are weak pullbacks satisfying change of base",
                  bad is None, n, bad)
    if backend == "set":
        refuted = check_beck_chevalley(non_pullback_square(), "set")
        witness = refuted.failures()[0].counterexample if refuted.failures() else None
        report.record(
            "non-pullback square is refuted",
            not refuted.ok,
            1,
            "change of base held unexpectedly",
            note=f"witness: {witness}" if witness else "",
        )
    return report


def _suite_dlaw(size_bound: int, seed: int) -> list[LawReport]:
    del seed
    bound = max(1, min(size_bound, 3))
    alphabet = FinSet(["a", "b"])
    obs = discrete(["o"])
    liftings = (letter_lifting(alphabet), machine_lifting(alphabet, obs))
    reports = []
    for backend in ("set", "pos"):
        monad = monad_for(backend)
        if backend == "set":
            carriers = [discrete([f"x{i}" for i in range(n)]) for n in range(1, bound + 1)]
        else:
            carriers = [
                poset
                for n in range(1, bound + 1)
                for poset in posets_on([f"x{i}" for i in range(n)])
            ]
        # relation pairs grow doubly exponentially in carrier size, so the
        # composition-heavy checks stay on the two-element universe
        small = [c for c in carriers if len(c) <= 2]
        for lifting in liftings:
            reports.append(validate_lifting(lifting, carriers, backend))
            reports.append(check_kl_law(lifting, monad, carriers))
            reports.append(check_lifting_preserves(lifting, small, backend))
        reports.append(check_fabric(backend, small))
        reports.append(_beck_chevalley_report(backend, small, liftings))
    return reports


def _suite_quantale(size_bound: int, seed: int) -> list[LawReport]:
    atoms = [f"v{i}" for i in range(max(2, min(size_bound, 4)))]
    carrier = FinSet(atoms)
    probes = probe_family(carrier, 12, seed)
    identity = {a: a for a in atoms}
    rotate = {a: b for a, b in zip(atoms, atoms[1:] + atoms[:1])}
    fold = {a: atoms[i % 2] for i, a in enumerate(atoms)}
    maps = [(identity, carrier), (rotate, carrier), (fold, FinSet(atoms[:2]))]
    return [check_quantale_laws(carrier, probes, maps, seed=seed)]


_SUITES = {
    "monads": _suite_monads,
    "kleisli": _suite_kleisli,
    "dlaw": _suite_dlaw,
    "quantale": _suite_quantale,
}


# ---------------------------------------------------------------------------
# argument plumbing


def _mode_flags(parser) -> None:
    parser.add_argument("--mode", choices=("lang", "ready", "fail"), required=True,
                        help="observation decoration")
    parser.add_argument("--upgrades", action="store_true",
                        help="allow steps to strengthen the active condition")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kltrace",
        description="Decorated-trace semantics of conditional transition systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text, with_file=True):
        p = sub.add_parser(name, help=help_text)
        if with_file:
            p.add_argument("file", help="system description file, or - for standard input")
        p.add_argument("--json", action="store_true",
                       help="emit the machine-readable report")
        return p

    p = add("validate", "list every missing guard weakening")
    p.set_defaults(handler=_cmd_validate)

    p = add("complete", "print the guard-weakening closure of the input")
    p.set_defaults(handler=_cmd_complete)

    p = add("semantics", "decorated traces of one state at one condition")
    _mode_flags(p)
    p.add_argument("--state", required=True)
    p.add_argument("--condition", required=True)
    p.add_argument("--depth", type=int, default=None,
                   help="iteration depth; default |states| * |conditions| + 1")
    p.add_argument("--method", choices=("fixpoint", "direct"), default="fixpoint")
    p.set_defaults(handler=_cmd_semantics)

    p = add("equiv", "decide behavioural equivalence of two states")
    _mode_flags(p)
    p.add_argument("--pair", nargs=2, required=True, metavar=("FIRST", "SECOND"))
    p.add_argument("--condition", default=None,
                   help="restrict to the downward closure of this condition")
    p.set_defaults(handler=_cmd_equiv)

    p = add("coincide", "compare fixpoint iterates with the reachability semantics")
    _mode_flags(p)
    p.add_argument("--depth", type=int, default=None)
    p.set_defaults(handler=_cmd_coincide)

    p = add("laws", "run a law suite", with_file=False)
    p.add_argument("--suite", choices=sorted(_SUITES), required=True)
    p.add_argument("--size-bound", type=int, default=2, dest="size_bound")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=_cmd_laws)

    p = add("dlaw-show", "print the distributive-law tables on a small carrier",
            with_file=False)
    p.add_argument("--carrier-size", type=int, default=2, dest="carrier_size")
    p.set_defaults(handler=_cmd_dlaw_show)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except KltraceError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
