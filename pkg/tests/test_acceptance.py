"""End-to-end acceptance suite.

Each criterion below is one test, so `pytest -v` prints one pass/fail
line per criterion.  Every test asserts its own wall-clock budget and
prints a `criterion N: PASS` line with the measured details (visible
under `pytest -s`).
"""

import hashlib
import os
import random
import subprocess
import sys
import time
from fractions import Fraction
from pathlib import Path

import pytest

from kltrace.cli import parse_cts
from kltrace.cts import (
    CTS,
    ObservationMode,
    behaviour_equiv,
    build_alpha,
    closed_form_cell,
    coincidence_check,
    fixpoint_traces,
    random_cts,
    refusal_downclosure_witness,
)
from kltrace.dlaw import (
    Relation,
    build_dlaw,
    check_beck_chevalley,
    check_kl_law,
    check_lifting_preserves,
    is_weak_pullback,
    lambda_square,
    letter_functor,
    letter_lifting,
    machine_functor,
    machine_lifting,
    non_pullback_square,
    relation_lift,
)
from kltrace.errors import FailureWithUpgrades
from kltrace.kleisli import PlainKl, RelKl, check_kleisli_laws, check_lifting_theorems
from kltrace.monads import check_monad_laws, monad_for
from kltrace.orders import (
    FinSet,
    all_maps,
    chain,
    discrete,
    inl,
    monotone_maps,
    posets_on,
)
from kltrace.transport import (
    Dist,
    OmegaPredicate,
    marginals,
    optimal_coupling_value,
    oracle_coupling_value,
    probe_family,
    theta_quantale,
    tv_distance,
    unit_image,
)

ROOT = Path(__file__).resolve().parent.parent
E1 = ROOT / "src" / "kltrace" / "data" / "e1.cts"
E2 = ROOT / "src" / "kltrace" / "data" / "e2.cts"

AB = FinSet(["a", "b"])
OBS = FinSet(["o"])

MODES = [
    ObservationMode("acceptance"),
    ObservationMode("ready"),
    ObservationMode("failure"),
    ObservationMode("acceptance", upgrades=True),
    ObservationMode("ready", upgrades=True),
]

# knobs of the seeded semantics campaign shared by criteria 7 and 9; the
# feasibility filter below depends only on automaton sizes, never on the
# equivalence verdict, so skipping cannot bias the campaign
CAMPAIGN_SEED = 20260814
CAMPAIGN_SIZE = 200
PAIRS_PER_INSTANCE = 2
DET_CAP = 200
DEPTH_CAP = 40
WALK_BUDGET = 4000


def finish(criterion: int, started: float, bound: float, detail: str):
    elapsed = time.perf_counter() - started
    assert elapsed < bound, (
        f"criterion {criterion} took {elapsed:.1f}s, budget {bound:.0f}s")
    print(f"criterion {criterion}: PASS ({elapsed:.1f}s; {detail})")


def example_carriers(backend: str, max_size: int):
    atoms = [f"x{i}" for i in range(max_size)]
    if backend == "set":
        return [discrete(atoms[:n]) for n in range(1, max_size + 1)]
    return [p for n in range(1, max_size + 1) for p in posets_on(atoms[:n])]


# criterion 1: both monads satisfy the monad laws on every small carrier


def test_criterion_01_monad_laws():
    started = time.perf_counter()
    reports = 0
    for backend in ("set", "pos"):
        for carrier in example_carriers(backend, 4):
            report = check_monad_laws(monad_for(backend), carrier)
            assert report.ok, report.render()
            reports += 1
    finish(1, started, 5, f"{reports} carriers")


# criterion 2: Kleisli categories are complete-partial-order enriched


def test_criterion_02_kleisli_and_enrichment_laws():
    started = time.perf_counter()
    reports = 0
    for backend in ("set", "pos"):
        objects = [discrete(["u0", "u1"])]
        if backend == "pos":
            objects.append(chain(["u0", "u1"]))
        report = check_kleisli_laws(PlainKl(backend), objects)
        assert report.ok, report.render()
        reports += 1
        for cond in (discrete(["k0"]), discrete(["k0", "k1"]), chain(["k0", "k1"])):
            report = check_kleisli_laws(RelKl(backend, cond), objects)
            assert report.ok, report.render()
            reports += 1
    finish(2, started, 30, f"{reports} categories")


# criterion 3: the machine liftings are functorial, natural and continuous


def test_criterion_03_lifting_theorems():
    started = time.perf_counter()
    reports = 0
    for backend in ("set", "pos"):
        for cond in (discrete(["k0", "k1"]), chain(["k0", "k1"])):
            for n_letters in (1, 2):
                alphabet = FinSet([f"a{i}" for i in range(n_letters)])
                for obs in (discrete(["o0"]), discrete(["o0", "o1"]),
                            chain(["o0", "o1"])):
                    carriers = [discrete(["u0"]), discrete(["u0", "u1"])]
                    if backend == "pos":
                        carriers.append(chain(["u0", "u1"]))
                    report = check_lifting_theorems(
                        backend, cond, alphabet, obs, carriers)
                    assert report.ok, report.render()
                    reports += 1
    finish(3, started, 60, f"{reports} shape combinations")


# criterion 4: the induced laws match their closed forms and obey the
# unit, multiplication and naturality equations


def test_criterion_04_distributive_law_closed_forms():
    started = time.perf_counter()
    arrows = 0
    for backend in ("set", "pos"):
        monad = monad_for(backend)
        carriers = example_carriers(backend, 3)
        for x in carriers:
            law = build_dlaw(letter_lifting(AB), monad, x)
            for (a, u), out in law.table.items():
                assert out == frozenset((a, v) for v in u)
            arrows += 1
            law = build_dlaw(machine_lifting(AB, OBS), monad, x)
            cod = machine_functor(AB, OBS).on_obj(x)
            for key, out in law.table.items():
                if key.side == 0:
                    a, u = key.value
                    assert out == frozenset(inl((a, v)) for v in u)
                else:
                    assert out == monad.unit(cod, key)
            arrows += 1
        for lifting in (letter_lifting(AB), machine_lifting(AB, OBS)):
            report = check_kl_law(lifting, monad, carriers)
            assert report.ok, report.render()
    finish(4, started, 60, f"{arrows} law components against closed forms")


# criterion 5: the relation liftings preserve graph structure, and a
# corrupted lifting is caught by both check layers


def test_criterion_05_lifting_preservation_and_mutation():
    started = time.perf_counter()
    for backend in ("set", "pos"):
        monad = monad_for(backend)
        carriers = [discrete(["x0"]), discrete(["x0", "x1"])]
        if backend == "pos":
            carriers.append(chain(["x0", "x1"]))
        lifting = machine_lifting(AB, OBS)
        for shipped in (letter_lifting(AB), lifting):
            report = check_lifting_preserves(shipped, carriers, backend)
            assert report.ok, report.render()

        def corrupted(rel):
            # forget every observation pair of the machine lifting
            full = relation_lift(lifting, rel)
            pairs = frozenset(
                p for p in full.pairs
                if not (getattr(p[0], "side", None) == 1
                        and getattr(p[1], "side", None) == 1))
            return Relation(full.backend, full.left, full.right, pairs,
                            check=False)

        broken_kl = check_kl_law(lifting, monad, carriers, rlift=corrupted)
        broken_preserves = check_lifting_preserves(
            lifting, carriers, backend, rlift=corrupted)
        assert not broken_kl.ok
        assert not broken_preserves.ok
    finish(5, started, 60, "mutation flipped both check layers on both backends")


# criterion 6: every substitution square of the relation fibres is a weak
# pullback and satisfies the exchange law; a non-pullback square is refuted


def test_criterion_06_beck_chevalley_sweep():
    started = time.perf_counter()
    squares = 0
    for backend in ("set", "pos"):
        carriers = example_carriers(backend, 3)
        for functor in (letter_functor(AB), machine_functor(AB, OBS)):
            for dom in carriers:
                for cod in carriers:
                    maps = (monotone_maps(dom, cod) if backend == "pos"
                            else all_maps(dom.carrier, cod.carrier))
                    for f in maps:
                        for other in carriers:
                            square = lambda_square(functor, f, dom, cod, other)
                            assert is_weak_pullback(square)
                            report = check_beck_chevalley(
                                square, backend, budget=256)
                            assert report.ok, report.render()
                            squares += 1
    assert squares == 7952
    bad = non_pullback_square()
    assert not is_weak_pullback(bad)
    refuted = check_beck_chevalley(bad, "set")
    assert not refuted.ok
    witness = refuted.failures()[0].counterexample
    assert witness == "P={c}: {a,b} vs {a}"
    finish(6, started, 10, f"{squares} squares; refutation witness {witness}")


# the seeded campaign shared by criteria 7 and 9


def _slice_step(cts: CTS, k) -> dict:
    step = {}
    for x, a, k2, y in cts.transitions:
        if k2 == k:
            step.setdefault((x, a), set()).add(y)
    return step


def _product_reach(cts: CTS, x, y, k, cap: int):
    """Product subset-construction state count, or None past the cap."""
    step = _slice_step(cts, k)
    start = (frozenset([x]), frozenset([y]))
    seen = {start}
    queue = [start]
    while queue:
        sa, sb = queue.pop()
        for a in cts.alphabet:
            nxt = (frozenset().union(*(step.get((s, a), set()) for s in sa)),
                   frozenset().union(*(step.get((s, a), set()) for s in sb)))
            if nxt not in seen:
                if len(seen) >= cap:
                    return None
                seen.add(nxt)
                queue.append(nxt)
    return len(seen)


def _frontier_cost(cts: CTS, x, k, depth: int, budget: int):
    """Distinct (word, endpoint set) nodes a direct walk visits, or None."""
    step = _slice_step(cts, k)
    frontier = {(): frozenset([x])}
    total = 0
    for _ in range(depth + 1):
        total += len(frontier)
        if total > budget:
            return None
        grown = {}
        for word, states in frontier.items():
            for a in cts.alphabet:
                nxt = frozenset().union(*(step.get((s, a), set()) for s in states))
                if nxt:
                    grown[word + (a,)] = nxt
        frontier = grown
        if not frontier:
            break
    return total


def _pair_depth(cts: CTS, x, y):
    """Truncation depth that decides equivalence of the pair, or None
    when the exhaustive walk would leave the campaign budgets.  Any
    distinguishing word has a shortest representative that never repeats
    a product state, so the product reach bounds the depth needed."""
    worst = 0
    for k in cts.conditions:
        n = _product_reach(cts, x, y, k, DET_CAP)
        if n is None:
            return None
        worst = max(worst, 2 * n + 1)
    if worst > DEPTH_CAP:
        return None
    for k in cts.conditions:
        for s in (x, y):
            if _frontier_cost(cts, s, k, worst, WALK_BUDGET) is None:
                return None
    return worst


@pytest.fixture(scope="module")
def campaign():
    rng = random.Random(CAMPAIGN_SEED)
    kept, skipped = [], 0
    while len(kept) < CAMPAIGN_SIZE:
        cts = random_cts(rng)
        pairs = []
        for _ in range(PAIRS_PER_INSTANCE):
            x = rng.choice(cts.states.elements)
            y = rng.choice(cts.states.elements)
            depth = _pair_depth(cts, x, y)
            if depth is None:
                pairs = None
                break
            pairs.append((x, y, depth))
        if pairs is None:
            skipped += 1
        else:
            kept.append((cts, pairs))
    assert skipped <= CAMPAIGN_SIZE // 10
    return kept


# criterion 7: both semantics routes agree, on the worked examples at
# every depth and on the whole seeded campaign at the stabilizing depth


def test_criterion_07_route_coincidence(campaign):
    started = time.perf_counter()
    examples = [
        (parse_cts(E1.read_text()).cts,
         [ObservationMode(kind) for kind in ("acceptance", "ready", "failure")]),
        (parse_cts(E2.read_text()).cts,
         [ObservationMode(kind, upgrades=True) for kind in ("acceptance", "ready")]),
    ]
    for cts, modes in examples:
        for mode in modes:
            alpha = build_alpha(cts, mode)
            for depth in range(7):
                behaviour = fixpoint_traces(alpha, depth)
                for k in cts.conditions:
                    for x in cts.states:
                        expected = (
                            closed_form_cell(cts, mode, x, k, depth - 1)
                            if depth else frozenset())
                        assert behaviour.cell(k, x) == expected
    reports = 0
    for cts, _ in campaign:
        for mode in MODES:
            report = coincidence_check(cts, mode)
            assert report.ok, report.render()
            reports += 1
    finish(7, started, 120,
           f"examples exact to depth 6; {reports} seeded coincidence reports")


# criterion 8: refusal sets are the obstruction to upgrades


def test_criterion_08_refusal_obstruction():
    started = time.perf_counter()
    cts = parse_cts(E2.read_text()).cts
    witness = refusal_downclosure_witness(cts)
    assert witness == ("k1", "x", "k2", frozenset({"a"}))
    with pytest.raises(FailureWithUpgrades):
        ObservationMode("failure", upgrades=True)
    rng = random.Random(8)
    for _ in range(50):
        seeded = random_cts(rng)
        flat = CTS(discrete(seeded.conditions.carrier), seeded.alphabet,
                   seeded.states, seeded.transitions, seeded.accepting)
        assert refusal_downclosure_witness(flat) is None
    finish(8, started, 1, "witness found, mode rejected, discrete systems clean")


# criterion 9: the exact equivalence decision agrees with a truncation
# oracle on the criterion 7 campaign, and every witness is confirmed


def test_criterion_09_equivalence_against_truncation_oracle(campaign):
    started = time.perf_counter()
    checks = inequivalent = 0
    for cts, pairs in campaign:
        for x, y, depth in pairs:
            for mode in MODES:
                got, witness = behaviour_equiv(cts, mode, x, y)
                expected = all(
                    closed_form_cell(cts, mode, x, k, depth)
                    == closed_form_cell(cts, mode, y, k, depth)
                    for k in cts.conditions)
                assert got == expected
                checks += 1
                if got:
                    assert witness is None
                    continue
                inequivalent += 1
                k, word, obs = witness
                trace = (k, (word, obs))
                in_first = trace in closed_form_cell(cts, mode, x, k, len(word))
                in_second = trace in closed_form_cell(cts, mode, y, k, len(word))
                assert in_first != in_second
    assert checks == CAMPAIGN_SIZE * PAIRS_PER_INSTANCE * len(MODES)
    assert 0 < inequivalent < checks
    finish(9, started, 120,
           f"{checks} verdicts, {inequivalent} witnesses confirmed")


# criterion 10: the exact transportation solver agrees with the vertex
# enumeration oracle, with exact marginals and unit transport probes


def test_criterion_10_transport_solver_against_vertex_oracle():
    started = time.perf_counter()

    def seeded_dist(rng, keys):
        weights = [rng.randint(0, 6) for _ in keys]
        if sum(weights) == 0:
            weights[0] = 1
        total = sum(weights)
        return Dist([(k, Fraction(w, total)) for k, w in zip(keys, weights)])

    rng = random.Random(13)
    for instance in range(100):
        atoms = [f"v{j}" for j in range(rng.randint(1, 3))]
        carrier = FinSet(atoms)
        preds = [OmegaPredicate(
            carrier, {x: Fraction(rng.randint(0, 8), 8) for x in carrier})
            for _ in range(rng.randint(1, 3))]
        source = seeded_dist(rng, preds)
        target = seeded_dist(rng, atoms)
        value, coupling = optimal_coupling_value(source, target)
        assert value == oracle_coupling_value(source, target)
        left, right = marginals(coupling)
        assert left == source and right == target
        mu = seeded_dist(rng, atoms)
        lifted = theta_quantale(unit_image(carrier, mu))
        probes = probe_family(carrier, 20, seed=instance)
        assert len(probes) >= 20
        for nu in probes:
            assert lifted(nu) == tv_distance(mu, nu)
    finish(10, started, 60, "100 instances, 20 unit probes each, all exact")


# criterion 11: the command line output is byte deterministic


def test_criterion_11_cli_byte_determinism():
    started = time.perf_counter()
    commands = [
        ["semantics", str(E2), "--mode", "ready", "--upgrades",
         "--state", "x", "--condition", "k1", "--json"],
        ["equiv", str(E1), "--mode", "lang", "--pair", "x", "z", "--json"],
        ["laws", "--suite", "quantale", "--json"],
        ["dlaw-show", "--carrier-size", "2"],
        ["coincide", str(E2), "--mode", "lang", "--upgrades", "--json"],
    ]
    for args in commands:
        digests = set()
        for run_no in (1, 2, 3):
            env = dict(os.environ, PYTHONHASHSEED=str(run_no))
            proc = subprocess.run(
                [sys.executable, "-m", "kltrace.cli", *args],
                capture_output=True, env=env, cwd=ROOT)
            digests.add(hashlib.sha256(proc.stdout).hexdigest())
        assert len(digests) == 1, f"output varies across runs: {args}"
    finish(11, started, 10, f"{len(commands)} commands, 3 runs each")
