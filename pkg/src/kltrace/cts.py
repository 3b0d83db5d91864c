"""Conditional transition systems and their decorated-trace semantics.

A conditional transition system guards each transition with a condition
from a finite poset; a transition available at k must be available at
every smaller condition (validated, or restorable with complete).  With
upgrades the system may also move to a smaller condition at run time.

Semantics are computed two independent ways: directly, by walking the
per-condition slice automata, and coinductively, by iterating the trace
unfolding from the empty behaviour inside the appropriate Kleisli
category (plain subsets without upgrades, condition-downward-closed
subsets with upgrades).  coincidence_check asserts the two agree cell
by cell.

Observation parts are subset-closed: a ready or refusal observation is
any subset of the enabled (resp. disabled) actions, and with upgrades
an acceptance mark is recorded at every condition below the current
one.  Refusal sets are not downward closed along conditions, which is
exactly why the failure mode rejects upgrades; the witness finder
exhibits the offending pattern.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .errors import (
    DanglingReference,
    FailureWithUpgrades,
    UnknownCondition,
    UnknownState,
)
from .kleisli import RelKlArrow, observation_shape
from .orders import (
    FinPoset,
    FinSet,
    In,
    canon_key,
    canon_sorted,
    chain,
    discrete,
    inl,
    inr,
    posets_on,
    subsets,
)
from .report import LawReport

ACCEPT = "*"


class CTS:
    """States, alphabet, condition poset, guarded transitions, accepting set."""

    __slots__ = ("conditions", "alphabet", "states", "transitions", "accepting")

    def __init__(self, conditions: FinPoset, alphabet: FinSet, states: FinSet,
                 transitions, accepting):
        transitions = frozenset(transitions)
        accepting = frozenset(accepting)
        for x, a, k, y in transitions:
            if x not in states.members or y not in states.members:
                raise DanglingReference(f"unknown state in ({x}, {a}, {k}, {y})")
            if a not in alphabet.members:
                raise DanglingReference(f"unknown action in ({x}, {a}, {k}, {y})")
            if k not in conditions.carrier.members:
                raise DanglingReference(f"unknown condition in ({x}, {a}, {k}, {y})")
        if not accepting <= states.members:
            raise DanglingReference("accepting set leaves the state space")
        for name, value in (("conditions", conditions), ("alphabet", alphabet),
                            ("states", states), ("transitions", transitions),
                            ("accepting", accepting)):
            object.__setattr__(self, name, value)

    def __setattr__(self, name, value):
        raise AttributeError("CTS is immutable")

    def __eq__(self, other):
        return isinstance(other, CTS) and \
            self.conditions == other.conditions and self.alphabet == other.alphabet \
            and self.states == other.states and self.transitions == other.transitions \
            and self.accepting == other.accepting

    def __hash__(self):
        return hash((CTS, self.conditions, self.alphabet, self.states,
                     self.transitions, self.accepting))


def validate(cts: CTS) -> list:
    """Every guard-weakening instance the transition set is missing."""
    missing = []
    for x, a, k, y in cts.transitions:
        for k2 in cts.conditions.down_set(k):
            if (x, a, k2, y) not in cts.transitions:
                missing.append((x, a, k2, y))
    return canon_sorted(missing)


def complete(cts: CTS) -> CTS:
    """Close the transition set under guard weakening."""
    extra = {(x, a, k2, y) for x, a, k, y in cts.transitions
             for k2 in cts.conditions.down_set(k)}
    return CTS(cts.conditions, cts.alphabet, cts.states,
               cts.transitions | extra, cts.accepting)


@dataclass(frozen=True)
class ObservationMode:
    """What a finished run reports, and whether upgrades are allowed."""

    kind: str
    upgrades: bool = False

    def __post_init__(self):
        if self.kind not in ("acceptance", "ready", "failure"):
            raise ValueError(f"unknown observation kind {self.kind!r}")
        if self.kind == "failure" and self.upgrades:
            raise FailureWithUpgrades(
                "refusal sets are not downward closed along conditions; "
                "see refusal_downclosure_witness for a concrete violation"
            )

    @property
    def backend(self) -> str:
        return "pos" if self.upgrades else "set"


def _check_state(cts: CTS, x):
    if x not in cts.states.members:
        raise UnknownState(repr(x))


def _check_condition(cts: CTS, k):
    if k not in cts.conditions.carrier.members:
        raise UnknownCondition(repr(k))


def ready_set(cts: CTS, x, k) -> frozenset:
    """Actions enabled at a state under one condition."""
    _check_state(cts, x)
    _check_condition(cts, k)
    return frozenset(a for x2, a, k2, _ in cts.transitions if x2 == x and k2 == k)


def _observations(cts: CTS, mode: ObservationMode, x, k) -> frozenset:
    """Subset-closed observation family of one state at one condition."""
    if mode.kind == "acceptance":
        return frozenset([ACCEPT]) if x in cts.accepting else frozenset()
    ready = ready_set(cts, x, k)
    if mode.kind == "ready":
        return frozenset(subsets(ready))
    return frozenset(subsets(cts.alphabet.members - ready))


def build_alpha(cts: CTS, mode: ObservationMode) -> RelKlArrow:
    """The one-step behaviour table: successor steps, plus the current
    observations; with upgrades both parts range over smaller conditions."""
    backend = mode.backend
    states = discrete(cts.states)
    shape = observation_shape(cts.alphabet, mode.kind, backend)
    table = {}
    for k in cts.conditions:
        reachable = cts.conditions.down_set(k) if mode.upgrades else frozenset([k])
        for x in cts.states:
            cell = set()
            for x2, a, k2, y in cts.transitions:
                if x2 == x and k2 in reachable:
                    cell.add((k2, inl((a, y))))
            for k2 in reachable:
                for o in _observations(cts, mode, x, k2):
                    cell.add((k2, inr(o)))
            table[(k, x)] = frozenset(cell)
    return RelKlArrow(backend, cts.conditions, states, shape.carrier(states), table)


# direct reachability semantics


def _slice_step(cts: CTS, k) -> dict:
    """Successor table of the one-condition slice automaton."""
    step = {}
    for x, a, k2, y in cts.transitions:
        if k2 == k:
            step.setdefault((x, a), set()).add(y)
    return {key: frozenset(v) for key, v in step.items()}


def _slice_walk(cts: CTS, x, k, max_len: int):
    """Yields (word, endpoint set) for every trace up to the length bound."""
    _check_state(cts, x)
    _check_condition(cts, k)
    step = _slice_step(cts, k)
    frontier = {(): frozenset([x])}
    for _ in range(max_len + 1):
        for word, states in frontier.items():
            yield word, states
        grown = {}
        for word, states in frontier.items():
            for a in cts.alphabet:
                nxt = frozenset().union(*(step.get((s, a), frozenset())
                                          for s in states))
                if nxt:
                    grown[word + (a,)] = nxt
        frontier = grown
        if not frontier:
            return


def direct_language(cts: CTS, x, k, max_len: int) -> frozenset:
    """Accepted words of the slice automaton, up to the length bound."""
    return frozenset(w for w, states in _slice_walk(cts, x, k, max_len)
                     if states & cts.accepting)


def direct_ready(cts: CTS, x, k, max_len: int) -> frozenset:
    """Pairs (word, enabled subset at some endpoint)."""
    out = set()
    for w, states in _slice_walk(cts, x, k, max_len):
        for s in states:
            for u in subsets(ready_set(cts, s, k)):
                out.add((w, u))
    return frozenset(out)


def direct_failure(cts: CTS, x, k, max_len: int) -> frozenset:
    """Pairs (word, disabled subset at some endpoint)."""
    out = set()
    for w, states in _slice_walk(cts, x, k, max_len):
        for s in states:
            for u in subsets(cts.alphabet.members - ready_set(cts, s, k)):
                out.add((w, u))
    return frozenset(out)


def _direct_cell(cts: CTS, mode: ObservationMode, x, k, max_len: int) -> frozenset:
    if mode.kind == "acceptance":
        return frozenset((w, ACCEPT) for w in direct_language(cts, x, k, max_len))
    if mode.kind == "ready":
        return direct_ready(cts, x, k, max_len)
    return direct_failure(cts, x, k, max_len)


def closed_form_cell(cts: CTS, mode: ObservationMode, x, k, max_len: int) -> frozenset:
    """The theorems' decorated-trace set: the current slice alone, or the
    union of all weaker slices tagged by their condition."""
    if not mode.upgrades:
        return frozenset((k, trace) for trace in _direct_cell(cts, mode, x, k, max_len))
    return frozenset((k2, trace) for k2 in cts.conditions.down_set(k)
                     for trace in _direct_cell(cts, mode, x, k2, max_len))


# coinductive fixpoint semantics


class DecoratedBehaviour:
    """Trace table produced by iterating the unfolding from bottom."""

    __slots__ = ("cells", "stabilized", "iterations")

    def __init__(self, cells: dict, stabilized: bool, iterations: int):
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "stabilized", stabilized)
        object.__setattr__(self, "iterations", iterations)

    def __setattr__(self, name, value):
        raise AttributeError("DecoratedBehaviour is immutable")

    def cell(self, k, x) -> frozenset:
        return self.cells[(k, x)]


def unfold_once(alpha: RelKlArrow, cells: dict) -> dict:
    """One application of the trace unfolding: observations become empty
    decorated traces, steps prepend their letter to the successor's traces."""
    out = {}
    for key, entries in alpha.table.items():
        acc = set()
        for k2, e in entries:
            if e.side == 1:
                acc.add((k2, ((), e.value)))
            else:
                a, x2 = e.value
                for k3, (w, o) in cells[(k2, x2)]:
                    acc.add((k3, ((a,) + w, o)))
        out[key] = frozenset(acc)
    return out


def fixpoint_traces(alpha: RelKlArrow, depth: int) -> DecoratedBehaviour:
    """Iterate the unfolding depth times from the empty behaviour; the
    n-th iterate holds exactly the decorated traces shorter than n.
    Stops early when an iterate repeats; otherwise one probe step past
    the requested depth decides the stabilization flag."""
    cells = {key: frozenset() for key in alpha.table}
    for n in range(depth):
        nxt = unfold_once(alpha, cells)
        if nxt == cells:
            return DecoratedBehaviour(cells, True, n)
        cells = nxt
    return DecoratedBehaviour(cells, unfold_once(alpha, cells) == cells, depth)


def coincidence_check(cts: CTS, mode: ObservationMode, depth: int | None = None) -> LawReport:
    """Fixpoint route against the direct route, cell by cell."""
    if depth is None:
        depth = len(cts.states) * len(cts.conditions.carrier) + 1
    report = LawReport(f"trace semantics coincidence ({mode.kind}"
                       f"{', upgrades' if mode.upgrades else ''}, depth {depth})")
    alpha = build_alpha(cts, mode)
    fixed = fixpoint_traces(alpha, depth)
    n, bad = 0, None
    for k in cts.conditions:
        for x in cts.states:
            n += 1
            expected = closed_form_cell(cts, mode, x, k, depth - 1)
            got = fixed.cell(k, x)
            if got != expected:
                diff = canon_sorted(got ^ expected)[0]
                bad = bad or (f"at ({k}, {x}): trace {diff!r} "
                              f"{'unexpected' if diff in got else 'missing'}")
    note = f"stabilized after {fixed.iterations} steps" if fixed.stabilized else None
    report.record("fixpoint equals direct semantics", bad is None, n, bad, note=note)
    return report


# exact conditional equivalence


def _det_label(cts: CTS, mode: ObservationMode, states: frozenset, k):
    """Canonical observation summary of a determinized state: acceptance
    bit, or the antichain of maximal ready (resp. refusal) sets."""
    if mode.kind == "acceptance":
        return bool(states & cts.accepting)
    if mode.kind == "ready":
        base = {ready_set(cts, s, k) for s in states}
    else:
        base = {cts.alphabet.members - ready_set(cts, s, k) for s in states}
    return frozenset(u for u in base if not any(u < v for v in base))


def _family_gap(label_a, label_b):
    """An observation recorded by the first label but not the second."""
    if isinstance(label_a, bool):
        return ACCEPT if label_a and not label_b else None
    for u in canon_sorted(label_a):
        if not any(u <= v for v in label_b):
            return u
    return None


def behaviour_equiv(cts: CTS, mode: ObservationMode, x, y,
                    at_condition=None) -> tuple[bool, tuple | None]:
    """Exact decision by labelled product search over the determinized
    slice automata of every relevant condition.  The witness is the
    shortest decorated trace held by the first state and not the second
    (found per condition in canonical order); if the gap only runs the
    other way, the shortest such trace of the second state."""
    _check_state(cts, x)
    _check_state(cts, y)
    if at_condition is not None:
        _check_condition(cts, at_condition)
        relevant = canon_sorted(cts.conditions.down_set(at_condition))
    else:
        relevant = cts.conditions.carrier.elements
    letters = cts.alphabet.elements
    for k in relevant:
        step = _slice_step(cts, k)
        start = (frozenset([x]), frozenset([y]))
        seen = {start}
        queue = [(start, ())]
        fallback = None
        while queue:
            (sa, sb), word = queue.pop(0)
            la = _det_label(cts, mode, sa, k)
            lb = _det_label(cts, mode, sb, k)
            if la != lb:
                gap = _family_gap(la, lb)
                if gap is not None:
                    return False, (k, word, gap)
                if fallback is None:
                    fallback = (k, word, _family_gap(lb, la))
            for a in letters:
                nxt = (frozenset().union(*(step.get((s, a), frozenset()) for s in sa)),
                       frozenset().union(*(step.get((s, a), frozenset()) for s in sb)))
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append((nxt, word + (a,)))
        if fallback is not None:
            return False, fallback
    return True, None


def refusal_downclosure_witness(cts: CTS) -> tuple | None:
    """A refusal observation valid at a condition but broken at a weaker
    one: (k, x, weaker k2, singleton refusal).  None when no such pattern
    exists, in particular whenever the condition order is discrete."""
    for k in cts.conditions.carrier.elements:
        for x in cts.states:
            enabled_here = ready_set(cts, x, k)
            for k2 in canon_sorted(cts.conditions.down_set(k) - {k}):
                gained = ready_set(cts, x, k2) - enabled_here
                for a in canon_sorted(gained):
                    return (k, x, k2, frozenset([a]))
    return None


# seeded instance generator


def random_cts(rng: random.Random, max_states: int = 5, max_conditions: int = 3,
               max_letters: int = 2) -> CTS:
    """Sparse seeded instance; transitions are closed under guard
    weakening so the result is always valid."""
    n_states = rng.randint(1, max_states)
    states = FinSet([f"s{i}" for i in range(n_states)])
    letters = FinSet(["a", "b"][:rng.randint(1, max_letters)])
    n_cond = rng.randint(1, max_conditions)
    atoms = [f"k{i}" for i in range(n_cond)]
    conditions = rng.choice(posets_on(atoms))
    n_trans = rng.randint(max(1, n_states // 2), n_states + 2)
    transitions = set()
    for _ in range(n_trans):
        transitions.add((rng.choice(states.elements), rng.choice(letters.elements),
                         rng.choice(atoms), rng.choice(states.elements)))
    accepting = {s for s in states if rng.random() < 0.35}
    return complete(CTS(conditions, letters, states, transitions, accepting))
