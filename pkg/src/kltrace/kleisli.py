"""Kleisli arrows for the two set monads, plain and condition-indexed.

A plain arrow X -> TY is a total table of subsets; on the "pos" backend
values are downsets and tables are monotone.  A condition-indexed arrow
keys its table by (condition, element) pairs and takes values in subsets
of (condition, element) pairs, which is an arrow of the Kleisli category
of the induced relative monad.  Machine steps over alphabet A with
observation carrier O use the shape A x X + O; its lifting acts on the
letter component identically and embeds observations unit-style.
"""

from __future__ import annotations

from itertools import product as iter_product
from typing import Mapping

from .errors import (
    BackendMismatch,
    CarrierMismatch,
    FailureShapeUnsupported,
    NotDownClosed,
    NotMonotone,
)
from .monads import Monad, as_poset, monad_for
from .orders import (
    DEFAULT_BUDGET,
    FinPoset,
    FinSet,
    all_maps,
    coproduct,
    discrete,
    downsets,
    fmt_element,
    guard_budget,
    inl,
    inr,
    is_down_closed,
    monotone_maps,
    product,
    subsets,
)
from .report import LawReport


def _check_table(backend: str, dom: FinPoset, cod: FinPoset, table: dict):
    if set(table) != set(dom.carrier.members):
        raise CarrierMismatch("table keys must cover the domain exactly")
    for x, value in table.items():
        if not value <= cod.carrier.members:
            raise CarrierMismatch(f"value at {fmt_element(x)} leaves the codomain")
        if backend == "pos" and not is_down_closed(cod, value):
            raise NotDownClosed(f"value at {fmt_element(x)}: {fmt_element(value)}")
    if backend == "pos":
        for a, b in dom.pairs:
            if not table[a] <= table[b]:
                raise NotMonotone(f"{fmt_element(a)} <= {fmt_element(b)} not respected")


class KlArrow:
    """Arrow X -> TY presented as a total table."""

    __slots__ = ("backend", "dom", "cod", "table")

    def __init__(self, backend: str, dom, cod, table: Mapping, *, check: bool = True):
        if backend not in ("set", "pos"):
            raise ValueError(f"unknown backend {backend!r}")
        dom, cod = as_poset(dom), as_poset(cod)
        table = {x: frozenset(v) for x, v in table.items()}
        if check:
            _check_table(backend, dom, cod, table)
        object.__setattr__(self, "backend", backend)
        object.__setattr__(self, "dom", dom)
        object.__setattr__(self, "cod", cod)
        object.__setattr__(self, "table", table)

    def __setattr__(self, name, value):
        raise AttributeError("KlArrow is immutable")

    def __call__(self, x) -> frozenset:
        return self.table[x]

    def __eq__(self, other):
        if self is other:
            return True
        return isinstance(other, KlArrow) and self.backend == other.backend and \
            self.table == other.table and self.dom == other.dom and self.cod == other.cod

    def __hash__(self):
        return hash((KlArrow, self.backend, self.dom, self.cod,
                     frozenset(self.table.items())))

    def __repr__(self):
        cells = ", ".join(
            f"{fmt_element(x)}->{fmt_element(self.table[x])}" for x in self.dom
        )
        return f"KlArrow[{self.backend}](" + cells + ")"


def _same_backend(f, g):
    if f.backend != g.backend:
        raise BackendMismatch(f"{f.backend} vs {g.backend}")


def _mk_kl(backend, dom, cod, table) -> KlArrow:
    arrow = object.__new__(KlArrow)
    object.__setattr__(arrow, "backend", backend)
    object.__setattr__(arrow, "dom", dom)
    object.__setattr__(arrow, "cod", cod)
    object.__setattr__(arrow, "table", table)
    return arrow


def kl_id(carrier, backend: str) -> KlArrow:
    carrier = as_poset(carrier)
    monad = monad_for(backend)
    return _mk_kl(backend, carrier, carrier, {x: monad.unit(carrier, x) for x in carrier})


def kl_bottom(dom, cod, backend: str) -> KlArrow:
    dom, cod = as_poset(dom), as_poset(cod)
    return _mk_kl(backend, dom, cod, {x: frozenset() for x in dom})


_EMPTY = frozenset()


def kl_compose(g: KlArrow, f: KlArrow) -> KlArrow:
    """g after f: collect g over every element f produces."""
    _same_backend(f, g)
    if f.cod != g.dom:
        raise CarrierMismatch("middle carriers differ")
    gt = g.table
    table = {
        x: frozenset().union(*(gt[y] for y in v)) if v else _EMPTY
        for x, v in f.table.items()
    }
    return _mk_kl(f.backend, f.dom, g.cod, table)


def _same_homset(f, g):
    _same_backend(f, g)
    if f.dom != g.dom or f.cod != g.cod:
        raise CarrierMismatch("arrows live in different homsets")


def kl_order(f: KlArrow, g: KlArrow) -> bool:
    """Pointwise inclusion."""
    _same_homset(f, g)
    return all(f.table[x] <= g.table[x] for x in f.dom)


def kl_join(arrows, dom=None, cod=None, backend=None) -> KlArrow:
    """Pointwise union; the empty join needs its homset spelled out."""
    arrows = list(arrows)
    if not arrows:
        return kl_bottom(dom, cod, backend)
    for other in arrows[1:]:
        _same_homset(arrows[0], other)
    table = {
        x: frozenset().union(*(f.table[x] for f in arrows)) for x in arrows[0].dom
    }
    return _mk_kl(arrows[0].backend, arrows[0].dom, arrows[0].cod, table)


def embed_pure(mapping: Mapping, dom, cod, backend: str) -> KlArrow:
    """Plain mapping embedded unit-style."""
    dom, cod = as_poset(dom), as_poset(cod)
    monad = monad_for(backend)
    return KlArrow(
        backend, dom, cod,
        {x: monad.unit(cod, mapping[x]) for x in dom},
    )


def kl_coproduct(f: KlArrow, g: KlArrow) -> KlArrow:
    """Case split on a disjoint union of domains, targets kept apart."""
    _same_backend(f, g)
    dom = coproduct(f.dom, g.dom)
    cod = coproduct(f.cod, g.cod)
    table = {}
    for x in f.dom:
        table[inl(x)] = frozenset(inl(y) for y in f.table[x])
    for x in g.dom:
        table[inr(x)] = frozenset(inr(y) for y in g.table[x])
    return KlArrow(f.backend, dom, cod, table, check=False)


# machine shape


class MachineShape:
    """Step shape A x X + O over a fixed alphabet and observation carrier."""

    __slots__ = ("alphabet", "obs")

    def __init__(self, alphabet: FinSet, obs):
        obs = as_poset(obs)
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "obs", obs)

    def __setattr__(self, name, value):
        raise AttributeError("MachineShape is immutable")

    def __eq__(self, other):
        return isinstance(other, MachineShape) and \
            (self.alphabet, self.obs) == (other.alphabet, other.obs)

    def __hash__(self):
        return hash((MachineShape, self.alphabet, self.obs))

    def carrier(self, states) -> FinPoset:
        return coproduct(product(discrete(self.alphabet), as_poset(states)), self.obs)

    def on_map(self, mapping: Mapping, states_dom, states_cod) -> dict:
        """Functor action on a plain mapping between state carriers."""
        out = {}
        for a in self.alphabet:
            for x in as_poset(states_dom):
                out[inl((a, x))] = inl((a, mapping[x]))
        for o in self.obs:
            out[inr(o)] = inr(o)
        return out


def observation_shape(alphabet: FinSet, kind: str, backend: str) -> MachineShape:
    """Observation carriers for the three decorations.

    Acceptance observes a single tick; readiness observes a set of enabled
    letters (ordered by inclusion on the pos backend so that smaller ready
    sets count as weaker observations); refusal sets admit no such order,
    hence no pos-backed shape exists for them.
    """
    if kind == "acceptance":
        return MachineShape(alphabet, discrete(["*"]))
    sets_of_letters = FinSet(subsets(alphabet))
    if kind == "ready":
        if backend == "set":
            return MachineShape(alphabet, discrete(sets_of_letters))
        pairs = [(u, v) for u in sets_of_letters for v in sets_of_letters if u <= v]
        return MachineShape(alphabet, FinPoset(sets_of_letters, pairs))
    if kind == "failure":
        if backend == "pos":
            raise FailureShapeUnsupported(
                "refusal observations have no order making them down-closed"
            )
        return MachineShape(alphabet, discrete(sets_of_letters))
    raise ValueError(f"unknown observation kind {kind!r}")


def machine_lift_bar(shape: MachineShape, f: KlArrow) -> KlArrow:
    """Lift a plain arrow along the machine shape."""
    dom = shape.carrier(f.dom)
    cod = shape.carrier(f.cod)
    monad = monad_for(f.backend)
    table = {}
    for a in shape.alphabet:
        for x in f.dom:
            table[inl((a, x))] = frozenset(inl((a, y)) for y in f.table[x])
    for o in shape.obs:
        table[inr(o)] = monad.unit(cod, inr(o))
    return KlArrow(f.backend, dom, cod, table, check=False)


# condition-indexed arrows


class RelKlArrow:
    """Arrow whose table is keyed by (condition, element) pairs."""

    __slots__ = ("backend", "cond", "dom", "cod", "table", "kdom", "kcod")

    def __init__(self, backend: str, cond: FinPoset, dom, cod, table: Mapping, *, check: bool = True):
        if backend not in ("set", "pos"):
            raise ValueError(f"unknown backend {backend!r}")
        dom, cod = as_poset(dom), as_poset(cod)
        kdom = product(cond, dom)
        kcod = product(cond, cod)
        table = {kx: frozenset(v) for kx, v in table.items()}
        if check:
            _check_table(backend, kdom, kcod, table)
        object.__setattr__(self, "backend", backend)
        object.__setattr__(self, "cond", cond)
        object.__setattr__(self, "dom", dom)
        object.__setattr__(self, "cod", cod)
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "kdom", kdom)
        object.__setattr__(self, "kcod", kcod)

    def __setattr__(self, name, value):
        raise AttributeError("RelKlArrow is immutable")

    def __call__(self, k, x) -> frozenset:
        return self.table[(k, x)]

    def __eq__(self, other):
        if self is other:
            return True
        return isinstance(other, RelKlArrow) and self.backend == other.backend and \
            self.table == other.table and self.cond == other.cond and \
            self.dom == other.dom and self.cod == other.cod

    def __hash__(self):
        return hash((RelKlArrow, self.backend, self.cond, self.dom, self.cod,
                     frozenset(self.table.items())))

    def __repr__(self):
        cells = ", ".join(
            f"{fmt_element(kx)}->{fmt_element(self.table[kx])}" for kx in self.kdom
        )
        return f"RelKlArrow[{self.backend}](" + cells + ")"


def _same_rel_homset(f, g, *, middle=False):
    _same_backend(f, g)
    if f.cond != g.cond:
        raise CarrierMismatch("condition posets differ")
    if middle:
        if f.cod != g.dom:
            raise CarrierMismatch("middle carriers differ")
    elif f.dom != g.dom or f.cod != g.cod:
        raise CarrierMismatch("arrows live in different homsets")


def _mk_relkl(backend, cond, dom, cod, kdom, kcod, table) -> RelKlArrow:
    arrow = object.__new__(RelKlArrow)
    object.__setattr__(arrow, "backend", backend)
    object.__setattr__(arrow, "cond", cond)
    object.__setattr__(arrow, "dom", dom)
    object.__setattr__(arrow, "cod", cod)
    object.__setattr__(arrow, "kdom", kdom)
    object.__setattr__(arrow, "kcod", kcod)
    object.__setattr__(arrow, "table", table)
    return arrow


def relkl_id(cond: FinPoset, carrier, backend: str) -> RelKlArrow:
    carrier = as_poset(carrier)
    kcar = product(cond, carrier)
    monad = monad_for(backend)
    table = {kx: monad.unit(kcar, kx) for kx in kcar}
    return _mk_relkl(backend, cond, carrier, carrier, kcar, kcar, table)


def relkl_bottom(cond: FinPoset, dom, cod, backend: str) -> RelKlArrow:
    dom, cod = as_poset(dom), as_poset(cod)
    kdom, kcod = product(cond, dom), product(cond, cod)
    table = {kx: frozenset() for kx in kdom}
    return _mk_relkl(backend, cond, dom, cod, kdom, kcod, table)


def relkl_compose(g: RelKlArrow, f: RelKlArrow) -> RelKlArrow:
    _same_rel_homset(f, g, middle=True)
    gt = g.table
    table = {
        kx: frozenset().union(*(gt[ky] for ky in v)) if v else _EMPTY
        for kx, v in f.table.items()
    }
    return _mk_relkl(f.backend, f.cond, f.dom, g.cod, f.kdom, g.kcod, table)


def relkl_order(f: RelKlArrow, g: RelKlArrow) -> bool:
    _same_rel_homset(f, g)
    return all(f.table[kx] <= g.table[kx] for kx in f.table)


def relkl_join(arrows, cond=None, dom=None, cod=None, backend=None) -> RelKlArrow:
    arrows = list(arrows)
    if not arrows:
        return relkl_bottom(cond, dom, cod, backend)
    for other in arrows[1:]:
        _same_rel_homset(arrows[0], other)
    first = arrows[0]
    table = {
        kx: frozenset().union(*(f.table[kx] for f in arrows)) for kx in first.table
    }
    return _mk_relkl(first.backend, first.cond, first.dom, first.cod,
                     first.kdom, first.kcod, table)


def embed_pure_rel(mapping: Mapping, cond: FinPoset, dom, cod, backend: str) -> RelKlArrow:
    """The canonical functor from plain mappings: unit after (condition, f)."""
    dom, cod = as_poset(dom), as_poset(cod)
    kcod = product(cond, cod)
    monad = monad_for(backend)
    table = {
        (k, x): monad.unit(kcod, (k, mapping[x])) for k in cond for x in dom
    }
    return RelKlArrow(backend, cond, dom, cod, table)


def lift_A_tilde(alphabet: FinSet, f: RelKlArrow) -> RelKlArrow:
    """Letter-component lifting: act on the state, keep the letter."""
    a_dom = product(discrete(alphabet), f.dom)
    a_cod = product(discrete(alphabet), f.cod)
    table = {}
    for k in f.cond:
        for a in alphabet:
            for x in f.dom:
                table[(k, (a, x))] = frozenset(
                    (k2, (a, y)) for (k2, y) in f.table[(k, x)]
                )
    return _mk_relkl(f.backend, f.cond, a_dom, a_cod,
                     product(f.cond, a_dom), product(f.cond, a_cod), table)


def lift_B_hat(shape: MachineShape, f: RelKlArrow) -> RelKlArrow:
    """Machine lifting: letters step through f, observations embed unit-style.

    On the letter summand the letter itself is preserved; only the
    condition and the state move.  On the observation summand the value is
    the unit at the same (condition, observation) pair.
    """
    dom = shape.carrier(f.dom)
    cod = shape.carrier(f.cod)
    kcod = product(f.cond, cod)
    monad = monad_for(f.backend)
    table = {}
    for k in f.cond:
        for a in shape.alphabet:
            for x in f.dom:
                table[(k, inl((a, x)))] = frozenset(
                    (k2, inl((a, y))) for (k2, y) in f.table[(k, x)]
                )
        for o in shape.obs:
            table[(k, inr(o))] = monad.unit(kcod, (k, inr(o)))
    return _mk_relkl(f.backend, f.cond, dom, cod, product(f.cond, dom), kcod, table)


# enumeration of arrows


def enumerate_kl_arrows(dom, cod, backend: str, budget: int = DEFAULT_BUDGET):
    """Every arrow dom -> T cod, canonically ordered."""
    dom, cod = as_poset(dom), as_poset(cod)
    values = subsets(cod.carrier) if backend == "set" else downsets(cod)
    cells = dom.elements
    guard_budget(len(values) ** max(len(cells), 1), budget, "Kleisli homset")
    strict = [(a, b) for a, b in dom.pairs if a != b]
    out = []
    for choice in iter_product(values, repeat=len(cells)):
        table = dict(zip(cells, choice))
        if backend == "pos" and any(not table[a] <= table[b] for a, b in strict):
            continue
        out.append(_mk_kl(backend, dom, cod, table))
    return out


def atomic_kl_arrows(dom, cod, backend: str):
    """Pointed arrows: one principal cell, unit value, nothing else.

    Every arrow is the pointwise join of the atomics below it, so checks
    that are join-continuous in each argument only need these.
    """
    dom, cod = as_poset(dom), as_poset(cod)
    monad = monad_for(backend)
    out = []
    for c in dom:
        for e in cod:
            value = monad.unit(cod, e)
            table = {
                x: value if (backend == "pos" and dom.leq(c, x)) or x == c else frozenset()
                for x in dom
            }
            out.append(_mk_kl(backend, dom, cod, table))
    return out


def enumerate_relkl_arrows(cond: FinPoset, dom, cod, backend: str, budget: int = DEFAULT_BUDGET):
    dom, cod = as_poset(dom), as_poset(cod)
    kdom = product(cond, dom)
    kcod = product(cond, cod)
    values = subsets(kcod.carrier) if backend == "set" else downsets(kcod)
    cells = kdom.elements
    guard_budget(len(values) ** max(len(cells), 1), budget, "relative Kleisli homset")
    strict = [(a, b) for a, b in kdom.pairs if a != b]
    out = []
    for choice in iter_product(values, repeat=len(cells)):
        table = dict(zip(cells, choice))
        if backend == "pos" and any(not table[a] <= table[b] for a, b in strict):
            continue
        out.append(_mk_relkl(backend, cond, dom, cod, kdom, kcod, table))
    return out


def atomic_relkl_arrows(cond: FinPoset, dom, cod, backend: str):
    dom, cod = as_poset(dom), as_poset(cod)
    kdom = product(cond, dom)
    kcod = product(cond, cod)
    monad = monad_for(backend)
    out = []
    for c in kdom:
        for e in kcod:
            value = monad.unit(kcod, e)
            table = {
                kx: value if (backend == "pos" and kdom.leq(c, kx)) or kx == c else frozenset()
                for kx in kdom
            }
            out.append(_mk_relkl(backend, cond, dom, cod, kdom, kcod, table))
    return out


# law suites


class PlainKl:
    """Adapter giving the law suite one vocabulary for both categories."""

    def __init__(self, backend: str):
        self.backend = backend
        self.name = f"Kl({'powerset' if backend == 'set' else 'downset'})"

    def id(self, x):
        return kl_id(x, self.backend)

    def compose(self, g, f):
        return kl_compose(g, f)

    def bottom(self, dom, cod):
        return kl_bottom(dom, cod, self.backend)

    def join(self, arrows, dom, cod):
        return kl_join(arrows, dom, cod, self.backend)

    def order(self, f, g):
        return kl_order(f, g)

    def homset(self, dom, cod, budget):
        return enumerate_kl_arrows(dom, cod, self.backend, budget)

    def atomics(self, dom, cod):
        return atomic_kl_arrows(dom, cod, self.backend)

    def homset_size(self, dom, cod):
        dom, cod = as_poset(dom), as_poset(cod)
        values = subsets(cod.carrier) if self.backend == "set" else downsets(cod)
        return len(values) ** max(len(dom.elements), 1)


class RelKl:
    def __init__(self, backend: str, cond: FinPoset):
        self.backend = backend
        self.cond = cond
        self.name = f"RelKl({'powerset' if backend == 'set' else 'downset'}, |K|={len(cond)})"

    def id(self, x):
        return relkl_id(self.cond, x, self.backend)

    def compose(self, g, f):
        return relkl_compose(g, f)

    def bottom(self, dom, cod):
        return relkl_bottom(self.cond, dom, cod, self.backend)

    def join(self, arrows, dom, cod):
        return relkl_join(arrows, self.cond, dom, cod, self.backend)

    def order(self, f, g):
        return relkl_order(f, g)

    def homset(self, dom, cod, budget):
        return enumerate_relkl_arrows(self.cond, dom, cod, self.backend, budget)

    def atomics(self, dom, cod):
        return atomic_relkl_arrows(self.cond, dom, cod, self.backend)

    def homset_size(self, dom, cod):
        kdom = product(self.cond, as_poset(dom))
        kcod = product(self.cond, as_poset(cod))
        values = subsets(kcod.carrier) if self.backend == "set" else downsets(kcod)
        return len(values) ** max(len(kdom.elements), 1)


def _family(cat, dom, cod, budget):
    """Full homset when it fits the budget, else bottom plus atomics."""
    if cat.homset_size(dom, cod) <= budget:
        return cat.homset(dom, cod, budget), "full homset"
    return [cat.bottom(dom, cod)] + cat.atomics(dom, cod), "atomic family"


def check_kleisli_laws(cat, objects, budget: int = DEFAULT_BUDGET,
                       triple_budget: int = 1 << 14) -> LawReport:
    """Category and enrichment laws over the given objects.

    Identity laws run over full homsets.  Associativity and the
    continuity checks run over full homsets when the triple count fits
    the budget and otherwise over bottom-plus-atomic families, which
    suffices because composition distributes over pointwise joins (that
    distribution is itself one of the checks below) and every arrow is
    the join of atomics below it (also checked below).
    """
    report = LawReport(f"kleisli laws ({cat.name})")
    pairs = [(x, y) for x in objects for y in objects]

    id_n = 0
    id_bad = None
    dec_n = 0
    dec_bad = None
    for x, y in pairs:
        fam, _ = _family(cat, x, y, budget)
        idx, idy = cat.id(x), cat.id(y)
        atoms = cat.atomics(x, y)
        for f in fam:
            id_n += 1
            if cat.compose(idy, f) != f or cat.compose(f, idx) != f:
                id_bad = id_bad or repr(f)
            dec_n += 1
            joined = cat.join([g for g in atoms if cat.order(g, f)], x, y)
            if joined != f:
                dec_bad = dec_bad or repr(f)
    report.record("identity", id_bad is None, id_n, id_bad)
    report.record("atomic decomposition", dec_bad is None, dec_n, dec_bad)

    n = 0
    bad = None
    for x in objects:
        for y in objects:
            for z in objects:
                for w in objects:
                    size = (
                        cat.homset_size(x, y)
                        * cat.homset_size(y, z)
                        * cat.homset_size(z, w)
                    )
                    if size <= triple_budget:
                        fs = cat.homset(x, y, budget)
                        gs = cat.homset(y, z, budget)
                        hs = cat.homset(z, w, budget)
                    else:
                        fs = [cat.bottom(x, y)] + cat.atomics(x, y)
                        gs = [cat.bottom(y, z)] + cat.atomics(y, z)
                        hs = [cat.bottom(z, w)] + cat.atomics(z, w)
                    for f in fs:
                        for g in gs:
                            gf = cat.compose(g, f)
                            for h in hs:
                                n += 1
                                if cat.compose(h, gf) != cat.compose(cat.compose(h, g), f):
                                    bad = bad or f"f={f!r}, g={g!r}, h={h!r}"
    report.record("associativity", bad is None, n, bad)

    n = 0
    bad = None
    for x, y in pairs:
        fam, _ = _family(cat, x, y, budget)
        for z in objects:
            bot_yz = cat.bottom(y, z)
            bot_xz = cat.bottom(x, z)
            for f in fam:
                n += 1
                if cat.compose(bot_yz, f) != bot_xz:
                    bad = bad or repr(f)
    report.record("left strictness", bad is None, n, bad)

    n = 0
    bad = None
    for x, y in pairs:
        atoms = cat.atomics(x, y)
        for z in objects:
            gs = [cat.bottom(y, z)] + cat.atomics(y, z)
            for f1 in atoms:
                for f2 in atoms:
                    joined = cat.join([f1, f2], x, y)
                    for g in gs:
                        n += 1
                        lhs = cat.compose(g, joined)
                        rhs = cat.join(
                            [cat.compose(g, f1), cat.compose(g, f2)], x, z
                        )
                        if lhs != rhs:
                            bad = bad or f"f1={f1!r}, f2={f2!r}, g={g!r}"
    report.record("composition distributes over joins (right)", bad is None, n, bad)

    n = 0
    bad = None
    for x, y in pairs:
        fs = [cat.bottom(x, y)] + cat.atomics(x, y)
        for z in objects:
            atoms = cat.atomics(y, z)
            for g1 in atoms:
                for g2 in atoms:
                    joined = cat.join([g1, g2], y, z)
                    for f in fs:
                        n += 1
                        lhs = cat.compose(joined, f)
                        rhs = cat.join(
                            [cat.compose(g1, f), cat.compose(g2, f)], x, z
                        )
                        if lhs != rhs:
                            bad = bad or f"g1={g1!r}, g2={g2!r}, f={f!r}"
    report.record("composition distributes over joins (left)", bad is None, n, bad)

    n = 0
    bad = None
    for x, y in pairs:
        atoms = cat.atomics(x, y)
        for z in objects:
            gs = [cat.bottom(y, z)] + cat.atomics(y, z)
            for a1 in atoms:
                for a2 in atoms:
                    chain = [
                        cat.bottom(x, y),
                        a1,
                        cat.join([a1, a2], x, y),
                    ]
                    top = chain[2]
                    for g in gs:
                        n += 1
                        lhs = cat.compose(g, top)
                        rhs = cat.join([cat.compose(g, c) for c in chain], x, z)
                        if lhs != rhs:
                            bad = bad or f"chain top={top!r}, g={g!r}"
    report.record("composition continuous on ascending chains", bad is None, n, bad)

    return report



def check_lifting_theorems(
    backend: str,
    cond: FinPoset,
    alphabet: FinSet,
    obs,
    carriers,
    budget: int = DEFAULT_BUDGET,
    pair_budget: int = 1 << 12,
) -> LawReport:
    """Functoriality, naturality and continuity of the machine liftings.

    Composite checks enumerate full homset pairs when that fits the pair
    budget and fall back to bottom-plus-atomic families otherwise; the
    liftings and composition are join-continuous cellwise (checked by the
    chain items below), so atomic families are a generating set.
    """
    obs = as_poset(obs)
    shape = MachineShape(alphabet, obs)
    rel = RelKl(backend, cond)
    plain = PlainKl(backend)
    report = LawReport(
        f"machine lifting ({backend}, |A|={len(alphabet)}, |O|={len(obs)}, |K|={len(cond)})"
    )

    def a_obj(x):
        return product(discrete(alphabet), as_poset(x))

    def a_map(mapping, x):
        return {(a, v): (a, mapping[v]) for a in alphabet for v in as_poset(x)}

    def pair_family(cat, x, y, z):
        if cat.homset_size(x, y) * cat.homset_size(y, z) <= pair_budget:
            return cat.homset(x, y, budget), cat.homset(y, z, budget)
        return (
            [cat.bottom(x, y)] + cat.atomics(x, y),
            [cat.bottom(y, z)] + cat.atomics(y, z),
        )

    bad, n = None, 0
    for x in carriers:
        n += 3
        if machine_lift_bar(shape, kl_id(x, backend)) != kl_id(shape.carrier(x), backend):
            bad = bad or f"plain identity at {x!r}"
        if lift_A_tilde(alphabet, relkl_id(cond, x, backend)) != relkl_id(cond, a_obj(x), backend):
            bad = bad or f"letter identity at {x!r}"
        if lift_B_hat(shape, relkl_id(cond, x, backend)) != relkl_id(cond, shape.carrier(x), backend):
            bad = bad or f"machine identity at {x!r}"
    report.record("lifting preserves identities", bad is None, n, bad)

    bad, n = None, 0
    for x in carriers:
        for y in carriers:
            for z in carriers:
                fs, gs = pair_family(plain, x, y, z)
                lifted = [(f, machine_lift_bar(shape, f)) for f in fs]
                for g in gs:
                    bg = machine_lift_bar(shape, g)
                    for f, bf in lifted:
                        n += 1
                        if machine_lift_bar(shape, kl_compose(g, f)) != kl_compose(bg, bf):
                            bad = bad or f"f={f!r}, g={g!r}"
    report.record("plain lifting preserves composites", bad is None, n, bad)

    bad, n = None, 0
    for x in carriers:
        for y in carriers:
            for z in carriers:
                fs, gs = pair_family(rel, x, y, z)
                lifted_a = [(f, lift_A_tilde(alphabet, f)) for f in fs]
                lifted_b = [(f, lift_B_hat(shape, f)) for f in fs]
                for g in gs:
                    ag = lift_A_tilde(alphabet, g)
                    bg = lift_B_hat(shape, g)
                    for f, af in lifted_a:
                        n += 1
                        if lift_A_tilde(alphabet, relkl_compose(g, f)) != relkl_compose(ag, af):
                            bad = bad or f"letter: f={f!r}, g={g!r}"
                    for f, bf in lifted_b:
                        n += 1
                        if lift_B_hat(shape, relkl_compose(g, f)) != relkl_compose(bg, bf):
                            bad = bad or f"machine: f={f!r}, g={g!r}"
    report.record("indexed liftings preserve composites", bad is None, n, bad)

    bad, n = None, 0
    for x in carriers:
        for y in carriers:
            px, py = as_poset(x), as_poset(y)
            maps = monotone_maps(px, py) if backend == "pos" else all_maps(px.carrier, py.carrier)
            for mapping in maps:
                n += 3
                if machine_lift_bar(shape, embed_pure(mapping, px, py, backend)) != embed_pure(
                    shape.on_map(mapping, px, py), shape.carrier(px), shape.carrier(py), backend
                ):
                    bad = bad or f"plain embed at {mapping!r}"
                if lift_A_tilde(alphabet, embed_pure_rel(mapping, cond, px, py, backend)) != embed_pure_rel(
                    a_map(mapping, px), cond, a_obj(px), a_obj(py), backend
                ):
                    bad = bad or f"letter embed at {mapping!r}"
                if lift_B_hat(shape, embed_pure_rel(mapping, cond, px, py, backend)) != embed_pure_rel(
                    shape.on_map(mapping, px, py), cond, shape.carrier(px), shape.carrier(py), backend
                ):
                    bad = bad or f"machine embed at {mapping!r}"
    report.record("lifting after embedding is embedding after the shape", bad is None, n, bad)

    bad, n = None, 0
    for x in carriers:
        for y in carriers:
            atoms = rel.atomics(x, y)
            for f1 in atoms:
                for f2 in atoms:
                    chain = [rel.bottom(x, y), f1, rel.join([f1, f2], x, y)]
                    n += 1
                    joined = lift_B_hat(shape, chain[2])
                    parts = relkl_join(
                        [lift_B_hat(shape, c) for c in chain],
                        cond, shape.carrier(x), shape.carrier(y), backend,
                    )
                    if joined != parts:
                        bad = bad or f"chain at f1={f1!r}, f2={f2!r}"
                    if not (relkl_order(lift_B_hat(shape, chain[0]), lift_B_hat(shape, chain[1]))
                            and relkl_order(lift_B_hat(shape, chain[1]), joined)):
                        bad = bad or f"monotonicity at f1={f1!r}, f2={f2!r}"
    report.record("machine lifting continuous on ascending chains", bad is None, n, bad)

    bad, n = None, 0
    for x in carriers:
        for z in carriers:
            atoms = plain.atomics(x, z)
            for f1 in atoms:
                for f2 in atoms:
                    chain = [plain.bottom(x, z), f1, plain.join([f1, f2], x, z)]
                    for y in carriers:
                        for g in plain.atomics(y, z):
                            n += 1
                            lhs = kl_coproduct(chain[2], g)
                            rhs = kl_join(
                                [kl_coproduct(c, g) for c in chain],
                                coproduct(as_poset(x), as_poset(y)),
                                coproduct(as_poset(z), as_poset(z)),
                                backend,
                            )
                            if lhs != rhs:
                                bad = bad or f"f={chain[2]!r}, g={g!r}"
    report.record("case split exchanges with ascending joins", bad is None, n, bad)

    return report
