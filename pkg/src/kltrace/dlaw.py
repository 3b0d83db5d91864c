"""Distributive laws built from predicate liftings.

Predicates over a carrier form the fibres of an indexed category: subsets
on the "set" backend, up-closed subsets on the "pos" backend, reindexed
by preimage, with direct image as left adjoint.  A binary relation
between X and Y lives in the fibre over X x Y-with-the-second-leg-dualled,
so one closure condition (up-closed there) covers both backends.

The graph map theta identifies Kleisli arrows X -> TY with such
relations.  A predicate lifting sigma for a functor F induces a relation
lifting (apply sigma over the relation's fibre, push forward along the
pairing of F-projections), and applying that to the membership relation
and reading the result back through theta yields a candidate
distributive law F T => T F whose unit, multiplication and naturality
squares are then checked pointwise on registered carriers.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Callable, Mapping

from .errors import (
    BackendMismatch,
    CarrierMismatch,
    ClosureViolation,
    NotCommuting,
)
from .kleisli import KlArrow, _mk_kl, enumerate_kl_arrows, kl_compose, kl_id
from .monads import Monad, as_poset, monad_for
from .orders import (
    DEFAULT_BUDGET,
    FinPoset,
    FinSet,
    all_maps,
    coproduct,
    discrete,
    dual,
    fmt_element,
    inl,
    inr,
    is_up_closed,
    monotone_maps,
    product,
    subsets,
    up_close,
    upsets,
)
from .report import LawReport


class Predicate:
    """Member of the fibre over a carrier."""

    __slots__ = ("backend", "carrier", "members")

    def __init__(self, backend: str, carrier, members, *, check: bool = True):
        carrier = as_poset(carrier)
        members = frozenset(members)
        if check:
            if not members <= carrier.carrier.members:
                raise CarrierMismatch("predicate members leave the carrier")
            if backend == "pos" and not is_up_closed(carrier, members):
                raise ClosureViolation(f"not up-closed: {fmt_element(members)}")
        object.__setattr__(self, "backend", backend)
        object.__setattr__(self, "carrier", carrier)
        object.__setattr__(self, "members", members)

    def __setattr__(self, name, value):
        raise AttributeError("Predicate is immutable")

    def __eq__(self, other):
        return isinstance(other, Predicate) and self.backend == other.backend and \
            self.members == other.members and self.carrier == other.carrier

    def __hash__(self):
        return hash((Predicate, self.backend, self.carrier, self.members))

    def __repr__(self):
        return f"Predicate[{self.backend}]({fmt_element(self.members)})"


@lru_cache(maxsize=4096)
def relation_fibre(left: FinPoset, right: FinPoset) -> FinPoset:
    """Carrier of relations: pairs, second leg taken with the dual order."""
    return product(left, dual(right))


class Relation:
    """Relation between two carriers, kept in its fibre."""

    __slots__ = ("backend", "left", "right", "pairs")

    def __init__(self, backend: str, left, right, pairs, *, check: bool = True):
        left, right = as_poset(left), as_poset(right)
        pairs = frozenset(pairs)
        if check:
            fibre = relation_fibre(left, right)
            if not pairs <= fibre.carrier.members:
                raise CarrierMismatch("relation pairs leave the carriers")
            if backend == "pos" and not is_up_closed(fibre, pairs):
                raise ClosureViolation(
                    "not up-closed on the left and down-closed on the right"
                )
        object.__setattr__(self, "backend", backend)
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)
        object.__setattr__(self, "pairs", pairs)

    def __setattr__(self, name, value):
        raise AttributeError("Relation is immutable")

    def __eq__(self, other):
        return isinstance(other, Relation) and self.backend == other.backend and \
            self.pairs == other.pairs and self.left == other.left and self.right == other.right

    def __hash__(self):
        return hash((Relation, self.backend, self.left, self.right, self.pairs))

    def __repr__(self):
        return f"Relation[{self.backend}]({fmt_element(self.pairs)})"

    def as_predicate(self) -> Predicate:
        return Predicate(self.backend, relation_fibre(self.left, self.right),
                         self.pairs, check=False)


def reindex(mapping: Mapping, dom, pred: Predicate) -> Predicate:
    """Preimage; right adjoint direction of the bifibration."""
    dom = as_poset(dom)
    members = frozenset(x for x in dom if mapping[x] in pred.members)
    return Predicate(pred.backend, dom, members, check=False)


def direct_image(mapping: Mapping, cod, pred: Predicate) -> Predicate:
    """Image, up-closed on the pos backend; left adjoint to reindex."""
    cod = as_poset(cod)
    image = {mapping[x] for x in pred.members}
    if pred.backend == "pos":
        image = up_close(cod, image)
    return Predicate(pred.backend, cod, frozenset(image), check=False)


def theta(arrow: KlArrow) -> Relation:
    """Graph of a Kleisli arrow."""
    pairs = frozenset((x, y) for x, value in arrow.table.items() for y in value)
    return Relation(arrow.backend, arrow.dom, arrow.cod, pairs, check=False)


def theta_inv(rel: Relation) -> KlArrow:
    """Rows of a relation, read back as a Kleisli arrow."""
    rows = {x: set() for x in rel.left}
    for x, y in rel.pairs:
        rows[x].add(y)
    table = {x: frozenset(v) for x, v in rows.items()}
    return _mk_kl(rel.backend, rel.left, rel.right, table)


def membership(monad: Monad, carrier, budget: int = DEFAULT_BUDGET) -> Relation:
    """The containment relation between T-values and elements."""
    carrier = as_poset(carrier)
    t_poset = monad.carrier(carrier, budget)
    pairs = frozenset((s, x) for s in t_poset for x in s)
    return Relation(monad.backend, t_poset, carrier, pairs, check=False)


def delta(monad: Monad, carrier) -> Relation:
    """Graph of the unit: equality, or order on the pos backend."""
    return theta(kl_id(carrier, monad.backend))


def rel_compose(s: Relation, r: Relation) -> Relation:
    """Composite through theta; coincides with ordinary composition."""
    if r.backend != s.backend:
        raise BackendMismatch(f"{r.backend} vs {s.backend}")
    if r.right != s.left:
        raise CarrierMismatch("middle carriers differ")
    return theta(kl_compose(theta_inv(s), theta_inv(r)))


# functors and liftings


class FiniteFunctor:
    """Endofunctor given by explicit object and mapping actions."""

    __slots__ = ("name", "_on_obj", "_on_map")

    def __init__(self, name: str, on_obj: Callable, on_map: Callable):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "_on_obj", on_obj)
        object.__setattr__(self, "_on_map", on_map)

    def __setattr__(self, name, value):
        raise AttributeError("FiniteFunctor is immutable")

    def __repr__(self):
        return f"FiniteFunctor({self.name})"

    def on_obj(self, carrier) -> FinPoset:
        return self._on_obj(as_poset(carrier))

    def on_map(self, mapping: Mapping, dom, cod) -> dict:
        return self._on_map(mapping, as_poset(dom), as_poset(cod))


def identity_functor() -> FiniteFunctor:
    return FiniteFunctor("Id", lambda x: x, lambda f, dom, cod: dict(f))


def letter_functor(alphabet: FinSet) -> FiniteFunctor:
    """X goes to alphabet x X."""
    a_poset = discrete(alphabet)

    def on_obj(x):
        return product(a_poset, x)

    def on_map(f, dom, cod):
        return {(a, x): (a, f[x]) for a in alphabet for x in dom}

    return FiniteFunctor(f"{len(alphabet)}x-", on_obj, on_map)


def machine_functor(alphabet: FinSet, obs) -> FiniteFunctor:
    """X goes to alphabet x X + O; O stays discrete so dual commutes."""
    a_poset = discrete(alphabet)
    obs = as_poset(obs)

    def on_obj(x):
        return coproduct(product(a_poset, x), obs)

    def on_map(f, dom, cod):
        out = {inl((a, x)): inl((a, f[x])) for a in alphabet for x in dom}
        out.update({inr(o): inr(o) for o in obs})
        return out

    return FiniteFunctor(f"{len(alphabet)}x-+{len(obs)}", on_obj, on_map)


class PredicateLifting:
    """Fibre-indexed action turning predicates over X into ones over FX."""

    __slots__ = ("name", "functor", "_apply")

    def __init__(self, name: str, functor: FiniteFunctor, apply: Callable):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "functor", functor)
        object.__setattr__(self, "_apply", apply)

    def __setattr__(self, name, value):
        raise AttributeError("PredicateLifting is immutable")

    def __repr__(self):
        return f"PredicateLifting({self.name})"

    def apply(self, pred: Predicate) -> Predicate:
        members = frozenset(self._apply(pred))
        f_carrier = self.functor.on_obj(pred.carrier)
        if not members <= f_carrier.carrier.members:
            raise CarrierMismatch(
                f"lifting {self.name} left the target carrier"
            )
        return Predicate(pred.backend, f_carrier, members, check=False)


def letter_lifting(alphabet: FinSet) -> PredicateLifting:
    """U goes to alphabet x U."""
    functor = letter_functor(alphabet)

    def apply(pred):
        return frozenset((a, x) for a in alphabet for x in pred.members)

    return PredicateLifting("letter", functor, apply)


def machine_lifting(alphabet: FinSet, obs) -> PredicateLifting:
    """U goes to all observations plus alphabet x U."""
    functor = machine_functor(alphabet, obs)
    obs = as_poset(obs)

    def apply(pred):
        return frozenset(
            {inr(o) for o in obs} | {inl((a, x)) for a in alphabet for x in pred.members}
        )

    return PredicateLifting("machine", functor, apply)


def validate_lifting(lifting: PredicateLifting, carriers, backend: str,
                     budget: int = DEFAULT_BUDGET) -> LawReport:
    """Naturality of a lifting along every mapping between the carriers."""
    report = LawReport(f"lifting naturality ({lifting.name}, {backend})")
    carriers = [as_poset(c) for c in carriers]
    n, bad = 0, None
    for x in carriers:
        for y in carriers:
            maps = monotone_maps(x, y) if backend == "pos" else all_maps(x.carrier, y.carrier)
            preds = _fibre_elements(backend, y, budget)
            for f in maps:
                ff = lifting.functor.on_map(f, x, y)
                for p in preds:
                    n += 1
                    pred = Predicate(backend, y, p, check=False)
                    lhs = lifting.apply(reindex(f, x, pred))
                    rhs = reindex(ff, lifting.functor.on_obj(x), lifting.apply(pred))
                    if lhs != rhs:
                        bad = bad or f"f={f!r}, P={fmt_element(p)}"
    report.record("naturality", bad is None, n, bad)
    return report


def _fibre_elements(backend: str, carrier: FinPoset, budget: int) -> tuple:
    return subsets(carrier.carrier, budget) if backend == "set" else upsets(carrier, budget)


@lru_cache(maxsize=4096)
def lambda_pairing(functor: FiniteFunctor, left: FinPoset, right: FinPoset):
    """The pairing of F-projections out of F applied to a relation fibre.

    Returns the mapping together with its domain and codomain carriers;
    callers must treat the mapping as read-only (the result is cached).
    """
    fibre = relation_fibre(left, right)
    f_fibre = functor.on_obj(fibre)
    pr_left = {e: e[0] for e in fibre}
    pr_right = {e: e[1] for e in fibre}
    m_left = functor.on_map(pr_left, fibre, left)
    m_right = functor.on_map(pr_right, fibre, right)
    mapping = {e: (m_left[e], m_right[e]) for e in f_fibre}
    cod = relation_fibre(functor.on_obj(left), functor.on_obj(right))
    return mapping, f_fibre, cod


def relation_lift(lifting: PredicateLifting, rel: Relation) -> Relation:
    """Apply the lifting over the fibre, then push along the pairing."""
    mapping, _, cod = lambda_pairing(lifting.functor, rel.left, rel.right)
    lifted = lifting.apply(rel.as_predicate())
    pushed = direct_image(mapping, cod, lifted)
    f_left = lifting.functor.on_obj(rel.left)
    f_right = lifting.functor.on_obj(rel.right)
    return Relation(rel.backend, f_left, f_right, pushed.members, check=False)


def build_dlaw(lifting: PredicateLifting, monad: Monad, carrier,
               budget: int = DEFAULT_BUDGET, rlift: Callable | None = None) -> KlArrow:
    """Candidate distributive law at one carrier: lift membership, read back."""
    rlift = rlift or (lambda rel: relation_lift(lifting, rel))
    return theta_inv(rlift(membership(monad, carrier, budget)))


def _compose_maps(outer: Mapping, inner: Mapping) -> dict:
    return {x: outer[inner[x]] for x in inner}


def _as_mapping(arrow: KlArrow) -> dict:
    return dict(arrow.table)


def check_kl_law(lifting: PredicateLifting, monad: Monad, carriers,
                 budget: int = DEFAULT_BUDGET,
                 rlift: Callable | None = None) -> LawReport:
    """Unit, multiplication and naturality of the induced candidate law."""
    backend = monad.backend
    report = LawReport(f"distributive law ({lifting.name}, {backend})")
    carriers = [as_poset(c) for c in carriers]
    functor = lifting.functor
    laws = {x: build_dlaw(lifting, monad, x, budget, rlift) for x in carriers}

    n, bad = 0, None
    for x in carriers:
        for y in carriers:
            maps = monotone_maps(x, y) if backend == "pos" else \
                all_maps(x.carrier, y.carrier)
            tx, ty = monad.carrier(x, budget), monad.carrier(y, budget)
            fx, fy = functor.on_obj(x), functor.on_obj(y)
            ftx = functor.on_obj(tx)
            for f in maps:
                n += 1
                tf = {s: monad.map(f, s, x, y) for s in tx}
                ftf = functor.on_map(tf, tx, ty)
                ff = functor.on_map(f, x, y)
                for e in ftx:
                    lhs = laws[y].table[ftf[e]]
                    rhs = monad.map(ff, laws[x].table[e], fx, fy)
                    if lhs != rhs:
                        bad = bad or (
                            f"f={f!r} at {fmt_element(e)}: "
                            f"{fmt_element(lhs)} vs {fmt_element(rhs)}"
                        )
    report.record("naturality", bad is None, n, bad)

    n, bad = 0, None
    for x in carriers:
        tx = monad.carrier(x, budget)
        fx = functor.on_obj(x)
        eta = {v: monad.unit(x, v) for v in x}
        f_eta = functor.on_map(eta, x, tx)
        for e in functor.on_obj(x):
            n += 1
            lhs = laws[x].table[f_eta[e]]
            rhs = monad.unit(fx, e)
            if lhs != rhs:
                bad = bad or f"at {fmt_element(e)}: {fmt_element(lhs)} vs {fmt_element(rhs)}"
    report.record("unit triangle", bad is None, n, bad)

    n, bad = 0, None
    for x in carriers:
        tx = monad.carrier(x, budget)
        ttx = monad.carrier(tx, budget)
        fx = functor.on_obj(x)
        ftx = functor.on_obj(tx)
        tfx = monad.carrier(fx, budget)
        law_tx = build_dlaw(lifting, monad, tx, budget, rlift)
        mu = {s: monad.mult(s, x) for s in ttx}
        f_mu = functor.on_map(mu, ttx, tx)
        law_x_map = _as_mapping(laws[x])
        for e in functor.on_obj(ttx):
            n += 1
            lhs = laws[x].table[f_mu[e]]
            stage = monad.map(law_x_map, law_tx.table[e], ftx, tfx)
            rhs = monad.mult(stage, fx)
            if lhs != rhs:
                bad = bad or f"at {fmt_element(e)}: {fmt_element(lhs)} vs {fmt_element(rhs)}"
    report.record("mult pentagon", bad is None, n, bad)
    return report


def check_lifting_preserves(lifting: PredicateLifting, carriers, backend: str,
                            budget: int = DEFAULT_BUDGET,
                            rlift: Callable | None = None) -> LawReport:
    """The relation lifting fixes the unit graph and respects composition."""
    rlift = rlift or (lambda rel: relation_lift(lifting, rel))
    monad = monad_for(backend)
    report = LawReport(f"relation lifting ({lifting.name}, {backend})")
    carriers = [as_poset(c) for c in carriers]
    functor = lifting.functor

    n, bad = 0, None
    for x in carriers:
        n += 1
        lhs = rlift(delta(monad, x))
        rhs = delta(monad, functor.on_obj(x))
        if lhs != rhs:
            bad = bad or f"carrier {fmt_element(x.carrier.members)}"
    report.record("preserves unit graph", bad is None, n, bad)

    n, bad = 0, None
    for x in carriers:
        for y in carriers:
            for z in carriers:
                rels_xy = _relations(backend, x, y, budget)
                rels_yz = _relations(backend, y, z, budget)
                for r in rels_xy:
                    for s in rels_yz:
                        n += 1
                        lhs = rlift(rel_compose(s, r))
                        rhs = rel_compose(rlift(s), rlift(r))
                        if lhs != rhs:
                            bad = bad or (
                                f"R={fmt_element(r.pairs)}, S={fmt_element(s.pairs)}"
                            )
    report.record("preserves composition", bad is None, n, bad)
    return report


def _relations(backend: str, left: FinPoset, right: FinPoset, budget: int) -> list:
    fibre = relation_fibre(left, right)
    return [Relation(backend, left, right, p, check=False)
            for p in _fibre_elements(backend, fibre, budget)]


# squares and the change-of-base condition


class Square:
    """Commuting square of mappings; top/left share a corner, so do right/bottom."""

    __slots__ = ("x", "y", "z", "zp", "top", "left", "right", "bottom")

    def __init__(self, x, y, z, zp, top: Mapping, left: Mapping,
                 right: Mapping, bottom: Mapping):
        x, y, z, zp = (as_poset(c) for c in (x, y, z, zp))
        for v in x:
            if right[top[v]] != bottom[left[v]]:
                raise NotCommuting(f"square disagrees at {fmt_element(v)}")
        for name, val in (("x", x), ("y", y), ("z", z), ("zp", zp),
                          ("top", dict(top)), ("left", dict(left)),
                          ("right", dict(right)), ("bottom", dict(bottom))):
            object.__setattr__(self, name, val)

    def __setattr__(self, name, value):
        raise AttributeError("Square is immutable")


def is_weak_pullback(square: Square) -> bool:
    """Every matching corner pair is hit by some top-left element."""
    hit = {(square.top[v], square.left[v]) for v in square.x}
    buckets: dict = {}
    for z in square.z:
        buckets.setdefault(square.bottom[z], []).append(z)
    for y in square.y:
        for z in buckets.get(square.right[y], ()):
            if (y, z) not in hit:
                return False
    return True


def check_beck_chevalley(square: Square, backend: str,
                         budget: int = DEFAULT_BUDGET) -> LawReport:
    """Direct image along the bottom then reindex along the right leg
    equals reindex along the left then direct image along the top.

    Small fibres are enumerated in full.  Beyond the budget the check
    runs over the empty predicate and every principal generator, which
    is exhaustive: image, preimage and up-closure are computed
    pointwise, so both sides send a union of generators to the union of
    the results.  That distribution is itself re-checked on consecutive
    generator pairs."""
    report = LawReport(f"change of base ({backend})")

    def lhs(pred):
        return reindex(square.right, square.y,
                       direct_image(square.bottom, square.zp, pred))

    def rhs(pred):
        return direct_image(square.top, square.y,
                            reindex(square.left, square.x, pred))

    full = 2 ** len(square.z) <= budget
    if full:
        families = list(_fibre_elements(backend, square.z, budget))
        note = ""
    else:
        families = [frozenset()] + [
            square.z.up_set(v) if backend == "pos" else frozenset([v])
            for v in square.z
        ]
        note = "principal generators; both sides are pointwise, so unions follow"
    family = [Predicate(backend, square.z, members, check=False)
              for members in families]

    n, bad = 0, None
    values = []
    for pred in family:
        n += 1
        left_side, right_side = lhs(pred), rhs(pred)
        values.append((left_side.members, right_side.members))
        if left_side != right_side:
            bad = bad or f"P={fmt_element(pred.members)}: " \
                f"{fmt_element(left_side.members)} vs {fmt_element(right_side.members)}"
    report.record("exchange of image and preimage", bad is None, n, bad, note=note)

    if not full:
        n, bad = 0, None
        for i, (first, second) in enumerate(zip(family, family[1:])):
            n += 1
            union = Predicate(backend, square.z, first.members | second.members,
                              check=False)
            if lhs(union).members != values[i][0] | values[i + 1][0] \
                    or rhs(union).members != values[i][1] | values[i + 1][1]:
                bad = bad or f"P={fmt_element(first.members)}, " \
                    f"Q={fmt_element(second.members)}"
        report.record("both sides distribute over generator joins",
                      bad is None, n, bad)
    return report


def lambda_square(functor: FiniteFunctor, mapping: Mapping, dom, cod,
                  other) -> Square:
    """Square pairing the F-projection maps across a substitution in the
    left leg of the relation fibre; these are the squares the candidate
    law's naturality reduces to."""
    dom, cod, other = as_poset(dom), as_poset(cod), as_poset(other)
    top, f_fib_dom, pair_dom = lambda_pairing(functor, dom, other)
    bottom, f_fib_cod, pair_cod = lambda_pairing(functor, cod, other)
    fib_dom = relation_fibre(dom, other)
    fib_cod = relation_fibre(cod, other)
    shifted = {(v, w): (mapping[v], w) for (v, w) in fib_dom}
    left = functor.on_map(shifted, fib_dom, fib_cod)
    ff = functor.on_map(mapping, dom, cod)
    right = {(u, w): (ff[u], w) for (u, w) in pair_dom}
    return Square(f_fib_dom, pair_dom, f_fib_cod, pair_cod, top, left, right, bottom)


def non_pullback_square() -> Square:
    """Commuting but not a weak pullback; the exchange law fails on it."""
    x = discrete(FinSet(["x0"]))
    y = discrete(FinSet(["a", "b"]))
    z = discrete(FinSet(["c"]))
    zp = discrete(FinSet(["*"]))
    return Square(x, y, z, zp,
                  top={"x0": "a"}, left={"x0": "c"},
                  right={"a": "*", "b": "*"}, bottom={"c": "*"})


def check_fabric(backend: str, carriers, budget: int = DEFAULT_BUDGET) -> LawReport:
    """Structural layer: the graph bijection, the image/preimage adjunction,
    and the two ways the graph map interacts with composition."""
    monad = monad_for(backend)
    report = LawReport(f"indexed fabric ({backend})")
    carriers = [as_poset(c) for c in carriers]

    n, bad = 0, None
    for x in carriers:
        for y in carriers:
            for arrow in enumerate_kl_arrows(x, y, backend, budget):
                n += 1
                if theta_inv(theta(arrow)) != arrow:
                    bad = bad or f"arrow {arrow!r}"
            for rel in _relations(backend, x, y, budget):
                n += 1
                if theta(theta_inv(rel)) != rel:
                    bad = bad or f"relation {fmt_element(rel.pairs)}"
    report.record("graph map is a bijection", bad is None, n, bad)

    n, bad = 0, None
    for x in carriers:
        for y in carriers:
            maps = monotone_maps(x, y) if backend == "pos" else \
                all_maps(x.carrier, y.carrier)
            px = _fibre_elements(backend, x, budget)
            py = _fibre_elements(backend, y, budget)
            for f in maps:
                for pm in px:
                    p = Predicate(backend, x, pm, check=False)
                    img = direct_image(f, y, p).members
                    for qm in py:
                        n += 1
                        q = Predicate(backend, y, qm, check=False)
                        back = reindex(f, x, q).members
                        if (img <= qm) != (pm <= back):
                            bad = bad or f"f={f!r}, P={fmt_element(pm)}, Q={fmt_element(qm)}"
    report.record("image left adjoint to preimage", bad is None, n, bad)

    n, bad = 0, None
    for x in carriers:
        for y in carriers:
            for z in carriers:
                rels = _relations(backend, y, z, budget)
                maps = monotone_maps(x, y) if backend == "pos" else \
                    all_maps(x.carrier, y.carrier)
                for f in maps:
                    shift = {(v, w): (f[v], w) for v in x for w in z}
                    for rel in rels:
                        n += 1
                        arrow = theta_inv(rel)
                        pre = _mk_kl(backend, x, z,
                                     {v: arrow.table[f[v]] for v in x})
                        lhs = theta(pre).pairs
                        rhs = reindex(shift, relation_fibre(x, z),
                                      rel.as_predicate()).members
                        if lhs != rhs:
                            bad = bad or f"f={f!r}, R={fmt_element(rel.pairs)}"
    report.record("precomposition is reindexing", bad is None, n, bad)

    n, bad = 0, None
    for x in carriers:
        for y in carriers:
            for z in carriers:
                rels = _relations(backend, x, y, budget)
                maps = monotone_maps(y, z) if backend == "pos" else \
                    all_maps(y.carrier, z.carrier)
                ty = monad.carrier(y, budget)
                tz = monad.carrier(z, budget)
                for g in maps:
                    shift = {(v, w): (v, g[w]) for v in x for w in y}
                    for rel in rels:
                        n += 1
                        arrow = theta_inv(rel)
                        post = _mk_kl(backend, x, z,
                                      {v: monad.map(g, arrow.table[v], y, z)
                                       for v in x})
                        lhs = theta(post).pairs
                        rhs = direct_image(shift, relation_fibre(x, z),
                                           rel.as_predicate()).members
                        if lhs != rhs:
                            bad = bad or f"g={g!r}, R={fmt_element(rel.pairs)}"
    report.record("postcomposition is direct image", bad is None, n, bad)

    n, bad = 0, None
    for x in carriers:
        for y in carriers:
            for z in carriers:
                for r in _relations(backend, x, y, budget):
                    for s in _relations(backend, y, z, budget):
                        n += 1
                        composite = rel_compose(s, r).pairs
                        plain = {(v, w) for (v, u) in r.pairs
                                 for (u2, w) in s.pairs if u2 == u}
                        if composite != frozenset(plain):
                            bad = bad or f"R={fmt_element(r.pairs)}, S={fmt_element(s.pairs)}"
    report.record("composite matches relational composition", bad is None, n, bad)
    return report
