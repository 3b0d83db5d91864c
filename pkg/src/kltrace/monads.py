"""The two set monads the library is built on.

Backend "set": subsets of a plain carrier, unit is the singleton, mult is
union.  Backend "pos": down-closed subsets of a poset, unit is the
principal downset, mult is union, and the functor action closes the image
downward.  Both are presented pointwise so law checking can enumerate.
"""

from __future__ import annotations

from typing import Mapping

from .errors import NotDownClosed, NotMonotone
from .orders import (
    DEFAULT_BUDGET,
    FinPoset,
    FinSet,
    canon_sorted,
    discrete,
    downsets,
    fmt_element,
    guard_budget,
    is_down_closed,
    is_monotone,
    poset_from_closure,
    subsets,
)
from .report import LawReport


def as_poset(carrier) -> FinPoset:
    return carrier if isinstance(carrier, FinPoset) else discrete(carrier)


# powerset


def p_unit(x) -> frozenset:
    return frozenset({x})


def p_map(f: Mapping, value: frozenset) -> frozenset:
    return frozenset(f[x] for x in value)


def p_mult(family: frozenset) -> frozenset:
    return frozenset().union(*family) if family else frozenset()


def p_carrier(carrier, budget: int = DEFAULT_BUDGET) -> FinPoset:
    """All subsets as a discrete carrier."""
    carrier = as_poset(carrier)
    return discrete(FinSet(subsets(carrier.carrier, budget)))


# downsets


def pd_unit(poset: FinPoset, x) -> frozenset:
    return poset.down_set(x)


def pd_map(f: Mapping, value: frozenset, dom: FinPoset, cod: FinPoset) -> frozenset:
    if not is_down_closed(dom, value):
        raise NotDownClosed(fmt_element(value))
    if not is_monotone(f, dom, cod):
        raise NotMonotone("functor action needs a monotone mapping")
    out = set()
    for x in value:
        out |= cod.down_set(f[x])
    return frozenset(out)


def pd_mult(family: frozenset, poset: FinPoset) -> frozenset:
    for member in family:
        if not is_down_closed(poset, member):
            raise NotDownClosed(fmt_element(member))
    return p_mult(family)


def pd_carrier(poset: FinPoset, budget: int = DEFAULT_BUDGET) -> FinPoset:
    """All downsets, ordered by inclusion."""
    elems = downsets(poset, budget)
    pairs = frozenset((s, t) for s in elems for t in elems if s <= t)
    return poset_from_closure(FinSet(elems), pairs)


class Monad:
    """Uniform view of the two monads for generic plumbing."""

    __slots__ = ("backend",)

    def __init__(self, backend: str):
        if backend not in ("set", "pos"):
            raise ValueError(f"unknown backend {backend!r}")
        object.__setattr__(self, "backend", backend)

    def __setattr__(self, name, value):
        raise AttributeError("Monad is immutable")

    def __repr__(self):
        return f"Monad({self.backend!r})"

    def carrier(self, c, budget: int = DEFAULT_BUDGET) -> FinPoset:
        c = as_poset(c)
        return p_carrier(c, budget) if self.backend == "set" else pd_carrier(c, budget)

    def unit(self, c: FinPoset, x) -> frozenset:
        return p_unit(x) if self.backend == "set" else pd_unit(c, x)

    def map(self, f: Mapping, value: frozenset, dom: FinPoset, cod: FinPoset) -> frozenset:
        return p_map(f, value) if self.backend == "set" else pd_map(f, value, dom, cod)

    def mult(self, family: frozenset, c: FinPoset) -> frozenset:
        return p_mult(family) if self.backend == "set" else pd_mult(family, c)

    def is_value(self, value: frozenset, c: FinPoset) -> bool:
        if not value <= c.carrier.members:
            return False
        return self.backend == "set" or is_down_closed(c, value)


POWERSET = Monad("set")
DOWNSET = Monad("pos")


def monad_for(backend: str) -> Monad:
    return Monad(backend)


def _assoc_domain(monad: Monad, tts, tt_incl, budget):
    """Triple-nested inputs for the associativity check.

    Full enumeration is impossible beyond tiny carriers (the triple layer
    is doubly exponential), so the domain degrades in documented steps:
    everything, then all <=2-generated members, then principal members
    only.  Every shipped mult is a union and unions are determined by the
    <=2-generated members, so nothing is lost on the shipped instances.
    """
    n = len(tts)
    if monad.backend == "set":
        if (1 << n) <= budget:
            return list(subsets(tts, budget)), "full triple layer"
        if n * n <= budget:
            singles = [frozenset({f}) for f in tts]
            pairs = [frozenset({f, g}) for i, f in enumerate(tts) for g in tts[i + 1 :]]
            return singles + pairs, "pair-generated members"
        return [frozenset({f}) for f in tts], "principal members"
    principal = {f: frozenset(g for g in tts if tt_incl(g, f)) for f in tts}
    if n <= 16:
        tt_pairs = frozenset((s, t) for s in tts for t in tts if tt_incl(s, t))
        tt_poset = poset_from_closure(FinSet(tts), tt_pairs)
        return list(downsets(tt_poset, budget)), "full triple layer"
    if n <= 128:
        singles = [principal[f] for f in tts]
        pairs = [principal[f] | principal[g] for i, f in enumerate(tts) for g in tts[i + 1 :]]
        return singles + pairs, "pair-generated members"
    return [principal[f] for f in tts], "principal members"


def check_monad_laws(
    monad: Monad,
    carrier,
    *,
    budget: int = DEFAULT_BUDGET,
    mult_override=None,
) -> LawReport:
    """Unit and associativity checks, enumerated over the stated domains."""
    base = as_poset(carrier)
    t_poset = monad.carrier(base, budget)
    ts = list(t_poset.carrier)
    # the double layer is only ever iterated, so skip carrier canonicalization
    if monad.backend == "set":
        tts = list(subsets(ts, budget))
    else:
        tts = list(downsets(t_poset, budget))
    mult = mult_override if mult_override is not None else p_mult
    report = LawReport(f"monad laws ({monad.backend}, |X|={len(base)})")

    def unit_t(s):
        # unit at object TX
        if monad.backend == "set":
            return frozenset({s})
        return frozenset(t for t in ts if t <= s)

    def map_unit(s):
        # T(unit) at a value s in TX
        if monad.backend == "set":
            return frozenset(frozenset({x}) for x in s)
        units = [base.down_set(x) for x in s]
        return frozenset(t for t in ts if any(t <= u for u in units))

    def map_mult(xi):
        # T(mult) at a value xi in TTTX
        image = [mult(f) for f in xi]
        if monad.backend == "set":
            return frozenset(image)
        return frozenset(t for t in ts if any(t <= u for u in image))

    bad = next((s for s in ts if mult(unit_t(s)) != s), None)
    report.record(
        "left unit", bad is None, len(ts),
        None if bad is None else fmt_element(bad),
    )
    bad = next((s for s in ts if mult(map_unit(s)) != s), None)
    report.record(
        "right unit", bad is None, len(ts),
        None if bad is None else fmt_element(bad),
    )

    def tt_incl(s, t):
        return s <= t

    domain, note = _assoc_domain(monad, tts, tt_incl, budget)
    bad = next(
        (xi for xi in domain if mult(mult(xi)) != mult(map_mult(xi))),
        None,
    )
    report.record(
        "associativity", bad is None, len(domain),
        None if bad is None else fmt_element(bad),
        note=note,
    )
    return report
