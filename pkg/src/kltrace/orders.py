"""Finite carriers and finite posets.

Carrier elements are strings, pairs (tuples), tagged coproduct values
(:class:`In`) or frozensets; every carrier keeps its elements in one
canonical order so downstream output is byte-stable.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import permutations, product as iter_product
from typing import Iterable, Mapping

from .errors import (
    AntisymmetryViolation,
    CarrierTooLarge,
    DanglingReference,
    NotDownClosed,
    NotUpClosed,
)

DEFAULT_BUDGET = 1 << 16


class In:
    """Tagged element of a binary coproduct; side 0 is left, 1 is right."""

    __slots__ = ("side", "value", "_hash")

    def __init__(self, side: int, value):
        if side not in (0, 1):
            raise ValueError("side must be 0 or 1")
        object.__setattr__(self, "side", side)
        object.__setattr__(self, "value", value)
        object.__setattr__(self, "_hash", hash((In, side, value)))

    def __setattr__(self, name, value):
        raise AttributeError("In is immutable")

    def __eq__(self, other):
        return isinstance(other, In) and (self.side, self.value) == (other.side, other.value)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"{'inl' if self.side == 0 else 'inr'}({self.value!r})"


def inl(value) -> In:
    return In(0, value)


def inr(value) -> In:
    return In(1, value)


def canon_key(value):
    """Total sort key over all element shapes a carrier may hold."""
    if isinstance(value, str):
        return (0, value)
    if isinstance(value, In):
        return (1, value.side, canon_key(value.value))
    if isinstance(value, tuple):
        return (2, tuple(canon_key(v) for v in value))
    if isinstance(value, frozenset):
        return (3, tuple(sorted(canon_key(v) for v in value)))
    raise TypeError(f"unsupported carrier element: {value!r}")


def canon_sorted(values) -> tuple:
    return tuple(sorted(values, key=canon_key))


def fmt_element(value) -> str:
    """Render an element the way reports print it."""
    if isinstance(value, str):
        return value
    if isinstance(value, In):
        return f"{'inl' if value.side == 0 else 'inr'}({fmt_element(value.value)})"
    if isinstance(value, tuple):
        return "(" + ", ".join(fmt_element(v) for v in value) + ")"
    if isinstance(value, frozenset):
        return "{" + ",".join(fmt_element(v) for v in canon_sorted(value)) + "}"
    return repr(value)


class FinSet:
    """Finite carrier with a fixed canonical element order."""

    __slots__ = ("elements", "_members")

    def __init__(self, elements: Iterable):
        elems = canon_sorted(set(elements))
        object.__setattr__(self, "elements", elems)
        object.__setattr__(self, "_members", frozenset(elems))

    def __setattr__(self, name, value):
        raise AttributeError("FinSet is immutable")

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)

    def __contains__(self, value):
        return value in self._members

    def __eq__(self, other):
        return self is other or (isinstance(other, FinSet) and self.elements == other.elements)

    def __hash__(self):
        return hash((FinSet, self.elements))

    def __repr__(self):
        return "FinSet({" + ", ".join(fmt_element(v) for v in self.elements) + "})"

    @property
    def members(self) -> frozenset:
        return self._members


def _close(carrier: FinSet, pairs) -> frozenset:
    """Reflexive-transitive closure; raises on an antisymmetry break."""
    above = {x: {x} for x in carrier}
    for lo, hi in pairs:
        if lo not in carrier or hi not in carrier:
            raise DanglingReference(f"order pair ({lo!r}, {hi!r}) outside carrier")
        above[lo].add(hi)
    changed = True
    while changed:
        changed = False
        for x, ups in above.items():
            grown = set().union(*(above[y] for y in ups))
            if not grown <= ups:
                ups |= grown
                changed = True
    for x, ups in above.items():
        for y in ups:
            if y != x and x in above[y]:
                raise AntisymmetryViolation(
                    f"{fmt_element(x)} <= {fmt_element(y)} <= {fmt_element(x)}"
                )
    return frozenset((x, y) for x, ups in above.items() for y in ups)


class FinPoset:
    """Finite poset; the order is stored as its full closure."""

    __slots__ = ("carrier", "pairs", "_cones")

    def __init__(self, carrier: FinSet, pairs: Iterable[tuple] = ()):
        object.__setattr__(self, "carrier", carrier)
        object.__setattr__(self, "pairs", _close(carrier, pairs))
        object.__setattr__(self, "_cones", {})

    def __setattr__(self, name, value):
        raise AttributeError("FinPoset is immutable")

    def __iter__(self):
        return iter(self.carrier)

    def __len__(self):
        return len(self.carrier)

    def __contains__(self, value):
        return value in self.carrier

    def __eq__(self, other):
        return self is other or (
            isinstance(other, FinPoset)
            and self.carrier == other.carrier
            and self.pairs == other.pairs
        )

    def __hash__(self):
        return hash((FinPoset, self.carrier, self.pairs))

    def __repr__(self):
        strict = sorted(
            (a, b) for a, b in self.pairs if a != b
        )
        rel = ", ".join(f"{fmt_element(a)}<={fmt_element(b)}" for a, b in strict)
        return f"FinPoset({self.carrier!r}; {rel})"

    @property
    def elements(self) -> tuple:
        return self.carrier.elements

    def leq(self, a, b) -> bool:
        return (a, b) in self.pairs

    def down_set(self, x) -> frozenset:
        got = self._cones.get((0, x))
        if got is None:
            got = frozenset(y for y in self.carrier if self.leq(y, x))
            self._cones[(0, x)] = got
        return got

    def up_set(self, x) -> frozenset:
        got = self._cones.get((1, x))
        if got is None:
            got = frozenset(y for y in self.carrier if self.leq(x, y))
            self._cones[(1, x)] = got
        return got

    def is_discrete(self) -> bool:
        return all(a == b for a, b in self.pairs)


def closure(carrier: FinSet, pairs: Iterable[tuple]) -> FinPoset:
    """Build the poset generated by `pairs` over `carrier`."""
    return FinPoset(carrier, pairs)


def poset_from_closure(carrier: FinSet, pairs: frozenset) -> FinPoset:
    """Wrap an order already known to be reflexive-transitive closed."""
    result = object.__new__(FinPoset)
    object.__setattr__(result, "carrier", carrier)
    object.__setattr__(result, "pairs", frozenset(pairs))
    object.__setattr__(result, "_cones", {})
    return result


@lru_cache(maxsize=4096)
def _discrete_cached(carrier: FinSet) -> FinPoset:
    return poset_from_closure(carrier, frozenset((x, x) for x in carrier))


def discrete(elements) -> FinPoset:
    carrier = elements if isinstance(elements, FinSet) else FinSet(elements)
    return _discrete_cached(carrier)


def chain(elements_bottom_up: Iterable) -> FinPoset:
    """Total order listing elements from bottom to top."""
    elems = tuple(elements_bottom_up)
    pairs = [(elems[i], elems[i + 1]) for i in range(len(elems) - 1)]
    return FinPoset(FinSet(elems), pairs)


def dual(poset: FinPoset) -> FinPoset:
    return poset_from_closure(poset.carrier, frozenset((b, a) for a, b in poset.pairs))


@lru_cache(maxsize=4096)
def product(p: FinPoset, q: FinPoset) -> FinPoset:
    """Componentwise order on pairs."""
    carrier = FinSet((x, y) for x in p for y in q)
    pairs = frozenset(
        ((x1, y1), (x2, y2))
        for (x1, x2) in p.pairs
        for (y1, y2) in q.pairs
    )
    return poset_from_closure(carrier, pairs)


@lru_cache(maxsize=4096)
def coproduct(p: FinPoset, q: FinPoset) -> FinPoset:
    """Disjoint union; elements from different summands are incomparable."""
    carrier = FinSet([inl(x) for x in p] + [inr(y) for y in q])
    pairs = frozenset(
        {(inl(a), inl(b)) for a, b in p.pairs}
        | {(inr(a), inr(b)) for a, b in q.pairs}
    )
    return poset_from_closure(carrier, pairs)


def down_close(poset: FinPoset, members: Iterable) -> frozenset:
    out = set()
    for x in members:
        if x not in poset:
            raise KeyError(f"{fmt_element(x)} outside carrier")
        out |= poset.down_set(x)
    return frozenset(out)


def up_close(poset: FinPoset, members: Iterable) -> frozenset:
    out = set()
    for x in members:
        if x not in poset:
            raise KeyError(f"{fmt_element(x)} outside carrier")
        out |= poset.up_set(x)
    return frozenset(out)


def is_down_closed(poset: FinPoset, members: frozenset) -> bool:
    return all(y in members for x in members for y in poset.down_set(x))


def is_up_closed(poset: FinPoset, members: frozenset) -> bool:
    return all(y in members for x in members for y in poset.up_set(x))


class Subset:
    """Subset of a carrier whose closure claims are verified, never assumed."""

    __slots__ = ("parent", "members")

    def __init__(self, parent, members: Iterable, *, down_closed=False, up_closed=False):
        members = frozenset(members)
        universe = parent.carrier if isinstance(parent, FinPoset) else parent
        stray = members - universe.members
        if stray:
            raise KeyError(f"{fmt_element(next(iter(stray)))} outside carrier")
        if down_closed and isinstance(parent, FinPoset) and not is_down_closed(parent, members):
            raise NotDownClosed(fmt_element(members))
        if up_closed and isinstance(parent, FinPoset) and not is_up_closed(parent, members):
            raise NotUpClosed(fmt_element(members))
        object.__setattr__(self, "parent", parent)
        object.__setattr__(self, "members", members)

    def __setattr__(self, name, value):
        raise AttributeError("Subset is immutable")

    def __iter__(self):
        return iter(canon_sorted(self.members))

    def __contains__(self, value):
        return value in self.members

    def __eq__(self, other):
        return (
            isinstance(other, Subset)
            and self.parent == other.parent
            and self.members == other.members
        )

    def __hash__(self):
        return hash((Subset, self.parent, self.members))

    def __repr__(self):
        return f"Subset({fmt_element(self.members)})"


def is_monotone(mapping: Mapping, dom: FinPoset, cod: FinPoset) -> bool:
    return all(cod.leq(mapping[a], mapping[b]) for a, b in dom.pairs)


def guard_budget(count: int, budget: int = DEFAULT_BUDGET, what: str = "enumeration"):
    if count > budget:
        raise CarrierTooLarge(f"{what} needs {count} instances, budget is {budget}")


def subsets(carrier, budget: int = DEFAULT_BUDGET) -> tuple:
    """All subsets, in binary-counter order over the carrier's element order.

    The order is deterministic; callers needing the fully sorted form wrap
    the result in a FinSet.
    """
    elements = tuple(carrier)
    guard_budget(1 << len(elements), budget, "powerset")
    out = [frozenset()]
    for x in elements:
        out.extend([s | {x} for s in out])
    return tuple(out)


def downsets(poset: FinPoset, budget: int = DEFAULT_BUDGET) -> tuple:
    """All down-closed subsets, canonically ordered.

    Elements are added along a linear extension, so each downset is built
    exactly once and the cost is proportional to the output size.
    """
    extension = sorted(poset.carrier, key=lambda x: (len(poset.down_set(x)), canon_key(x)))
    required = {x: poset.down_set(x) - {x} for x in poset.carrier}
    acc = [frozenset()]
    for x in extension:
        acc.extend([s | {x} for s in acc if required[x] <= s])
        guard_budget(len(acc), budget, "downset enumeration")
    return canon_sorted(acc)


def upsets(poset: FinPoset, budget: int = DEFAULT_BUDGET) -> tuple:
    return downsets(dual(poset), budget)


def all_maps(dom: FinSet, cod: FinSet, budget: int = DEFAULT_BUDGET):
    """All functions dom -> cod as dicts, in canonical order."""
    if len(dom) == 0:
        yield {}
        return
    guard_budget(len(cod) ** len(dom), budget, "function space")
    for choice in iter_product(cod.elements, repeat=len(dom)):
        yield dict(zip(dom.elements, choice))


def monotone_maps(dom: FinPoset, cod: FinPoset, budget: int = DEFAULT_BUDGET):
    for f in all_maps(dom.carrier, cod.carrier, budget):
        if is_monotone(f, dom, cod):
            yield f


def posets_on(atoms: Iterable) -> tuple:
    """All partial orders on the given atoms, one per isomorphism class."""
    elems = canon_sorted(atoms)
    n = len(elems)
    off_diag = [(a, b) for a in elems for b in elems if a != b]
    seen = set()
    out = []
    for bits in range(1 << len(off_diag)):
        rel = {p for i, p in enumerate(off_diag) if bits >> i & 1}
        full = rel | {(a, a) for a in elems}
        if any((b, a) in rel for a, b in rel):
            continue
        if any((a, d) not in full for a, b in full for c, d in full if b == c):
            continue
        canon = min(
            tuple(sorted((perm[a], perm[b]) for a, b in rel))
            for perm in (dict(zip(elems, img)) for img in permutations(elems))
        )
        if canon not in seen:
            seen.add(canon)
            out.append(FinPoset(FinSet(elems), rel))
    return tuple(out)
