"""Quantitative side: truncated-addition quantale on [0,1], the
quantale-valued predicate monad, finite-support distributions, the
expectation lifting, and the transport map that sends a distribution
over predicates to the best-coupling cost function on distributions.

All arithmetic is exact rational.  The transportation problem is solved
by primal network simplex on the bipartite supply/demand graph with
Bland's anti-cycling pivot rule, so optima are exact and law checks can
demand equality.  The objective is the plain weighted sum (costs and
masses keep it inside [0,1] on their own); truncation enters only
through the quantale operations themselves.

The transport map lands in functions on an infinite space, so it is
surfaced as a queryable, memoised partial evaluation and its laws are
checked at caller-supplied probe distributions only; reports say at how
many probes a law was verified.
"""

from __future__ import annotations

from collections import defaultdict
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .errors import CarrierMismatch, CarrierTooLarge, InfeasibleMass
from .orders import FinSet, canon_key, canon_sorted
from .report import LawReport

ZERO = Fraction(0)
ONE = Fraction(1)

MAX_PREDICATE_SUPPORT = 6


def as_omega(value) -> Fraction:
    value = Fraction(value)
    if not ZERO <= value <= ONE:
        raise ValueError(f"{value} is outside [0, 1]")
    return value


def oplus(r: Fraction, s: Fraction) -> Fraction:
    """Truncated addition."""
    return min(r + s, ONE)


def omega_inf(values: Iterable[Fraction]) -> Fraction:
    """Numeric infimum; the empty infimum is the top cost 1."""
    return min(values, default=ONE)


def _tkey(value):
    """Deterministic sort key across the element kinds used here."""
    if isinstance(value, Fraction):
        return (0, value)
    if hasattr(value, "sort_key"):
        return (1, value.sort_key)
    if isinstance(value, tuple):
        return (2, tuple(_tkey(v) for v in value))
    return (3, canon_key(value))


class OmegaPredicate:
    """Total cost function on a finite carrier."""

    __slots__ = ("carrier", "weights", "sort_key")

    def __init__(self, carrier: FinSet, weights: Mapping):
        if set(weights) != carrier.members:
            raise CarrierMismatch("weights must cover the carrier exactly")
        table = tuple((x, as_omega(weights[x])) for x in carrier)
        object.__setattr__(self, "carrier", carrier)
        object.__setattr__(self, "weights", table)
        object.__setattr__(self, "sort_key", tuple((canon_key(x), w) for x, w in table))

    def __setattr__(self, name, value):
        raise AttributeError("OmegaPredicate is immutable")

    def at(self, x) -> Fraction:
        for y, w in self.weights:
            if y == x:
                return w
        raise KeyError(x)

    def as_dict(self) -> dict:
        return dict(self.weights)

    def __eq__(self, other):
        return isinstance(other, OmegaPredicate) and self.weights == other.weights \
            and self.carrier == other.carrier

    def __hash__(self):
        return hash((OmegaPredicate, self.weights))

    def __repr__(self):
        body = ", ".join(f"{x}:{w}" for x, w in self.weights)
        return f"OmegaPredicate({body})"


def pq_unit(carrier: FinSet, x) -> OmegaPredicate:
    """Zero cost at the point itself, top cost elsewhere."""
    if x not in carrier.members:
        raise CarrierMismatch(f"{x!r} not in carrier")
    return OmegaPredicate(carrier, {y: ZERO if y == x else ONE for y in carrier})


def constant_predicate(carrier: FinSet, value) -> OmegaPredicate:
    value = as_omega(value)
    return OmegaPredicate(carrier, {y: value for y in carrier})


def pq_map(f: Mapping, pred: OmegaPredicate, cod: FinSet) -> OmegaPredicate:
    """Pointwise infimum over preimages; empty preimage costs 1."""
    fibres = defaultdict(list)
    for x in pred.carrier:
        fibres[f[x]].append(pred.at(x))
    return OmegaPredicate(cod, {y: omega_inf(fibres.get(y, ())) for y in cod})


def pq_kl_id(carrier: FinSet) -> dict:
    return {x: pq_unit(carrier, x) for x in carrier}


def pq_kl_compose(g: Mapping, f: Mapping) -> dict:
    """The (min, truncated-plus) matrix product."""
    out = {}
    for x, row in f.items():
        mid = row.carrier
        cod = next(iter(g.values())).carrier
        if set(mid.members) != {y for y in g}:
            raise CarrierMismatch("middle carriers differ")
        out[x] = OmegaPredicate(cod, {
            z: omega_inf(oplus(row.at(y), g[y].at(z)) for y in mid)
            for z in cod
        })
    return out


class Dist:
    """Finite-support probability distribution with exact rational masses."""

    __slots__ = ("entries", "sort_key")

    def __init__(self, entries):
        acc = defaultdict(Fraction)
        for x, mass in dict(entries).items() if isinstance(entries, Mapping) else entries:
            mass = Fraction(mass)
            if mass < 0:
                raise InfeasibleMass(f"negative mass {mass} at {x!r}")
            if mass > 0:
                acc[x] += mass
        if sum(acc.values(), ZERO) != ONE:
            raise InfeasibleMass(f"total mass {sum(acc.values(), ZERO)} != 1")
        table = tuple(sorted(acc.items(), key=lambda kv: _tkey(kv[0])))
        object.__setattr__(self, "entries", table)
        object.__setattr__(self, "sort_key", tuple((_tkey(x), m) for x, m in table))

    def __setattr__(self, name, value):
        raise AttributeError("Dist is immutable")

    @property
    def support(self) -> tuple:
        return tuple(x for x, _ in self.entries)

    def mass(self, x) -> Fraction:
        for y, m in self.entries:
            if y == x:
                return m
        return ZERO

    def push(self, f: Mapping) -> "Dist":
        """Image distribution along a mapping."""
        acc = defaultdict(Fraction)
        for x, m in self.entries:
            acc[f[x]] += m
        return Dist(acc)

    def __eq__(self, other):
        return isinstance(other, Dist) and self.entries == other.entries

    def __hash__(self):
        return hash((Dist, self.entries))

    def __repr__(self):
        body = ", ".join(f"{x}:{m}" for x, m in self.entries)
        return f"Dist({body})"


def point_mass(x) -> Dist:
    return Dist([(x, ONE)])


def product_dist(mu: Dist, nu: Dist) -> Dist:
    """Independent coupling."""
    return Dist([((x, y), mx * my) for x, mx in mu.entries for y, my in nu.entries])


def marginals(coupling: Dist) -> tuple[Dist, Dist]:
    """Row and column sums of a distribution over pairs."""
    rows, cols = defaultdict(Fraction), defaultdict(Fraction)
    for (x, y), m in coupling.entries:
        rows[x] += m
        cols[y] += m
    return Dist(rows), Dist(cols)


class FinSupp:
    """Cost function on an infinite space: finitely many named values,
    top cost 1 everywhere else."""

    __slots__ = ("entries", "sort_key")

    def __init__(self, entries):
        table = tuple(sorted(
            ((k, as_omega(v)) for k, v in dict(entries).items() if Fraction(v) != ONE),
            key=lambda kv: _tkey(kv[0])))
        object.__setattr__(self, "entries", table)
        object.__setattr__(self, "sort_key", tuple((_tkey(k), v) for k, v in table))

    def __setattr__(self, name, value):
        raise AttributeError("FinSupp is immutable")

    def at(self, key) -> Fraction:
        for k, v in self.entries:
            if k == key:
                return v
        return ONE

    def __eq__(self, other):
        return isinstance(other, FinSupp) and self.entries == other.entries

    def __hash__(self):
        return hash((FinSupp, self.entries))

    def __repr__(self):
        body = ", ".join(f"{k!r}:{v}" for k, v in self.entries)
        return f"FinSupp({body})"


def mult_predicate(q: FinSupp, carrier: FinSet) -> OmegaPredicate:
    """Monad multiplication collapsed onto a finite carrier: the infimum
    of named-cost plus member-cost; unnamed members contribute 1."""
    return OmegaPredicate(carrier, {
        x: omega_inf(oplus(v, g.at(x)) for g, v in q.entries) for x in carrier
    })


def expectation_lift(pred: OmegaPredicate, mu: Dist) -> Fraction:
    """Expected cost of a distribution; the shipped predicate lifting."""
    if not set(mu.support) <= pred.carrier.members:
        raise CarrierMismatch("distribution leaves the predicate's carrier")
    return sum((pred.at(x) * m for x, m in mu.entries), ZERO)


# exact transportation LP


def _nw_corner(a: list, b: list):
    """Initial basic solution; advances one index per step, so exactly
    len(a) + len(b) - 1 cells enter the basis (zero cells included)."""
    m, n = len(a), len(b)
    ra, rb = list(a), list(b)
    masses, basis = {}, []
    i = j = 0
    while True:
        give = min(ra[i], rb[j])
        masses[(i, j)] = give
        basis.append((i, j))
        ra[i] -= give
        rb[j] -= give
        if i == m - 1 and j == n - 1:
            return masses, basis
        if ra[i] == ZERO and i < m - 1:
            i += 1
        elif j < n - 1:
            j += 1
        else:
            i += 1


def _potentials(m: int, n: int, basis: set, cost) -> tuple[list, list]:
    rows_to, cols_to = defaultdict(list), defaultdict(list)
    for i, j in basis:
        rows_to[i].append(j)
        cols_to[j].append(i)
    u, v = [None] * m, [None] * n
    u[0] = ZERO
    stack = [(True, 0)]
    while stack:
        is_row, idx = stack.pop()
        if is_row:
            for j in rows_to[idx]:
                if v[j] is None:
                    v[j] = cost[idx][j] - u[idx]
                    stack.append((False, j))
        else:
            for i in cols_to[idx]:
                if u[i] is None:
                    u[i] = cost[i][idx] - v[idx]
                    stack.append((True, i))
    return u, v


def _basis_cycle(basis: set, entering: tuple) -> list:
    """The unique cycle the entering cell closes in the basis tree,
    returned with the entering cell first; odd positions lose mass."""
    si, sj = entering
    rows_to, cols_to = defaultdict(list), defaultdict(list)
    for i, j in basis:
        rows_to[i].append(j)
        cols_to[j].append(i)
    start, goal = (False, sj), (True, si)
    parent = {start: None}
    queue = [start]
    while queue:
        node = queue.pop(0)
        if node == goal:
            break
        is_row, idx = node
        for nxt in rows_to[idx] if is_row else cols_to[idx]:
            key = (not is_row, nxt)
            if key not in parent:
                parent[key] = node
                queue.append(key)
    path_nodes = [goal]
    while parent[path_nodes[-1]] is not None:
        path_nodes.append(parent[path_nodes[-1]])
    cells = [entering]
    for a, b in zip(path_nodes, path_nodes[1:]):
        (a_row, ai), (_, bi) = a, b
        cells.append((ai, bi) if a_row else (bi, ai))
    return cells


def _simplex(a: list, b: list, cost) -> tuple[Fraction, dict]:
    m, n = len(a), len(b)
    masses, basis_list = _nw_corner(a, b)
    basis = set(basis_list)
    while True:
        u, v = _potentials(m, n, basis, cost)
        entering = None
        for i in range(m):
            for j in range(n):
                if (i, j) not in basis and cost[i][j] - u[i] - v[j] < ZERO:
                    entering = (i, j)
                    break
            if entering:
                break
        if entering is None:
            break
        cycle = _basis_cycle(basis, entering)
        losers = cycle[1::2]
        step = min(masses[cell] for cell in losers)
        leaving = min(cell for cell in losers if masses[cell] == step)
        masses[entering] = ZERO
        for idx, cell in enumerate(cycle):
            masses[cell] += step if idx % 2 == 0 else -step
        del masses[leaving]
        basis.remove(leaving)
        basis.add(entering)
    value = sum((mass * cost[i][j] for (i, j), mass in masses.items()), ZERO)
    return value, masses


def solve_transport(supplies: Sequence, demands: Sequence,
                    cost: Callable) -> tuple[Fraction, Dist]:
    """Exact optimum of the transportation problem; the optimizing
    coupling comes back as a distribution over supply/demand pairs."""
    s_keys = [k for k, _ in supplies]
    d_keys = [k for k, _ in demands]
    a = [Fraction(mass) for _, mass in supplies]
    b = [Fraction(mass) for _, mass in demands]
    if sum(a, ZERO) != sum(b, ZERO):
        raise InfeasibleMass(f"supply {sum(a, ZERO)} != demand {sum(b, ZERO)}")
    matrix = [[Fraction(cost(sk, dk)) for dk in d_keys] for sk in s_keys]
    value, masses = _simplex(a, b, matrix)
    coupling = Dist([((s_keys[i], d_keys[j]), mass)
                     for (i, j), mass in masses.items() if mass > ZERO])
    return value, coupling


def _membership_cost(p, y) -> Fraction:
    return p.at(y)


def optimal_coupling_value(source: Dist, target: Dist,
                           cost: Callable = _membership_cost) -> tuple[Fraction, Dist]:
    """Best-coupling cost between a distribution over cost functions and
    a distribution over points (or any pair, given an explicit cost)."""
    return solve_transport(source.entries, target.entries, cost)


def coupling_vertices(a: Sequence[Fraction], b: Sequence[Fraction]):
    """All feasible basic solutions of the transportation polytope, via
    the spanning trees of the complete bipartite supply/demand graph."""
    from itertools import combinations

    m, n = len(a), len(b)
    cells = [(i, j) for i in range(m) for j in range(n)]
    for combo in combinations(cells, m + n - 1):
        degree = defaultdict(int)
        for i, j in combo:
            degree[(True, i)] += 1
            degree[(False, j)] += 1
        if len(degree) < m + n:
            continue
        remaining = {(True, i): Fraction(a[i]) for i in range(m)}
        remaining.update({(False, j): Fraction(b[j]) for j in range(n)})
        edges = set(combo)
        masses = {}
        feasible = True
        while edges:
            leaf_cell = None
            for i, j in sorted(edges):
                if degree[(True, i)] == 1:
                    leaf_cell, node, other = (i, j), (True, i), (False, j)
                    break
                if degree[(False, j)] == 1:
                    leaf_cell, node, other = (i, j), (False, j), (True, i)
                    break
            if leaf_cell is None:
                feasible = False
                break
            mass = remaining[node]
            if mass < ZERO:
                feasible = False
                break
            masses[leaf_cell] = mass
            remaining[node] -= mass
            remaining[other] -= mass
            for end in (node, other):
                degree[end] -= 1
            edges.remove(leaf_cell)
        if feasible and all(v >= ZERO for v in masses.values()):
            yield masses


def oracle_coupling_value(source: Dist, target: Dist,
                          cost: Callable = _membership_cost) -> Fraction:
    """Minimum over every vertex of the polytope; exponential, test-only."""
    s_keys = [k for k, _ in source.entries]
    d_keys = [k for k, _ in target.entries]
    a = [mass for _, mass in source.entries]
    b = [mass for _, mass in target.entries]
    best = None
    for masses in coupling_vertices(a, b):
        total = sum((mass * Fraction(cost(s_keys[i], d_keys[j]))
                     for (i, j), mass in masses.items()), ZERO)
        if best is None or total < best:
            best = total
    return best


class TransportMap:
    """Memoised partial evaluation of the best-coupling cost."""

    __slots__ = ("source", "_memo")

    def __init__(self, source: Dist):
        for p, _ in source.entries:
            size = len(p.carrier) if isinstance(p, OmegaPredicate) else len(p.entries)
            if size > MAX_PREDICATE_SUPPORT:
                raise CarrierTooLarge(
                    f"predicate support {size} > {MAX_PREDICATE_SUPPORT}"
                )
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "_memo", {})

    def __setattr__(self, name, value):
        raise AttributeError("TransportMap is immutable")

    def __call__(self, target: Dist) -> Fraction:
        if target not in self._memo:
            self._memo[target] = optimal_coupling_value(self.source, target)
        return self._memo[target][0]

    def coupling(self, target: Dist) -> Dist:
        self(target)
        return self._memo[target][1]


def theta_quantale(source: Dist) -> TransportMap:
    """The transport map at one source distribution over predicates."""
    return TransportMap(source)


def unit_image(carrier: FinSet, mu: Dist) -> Dist:
    """Distribution over unit predicates; the functor image of the unit."""
    return Dist([(pq_unit(carrier, x), m) for x, m in mu.entries])


def tv_distance(mu: Dist, nu: Dist) -> Fraction:
    """Total variation; independent closed form for the unit probes."""
    keys = set(mu.support) | set(nu.support)
    overlap = sum((min(mu.mass(x), nu.mass(x)) for x in keys), ZERO)
    return ONE - overlap


# probe-based law checks


def _seeded_fraction(rng, den: int, top: int) -> Fraction:
    return Fraction(rng.randint(0, top), den)


def _seeded_dist(rng, keys: Sequence) -> Dist:
    weights = [rng.randint(1, 4) for _ in keys]
    total = sum(weights)
    return Dist([(k, Fraction(w, total)) for k, w in zip(keys, weights)])


def _seeded_predicate(rng, carrier: FinSet, den: int = 8, top: int = 8) -> OmegaPredicate:
    return OmegaPredicate(carrier, {x: _seeded_fraction(rng, den, top) for x in carrier})


def _attribute(entries, image_of, key):
    for original, _ in entries:
        if image_of(original) == key:
            return original
    raise KeyError(key)


def probe_family(carrier: FinSet, count: int, seed: int) -> tuple:
    """Seeded probe distributions on the carrier: every point mass, the
    uniform distribution, then pseudo-random rational mixtures."""
    import random

    elements = canon_sorted(carrier)
    probes = [point_mass(x) for x in elements]
    probes.append(Dist([(x, Fraction(1, len(elements))) for x in elements]))
    rng = random.Random(seed)
    while len(probes) < count:
        size = rng.randint(1, len(elements))
        probes.append(_seeded_dist(rng, rng.sample(elements, size)))
    return tuple(probes[:count])


def check_quantale_laws(carrier: FinSet, probes: Sequence[Dist],
                        maps: Sequence = (), seed: int = 0) -> LawReport:
    """Monoid and category laws exactly; transport-law squares at the
    probe distributions only, since the target space is infinite.  Each
    probe-based check notes how many probes it covered."""
    import random

    report = LawReport("quantale transport laws")
    probes = list(probes)
    for mu in probes:
        if not set(mu.support) <= carrier.members:
            raise CarrierMismatch("probe leaves the carrier")
    rng = random.Random(seed)

    grid = [Fraction(i, 4) for i in range(5)]
    n, bad = 0, None
    for r in grid:
        for s in grid:
            n += 2
            if oplus(r, s) != oplus(s, r):
                bad = bad or f"{r} vs {s}"
            if not (oplus(r, ZERO) == r and oplus(ZERO, r) == r):
                bad = bad or f"unit at {r}"
            for t in grid:
                n += 2
                if oplus(oplus(r, s), t) != oplus(r, oplus(s, t)):
                    bad = bad or f"assoc at {r},{s},{t}"
                if r <= s and oplus(r, t) > oplus(s, t):
                    bad = bad or f"monotone at {r}<={s}, {t}"
    report.record("truncated addition is a monotone commutative monoid",
                  bad is None, n, bad)

    two = FinSet(["0", "1"])
    ident = pq_kl_id(two)

    def seeded_arrow():
        return {x: _seeded_predicate(rng, two, den=6, top=6) for x in two}

    n, bad = 0, None
    for _ in range(15):
        f, g, h = seeded_arrow(), seeded_arrow(), seeded_arrow()
        n += 3
        if pq_kl_compose(ident, f) != f or pq_kl_compose(f, ident) != f:
            bad = bad or f"identity at {f!r}"
        lhs = pq_kl_compose(h, pq_kl_compose(g, f))
        rhs = pq_kl_compose(pq_kl_compose(h, g), f)
        if lhs != rhs:
            bad = bad or "associativity on seeded matrices"
    report.record("matrix composition is unital and associative", bad is None, n, bad)

    pairs = [(mu, mu) for mu in probes]
    pairs += [(point_mass(x), point_mass(y)) for x in carrier for y in carrier]
    pairs += [(mu, nu) for mu in probes for nu in probes
              if not set(mu.support) & set(nu.support)]
    n, bad = 0, None
    for mu, nu in pairs:
        n += 1
        value = theta_quantale(unit_image(carrier, mu))(nu)
        expected = ZERO if mu == nu else ONE
        if value != expected:
            bad = bad or f"mu={mu!r}, nu={nu!r}: {value} vs {expected}"
    report.record("unit triangle", bad is None, n, bad,
                  note=f"verified at {n} separated probe pairs")

    n, bad = 0, None
    for mu in probes + [point_mass(x) for x in carrier]:
        lifted = theta_quantale(unit_image(carrier, mu))
        for nu in probes:
            n += 1
            if lifted(nu) != tv_distance(mu, nu):
                bad = bad or f"mu={mu!r}, nu={nu!r}"
    report.record("unit transport is total variation", bad is None, n, bad,
                  note=f"verified at {n} probe pairs")

    n, bad = 0, None
    for mapping, cod in maps:
        pred = _seeded_predicate(rng, cod)
        pulled = OmegaPredicate(carrier, {x: pred.at(mapping[x]) for x in carrier})
        for mu in probes:
            n += 1
            if expectation_lift(pred, mu.push(mapping)) != expectation_lift(pulled, mu):
                bad = bad or f"f={mapping!r}, mu={mu!r}"
    report.record("expectation lifting is natural", bad is None, n, bad,
                  note=f"verified at {n} probes")

    n, bad = 0, None
    for mapping, cod in maps:
        fibres = defaultdict(list)
        for x in carrier:
            fibres[mapping[x]].append(x)
        source = Dist(_seeded_dist(rng, [_seeded_predicate(rng, carrier)
                                         for _ in range(3)]).entries)
        theta_src = theta_quantale(source)
        pushed = Dist([(pq_map(mapping, p, cod), mass)
                       for p, mass in source.entries])
        for mu in probes:
            n += 1
            nu = mu.push(mapping)
            value, coupling = optimal_coupling_value(pushed, nu)
            split = defaultdict(Fraction)
            for (q, y), mass in coupling.entries:
                p = _attribute(source.entries, lambda r: pq_map(mapping, r, cod), q)
                best = min(fibres[y], key=lambda x: (p.at(x), canon_key(x)))
                split[best] += mass
            lifted_back = Dist(split)
            if lifted_back.push(mapping) != nu or theta_src(lifted_back) != value:
                bad = bad or f"f={mapping!r}, mu={mu!r}"
            for _ in range(3):
                alt = defaultdict(Fraction)
                for y, mass in nu.entries:
                    weights = [rng.randint(1, 3) for _ in fibres[y]]
                    total = sum(weights)
                    for x, w in zip(fibres[y], weights):
                        alt[x] += mass * Fraction(w, total)
                n += 1
                if theta_src(Dist(alt)) < value:
                    bad = bad or f"witness below optimum at f={mapping!r}"
    report.record("transport map is natural", bad is None, n, bad,
                  note=f"verified at {n} image-supported probes")

    n, bad = 0, None
    small = [OmegaPredicate(carrier, {x: _seeded_fraction(rng, 8, 4) for x in carrier})
             for _ in range(3)]
    q1 = FinSupp({small[0]: _seeded_fraction(rng, 8, 4),
                  small[1]: _seeded_fraction(rng, 8, 4)})
    q2 = FinSupp({small[1]: _seeded_fraction(rng, 8, 4),
                  small[2]: _seeded_fraction(rng, 8, 4)})
    xi = _seeded_dist(rng, [q1, q2])
    collapsed = Dist([(mult_predicate(q, carrier), mass) for q, mass in xi.entries])
    theta_xi = theta_quantale(xi)
    for nu in probes:
        n += 1
        value, coupling = optimal_coupling_value(collapsed, nu)
        split = defaultdict(Fraction)
        for (p, x), mass in coupling.entries:
            q = _attribute(xi.entries, lambda r: mult_predicate(r, carrier), p)
            g, _ = min(q.entries, key=lambda kv: (oplus(kv[1], kv[0].at(x)),
                                                  kv[0].sort_key))
            split[g] += mass
        witnesses = [Dist(split), collapsed]
        witnesses += [point_mass(g) for g in small]
        bounds = []
        for mid in witnesses:
            via = oplus(theta_xi(mid), theta_quantale(mid)(nu))
            bounds.append(via)
            if value > via:
                bad = bad or f"nu={nu!r}: {value} above witness bound {via}"
        if min(bounds) != value:
            bad = bad or f"nu={nu!r}: optimum {value} not met by witnesses"
    report.record("mult pentagon", bad is None, n, bad,
                  note=f"verified at {n} probes against finite witness families")
    return report
