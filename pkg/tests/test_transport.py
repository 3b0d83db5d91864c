"""Truncated-cost quantale, exact transportation LP and the probe checks."""

import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from kltrace.errors import CarrierMismatch, CarrierTooLarge, InfeasibleMass
from kltrace.orders import FinSet
from kltrace.transport import (
    Dist,
    FinSupp,
    OmegaPredicate,
    TransportMap,
    check_quantale_laws,
    constant_predicate,
    coupling_vertices,
    expectation_lift,
    marginals,
    mult_predicate,
    oplus,
    optimal_coupling_value,
    oracle_coupling_value,
    point_mass,
    pq_kl_compose,
    pq_kl_id,
    pq_map,
    pq_unit,
    probe_family,
    product_dist,
    solve_transport,
    theta_quantale,
    tv_distance,
    unit_image,
)

UV = FinSet(["u", "v"])
UVW = FinSet(["u", "v", "w"])


def fractions_01():
    return st.fractions(min_value=0, max_value=1, max_denominator=8)


def dists_on(carrier):
    elements = carrier.elements

    def build(weights):
        total = sum(weights)
        if total == 0:
            return point_mass(elements[0])
        return Dist([(x, Fraction(w, total)) for x, w in zip(elements, weights)])

    return st.lists(
        st.integers(0, 6), min_size=len(elements), max_size=len(elements)
    ).map(build)


# the quantale monoid


@given(fractions_01(), fractions_01(), fractions_01())
def test_quantale_law_monoid(r, s, t):
    # commutative, associative, unital, truncated at 1
    assert oplus(r, s) == oplus(s, r)
    assert oplus(oplus(r, s), t) == oplus(r, oplus(s, t))
    assert oplus(r, Fraction(0)) == r
    assert oplus(r, s) <= 1


def test_oplus_truncates():
    assert oplus(Fraction(7, 10), Fraction(1, 2)) == 1


# predicates and matrices


def test_unit_predicate_is_zero_at_the_point():
    p = pq_unit(UV, "u")
    assert p.at("u") == 0 and p.at("v") == 1
    with pytest.raises(CarrierMismatch):
        pq_unit(UV, "zz")


def test_predicate_weights_cover_the_carrier():
    with pytest.raises(CarrierMismatch):
        OmegaPredicate(UV, {"u": 0})
    with pytest.raises(ValueError):
        OmegaPredicate(UV, {"u": 0, "v": 2})


def test_pq_map_takes_fibre_infima():
    p = OmegaPredicate(UV, {"u": Fraction(1, 4), "v": Fraction(1, 2)})
    pushed = pq_map({"u": "w", "v": "w"}, p, UVW)
    assert pushed.at("w") == Fraction(1, 4)
    # off-image points cost the top element
    assert pushed.at("u") == 1


def test_matrix_identity_and_spot_composition():
    ident = pq_kl_id(UV)
    f = {"u": OmegaPredicate(UV, {"u": Fraction(1, 4), "v": 1}),
         "v": OmegaPredicate(UV, {"u": 0, "v": Fraction(1, 2)})}
    assert pq_kl_compose(ident, f) == f
    assert pq_kl_compose(f, ident) == f
    ff = pq_kl_compose(f, f)
    # (min, +) product row at u: min(1/4 + 1/4, 1 + 0) over target u
    assert ff["u"].at("u") == Fraction(1, 2)


def test_mult_predicate_collapses_named_costs():
    q = FinSupp({constant_predicate(UV, Fraction(1, 4)): Fraction(1, 2)})
    collapsed = mult_predicate(q, UV)
    assert collapsed.at("u") == Fraction(3, 4)
    # costs past the named support fall back to the top element
    assert mult_predicate(FinSupp({}), UV).at("u") == 1


def test_expectation_lift_is_the_mean_cost():
    p = OmegaPredicate(UV, {"u": Fraction(1, 2), "v": 1})
    mu = Dist({"u": Fraction(1, 2), "v": Fraction(1, 2)})
    assert expectation_lift(p, mu) == Fraction(3, 4)
    with pytest.raises(CarrierMismatch):
        expectation_lift(p, point_mass("w"))


# distributions


def test_dist_validation():
    with pytest.raises(InfeasibleMass):
        Dist({"u": Fraction(1, 2)})
    with pytest.raises(InfeasibleMass):
        Dist({"u": Fraction(3, 2), "v": Fraction(-1, 2)})
    assert Dist({"u": 1, "v": 0}).support == ("u",)


@given(dists_on(UV), dists_on(UVW))
def test_product_coupling_has_the_right_marginals(mu, nu):
    left, right = marginals(product_dist(mu, nu))
    assert left == mu and right == nu


@given(dists_on(UVW))
def test_push_preserves_mass(mu):
    pushed = mu.push({"u": "x", "v": "x", "w": "y"})
    assert pushed.mass("x") == mu.mass("u") + mu.mass("v")


# the exact transportation LP


def test_transport_requires_balanced_mass():
    with pytest.raises(InfeasibleMass):
        solve_transport([("s", Fraction(1, 2))], [("d", 1)], lambda s, d: 0)


@given(dists_on(UVW), dists_on(UVW))
def test_lp_value_matches_vertex_oracle(mu, nu):
    # the simplex optimum equals the minimum over all basic solutions
    cost = lambda x, y: Fraction(0) if x == y else Fraction(1)
    value, coupling = optimal_coupling_value(mu, nu, cost)
    assert value == oracle_coupling_value(mu, nu, cost)
    left, right = marginals(coupling)
    assert left == mu and right == nu


@given(dists_on(UVW), dists_on(UVW))
def test_lp_never_beats_the_independent_coupling(mu, nu):
    cost = lambda x, y: Fraction(0) if x == y else Fraction(1)
    value, _ = optimal_coupling_value(mu, nu, cost)
    independent = sum(
        (mx * my * cost(x, y) for x, mx in mu.entries for y, my in nu.entries),
        Fraction(0))
    assert value <= independent
    assert value == tv_distance(mu, nu)


def test_coupling_vertices_of_the_two_by_two_polytope():
    a = [Fraction(1, 2), Fraction(1, 2)]
    vertices = list(coupling_vertices(a, a))
    # one basis per spanning tree of the complete bipartite graph on 2+2
    assert len(vertices) == 4
    for masses in vertices:
        assert sum(masses.values()) == 1


def test_transport_map_memoizes_and_guards_support():
    mu = unit_image(UV, point_mass("u"))
    theta = theta_quantale(mu)
    nu = Dist({"u": Fraction(1, 2), "v": Fraction(1, 2)})
    assert theta(nu) == theta(nu) == tv_distance(point_mass("u"), nu)
    left, right = marginals(theta.coupling(nu))
    assert left == mu and right == nu
    big = FinSet([f"x{i}" for i in range(7)])
    with pytest.raises(CarrierTooLarge):
        TransportMap(unit_image(big, point_mass("x0")))


# probe-based law suite


def test_probe_family_is_seed_deterministic():
    once = probe_family(UVW, 10, seed=5)
    again = probe_family(UVW, 10, seed=5)
    assert once == again
    assert len(once) == 10
    # every point mass plus the uniform distribution lead the family
    assert point_mass("u") in once
    assert Dist({x: Fraction(1, 3) for x in UVW}) in once


def test_quantale_law_suite_passes():
    probes = probe_family(UVW, 12, seed=3)
    fold = {"u": "u", "v": "u", "w": "w"}
    report = check_quantale_laws(UVW, probes, maps=[(fold, UVW)], seed=3)
    assert report.ok, report.render()
    assert "unit triangle" in {c.name for c in report.checks}


def test_unit_triangle_fails_at_overlapping_probes():
    # the triangle side is the 0/1 indicator, the transport side is total
    # variation; they disagree strictly between 0 and 1, which is why the
    # suite only probes separated pairs
    mu = point_mass("u")
    nu = Dist({"u": Fraction(1, 2), "v": Fraction(1, 2)})
    value = theta_quantale(unit_image(UV, mu))(nu)
    assert value == Fraction(1, 2)
    indicator = Fraction(0) if mu == nu else Fraction(1)
    assert value != indicator


def test_pushforward_charges_full_cost_off_the_image():
    # naturality squares only cover targets inside the image of the map:
    # a target with off-image mass pays the top cost no matter the source
    source = Dist([(constant_predicate(UV, 0), Fraction(1))])
    assert theta_quantale(source)(point_mass("u")) == 0
    pushed = Dist([(pq_map({"u": "w", "v": "w"}, p, UVW), m)
                   for p, m in source.entries])
    assert theta_quantale(pushed)(point_mass("w")) == 0
    assert theta_quantale(pushed)(point_mass("v")) == 1
