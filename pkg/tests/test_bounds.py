from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bertnet.bounds import (
    big_cut_bound,
    chain_lower_bounds,
    check_bounds,
    cut_bound,
    neighbor_bound,
    path_bounds,
)
from bertnet.closed_form import solve_line3, solve_star, solve_tree_single_captive
from bertnet.errors import EmptySubset, PreconditionViolated
from bertnet.network import Network


def test_neighbor_bound_intro_pair(two_seller):
    assert neighbor_bound(two_seller, [F(1), F(1, 2)]) == []
    flagged = neighbor_bound(two_seller, [F(1), F(2, 5)])
    assert [v.seller for v in flagged] == [1]


def test_neighbor_bound_fibonacci_line(unit_line3):
    assert neighbor_bound(unit_line3, [F(1), F(2, 3), F(1, 3)]) == []


def test_path_bounds_unit_line3(unit_line3):
    assert path_bounds(unit_line3) == [(F(1, 4), F(4))] * 3
    rep = check_bounds(unit_line3, [F(1), F(2, 3), F(1, 3)])
    assert rep.ok
    assert all(lo <= hi for lo, hi in zip(rep.lower, rep.upper))


def test_path_bounds_single_seller():
    assert path_bounds(Network((F(3),))) == [(F(3), F(3))]


def test_path_bounds_heavy_line():
    net = Network.line([1, 0, 0], [10, 100])
    s = solve_line3(1, 10, 100)
    lo, hi = path_bounds(net)[1]
    assert lo <= s.utilities[1] <= hi
    assert hi > path_bounds(Network.line([1, 0, 0], [1, 1]))[1][1]
    assert check_bounds(net, s.utilities).ok


def test_chain_lower_bounds_line3(unit_line3):
    assert chain_lower_bounds(unit_line3) == [1, F(1, 2), F(1, 4)]


def test_cut_bound_unit_line3(unit_line3):
    eps, delta, dg, per = cut_bound(unit_line3, {1, 2})
    assert (eps, delta, dg) == (1, 2, 1)
    assert per == {1: 2, 2: 2}


def test_cut_bound_small_boundary_market():
    beta = F(1, 1000)
    net = Network.line([1, 0, 0], [beta, 1])
    eps, delta, dg, per = cut_bound(net, {1, 2})
    assert eps == beta
    u = solve_tree_single_captive(net).utilities
    assert all(u[i] <= per[i] for i in (1, 2))
    assert max(per.values()) <= 2 * beta * delta


def test_cut_bound_no_captive_all_sellers():
    net = Network.cycle([0, 0, 0, 0], [1, 2, 1, 2])
    eps, _, _, per = cut_bound(net, range(4))
    assert eps == 0 and set(per.values()) == {0}


def test_cut_bound_empty_subset(unit_line3):
    with pytest.raises(EmptySubset):
        cut_bound(unit_line3, [])


@settings(max_examples=30, deadline=None)
@given(st.fractions(F(1, 1000), F(1), max_denominator=1000), st.fractions(F(1, 1000), F(1), max_denominator=1000))
def test_cut_bound_monotone_in_boundary_markets(small, large):
    small, large = sorted((small, large))
    a = cut_bound(Network.line([1, 0, 0], [small, 1]), {1, 2})[3][2]
    b = cut_bound(Network.line([1, 0, 0], [large, 1]), {1, 2})[3][2]
    assert a <= b


def four_line(M):
    return Network.line([1, 0, 0, 0], [1, M, 1])


def test_big_cut_large_market():
    M = F(10**6)
    net = four_line(M)
    bound = big_cut_bound(net, [(1, 2)])
    # G defaults to {2, 3}, B = {1, 2}, so only seller 3 is bounded
    assert bound == {3: F(1000002000001, 62500000000000000)}
    u = solve_tree_single_captive(net).utilities
    assert u[3] < bound[3]


def test_big_cut_moderate_market_is_loose_but_valid():
    net = four_line(F(10))
    bound = big_cut_bound(net, [(1, 2)])
    assert bound == {3: F(242, 125)}
    assert solve_tree_single_captive(net).utilities[3] < bound[3]


@pytest.mark.parametrize("M", [F(10), F(1000), F(10**6)])
def test_big_cut_scales_inversely_with_M(M):
    # same network, only the declared threshold changes
    net = four_line(10 * M)
    assert big_cut_bound(net, [(1, 2)], M=10 * M)[3] == big_cut_bound(net, [(1, 2)], M=M)[3] / 10


def test_big_cut_preconditions():
    with pytest.raises(PreconditionViolated):
        big_cut_bound(Network.line([1, 0, 0, 0], [1, 10, 5]), [(1, 2)])
    with pytest.raises(PreconditionViolated):
        big_cut_bound(four_line(F(100)), [(0, 2)])
    with pytest.raises(PreconditionViolated):
        big_cut_bound(Network.line([2, 0, 0, 0], [1, 100, 1]), [(1, 2)])


def test_check_bounds_flags_missing_anchor(unit_line3):
    rep = check_bounds(unit_line3, [F(11, 10), F(2, 3), F(1, 3)])
    assert any(v.kind == "anchor" for v in rep.violations)


def test_check_bounds_star_cases_and_json():
    for a0, alphas in ((10, [2, 1]), (1, [5, F(1, 2)])):
        s = solve_star(a0, alphas)
        rep = check_bounds(s.network, s.utilities)
        assert rep.ok, rep.violations
    doc = rep.to_json()
    assert doc["formatVersion"] == 1 and len(doc["sellers"]) == 3 and doc["violations"] == []
