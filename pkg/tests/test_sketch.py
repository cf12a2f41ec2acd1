from fractions import Fraction as F

import pytest
from conftest import triangle_eq2

from bertnet.errors import EmptySketch, Infeasible, InvalidSketch
from bertnet.lp import LinearProgram, solve
from bertnet.network import Network
from bertnet.sketch import (
    Sketch,
    build_lp1,
    check_full_rank,
    check_sketch_shape,
    exact_rank,
    lp1_violations,
    sketch_solution_to_profile,
    solve_sketch,
)
from bertnet.verifier import verify_profile

HALF = ((F(1, 2), F(1)),)


def two_sketch(atoms):
    return Sketch((HALF, HALF), atoms)


def line3_sketch():
    return Sketch.from_interval_sets([F(1), F(2, 3), F(1, 3)], [{0, 1}, {1, 2}], {0}, 3)


def test_lp1_counts_two_seller(two_seller):
    counts = build_lp1(two_seller, two_sketch({0})).counts
    assert counts["eq-util"] == 4
    assert counts["starts-0"] == 2
    assert counts["no-atom"] == 1 and counts["yes-atom"] == 1


def test_line3_sets():
    sk = line3_sketch()
    assert sk.T == (1, F(2, 3), F(1, 3))
    assert sk.interval_sets() == [frozenset({0, 1}), frozenset({1, 2})]


def test_neighbouring_atoms_rejected(two_seller):
    with pytest.raises(InvalidSketch):
        check_sketch_shape(two_seller, two_sketch({0, 1}))


def test_empty_sketch(two_seller):
    with pytest.raises((EmptySketch, InvalidSketch)):
        build_lp1(two_seller, Sketch(((), ()), frozenset()))


def test_symmetric_pair_has_no_atom():
    net = Network.line([1, 1], [1])
    with pytest.raises(Infeasible) as info:
        solve_sketch(net, two_sketch({0}))
    assert ("yes-atom", 0) in info.value.violated
    ss = solve_sketch(net, two_sketch(set()))
    assert ss.fbar[0][0] == 0 and ss.u == [F(1), F(1)]


def test_intro_pair_solution(two_seller):
    ss = solve_sketch(two_seller, two_sketch({0}))
    assert ss.fbar[0][0] == F(1, 2)
    assert ss.u == [1, F(1, 2)]
    prof = sketch_solution_to_profile(ss)
    # Fbar_2(x) = (alpha_1 / beta)(1/x - 1) and Fbar_1(x) = t_2 / x on [1/2, 1]
    for x in (F(1, 2), F(3, 5), F(4, 5), F(1)):
        assert prof[1].fbar(x) == 1 / x - 1
        assert prof[0].fbar(x) == F(1, 2) / x


def test_line3_solution(unit_line3):
    ss = solve_sketch(unit_line3, line3_sketch())
    assert ss.fbar[1][1] == F(1, 2)
    assert ss.u == [1, F(2, 3), F(1, 3)]
    assert verify_profile(unit_line3, sketch_solution_to_profile(ss)).is_equilibrium


def test_full_rank_examples(two_seller):
    assert check_full_rank(two_seller, two_sketch({0}))
    lone = Sketch.from_interval_sets([F(1), F(1, 2)], [{0}], {1}, 2)
    assert not check_full_rank(two_seller, lone)
    p4 = [[0, 1, 0, 0], [1, 0, 1, 0], [0, 1, 0, 1], [0, 0, 1, 0]]
    assert exact_rank(p4) == 4


def test_pivot_order_uniqueness_under_full_rank(unit_line3, two_seller):
    for net, sk in ((unit_line3, line3_sketch()), (two_seller, two_sketch({0})), triangle_eq2()[:2]):
        assert check_full_rank(net, sk)
        a, b = solve_sketch(net, sk), solve_sketch(net, sk, reverse_order=True)
        assert a.fbar == b.fbar and a.u == b.u


def test_reconstruction_hits_boundary_values():
    net, sk, ss = triangle_eq2()
    prof = sketch_solution_to_profile(ss)
    for i in range(net.n):
        for j, t in enumerate(ss.T):
            assert prof[i].fbar(t) == ss.fbar[i][j]
    assert not lp1_violations(net, ss)


def test_triangle_equilibrium_2_values():
    net, _, ss = triangle_eq2()
    assert ss.u == [F(8, 3), F(10, 3), 4]
    assert ss.fbar == [[0, 0, 1], [0, F(2, 7), 1], [F(1, 3), F(4, 7), 1]]


def test_lp_solver_small_program():
    lp = LinearProgram()
    for v in ("x", "y"):
        lp.add_var(v)
    lp.add("c1", {"x": F(1), "y": F(1)}, "le", F(4))
    lp.add("c2", {"x": F(1), "y": F(3)}, "le", F(6))
    lp.objective = {"x": F(1), "y": F(1)}
    res = solve(lp)
    assert res.status == "optimal"
    assert res.values["x"] + res.values["y"] == 4


def test_lp_solver_detects_infeasible():
    lp = LinearProgram()
    lp.add_var("x")
    lp.add("lo", {"x": F(1)}, "ge", F(2))
    lp.add("hi", {"x": F(1)}, "le", F(1))
    assert solve(lp).status == "infeasible"
