from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bertnet.closed_form import solve_line3, solve_two_sellers
from bertnet.errors import InvalidCdf, OutOfDomain
from bertnet.network import Network
from bertnet.strategy import PiecewiseCdf, Segment, StrategyProfile, breakpoints, cdf_eval, utility


@pytest.fixture
def intro():
    return solve_two_sellers(1, 0, 1)


def test_intro_captive_seller_values(intro):
    cap = intro[0]
    assert cdf_eval(cap, F(3, 4), "Fbar") == F(2, 3)
    assert cdf_eval(cap, F(1), "atom") == F(1, 2)
    assert cdf_eval(cap, F(1), "Fminus") == F(1, 2)
    assert cdf_eval(cap, F(1), "F") == 1
    assert cdf_eval(cap, cap.infimum, "Fbar") == 1


def test_intro_utilities(intro, two_seller):
    assert utility(two_seller, 1, F(1, 2), intro) == F(1, 2)
    assert utility(two_seller, 0, F(1), intro) == 1
    lone = StrategyProfile((PiecewiseCdf.point_at_one(), PiecewiseCdf.point_at_one()))
    assert utility(two_seller, 1, F(2, 5), lone) == F(2, 5)


def test_breakpoints_examples(intro):
    assert breakpoints(intro) == [F(1, 2), F(1)]
    assert breakpoints(solve_line3(1, 1, 1).profile) == [F(1, 3), F(2, 3), F(1)]
    ones = StrategyProfile((PiecewiseCdf.point_at_one(),))
    assert breakpoints(ones) == [F(1)]


def test_out_of_domain(intro):
    with pytest.raises(OutOfDomain):
        intro[0].fbar(F(3, 2))


def test_invalid_cdfs():
    with pytest.raises(InvalidCdf):
        PiecewiseCdf((Segment.through(F(1, 2), F(1), F(1, 2), F(1, 4)),), F(1, 4))  # starts below 1
    with pytest.raises(InvalidCdf):
        PiecewiseCdf((Segment.through(F(1, 2), F(1), F(1), F(1, 2)),), F(1, 4))  # atom mismatch
    with pytest.raises(InvalidCdf):
        PiecewiseCdf((), F(3, 2))


def test_support_queries(intro):
    cap, other = intro
    assert cap.support_intervals() == [(F(1, 2), F(1))]
    assert other.supremum == 1 and other.atom == 0
    assert cap.total_mass() == 1 and other.total_mass() == 1


# -- property suites --------------------------------------------------------


@st.composite
def random_cdfs(draw, exact=True):
    k = draw(st.integers(1, 4))
    xs = sorted(set(draw(st.lists(st.fractions(F(1, 20), F(1), max_denominator=60), min_size=k + 1, max_size=k + 1))))
    if len(xs) < 2:
        xs = [F(1, 2), F(1)]
    top = draw(st.booleans())
    if top and xs[-1] != 1:
        xs.append(F(1))
    vals = sorted(
        (draw(st.fractions(F(0), F(1), max_denominator=40)) for _ in range(len(xs) - 1)), reverse=True
    )
    fb = [F(1)] + vals
    # 1/x segments between knots stay monotone because a + b/x is monotone on each piece
    knots = list(zip(xs, fb))
    atom = fb[-1] if xs[-1] == 1 else F(0)
    if xs[-1] != 1 and fb[-1] != 0:
        knots.append((F(1), fb[-1]))
        atom = fb[-1]
    cdf = PiecewiseCdf.from_knots(knots, atom)
    return cdf if exact else cdf.to_float()


@settings(max_examples=80, deadline=None)
@given(random_cdfs(), st.lists(st.fractions(F(0), F(1), max_denominator=100), min_size=2, max_size=8))
def test_cdf_monotone_and_total_mass(cdf, xs):
    xs = sorted(xs)
    Fs = [cdf.eval(x, "F") for x in xs]
    assert all(a <= b for a, b in zip(Fs, Fs[1:]))
    assert cdf.total_mass() == 1


@settings(max_examples=40, deadline=None)
@given(random_cdfs(exact=False), st.lists(st.floats(0.0, 1.0), min_size=2, max_size=8))
def test_cdf_monotone_float(cdf, xs):
    xs = sorted(xs)
    Fs = [cdf.eval(x, "F") for x in xs]
    assert all(a <= b + 1e-12 for a, b in zip(Fs, Fs[1:]))
    assert abs(cdf.total_mass() - 1) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(st.lists(random_cdfs(), min_size=3, max_size=3), st.lists(st.integers(0, 3), min_size=3, max_size=3))
def test_utility_linear_between_breakpoints(cdfs, alphas):
    net = Network.clique(alphas)
    profile = StrategyProfile(tuple(cdfs))
    pts = [F(0)] + breakpoints(profile)
    for lo, hi in zip(pts, pts[1:]):
        if lo == 0:
            lo = hi / 2  # utility is linear on (0, first breakpoint) too; avoid x = 0
        for i in range(net.n):
            ulo, uhi = utility(net, i, lo, profile), utility(net, i, hi, profile)
            for k in range(1, 6):
                x = lo + (hi - lo) * F(k, 6)
                chord = ulo + (uhi - ulo) * (x - lo) / (hi - lo)
                assert utility(net, i, x, profile) == chord
