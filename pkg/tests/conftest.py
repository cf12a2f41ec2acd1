from __future__ import annotations

from fractions import Fraction as F

import pytest

from bertnet.boundary_search import FreeBoundarySketch
from bertnet.network import Network


def line4() -> Network:
    return Network.line([6, 3, 7, 2], [1, 1, 1])


LINE4_SKETCH_1 = FreeBoundarySketch(({1, 2}, {2, 3}), {0, 2})
LINE4_SKETCH_2 = FreeBoundarySketch(({0, 1, 2, 3}, {2, 3}), {0, 2})


def cycle5() -> Network:
    return Network.cycle([0, 0, 10, 0, 0], [1, F(1, 2), F(1, 2), 1, 1])


CYCLE5_SKETCH = FreeBoundarySketch(({1, 2, 3}, {0, 1}, {0, 4}, {3, 4}), {2})
CYCLE5_MIRROR = [4, 3, 2, 1, 0]


def line6() -> Network:
    return Network.line([10, 1, 1, 1, 1, 10], [F(1, 2), 1, 1, 1, F(1, 2)])


LINE6_SKETCH = FreeBoundarySketch.from_supports(
    6, {0: [0, 1], 1: [0, 1, 4], 2: [3, 4], 3: [1, 2, 3], 4: [0, 1, 2], 5: [0]}, {0, 5}
)
LINE6_MIRROR = [5, 4, 3, 2, 1, 0]


def triangle_eq2():
    """Sellers (2, 3, 4) on a unit triangle with the three-interval candidate."""
    from bertnet.sketch import Sketch, solve_sketch

    net = Network.clique([2, 3, 4])
    T = (F(1), F(14, 15), F(2, 3))
    sketch = Sketch.from_interval_sets(T, [{1, 2}, {0, 1, 2}], {2}, 3)
    return net, sketch, solve_sketch(net, sketch)


@pytest.fixture
def two_seller():
    return Network.line([1, 0], [1])


@pytest.fixture
def unit_line3():
    return Network.line([1, 0, 0], [1, 1])


# acceptance lines collected by tests/test_acceptance.py
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
