"""Exact solvers for the network families with analytic equilibria.

Everything here runs in Fractions.  Each solver builds a sketch solution and
hands it to :func:`bertnet.sketch.sketch_solution_to_profile`, so all
profiles share one reconstruction path.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import ConstructionBroken, MalformedInput, MultipleCaptive, NonGeneric, NonUnitSpokes, NotALine, NotATree
from .network import Network
from .numerics import parse_rational
from .sketch import Sketch, SketchSolution, check_full_rank, sketch_solution_to_profile, solution_from_values
from .strategy import PiecewiseCdf, Segment, StrategyProfile

log = logging.getLogger(__name__)

F0 = Fraction(0)
F1 = Fraction(1)


def _table_solution(net: Network, sketch: Sketch, table: list[dict]) -> SketchSolution:
    """``table[i]`` maps some boundary points to Fbar_i.  Other points get 1 below the
    listed ones, the top listed value above them, and the ``a + b/x`` piece through
    the neighbouring listed points in between."""

    def fbar_of(i: int, t):
        known = table[i]
        if t in known:
            return known[t]
        below = [p for p in known if p < t]
        above = [p for p in known if p > t]
        if not below:
            return F1
        if not above:
            return known[max(below)]
        lo, hi = max(below), min(above)
        return Segment.through(lo, hi, known[lo], known[hi]).value(t)

    return solution_from_values(net, sketch, fbar_of)


# -- two sellers --------------------------------------------------------------


def solve_two_sellers(alpha_1, alpha_2, beta) -> StrategyProfile:
    """Equilibrium of two sellers sharing one market (requires ``alpha_1 >= alpha_2``)."""
    a1, a2, b = (parse_rational(v) for v in (alpha_1, alpha_2, beta))
    if a1 < a2:
        raise MalformedInput("solve_two_sellers expects alpha_1 >= alpha_2")
    if a2 < 0 or b <= 0:
        raise MalformedInput("captive markets must be >= 0 and the shared market > 0")
    if a1 == 0:
        return StrategyProfile((PiecewiseCdf.point_at_zero(), PiecewiseCdf.point_at_zero()))
    t2 = a1 / (a1 + b)
    atom1 = (t2 * (a2 + b) - a2) / b
    s1 = Segment(t2, F1, -a2 / b, t2 * (a2 + b) / b)
    s2 = Segment(t2, F1, -a1 / b, a1 / b)
    return StrategyProfile((PiecewiseCdf((s1,), atom1), PiecewiseCdf((s2,), F0)))


# -- trees with one captive market ----------------------------------------------


@dataclass
class TreeIntervals:
    root: int
    parent: dict  # v -> P(v); the root maps to None
    children: dict
    L: dict
    M: dict
    H: dict
    fbar_mid: dict  # Fbar_v(M_v)

    def check_staggered(self) -> list[str]:
        problems = []
        for v in self.parent:
            if not self.L[v] <= self.M[v] <= self.H[v]:
                problems.append(f"L <= M <= H fails at {v}")
            if (self.L[v] == self.M[v]) != (not self.children[v]) and v != self.root:
                problems.append(f"L == M must hold exactly at leaves ({v})")
            p = self.parent[v]
            if p is not None and self.H[v] != self.M[p]:
                problems.append(f"H_{v} != M_P({v})")
        if self.M[self.root] != 1 or self.H[self.root] != 1:
            problems.append("root must have M = H = 1")
        for v, cs in self.children.items():
            if len({self.M[c] for c in cs}) > 1:
                problems.append(f"children of {v} do not share M")
        return problems


@dataclass
class TreeSolution:
    intervals: TreeIntervals
    profile: StrategyProfile
    utilities: list
    solution: SketchSolution | None = None

    @property
    def T(self) -> tuple:
        return self.solution.T if self.solution is not None else (F1,)


def _single_captive_root(net: Network, root: int | None) -> int:
    captive = [i for i, a in enumerate(net.alpha) if a > 0]
    if len(captive) != 1:
        raise MultipleCaptive(f"expected exactly one seller with a captive market, found {len(captive)}")
    if root is not None and root != captive[0]:
        raise MultipleCaptive(f"root {root} has no captive market; seller {captive[0]} does")
    return captive[0]


def tree_intervals(net: Network, root: int | None = None) -> TreeIntervals:
    if not net.is_tree():
        raise NotATree("network is not a tree")
    r = _single_captive_root(net, root)
    parent: dict = {r: None}
    order = [r]
    queue = deque([r])
    while queue:
        v = queue.popleft()
        for w in net.neighbors(v):
            if w not in parent:
                parent[w] = v
                order.append(w)
                queue.append(w)
    children = {v: [w for w in net.neighbors(v) if parent.get(w) == v] for v in order}

    fmid: dict = {}
    for v in reversed(order):
        pull = sum((Fraction(net.b(c, v)) * fmid[c] for c in children[v]), F0)
        if v == r:
            a = Fraction(net.alpha[r])
            fmid[v] = a / (a + pull)
        else:
            bp = Fraction(net.b(v, parent[v]))
            fmid[v] = bp / (bp + pull)
    M: dict = {}
    for v in order:
        M[v] = F1 if v == r else M[parent[v]] * fmid[parent[v]]
    L = {v: (M[children[v][0]] if children[v] else M[v]) for v in order}
    H = {v: (F1 if v == r else M[parent[v]]) for v in order}
    return TreeIntervals(r, parent, children, L, M, H, fmid)


def solve_tree_single_captive(net: Network, root: int | None = None) -> TreeSolution:
    """Unique equilibrium of a tree whose only captive market sits at ``root``."""
    if net.n == 1:
        if net.alpha[0] <= 0:
            raise MultipleCaptive("a single seller needs a captive market")
        iv = TreeIntervals(0, {0: None}, {0: []}, {0: F1}, {0: F1}, {0: F1}, {0: F1})
        return TreeSolution(iv, StrategyProfile((PiecewiseCdf.point_at_one(),)), [Fraction(net.alpha[0])])
    iv = tree_intervals(net, root)
    r = iv.root
    supports = tuple(((iv.L[v], iv.H[v]),) for v in range(net.n))
    sketch = Sketch(supports, frozenset({r}))
    table = []
    for v in range(net.n):
        known = {iv.L[v]: F1, iv.M[v]: iv.fbar_mid[v]}
        if v != r:
            known[iv.H[v]] = F0
        table.append(known)
    ss = _table_solution(net, sketch, table)
    profile = sketch_solution_to_profile(ss)
    u = [Fraction(net.alpha[r]) if v == r else iv.M[v] * Fraction(net.b(v, iv.parent[v])) for v in range(net.n)]
    if list(ss.u) != u:
        raise ConstructionBroken(f"tree utilities disagree: {ss.u} vs {u}")
    return TreeSolution(iv, profile, u, ss)


def solve_line_single_captive(net: Network) -> TreeSolution:
    """Line network with its only captive market at an endpoint."""
    n = net.n
    if n > 1:
        degs = [net.degree(i) for i in range(n)]
        if not net.is_tree() or max(degs) > 2:
            raise NotALine("network is not a path")
        captive = [i for i, a in enumerate(net.alpha) if a > 0]
        if len(captive) == 1 and degs[captive[0]] != 1:
            raise NotALine("the captive market must sit at an endpoint of the line")
    sol = solve_tree_single_captive(net)
    if n > 1:
        # seller at distance k-1 from the root prices on [t_{k+1}, t_{k-1}]
        iv = sol.intervals
        T = sol.solution.T
        dist = {iv.root: 0}
        for v in _bfs(net, iv.root):
            if iv.parent[v] is not None:
                dist[v] = dist[iv.parent[v]] + 1
        for v, k in dist.items():
            lo = T[min(k + 1, n - 1)]
            hi = T[max(k - 1, 0)]
            if (iv.L[v], iv.H[v]) != (lo, hi):
                raise ConstructionBroken(f"line seller {v} has support [{iv.L[v]}, {iv.H[v]}], expected [{lo}, {hi}]")
    return sol


def _bfs(net: Network, src: int) -> list[int]:
    seen, order, queue = {src}, [src], deque([src])
    while queue:
        v = queue.popleft()
        for w in net.neighbors(v):
            if w not in seen:
                seen.add(w)
                order.append(w)
                queue.append(w)
    return order


def solve_line3(alpha_1, beta_12, beta_23) -> TreeSolution:
    """Three sellers in a line, captive market only at the first."""
    a, b12, b23 = (parse_rational(v) for v in (alpha_1, beta_12, beta_23))
    if min(a, b12, b23) <= 0:
        raise MalformedInput("solve_line3 needs positive alpha_1, beta_12, beta_23")
    net = Network.line([a, F0, F0], [b12, b23])
    f2 = b12 / (b12 + b23)
    t2 = a / (a + b12 * f2)
    t3 = t2 * b12 / (b12 + b23)
    sketch = Sketch((((t2, F1),), ((t3, F1),), ((t3, t2),)), frozenset({0}))
    table = [{t2: F1, F1: t2}, {t3: F1, t2: f2, F1: F0}, {t3: F1, t2: F0}]
    ss = _table_solution(net, sketch, table)
    iv = TreeIntervals(
        0, {0: None, 1: 0, 2: 1}, {0: [1], 1: [2], 2: []},
        {0: t2, 1: t3, 2: t3}, {0: F1, 1: t2, 2: t3}, {0: F1, 1: F1, 2: t2},
        {0: t2, 1: f2, 2: F1},
    )
    return TreeSolution(iv, sketch_solution_to_profile(ss), list(ss.u), ss)


def fibonacci_line_points(n: int) -> list[Fraction]:
    """``t_k = N_{n-k+1} / N_n`` with ``N_0 = N_1 = 1`` for the unit line of n sellers."""
    N = [1, 1]
    while len(N) <= n:
        N.append(N[-1] + N[-2])
    return [Fraction(N[n - k + 1], N[n]) for k in range(1, n + 1)]


# -- stars --------------------------------------------------------------------


@dataclass
class StarSolution:
    order: list  # order[s] = original peripheral index of the s-th largest alpha
    b: list  # b[0..n], b[0] = 1
    center_fbar: list  # Fbar_0(b_i) for realized cut points, None where not realized
    recurrence: list  # raw recurrence values Fbar_0(b_i), i = 0..n
    case: str  # "CenterAtom" or "PeripheralAtom"
    j: int  # 0 in the CenterAtom case
    utilities: list  # in the caller's labelling (center first)
    network: Network
    profile: StrategyProfile
    conventions_agree: bool = True
    solution: SketchSolution | None = field(default=None, repr=False)


def star_recurrence(alpha_0: Fraction, alphas: Sequence[Fraction]) -> list[Fraction]:
    """Fbar_0(b_i) for i = n..0 (returned indexed by i); peripherals sorted descending."""
    n = len(alphas)
    vals = [F0] * (n + 1)
    vals[n] = F1
    for i in range(n, 0, -1):
        vals[i - 1] = vals[i] - (alphas[i - 1] + vals[i]) / (alpha_0 + i)
    return vals


def _star_recurrence_cdf_form(alpha_0: Fraction, alphas: Sequence[Fraction]) -> list[Fraction]:
    # the same recurrence written on F_0 = 1 - Fbar_0, starting from F_0(b_n) = 0
    n = len(alphas)
    vals = [F0] * (n + 1)
    for i in range(n, 0, -1):
        vals[i - 1] = vals[i] + (alphas[i - 1] + 1 - vals[i]) / (alpha_0 + i)
    return vals


def _select_j(fbar_vals: list) -> int:
    n = len(fbar_vals) - 1
    for i in range(n - 1, -1, -1):
        if fbar_vals[i] < 0:
            return i + 1
    return 0


def solve_star(alpha_0, peripheral_alpha: Sequence, spokes: Sequence | None = None) -> StarSolution:
    """Unique equilibrium of a star with unit spokes and distinct peripheral markets."""
    a0 = parse_rational(alpha_0)
    orig = [parse_rational(a) for a in peripheral_alpha]
    if spokes is not None and any(parse_rational(s) != 1 for s in spokes):
        raise NonUnitSpokes("the star solver handles unit spokes only")
    if not orig:
        raise MalformedInput("a star needs at least one peripheral seller")
    if a0 <= 0 or any(a <= 0 for a in orig):
        raise MalformedInput("star solver needs every captive market positive")
    if len(set(orig)) != len(orig):
        raise NonGeneric("peripheral captive markets must be distinct")
    n = len(orig)
    order = sorted(range(n), key=lambda k: -orig[k])
    al = [orig[k] for k in order]  # al[i-1] = alpha_i in sorted labelling

    rec = star_recurrence(a0, al)
    if any(v == 0 for v in rec):
        raise NonGeneric("star recurrence hits exactly 0")
    j = _select_j(rec)
    cdf_form = _star_recurrence_cdf_form(a0, al)
    agree = _select_j([1 - v for v in cdf_form]) == j
    if not agree:
        log.warning("star recurrence conventions disagree on case selection")

    b = [F1] * (n + 1)
    fb0: list = [None] * (n + 1)
    if j == 0:
        for i in range(1, n + 1):
            b[i] = a0 / (a0 + i)
        fb0 = list(rec)
        u0 = a0
        for i in range(1, n + 1):
            if not a0 > i * al[i - 1]:
                raise ConstructionBroken(f"center-atom case needs alpha_0 > {i} * alpha_{i}")
    else:
        aj = al[j - 1]
        b[j] = aj / (aj + rec[j])
        u0 = b[j] * (a0 + j)
        for i in range(j + 1, n + 1):
            b[i] = u0 / (a0 + i)
        for i in range(j, n + 1):
            fb0[i] = rec[i]
        fb0[0] = F0

    # utilities in sorted labelling
    us = [F0] * (n + 1)
    us[0] = u0
    us[n] = b[n] * (al[n - 1] + 1)
    for i in range(n, max(j, 1), -1):
        us[i - 1] = us[i] + b[i - 1] * (al[i - 2] - al[i - 1])
    for i in range(1, j):
        us[i] = al[i - 1]

    sorted_net = Network.star(a0, al)
    top = max(j, 1)
    center_support = ((b[n], b[top - 1]),) if j else ((b[n], F1),)
    supports = [center_support]
    table = [{}]
    for i in range(1, n + 1):
        if i < j:
            supports.append(())
            table.append({F1: F1})
        elif i == j:
            supports.append(((b[j], F1),))
            table.append({b[j]: F1, F1: u0 - a0 - (j - 1)})
        else:
            supports.append(((b[i], b[i - 1]),))
            table.append({b[i]: F1, b[i - 1]: F0})
    for i in range(j, n + 1):
        table[0][b[i]] = fb0[i]
    table[0][F1] = fb0[0] if j == 0 else F0
    atoms = {0} if j == 0 else set(range(1, j + 1))
    sketch = Sketch(tuple(supports), frozenset(atoms))
    ss = _table_solution(sorted_net, sketch, table)
    prof_sorted = sketch_solution_to_profile(ss)
    if list(ss.u) != us:
        raise ConstructionBroken(f"star utilities disagree: {ss.u} vs {us}")

    # back to the caller's labelling: sorted seller s+1 is original peripheral order[s]
    pos = {k: s for s, k in enumerate(order)}
    perm = [0] + [pos[k] + 1 for k in range(n)]
    profile = prof_sorted.permuted(perm)
    utilities = [us[p] for p in perm]
    net = Network.star(a0, orig)
    return StarSolution(order, b, fb0, rec, "CenterAtom" if j == 0 else "PeripheralAtom", j, utilities, net, profile, agree, ss)


# -- cliques (unverified construction) ---------------------------------------------


@dataclass
class CliqueCandidate:
    t: list  # t[0] = t_1 = 1 > t[1] > ...
    q: list  # q[i-1] = Fbar_i(t_i)
    network: Network
    profile: StrategyProfile
    flagged: bool = True  # never an equilibrium claim without a verifier pass
    solution: SketchSolution | None = field(default=None, repr=False)


def clique_candidate(alpha: Sequence) -> CliqueCandidate:
    """Staggered-interval construction on a unit clique; must be verified before use."""
    al = [parse_rational(a) for a in alpha]
    n = len(al)
    if n < 2:
        raise MalformedInput("a clique candidate needs at least two sellers")
    if any(x <= y for x, y in zip(al, al[1:])):
        raise MalformedInput("clique candidate expects strictly descending captive markets")
    q = [F0] * (n + 1)  # 1-based
    ratio = [F0] * (n + 1)  # ratio[i] = t_i / t_{i+1}
    q[n] = F1
    for i in range(n - 1, 0, -1):
        ratio[i] = (al[i - 1] + i - 1 + q[i + 1]) / (al[i - 1] + i - 1)
        q[i] = (al[i] + i) / ratio[i] - (al[i] + i - 1)
    t = [F1] * (n + 1)
    for i in range(2, n + 1):
        t[i] = t[i - 1] / ratio[i - 1]
    bad = [i for i in range(1, n) if not 0 < q[i] < 1]
    if bad:
        raise ConstructionBroken(f"q_i outside (0, 1) for sellers {bad}")
    net = Network.clique(al)
    supports = []
    table = []
    for i in range(1, n + 1):
        lo = t[min(i + 1, n)]
        hi = t[max(i - 1, 1)]
        supports.append(((lo, hi),))
        known = {t[i]: q[i]}
        if i < n:
            known[t[i + 1]] = F1
        if i > 1:
            known[t[i - 1]] = F0
        table.append(known)
    sketch = Sketch(tuple(supports), frozenset({0}))
    ss = _table_solution(net, sketch, table)
    return CliqueCandidate(t[1:], q[1:n], net, sketch_solution_to_profile(ss), True, ss)


def is_full_rank_solution(net: Network, ss: SketchSolution) -> bool:
    return check_full_rank(net, ss.sketch)
