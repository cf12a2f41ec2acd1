"""Sketches (supports plus atom set), LP1, and reconstruction of the CDFs.

Boundary points are indexed ``0..k-1`` in decreasing order, so ``T[0] = 1``
and ``T[k-1]`` is the lowest price anyone posts.  Interval ``j`` is
``(T[j+1], T[j])``; ``R[j]`` lists the sellers pricing on it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import lp as lpmod
from .errors import EmptySketch, Infeasible, InterpolationNotMonotone, InvalidSketch
from .network import Network
from .numerics import Scalar, Tolerance, is_exact
from .strategy import PiecewiseCdf, Segment, StrategyProfile

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Sketch:
    """Per-seller supports (closed intervals in (0, 1]) and the sellers with an atom at 1."""

    supports: tuple  # supports[i] = tuple of (lo, hi)
    atoms: frozenset = frozenset()

    def __post_init__(self):
        sup = tuple(tuple(sorted((lo, hi) for lo, hi in s)) for s in self.supports)
        for i, s in enumerate(sup):
            for lo, hi in s:
                if not (0 < lo <= hi <= 1):
                    raise InvalidSketch(f"seller {i}: interval [{lo}, {hi}] not inside (0, 1]")
            for (_, h0), (l1, _) in zip(s, s[1:]):
                if l1 <= h0:
                    raise InvalidSketch(f"seller {i}: support intervals overlap or touch")
        object.__setattr__(self, "supports", sup)
        object.__setattr__(self, "atoms", frozenset(self.atoms))
        for i in self.atoms:
            if not 0 <= i < len(sup):
                raise InvalidSketch(f"atom set names unknown seller {i}")
        pts = {Fraction(1)} if not sup or all(is_exact(v) for s in sup for iv in s for v in iv) else {1.0}
        for s in sup:
            for lo, hi in s:
                pts.update((lo, hi))
        T = []
        for p in sorted(pts, reverse=True):
            if not T or p != T[-1]:
                T.append(p)
        object.__setattr__(self, "T", tuple(T))

    @classmethod
    def from_interval_sets(cls, T: Sequence[Scalar], R: Sequence[set], atoms=(), n: int | None = None) -> "Sketch":
        """Build from boundary points (descending, ``T[0] = 1``) and per-interval seller sets."""
        if n is None:
            n = 1 + max([i for r in R for i in r] + list(atoms) + [-1])
        return cls(supports_from_sets(T, R, n), frozenset(atoms))

    @property
    def n(self) -> int:
        return len(self.supports)

    @property
    def k(self) -> int:
        return len(self.T)

    def interval_sets(self) -> list[frozenset]:
        """``R[j]`` for ``j = 0..k-2``: sellers whose support covers ``(T[j+1], T[j])``."""
        out = []
        for j in range(self.k - 1):
            hi, lo = self.T[j], self.T[j + 1]
            out.append(frozenset(i for i, s in enumerate(self.supports) if any(a <= lo and hi <= b for a, b in s)))
        return out

    def in_support(self, i: int, t: Scalar) -> bool:
        if t == 1 and i in self.atoms:
            return True
        return any(a <= t <= b for a, b in self.supports[i])

    def seller_points(self, i: int) -> list[int]:
        """Indices j with ``T[j]`` in seller i's support."""
        return [j for j, t in enumerate(self.T) if self.in_support(i, t)]


def supports_from_sets(T: Sequence[Scalar], R: Sequence[set], n: int) -> tuple:
    supports = []
    for i in range(n):
        ivs: list[list] = []
        for j, r in enumerate(R):
            if i in r:
                lo, hi = T[j + 1], T[j]
                if ivs and ivs[-1][0] == hi:
                    ivs[-1][0] = lo
                else:
                    ivs.append([lo, hi])
        supports.append(tuple(sorted((lo, hi) for lo, hi in ivs)))
    return tuple(supports)


def check_sketch_shape(net: Network, sketch: Sketch) -> None:
    if sketch.n != net.n:
        raise InvalidSketch(f"sketch covers {sketch.n} sellers, network has {net.n}")
    if sketch.k == 0 or all(not s for s in sketch.supports) and not sketch.atoms:
        raise EmptySketch("sketch has no supports")
    for i in sketch.atoms:
        for j in net.neighbors(i):
            if j in sketch.atoms:
                raise InvalidSketch(f"neighbouring sellers {i} and {j} both have an atom at 1")
    for i, s in enumerate(sketch.supports):
        if not s and i not in sketch.atoms:
            raise InvalidSketch(f"seller {i} has an empty support and no atom")


@dataclass
class LP1:
    lp: lpmod.LinearProgram
    sketch: Sketch
    counts: dict = field(default_factory=dict)


def _fv(i: int, j: int):
    return ("F", i, j)


def _uv(i: int):
    return ("u", i)


def build_lp1(net: Network, sketch: Sketch, include_off_support: bool = True) -> LP1:
    """LP1 with strict inequalities rewritten as ``expr - s >= 0`` and objective ``max s``."""
    check_sketch_shape(net, sketch)
    if not all(is_exact(t) for t in sketch.T):
        raise InvalidSketch("LP1 needs exact boundary points")
    T, k = sketch.T, sketch.k
    R = sketch.interval_sets()
    prog = lpmod.LinearProgram()
    for i in range(net.n):
        prog.add_var(_uv(i), free=True)
    for i in range(net.n):
        for j in range(k):
            prog.add_var(_fv(i, j))
    prog.add_var("s")
    counts = dict.fromkeys(["eq-util", "off-eq-util", "starts-0", "no-atom", "yes-atom", "out-support", "CDF-mon"], 0)

    for i in range(net.n):
        pts = set(sketch.seller_points(i))
        for j, t in enumerate(T):
            coeffs = {_uv(i): Fraction(1)}
            for r in net.neighbors(i):
                coeffs[_fv(r, j)] = -t * Fraction(net.b(i, r))
            rhs = t * Fraction(net.alpha[i])
            if j in pts:
                prog.add(("eq-util", i, j), coeffs, "eq", rhs)
                counts["eq-util"] += 1
            elif include_off_support:
                prog.add(("off-eq-util", i, j), coeffs, "ge", rhs)
                counts["off-eq-util"] += 1
    for i in range(net.n):
        prog.add(("starts-0", i), {_fv(i, k - 1): 1}, "eq", 1)
        counts["starts-0"] += 1
        if i in sketch.atoms:
            prog.add(("yes-atom", i), {_fv(i, 0): 1, "s": -1}, "ge", 0)
            counts["yes-atom"] += 1
        else:
            prog.add(("no-atom", i), {_fv(i, 0): 1}, "eq", 0)
            counts["no-atom"] += 1
    for j, r in enumerate(R):
        for i in range(net.n):
            if i in r:
                # Fbar is non-increasing in price: more mass strictly below the lower end
                prog.add(("CDF-mon", i, j), {_fv(i, j + 1): 1, _fv(i, j): -1, "s": -1}, "ge", 0)
                counts["CDF-mon"] += 1
            else:
                prog.add(("out-support", i, j), {_fv(i, j): 1, _fv(i, j + 1): -1}, "eq", 0)
                counts["out-support"] += 1
    prog.add("slack-cap", {"s": 1}, "le", 1)
    prog.objective = {"s": 1}
    return LP1(prog, sketch, counts)


@dataclass
class SketchSolution:
    network: Network
    sketch: Sketch
    fbar: list  # fbar[i][j] = Fbar_i(T[j])
    u: list
    unique: bool = True
    slack: Scalar | None = None
    meta: dict = field(default_factory=dict)

    def value(self, i: int, j: int) -> Scalar:
        return self.fbar[i][j]

    @property
    def T(self) -> tuple:
        return self.sketch.T

    def is_exact(self) -> bool:
        return all(is_exact(v) for row in self.fbar for v in row) and all(is_exact(t) for t in self.sketch.T)


def solve_lp_rational(lp1: LP1, net: Network, reverse_order: bool = False) -> SketchSolution:
    res = lpmod.solve(lp1.lp, reverse_order=reverse_order)
    if res.status == "infeasible":
        raise Infeasible("LP1 infeasible: weak constraints cannot all hold", res.infeasible_rows)
    if res.status != "optimal":
        raise Infeasible(f"LP1 solve ended with status {res.status}")
    s = res.values["s"]
    if s <= 0:
        # weak constraints hold but some strict one cannot be made positive
        tight = _tight_strict(lp1, res.values)
        raise Infeasible("LP1 infeasible: strict constraints cannot hold (max-min slack is 0)", tight)
    sk = lp1.sketch
    fbar = [[res.values[_fv(i, j)] for j in range(sk.k)] for i in range(net.n)]
    u = [res.values[_uv(i)] for i in range(net.n)]
    unique = check_full_rank(net, sk)
    if not unique:
        log.warning("sketch is not full rank: solution set may not be unique, returning one vertex")
    return SketchSolution(net, sk, fbar, u, unique=unique, slack=s)


def _tight_strict(lp1: LP1, values: dict) -> list:
    out = []
    for con in lp1.lp.constraints:
        if "s" in con.coeffs and con.name != "slack-cap":
            lhs = sum(a * values[v] for v, a in con.coeffs.items() if v != "s")
            if lhs <= 0:
                out.append(con.name)
    return out


def solve_sketch(net: Network, sketch: Sketch, reverse_order: bool = False) -> SketchSolution:
    return solve_lp_rational(build_lp1(net, sketch), net, reverse_order)


def exact_rank(matrix: Sequence[Sequence]) -> int:
    rows = [[Fraction(v) for v in row] for row in matrix]
    rank, ncol = 0, len(rows[0]) if rows else 0
    for c in range(ncol):
        piv = next((r for r in range(rank, len(rows)) if rows[r][c] != 0), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        for r in range(len(rows)):
            if r != rank and rows[r][c] != 0:
                f = rows[r][c] / rows[rank][c]
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[rank])]
        rank += 1
    return rank


def check_full_rank(net: Network, sketch: Sketch) -> bool:
    for r in sketch.interval_sets():
        members = sorted(r)
        if not members:
            continue
        mat = [[net.b(i, j) if net.has_edge(i, j) else 0 for j in members] for i in members]
        if exact_rank(mat) < len(members):
            return False
    return True


def lp1_violations(net: Network, ss: SketchSolution, tol: Tolerance | None = None) -> list:
    """Names of LP1 constraints that ``ss`` violates (strict ones need a positive margin)."""
    sk = ss.sketch
    if tol is None:
        tol = Tolerance.exact() if ss.is_exact() and all(is_exact(a) for a in net.alpha) else Tolerance(1e-9)
    T, k = sk.T, sk.k
    bad = []
    for i in range(net.n):
        pts = set(sk.seller_points(i))
        for j, t in enumerate(T):
            val = t * (net.alpha[i] + sum(net.b(i, r) * ss.fbar[r][j] for r in net.neighbors(i)))
            if j in pts and not tol.eq(ss.u[i], val):
                bad.append(("eq-util", i, j))
            elif j not in pts and not tol.le(val, ss.u[i]):
                bad.append(("off-eq-util", i, j))
        if not tol.eq(ss.fbar[i][k - 1], 1):
            bad.append(("starts-0", i))
        if i in sk.atoms:
            if not ss.fbar[i][0] > tol.abs_tol:
                bad.append(("yes-atom", i))
        elif not tol.eq(ss.fbar[i][0], 0):
            bad.append(("no-atom", i))
    for j, r in enumerate(sk.interval_sets()):
        for i in range(net.n):
            lo, hi = ss.fbar[i][j + 1], ss.fbar[i][j]
            if i in r:
                if not lo - hi > tol.abs_tol:
                    bad.append(("CDF-mon", i, j))
            elif not tol.eq(lo, hi):
                bad.append(("out-support", i, j))
    return bad


def sketch_solution_to_profile(ss: SketchSolution) -> StrategyProfile:
    sk = ss.sketch
    T = sk.T
    R = sk.interval_sets()
    cdfs = []
    for i in range(sk.n):
        segs = []
        for j in reversed(range(sk.k - 1)):
            if i not in R[j]:
                continue
            lo, hi = T[j + 1], T[j]
            f_lo, f_hi = ss.fbar[i][j + 1], ss.fbar[i][j]
            if f_lo < f_hi:
                raise InterpolationNotMonotone(f"seller {i}: Fbar rises on [{lo}, {hi}]")
            segs.append(Segment.through(lo, hi, f_lo, f_hi))
        atom = ss.fbar[i][0] if i in sk.atoms else 0 * ss.fbar[i][0]
        cdfs.append(PiecewiseCdf(tuple(segs), atom))
    return StrategyProfile(tuple(cdfs))


def solution_from_values(net: Network, sketch: Sketch, fbar_of) -> SketchSolution:
    """Assemble a sketch solution from a callable ``fbar_of(i, t)``; utilities are read off
    at each seller's highest support point."""
    T = sketch.T
    fbar = [[fbar_of(i, t) for t in T] for i in range(net.n)]
    u = []
    for i in range(net.n):
        pts = sketch.seller_points(i)
        j = pts[0] if pts else 0
        t = T[j]
        u.append(t * (net.alpha[i] + sum(net.b(i, r) * fbar[r][j] for r in net.neighbors(i))))
    return SketchSolution(net, sketch, fbar, u, unique=check_full_rank(net, sketch))
