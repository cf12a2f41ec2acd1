"""A small exact two-phase simplex over Fractions (Bland's rule).

Problems here have at most a few hundred rows and columns, so a dense
tableau is fine.  Variables are named; each may be free or non-negative.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Sequence

ZERO = Fraction(0)


@dataclass
class Constraint:
    name: Hashable
    coeffs: dict  # var -> coefficient
    kind: str  # "eq", "le", "ge"
    rhs: Fraction = ZERO


@dataclass
class LinearProgram:
    """maximize ``objective . x`` subject to ``constraints``."""

    variables: list = field(default_factory=list)
    free: set = field(default_factory=set)
    constraints: list = field(default_factory=list)
    objective: dict = field(default_factory=dict)

    def add_var(self, name, free: bool = False) -> None:
        self.variables.append(name)
        if free:
            self.free.add(name)

    def add(self, name, coeffs: dict, kind: str, rhs=ZERO) -> None:
        if kind not in ("eq", "le", "ge"):
            raise ValueError(kind)
        self.constraints.append(Constraint(name, {k: Fraction(v) for k, v in coeffs.items() if v != 0}, kind, Fraction(rhs)))


@dataclass
class LPResult:
    status: str  # "optimal", "infeasible", "unbounded"
    values: dict = field(default_factory=dict)
    objective: Fraction | None = None
    infeasible_rows: list = field(default_factory=list)
    pivots: int = 0


class _Tableau:
    def __init__(self, rows: list[list[Fraction]], rhs: list[Fraction], basis: list[int], order: Sequence[int]):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.ncols = len(rows[0]) if rows else 0
        self.rank = {c: r for r, c in enumerate(order)}  # Bland priority of each column
        self.pivots = 0

    def pivot(self, r: int, c: int) -> None:
        row = self.rows[r]
        p = row[c]
        if p != 1:
            inv = 1 / p
            self.rows[r] = row = [v * inv for v in row]
            self.rhs[r] *= inv
        for k, other in enumerate(self.rows):
            if k == r:
                continue
            f = other[c]
            if f:
                self.rows[k] = [a - f * b if b else a for a, b in zip(other, row)]
                self.rhs[k] -= f * self.rhs[r]
        self.basis[r] = c
        self.pivots += 1

    def reduced_costs(self, cost: list[Fraction]) -> list[Fraction]:
        red = list(cost)
        for r, bvar in enumerate(self.basis):
            cb = cost[bvar]
            if cb:
                row = self.rows[r]
                red = [a - cb * b if b else a for a, b in zip(red, row)]
        return red

    def optimize(self, cost: list[Fraction], allowed: set[int]) -> str:
        """Maximize ``cost . x`` using only columns in ``allowed`` as entering."""
        while True:
            red = self.reduced_costs(cost)
            candidates = [c for c in allowed if red[c] > 0 and c not in self.basis]
            if not candidates:
                return "optimal"
            enter = min(candidates, key=self.rank.__getitem__)
            best = None
            for r, row in enumerate(self.rows):
                a = row[enter]
                if a > 0:
                    ratio = self.rhs[r] / a
                    key = (ratio, self.rank[self.basis[r]])
                    if best is None or key < best[0]:
                        best = (key, r)
            if best is None:
                return "unbounded"
            self.pivot(best[1], enter)


def solve(lp: LinearProgram, reverse_order: bool = False) -> LPResult:
    """Solve ``lp`` exactly.  ``reverse_order`` flips Bland's column priority."""
    # column layout: one column per non-negative variable, two for free ones
    cols: list[tuple] = []
    col_of: dict = {}
    for v in lp.variables:
        col_of[v] = [len(cols)]
        cols.append((v, 1))
        if v in lp.free:
            col_of[v].append(len(cols))
            cols.append((v, -1))
    n_struct = len(cols)
    n_slack = sum(1 for c in lp.constraints if c.kind != "eq")
    m = len(lp.constraints)
    width = n_struct + n_slack + m  # artificials last

    rows, rhs, basis = [], [], []
    slack = n_struct
    for r, con in enumerate(lp.constraints):
        row = [ZERO] * width
        for v, a in con.coeffs.items():
            cs = col_of[v]
            row[cs[0]] += a
            if len(cs) == 2:
                row[cs[1]] -= a
        if con.kind == "le":
            row[slack] = Fraction(1)
            slack += 1
        elif con.kind == "ge":
            row[slack] = Fraction(-1)
            slack += 1
        b = con.rhs
        if b < 0:
            row = [-x for x in row]
            b = -b
        row[n_struct + n_slack + r] = Fraction(1)
        rows.append(row)
        rhs.append(b)
        basis.append(n_struct + n_slack + r)

    order = list(range(width))
    if reverse_order:
        order = list(reversed(range(n_struct + n_slack))) + list(range(n_struct + n_slack, width))
    tab = _Tableau(rows, rhs, basis, order)

    art = set(range(n_struct + n_slack, width))
    phase1 = [ZERO] * width
    for c in art:
        phase1[c] = Fraction(-1)
    tab.optimize(phase1, set(range(width)))
    infeasibility = sum((tab.rhs[r] for r, b in enumerate(tab.basis) if b in art), ZERO)
    if infeasibility > 0:
        bad = [lp.constraints[b - n_struct - n_slack].name for r, b in enumerate(tab.basis) if b in art and tab.rhs[r] > 0]
        return LPResult("infeasible", infeasible_rows=bad, pivots=tab.pivots)

    # drive zero-valued artificials out of the basis, dropping redundant rows
    r = 0
    while r < len(tab.rows):
        if tab.basis[r] in art:
            row = tab.rows[r]
            c = next((c for c in range(n_struct + n_slack) if row[c] != 0), None)
            if c is None:
                del tab.rows[r], tab.rhs[r], tab.basis[r]
                continue
            tab.pivot(r, c)
        r += 1

    cost = [ZERO] * width
    for v, a in lp.objective.items():
        cs = col_of[v]
        cost[cs[0]] += Fraction(a)
        if len(cs) == 2:
            cost[cs[1]] -= Fraction(a)
    status = tab.optimize(cost, set(range(n_struct + n_slack)))
    if status == "unbounded":
        return LPResult("unbounded", pivots=tab.pivots)

    x = [ZERO] * width
    for r, b in enumerate(tab.basis):
        x[b] = tab.rhs[r]
    values = {}
    for v in lp.variables:
        cs = col_of[v]
        values[v] = x[cs[0]] - (x[cs[1]] if len(cs) == 2 else 0)
    obj = sum((Fraction(a) * values[v] for v, a in lp.objective.items()), ZERO)
    return LPResult("optimal", values, obj, pivots=tab.pivots)
