"""Sketches with unknown boundary points.

With the boundary points free, the equality part of LP1 becomes a system of
bilinear equations in (t, Fbar, u).  It is solved in floats by nonlinear
least squares; the strict and off-support conditions are checked afterwards,
and boundary points that look rational are snapped and re-solved exactly.

Intervals are indexed from the top: interval ``j`` is ``(t_{j+1}, t_j)`` with
``t_0 = 1``, so ``R[0]`` lists the sellers pricing just below 1.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import least_squares

from .errors import Infeasible, InvalidSketch, NoConvergence, StrictViolated
from .network import Network
from .numerics import Tolerance, snap_rational
from .sketch import (
    Sketch,
    SketchSolution,
    build_lp1,
    check_full_rank,
    lp1_violations,
    solve_lp_rational,
)

log = logging.getLogger(__name__)

SNAP_QUALITY = 1e-6
RESIDUAL_TOL = 1e-12
MAX_ITERATIONS = 500
MAX_RESTARTS = 20


@dataclass(frozen=True)
class FreeBoundarySketch:
    """Interval-seller sets ``R[0..k-2]`` (top interval first) and the atom set."""

    R: tuple
    atoms: frozenset = frozenset()
    n: int | None = None

    def __post_init__(self):
        R = tuple(frozenset(r) for r in self.R)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "atoms", frozenset(self.atoms))
        if not R:
            raise InvalidSketch("a free-boundary sketch needs at least one interval")
        if any(not r for r in R):
            raise InvalidSketch("every interval needs at least one active seller")
        if self.n is None:
            object.__setattr__(self, "n", 1 + max(max(max(r) for r in R), max(self.atoms, default=-1)))

    @classmethod
    def from_supports(cls, n: int, supports: Mapping[int, Sequence[int]], atoms=()) -> "FreeBoundarySketch":
        """``supports[i]`` lists the interval indices seller i prices on."""
        k1 = 1 + max((j for js in supports.values() for j in js), default=-1)
        R = [set() for _ in range(k1)]
        for i, js in supports.items():
            for j in js:
                R[j].add(i)
        return cls(tuple(R), frozenset(atoms), n)

    @property
    def k(self) -> int:
        return len(self.R) + 1

    def points_of(self, i: int) -> list[int]:
        pts = set()
        for j, r in enumerate(self.R):
            if i in r:
                pts.update((j, j + 1))
        if i in self.atoms:
            pts.add(0)
        return sorted(pts)

    def reflected(self, perm: Sequence[int]) -> "FreeBoundarySketch":
        """Same shape with seller ``perm[k]`` renamed to ``k``."""
        inv = {old: new for new, old in enumerate(perm)}
        return FreeBoundarySketch(tuple({inv[i] for i in r} for r in self.R), {inv[i] for i in self.atoms}, self.n)

    def sketch_at(self, T: Sequence) -> Sketch:
        return Sketch.from_interval_sets(T, self.R, self.atoms, self.n)


def fbar_from_masses(fbs: FreeBoundarySketch, masses: Mapping[tuple, float], atoms: Mapping[int, float] | None = None) -> list[list[float]]:
    """Convert per-interval masses ``masses[(i, j)]`` and atoms at 1 into Fbar values at
    the boundary points: ``Fbar_i(t_j)`` is the atom plus all mass above ``t_j``."""
    atoms = atoms or {}
    out = []
    for i in range(fbs.n):
        row = [0.0] * fbs.k
        acc = atoms.get(i, 0)
        row[0] = acc
        for j in range(fbs.k - 1):
            acc = acc + masses.get((i, j), 0)
            row[j + 1] = acc
        out.append(row)
    return out


class _System:
    """Residuals and Jacobian of the equality subsystem."""

    def __init__(self, net: Network, fbs: FreeBoundarySketch):
        self.net, self.fbs = net, fbs
        n, k = net.n, fbs.k
        self.n, self.k = n, k
        self.nt = k - 1
        self.size = self.nt + n + n * k
        self.alpha = np.array([float(a) for a in net.alpha])
        self.nbrs = [[(r, float(net.b(i, r))) for r in net.neighbors(i)] for i in range(n)]
        rows = []
        for i in range(n):
            for j in fbs.points_of(i):
                rows.append(("eq", i, j))
        for i in range(n):
            rows.append(("start", i, k - 1))
            if i not in fbs.atoms:
                rows.append(("noatom", i, 0))
        for j, r in enumerate(fbs.R):
            for i in range(n):
                if i not in r:
                    rows.append(("flat", i, j))
        self.rows = rows

    # x = [t_1..t_{k-1}, u_0..u_{n-1}, F[0][0..k-1], F[1][...], ...]
    def t_index(self, j: int) -> int | None:
        return None if j == 0 else j - 1

    def u_index(self, i: int) -> int:
        return self.nt + i

    def f_index(self, i: int, j: int) -> int:
        return self.nt + self.n + i * self.k + j

    def t_of(self, x: np.ndarray) -> np.ndarray:
        return np.concatenate(([1.0], x[: self.nt]))

    def residuals(self, x: np.ndarray) -> np.ndarray:
        t = self.t_of(x)
        out = np.empty(len(self.rows))
        for m, (kind, i, j) in enumerate(self.rows):
            if kind == "eq":
                won = self.alpha[i] + sum(b * x[self.f_index(r, j)] for r, b in self.nbrs[i])
                out[m] = x[self.u_index(i)] - t[j] * won
            elif kind == "start":
                out[m] = x[self.f_index(i, j)] - 1.0
            elif kind == "noatom":
                out[m] = x[self.f_index(i, j)]
            else:
                out[m] = x[self.f_index(i, j)] - x[self.f_index(i, j + 1)]
        return out

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        t = self.t_of(x)
        J = np.zeros((len(self.rows), self.size))
        for m, (kind, i, j) in enumerate(self.rows):
            if kind == "eq":
                J[m, self.u_index(i)] = 1.0
                won = self.alpha[i]
                for r, b in self.nbrs[i]:
                    won += b * x[self.f_index(r, j)]
                    J[m, self.f_index(r, j)] = -t[j] * b
                ti = self.t_index(j)
                if ti is not None:
                    J[m, ti] = -won
            elif kind in ("start", "noatom"):
                J[m, self.f_index(i, j)] = 1.0
            else:
                J[m, self.f_index(i, j)] = 1.0
                J[m, self.f_index(i, j + 1)] = -1.0
        return J

    def linear_fill(self, t: np.ndarray, fbar0: list | None = None) -> np.ndarray:
        """Given boundary points, the system is linear in (u, Fbar); seed those by lstsq."""
        x = np.zeros(self.size)
        x[: self.nt] = t[1:]
        if fbar0 is not None:
            for i in range(self.n):
                for j in range(self.k):
                    x[self.f_index(i, j)] = fbar0[i][j]
        J = self.jacobian(x)
        cols = list(range(self.nt, self.size))
        A = J[:, cols]
        b = -(self.residuals(x) - A @ x[cols])
        sol, *_ = np.linalg.lstsq(A, b, rcond=None)
        x[cols] = sol
        return x

    def to_solution(self, x: np.ndarray) -> SketchSolution:
        t = self.t_of(x)
        T = [1.0] + [float(v) for v in t[1:]]
        sk = self.fbs.sketch_at(T)
        fbar = [[float(x[self.f_index(i, j)]) for j in range(self.k)] for i in range(self.n)]
        u = [float(x[self.u_index(i)]) for i in range(self.n)]
        return SketchSolution(self.net, sk, fbar, u, unique=check_full_rank(self.net, sk))


def default_seed(k: int) -> np.ndarray:
    if k == 1:
        return np.array([1.0])
    return np.array([0.5 ** (j / (k - 1)) for j in range(k)])


def _perturbed(seed: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    t = seed * rng.uniform(0.8, 1.2, size=seed.shape)
    t = np.clip(t, 1e-3, 0.999)
    t[0] = 1.0
    return np.concatenate(([1.0], np.sort(t[1:])[::-1]))


def _ordering_ok(T: Sequence) -> bool:
    return all(a > b for a, b in zip(T, T[1:])) and T[-1] > 0


def solve_free_boundaries(
    net: Network,
    fbs: FreeBoundarySketch,
    seed: Sequence[float] | None = None,
    *,
    rng_seed: int = 0,
    max_restarts: int = MAX_RESTARTS,
    max_iterations: int = MAX_ITERATIONS,
    initial_fbar: list | None = None,
    initial_masses: Mapping[tuple, float] | None = None,
    initial_atoms: Mapping[int, float] | None = None,
    snap: bool = True,
    tol: float = 1e-9,
) -> SketchSolution:
    """Find boundary points and a sketch solution for a sketch shape.

    ``seed`` is an initial guess for all k boundary points (``seed[0] = 1``).
    Restarts perturb it by a uniform factor in [0.8, 1.2] drawn from
    ``rng_seed``.  The returned solution carries ``meta`` with the float
    residual, the restart index and whether the exact refinement succeeded.
    """
    if fbs.n != net.n:
        raise InvalidSketch(f"sketch shape covers {fbs.n} sellers, network has {net.n}")
    for i in fbs.atoms:
        for j in net.neighbors(i):
            if j in fbs.atoms:
                raise InvalidSketch(f"neighbouring sellers {i} and {j} both have an atom at 1")
    system = _System(net, fbs)
    k = fbs.k
    base = np.asarray(seed, dtype=float) if seed is not None else default_seed(k)
    if base.shape != (k,):
        raise InvalidSketch(f"seed needs {k} boundary points")
    if initial_masses is not None:
        initial_fbar = fbar_from_masses(fbs, initial_masses, initial_atoms)
    rng = np.random.default_rng(rng_seed)
    lower = np.full(system.size, -np.inf)
    upper = np.full(system.size, np.inf)
    lower[: system.nt] = 1e-9
    upper[: system.nt] = 1.0

    rejected: StrictViolated | None = None
    converged_any = False
    for attempt in range(max_restarts + 1):
        t0 = base if attempt == 0 else _perturbed(base, rng)
        x0 = system.linear_fill(t0, initial_fbar if attempt == 0 else None)
        x0[: system.nt] = np.clip(x0[: system.nt], 2e-9, 1.0)
        res = least_squares(
            system.residuals, x0, jac=system.jacobian, bounds=(lower, upper),
            method="trf", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=max_iterations,
        )
        x = res.x
        resid = float(np.max(np.abs(system.residuals(x)))) if len(system.rows) else 0.0
        if resid >= RESIDUAL_TOL:
            # a few plain Newton (Gauss-Newton) polishing steps
            for _ in range(20):
                r = system.residuals(x)
                step, *_ = np.linalg.lstsq(system.jacobian(x), -r, rcond=None)
                x = x + step
                resid = float(np.max(np.abs(system.residuals(x))))
                if resid < RESIDUAL_TOL:
                    break
        log.debug("attempt %d: residual %.3e", attempt, resid)
        if resid >= RESIDUAL_TOL or not np.all(np.isfinite(x)):
            continue
        converged_any = True
        T = system.t_of(x)
        meta = {"residual": resid, "attempt": attempt, "exact": False}
        if not _ordering_ok(list(T)):
            if rejected is None:
                rejected = StrictViolated("boundary points are not strictly decreasing", None, ["ordering"])
            continue
        sol = system.to_solution(x)
        sol.meta.update(meta)
        bad = lp1_violations(net, sol, Tolerance(tol))
        if snap:
            exact = _exact_refinement(net, fbs, sol, tol)
            if exact is not None:
                ex_sol, ex_bad = exact
                ex_sol.meta.update(meta, exact=True)
                sol, bad = ex_sol, ex_bad
        if bad:
            if rejected is None or rejected.solution is None:
                rejected = StrictViolated(f"converged, but {len(bad)} strict or off-support conditions fail", sol, bad)
            continue
        return sol
    if rejected is not None:
        raise rejected
    if not converged_any:
        raise NoConvergence(f"no root with residual < {RESIDUAL_TOL} after {max_restarts} restarts")
    raise NoConvergence("equality system did not converge")


def _exact_refinement(net: Network, fbs: FreeBoundarySketch, sol: SketchSolution, tol: float):
    """Snap the boundary points to nearby rationals and re-solve LP1 exactly.

    Returns ``(solution, violations)`` or ``None`` when snapping does not apply.
    """
    if not all(isinstance(a, (int, Fraction)) for a in net.alpha):
        return None
    if not all(isinstance(b, (int, Fraction)) for b in net.beta.values()):
        return None
    T = [Fraction(1)]
    for t in sol.T[1:]:
        q = snap_rational(float(t), 10**6, 1e-10)
        # generic floats have convergents within 1/q^2; only far closer fits suggest a rational
        if q is None or abs(float(q) - float(t)) * q.denominator**2 > SNAP_QUALITY:
            return None
        T.append(q)
    if not _ordering_ok(T):
        return None
    sk = fbs.sketch_at(T)
    try:
        ex = solve_lp_rational(build_lp1(net, sk), net)
        bad: list = []
    except Infeasible:
        # equality part only, so the caller still sees exact values and the failing checks
        try:
            ex = solve_lp_rational(build_lp1(net, sk, include_off_support=False), net)
        except Infeasible:
            return None
        bad = lp1_violations(net, ex, Tolerance.exact())
    close = all(
        abs(float(a) - b) <= 1e-6 for ra, rb in zip(ex.fbar, sol.fbar) for a, b in zip(ra, rb)
    ) and all(abs(float(a) - b) <= 1e-6 for a, b in zip(ex.u, sol.u))
    if not close:
        log.info("exact re-solve landed on a different vertex; keeping the float solution")
        return None
    return ex, bad
