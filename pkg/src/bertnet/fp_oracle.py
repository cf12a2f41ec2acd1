"""Discretised fictitious play used as an independent numerical oracle.

Sellers take turns (round robin) playing an exact best response on a price
grid against the opponents' empirical price histograms.  The reported
histogram skips a burn-in prefix of the run.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass

import numpy as np

from .errors import MalformedInput
from .network import Network
from .strategy import StrategyProfile


class TieRule(enum.Enum):
    SPLIT_EQUALLY = "SplitEqually"
    LOWER_INDEX_WINS = "LowerIndexWins"
    RANDOM_UNIFORM = "RandomUniform"


@dataclass(frozen=True)
class FpConfig:
    grid_size: int = 1000
    iterations: int = 100_000
    tie_rule: TieRule = TieRule.SPLIT_EQUALLY
    seed: int = 0
    burn_in: float = 0.1  # fraction of iterations left out of the histogram

    def __post_init__(self):
        if self.grid_size < 2:
            raise MalformedInput("grid size must be at least 2")
        if self.iterations < 1:
            raise MalformedInput("need at least one iteration")
        if not 0 <= self.burn_in < 1:
            raise MalformedInput("burn-in fraction must lie in [0, 1)")
        object.__setattr__(self, "tie_rule", TieRule(self.tie_rule))


def price_grid(net: Network, m: int) -> np.ndarray:
    """``linspace(delta, 1, m)``; delta is the smallest ``alpha_i / (alpha_i + beta_i)``
    when that is positive and ``1/m`` otherwise."""
    ratios = []
    for i in range(net.n):
        tot = float(net.alpha[i]) + float(net.beta_total(i))
        ratios.append(float(net.alpha[i]) / tot if tot > 0 else 0.0)
    delta = min(ratios)
    if not delta > 0:
        delta = 1.0 / m
    return np.linspace(delta, 1.0, m)


@dataclass
class EmpiricalProfile:
    grid: np.ndarray
    hist: np.ndarray  # shape (n, m), rows sum to 1

    @property
    def n(self) -> int:
        return self.hist.shape[0]

    def cdf(self, i: int) -> np.ndarray:
        """Empirical ``Pr[price <= grid[k]]``."""
        return np.cumsum(self.hist[i])

    def mass_at_lowest(self, i: int) -> float:
        return float(self.hist[i, 0])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["seller", "gridPrice", "mass"])
        for i in range(self.n):
            for x, v in zip(self.grid, self.hist[i]):
                w.writerow([i, repr(float(x)), repr(float(v))])
        return buf.getvalue()


def _tie_shares(cfg: FpConfig, i: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """Share of a tied shared market that seller i wins against each opponent."""
    if cfg.tie_rule is TieRule.SPLIT_EQUALLY:
        return np.full(n, 0.5)
    if cfg.tie_rule is TieRule.LOWER_INDEX_WINS:
        return np.array([1.0 if i < j else 0.0 for j in range(n)])
    return np.full(n, rng.uniform())


def expected_payoffs(net: Network, i: int, grid: np.ndarray, counts: np.ndarray, shares: np.ndarray) -> np.ndarray:
    """Payoff of seller i at every grid price against the opponents' histograms."""
    won = np.full(grid.shape, float(net.alpha[i]))
    for j in net.neighbors(i):
        total = counts[j].sum()
        above = (total - np.cumsum(counts[j])) / total
        tied = counts[j] / total
        won += float(net.b(i, j)) * (above + shares[j] * tied)
    return grid * won


# payoffs this close to the maximum count as ties
BR_REL_TOL = 1e-12


def best_response_index(pay: np.ndarray, rel_tol: float = BR_REL_TOL) -> int:
    """Lowest grid index whose payoff is within rounding of the maximum."""
    top = float(np.max(pay))
    return int(np.flatnonzero(pay >= top - rel_tol * max(abs(top), 1.0))[0])


def run_fictitious_play(net: Network, cfg: FpConfig | None = None, check_best_response: bool = False) -> EmpiricalProfile:
    cfg = cfg or FpConfig()
    grid = price_grid(net, cfg.grid_size)
    m = cfg.grid_size
    rng = np.random.default_rng(cfg.seed)
    counts = np.zeros((net.n, m))
    counts[:, m - 1] = 1.0  # everyone opens at price 1
    reported = np.zeros((net.n, m))
    start = int(cfg.burn_in * cfg.iterations)
    for it in range(cfg.iterations):
        i = it % net.n
        shares = _tie_shares(cfg, i, net.n, rng)
        pay = expected_payoffs(net, i, grid, counts, shares)
        k = best_response_index(pay)
        if check_best_response and not np.all(pay[k] >= pay - BR_REL_TOL * max(abs(float(np.max(pay))), 1.0)):
            raise AssertionError("best response is not a grid maximiser")
        counts[i, k] += 1
        if it >= start:
            reported[i, k] += 1
    sums = reported.sum(axis=1, keepdims=True)
    # a seller that never moved after burn-in keeps its opening play
    for i in range(net.n):
        if sums[i, 0] == 0:
            reported[i, m - 1] = 1.0
            sums[i, 0] = 1.0
    return EmpiricalProfile(grid, reported / sums)


def kolmogorov_distance(emp: EmpiricalProfile, analytic: StrategyProfile) -> list[float]:
    """Per-seller ``max_k |F_emp(x_k) - F(x_k)|`` over the grid points."""
    out = []
    for i, cdf in enumerate(analytic):
        ref = np.array([float(cdf.eval(float(x), "F")) for x in emp.grid])
        out.append(float(np.max(np.abs(emp.cdf(i) - ref))))
    return out


def sampled_profile(analytic: StrategyProfile, grid: np.ndarray) -> EmpiricalProfile:
    """Histogram putting each seller's probability of ``(x_{k-1}, x_k]`` on ``x_k``."""
    rows = []
    for cdf in analytic:
        F = np.array([float(cdf.eval(float(x), "F")) for x in grid])
        rows.append(np.diff(np.concatenate(([0.0], F))))
    return EmpiricalProfile(np.asarray(grid), np.array(rows))


def mass_outside(emp: EmpiricalProfile, supports: list, inflate: float = 0.05) -> list[float]:
    """Per-seller histogram mass outside ``[lo - inflate, hi + inflate]``."""
    out = []
    for i, (lo, hi) in enumerate(supports):
        mask = (emp.grid < float(lo) - inflate) | (emp.grid > float(hi) + inflate)
        out.append(float(emp.hist[i][mask].sum()))
    return out
