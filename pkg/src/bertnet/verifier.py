"""Best-response verification of piecewise ``a + b/x`` profiles.

Every seller's utility is linear in x between consecutive breakpoints of the
profile, so the supremum over deviations is attained at a breakpoint (using
the left limit at 1, which equals the value at 1 under the win-ties-at-1
convention).  Comparing those candidates against the utility on the seller's
own support decides the equilibrium question exactly in rational mode.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import InvalidCdf
from .network import Network, Triviality, validate_network
from .numerics import Scalar, Tolerance, format_scalar, is_exact
from .strategy import PiecewiseCdf, StrategyProfile, breakpoints

FLOAT_TOL = 1e-8


class Verdict(enum.Enum):
    EQUILIBRIUM = "Equilibrium"
    NOT_EQUILIBRIUM = "NotEquilibrium"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class Finding:
    kind: str  # AtomBelowOne, SharedAtom, SupportUnion, InfimumZero, SupremumBelowOne
    seller: int
    detail: str

    def to_json(self) -> dict:
        return {"kind": self.kind, "seller": self.seller, "detail": self.detail}


@dataclass
class SellerDiagnostics:
    seller: int
    utility: Scalar  # value on the seller's own support (lowest, when not constant)
    best_price: Scalar
    best_value: Scalar
    gain: Scalar
    support_spread: Scalar  # max - min utility over own support candidates

    def to_json(self) -> dict:
        return {
            "seller": self.seller,
            "utility": format_scalar(self.utility),
            "bestPrice": format_scalar(self.best_price),
            "bestValue": format_scalar(self.best_value),
            "gain": format_scalar(self.gain),
            "supportSpread": format_scalar(self.support_spread),
        }


@dataclass
class VerificationReport:
    verdict: Verdict
    sellers: list
    findings: list = field(default_factory=list)
    max_violation: Scalar = 0
    tol: float = 0.0
    exact: bool = True
    triviality: Triviality = Triviality.NON_TRIVIAL

    @property
    def utilities(self) -> list:
        return [s.utility for s in self.sellers]

    @property
    def is_equilibrium(self) -> bool:
        return self.verdict is Verdict.EQUILIBRIUM

    def worst_seller(self) -> SellerDiagnostics | None:
        if not self.sellers:
            return None
        return max(self.sellers, key=lambda s: s.gain)

    def to_json(self) -> dict:
        return {
            "formatVersion": 1,
            "kind": "verification",
            "verdict": self.verdict.value,
            "exact": self.exact,
            "tolerance": self.tol,
            "network": self.triviality.value,
            "maxViolation": format_scalar(self.max_violation),
            "sellers": [s.to_json() for s in self.sellers],
            "findings": [f.to_json() for f in self.findings],
        }

    def to_table(self, labels=None) -> str:
        labels = labels or [str(s.seller) for s in self.sellers]
        rows = [("seller", "utility", "best price", "best value", "gain")]
        for s in self.sellers:
            rows.append((labels[s.seller], _fmt(s.utility), _fmt(s.best_price), _fmt(s.best_value), _fmt(s.gain)))
        widths = [max(len(r[c]) for r in rows) for c in range(5)]
        lines = ["  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip() for r in rows]
        lines.append(f"verdict: {self.verdict.value}  (max violation {_fmt(self.max_violation)})")
        for f in self.findings:
            lines.append(f"finding {f.kind} at seller {labels[f.seller]}: {f.detail}")
        return "\n".join(lines)


def _fmt(x) -> str:
    v = format_scalar(x)
    return v if isinstance(v, str) else f"{v:.10g}"


def _tol_for(net: Network, profile: StrategyProfile, tol: float | None) -> Tolerance:
    exact = profile.is_exact() and all(is_exact(a) for a in net.alpha) and all(is_exact(b) for b in net.beta.values())
    if tol is None:
        return Tolerance.exact() if exact else Tolerance(FLOAT_TOL)
    return Tolerance(tol)


def _merge(intervals: list, tol: Tolerance) -> list:
    out: list[list] = []
    for lo, hi in sorted(intervals):
        if out and tol.le(lo, out[-1][1]):
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return out


def structural_checks(net: Network, profile: StrategyProfile, tol: Tolerance | None = None) -> list[Finding]:
    """Necessary conditions every equilibrium of a non-trivial network satisfies."""
    profile.check_against(net)
    tol = tol or _tol_for(net, profile, None)
    out: list[Finding] = []
    for i, cdf in enumerate(profile):
        if cdf.zero_atom > 0:
            out.append(Finding("AtomBelowOne", i, f"mass {cdf.zero_atom} at price 0"))
    for i, j in net.edges:
        if profile[i].atom > tol.abs_tol and profile[j].atom > tol.abs_tol:
            out.append(Finding("SharedAtom", i, f"sellers {i} and {j} share a market and both have an atom at 1"))
    for i, cdf in enumerate(profile):
        nb = _merge([iv for j in net.neighbors(i) for iv in profile[j].support_intervals()], tol)
        for lo, hi in cdf.support_intervals():
            if lo == hi == 1:
                continue
            if not any(tol.le(a, lo) and tol.le(hi, b) for a, b in nb):
                out.append(Finding("SupportUnion", i, f"support piece [{_fmt(lo)}, {_fmt(hi)}] not covered by neighbours"))
    for i, cdf in enumerate(profile):
        inf = cdf.infimum
        if inf is not None and not inf > tol.abs_tol:
            out.append(Finding("InfimumZero", i, "support reaches price 0"))
    for i, cdf in enumerate(profile):
        sup = cdf.supremum
        if sup is None:
            continue
        nsup = [profile[j].supremum for j in net.neighbors(i)]
        if all(s is None or tol.le(s, sup) for s in nsup) and not tol.eq(sup, 1):
            out.append(Finding("SupremumBelowOne", i, f"local maximum supremum {_fmt(sup)} is below 1"))
    return out


def _utility_at(net: Network, i: int, x, profile: StrategyProfile, tie_rule: str = "win"):
    won = net.alpha[i]
    for j in net.neighbors(i):
        fb = profile[j].fbar(x)
        if x == 1 and tie_rule == "split":
            fb = fb - profile[j].atom / 2
        won = won + net.b(i, j) * fb
    return x * won


def verify_profile(
    net: Network,
    profile: StrategyProfile,
    tol: float | None = None,
    tie_rule: str = "win",
) -> VerificationReport:
    """Decide whether ``profile`` is an equilibrium of ``net``.

    ``tol`` of ``None`` selects exact comparison for all-rational inputs and
    1e-8 otherwise.  ``tie_rule`` ("win" or "split") only changes the payoff
    a seller with an atom at 1 collects there; deviations use the left limit.
    """
    if tie_rule not in ("win", "split"):
        raise ValueError(f"unknown tie rule {tie_rule!r}")
    profile.check_against(net)
    tolerance = _tol_for(net, profile, tol)
    exact = tolerance.abs_tol == 0
    triv = validate_network(net)
    findings = structural_checks(net, profile, tolerance) if triv is Triviality.NON_TRIVIAL else []

    cands = breakpoints(profile)
    if triv is Triviality.NO_CAPTIVE or any(c.zero_atom > 0 for c in profile):
        cands = [0 * cands[0]] + cands
    sellers = []
    for i, cdf in enumerate(profile):
        values = {x: _utility_at(net, i, x, profile) for x in cands}
        own = [x for x in cands if _in_own_support(cdf, x)]
        if not own:
            raise InvalidCdf(f"seller {i} has an empty support")
        own_vals = []
        for x in own:
            v = values[x]
            if x == 1 and tie_rule == "split" and cdf.atom > 0:
                v = _utility_at(net, i, x, profile, "split")
            own_vals.append(v)
        lo_own, hi_own = min(own_vals), max(own_vals)
        best_x = max(cands, key=lambda x: values[x])
        gain = values[best_x] - lo_own
        sellers.append(SellerDiagnostics(i, lo_own, best_x, values[best_x], gain, hi_own - lo_own))

    worst = max((s.gain for s in sellers), default=0)
    if findings:
        verdict = Verdict.NOT_EQUILIBRIUM
    elif tolerance.le(worst, 0):
        verdict = Verdict.EQUILIBRIUM
    elif not exact and worst < 10 * tolerance.abs_tol:
        verdict = Verdict.INCONCLUSIVE
    else:
        verdict = Verdict.NOT_EQUILIBRIUM
    return VerificationReport(verdict, sellers, findings, max(worst, 0 * worst), tolerance.abs_tol, exact, triv)


def _in_own_support(cdf: PiecewiseCdf, x) -> bool:
    if x == 1 and cdf.atom > 0:
        return True
    if x == 0:
        return cdf.zero_atom > 0
    return cdf.in_support(x)


def equilibrium_utilities(net: Network, profile: StrategyProfile) -> list:
    """Each seller's payoff at the top of its own support."""
    out = []
    for i, cdf in enumerate(profile):
        sup = cdf.supremum
        out.append(_utility_at(net, i, sup if sup is not None else Fraction(1), profile))
    return out


@dataclass
class GridScan:
    gains: list  # per seller: max grid utility - expected utility under own strategy
    best_prices: list
    expected: list

    @property
    def worst(self) -> float:
        return max(self.gains)


def brute_force_scan(net: Network, profile: StrategyProfile, points: int = 10_000) -> GridScan:
    """Independent float check: utility on a uniform price grid versus the expected
    payoff of each seller's own mixed strategy (midpoint rule on the same grid)."""
    fp = profile.to_float()
    grid = np.linspace(0.0, 1.0, points + 1)[1:]
    fbars = np.array([[cdf.fbar(float(x)) for x in grid] for cdf in fp])
    gains, best, expected = [], [], []
    for i in range(net.n):
        won = np.full(grid.shape, float(net.alpha[i]))
        for j in net.neighbors(i):
            won = won + float(net.b(i, j)) * fbars[j]
        util = grid * won
        # own mass on (x_{k-1}, x_k], valued at the cell midpoint
        edges = np.concatenate(([0.0], grid))
        own_fb = np.concatenate(([1.0 - fp[i].zero_atom], fbars[i]))
        mass = own_fb[:-1] - own_fb[1:]
        mids = 0.5 * (edges[:-1] + edges[1:])
        mid_won = np.full(mids.shape, float(net.alpha[i]))
        for j in net.neighbors(i):
            mid_won = mid_won + float(net.b(i, j)) * np.array([fp[j].fbar(float(x)) for x in mids])
        exp_u = float(np.sum(mass * mids * mid_won)) + fp[i].atom * util[-1]
        k = int(np.argmax(util))
        gains.append(float(util[k]) - exp_u)
        best.append(float(grid[k]))
        expected.append(exp_u)
    return GridScan(gains, best, expected)
