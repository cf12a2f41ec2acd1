"""Mixed pricing strategies whose tail probabilities are piecewise ``a + b/x``.

A strategy is stored through ``Fbar(x) = Pr[price >= x]`` rather than the CDF
itself.  Between support pieces ``Fbar`` is flat, below the support it is 1
and at ``x = 1`` it equals the atom at 1, so ``Fbar`` is continuous on (0, 1].
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import InvalidCdf, OutOfDomain
from .network import Network
from .numerics import Scalar, Tolerance, is_exact


@dataclass(frozen=True)
class Segment:
    """``Fbar(x) = a + b / x`` on ``[lo, hi]``."""

    lo: Scalar
    hi: Scalar
    a: Scalar
    b: Scalar

    def value(self, x: Scalar) -> Scalar:
        return self.a + self.b / x

    @classmethod
    def through(cls, lo: Scalar, hi: Scalar, f_lo: Scalar, f_hi: Scalar) -> "Segment":
        """The unique ``a + b/x`` with the given values at both ends."""
        if not lo < hi:
            raise InvalidCdf(f"segment needs lo < hi, got [{lo}, {hi}]")
        b = (f_lo - f_hi) * lo * hi / (hi - lo)
        a = f_hi - b / hi
        return cls(lo, hi, a, b)


def _tol_for(*values) -> Tolerance:
    return Tolerance.exact() if all(is_exact(v) for v in values) else Tolerance(1e-9)


@dataclass(frozen=True)
class PiecewiseCdf:
    segments: tuple = ()
    atom: Scalar = Fraction(0)
    zero_atom: Scalar = Fraction(0)  # mass at price 0; only the all-zero Bertrand profile uses it

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        self.validate()

    # -- constructors -------------------------------------------------------

    @classmethod
    def point_at_one(cls) -> "PiecewiseCdf":
        return cls((), Fraction(1))

    @classmethod
    def point_at_zero(cls) -> "PiecewiseCdf":
        return cls((), Fraction(0), Fraction(1))

    @classmethod
    def from_knots(cls, knots: Sequence[tuple[Scalar, Scalar]], atom: Scalar | None = None) -> "PiecewiseCdf":
        """Interpolate ``a + b/x`` through consecutive ``(x, Fbar(x))`` knots (ascending x)."""
        segs = [Segment.through(x0, x1, f0, f1) for (x0, f0), (x1, f1) in zip(knots, knots[1:])]
        if atom is None:
            atom = knots[-1][1] if knots and knots[-1][0] == 1 else Fraction(0)
        return cls(tuple(segs), atom)

    # -- checks -------------------------------------------------------------

    def validate(self, tol: Tolerance | None = None) -> None:
        vals = [self.atom, self.zero_atom] + [v for s in self.segments for v in (s.lo, s.hi, s.a, s.b)]
        tol = tol or _tol_for(*vals)
        if not (tol.le(0, self.atom) and tol.le(self.atom, 1)):
            raise InvalidCdf(f"atom at 1 must lie in [0, 1], got {self.atom}")
        if not (tol.le(0, self.zero_atom) and tol.le(self.zero_atom, 1)):
            raise InvalidCdf(f"mass at 0 must lie in [0, 1], got {self.zero_atom}")
        if not self.segments:
            if not tol.eq(self.atom + self.zero_atom, 1):
                raise InvalidCdf("a strategy without segments must put all mass on its atoms")
            return
        prev_hi = None
        prev_val = 1 - self.zero_atom
        for s in self.segments:
            if not (0 < s.lo < s.hi <= 1):
                raise InvalidCdf(f"segment [{s.lo}, {s.hi}] must satisfy 0 < lo < hi <= 1")
            if prev_hi is not None and s.lo < prev_hi:
                raise InvalidCdf("segments overlap or are out of order")
            if s.b < 0 and not tol.eq(s.b, 0):
                raise InvalidCdf(f"Fbar increases on [{s.lo}, {s.hi}]")
            if not tol.eq(s.value(s.lo), prev_val):
                raise InvalidCdf(f"Fbar jumps at {s.lo}: {prev_val} -> {s.value(s.lo)}")
            prev_hi, prev_val = s.hi, s.value(s.hi)
        if not tol.eq(prev_val, self.atom):
            raise InvalidCdf(f"Fbar at the top of the support ({prev_val}) differs from the atom at 1 ({self.atom})")
        if not tol.le(0, prev_val):
            raise InvalidCdf("Fbar went negative")

    # -- evaluation ---------------------------------------------------------

    @property
    def lows(self) -> list:
        return [s.lo for s in self.segments]

    def fbar(self, x: Scalar) -> Scalar:
        if x < 0 or x > 1:
            raise OutOfDomain(f"price {x} outside [0, 1]")
        if x == 0:
            return Fraction(1)
        if not self.segments:
            return self.atom if x == 1 else 1 - self.zero_atom
        k = bisect.bisect_right(self.lows, x) - 1
        if k < 0:
            return 1 - self.zero_atom
        seg = self.segments[k]
        if x <= seg.hi:
            return seg.value(x)
        return seg.value(seg.hi) if k + 1 < len(self.segments) else self.atom

    def eval(self, x: Scalar, mode: str = "Fbar") -> Scalar:
        if mode == "Fbar":
            return self.fbar(x)
        if mode == "Fminus":
            return 1 - self.fbar(x)
        if mode == "atom":
            if x < 0 or x > 1:
                raise OutOfDomain(f"price {x} outside [0, 1]")
            if x == 1:
                return self.atom
            return self.zero_atom if x == 0 else Fraction(0)
        if mode == "F":
            if x == 1:
                return Fraction(1)
            return 1 - self.fbar(x) + (self.zero_atom if x == 0 else 0)
        raise ValueError(f"unknown mode {mode!r}")

    # -- support ------------------------------------------------------------

    @property
    def infimum(self) -> Scalar | None:
        if self.zero_atom > 0:
            return Fraction(0)
        if self.segments:
            return self.segments[0].lo
        return Fraction(1) if self.atom > 0 else None

    @property
    def supremum(self) -> Scalar | None:
        if self.atom > 0:
            return Fraction(1)
        if self.segments:
            return self.segments[-1].hi
        return Fraction(0) if self.zero_atom > 0 else None

    def support_intervals(self) -> list[tuple[Scalar, Scalar]]:
        """Closed support pieces (merged), plus ``(1, 1)`` for an atom at a detached 1."""
        out: list[list] = []
        for s in self.segments:
            if s.b == 0:
                continue  # flat piece carries no mass
            if out and out[-1][1] == s.lo:
                out[-1][1] = s.hi
            else:
                out.append([s.lo, s.hi])
        if self.atom > 0 and not (out and out[-1][1] == 1):
            out.append([Fraction(1), Fraction(1)])
        if self.zero_atom > 0:
            out.insert(0, [Fraction(0), Fraction(0)])
        return [tuple(p) for p in out]

    def in_support(self, x: Scalar) -> bool:
        return any(lo <= x <= hi for lo, hi in self.support_intervals())

    def support_points(self) -> list:
        pts = set()
        for lo, hi in self.support_intervals():
            pts.update((lo, hi))
        return sorted(pts)

    def segment_mass(self) -> Scalar:
        if not self.segments:
            return Fraction(0)
        return self.segments[0].value(self.segments[0].lo) - self.segments[-1].value(self.segments[-1].hi)

    def total_mass(self) -> Scalar:
        return self.segment_mass() + self.atom + self.zero_atom

    def is_exact(self) -> bool:
        vals = [self.atom, self.zero_atom] + [v for s in self.segments for v in (s.lo, s.hi, s.a, s.b)]
        return all(is_exact(v) for v in vals)

    def to_float(self) -> "PiecewiseCdf":
        return PiecewiseCdf(
            tuple(Segment(float(s.lo), float(s.hi), float(s.a), float(s.b)) for s in self.segments),
            float(self.atom),
            float(self.zero_atom),
        )


@dataclass(frozen=True)
class StrategyProfile:
    cdfs: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "cdfs", tuple(self.cdfs))

    def __len__(self) -> int:
        return len(self.cdfs)

    def __getitem__(self, i: int) -> PiecewiseCdf:
        return self.cdfs[i]

    def __iter__(self):
        return iter(self.cdfs)

    def check_against(self, net: Network) -> None:
        if len(self.cdfs) != net.n:
            raise InvalidCdf(f"profile has {len(self.cdfs)} strategies for {net.n} sellers")

    def is_exact(self) -> bool:
        return all(c.is_exact() for c in self.cdfs)

    def to_float(self) -> "StrategyProfile":
        return StrategyProfile(tuple(c.to_float() for c in self.cdfs))

    def permuted(self, perm: Sequence[int]) -> "StrategyProfile":
        """Profile in which new seller ``k`` plays old seller ``perm[k]``'s strategy."""
        return StrategyProfile(tuple(self.cdfs[p] for p in perm))


def cdf_eval(cdf: PiecewiseCdf, x: Scalar, mode: str = "Fbar") -> Scalar:
    return cdf.eval(x, mode)


def utility(net: Network, i: int, x: Scalar, profile: StrategyProfile) -> Scalar:
    """Expected revenue of seller i at price x; at x = 1 seller i wins ties."""
    if x < 0 or x > 1:
        raise OutOfDomain(f"price {x} outside [0, 1]")
    won = net.alpha[i]
    for j in net.neighbors(i):
        won = won + net.b(i, j) * profile[j].fbar(x)
    return x * won


def breakpoints(profile: StrategyProfile) -> list:
    pts = {Fraction(1)}
    for cdf in profile:
        for s in cdf.segments:
            pts.add(s.lo)
            pts.add(s.hi)
    # floats and Fractions equal in value collapse to one entry
    uniq = []
    for p in sorted(pts):
        if not uniq or p != uniq[-1]:
            uniq.append(p)
    return uniq
