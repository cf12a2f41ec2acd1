"""Topological utility bounds and checks of equilibrium utilities against them.

All bounds are built from the effective degree ``Delta_i`` and hop distances,
so they are exact for rational networks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import networkx as nx

from .errors import EmptySubset, PreconditionViolated
from .network import Network, edge_key, edge_cut_separates, effective_degree, graph_metrics, induced_diameter
from .numerics import Scalar, Tolerance, format_scalar, is_exact


@dataclass(frozen=True)
class Violation:
    kind: str  # neighbor, path, chain, cut, anchor
    seller: int
    detail: str

    def to_json(self) -> dict:
        return {"kind": self.kind, "seller": self.seller, "detail": self.detail}


@dataclass
class BoundReport:
    lower: list  # path lower bound per seller
    upper: list  # path upper bound per seller
    chain_lower: list  # neighbour-chain lower bound per seller
    cut: dict = field(default_factory=dict)  # frozenset G -> (epsilon, Delta_G, D_G, bound)
    big_cut: dict | None = None
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {
            "formatVersion": 1,
            "kind": "bounds",
            "sellers": [
                {
                    "seller": i,
                    "pathLower": format_scalar(self.lower[i]),
                    "pathUpper": format_scalar(self.upper[i]),
                    "chainLower": format_scalar(self.chain_lower[i]),
                }
                for i in range(len(self.lower))
            ],
            "cuts": [
                {
                    "subset": sorted(g),
                    "epsilon": format_scalar(e),
                    "deltaG": format_scalar(d),
                    "diameterG": dg,
                    "bound": format_scalar(b),
                }
                for g, (e, d, dg, b) in sorted(self.cut.items(), key=lambda kv: (len(kv[0]), sorted(kv[0])))
            ],
            "bigCut": None
            if self.big_cut is None
            else {str(i): format_scalar(v) for i, v in sorted(self.big_cut.items())},
            "violations": [v.to_json() for v in self.violations],
        }


def _tol(net: Network, u, tol: float | None) -> Tolerance:
    if tol is not None:
        return Tolerance(tol)
    exact = all(is_exact(x) for x in u) and all(is_exact(a) for a in net.alpha) and all(
        is_exact(b) for b in net.beta.values()
    )
    return Tolerance.exact() if exact else Tolerance(1e-8)


def neighbor_bound(net: Network, u, tol: float | None = None) -> list[Violation]:
    """Edges (i, j) with ``u_j < u_i / Delta_i``."""
    t = _tol(net, u, tol)
    out = []
    for i in range(net.n):
        d = effective_degree(net, i)
        for j in net.neighbors(i):
            if t.lt(u[j], u[i] / d):
                out.append(Violation("neighbor", j, f"u_{j} = {_s(u[j])} below u_{i}/Delta_{i} = {_s(u[i] / d)}"))
    return out


def path_bounds(net: Network) -> list[tuple]:
    """Per seller ``(alpha_max / Delta^D, alpha_max * Delta^D)``."""
    m = graph_metrics(net)
    scale = m.max_effective_degree ** m.diameter
    return [(m.alpha_max / scale, m.alpha_max * scale) for _ in range(net.n)]


def chain_lower_bounds(net: Network) -> list:
    """Lower bound from chaining the neighbour lemma along shortest paths out of each
    seller with a captive market (whose utility is at least its alpha)."""
    g = net.graph()
    zero = net.alpha[0] * 0
    out = [zero] * net.n
    for src in range(net.n):
        if not net.alpha[src] > 0:
            continue
        for dst, path in nx.single_source_shortest_path(g, src).items():
            val = net.alpha[src]
            for k in path[:-1]:
                val = val / effective_degree(net, k)
            if val > out[dst]:
                out[dst] = val
    return out


def cut_bound(net: Network, G) -> tuple:
    """``(epsilon, Delta_G, D_G, {i: epsilon * Delta_G ** D_G})`` for the subset G."""
    members = sorted(set(G))
    if not members:
        raise EmptySubset("cut bound needs a non-empty seller subset")
    inside = set(members)
    eps = max(net.alpha[i] + sum((net.b(i, j) for j in net.neighbors(i) if j not in inside), net.alpha[i] * 0) for i in members)
    delta = max(effective_degree(net, i, within=inside) for i in members)
    dg = induced_diameter(net, inside)
    bound = eps * delta**dg
    return eps, delta, dg, {i: bound for i in members}


def big_cut_bound(net: Network, big_edges, M=None, G=None) -> dict:
    """Upper bound ``n^2 Delta^(2D) / M`` for every seller of ``G - B``.

    ``big_edges`` are the markets of size at least M; every other market and
    every captive market must be at most 1.  ``G`` defaults to the sellers the
    big edges cut off from all captive markets.  D is the maximum of the
    big-edge diameter on B, the diameter of G and the small-edge diameter on G - B.
    """
    big = {edge_key(i, j) for i, j in big_edges}
    if not big:
        raise PreconditionViolated("need at least one big edge")
    for key in big:
        if key not in net.beta:
            raise PreconditionViolated(f"{key} is not a market of the network")
    if M is None:
        M = min(net.beta[k] for k in big)
    one = Fraction(1) if is_exact(M) else 1.0
    for key, b in net.beta.items():
        if key in big and not b >= M:
            raise PreconditionViolated(f"big market {key} has size {_s(b)} below M = {_s(M)}")
        if key not in big and not b <= one:
            raise PreconditionViolated(f"market {key} of size {_s(b)} is neither small nor big")
    if any(a > one for a in net.alpha):
        raise PreconditionViolated("captive markets must be at most 1")
    B = {i for key in big for i in key}
    if G is None:
        G = [i for i in range(net.n) if edge_cut_separates(net, big, i)]
    G = set(G)
    if not G:
        raise EmptySubset("the big edges cut no seller off from the captive markets")
    for i in G:
        if not edge_cut_separates(net, big, i):
            raise PreconditionViolated(f"seller {i} still reaches a captive market without the big edges")
    rest = G - B

    def is_big(i, j, b):
        return edge_key(i, j) in big

    def is_small(i, j, b):
        return edge_key(i, j) not in big

    def delta_over(members, pick):
        vals = [one]
        for i in members:
            nb = [j for j in net.neighbors(i) if j in members and pick(i, j, net.b(i, j))]
            if nb:
                vals.append(effective_degree(net, i, within=nb))
        return max(vals)

    delta = max(delta_over(B, is_big), delta_over(rest, is_small))
    D = max(induced_diameter(net, B, is_big), induced_diameter(net, G), induced_diameter(net, rest, is_small))
    bound = net.n**2 * delta ** (2 * D) / M
    return {i: bound for i in sorted(rest)}


def check_bounds(net: Network, u, tol: float | None = None, cut_subsets="all") -> BoundReport:
    """Run every applicable check on equilibrium utilities ``u``.

    ``cut_subsets`` is "all" (every non-empty proper subset; networks up to 10
    sellers), ``None`` or an explicit list of subsets.
    """
    t = _tol(net, u, tol)
    violations = list(neighbor_bound(net, u, tol))
    pb = path_bounds(net)
    for i, (lo, hi) in enumerate(pb):
        if t.lt(u[i], lo) or t.lt(hi, u[i]):
            violations.append(Violation("path", i, f"u_{i} = {_s(u[i])} outside [{_s(lo)}, {_s(hi)}]"))
    chain = chain_lower_bounds(net)
    for i, lo in enumerate(chain):
        if t.lt(u[i], lo):
            violations.append(Violation("chain", i, f"u_{i} = {_s(u[i])} below chained bound {_s(lo)}"))
    if cut_subsets == "all":
        cut_subsets = [c for r in range(1, net.n) for c in combinations(range(net.n), r)] if net.n <= 10 else []
    cuts = {}
    for G in cut_subsets or []:
        eps, d, dg, per = cut_bound(net, G)
        cuts[frozenset(G)] = (eps, d, dg, next(iter(per.values())))
        for i, b in per.items():
            if t.lt(b, u[i]):
                violations.append(Violation("cut", i, f"u_{i} = {_s(u[i])} above cut bound {_s(b)} for G = {sorted(G)}"))
    if any(a > 0 for a in net.alpha) and not any(t.eq(u[i], net.alpha[i]) for i in range(net.n)):
        violations.append(Violation("anchor", -1, "no seller has utility equal to its captive market"))
    return BoundReport([lo for lo, _ in pb], [hi for _, hi in pb], chain, cuts, None, violations)


def _s(x: Scalar) -> str:
    v = format_scalar(x)
    return v if isinstance(v, str) else f"{v:.10g}"
