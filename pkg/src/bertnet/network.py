"""Network economies: sellers with captive markets joined by shared markets."""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import networkx as nx

from .errors import DisconnectedNetwork, MalformedInput, UnknownEdge
from .numerics import Scalar


def edge_key(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


def _coerce(x):
    # ints become Fractions so integer inputs stay exact
    if isinstance(x, int) and not isinstance(x, bool):
        return Fraction(x)
    return x


class Triviality(enum.Enum):
    NON_TRIVIAL = "NonTrivial"
    NO_CAPTIVE = "NoCaptive"
    DISCONNECTED = "Disconnected"
    SINGLE_SELLER = "SingleSeller"


@dataclass(frozen=True)
class Network:
    """Sellers ``0..n-1``; ``alpha[i]`` is the captive market of seller i and
    ``beta[(i, j)]`` (with i < j) the market shared by i and j."""

    alpha: tuple
    beta: dict = field(default_factory=dict)
    labels: tuple | None = None

    def __post_init__(self):
        n = len(self.alpha)
        object.__setattr__(self, "alpha", tuple(_coerce(a) for a in self.alpha))
        if n < 1:
            raise MalformedInput("a network needs at least one seller")
        for i, a in enumerate(self.alpha):
            if a < 0:
                raise MalformedInput(f"seller {i} has negative captive market {a}")
        clean = {}
        for (i, j), b in self.beta.items():
            if i == j:
                raise MalformedInput(f"self-loop at seller {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise MalformedInput(f"edge ({i}, {j}) references an unknown seller")
            if not b > 0:
                raise MalformedInput(f"shared market ({i}, {j}) must have positive size, got {b}")
            key = edge_key(i, j)
            if key in clean:
                raise MalformedInput(f"duplicate shared market {key}")
            clean[key] = _coerce(b)
        object.__setattr__(self, "beta", clean)
        if self.labels is None:
            object.__setattr__(self, "labels", tuple(str(i) for i in range(n)))
        else:
            if len(self.labels) != n or len(set(self.labels)) != n:
                raise MalformedInput("labels must be unique, one per seller")
            object.__setattr__(self, "labels", tuple(self.labels))
        adj = [[] for _ in range(n)]
        for i, j in sorted(clean):
            adj[i].append(j)
            adj[j].append(i)
        object.__setattr__(self, "_adj", tuple(tuple(sorted(a)) for a in adj))

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_edges(cls, alpha: Sequence, edges: Iterable[tuple], labels=None) -> "Network":
        beta = {}
        for i, j, b in edges:
            key = edge_key(i, j)
            if key in beta:
                raise MalformedInput(f"duplicate shared market {key}")
            beta[key] = b
        return cls(tuple(alpha), beta, labels)

    @classmethod
    def line(cls, alpha: Sequence, betas: Sequence) -> "Network":
        if len(betas) != len(alpha) - 1:
            raise MalformedInput("a line of n sellers needs n-1 shared markets")
        return cls.from_edges(alpha, [(k, k + 1, b) for k, b in enumerate(betas)])

    @classmethod
    def cycle(cls, alpha: Sequence, betas: Sequence) -> "Network":
        n = len(alpha)
        if len(betas) != n or n < 3:
            raise MalformedInput("a cycle of n >= 3 sellers needs n shared markets")
        return cls.from_edges(alpha, [(k, (k + 1) % n, b) for k, b in enumerate(betas)])

    @classmethod
    def star(cls, center_alpha, peripheral_alpha: Sequence, spokes: Sequence | None = None) -> "Network":
        m = len(peripheral_alpha)
        spokes = [Fraction(1)] * m if spokes is None else list(spokes)
        return cls.from_edges([center_alpha, *peripheral_alpha], [(0, k + 1, spokes[k]) for k in range(m)])

    @classmethod
    def clique(cls, alpha: Sequence, size=Fraction(1)) -> "Network":
        n = len(alpha)
        return cls.from_edges(alpha, [(i, j, size) for i in range(n) for j in range(i + 1, n)])

    # -- accessors ----------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.alpha)

    @property
    def edges(self) -> list[tuple[int, int]]:
        return sorted(self.beta)

    def neighbors(self, i: int) -> tuple[int, ...]:
        return self._adj[i]

    def degree(self, i: int) -> int:
        return len(self._adj[i])

    def has_edge(self, i: int, j: int) -> bool:
        return edge_key(i, j) in self.beta

    def b(self, i: int, j: int) -> Scalar:
        try:
            return self.beta[edge_key(i, j)]
        except KeyError:
            raise UnknownEdge(f"no shared market between {i} and {j}") from None

    def beta_total(self, i: int) -> Scalar:
        return sum((self.b(i, j) for j in self._adj[i]), 0)

    def graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        for (i, j), b in self.beta.items():
            g.add_edge(i, j, beta=b)
        return g

    def is_connected(self) -> bool:
        return self.n == 1 or nx.is_connected(self.graph())

    def is_tree(self) -> bool:
        return self.is_connected() and len(self.beta) == self.n - 1

    def relabel(self, perm: Sequence[int]) -> "Network":
        """Network in which new seller ``k`` is old seller ``perm[k]``."""
        inv = {old: new for new, old in enumerate(perm)}
        return Network(
            tuple(self.alpha[p] for p in perm),
            {edge_key(inv[i], inv[j]): b for (i, j), b in self.beta.items()},
            tuple(self.labels[p] for p in perm),
        )

    def scaled(self, factor) -> "Network":
        return Network(tuple(a * factor for a in self.alpha), {k: b * factor for k, b in self.beta.items()}, self.labels)


def validate_network(net: Network) -> Triviality:
    if net.n == 1:
        return Triviality.SINGLE_SELLER
    if not net.is_connected():
        return Triviality.DISCONNECTED
    if all(a == 0 for a in net.alpha):
        return Triviality.NO_CAPTIVE
    return Triviality.NON_TRIVIAL


@dataclass(frozen=True)
class GraphMetrics:
    distances: dict  # (i, j) -> hop count
    diameter: int
    effective_degree: tuple
    max_effective_degree: Scalar
    alpha_max: Scalar


def effective_degree(net: Network, i: int, within: Iterable[int] | None = None) -> Scalar:
    """max over neighbours j of (alpha_i + beta_i) / beta_ij.

    ``within`` restricts the neighbours j (not the numerator).  With no
    eligible neighbour the value is 1.
    """
    allowed = None if within is None else set(within)
    total = net.alpha[i] + net.beta_total(i)
    vals = [total / net.b(i, j) for j in net.neighbors(i) if allowed is None or j in allowed]
    if not vals:
        return Fraction(1) if isinstance(total, (int, Fraction)) else 1.0
    return max(vals)


def bfs_distances(net: Network, src: int, blocked: set | None = None) -> dict[int, int]:
    dist = {src: 0}
    queue = deque([src])
    while queue:
        u = queue.popleft()
        for v in net.neighbors(u):
            if blocked and edge_key(u, v) in blocked:
                continue
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def graph_metrics(net: Network) -> GraphMetrics:
    if not net.is_connected():
        raise DisconnectedNetwork("graph metrics need a connected network")
    distances = {}
    for s in range(net.n):
        for t, d in bfs_distances(net, s).items():
            distances[(s, t)] = d
    deltas = tuple(effective_degree(net, i) for i in range(net.n))
    return GraphMetrics(
        distances=distances,
        diameter=max(distances.values()),
        effective_degree=deltas,
        max_effective_degree=max(deltas),
        alpha_max=max(net.alpha),
    )


def edge_cut_separates(net: Network, cut_edges: Iterable[tuple[int, int]], i: int) -> bool:
    """True iff removing ``cut_edges`` leaves ``i`` unable to reach any captive market."""
    blocked = set()
    for u, v in cut_edges:
        key = edge_key(u, v)
        if key not in net.beta:
            raise UnknownEdge(f"edge {key} is not in the network")
        blocked.add(key)
    reach = bfs_distances(net, i, blocked)
    return all(net.alpha[j] == 0 for j in reach)


def induced_diameter(net: Network, members: Iterable[int], edge_filter=None) -> int:
    """Largest diameter over connected components of the induced subgraph."""
    members = set(members)
    g = nx.Graph()
    g.add_nodes_from(members)
    for (i, j), b in net.beta.items():
        if i in members and j in members and (edge_filter is None or edge_filter(i, j, b)):
            g.add_edge(i, j)
    best = 0
    for comp in nx.connected_components(g):
        if len(comp) > 1:
            best = max(best, nx.diameter(g.subgraph(comp)))
    return best
