"""Mixed equilibria of Bertrand price competition on networks of sellers."""

from .errors import BertnetError
from .network import Network, Triviality, graph_metrics, validate_network
from .numerics import Tolerance, parse_rational
from .strategy import PiecewiseCdf, Segment, StrategyProfile, utility

__all__ = [
    "BertnetError",
    "Network",
    "PiecewiseCdf",
    "Segment",
    "StrategyProfile",
    "Tolerance",
    "Triviality",
    "graph_metrics",
    "parse_rational",
    "utility",
    "validate_network",
]
