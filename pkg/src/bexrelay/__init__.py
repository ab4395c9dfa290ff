"""Bandwidth-exchange incentivized two-hop relaying.

Modules: ``netmodel`` (geometry, channels, direct rates), ``utility``
(alpha-fair utilities), ``pairsolver`` (per-pair allocation), ``matching``
(pair selection), ``protocol`` (network operation) and ``harness``
(Monte-Carlo experiments and CSV output).
"""

from .pairsolver import BACKEND, PairAllocation, PairProblem

__version__ = "0.1.0"

__all__ = ["BACKEND", "PairAllocation", "PairProblem", "__version__"]
