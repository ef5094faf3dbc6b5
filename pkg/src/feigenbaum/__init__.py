"""High-precision Feigenbaum constants by Chebyshev collocation and Arnoldi iteration."""

from .chebyshev import ChebEvenSeries, ChebOddSeries, NodeSet, make_nodes
from .deltasolver import LinearizedOperator, solve_delta
from .gsolver import GSolveConfig, alpha_from, solve_g
from .mpnum import PrecisionContext, correct_digits, to_decimal

__all__ = [
    "ChebEvenSeries",
    "ChebOddSeries",
    "GSolveConfig",
    "LinearizedOperator",
    "NodeSet",
    "PrecisionContext",
    "alpha_from",
    "correct_digits",
    "make_nodes",
    "solve_delta",
    "solve_g",
    "to_decimal",
]

__version__ = "0.1.0"
