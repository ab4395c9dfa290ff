"""Alpha-fair utilities.

The alpha = 1 member uses the natural logarithm. Any other base only scales
utilities by a positive constant and leaves every argmax unchanged.
"""

from __future__ import annotations

import math

MAXMIN = "maxmin"


def check_alpha(alpha) -> float:
    if alpha == MAXMIN:
        raise ValueError("max-min is a solver objective, not an alpha-fair utility")
    alpha = float(alpha)
    if not alpha >= 0 or math.isinf(alpha):
        raise ValueError(f"alpha must be a finite nonnegative real, got {alpha}")
    return alpha


def alpha_utility(r: float, alpha: float) -> float:
    """``r**(1-alpha)/(1-alpha)``, or ``log(r)`` at alpha = 1.

    Zero rate with ``alpha >= 1`` returns ``-inf``.
    """
    alpha = check_alpha(alpha)
    if r < 0:
        raise ValueError(f"rate must be nonnegative, got {r}")
    if r == 0 and alpha >= 1:
        return -math.inf
    if alpha == 1:
        return math.log(r)
    return r ** (1.0 - alpha) / (1.0 - alpha)


def pair_utility_gain(r_s_be: float, r_f_be: float, r_s_in: float, r_f_in: float,
                      alpha: float) -> float:
    """Utility of a cooperating pair minus its utility without cooperation."""
    # grouped per node so an unchanged pair gives exactly 0
    return ((alpha_utility(r_s_be, alpha) - alpha_utility(r_s_in, alpha))
            + (alpha_utility(r_f_be, alpha) - alpha_utility(r_f_in, alpha)))
