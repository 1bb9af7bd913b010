"""Margin-based generalization bound evaluators (unit constants by default).

All three bounds share the complexity ratio

    r = ln|H| * ln(m) / (theta**2 * m)

* Schapire et al.:   emp + c * sqrt(r)
* minimum margin:    c * r                     (theta is the sample minimum margin)
* k-th margin:       emp + c * (r + sqrt(emp * r))
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ParameterError

PHI_Y_MAX = 1 - 1e-9


@dataclass(frozen=True)
class BoundInputs:
    theta: float
    m: int
    H_size: float  # a count, or e**x when only ln|H| is known
    emp: float = 0.0
    constant: float = 1.0

    def __post_init__(self):
        if not 0 < self.theta <= 1:
            raise ParameterError(f"theta={self.theta} outside (0, 1]")
        if not 0 <= self.emp <= 1:
            raise ParameterError(f"emp={self.emp} outside [0, 1]")
        if self.m < 1:
            raise ParameterError("m must be at least 1")
        if self.H_size < 2:
            raise ParameterError("H_size must be at least 2")
        if self.constant < 0:
            raise ParameterError("constant must be nonnegative")

    @property
    def ratio(self):
        return math.log(self.H_size) * math.log(self.m) / (self.theta**2 * self.m)


def schapire_bound(b):
    return b.emp + b.constant * math.sqrt(b.ratio)


def min_margin_bound(b):
    if b.theta <= 0:
        raise ParameterError("minimum margin must be positive")
    return b.constant * b.ratio


def kth_margin_bound(b):
    r = b.ratio
    return b.emp + b.constant * (r + math.sqrt(b.emp * r))


def all_bounds(b):
    return {"schapire": schapire_bound(b), "minmargin": min_margin_bound(b), "kthmargin": kth_margin_bound(b)}


def gap_ratio(risk, emp, bound):
    """(risk - emp) / (bound - emp); NaN when the bound adds nothing to emp."""
    denom = bound - emp
    return (risk - emp) / denom if denom > 0 else float("nan")


def phi(x, y):
    """0.25 * (1 - sqrt(1 - exp(-x y^2 / (1 - y^2)))) for x > 0, 0 < y < 1."""
    if not x > 0:
        raise ParameterError(f"phi needs x > 0, got {x}")
    if not 0 < y < 1:
        raise ParameterError(f"phi needs 0 < y < 1, got {y}")
    if y >= PHI_Y_MAX:
        raise ParameterError("phi is degenerate as y approaches 1")
    t = x * y * y / (1 - y * y)
    # 1 - sqrt(1 - q) = q / (1 + sqrt(1 - q)) avoids cancellation for large t;
    # expm1 keeps 1 - q accurate for small t
    q = math.exp(-t)
    return 0.25 * q / (1 + math.sqrt(-math.expm1(-t)))


def phi_checks(beta, m, u, bias_alpha):
    """Both evaluation points used in the lower-bound argument.

    Returns ``{"phi4": ..., "phi8": ...}`` or None when the biased part is
    switched off (``beta == 0`` or ``bias_alpha == 0``).
    """
    if beta <= 0 or bias_alpha <= 0:
        return None
    return {"phi4": phi(4 * beta * m / u, bias_alpha), "phi8": phi(8 * beta * m / u, bias_alpha)}
