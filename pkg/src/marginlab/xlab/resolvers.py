"""Parameter choices for the two lower-bound constructions."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import ParameterError

TAU_MAX = 0.49


@dataclass(frozen=True)
class HardParams:
    u: int
    d: int
    eps: float
    bias_alpha: float
    beta: float
    branch: str  # "small-tau" (beta = bias_alpha = 0) or "large-tau"


def check_tau(tau):
    if not 0 <= tau <= TAU_MAX:
        raise ParameterError(f"tau={tau} violates 0 <= tau <= 49/100")


def _biased_part(tau, scale, m):
    """bias_alpha = sqrt(scale / (2560 tau m)), beta = 64 tau / (32 - 31 bias_alpha)."""
    alpha = math.sqrt(scale / (2560 * tau * m))
    if not 0 <= alpha <= 1:
        raise ParameterError(f"bias_alpha={alpha} outside [0, 1]")
    beta = 64 * tau / (32 - 31 * alpha)
    if not 0 <= beta <= 1:
        raise ParameterError(f"beta={beta} outside [0, 1]; m is too small relative to tau")
    if alpha > math.sqrt(scale / (40 * beta * m)):
        raise ParameterError("bias_alpha <= sqrt(scale / (40 beta m)) fails")
    return alpha, beta


def theorem1_sizes(theta, n_nominal):
    """u = 2 ceil(ln N / theta^2), d = u / 2."""
    if n_nominal < 2:
        raise ParameterError("nominal N must be at least 2")
    d = math.ceil(math.log(n_nominal) / theta**2)
    return 2 * d, d


def resolve_theorem1_params(u, m, tau, m_ratio=10.0, d=None):
    check_tau(tau)
    if m < m_ratio * u:
        raise ParameterError(f"m={m} < {m_ratio} * u = {m_ratio * u} (m must be large relative to u)")
    d = u // 2 if d is None else d
    eps = u / (10 * m)
    if tau <= u / (300 * m):
        return HardParams(u, d, eps, 0.0, 0.0, "small-tau")
    alpha, beta = _biased_part(tau, u, m)
    return HardParams(u, d, eps, alpha, beta, "large-tau")


def theorem2_ground_size(m):
    if m < 3:
        raise ParameterError("m must be at least 3")
    return math.ceil(40 * m / math.log(m))


def theorem2_sparsity_cap(m):
    return (m / math.log(m)) ** 0.9


def resolve_theorem2_params(theta, m, tau, d=None, n_nominal=None):
    """u = ceil(40 m / ln m); d given directly or as ceil(ln N / theta^2)."""
    check_tau(tau)
    u = theorem2_ground_size(m)
    if d is None:
        if n_nominal is None or n_nominal < 2:
            raise ParameterError("need d or a nominal N >= 2")
        d = math.ceil(math.log(n_nominal) / theta**2)
    d = int(d)
    cap = theorem2_sparsity_cap(m)
    if not 1 <= d < cap:
        raise ParameterError(f"d={d} must satisfy 1 <= d < (m / ln m)^(9/10) = {cap:.6g}")
    if u - d - 1 < 1:
        raise ParameterError("thin tail is empty")
    if tau <= d / (50 * u):
        return HardParams(u, d, 0.5, 0.0, 0.0, "small-tau")
    alpha, beta = _biased_part(tau, d, m)
    return HardParams(u, d, 0.5, alpha, beta, "large-tau")
