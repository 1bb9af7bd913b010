"""Fixed-edge boosting over hypothesis batches, and reference AdaBoost.

The fixed-edge booster runs one round per batch with a constant step
``alpha = 0.5 * ln((1 + 2*gamma) / (1 - 2*gamma))`` and unit votes; on
success the returned classifier ``(1/k) * sum_j h_j`` has margin at least
``gamma / 4`` on every point. That guarantee is re-checked exactly on every
success rather than trusted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import VotingClassifier, exact_min_margin_at_least
from .errors import InvariantViolation, ParameterError

EPS_FLOOR = 1e-10
Z_TOL = 1e-12


@dataclass(frozen=True)
class BoostConfig:
    gamma: float
    step_alpha: float
    rounds: int

    def __post_init__(self):
        if not 0 < self.gamma < 0.1:
            raise ParameterError(f"gamma={self.gamma} outside (0, 1/10)")
        if not 0 < self.step_alpha <= 4 * self.gamma:
            raise ParameterError("step_alpha must lie in (0, 4*gamma]")
        if self.rounds < 1:
            raise ParameterError("rounds must be at least 1")

    @classmethod
    def from_gamma(cls, gamma, rounds):
        return cls(gamma, 0.5 * math.log((1 + 2 * gamma) / (1 - 2 * gamma)), rounds)

    @classmethod
    def for_spec(cls, spec):
        return cls.from_gamma(spec.gamma, spec.k)

    @property
    def theta(self):
        return self.gamma / 4

    @property
    def z_cap(self):
        # per-round normalizer bound when the edge condition held
        return math.sqrt((1 + 2 * self.gamma) * (1 - 2 * self.gamma))


@dataclass(frozen=True)
class BoostRun:
    success: bool
    classifier: VotingClassifier | None
    failed_round: int | None
    chosen: np.ndarray
    Z: np.ndarray
    tally: np.ndarray
    D: np.ndarray
    config: BoostConfig
    trace: np.ndarray | None = None
    min_margin: float = float("nan")

    @property
    def rounds_completed(self):
        return self.config.rounds if self.success else self.failed_round


def weak_learner_search(H, batch, D, labeling, gamma):
    """First row of ``batch`` (constant hypothesis first) with weighted error <= 1/2 - gamma.

    Returns None when no row qualifies.
    """
    D = np.asarray(D, dtype=np.float64)
    y = labeling.values
    for row in H.batch_indices(batch):
        err = float(D[H.signs(int(row)) != y].sum())
        if err <= 0.5 - gamma:
            return int(row)
    return None


def run_margin_booster(H, labeling, cfg, trace=False):
    if H.n_batches != cfg.rounds:
        raise ParameterError(f"hypothesis set has {H.n_batches} batches, config wants {cfg.rounds}")
    if labeling.u != H.u:
        raise ParameterError("labeling and hypothesis set disagree on u")
    trace_arr = np.empty((cfg.rounds + 1, H.u)) if trace else None
    failed, chosen, Z, tally, D = kernels.margin_boost(
        H.packed, np.asarray(H.batch_bounds, dtype=np.int64), labeling.values,
        cfg.step_alpha, cfg.gamma, trace_arr)
    done = cfg.rounds if failed < 0 else failed
    cap = min(cfg.z_cap, 1 - 2 * cfg.gamma**2)
    bad = np.flatnonzero(Z[:done] > cap + Z_TOL)
    if bad.size:
        raise InvariantViolation(f"round {bad[0]}: Z={Z[bad[0]]!r} exceeds {cap!r}")
    if failed >= 0:
        return BoostRun(False, None, int(failed), chosen[:done], Z[:done], tally, D, cfg,
                        None if trace_arr is None else trace_arr[:done + 1])
    if not exact_min_margin_at_least(tally, labeling, cfg.rounds, cfg.theta):
        raise InvariantViolation("booster succeeded but minimum margin is below gamma/4")
    counts = dict(zip(*np.unique(chosen, return_counts=True)))
    worst = int(np.min(labeling.values.astype(np.int64) * tally))
    return BoostRun(True, VotingClassifier.from_counts(counts), None, chosen, Z, tally, D, cfg,
                    trace_arr, worst / cfg.rounds)


@dataclass(frozen=True)
class AdaBoostRun:
    classifier: VotingClassifier
    chosen: np.ndarray
    alphas: np.ndarray
    eps: np.ndarray
    Z: np.ndarray
    stopped_early: bool
    degenerate: bool


def run_adaboost(H, labels, rounds, points=None):
    """AdaBoost over every row of ``H`` (batches ignored).

    ``labels`` is a Labeling over all points, or an array aligned with
    ``points`` when a training subset is given. Each round picks the lowest
    index of minimum weighted error; errors are floored at ``EPS_FLOOR``.
    """
    if rounds < 1:
        raise ParameterError("rounds must be at least 1")
    if points is None:
        points = np.arange(H.u)
        y = labels.values if hasattr(labels, "values") else np.asarray(labels)
    else:
        points = np.asarray(points, dtype=np.int64)
        y = np.asarray(labels.values[points] if hasattr(labels, "values") else labels)
    y = np.ascontiguousarray(y, dtype=np.int8)
    if y.shape[0] != points.shape[0]:
        raise ParameterError("labels and points differ in length")
    if points.size == 0:
        f = VotingClassifier({H.constant_index: 1.0})
        empty = np.empty(0)
        return AdaBoostRun(f, np.empty(0, dtype=np.int64), empty, empty, empty, True, True)
    packed_t = H.restricted_transposed(points)
    chosen, alphas, eps, Z = kernels.adaboost(packed_t, y, int(rounds), EPS_FLOOR)
    if chosen.size == 0:
        f = VotingClassifier({H.constant_index: 1.0})
        return AdaBoostRun(f, chosen, alphas, eps, Z, True, True)
    f = VotingClassifier.from_alphas(chosen, alphas)
    return AdaBoostRun(f, chosen, alphas, eps, Z, chosen.size < rounds, False)
