"""Two-part hard distributions over a finite ground set.

Layout with 0-based indices:

* point 0 (heavy point): mass ``(1-beta)(1-eps)`` on its planted label;
* points ``1 .. u-d-1`` (thin tail): ``(1-beta) eps / (u-d-1)`` each, planted label only;
* points ``u-d .. u-1`` (biased part): ``beta/d`` each, label equal to the
  planted one with probability ``(1+bias_alpha)/2``.

Risk and the two error-weight statistics are computed in closed form over
the ``2u`` outcomes; no estimation noise enters any inequality check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Hypothesis, Labeling
from .errors import InvariantViolation, ParameterError

RISK_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class HardDistSpec:
    u: int
    d: int
    bias_alpha: float
    beta: float
    eps: float
    labeling: Labeling

    @property
    def tail(self):
        return slice(1, self.u - self.d)

    @property
    def biased(self):
        return slice(self.u - self.d, self.u)

    @property
    def tail_size(self):
        return self.u - self.d - 1

    def masses(self):
        """(u, 2) array: column 0 is label -1, column 1 is label +1."""
        return _mass_table(self)


def make_hard_dist(u, d, bias_alpha, beta, eps, labeling):
    if not isinstance(labeling, Labeling):
        labeling = Labeling(labeling)
    if int(u) != u or u < 1 or int(d) != d or d < 0:
        raise ParameterError("u must be positive and d nonnegative integers")
    u, d = int(u), int(d)
    if d > u:
        raise ParameterError(f"d={d} exceeds u={u}")
    for name, v in (("bias_alpha", bias_alpha), ("beta", beta), ("eps", eps)):
        if not 0 <= v <= 1:
            raise ParameterError(f"{name}={v} outside [0, 1]")
    if labeling.u != u:
        raise ParameterError("labeling length differs from u")
    if d == u and beta != 1:
        raise ParameterError("with no first part, beta must be 1")
    if u - d - 1 <= 0 and eps > 0 and d < u:
        raise ParameterError("thin tail is empty (d = u-1); eps must be 0")
    if d == 0 and beta > 0:
        raise ParameterError("biased part is empty (d = 0); beta must be 0")
    return HardDistSpec(u, d, float(bias_alpha), float(beta), float(eps), labeling)


def _mass_table(spec):
    u, d, a, b, e = spec.u, spec.d, spec.bias_alpha, spec.beta, spec.eps
    planted = np.zeros(u)
    flipped = np.zeros(u)
    if d < u:
        planted[0] = (1 - b) * (1 - e)
    if spec.tail_size > 0:
        planted[spec.tail] = (1 - b) * e / spec.tail_size
    if d > 0:
        planted[spec.biased] = (1 + a) * b / (2 * d)
        flipped[spec.biased] = (1 - a) * b / (2 * d)
    pos = spec.labeling.values > 0
    table = np.empty((u, 2))
    table[:, 1] = np.where(pos, planted, flipped)
    table[:, 0] = np.where(pos, flipped, planted)
    return table


def mass(spec, i, y):
    if not 0 <= i < spec.u:
        raise IndexError(f"point {i} out of range")
    if y not in (-1, 1):
        raise ValueError(f"label must be -1 or +1, got {y}")
    return float(_mass_table(spec)[i, (y + 1) // 2])


@dataclass(frozen=True, eq=False)
class Sample:
    points: np.ndarray
    labels: np.ndarray
    u: int

    @property
    def m(self):
        return self.points.shape[0]

    @property
    def counts(self):
        return np.bincount(self.points, minlength=self.u)

    def label_counts(self):
        """(positives, negatives) per point."""
        pos = np.bincount(self.points[self.labels > 0], minlength=self.u)
        return pos, self.counts - pos

    def to_text(self, seed):
        lines = [f"# m={self.m} seed={int(seed)} u={self.u}"]
        lines += [f"{p},{y}" for p, y in zip(self.points.tolist(), self.labels.tolist())]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        rows = text.splitlines()
        head = dict(kv.split("=") for kv in rows[0].lstrip("# ").split())
        body = np.array([r.split(",") for r in rows[1:] if r], dtype=np.int64).reshape(-1, 2)
        if body.shape[0] != int(head["m"]):
            raise ParameterError("sample header m does not match body")
        return cls(body[:, 0], body[:, 1].astype(np.int8), int(head["u"])), int(head["seed"])


def draw_sample(spec, m, gen):
    """``m`` i.i.d. draws by inverse CDF over the 2u outcome table."""
    if m < 1:
        raise ParameterError("m must be at least 1")
    flat = _mass_table(spec).ravel()  # index 2*i + (y+1)//2
    cdf = np.cumsum(flat)
    x = gen.random(int(m)) * cdf[-1]
    idx = np.searchsorted(cdf, x, side="right")
    idx = np.minimum(idx, flat.size - 1)
    return Sample(idx // 2, (2 * (idx % 2) - 1).astype(np.int8), spec.u)


def exact_risk(spec, scores):
    """Probability of ``y * f(x) < 0`` (a zero score is not an error)."""
    s = np.asarray(scores, dtype=np.float64)
    if s.shape != (spec.u,):
        raise ParameterError("need one score per point")
    table = _mass_table(spec)
    return float(table[s > 0, 0].sum() + table[s < 0, 1].sum())


@dataclass(frozen=True)
class PsiStats:
    psi1: float
    psi2: float
    exact_risk: float
    claim1_rhs: float
    abstains: bool = False  # some biased point has score exactly 0


def psi_stats(spec, scores):
    """Tail and biased-part error weights plus the risk lower bound.

    The bound presumes f commits to a sign on every biased point; when it
    abstains somewhere (score 0, not an error under strict ``<``) the bound
    is reported but not asserted.
    """
    s = np.asarray(scores, dtype=np.float64)
    wrong = spec.labeling.values * s < 0
    psi1 = 0.0
    if spec.tail_size > 0:
        psi1 = (1 - spec.beta) * spec.eps / spec.tail_size * int(wrong[spec.tail].sum())
    psi2 = 0.0
    if spec.d > 0:
        psi2 = spec.bias_alpha * spec.beta / spec.d * int(wrong[spec.biased].sum())
    risk = exact_risk(spec, s)
    rhs = spec.beta * (1 - spec.bias_alpha) / 2 + psi1 + psi2
    abstains = spec.d > 0 and bool(np.any(s[spec.biased] == 0))
    if not abstains and risk < rhs - RISK_TOL:
        raise InvariantViolation(f"exact risk {risk!r} below lower bound {rhs!r}")
    return PsiStats(psi1, psi2, risk, rhs, abstains)


def _log_binom(n, k):
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def _sparsity(n, d, gen, mode):
    top = min(d, n)
    if mode == "sparsity-uniform":
        return int(gen.integers(0, top + 1))
    if mode != "uniform":
        raise ParameterError(f"unknown labeling mode {mode!r}")
    logw = np.array([_log_binom(n, s) for s in range(top + 1)])
    p = np.exp(logw - logw.max())
    return int(gen.choice(top + 1, p=p / p.sum()))


def sample_sparse_labeling(u, d, gen, mode="uniform"):
    """At most ``d`` negatives anywhere in ``[u]``."""
    if d > u:
        raise ParameterError("d exceeds u")
    v = np.ones(u, dtype=np.int8)
    s = _sparsity(u, d, gen, mode)
    v[gen.choice(u, size=s, replace=False)] = -1
    return Labeling(v)


def sample_labeling_Lud(u, d, gen, mode="uniform"):
    """Labelings whose first ``u-d`` entries hold at most ``d`` negatives.

    ``mode="uniform"`` is uniform over that set; ``"sparsity-uniform"`` draws
    the number of negatives uniformly from ``0..d`` first.
    """
    if d > u:
        raise ParameterError("d exceeds u")
    n = u - d
    v = np.ones(u, dtype=np.int8)
    s = _sparsity(n, d, gen, mode)
    v[gen.choice(n, size=s, replace=False)] = -1
    v[n:] = gen.integers(0, 2, size=d) * 2 - 1
    return Labeling(v)


def sample_labeling_Lprime(u, d, gen):
    if d > u:
        raise ParameterError("d exceeds u")
    v = np.ones(u, dtype=np.int8)
    v[u - d:] = gen.integers(0, 2, size=d) * 2 - 1
    return Labeling(v)


def sample_uniform_labeling(u, gen):
    return Labeling(gen.integers(0, 2, size=u) * 2 - 1)


def adversary_flips(labeling, sample, d):
    """Lowest-index unsampled thin-tail points, at most ``d`` of them."""
    u = labeling.u
    counts = sample.counts
    idle = np.flatnonzero(counts[1:u - d] == 0) + 1
    return idle[:d]


def adversary_classifier(labeling, sample, d):
    """Sign table that flips up to ``d`` unsampled tail labels and takes
    the sample majority on the biased part (ties and unseen points get +1)."""
    u = labeling.u
    if sample.u != u:
        raise ParameterError("sample and labeling disagree on u")
    h = labeling.values.copy()
    h[adversary_flips(labeling, sample, d)] *= -1
    if d > 0:
        pos, neg = sample.label_counts()
        h[u - d:] = np.where(pos[u - d:] >= neg[u - d:], 1, -1)
    return Hypothesis(h)


def empirical_margin_error(scores, sample, theta):
    """Fraction of the m draws (with multiplicity) with ``y * f(x) < theta``."""
    if not 0 < theta <= 1:
        raise ParameterError("theta must lie in (0, 1]")
    s = np.asarray(scores, dtype=np.float64)
    return float(np.count_nonzero(sample.labels * s[sample.points] < theta)) / sample.m
