"""Domain types: labelings, sign tables, hypothesis sets, voting classifiers.

Points of the ground set are indexed ``0 .. u-1``. Point 0 is the heavy
point of the hard distributions in :mod:`marginlab.harddist`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np

from .errors import ParameterError

WEIGHT_TOL = 1e-9


def _sign_array(values, name):
    arr = np.array(values, dtype=np.int64)
    if arr.ndim != 1:
        raise ParameterError(f"{name} must be one-dimensional")
    if arr.size < 1:
        raise ParameterError(f"{name} needs at least one entry")
    if not np.all((arr == 1) | (arr == -1)):
        raise ParameterError(f"{name} entries must be -1 or +1")
    out = arr.astype(np.int8)
    out.setflags(write=False)
    return out


def pack_signs(signs):
    """Pack a (rows, u) array of +-1 into little-endian bits, 1 meaning +1."""
    bits = (np.asarray(signs) > 0).astype(np.uint8)
    return np.packbits(bits, axis=-1, bitorder="little")


def unpack_signs(packed, u):
    bits = np.unpackbits(packed, axis=-1, count=u, bitorder="little")
    return bits.astype(np.int8) * 2 - 1


@dataclass(frozen=True, eq=False)
class Labeling:
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _sign_array(self.values, "labeling"))

    @property
    def u(self):
        return self.values.shape[0]

    def negatives(self):
        return np.flatnonzero(self.values < 0)

    def __len__(self):
        return self.u

    def __eq__(self, other):
        return isinstance(other, Labeling) and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash(self.values.tobytes())

    @classmethod
    def ones(cls, u):
        return cls(np.ones(u, dtype=np.int8))


@dataclass(frozen=True, eq=False)
class Hypothesis:
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _sign_array(self.values, "hypothesis"))

    @property
    def u(self):
        return self.values.shape[0]

    def __eq__(self, other):
        return isinstance(other, Hypothesis) and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash(self.values.tobytes())

    def as_labeling(self):
        return Labeling(self.values)


@dataclass(frozen=True, eq=False)
class HypothesisSet:
    """Bit-packed sign tables, row 0 being the constant-one hypothesis.

    Rows ``batch_bounds[j] .. batch_bounds[j+1]-1`` are the random draws of
    batch ``j``; every batch implicitly also contains row 0. The set has
    ``n_random + 1`` slots.
    """

    packed: np.ndarray
    u: int
    batch_bounds: tuple
    constant_index: int = 0

    def __post_init__(self):
        packed = np.ascontiguousarray(self.packed, dtype=np.uint8)
        if packed.ndim != 2 or packed.shape[1] != (self.u + 7) // 8:
            raise ParameterError("packed table has the wrong shape for u")
        bounds = tuple(int(b) for b in self.batch_bounds)
        if len(bounds) < 2:
            raise ParameterError("need at least one batch")
        if any(b1 <= b0 for b0, b1 in zip(bounds, bounds[1:])):
            raise ParameterError("batch_bounds must be strictly increasing")
        if bounds[0] != 1 or bounds[-1] != packed.shape[0]:
            raise ParameterError("batches must cover rows 1..size-1 exactly")
        if not np.array_equal(unpack_signs(packed[0], self.u), np.ones(self.u, dtype=np.int8)):
            raise ParameterError("row 0 must be the constant-one hypothesis")
        packed.setflags(write=False)
        object.__setattr__(self, "packed", packed)
        object.__setattr__(self, "batch_bounds", bounds)

    @classmethod
    def from_batches(cls, batches):
        """Build from a list of (batch_size_j, u) sign arrays."""
        batches = [np.atleast_2d(np.asarray(b)) for b in batches]
        u = batches[0].shape[1]
        rows = [np.ones((1, u), dtype=np.int8)] + batches
        bounds = np.cumsum([1] + [b.shape[0] for b in batches])
        return cls(pack_signs(np.vstack(rows)), u, tuple(bounds))

    @property
    def size(self):
        return self.packed.shape[0]

    @property
    def n_random(self):
        return self.size - 1

    @property
    def n_batches(self):
        return len(self.batch_bounds) - 1

    @property
    def batch_sizes(self):
        return np.diff(self.batch_bounds)

    def batch_indices(self, j):
        """Row indices of batch ``j``: the constant hypothesis first, then draws."""
        if not 0 <= j < self.n_batches:
            raise IndexError(f"batch {j} out of range")
        lo, hi = self.batch_bounds[j], self.batch_bounds[j + 1]
        return np.concatenate(([self.constant_index], np.arange(lo, hi)))

    def signs(self, rows):
        return unpack_signs(self.packed[rows], self.u)

    def hypothesis(self, row):
        if not 0 <= row < self.size:
            raise IndexError(f"hypothesis index {row} out of range")
        return Hypothesis(self.signs(row))

    def restricted_transposed(self, points):
        """(nbytes, size) packed table restricted to ``points``, one column per row."""
        points = np.asarray(points, dtype=np.int64)
        nb = (points.size + 7) // 8
        out = np.empty((nb, self.size), dtype=np.uint8)
        step = max(1, (1 << 24) // max(self.u, 1))
        for lo in range(0, self.size, step):
            bits = np.unpackbits(self.packed[lo:lo + step], axis=1, count=self.u, bitorder="little")
            sub = np.packbits(bits[:, points], axis=1, bitorder="little")
            out[:, lo:lo + step] = sub.T
        return np.ascontiguousarray(out)


@dataclass(frozen=True, eq=False)
class VotingClassifier:
    """Convex combination of hypotheses, keyed by row index.

    Classifiers built from vote counts keep the integer counts so scores can
    be formed exactly as ``tally / total``.
    """

    weights: Mapping[int, float]
    counts: Mapping[int, int] | None = field(default=None)

    def __post_init__(self):
        w = {int(k): float(v) for k, v in self.weights.items()}
        if not w:
            raise ParameterError("voting classifier needs at least one hypothesis")
        if any(v < 0 for v in w.values()):
            raise ParameterError("weights must be nonnegative")
        if abs(sum(w.values()) - 1.0) > WEIGHT_TOL:
            raise ParameterError("weights must sum to 1")
        object.__setattr__(self, "weights", dict(sorted(w.items())))
        if self.counts is not None:
            object.__setattr__(self, "counts", {int(k): int(v) for k, v in sorted(self.counts.items())})

    @classmethod
    def from_counts(cls, counts):
        counts = {int(k): int(v) for k, v in counts.items() if v}
        total = sum(counts.values())
        return cls({k: v / total for k, v in counts.items()}, counts=counts)

    @classmethod
    def from_alphas(cls, indices, alphas):
        acc = {}
        for i, a in zip(indices, alphas):
            acc[int(i)] = acc.get(int(i), 0.0) + float(a)
        total = sum(acc.values())
        return cls({k: v / total for k, v in acc.items()})

    @property
    def total_votes(self):
        return None if self.counts is None else sum(self.counts.values())

    def _check(self, H):
        for j in self.weights:
            if not 0 <= j < H.size:
                raise IndexError(f"hypothesis index {j} not in set of size {H.size}")

    def tally(self, H):
        """Integer vote sum per point (only for count-built classifiers)."""
        if self.counts is None:
            raise ValueError("classifier was not built from counts")
        self._check(H)
        idx = np.fromiter(self.counts, dtype=np.int64)
        c = np.fromiter(self.counts.values(), dtype=np.int64)
        return c @ H.signs(idx).astype(np.int64)

    def scores(self, H):
        """f(xi_i) for every point."""
        if self.counts is not None:
            return self.tally(H) / self.total_votes
        self._check(H)
        idx = np.fromiter(self.weights, dtype=np.int64)
        w = np.fromiter(self.weights.values(), dtype=np.float64)
        return w @ H.signs(idx).astype(np.float64)


@dataclass(frozen=True)
class MarginProfile:
    margins: np.ndarray
    theta_used: float
    fraction_below: float

    @property
    def min_margin(self):
        return float(self.margins[0])


def evaluate(f, H, i):
    if not 0 <= i < H.u:
        raise IndexError(f"point {i} out of range for u={H.u}")
    f._check(H)
    if f.counts is not None:
        idx = np.fromiter(f.counts, dtype=np.int64)
        c = np.fromiter(f.counts.values(), dtype=np.int64)
        return float(int(c @ H.signs(idx)[:, i].astype(np.int64)) / f.total_votes)
    idx = np.fromiter(f.weights, dtype=np.int64)
    w = np.fromiter(f.weights.values(), dtype=np.float64)
    return float(w @ H.signs(idx)[:, i])


def margin(f, H, labeling, i):
    value = evaluate(f, H, i)
    return float(labeling.values[i]) * value


def margin_profile(f, H, labeling, theta):
    if not 0 < theta <= 1:
        raise ParameterError("theta must lie in (0, 1]")
    if labeling.u != H.u:
        raise ParameterError("labeling and hypothesis set disagree on u")
    m = np.sort(labeling.values * f.scores(H))
    below = int(np.count_nonzero(m < theta))
    return MarginProfile(m, float(theta), below / m.size)


def exact_min_margin_at_least(tally, labeling, total, theta):
    """Exact rational test of ``min_i y_i tally_i / total >= theta``.

    A float ``theta`` is read as its shortest decimal form, so 0.02 means 1/50.
    """
    worst = int(np.min(labeling.values.astype(np.int64) * np.asarray(tally, dtype=np.int64)))
    target = Fraction(repr(theta)) if isinstance(theta, float) else Fraction(theta)
    return Fraction(worst, total) >= target
