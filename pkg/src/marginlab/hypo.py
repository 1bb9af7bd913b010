"""Random hypothesis sets drawn in equally sized batches.

A set is the constant-one hypothesis plus ``N = k * batch_size`` independent
uniform sign tables over the ground set, where ``gamma = 4 * theta``,
``k = ceil(ln(u) / gamma**2)`` and the batch size is the per-batch share of

    2 * ln(u) / gamma**2 * ln(ln(u) / (gamma**2 * delta)) * exp(c_exp * theta**2 * d)

rounded up.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import rng as rng_mod
from .core import HypothesisSet
from .errors import ParameterError

MAGIC = b"marginlab-hset"


@dataclass(frozen=True)
class HypoSamplerSpec:
    u: int
    d: int
    theta: float
    delta: float
    c_exp: float
    gamma: float
    k: int
    batch_size: int
    N: int
    n_formula: float

    @property
    def set_size(self):
        return self.N + 1


def make_spec(u, d, theta, delta, c_exp=1.0):
    if int(u) != u or u < 1:
        raise ParameterError(f"u must be a positive integer, got {u}")
    if int(d) != d or d < 0:
        raise ParameterError(f"d must be a nonnegative integer, got {d}")
    if d > u:
        raise ParameterError(f"sparsity d={d} exceeds ground-set size u={u}")
    if not 0 < theta < 1 / 40:
        raise ParameterError(f"theta={theta} outside (0, 1/40)")
    if not 0 < delta < 1:
        raise ParameterError(f"delta={delta} outside (0, 1)")
    if not math.isfinite(c_exp) or c_exp < 0:
        raise ParameterError(f"c_exp={c_exp} must be finite and nonnegative")
    u, d = int(u), int(d)
    gamma = 4 * theta
    rounds = math.log(u) / gamma**2
    k = max(1, math.ceil(rounds))
    if rounds > 0:
        n_formula = 2 * rounds * max(0.0, math.log(rounds / delta)) * math.exp(c_exp * theta**2 * d)
    else:
        n_formula = 0.0
    batch_size = max(1, math.ceil(n_formula / k))
    return HypoSamplerSpec(u, d, float(theta), float(delta), float(c_exp), gamma,
                           k, batch_size, k * batch_size, n_formula)


def _random_rows(gen, rows, u):
    nbytes = (u + 7) // 8
    block = gen.integers(0, 256, size=(rows, nbytes), dtype=np.uint8)
    tail = u % 8
    if tail:
        block[:, -1] &= np.uint8((1 << tail) - 1)
    return block


def sample_hypothesis_set(spec, seed, *key):
    """Draw a set; batch ``j`` comes from stream ``(seed, *key, j)``."""
    nbytes = (spec.u + 7) // 8
    packed = np.empty((spec.N + 1, nbytes), dtype=np.uint8)
    packed[0] = np.packbits(np.ones(spec.u, dtype=np.uint8), bitorder="little")
    for j in range(spec.k):
        lo = 1 + j * spec.batch_size
        packed[lo:lo + spec.batch_size] = _random_rows(rng_mod.stream(seed, *key, j), spec.batch_size, spec.u)
    bounds = tuple(1 + j * spec.batch_size for j in range(spec.k + 1))
    return HypothesisSet(packed, spec.u, bounds)


def save_hypothesis_set(path, H, spec, seed):
    """Write header line then the N random rows, each padded to whole bytes."""
    header = (f"{MAGIC.decode()} u={spec.u} d={spec.d} theta={spec.theta!r} delta={spec.delta!r} "
              f"c_exp={spec.c_exp!r} seed={int(seed)} N={H.n_random} k={H.n_batches}\n")
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(H.packed[1:].tobytes())


def load_hypothesis_set(path):
    data = Path(path).read_bytes()
    nl = data.index(b"\n")
    head = data[:nl].decode("ascii")
    if not head.startswith(MAGIC.decode()):
        raise ParameterError(f"{path} is not a hypothesis-set cache")
    fields = dict(re.findall(r"(\w+)=(\S+)", head))
    u, n, k = int(fields["u"]), int(fields["N"]), int(fields["k"])
    nbytes = (u + 7) // 8
    body = np.frombuffer(data, dtype=np.uint8, offset=nl + 1)
    if body.size != n * nbytes or n % k:
        raise ParameterError(f"{path}: body size does not match header")
    packed = np.empty((n + 1, nbytes), dtype=np.uint8)
    packed[0] = np.packbits(np.ones(u, dtype=np.uint8), bitorder="little")
    packed[1:] = body.reshape(n, nbytes)
    bs = n // k
    H = HypothesisSet(packed, u, tuple(1 + j * bs for j in range(k + 1)))
    meta = {"u": u, "d": int(fields["d"]), "theta": float(fields["theta"]),
            "delta": float(fields["delta"]), "c_exp": float(fields["c_exp"]),
            "seed": int(fields["seed"]), "N": n, "k": k}
    return H, meta
