"""NumPy fallback for the compiled kernels in ``_kernels.pyx``.

Same signatures and return values. Summation order differs from the
compiled path, so floating results agree to rounding, not bit for bit.
"""

import numpy as np

BACKEND = "python"

_CHUNK = 4096
TIE_TOL = 1e-12


def _signs(packed, rows, u):
    bits = np.unpackbits(packed[rows], axis=-1, count=u, bitorder="little")
    return bits.astype(np.int8) * 2 - 1


def _tables(w):
    nbytes = w.shape[0] // 8
    bits = np.unpackbits(np.arange(256, dtype=np.uint8)[:, None], axis=1, bitorder="little")
    signs = bits.astype(np.float64) * 2.0 - 1.0  # (256, 8)
    return w.reshape(nbytes, 8) @ signs.T  # (nbytes, 256)


def correlations(packed_t, w):
    packed_t = np.asarray(packed_t, dtype=np.uint8)
    w = np.asarray(w, dtype=np.float64)
    nbytes, n_rows = packed_t.shape
    if w.shape[0] != 8 * nbytes:
        raise ValueError("weight vector must cover every packed bit")
    tables = _tables(w)
    out = np.zeros(n_rows, dtype=np.float64)
    for p in range(nbytes):
        out += tables[p, packed_t[p]]
    return out


def margin_boost(packed, batch_bounds, y, alpha, gamma, trace=None):
    y = np.asarray(y, dtype=np.int8)
    u = y.shape[0]
    k = len(batch_bounds) - 1
    target = 0.5 - gamma
    factor = {True: np.exp(-alpha), False: np.exp(alpha)}
    D = np.full(u, 1.0 / u)
    chosen = np.full(k, -1, dtype=np.int64)
    Z = np.zeros(k)
    tally = np.zeros(u, dtype=np.int64)
    neg = y < 0
    if trace is not None:
        trace[0] = D
    for j in range(k):
        pick = -1
        if D[neg].sum() <= target:
            pick = 0
        else:
            start = int(batch_bounds[j])
            block = _signs(packed, slice(start, int(batch_bounds[j + 1])), u)
            errs = (D * (block != y)).sum(axis=1)
            ok = np.flatnonzero(errs <= target)
            if ok.size:
                pick = start + int(ok[0])
        if pick < 0:
            return j, chosen, Z, tally, D
        chosen[j] = pick
        h = _signs(packed, pick, u)
        tally += h
        D = D * np.where(h == y, factor[True], factor[False])
        z = D.sum()
        Z[j] = z
        D = D / z
        if trace is not None:
            trace[j + 1] = D
    return -1, chosen, Z, tally, D


def adaboost(packed_t, y, rounds, eps_floor):
    packed_t = np.asarray(packed_t, dtype=np.uint8)
    y = np.asarray(y, dtype=np.int8)
    nbytes, n_rows = packed_t.shape
    n = y.shape[0]
    if n > 8 * nbytes:
        raise ValueError("label vector longer than packed rows")
    D = np.full(n, 1.0 / n)
    chosen, alphas, epss, Zs = [], [], [], []
    for _ in range(rounds):
        w = np.zeros(8 * nbytes)
        w[:n] = D * y
        corr = correlations(packed_t, w)
        best = int(np.flatnonzero(corr >= corr.max() - TIE_TOL)[0])
        col = np.unpackbits(packed_t[:, best], count=n, bitorder="little").astype(np.int8) * 2 - 1
        eps = float(D[col != y].sum())
        if eps >= 0.5 - TIE_TOL:
            break
        eps = max(eps, eps_floor)
        a = 0.5 * np.log((1.0 - eps) / eps)
        D = D * np.exp(-a * y * col)
        z = D.sum()
        D = D / z
        chosen.append(best)
        alphas.append(a)
        epss.append(eps)
        Zs.append(z)
    return (np.asarray(chosen, dtype=np.int64), np.asarray(alphas, dtype=np.float64),
            np.asarray(epss, dtype=np.float64), np.asarray(Zs, dtype=np.float64))
