# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops over bit-packed sign tables.

Sign convention: bit 1 is +1, bit 0 is -1, little-endian bit order inside
a byte (point ``i`` lives in byte ``i // 8``, bit ``i % 8``).
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log

cnp.import_array()

BACKEND = "cython"

cdef enum:
    ROW_BLOCK = 512

cdef double TIE_TOL = 1e-12


cdef inline int _sign(const unsigned char[:, ::1] packed, Py_ssize_t row, Py_ssize_t i) noexcept nogil:
    return 1 if (packed[row, i >> 3] >> (i & 7)) & 1 else -1


cdef void _fill_tables(const double[::1] w, double[:, ::1] tables) noexcept nogil:
    # tables[p, v] = sum over the 8 bits b of v of w[8p + b] * (+1 if set else -1)
    cdef Py_ssize_t p, v, low
    cdef Py_ssize_t nbytes = tables.shape[0]
    cdef double base
    for p in range(nbytes):
        base = 0.0
        for low in range(8):
            base -= w[8 * p + low]
        tables[p, 0] = base
        for v in range(1, 256):
            low = 0
            while not (v >> low) & 1:
                low += 1
            tables[p, v] = tables[p, v & (v - 1)] + 2.0 * w[8 * p + low]


cdef void _accumulate(const unsigned char[:, ::1] packed_t, const double[:, ::1] tables,
                      double[::1] acc) noexcept nogil:
    # row blocks keep the accumulator slice resident in L1 across all byte columns
    cdef Py_ssize_t nbytes = packed_t.shape[0]
    cdef Py_ssize_t n_rows = packed_t.shape[1]
    cdef Py_ssize_t lo, hi, p, r
    lo = 0
    while lo < n_rows:
        hi = min(lo + ROW_BLOCK, n_rows)
        for r in range(lo, hi):
            acc[r] = 0.0
        p = 0
        while p + 3 < nbytes:
            for r in range(lo, hi):
                acc[r] += ((tables[p, packed_t[p, r]] + tables[p + 1, packed_t[p + 1, r]])
                           + (tables[p + 2, packed_t[p + 2, r]] + tables[p + 3, packed_t[p + 3, r]]))
            p += 4
        while p < nbytes:
            for r in range(lo, hi):
                acc[r] += tables[p, packed_t[p, r]]
            p += 1
        lo = hi


def correlations(const unsigned char[:, ::1] packed_t, const double[::1] w):
    """Return ``sum_i w[i] * s_r[i]`` for every row r of the transposed table.

    ``packed_t`` has shape (nbytes, n_rows); ``w`` has length ``8 * nbytes``
    with zeros on padding bits.
    """
    cdef Py_ssize_t nbytes = packed_t.shape[0]
    cdef Py_ssize_t n_rows = packed_t.shape[1]
    if w.shape[0] != 8 * nbytes:
        raise ValueError("weight vector must cover every packed bit")
    out_arr = np.zeros(n_rows, dtype=np.float64)
    cdef double[::1] out = out_arr
    tables_arr = np.empty((nbytes, 256), dtype=np.float64)
    cdef double[:, ::1] tables = tables_arr
    with nogil:
        _fill_tables(w, tables)
        _accumulate(packed_t, tables, out)
    return out_arr


def margin_boost(const unsigned char[:, ::1] packed,
                 const long long[::1] batch_bounds,
                 const signed char[::1] y,
                 double alpha,
                 double gamma,
                 double[:, ::1] trace=None):
    """Fixed-edge boosting over consecutive batches.

    Row 0 of ``packed`` is the constant hypothesis and is tried first in every
    round; round ``j`` then scans rows ``batch_bounds[j] .. batch_bounds[j+1]-1``.
    Returns ``(failed_round, chosen, Z, tally, D)`` with ``failed_round == -1``
    on success.
    """
    cdef Py_ssize_t u = y.shape[0]
    cdef Py_ssize_t k = batch_bounds.shape[0] - 1
    cdef Py_ssize_t j, i, row, pick
    cdef double err, z, target = 0.5 - gamma
    cdef double e_minus = exp(-alpha), e_plus = exp(alpha)
    cdef int s
    D_arr = np.full(u, 1.0 / u, dtype=np.float64)
    chosen_arr = np.full(k, -1, dtype=np.int64)
    Z_arr = np.zeros(k, dtype=np.float64)
    tally_arr = np.zeros(u, dtype=np.int64)
    cdef double[::1] D = D_arr
    cdef long long[::1] chosen = chosen_arr
    cdef double[::1] Z = Z_arr
    cdef long long[::1] tally = tally_arr
    cdef bint record = trace is not None
    cdef Py_ssize_t failed = -1
    if record:
        for i in range(u):
            trace[0, i] = D[i]
    with nogil:
        for j in range(k):
            pick = -1
            err = 0.0
            for i in range(u):
                if y[i] < 0:
                    err += D[i]
            if err <= target:
                pick = 0
            else:
                for row in range(batch_bounds[j], batch_bounds[j + 1]):
                    err = 0.0
                    for i in range(u):
                        if _sign(packed, row, i) != y[i]:
                            err += D[i]
                    if err <= target:
                        pick = row
                        break
            if pick < 0:
                failed = j
                break
            chosen[j] = pick
            z = 0.0
            for i in range(u):
                s = _sign(packed, pick, i)
                tally[i] += s
                if s == y[i]:
                    D[i] *= e_minus
                else:
                    D[i] *= e_plus
                z += D[i]
            Z[j] = z
            for i in range(u):
                D[i] /= z
            if record:
                for i in range(u):
                    trace[j + 1, i] = D[i]
    return failed, chosen_arr, Z_arr, tally_arr, D_arr


def adaboost(const unsigned char[:, ::1] packed_t,
             const signed char[::1] y,
             Py_ssize_t rounds,
             double eps_floor):
    """Reference AdaBoost with exhaustive hypothesis search.

    ``packed_t`` is the (nbytes, n_rows) transposed table restricted to the
    training points, ``y`` their labels. Returns ``(chosen, alphas, eps, Z)``
    truncated at the first round whose best error is at least 1/2. Both
    comparisons allow 1e-12 of rounding: near-equal correlations are ties and
    an error within 1e-12 of 1/2 stops the run.
    """
    cdef Py_ssize_t nbytes = packed_t.shape[0]
    cdef Py_ssize_t n_rows = packed_t.shape[1]
    cdef Py_ssize_t n = y.shape[0]
    if n > 8 * nbytes:
        raise ValueError("label vector longer than packed rows")
    D_arr = np.full(n, 1.0 / n, dtype=np.float64)
    w_arr = np.zeros(8 * nbytes, dtype=np.float64)
    acc_arr = np.empty(n_rows, dtype=np.float64)
    tables_arr = np.empty((nbytes, 256), dtype=np.float64)
    chosen_arr = np.empty(rounds, dtype=np.int64)
    alpha_arr = np.empty(rounds, dtype=np.float64)
    eps_arr = np.empty(rounds, dtype=np.float64)
    Z_arr = np.empty(rounds, dtype=np.float64)
    cdef double[::1] D = D_arr
    cdef double[::1] w = w_arr
    cdef double[::1] acc = acc_arr
    cdef double[:, ::1] tables = tables_arr
    cdef long long[::1] chosen = chosen_arr
    cdef double[::1] alphas = alpha_arr
    cdef double[::1] epss = eps_arr
    cdef double[::1] Z = Z_arr
    cdef Py_ssize_t t, p, r, i, best, done = 0
    cdef double best_corr, eps, a, z, ea, eb
    cdef int s
    with nogil:
        for t in range(rounds):
            for i in range(n):
                w[i] = D[i] * y[i]
            _fill_tables(w, tables)
            _accumulate(packed_t, tables, acc)
            best_corr = acc[0]
            for r in range(1, n_rows):
                if acc[r] > best_corr:
                    best_corr = acc[r]
            # lowest index within rounding of the maximum (sum |w| = 1)
            best = 0
            while acc[best] < best_corr - TIE_TOL:
                best += 1
            eps = 0.0
            for i in range(n):
                s = 1 if (packed_t[i >> 3, best] >> (i & 7)) & 1 else -1
                if s != y[i]:
                    eps += D[i]
            if eps >= 0.5 - TIE_TOL:
                break
            if eps < eps_floor:
                eps = eps_floor
            a = 0.5 * log((1.0 - eps) / eps)
            ea = exp(-a)
            eb = exp(a)
            z = 0.0
            for i in range(n):
                s = 1 if (packed_t[i >> 3, best] >> (i & 7)) & 1 else -1
                if s == y[i]:
                    D[i] *= ea
                else:
                    D[i] *= eb
                z += D[i]
            for i in range(n):
                D[i] /= z
            chosen[t] = best
            alphas[t] = a
            epss[t] = eps
            Z[t] = z
            done = t + 1
    return chosen_arr[:done], alpha_arr[:done], eps_arr[:done], Z_arr[:done]
