import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from marginlab import kernels
from marginlab.core import pack_signs

compiled = kernels.compiled_backend()
py = kernels.python_backend
needs_compiled = pytest.mark.skipif(compiled is None, reason="extension not built")


def test_backend_selected():
    assert kernels.BACKEND in ("cython", "python")
    if compiled is not None:
        assert kernels.BACKEND == "cython"


def naive_correlations(packed_t, w, n):
    bits = np.unpackbits(packed_t, axis=0, count=n, bitorder="little").astype(np.float64) * 2 - 1
    return w[:n] @ bits


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 70), st.integers(1, 50))
def test_correlations_match_naive(seed, n, rows):
    gen = np.random.default_rng(seed)
    signs = gen.integers(0, 2, size=(n, rows)) * 2 - 1
    packed_t = np.ascontiguousarray(pack_signs(signs.T).T)
    w = np.zeros(8 * packed_t.shape[0])
    w[:n] = gen.normal(size=n)
    want = naive_correlations(packed_t, w, n)
    assert np.allclose(py.correlations(packed_t, w), want, atol=1e-12)
    if compiled is not None:
        assert np.allclose(compiled.correlations(packed_t, w), want, atol=1e-12)


@needs_compiled
@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(5, 60), st.integers(1, 8), st.integers(0, 6))
def test_margin_boost_backends_agree(seed, u, k, negatives):
    gen = np.random.default_rng(seed)
    bs = int(gen.integers(1, 6))
    rows = np.vstack([np.ones((1, u), dtype=np.int8), gen.integers(0, 2, size=(k * bs, u)) * 2 - 1])
    packed = pack_signs(rows)
    bounds = np.arange(1, k * bs + 2, bs, dtype=np.int64)
    y = np.ones(u, dtype=np.int8)
    y[gen.choice(u, size=min(negatives, u), replace=False)] = -1
    gamma = 0.08
    alpha = 0.5 * np.log((1 + 2 * gamma) / (1 - 2 * gamma))
    a = compiled.margin_boost(packed, bounds, y, alpha, gamma, None)
    b = py.margin_boost(packed, bounds, y, alpha, gamma, None)
    assert a[0] == b[0]
    assert np.array_equal(a[1], b[1]) and np.array_equal(a[3], b[3])
    assert np.allclose(a[2], b[2], rtol=1e-12) and np.allclose(a[4], b[4], rtol=1e-9)


@needs_compiled
@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(3, 60), st.integers(2, 40), st.integers(1, 15))
def test_adaboost_backends_agree(seed, n, rows, rounds):
    gen = np.random.default_rng(seed)
    signs = gen.integers(0, 2, size=(rows, n)) * 2 - 1
    signs[0] = 1
    packed_t = np.ascontiguousarray(pack_signs(signs).T)
    y = (gen.integers(0, 2, size=n) * 2 - 1).astype(np.int8)
    a = compiled.adaboost(packed_t, y, rounds, 1e-10)
    b = py.adaboost(packed_t, y, rounds, 1e-10)
    # argmax ties resolved identically unless two correlations differ only by rounding
    assert np.array_equal(a[0], b[0])
    for x, z in zip(a[1:], b[1:]):
        assert np.allclose(x, z, rtol=1e-9, atol=1e-12)


def test_trace_rows(backend):
    mod = kernels
    u = 6
    packed = pack_signs(np.ones((2, u), dtype=np.int8))
    y = np.array([1, 1, 1, 1, 1, -1], dtype=np.int8)
    trace = np.empty((4, u))
    failed, chosen, Z, tally, D = mod.margin_boost(packed, np.array([1, 2], dtype=np.int64), y, 0.1, 0.08, trace)
    assert failed == -1 and chosen.tolist() == [0]
    assert np.allclose(trace[0], 1 / u) and np.allclose(trace[1], D)
