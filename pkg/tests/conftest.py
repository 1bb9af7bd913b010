import numpy as np
import pytest

from marginlab import kernels
from marginlab.core import HypothesisSet, pack_signs

BACKENDS = ["python"] + (["cython"] if kernels.compiled_backend() is not None else [])


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Route every kernel call through one backend."""
    mod = kernels.python_backend if request.param == "python" else kernels.compiled_backend()
    for name in ("correlations", "margin_boost", "adaboost"):
        monkeypatch.setattr(kernels, name, getattr(mod, name))
    monkeypatch.setattr(kernels, "BACKEND", mod.BACKEND)
    return request.param


def random_set(gen, u, k, batch_size):
    batches = [gen.integers(0, 2, size=(batch_size, u)) * 2 - 1 for _ in range(k)]
    return HypothesisSet.from_batches(batches)


@pytest.fixture
def gen():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(results):
        terminalreporter.write_line(results[key])
