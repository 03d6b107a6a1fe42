from __future__ import annotations

import numpy as np
import pytest

from mscaling import _backend, _kernels_py

needs_cython = pytest.mark.skipif(_backend._compiled is None, reason="compiled kernels not built")


def _case(seed=0, n=800):
    rng = np.random.default_rng(seed)
    r = rng.standard_t(3, n) * 0.01
    r[rng.integers(0, n, 20)] = 0.0  # exact zeros are admissible
    return np.concatenate([[0.0], np.cumsum(r)])


@needs_cython
@pytest.mark.parametrize("overlapping", [True, False])
@pytest.mark.parametrize("qs", [np.linspace(0.02, 1.0, 50), np.array([0.3, 0.7, 1.9])])
def test_backends_agree(overlapping, qs):
    p = _case()
    taus = np.arange(1, 120)
    a = _backend.structure_function(p, taus, qs, overlapping, backend="cython")
    b = _backend.structure_function(p, taus, qs, overlapping, backend="python")
    np.testing.assert_allclose(a, b, rtol=1e-12)


def test_python_kernel_toy():
    xi = _kernels_py.structure_function(np.array([0.0, 1.0, 3.0, 6.0]), np.array([1, 2]), np.array([1.0]))
    assert xi[:, 0].tolist() == [2.0, 4.0]


def test_uniform_step_detection():
    assert _backend._uniform_step(np.linspace(0.02, 1.0, 50)) == pytest.approx(0.02)
    assert _backend._uniform_step(np.array([0.1, 0.2, 0.5])) == 0.0


def test_unknown_backend():
    with pytest.raises(ValueError):
        _backend.structure_function(np.zeros(3), np.array([1]), np.array([1.0]), backend="fortran")


def test_backend_name():
    assert _backend.BACKEND in ("cython", "python")
