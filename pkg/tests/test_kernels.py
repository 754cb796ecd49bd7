import os
import subprocess
import sys

import numpy as np
import pytest

from prepr import _kernels

pytestmark = pytest.mark.skipif(not _kernels.numba_kernels, reason="numba unavailable")


@pytest.fixture(scope="module")
def data():
    rng = np.random.default_rng(0)
    return rng.gamma(2.0, 1.0, (37, 64)) * 3 - 1


def test_column_moments_agree(data):
    a = _kernels.numpy_kernels["column_moments"](data)
    b = _kernels.numba_kernels["column_moments"](data)
    for u, v in zip(a, b):
        np.testing.assert_allclose(u, v, rtol=1e-12, atol=1e-12)


def test_q_and_tails_agree(data):
    rng = np.random.default_rng(1)
    x = np.abs(rng.standard_normal(64)) * 3
    e1 = rng.uniform(0.5, 4, 64)
    rest = [rng.normal(0, 2, 64) for _ in range(3)]
    cross = rng.uniform(0, 3, 64)
    args = (x, e1, *rest, cross)
    np.testing.assert_allclose(_kernels.numpy_kernels["q_poly"](*args),
                               _kernels.numba_kernels["q_poly"](*args), rtol=1e-13)
    np.testing.assert_allclose(_kernels.numpy_kernels["prepivot_tails"](*args, 70),
                               _kernels.numba_kernels["prepivot_tails"](*args, 70), rtol=1e-12, atol=1e-300)


def test_ma_filter_agrees(data):
    coef = np.linspace(0.1, 1, 10)
    np.testing.assert_allclose(_kernels.numpy_kernels["ma_filter"](data, coef),
                               _kernels.numba_kernels["ma_filter"](data, coef), rtol=1e-13)


def test_env_flag_selects_numpy_backend():
    env = dict(os.environ, PREPR_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", "import prepr; print(prepr.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True).stdout.strip()
    assert out == "numpy"
    assert _kernels.BACKEND in ("numba", "numpy")
