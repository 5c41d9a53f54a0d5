import math
import os
import subprocess
import sys

import numpy as np
import pytest

from tpaw import _backend

needs_compiled = pytest.mark.skipif(_backend.compiled is None, reason="compiled extension not built")
PY, C = _backend.python, _backend.compiled


def test_backend_name():
    assert _backend.NAME in ("compiled", "python")
    assert (_backend.kernels is _backend.compiled) == (_backend.NAME == "compiled")


def test_env_var_forces_fallback():
    env = dict(os.environ, TPAW_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import tpaw; print(tpaw.BACKEND)"],
                         capture_output=True, text=True, env=env, check=True)
    assert out.stdout.strip() == "python"


def test_kernel_api(kernels):
    assert kernels.e1(1.0) == pytest.approx(0.21938393439552027, abs=1e-15)
    assert kernels.scaled_e1(1.0) == pytest.approx(math.e * 0.21938393439552027, rel=1e-14)
    w, err = kernels.weight_u(1e4, 1.0, 1e-11, 1e-13)
    assert w == pytest.approx(0.5, abs=1e-10) and err < 1e-10
    with pytest.raises(ValueError):
        kernels.weight_u(0.0, 1.0, 1e-11, 1e-13)
    u = kernels.uniform(1, 2, 3)
    assert 0 < u < 1


@needs_compiled
@pytest.mark.parametrize("x", np.geomspace(1e-9, 800, 60))
def test_special_functions_agree(x):
    assert C.e1(x) == pytest.approx(PY.e1(x), rel=1e-14, abs=1e-300)
    assert C.scaled_e1(x) == pytest.approx(PY.scaled_e1(x), rel=1e-14)


@needs_compiled
@pytest.mark.parametrize("x,k", [(1e-3, 0.7), (0.5, 1.3), (3.0, 0.2), (40.0, 2.0), (1e4, 0.9), (1e6, 1e-3)])
def test_weight_u_agrees(x, k):
    assert C.weight_u(x, k, 1e-11, 1e-13)[0] == pytest.approx(PY.weight_u(x, k, 1e-11, 1e-13)[0], abs=1e-12)


@needs_compiled
def test_streams_agree():
    assert C.stream_key(12345) == PY.stream_key(12345)
    for cycle in (0, 1, 2**40):
        for slot in range(9):
            assert C.uniform(7, cycle, slot) == PY.uniform(7, cycle, slot)


@needs_compiled
@pytest.mark.parametrize("params", [
    (0.2, 0.2, 0.5, True, 0.5, 1.0, 1 / 600, 600.0),
    (0.3, 0.1, 0.0, False, 0.7, 0.2, 1 / 600, 60.0),
    (0.1, 0.3, 1.0, True, 0.9, 0.9, 2.0, math.inf),
    (0.2, 0.2, 0.5, True, 0.5, 1.0, 1 / 600, 0.0),
    (0.35, 0.1, 0.2, True, 0.6, 1.0, 1 / 600, 600.0 * 3000),
])
def test_cycle_batches_agree(params):
    a = C.cycle_batch(*params, 99, 1000, 50_000)
    b = PY.cycle_batch(*params, 99, 1000, 50_000)
    assert np.array_equal(a[7], b[7])
    for i in (2, 3, 4):                     # b_r, b_c, b_o are block counts
        assert np.array_equal(a[i], b[i])
    for i in (0, 1, 5):                     # fractional shares and wall time
        assert np.allclose(a[i], b[i], rtol=1e-12, atol=1e-15)
    assert np.allclose(a[6], b[6], rtol=1e-12, equal_nan=True)
