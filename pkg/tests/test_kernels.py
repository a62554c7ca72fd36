import os
import subprocess
import sys

import numpy as np
import pytest

from rotowave import _accel, _kernels


@pytest.fixture(scope="module")
def inputs():
    rng = np.random.default_rng(11)
    n = 257
    vectors = np.linalg.qr(rng.standard_normal((n, 4, 4)) + 1j * rng.standard_normal((n, 4, 4)))[0]
    omega = rng.standard_normal((n, 4))
    coeffs = rng.standard_normal((n, 4)) + 1j * rng.standard_normal((n, 4))
    mats = rng.standard_normal((n, 4, 4)) + 1j * rng.standard_normal((n, 4, 4))
    sing = mats.copy()
    sing[:, 3] = sing[:, 0] - 2 * sing[:, 2]
    return vectors, omega, coeffs, mats, sing


def test_apply_modal_paths_agree(inputs):
    vectors, omega, coeffs, _, _ = inputs
    a = _kernels.apply_modal_numpy(vectors, omega, 0.7, coeffs)
    b = _kernels.apply_modal_numba(vectors, omega, 0.7, coeffs)
    np.testing.assert_allclose(a, b, atol=1e-13)
    # unitary modal matrices preserve each mode's norm
    np.testing.assert_allclose(np.linalg.norm(a, axis=1), np.linalg.norm(coeffs, axis=1), rtol=1e-12)


def test_apply_matrices_paths_agree(inputs):
    _, _, coeffs, mats, _ = inputs
    a = _kernels.apply_matrices_numpy(mats, coeffs)
    np.testing.assert_allclose(a, np.einsum("nij,nj->ni", mats, coeffs), atol=1e-13)
    np.testing.assert_allclose(_kernels.apply_matrices_numba(mats, coeffs), a, atol=1e-13)


def test_null_vectors_paths_agree(inputs):
    *_, sing = inputs
    a = _kernels.null_vectors_numpy(sing)
    b = _kernels.null_vectors_numba(sing)
    for v in (a, b):
        np.testing.assert_allclose(np.linalg.norm(v, axis=1), 1.0, rtol=1e-12)
        assert np.max(np.abs(np.einsum("nij,nj->ni", sing, v))) < 1e-10
    # equal up to a unit phase per row
    phase = np.sum(np.conj(a) * b, axis=1)
    np.testing.assert_allclose(np.abs(phase), 1.0, rtol=1e-10)


def test_oscillatory_sum_paths_agree():
    rng = np.random.default_rng(2)
    w, ph, z = rng.random(5000), rng.standard_normal(5000), rng.standard_normal(5000)
    for tau, x3 in ((0.0, 0.0), (3.0, 0.5), (200.0, -1.0)):
        a = _kernels.oscillatory_sum_numpy(w, ph, z, tau, x3)
        b = _kernels.oscillatory_sum_numba(w, ph, z, tau, x3)
        assert abs(a - b) <= 1e-12 * np.sum(w)
    assert _kernels.oscillatory_sum_numpy(w, ph, z, 0.0, 0.0) == pytest.approx(np.sum(w))


def test_njit_decorator_forms():
    plain = _accel.njit(lambda x: x + 1)
    configured = _accel.njit()(lambda x: x * 2)
    assert plain(1) == 2 and configured(3) == 6


_PROBE = """
import numpy as np
from rotowave import _accel
from rotowave.fields import random_state
from rotowave.grid import Grid
from rotowave.nonlinear import step
u = random_state(Grid(8, 6.283185307179586), 3, peak=0.2)
out = step(u, 0.05, 0.1, 0.5)
print(_accel.USE_NUMBA, repr(float(out.norm())))
"""


def _probe(flag):
    env = dict(os.environ)
    env.pop("NUMBA_DISABLE_JIT", None)
    env["ROTOWAVE_DISABLE_NUMBA"] = flag
    proc = subprocess.run([sys.executable, "-c", _PROBE], capture_output=True, text=True, env=env, timeout=600)
    assert proc.returncode == 0, proc.stderr
    used, norm = proc.stdout.split()
    return used == "True", float(norm)


def test_disable_flag_selects_numpy_and_agrees():
    on_used, on_norm = _probe("0")
    off_used, off_norm = _probe("1")
    assert on_used and not off_used
    assert off_norm == pytest.approx(on_norm, rel=1e-12)
