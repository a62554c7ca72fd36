"""Hot inner loops, each with a numba and a pure-numpy implementation.

The public entry points dispatch on :data:`rotowave._accel.USE_NUMBA`; the
``*_numpy`` and ``*_numba`` variants stay importable for the benchmark and
for equivalence tests.
"""

import numpy as np

from ._accel import USE_NUMBA, njit

# --------------------------------------------------------------------------
# Mode-wise propagation  out_m = V_m diag(exp(i omega_m tau)) V_m^H c_m


def apply_modal_numpy(vectors, omega, tau, coeffs):
    phase = np.exp(1j * tau * omega)
    proj = np.matmul(np.conj(np.swapaxes(vectors, 1, 2)), coeffs[:, :, None])[:, :, 0]
    return np.matmul(vectors, (proj * phase)[:, :, None])[:, :, 0]


@njit
def apply_modal_numba(vectors, omega, tau, coeffs):
    nmode, dim = coeffs.shape
    out = np.empty_like(coeffs)
    tmp = np.empty(dim, dtype=np.complex128)
    for m in range(nmode):
        for j in range(dim):
            acc = 0j
            for i in range(dim):
                acc += np.conj(vectors[m, i, j]) * coeffs[m, i]
            ang = tau * omega[m, j]
            tmp[j] = acc * (np.cos(ang) + 1j * np.sin(ang))
        for i in range(dim):
            acc = 0j
            for j in range(dim):
                acc += vectors[m, i, j] * tmp[j]
            out[m, i] = acc
    return out


def apply_modal(vectors, omega, tau, coeffs):
    if USE_NUMBA:
        return apply_modal_numba(vectors, omega, float(tau), coeffs)
    return apply_modal_numpy(vectors, omega, tau, coeffs)


def apply_matrices_numpy(mats, coeffs):
    return np.matmul(mats, coeffs[:, :, None])[:, :, 0]


@njit
def apply_matrices_numba(mats, coeffs):
    nmode, dim = coeffs.shape
    out = np.empty_like(coeffs)
    for m in range(nmode):
        for i in range(dim):
            acc = 0j
            for j in range(dim):
                acc += mats[m, i, j] * coeffs[m, j]
            out[m, i] = acc
    return out


def apply_matrices(mats, coeffs):
    if USE_NUMBA:
        return apply_matrices_numba(mats, coeffs)
    return apply_matrices_numpy(mats, coeffs)


# --------------------------------------------------------------------------
# Null vectors of the shifted 4x4 symbol  (B(xi) - lambda I) v = 0


def null_vectors_numpy(mats):
    """Right singular vector of the smallest singular value, per matrix."""
    _, _, vh = np.linalg.svd(mats)
    return np.conj(vh[:, -1, :])


@njit
def _det3(a00, a01, a02, a10, a11, a12, a20, a21, a22):
    return a00 * (a11 * a22 - a12 * a21) - a01 * (a10 * a22 - a12 * a20) + a02 * (a10 * a21 - a11 * a20)


@njit
def null_vectors_numba(mats):
    """Largest column of the adjugate; proportional to the null vector when rank is 3."""
    nmat = mats.shape[0]
    out = np.empty((nmat, 4), dtype=np.complex128)
    rows = np.empty(3, dtype=np.int64)
    cols = np.empty(3, dtype=np.int64)
    adj = np.empty((4, 4), dtype=np.complex128)
    for m in range(nmat):
        a = mats[m]
        for i in range(4):
            for j in range(4):
                # adj[j, i] = (-1)^(i+j) det(minor removing row i, column j)
                r = 0
                for k in range(4):
                    if k != i:
                        rows[r] = k
                        r += 1
                c = 0
                for k in range(4):
                    if k != j:
                        cols[c] = k
                        c += 1
                d = _det3(
                    a[rows[0], cols[0]], a[rows[0], cols[1]], a[rows[0], cols[2]],
                    a[rows[1], cols[0]], a[rows[1], cols[1]], a[rows[1], cols[2]],
                    a[rows[2], cols[0]], a[rows[2], cols[1]], a[rows[2], cols[2]],
                )
                sign = 1.0 if (i + j) % 2 == 0 else -1.0
                adj[j, i] = sign * d
        best = 0
        best_norm = -1.0
        for j in range(4):
            s = 0.0
            for i in range(4):
                s += adj[i, j].real ** 2 + adj[i, j].imag ** 2
            if s > best_norm:
                best_norm = s
                best = j
        scale = 1.0 / np.sqrt(best_norm)
        for i in range(4):
            out[m, i] = adj[i, best] * scale
    return out


def null_vectors(mats):
    if USE_NUMBA:
        return null_vectors_numba(mats)
    return null_vectors_numpy(mats)


# --------------------------------------------------------------------------
# Oscillatory quadrature sum   sum_j w_j exp(i (tau * phase_j + x3 * z_j))


def oscillatory_sum_numpy(weights, phase, z, tau, x3):
    return complex(np.sum(weights * np.exp(1j * (tau * phase + x3 * z))))


@njit
def oscillatory_sum_numba(weights, phase, z, tau, x3):
    re = 0.0
    im = 0.0
    for j in range(weights.shape[0]):
        ang = tau * phase[j] + x3 * z[j]
        re += weights[j] * np.cos(ang)
        im += weights[j] * np.sin(ang)
    return re + 1j * im


def oscillatory_sum(weights, phase, z, tau, x3=0.0):
    if USE_NUMBA:
        return oscillatory_sum_numba(weights, phase, z, float(tau), float(x3))
    return oscillatory_sum_numpy(weights, phase, z, tau, x3)
