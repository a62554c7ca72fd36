"""Spectral theory of the penalized rotation/acoustic operator.

In Fourier variables the linear part of the system is ``dU/dt = (1/eps) B(xi) U``
with the skew-Hermitian symbol

    B(xi) = [[ 0,  1, 0, -i g xi1],
             [-1,  0, 0, -i g xi2],
             [ 0,  0, 0, -i g xi3],
             [-i g xi1, -i g xi2, -i g xi3, 0]],      g = gamma_bar = (gamma - 1)/2.

Its characteristic polynomial is ``l^4 + (1 + g^2 |xi|^2) l^2 + g^2 xi3^2`` and the
four eigenvalues are ``e1 (i/2) (A + e2 B)`` with
``A = sqrt(1 + g^2|xi|^2 + 2 g xi3)`` and ``B = sqrt(1 + g^2|xi|^2 - 2 g xi3)``.
Branches are ordered ``(+,+), (+,-), (-,+), (-,-)`` everywhere in this module.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .grid import StateField

BRANCHES = ((1, 1), (1, -1), (-1, 1), (-1, -1))
DEGENERACY_GAP = 1e-8


def _check_gamma(gamma_bar):
    if not gamma_bar > 0:
        raise ValueError("gamma_bar must be positive")


def symbol(xi, gamma_bar):
    """The 4x4 matrix ``B(xi)``; ``xi`` may carry leading batch axes ``(..., 3)``."""
    _check_gamma(gamma_bar)
    xi = np.asarray(xi, dtype=float)
    out = np.zeros(xi.shape[:-1] + (4, 4), dtype=np.complex128)
    out[..., 0, 1] = 1.0
    out[..., 1, 0] = -1.0
    coupling = -1j * gamma_bar * xi
    out[..., :3, 3] = coupling
    out[..., 3, :3] = coupling
    return out


def char_poly_coeffs(xi, gamma_bar):
    """``(c2, c0)`` with ``P(l) = l^4 + c2 l^2 + c0``."""
    _check_gamma(gamma_bar)
    xi = np.asarray(xi, dtype=float)
    g2 = gamma_bar**2
    c2 = 1.0 + g2 * np.sum(xi**2, axis=-1)
    c0 = g2 * xi[..., 2] ** 2
    return c2, c0


def char_poly(lam, xi, gamma_bar):
    c2, c0 = char_poly_coeffs(xi, gamma_bar)
    return lam**4 + c2 * lam**2 + c0


def _radicands(xi, gamma_bar):
    xi = np.asarray(xi, dtype=float)
    base = 1.0 + gamma_bar**2 * np.sum(xi**2, axis=-1)
    shift = 2.0 * gamma_bar * xi[..., 2]
    a2 = base + shift
    b2 = base - shift
    # (1 +- g xi3)^2 + g^2 |xi_h|^2 >= 0; only rounding can push these negative
    a2 = np.where((a2 < 0) & (a2 > -1e-14), 0.0, a2)
    b2 = np.where((b2 < 0) & (b2 > -1e-14), 0.0, b2)
    return a2, b2


def branch_frequencies(xi, gamma_bar):
    """Real frequencies ``omega`` with ``lambda = i omega``, shape ``(..., 4)``.

    ``(A - B)/2`` is evaluated as ``2 g xi3 / (A + B)`` to avoid cancellation.
    """
    _check_gamma(gamma_bar)
    xi = np.asarray(xi, dtype=float)
    a2, b2 = _radicands(xi, gamma_bar)
    a = np.sqrt(a2)
    b = np.sqrt(b2)
    fast = 0.5 * (a + b)
    slow = 2.0 * gamma_bar * xi[..., 2] / (a + b)
    return np.stack([fast, slow, -fast, -slow], axis=-1)


def eigenvalues_closed_form(xi, gamma_bar):
    """The four purely imaginary eigenvalues in branch order."""
    return 1j * branch_frequencies(xi, gamma_bar)


@dataclass(frozen=True)
class EigenSystem:
    xi: np.ndarray
    lambdas: np.ndarray
    vectors: np.ndarray
    """Columns are the eigenvectors, ``vectors[:, j]`` pairs with ``lambdas[j]``."""
    degenerate: bool

    @property
    def gram_deviation(self):
        g = self.vectors.conj().T @ self.vectors
        return float(np.max(np.abs(g - np.eye(4))))


def _fix_phase(vectors, tol=1e-8):
    """Rotate each eigenvector so its first non-negligible entry is real positive.

    ``vectors`` has shape ``(N, 4, 4)`` with eigenvectors in the columns.
    """
    mag = np.abs(vectors)
    scale = np.max(mag, axis=1, keepdims=True)
    first = np.argmax(mag > tol * scale, axis=1)
    lead = np.take_along_axis(vectors, first[:, None, :], axis=1)
    return vectors * (np.abs(lead) / lead)


def _min_gap(omega):
    diffs = np.abs(omega[..., :, None] - omega[..., None, :])
    diffs = np.where(np.eye(4, dtype=bool), np.inf, diffs)
    return np.min(diffs, axis=(-2, -1))


def eigensystem_batch(xis, gamma_bar):
    """Eigen-decomposition of ``B(xi)`` for every row of ``xis`` (shape ``(N, 3)``).

    Returns ``(omega, vectors, degenerate)`` with ``lambda = i * omega``.
    Modes whose eigenvalue gaps are all above ``DEGENERACY_GAP`` use null-space
    solves at the closed-form eigenvalues; the rest fall back to a Hermitian
    eigendecomposition of ``i B(xi)``.
    """
    xis = np.atleast_2d(np.asarray(xis, dtype=float))
    omega = branch_frequencies(xis, gamma_bar)
    degenerate = _min_gap(omega) <= DEGENERACY_GAP
    vectors = np.empty(xis.shape[:1] + (4, 4), dtype=np.complex128)

    ok = ~degenerate
    if np.any(ok):
        mats = symbol(xis[ok], gamma_bar)
        nok = mats.shape[0]
        shifted = np.repeat(mats[:, None], 4, axis=1) - (1j * omega[ok])[:, :, None, None] * np.eye(4)
        nv = _kernels.null_vectors(np.ascontiguousarray(shifted.reshape(nok * 4, 4, 4)))
        vectors[ok] = np.swapaxes(nv.reshape(nok, 4, 4), 1, 2)

    if np.any(degenerate):
        mats = symbol(xis[degenerate], gamma_bar)
        mu, vec = np.linalg.eigh(1j * mats)
        # i B v = mu v  =>  B v = -i mu v, so omega = -mu; eigh sorts mu ascending
        target = omega[degenerate]
        order = np.argsort(-target, axis=1, kind="stable")
        placed = np.empty_like(vec)
        for col in range(4):
            placed[np.arange(len(order)), :, order[:, col]] = vec[:, :, col]
        vectors[degenerate] = placed

    return omega, _fix_phase(vectors), degenerate


def eigensystem(xi, gamma_bar):
    omega, vectors, degenerate = eigensystem_batch(np.asarray(xi, dtype=float)[None], gamma_bar)
    return EigenSystem(
        xi=np.asarray(xi, dtype=float),
        lambdas=1j * omega[0],
        vectors=vectors[0],
        degenerate=bool(degenerate[0]),
    )


class ModalPropagator:
    """Cached eigen-systems of ``B(xi)`` over a grid, applying ``exp((t/eps) B)``.

    Built once per ``(grid, gamma_bar)``; read-only afterwards.
    """

    def __init__(self, grid, gamma_bar):
        _check_gamma(gamma_bar)
        self.grid = grid
        self.gamma_bar = float(gamma_bar)
        omega, vectors, degenerate = eigensystem_batch(grid.xi_vectors, gamma_bar)
        self.omega = np.ascontiguousarray(omega)
        self.vectors = np.ascontiguousarray(vectors)
        self.degenerate = degenerate

    @staticmethod
    def _flatten(coeffs):
        return np.ascontiguousarray(coeffs.reshape(4, -1).T)

    def _unflatten(self, flat):
        return np.ascontiguousarray(flat.T).reshape((4,) + self.grid.shape)

    def apply_coeffs(self, coeffs, tau):
        """Propagate raw ``(4, n, n, n)`` coefficients by rescaled time ``tau = t/eps``."""
        if tau == 0:
            return coeffs.copy()
        flat = _kernels.apply_modal(self.vectors, self.omega, tau, self._flatten(coeffs))
        return self._unflatten(flat)

    def matrices(self, tau):
        """Per-mode propagator matrices ``V diag(exp(i omega tau)) V^H``."""
        phase = np.exp(1j * tau * self.omega)
        return np.matmul(self.vectors * phase[:, None, :], np.conj(np.swapaxes(self.vectors, 1, 2)))

    def apply_matrices(self, mats, coeffs):
        return self._unflatten(_kernels.apply_matrices(mats, self._flatten(coeffs)))

    def apply_symbol(self, coeffs):
        """``B(xi) U`` mode by mode (no time evolution)."""
        mats = symbol(self.grid.xi_vectors, self.gamma_bar)
        return self.apply_matrices(mats, coeffs)

    def propagate(self, field, t, eps):
        if not eps > 0:
            raise ValueError("eps must be positive")
        if field.grid != self.grid:
            raise ValueError("field lives on a different grid")
        return StateField(self.grid, self.apply_coeffs(field.coeffs, t / eps))


_CACHE = {}


def get_propagator(grid, gamma_bar):
    key = (grid, float(gamma_bar))
    prop = _CACHE.get(key)
    if prop is None:
        if len(_CACHE) >= 4:
            _CACHE.pop(next(iter(_CACHE)))
        prop = _CACHE[key] = ModalPropagator(grid, gamma_bar)
    return prop


def propagate(U, t, eps, gamma_bar):
    """Exact solution operator ``exp((t/eps) B)`` applied mode by mode."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    if U.ncomp != 4:
        raise ValueError("propagate expects a four-component state")
    return get_propagator(U.grid, gamma_bar).propagate(U, t, eps)
