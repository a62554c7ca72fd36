"""Seeded real test fields with prescribed spectral envelopes."""

import numpy as np

from .grid import StateField, reflect, to_spectral


def gaussian_envelope(width):
    """``exp(-|xi|^2 / (2 width^2))``"""
    return lambda k: np.exp(-0.5 * (k / width) ** 2)


def sobolev_envelope(exponent):
    """``(1 + |xi|^2)^(-exponent / 2)``"""
    return lambda k: (1.0 + k**2) ** (-0.5 * exponent)


def shell_envelope(lo, hi):
    return lambda k: ((k >= lo) & (k <= hi)).astype(float)


def random_state(
    grid,
    seed,
    ncomp=4,
    envelope=None,
    l2=None,
    peak=None,
    dealias=True,
    avoid_planes=False,
):
    """Real random field whose coefficient moduli follow ``envelope(|xi|)``.

    White noise sets random phases and Rayleigh-distributed moduli; the result
    is real (Hermitian coefficients), Nyquist-free and, with ``dealias``, inside
    the 2/3 band.  ``avoid_planes`` removes the lattice planes ``xi_3 = 0`` and
    ``xi_h = 0``.  Scale with either ``l2`` (norm) or ``peak`` (max modulus).
    """
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((ncomp,) + grid.shape)
    c = to_spectral(grid, noise).coeffs
    weight = np.ones(grid.shape) if envelope is None else envelope(grid.xi_norm)
    mask = ~grid.nyquist_mask
    if dealias:
        mask &= grid.dealias_mask
    if avoid_planes:
        mask &= (grid.xi3_abs > 0) & (grid.xi_h_norm > 0)
    c = c * (weight * mask)
    u = StateField(grid, c)
    if l2 is not None and peak is not None:
        raise ValueError("give l2 or peak, not both")
    if l2 is not None:
        nrm = u.norm()
        u = u * (l2 / nrm) if nrm > 0 else u
    elif peak is not None:
        top = float(np.max(np.sqrt(np.sum(np.abs(u.to_physical()) ** 2, axis=0))))
        u = u * (peak / top) if top > 0 else u
    return u


def modes_state(grid, mask, seed, peak=1.0):
    """Real field on the modes selected by ``mask`` with random complex polarizations.

    ``mask`` is symmetrized under ``k -> -k``; the field is scaled to the given
    maximum pointwise modulus.
    """
    mask = np.asarray(mask, dtype=bool) & ~grid.nyquist_mask
    mask = mask | reflect(mask)
    rng = np.random.default_rng(seed)
    c = (rng.standard_normal((4,) + grid.shape) + 1j * rng.standard_normal((4,) + grid.shape)) * mask
    c = 0.5 * (c + np.conj(reflect(c)))
    u = StateField(grid, c)
    top = float(np.max(np.sqrt(np.sum(np.abs(u.to_physical()) ** 2, axis=0))))
    return u * (peak / top) if top > 0 else u


def bump_state(grid, envelope, polarization=(1.0, 1.0, 1.0, 1.0), l2=None, dealias=True):
    """Coherent bump centred at the origin: every mode in phase, ``envelope(|xi|) * polarization``."""
    mask = ~grid.nyquist_mask
    if dealias:
        mask &= grid.dealias_mask
    weight = envelope(grid.xi_norm) * mask
    c = np.asarray(polarization, dtype=float)[:, None, None, None] * weight
    u = StateField(grid, c.astype(complex))
    if l2 is not None:
        nrm = u.norm()
        u = u * (l2 / nrm) if nrm > 0 else u
    return u
