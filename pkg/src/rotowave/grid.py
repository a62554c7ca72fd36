"""Periodic spectral lattice, transforms and L2 bookkeeping.

Coefficient convention
----------------------
A field on the torus ``(R / L Z)^3`` sampled on ``n^3`` points is stored by
its Fourier amplitudes ``c_k`` so that

    u(x) = sum_k c_k exp(i xi_k . x),     xi_k = (2 pi / L) k,

i.e. ``c = fftn(u) / n^3``.  All norms and inner products are the physical
integrals over the box, so ``||u||_{L^2}^2 = L^3 sum_k |c_k|^2`` and a unit
amplitude plane wave has squared norm equal to the box volume.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft

__all__ = [
    "Grid",
    "StateField",
    "make_grid",
    "to_spectral",
    "to_physical",
    "inner_product",
    "physical_inner_product",
    "l2_norm",
    "derivative",
    "gradient",
    "divergence",
    "reflect",
    "hermitian_defect",
    "padded_physical",
    "from_padded",
]


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    """Cubic periodic grid with ``n`` modes per axis and period ``length``."""

    n: int
    length: float

    def __post_init__(self):
        if int(self.n) != self.n:
            raise GridError("n must be an integer")
        if self.n % 2:
            raise GridError("n must be even")
        if self.n < 8:
            raise GridError("n must be at least 8")
        if not self.length > 0:
            raise GridError("box length must be positive")

    @property
    def shape(self):
        return (self.n, self.n, self.n)

    @property
    def dk(self):
        """Wavevector spacing 2 pi / L."""
        return 2.0 * np.pi / self.length

    @property
    def volume(self):
        return self.length**3

    @property
    def cell_volume(self):
        return (self.length / self.n) ** 3

    @cached_property
    def k1d(self):
        """Integer mode numbers in FFT order, ``[0, .., n/2-1, -n/2, .., -1]``."""
        return np.fft.fftfreq(self.n, 1.0 / self.n).astype(np.int64)

    @cached_property
    def xi(self):
        """Broadcastable wavevector components ``(xi_1, xi_2, xi_3)``."""
        k = self.k1d * self.dk
        return (k[:, None, None], k[None, :, None], k[None, None, :])

    @cached_property
    def xi_vectors(self):
        """All lattice wavevectors as an ``(n^3, 3)`` array in C order."""
        x1, x2, x3 = np.broadcast_arrays(*self.xi)
        return np.stack([x1.ravel(), x2.ravel(), x3.ravel()], axis=1)

    @cached_property
    def xi_norm(self):
        x1, x2, x3 = self.xi
        return np.sqrt(x1**2 + x2**2 + x3**2)

    @cached_property
    def xi_h_norm(self):
        x1, x2, _ = self.xi
        return np.broadcast_to(np.sqrt(x1**2 + x2**2), self.shape)

    @cached_property
    def xi3_abs(self):
        return np.broadcast_to(np.abs(self.xi[2]), self.shape)

    @cached_property
    def nyquist_mask(self):
        """True on modes with any component equal to -n/2."""
        ny = self.k1d == -(self.n // 2)
        return ny[:, None, None] | ny[None, :, None] | ny[None, None, :]

    @cached_property
    def dealias_mask(self):
        """Two-thirds rule: keep modes with every ``|k_j| < n/3``."""
        keep = np.abs(self.k1d) < self.n / 3.0
        return keep[:, None, None] & keep[None, :, None] & keep[None, None, :]

    @cached_property
    def x(self):
        """Physical sample coordinates, each of shape ``(n, 1, 1)`` etc."""
        s = np.arange(self.n) * (self.length / self.n)
        return (s[:, None, None], s[None, :, None], s[None, None, :])

    @property
    def xi_max(self):
        return self.dk * (self.n // 2)

    def wavevector(self, k):
        """Map an integer triple to its wavevector."""
        return self.dk * np.asarray(k, dtype=float)

    def index_of(self, k):
        """FFT-array index of the integer mode triple ``k``."""
        k = np.asarray(k, dtype=np.int64)
        half = self.n // 2
        if np.any(k < -half) or np.any(k >= half):
            raise GridError(f"mode {tuple(k)} outside the lattice")
        return tuple(int(v) for v in k % self.n)


def make_grid(n_per_axis, box_length):
    return Grid(int(n_per_axis), float(box_length))


class StateField:
    """Spectral coefficients of an ``m``-component field on a :class:`Grid`.

    ``coeffs`` has shape ``(m, n, n, n)``; the physical state of the rotating
    Euler system uses ``m = 4`` with components ``(u1, u2, u3, b)``.
    Instances are treated as immutable values.
    """

    __slots__ = ("grid", "coeffs")

    def __init__(self, grid, coeffs):
        coeffs = np.asarray(coeffs, dtype=np.complex128)
        if coeffs.ndim == 3:
            coeffs = coeffs[None]
        if coeffs.shape[1:] != grid.shape:
            raise GridError(f"coefficient shape {coeffs.shape[1:]} does not match grid {grid.shape}")
        self.grid = grid
        self.coeffs = coeffs

    @classmethod
    def zeros(cls, grid, ncomp=4):
        return cls(grid, np.zeros((ncomp,) + grid.shape, dtype=np.complex128))

    @classmethod
    def plane_wave(cls, grid, k, amplitude=1.0, component=0, ncomp=1):
        c = np.zeros((ncomp,) + grid.shape, dtype=np.complex128)
        c[(component,) + grid.index_of(k)] = amplitude
        return cls(grid, c)

    @property
    def ncomp(self):
        return self.coeffs.shape[0]

    def component(self, i):
        return StateField(self.grid, self.coeffs[i : i + 1])

    def _check(self, other):
        if not isinstance(other, StateField):
            return NotImplemented
        if other.grid != self.grid:
            raise GridError("fields live on different grids")
        return other

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return StateField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return StateField(self.grid, self.coeffs - other.coeffs)

    def __neg__(self):
        return StateField(self.grid, -self.coeffs)

    def __mul__(self, scalar):
        if isinstance(scalar, StateField):
            return NotImplemented
        return StateField(self.grid, self.coeffs * scalar)

    __rmul__ = __mul__

    def multiply(self, symbol):
        """Apply a Fourier multiplier broadcastable to ``(n, n, n)``."""
        return StateField(self.grid, self.coeffs * symbol)

    def norm(self):
        return l2_norm(self)

    def to_physical(self, real=False):
        return to_physical(self, real=real)

    def __repr__(self):
        return f"StateField(ncomp={self.ncomp}, grid={self.grid})"


def to_spectral(grid, samples):
    """Physical samples (``(m, n, n, n)`` or ``(n, n, n)``) to a StateField."""
    samples = np.asarray(samples)
    if samples.ndim == 3:
        samples = samples[None]
    if samples.ndim != 4 or samples.shape[1:] != grid.shape:
        raise GridError(f"sample shape {samples.shape} does not match grid {grid.shape}")
    return StateField(grid, sfft.fftn(samples, axes=(1, 2, 3), norm="forward"))


def to_physical(field, real=False):
    out = sfft.ifftn(field.coeffs, axes=(1, 2, 3), norm="forward")
    return out.real.copy() if real else out


def inner_product(f, g):
    """``(f | g)_{L^2} = int conj(f) g dx``, summed over components."""
    if f.grid != g.grid:
        raise GridError("fields live on different grids")
    return complex(f.grid.volume * np.vdot(f.coeffs, g.coeffs))


def physical_inner_product(f, g):
    """Same inner product evaluated by rectangle quadrature in physical space."""
    if f.grid != g.grid:
        raise GridError("fields live on different grids")
    return complex(f.grid.cell_volume * np.vdot(to_physical(f), to_physical(g)))


def l2_norm(f):
    return float(np.sqrt(f.grid.volume * np.sum(np.abs(f.coeffs) ** 2)))


def derivative(field, axis):
    """Spectral ``d/dx_axis``; the unpaired Nyquist modes are zeroed."""
    g = field.grid
    sym = 1j * g.xi[axis] * (g.k1d != -(g.n // 2)).reshape(g.xi[axis].shape)
    return field.multiply(sym)


def gradient(field):
    """Gradient of a scalar field as a 3-component field."""
    if field.ncomp != 1:
        raise GridError("gradient expects a scalar field")
    parts = [derivative(field, j).coeffs[0] for j in range(3)]
    return StateField(field.grid, np.stack(parts))


def divergence(field):
    if field.ncomp != 3:
        raise GridError("divergence expects a 3-component field")
    total = sum(derivative(field.component(j), j).coeffs[0] for j in range(3))
    return StateField(field.grid, total)


def reflect(coeffs):
    """Map ``c(k)`` to ``c(-k)`` on the last three axes (FFT ordering)."""
    out = np.flip(coeffs, axis=(-3, -2, -1))
    return np.roll(out, 1, axis=(-3, -2, -1))


def hermitian_defect(field):
    """``max |c(-k) - conj(c(k))|``; zero for real physical fields."""
    c = field.coeffs
    return float(np.max(np.abs(reflect(c) - np.conj(c)))) if c.size else 0.0


# Zero-padded transforms for dealiased products of real fields.


def _pad_full(coeffs, m):
    """Embed ``(..., n, n, n)`` FFT-ordered coefficients into an ``m``-grid.

    Nyquist modes of the source are dropped so the padded field stays real.
    """
    n = coeffs.shape[-1]
    h = n // 2
    out = np.zeros(coeffs.shape[:-3] + (m, m, m), dtype=np.complex128)
    src = [slice(0, h), slice(n - h + 1, n)]
    dst = [slice(0, h), slice(m - h + 1, m)]
    for a in range(2):
        for b in range(2):
            for c in range(2):
                out[..., dst[a], dst[b], dst[c]] = coeffs[..., src[a], src[b], src[c]]
    return out


def _truncate_full(coeffs, n):
    """Inverse of :func:`_pad_full`; Nyquist modes of the result are zero."""
    m = coeffs.shape[-1]
    h = n // 2
    out = np.zeros(coeffs.shape[:-3] + (n, n, n), dtype=np.complex128)
    dst = [slice(0, h), slice(n - h + 1, n)]
    src = [slice(0, h), slice(m - h + 1, m)]
    for a in range(2):
        for b in range(2):
            for c in range(2):
                out[..., dst[a], dst[b], dst[c]] = coeffs[..., src[a], src[b], src[c]]
    return out


def padded_physical(coeffs, factor=2):
    """Real physical samples of each component on the ``factor * n`` grid.

    ``coeffs`` has shape ``(m, n, n, n)`` and must describe real fields.
    Two real fields are packed per complex transform.
    """
    coeffs = np.asarray(coeffs)
    n = coeffs.shape[-1]
    mm = factor * n
    count = coeffs.shape[0]
    out = np.empty((count, mm, mm, mm))
    for i in range(0, count, 2):
        pair = coeffs[i : i + 2]
        z = _pad_full(pair[0], mm)
        if pair.shape[0] == 2:
            z = z + 1j * _pad_full(pair[1], mm)
        phys = sfft.ifftn(z, norm="forward")
        out[i] = phys.real
        if pair.shape[0] == 2:
            out[i + 1] = phys.imag
    return out


def from_padded(samples, n):
    """Coefficients on the ``n``-grid of real samples given on a padded grid."""
    samples = np.asarray(samples)
    count = samples.shape[0]
    out = np.empty((count, n, n, n), dtype=np.complex128)
    for i in range(0, count, 2):
        if i + 1 < count:
            z = sfft.fftn(samples[i] + 1j * samples[i + 1], norm="forward")
            zr = np.conj(reflect(z))
            out[i] = _truncate_full(0.5 * (z + zr), n)
            out[i + 1] = _truncate_full(-0.5j * (z - zr), n)
        else:
            out[i] = _truncate_full(sfft.fftn(samples[i], norm="forward"), n)
    return out
