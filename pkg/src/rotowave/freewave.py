"""Cut-off free-wave flow, space-time norms and the dispersive kernel.

The kernel ``K(tau, x) = int exp(tau lambda(xi) + i x.xi) Psi_{r,R}(xi) dxi`` is a
whole-space object and is evaluated by quadrature in continuous ``xi``.  The
integrand is invariant under rotations of ``xi_h``, so after the angular
integration

    K(tau, x) = 2 pi int_0^inf int_R rho J0(|x_h| rho) exp(i tau omega(rho, xi3) + i x3 xi3)
                Psi(rho, xi3) dxi3 drho,

which is computed with a 2-D midpoint rule on the bounding box of
``C_{r/2, 2R}``.  Since the integrand is smooth and compactly supported the rule
converges spectrally once the phase is resolved.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import j0

from . import _kernels
from .cutoff import _psi_parts, project
from .fitting import DegenerateFit, SweepRecord, loglog_fit
from .grid import StateField, padded_physical, to_physical
from .lp import lebesgue_norm, magnitude
from .rotor import BRANCHES, _radicands, get_propagator


def solve_linear(U0, spec, eps, times):
    """Snapshots of ``dU/dt = (1/eps) B U`` started from ``P_{r,R} U0``."""
    return list(iter_linear(U0, spec, eps, times))


def iter_linear(U0, spec, eps, times):
    """Lazy :func:`solve_linear`: one snapshot alive at a time."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    times = [float(t) for t in times]
    if any(t < 0 for t in times) or any(b < a for a, b in zip(times, times[1:])):
        raise ValueError("times must be sorted and nonnegative")
    bar, _ = project(U0, spec)
    prop = get_propagator(U0.grid, spec.gamma_bar)
    return (StateField(U0.grid, prop.apply_coeffs(bar.coeffs, t / eps)) for t in times)


def spatial_norm(field, q, upsample=2):
    """``L^q`` norm of the pointwise magnitude; ``q = inf`` uses a refined grid."""
    g = field.grid
    if np.isinf(q) and upsample > 1:
        if np.any(field.coeffs[:, g.nyquist_mask] != 0):
            # the padded real transform drops Nyquist modes; fall back to the raw grid
            return lebesgue_norm(magnitude(to_physical(field)), q, g.cell_volume)
        samples = padded_physical(field.coeffs, upsample)
        return lebesgue_norm(magnitude(samples), q, g.cell_volume / upsample**3)
    return lebesgue_norm(magnitude(to_physical(field)), q, g.cell_volume)


def strichartz_norm(snapshots, dt, p, q, upsample=2):
    """Windowed ``L^p_t L^q_x`` norm from uniformly spaced snapshots (trapezoid in time)."""
    values = np.array([spatial_norm(s, q, upsample) for s in snapshots])
    if values.size == 0:
        raise ValueError("empty snapshot list")
    if np.isinf(p):
        return float(np.max(values))
    if len(values) == 1:
        return 0.0
    return float(np.trapezoid(values**p, dx=dt) ** (1.0 / p))


def admissible(p, q):
    """``q in [2, inf]`` and ``p >= 4q/(q-2)`` (``(inf, 2)`` included)."""
    if q < 2:
        return False
    if np.isinf(q):
        return p >= 4.0
    if q == 2:
        return np.isinf(p)
    return p >= 4.0 * q / (q - 2.0)


# ---------------------------------------------------------------------------
# kernel quadrature


@dataclass(frozen=True)
class KernelQuery:
    tau: float
    x: tuple
    branch: tuple
    r: float
    R: float
    gamma_bar: float
    resolution: int = 0
    """Radial midpoint cells; ``0`` picks one from the phase bandwidth."""

    def __post_init__(self):
        if self.tau < 0:
            raise ValueError("tau must be nonnegative")
        if not 0 < self.r < self.R:
            raise ValueError("need 0 < r < R")
        if tuple(self.branch) not in BRANCHES:
            raise ValueError(f"branch must be one of {BRANCHES}")


class QuadratureError(RuntimeError):
    pass


MIN_RESOLUTION = 32


def auto_resolution(tau, x, r, R, gamma_bar):
    """Cells on ``[0, 2R]`` resolving the phase (``|grad omega| <= gamma_bar``) and ``Psi``."""
    xh = float(np.hypot(x[0], x[1]))
    bandwidth = tau * gamma_bar + max(xh, abs(x[2]))
    h_phase = np.pi / (1.5 * bandwidth) if bandwidth > 0 else np.inf
    h_profile = r / 16.0
    h = min(h_phase, h_profile)
    return max(MIN_RESOLUTION, int(np.ceil(2.0 * R / h)))


_GEOMETRY = {}
_GEOMETRY_BUDGET = 256 * 2**20  # bytes; fine meshes at large tau run to hundreds of MB each


def _geometry(r, R, gamma_bar, branch, n):
    key = (r, R, gamma_bar, tuple(branch), n)
    hit = _GEOMETRY.get(key)
    if hit is not None:
        return hit
    h = 2.0 * R / n
    rho = (np.arange(n) + 0.5) * h
    z = -2.0 * R + (np.arange(2 * n) + 0.5) * h
    P, Z = np.meshgrid(rho, z, indexing="ij")
    psi = _psi_parts(np.hypot(P, Z), P, np.abs(Z), r, R)
    live = psi > 0
    P, Z, psi = P[live], Z[live], psi[live]
    a2, b2 = _radicands(np.stack([P, np.zeros_like(P), Z], axis=-1), gamma_bar)
    a, b = np.sqrt(a2), np.sqrt(b2)
    e1, e2 = branch
    if e2 > 0:
        omega = e1 * 0.5 * (a + b)
    else:
        omega = e1 * 2.0 * gamma_bar * Z / (a + b)
    geo = (np.ascontiguousarray(P), np.ascontiguousarray(Z), 2.0 * np.pi * P * psi * h * h, np.ascontiguousarray(omega))
    _GEOMETRY[key] = geo
    while _GEOMETRY and sum(a.nbytes for g in _GEOMETRY.values() for a in g) > _GEOMETRY_BUDGET:
        _GEOMETRY.pop(next(iter(_GEOMETRY)))
    return geo


def _kernel_at(tau, x, branch, r, R, gamma_bar, n):
    rho, z, weights, omega = _geometry(r, R, gamma_bar, branch, n)
    xh = float(np.hypot(x[0], x[1]))
    w = weights * j0(xh * rho) if xh > 0 else weights
    return _kernels.oscillatory_sum(np.ascontiguousarray(w), omega, z, tau, float(x[2]))


def kernel_K(query, check=True, rtol=0.05):
    """``K(tau, x)`` for one branch; compares against half resolution when ``check``."""
    n = query.resolution or auto_resolution(query.tau, query.x, query.r, query.R, query.gamma_bar)
    if n < MIN_RESOLUTION:
        raise QuadratureError(f"resolution {n} below minimum {MIN_RESOLUTION}")
    args = (query.tau, query.x, query.branch, query.r, query.R, query.gamma_bar)
    fine = _kernel_at(*args, n)
    if check:
        coarse = _kernel_at(*args, max(n // 2, MIN_RESOLUTION // 2))
        scale = max(abs(fine), 1e-9 * kernel_volume(query.r, query.R))
        if abs(fine - coarse) > rtol * scale:
            raise QuadratureError(
                f"resolution too low: |K_n - K_n/2| = {abs(fine - coarse):.3e} at tau={query.tau}"
            )
    return complex(fine)


def kernel_volume(r, R):
    """``int Psi_{r,R} dxi`` (equal to ``K(0, 0)``), by a fixed fine quadrature."""
    rho, z, weights, _ = _geometry(r, R, 1.0, (1, 1), 512)
    return float(np.sum(weights))


@dataclass
class KernelDecay:
    taus: np.ndarray
    abs_k: np.ndarray
    slope: float
    intercept: float
    sup_scaled: float
    """``sup_tau tau^{1/2} |K(tau, x)|``"""
    normalized: float
    """``sup_scaled / (R^3 r^-2)``"""
    meta: dict = field(default_factory=dict)

    def rows(self):
        return [(t, k, np.sqrt(t) * k) for t, k in zip(self.taus, self.abs_k)]


def kernel_decay_fit(r, R, gamma_bar, branch, tau_grid, x=(0.0, 0.0, 0.0), refine=1.0):
    """Fit ``log|K(tau, x)|`` against ``log tau``.

    ``refine`` scales the automatically chosen quadrature resolution (use 2 for
    the resolution-doubling check).
    """
    taus = np.asarray(tau_grid, dtype=float)
    if taus.size < 6 or taus.min() < 1:
        raise DegenerateFit("tau grid needs >= 6 points, all >= 1")
    ratios = taus[1:] / taus[:-1]
    if np.any(ratios <= 1) or not np.allclose(ratios, ratios[0], rtol=1e-6):
        raise DegenerateFit("tau grid must be increasing and log-spaced")
    vals = []
    for tau in taus:
        n = int(np.ceil(refine * auto_resolution(tau, x, r, R, gamma_bar)))
        q = KernelQuery(float(tau), tuple(x), tuple(branch), r, R, gamma_bar, n)
        vals.append(abs(kernel_K(q)))
    vals = np.array(vals)
    slope, intercept = loglog_fit(taus, vals)
    sup_scaled = float(np.max(np.sqrt(taus) * vals))
    if not np.isfinite(sup_scaled):
        raise DegenerateFit("tau^(1/2)|K| is not finite on the grid")
    return KernelDecay(
        taus, vals, slope, intercept, sup_scaled, sup_scaled / (R**3 * r**-2),
        meta={"r": r, "R": R, "gamma_bar": gamma_bar, "branch": tuple(branch), "x": tuple(x)},
    )


# ---------------------------------------------------------------------------
# Strichartz sweep


@dataclass
class StrichartzSweep:
    records: list
    slope: float
    intercept: float
    degenerate: bool
    p: float
    q: float
    window: float

    @property
    def norms(self):
        return np.array([rec.measured for rec in self.records])

    @property
    def normalized(self):
        return np.array([rec.meta["normalized"] for rec in self.records])

    def rows(self):
        return [(rec.value, rec.measured, rec.meta["normalized"]) for rec in self.records]


def strichartz_sweep(U0, spec, eps_list, T_win, p, q, n_times=None, dtau=0.1, upsample=2):
    """Windowed ``L^p_t L^q_x`` norm of the cut-off free wave for each ``eps``.

    Snapshots are spaced ``dtau * eps`` in time (at least ``n_times`` samples).
    """
    eps_list = [float(e) for e in eps_list]
    if len(eps_list) < 4:
        raise ValueError("need at least four eps values")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be decreasing")
    if not admissible(p, q):
        raise ValueError(f"(p, q) = ({p}, {q}) violates p >= 4q/(q-2)")
    u0_norm = U0.norm()
    scale = spec.R ** (1.5 - (0.0 if np.isinf(q) else 3.0 / q)) * spec.r ** (-(0.0 if np.isinf(p) else 4.0 / p))
    records = []
    for eps in eps_list:
        nt = max(int(np.ceil(T_win / (dtau * eps))) + 1, n_times or 2)
        times = np.linspace(0.0, T_win, nt)
        snaps = iter_linear(U0, spec, eps, times)
        norm = strichartz_norm(snaps, times[1] - times[0], p, q, upsample)
        denom = scale * eps ** (0.0 if np.isinf(p) else 1.0 / p) * u0_norm
        normalized = norm / denom if denom > 0 else 0.0
        records.append(SweepRecord("eps", eps, norm, {"normalized": normalized, "samples": nt}))
    norms = np.array([rec.measured for rec in records])
    if np.all(norms == 0):
        return StrichartzSweep(records, float("nan"), float("nan"), True, p, q, T_win)
    slope, intercept = loglog_fit(eps_list, norms)
    return StrichartzSweep(records, slope, intercept, False, p, q, T_win)


def box_crossing_time(grid, eps, gamma_bar):
    """Time for the fastest wave (group speed ``gamma_bar / eps``) to cross half the box."""
    return grid.length * eps / (2.0 * gamma_bar)
