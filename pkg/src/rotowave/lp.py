"""Littlewood-Paley calculus on the periodic lattice.

Dyadic profiles
---------------
``chi`` is a radial smooth step equal to 1 on ``|xi| <= 3/4`` and 0 for
``|xi| >= 4/3``; ``phi(xi) = chi(xi/2) - chi(xi)`` is supported in the annulus
``3/4 <= |xi| <= 8/3``.  The partition ``chi + sum_{j>=0} phi(2^-j .)`` then
telescopes to ``chi(2^-(J+1) .)`` and is exactly 1 on the lattice below the
last block.  Blocks are ``Delta_{-1} = chi(D)``, ``Delta_q = phi(2^-q D)`` for
``q >= 0`` and zero for ``q <= -2``.

Inequality meters return measured ratios; the constants in the classical
estimates are never quantified, so only finiteness and stability are checked.
Products are formed on a 2x refined grid where quadratic terms of band-limited
fields are represented exactly.
"""

from dataclasses import dataclass
from itertools import product as iproduct

import numpy as np

from .grid import Grid, StateField, _pad_full, derivative, l2_norm, to_physical, to_spectral


# ---------------------------------------------------------------------------
# smooth steps


def _expneg(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def smooth_step(t):
    """C-infinity step: 0 for ``t <= 0``, 1 for ``t >= 1``, monotone between."""
    a = _expneg(t)
    b = _expneg(1.0 - np.asarray(t, dtype=float))
    return a / (a + b)


def chi_radial(rho):
    rho = np.asarray(rho, dtype=float)
    return smooth_step((4.0 / 3.0 - rho) / (4.0 / 3.0 - 3.0 / 4.0))


def phi_radial(rho):
    rho = np.asarray(rho, dtype=float)
    return chi_radial(rho / 2.0) - chi_radial(rho)


@dataclass(frozen=True)
class DyadicProfiles:
    chi: callable
    phi: callable
    chi_support: float = 4.0 / 3.0
    phi_support: tuple = (3.0 / 4.0, 8.0 / 3.0)

    def partition_sum(self, rho, jmax):
        rho = np.asarray(rho, dtype=float)
        total = self.chi(rho)
        for j in range(jmax + 1):
            total = total + self.phi(rho / 2.0**j)
        return total

    def square_sum(self, rho, jmax):
        rho = np.asarray(rho, dtype=float)
        total = self.chi(rho) ** 2
        for j in range(jmax + 1):
            total = total + self.phi(rho / 2.0**j) ** 2
        return total


def build_profiles():
    return DyadicProfiles(chi=chi_radial, phi=phi_radial)


PROFILES = build_profiles()


def q_max(grid):
    """Largest block index with support on the lattice."""
    top = np.sqrt(3.0) * grid.xi_max
    return int(np.ceil(np.log2(top / 0.75)))


def block_symbol(grid, q):
    if q <= -2:
        return np.zeros(grid.shape)
    if q == -1:
        return chi_radial(grid.xi_norm)
    return phi_radial(grid.xi_norm / 2.0**q)


def low_symbol(grid, q):
    """Symbol of ``S_q = sum_{q' <= q-1} Delta_q'``, i.e. ``chi(2^-q xi)`` for ``q >= 0``."""
    if q <= -1:
        return np.zeros(grid.shape)
    return chi_radial(grid.xi_norm / 2.0**q)


def block(u, q):
    """Dyadic block ``Delta_q u``."""
    return u.multiply(block_symbol(u.grid, q))


def partial_sum(u, q):
    """``S_q u``."""
    return u.multiply(low_symbol(u.grid, q))


def decompose(u):
    """All nonzero blocks ``{q: Delta_q u}`` for ``q = -1 .. q_max``."""
    return {q: block(u, q) for q in range(-1, q_max(u.grid) + 1)}


def block_norms(u):
    qs = np.arange(-1, q_max(u.grid) + 1)
    return qs, np.array([l2_norm(block(u, int(q))) for q in qs])


# ---------------------------------------------------------------------------
# Sobolev-type norms


def sobolev_norm_direct(u, s):
    g = u.grid
    weight = (1.0 + g.xi_norm**2) ** s
    return float(np.sqrt(g.volume * np.sum(weight * np.abs(u.coeffs) ** 2)))


def sobolev_norm_dyadic(u, s):
    qs, norms = block_norms(u)
    return float(np.sqrt(np.sum(2.0 ** (2 * qs * s) * norms**2)))


@dataclass(frozen=True)
class SobolevNorms:
    direct: float
    dyadic: float

    @property
    def ratio(self):
        return self.dyadic / self.direct if self.direct else float("nan")


def sobolev_norm(u, s, method="direct"):
    """``H^s`` norm; ``method`` is ``"direct"``, ``"dyadic"`` or ``"both"``."""
    if method == "direct":
        return sobolev_norm_direct(u, s)
    if method == "dyadic":
        return sobolev_norm_dyadic(u, s)
    if method == "both":
        return SobolevNorms(sobolev_norm_direct(u, s), sobolev_norm_dyadic(u, s))
    raise ValueError(f"unknown method {method!r}")


def _time_lp(values, p, dt):
    values = np.asarray(values, dtype=float)
    if np.isinf(p):
        return float(np.max(values))
    if values.shape[0] == 1:
        return 0.0
    return float(np.trapezoid(values**p, dx=dt) ** (1.0 / p))


def chemin_lerner_norm(history, p, s, dt):
    """``(sum_q 2^{2qs} ||Delta_q u||_{L^p_t L^2}^2)^{1/2}`` on a uniformly sampled history."""
    history = list(history)
    if not history:
        raise ValueError("empty history")
    if p < 2:
        raise ValueError("p must be >= 2")
    per_time = np.array([block_norms(u)[1] for u in history])
    qs = np.arange(-1, q_max(history[0].grid) + 1)
    inner = np.array([_time_lp(per_time[:, i], p, dt) for i in range(len(qs))])
    return float(np.sqrt(np.sum(2.0 ** (2 * qs * s) * inner**2)))


def chemin_lerner_running(history, s, dt=None):
    """Running ``L~^inf([0, t_k], H^s)`` norms for every prefix of the history."""
    history = list(history)
    if not history:
        raise ValueError("empty history")
    per_time = np.array([block_norms(u)[1] for u in history])
    qs = np.arange(-1, q_max(history[0].grid) + 1)
    running = np.maximum.accumulate(per_time, axis=0)
    return np.sqrt(np.sum(2.0 ** (2 * qs * s) * running**2, axis=1))


def lebesgue_time_sobolev(history, p, s, dt):
    """Plain ``L^p([0,t], H^s)`` with the dyadic ``H^s`` norm inside."""
    vals = [sobolev_norm_dyadic(u, s) for u in history]
    return _time_lp(vals, p, dt)


# ---------------------------------------------------------------------------
# Lebesgue norms on physical samples


def magnitude(samples):
    """Pointwise Euclidean magnitude over the component axis."""
    samples = np.asarray(samples)
    return np.sqrt(np.sum(np.abs(samples) ** 2, axis=0))


def lebesgue_norm(values, p, cell_volume):
    values = np.abs(np.asarray(values))
    if np.isinf(p):
        return float(np.max(values))
    return float((cell_volume * np.sum(values**p)) ** (1.0 / p))


def refine(u, factor=2):
    """Same band-limited field on a ``factor``-times finer grid (Nyquist dropped)."""
    g = u.grid
    fine = Grid(g.n * factor, g.length)
    return StateField(fine, _pad_full(u.coeffs, fine.n))


def lp_norm(u, p, upsample=2):
    """``L^p`` norm of the pointwise magnitude, sampled on a refined grid."""
    f = refine(u, upsample) if upsample > 1 else u
    return lebesgue_norm(magnitude(to_physical(f)), p, f.grid.cell_volume)


def mixed_lebesgue_norm(u, p_h, p_v, order="hv", upsample=1):
    """Anisotropic norm of the magnitude of ``u``.

    ``order="hv"`` is ``L^{p_h}_h L^{p_v}_v`` (vertical integral inside),
    ``order="vh"`` is ``L^{p_v}_v L^{p_h}_h`` (horizontal integral inside).
    """
    f = refine(u, upsample) if upsample > 1 else u
    g = f.grid
    dx = g.length / g.n
    mag = magnitude(to_physical(f))

    def lp_axis(arr, p, axes, measure):
        if np.isinf(p):
            return np.max(arr, axis=axes)
        return (measure * np.sum(arr**p, axis=axes)) ** (1.0 / p)

    if order == "hv":
        inner = lp_axis(mag, p_v, (2,), dx)
        return float(lp_axis(inner, p_h, (0, 1), dx * dx))
    if order == "vh":
        inner = lp_axis(mag, p_h, (0, 1), dx * dx)
        return float(lp_axis(inner, p_v, (0,), dx))
    raise ValueError(f"unknown order {order!r}")


def anisotropic_norm(u, mode, p):
    """``mode="h2_vp"`` is ``L^2_h L^p_v``; ``mode="hp_v2"`` is ``L^p_h L^2_v``."""
    if mode == "h2_vp":
        return mixed_lebesgue_norm(u, 2.0, p, "hv")
    if mode == "hp_v2":
        return mixed_lebesgue_norm(u, p, 2.0, "hv")
    raise ValueError(f"unknown mode {mode!r}")


def y_norm(u, s, s0, p):
    """Data-space norm ``max(||u||_{H^{s+s0}}, ||u||_{L^2_h L^p_v}, ||u||_{L^p_h L^2_v})``."""
    if not 1.0 < p < 2.0:
        raise ValueError("p must satisfy 1 < p < 2")
    return max(
        sobolev_norm_direct(u, s + s0),
        anisotropic_norm(u, "h2_vp", p),
        anisotropic_norm(u, "hp_v2", p),
    )


def c_of_value(y):
    return max(y, y * y)


def c_of_u0(u, s, s0, p):
    return c_of_value(y_norm(u, s, s0, p))


# ---------------------------------------------------------------------------
# products and the Bony decomposition


def _product(a, b):
    """Pointwise product of two fields living on the same (already refined) grid."""
    return to_spectral(a.grid, to_physical(a) * to_physical(b))


def _has_nyquist(u):
    return bool(np.any(u.coeffs[:, u.grid.nyquist_mask] != 0))


@dataclass
class BonySplit:
    near: StateField
    far: StateField
    grid: Grid


def bony_split(u, v, q):
    """Split ``Delta_q(uv)`` into ``sum_{|q-q'|<=4} Delta_q(S_{q'-1} v Delta_{q'} u)``
    and ``sum_{q'>q-4} Delta_q(S_{q'+2} u Delta_{q'} v)``.

    Both scalars are moved to a 2x grid first, so every product is exact and
    the returned fields live on that refined grid.
    """
    if u.ncomp != 1 or v.ncomp != 1:
        raise ValueError("bony_split expects scalar fields")
    if _has_nyquist(u) or _has_nyquist(v):
        raise ValueError("insufficient padding headroom: inputs carry Nyquist modes")
    uf, vf = refine(u), refine(v)
    top = q_max(u.grid)
    near = StateField.zeros(uf.grid, 1)
    far = StateField.zeros(uf.grid, 1)
    for qp in range(max(-1, q - 4), min(top, q + 4) + 1):
        near = near + block(_product(partial_sum(vf, qp - 1), block(uf, qp)), q)
    for qp in range(max(-1, q - 3), top + 1):
        far = far + block(_product(partial_sum(uf, qp + 2), block(vf, qp)), q)
    return BonySplit(near, far, uf.grid)


def block_of_product(u, v, q):
    """Reference ``Delta_q(uv)`` on the refined grid."""
    return block(_product(refine(u), refine(v)), q)


# ---------------------------------------------------------------------------
# inequality meters


def _inv(p):
    return 0.0 if np.isinf(p) else 1.0 / p


def commutator_meter(q, f, g, p, qq, r):
    """``||[Delta_q, f] g||_{L^r} 2^q / (||grad f||_{L^p} ||g||_{L^qq})``."""
    if abs(_inv(p) + _inv(qq) - _inv(r)) > 1e-12:
        raise ValueError("exponents must satisfy 1/p + 1/qq = 1/r")
    ff, gf = refine(f), refine(g)
    comm = block(_product(ff, gf), q) - _product(ff, block(gf, q))
    dv = ff.grid.cell_volume
    num = lebesgue_norm(magnitude(to_physical(comm)), r, dv)
    grad = np.stack([to_physical(derivative(ff, j))[0] for j in range(3)])
    den = lebesgue_norm(magnitude(grad), p, dv) * lebesgue_norm(magnitude(to_physical(gf)), qq, dv)
    if den == 0.0:
        # constant f (or zero g): the commutator vanishes identically
        return 0.0
    return num * 2.0**q / den


def product_rule_meter(u, v, s):
    """``||uv||_{H^s} / (||u||_inf ||v||_{H^s} + ||v||_inf ||u||_{H^s})``."""
    if not s > 0:
        raise ValueError("s must be positive")
    uf, vf = refine(u), refine(v)
    uv = _product(uf, vf)
    dv = uf.grid.cell_volume
    u_inf = lebesgue_norm(magnitude(to_physical(uf)), np.inf, dv)
    v_inf = lebesgue_norm(magnitude(to_physical(vf)), np.inf, dv)
    den = u_inf * sobolev_norm_direct(vf, s) + v_inf * sobolev_norm_direct(uf, s)
    return sobolev_norm_direct(uv, s) / den


@dataclass
class BilinearReport:
    qs: np.ndarray
    lhs: np.ndarray
    ratios: np.ndarray

    @property
    def total(self):
        return float(np.sum(self.ratios))


def bilinear_meter(w_hist, u_hist, v_hist, s, dt, axis=None):
    """Implied ``C b_q`` sequence of the paraproduct estimate

    ``int_0^t |<Delta_q(w d_i u)|Delta_q v> + <Delta_q(w d_i v)|Delta_q u>| dtau
       <= C b_q 2^{-2qs} ||w||_{L~inf H^s} ||u||_{L~2 H^s} ||v||_{L~2 H^s}``.

    ``axis=None`` takes the worst direction ``i`` per ``q``.
    """
    if not s > 2.5:
        raise ValueError("s must exceed 5/2")
    w_hist, u_hist, v_hist = list(w_hist), list(u_hist), list(v_hist)
    if not (len(w_hist) == len(u_hist) == len(v_hist)) or not w_hist:
        raise ValueError("histories must be nonempty and of equal length")
    grid = u_hist[0].grid
    qs = np.arange(-1, q_max(grid) + 1)
    axes = range(3) if axis is None else [axis]
    lhs = np.zeros(len(qs))
    for i in axes:
        samples = np.zeros((len(u_hist), len(qs)))
        for k, (w, u, v) in enumerate(zip(w_hist, u_hist, v_hist)):
            wf, uf, vf = refine(w), refine(u), refine(v)
            wdu = _product(wf, derivative(uf, i))
            wdv = _product(wf, derivative(vf, i))
            for j, q in enumerate(qs):
                term = np.vdot(block(wdu, q).coeffs, block(vf, q).coeffs)
                term += np.vdot(block(wdv, q).coeffs, block(uf, q).coeffs)
                samples[k, j] = abs(wf.grid.volume * term)
        per_axis = samples[0] * 0.0 if len(u_hist) == 1 else np.trapezoid(samples, dx=dt, axis=0)
        lhs = np.maximum(lhs, per_axis)
    scale = (
        chemin_lerner_norm(w_hist, np.inf, s, dt)
        * chemin_lerner_norm(u_hist, 2.0, s, dt)
        * chemin_lerner_norm(v_hist, 2.0, s, dt)
    )
    ratios = np.zeros_like(lhs) if scale == 0 else lhs / (2.0 ** (-2.0 * qs * s) * scale)
    return BilinearReport(qs, lhs, ratios)


def _support_radius(u, tol=1e-13):
    live = np.max(np.abs(u.coeffs), axis=0) > tol * max(np.max(np.abs(u.coeffs)), 1e-300)
    xi = u.grid.xi_norm[live]
    return (float(xi.min()), float(xi.max())) if xi.size else (0.0, 0.0)


@dataclass
class BernsteinReport:
    ball_ratio: float
    annulus_lower: float
    annulus_upper: float


def _sup_derivative_norm(u, k, p, upsample):
    best = 0.0
    for alpha in iproduct(range(k + 1), repeat=3):
        if sum(alpha) != k:
            continue
        d = u
        for axis, times in enumerate(alpha):
            for _ in range(times):
                d = derivative(d, axis)
        best = max(best, lp_norm(d, p, upsample))
    return best


def bernstein_meter(u, k, a, b, lam, support="ball", radii=(1.0,), upsample=2):
    """Derivative-vs-homothety ratios.

    ``support="ball"`` requires spectrum in ``B(0, lam*radii[0])`` and reports
    ``sup ||d^alpha u||_b / (lam^{k + 3(1/a - 1/b)} ||u||_a)``;
    ``support="annulus"`` requires ``A(lam*r1, lam*r2)`` and reports
    ``sup ||d^alpha u||_a / (lam^k ||u||_a)`` (to be compared with ``C^{-k}, C^k``).
    """
    lo, hi = _support_radius(u)
    if support == "ball":
        if hi > lam * radii[0] * (1 + 1e-12):
            raise ValueError("support violation: spectrum leaves the ball")
        num = _sup_derivative_norm(u, k, b, upsample)
        ratio = num / (lam ** (k + 3 * (_inv(a) - _inv(b))) * lp_norm(u, a, upsample))
        return BernsteinReport(ratio, float("nan"), float("nan"))
    if support == "annulus":
        r1, r2 = radii
        if lo < lam * r1 * (1 - 1e-12) or hi > lam * r2 * (1 + 1e-12):
            raise ValueError("support violation: spectrum leaves the annulus")
        num = _sup_derivative_norm(u, k, a, upsample)
        ratio = num / (lam**k * lp_norm(u, a, upsample))
        return BernsteinReport(float("nan"), ratio, ratio)
    raise ValueError(f"unknown support {support!r}")
