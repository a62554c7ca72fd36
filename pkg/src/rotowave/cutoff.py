"""Frequency cut-off of the initial data.

``Psi_{r,R}`` equals 1 on ``C_{r,R} = {|xi| <= R, |xi_h| >= r, |xi_3| >= r}`` and
vanishes outside ``C_{r/2, 2R}``.  The data split is ``U0 = Ubar0 + Utilde0``
with ``Ubar0 = Psi_{r,R}(D) U0``.
"""

from dataclasses import dataclass, field

import numpy as np

from . import lp
from .fitting import SweepRecord, loglog_fit
from .grid import StateField
from .lp import smooth_step


def psi_profile(t):
    """Smooth radial cut-off: 1 on ``[0, 1]``, 0 on ``[2, inf)``, decreasing between."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("psi_profile expects t >= 0")
    out = smooth_step(2.0 - t)
    return float(out) if out.ndim == 0 else out


def psi_rR(xi, r, R):
    """``Psi_{r,R}`` at wavevectors ``xi`` (shape ``(..., 3)``)."""
    if not 0 < r < R:
        raise ValueError("need 0 < r < R")
    xi = np.asarray(xi, dtype=float)
    full = np.sqrt(np.sum(xi**2, axis=-1))
    horiz = np.sqrt(xi[..., 0] ** 2 + xi[..., 1] ** 2)
    vert = np.abs(xi[..., 2])
    out = _psi_parts(full, horiz, vert, r, R)
    return float(out) if out.ndim == 0 else out


def _psi_parts(full, horiz, vert, r, R):
    # the low-frequency factors use 2|.|/r so that Psi = 1 on C_{r,R} and
    # supp Psi lies in C_{r/2, 2R}
    return (
        smooth_step(2.0 - full / R)
        * (1.0 - smooth_step(2.0 - 2.0 * horiz / r))
        * (1.0 - smooth_step(2.0 - 2.0 * vert / r))
    )


def psi_on_grid(grid, r, R):
    if not 0 < r < R:
        raise ValueError("need 0 < r < R")
    return _psi_parts(grid.xi_norm, grid.xi_h_norm, grid.xi3_abs, r, R)


def in_region(grid, r, R):
    """Indicator of ``C_{r,R}`` on the lattice."""
    return (grid.xi_norm <= R) & (grid.xi_h_norm >= r) & (grid.xi3_abs >= r)


def conjugate_exponent(p):
    """``p' = p / (2 - p)`` for ``1 < p < 2``."""
    return p / (2.0 - p)


@dataclass(frozen=True)
class CutoffSpec:
    """Cut-off radii with their provenance.

    In ``schedule`` mode ``R = eps^-beta`` and ``r = R^-delta``; ``manual`` mode
    fixes ``r`` and ``R`` directly.
    """

    r: float
    R: float
    gamma_bar: float = 0.5
    eps: float = float("nan")
    beta: float = float("nan")
    delta: float = float("nan")
    s0: float = float("nan")
    mode: str = "manual"
    notes: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not 0 < self.r < self.R:
            raise ValueError("need 0 < r < R")
        if not self.gamma_bar > 0:
            raise ValueError("gamma_bar must be positive")
        if self.mode not in ("manual", "schedule"):
            raise ValueError(f"unknown mode {self.mode!r}")

    @classmethod
    def manual(cls, r, R, gamma_bar=0.5):
        return cls(r=float(r), R=float(R), gamma_bar=float(gamma_bar))

    @property
    def feasible_energy(self):
        """``beta (5 + 2 delta) < 1/2``."""
        return bool(self.beta * (5.0 + 2.0 * self.delta) < 0.5)

    @property
    def feasible_lifespan(self):
        """``beta (10 + 4 delta + 4 s0) < 1``."""
        return bool(self.beta * (10.0 + 4.0 * self.delta + 4.0 * self.s0) < 1.0)

    @property
    def beta_bound(self):
        """Largest ``beta`` meeting both feasibility conditions (exclusive)."""
        return min(0.5 / (5.0 + 2.0 * self.delta), 1.0 / (10.0 + 4.0 * self.delta + 4.0 * self.s0))

    @property
    def alpha(self):
        """Lifespan exponent ``min(1/4 - beta(5+2 delta)/2, beta s0 / 2)``."""
        return min(0.25 - self.beta * (5.0 + 2.0 * self.delta) / 2.0, self.beta * self.s0 / 2.0)

    def as_dict(self):
        return {
            "mode": self.mode,
            "r": self.r,
            "R": self.R,
            "gamma_bar": self.gamma_bar,
            "eps": self.eps,
            "beta": self.beta,
            "delta": self.delta,
            "s0": self.s0,
        }


def schedule_delta(s, s0, p):
    """``delta = 2 p' (s + s0)``."""
    return 2.0 * conjugate_exponent(p) * (s + s0)


def schedule(eps, beta, s, s0, p, gamma_bar=0.5, delta=None):
    """Radii ``R = eps^-beta``, ``r = R^-delta`` with ``delta`` from ``(s, s0, p)``."""
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if not beta > 0:
        raise ValueError("beta must be positive")
    if not 1 < p < 2:
        raise ValueError("p must satisfy 1 < p < 2")
    if delta is None:
        delta = schedule_delta(s, s0, p)
    R = eps ** (-beta)
    r = R ** (-delta)
    return CutoffSpec(
        r=r, R=R, gamma_bar=gamma_bar, eps=eps, beta=beta, delta=delta, s0=s0, mode="schedule"
    )


def project(U, spec):
    """``(Ubar, Utilde)`` with ``Ubar = Psi_{r,R}(D) U`` and ``Utilde = U - Ubar``."""
    bar = U.multiply(psi_on_grid(U.grid, spec.r, spec.R))
    return bar, StateField(U.grid, U.coeffs - bar.coeffs)


@dataclass
class TailSweep:
    records: list
    slope: float
    intercept: float
    delta: float
    saturated: bool
    c_of_u0: float

    def rows(self):
        return [
            (rec.value, rec.meta["r"], rec.measured, self.c_of_u0, rec.meta["ratio"])
            for rec in self.records
        ]


def tail_norm_sweep(U0, s, s0, p, R_list, delta=None, floor=1e-13):
    """``||Utilde0||_{H^s}`` for each ``R`` with ``r = R^-delta``, and the log-log slope."""
    R_list = [float(R) for R in R_list]
    if len(R_list) < 3:
        raise ValueError("degenerate fit: need at least three radii")
    if any(b <= a for a, b in zip(R_list, R_list[1:])):
        raise ValueError("R_list must be increasing")
    if delta is None:
        delta = schedule_delta(s, s0, p)
    c0 = lp.c_of_u0(U0, s, s0, p)
    base = lp.sobolev_norm_direct(U0, s)
    records = []
    for R in R_list:
        r = R ** (-delta)
        _, tilde = project(U0, CutoffSpec.manual(r, R))
        tail = lp.sobolev_norm_direct(tilde, s)
        ratio = tail / (c0 * R ** (-s0)) if c0 > 0 else 0.0
        records.append(SweepRecord("R", R, tail, {"r": r, "ratio": ratio}))
    tails = np.array([rec.measured for rec in records])
    saturated = bool(np.all(tails <= floor * max(base, 1e-300)))
    if saturated:
        slope, intercept = float("nan"), float("nan")
    else:
        slope, intercept = loglog_fit(R_list, tails)
    return TailSweep(records, slope, intercept, delta, saturated, c0)
