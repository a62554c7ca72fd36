"""Nonlinear evolution of the rotating compressible system.

The state ``U = (u1, u2, u3, b)`` obeys

    dU/dt = (1/eps) B U - A(U, D) U,
    A(W, D) V = (w . grad v + gbar b_W grad v_b,  w . grad v_b + gbar b_W div v),

with ``W = (w, b_W)`` and ``V = (v, v_b)``.  Products are formed on a 2x
zero-padded grid and the tendency is truncated to the 2/3 band, so inside that
band the discrete nonlinearity is the exact projection of the continuous one.
The linear part is integrated exactly (integrating-factor RK4).
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import lp
from .cutoff import project, schedule
from .fitting import DegenerateFit, is_geometric, loglog_fit
from .grid import StateField, from_padded, l2_norm, padded_physical, reflect
from .rotor import get_propagator, symbol

PAD = 2


class BlowupError(RuntimeError):
    """Non-finite state; ``t_valid`` is the last time with a finite state."""

    def __init__(self, message, t_valid):
        super().__init__(message)
        self.t_valid = t_valid


class IterationBoundError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# padded products


def _grad_coeffs(grid, coeffs):
    """``d_j V_i`` for every component, shape ``(m, 3, n, n, n)``; Nyquist dropped later."""
    xi = grid.xi
    return np.stack([np.stack([1j * xi[j] * c for j in range(3)]) for c in coeffs])


def _padded_fields(grid, W, V):
    """Padded samples of ``W`` (4) and of ``grad V`` (4 x 3)."""
    grads = _grad_coeffs(grid, V).reshape(12, *grid.shape)
    phys = padded_physical(np.concatenate([W, grads]), PAD)
    return phys[:4], phys[4:].reshape(4, 3, *phys.shape[1:])


def _apply_physical(w, grad, gamma_bar):
    out = np.empty((4,) + w.shape[1:])
    bw = w[3]
    for i in range(3):
        out[i] = w[0] * grad[i, 0] + w[1] * grad[i, 1] + w[2] * grad[i, 2] + gamma_bar * bw * grad[3, i]
    div = grad[0, 0] + grad[1, 1] + grad[2, 2]
    out[3] = w[0] * grad[3, 0] + w[1] * grad[3, 1] + w[2] * grad[3, 2] + gamma_bar * bw * div
    return out


def apply_A(W, V, gamma_bar):
    """Coefficients of ``A(W, D) V`` truncated to the 2/3 band.

    ``W`` and ``V`` are four-component real fields (StateField or raw coefficients).
    """
    grid = W.grid if isinstance(W, StateField) else V.grid
    Wc = W.coeffs if isinstance(W, StateField) else W
    Vc = V.coeffs if isinstance(V, StateField) else V
    w, grad = _padded_fields(grid, Wc, Vc)
    out = from_padded(_apply_physical(w, grad, gamma_bar), grid.n)
    out *= grid.dealias_mask
    return out


def nonlin_tendency(U, gamma_bar):
    """``-A(U, D) U`` as a StateField."""
    if U.ncomp != 4:
        raise ValueError("expected a four-component state")
    if not gamma_bar > 0:
        raise ValueError("gamma_bar must be positive")
    return StateField(U.grid, -apply_A(U, U, gamma_bar))


# ---------------------------------------------------------------------------
# identities


@dataclass(frozen=True)
class IdentityResidual:
    absolute: float
    scale: float

    @property
    def relative(self):
        return self.absolute / self.scale if self.scale > 0 else self.absolute


def _pad(coeffs):
    return padded_physical(coeffs, PAD)


def transport_identity(u, V):
    """``<u . grad V | V> + (1/2) <div u, |V|^2>`` for real ``u`` (3) and ``V`` (m).

    Every integrand is a trigonometric polynomial of degree below ``2n`` when
    the fields sit in the 2/3 band, so the padded rectangle rule is exact.
    """
    if u.ncomp != 3:
        raise ValueError("u must have three components")
    g = u.grid
    m = V.ncomp
    up = _pad(u.coeffs)
    vp = _pad(V.coeffs)
    grads = _pad(_grad_coeffs(g, V.coeffs).reshape(3 * m, *g.shape)).reshape(m, 3, *up.shape[1:])
    div = _pad((_grad_coeffs(g, u.coeffs)[[0, 1, 2], [0, 1, 2]]).sum(axis=0)[None])[0]
    cell = g.cell_volume / PAD**3
    adv = np.einsum("jxyz,ijxyz->ixyz", up, grads)
    a = np.sum(adv * vp)
    b = 0.5 * np.sum(div * np.sum(vp**2, axis=0))
    scale = np.sum(np.abs(adv * vp)) + 0.5 * np.sum(np.abs(div) * np.sum(vp**2, axis=0))
    return IdentityResidual(abs(a + b) * cell, scale * cell)


def coupling_identity(U):
    """``<b grad b | u> + <b div u | b> - (1/2) <b^2, div u>``."""
    g = U.grid
    u, b = U.coeffs[:3], U.coeffs[3:]
    up = _pad(u)
    bp = _pad(b)[0]
    gb = _pad(_grad_coeffs(g, b)[0])
    div = _pad((_grad_coeffs(g, u)[[0, 1, 2], [0, 1, 2]]).sum(axis=0)[None])[0]
    cell = g.cell_volume / PAD**3
    t1 = bp * np.sum(gb * up, axis=0)
    t2 = bp**2 * div
    total = np.sum(t1) + np.sum(t2) - 0.5 * np.sum(t2)
    scale = np.sum(np.abs(t1)) + 1.5 * np.sum(np.abs(t2))
    return IdentityResidual(abs(total) * cell, scale * cell)


def coupling_identity_check(U):
    """Absolute coupling residual (see :func:`coupling_identity`)."""
    return coupling_identity(U).absolute


_SYMBOLS = {}


def _symbol_on(grid, gamma_bar):
    key = (grid, float(gamma_bar))
    if key not in _SYMBOLS:
        if len(_SYMBOLS) > 4:
            _SYMBOLS.pop(next(iter(_SYMBOLS)))
        _SYMBOLS[key] = symbol(grid.xi_vectors, gamma_bar)
    return _SYMBOLS[key]


def skew_residual(U, gamma_bar):
    """``|<B U | U>| / (||B U|| ||U||)``; zero by skew symmetry."""
    prop = get_propagator(U.grid, gamma_bar)
    BU = prop.apply_matrices(_symbol_on(U.grid, gamma_bar), U.coeffs)
    scale = np.sqrt(np.sum(np.abs(BU) ** 2) * np.sum(np.abs(U.coeffs) ** 2))
    if scale == 0:
        return 0.0
    return float(abs(np.vdot(U.coeffs, BU)) / scale)


def energy_rate(U, gamma_bar, tendency=None):
    """``d/dt (1/2)||U||^2 = <N(U) | U>`` (the rotation term contributes nothing)."""
    if tendency is None:
        tendency = nonlin_tendency(U, gamma_bar).coeffs
    return float(U.grid.volume * np.real(np.vdot(U.coeffs, tendency)))


def fd_derivative(values, h):
    """Fourth-order finite-difference derivative of uniformly sampled values.

    Five-point central stencil inside, five-point one-sided stencils at the
    two ends.  Needs at least five samples.
    """
    f = np.asarray(values, dtype=float)
    n = f.size
    if n < 5:
        raise ValueError("need at least five samples")
    d = np.empty(n)
    d[2:-2] = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * h)
    fwd = np.array([-25, 48, -36, 16, -3]) / (12 * h)
    d[0] = fwd @ f[:5]
    d[1] = np.array([-3, -10, 18, -6, 1]) / (12 * h) @ f[:5]
    d[-1] = -fwd @ f[-1:-6:-1]
    d[-2] = -np.array([-3, -10, 18, -6, 1]) / (12 * h) @ f[-1:-6:-1]
    return d


# ---------------------------------------------------------------------------
# time stepping


@dataclass(frozen=True)
class SolverConfig:
    dt: float
    t_max: float
    integrator: str = "if_rk4"
    blowup_threshold: float = None
    """``H^s`` cap; ``None`` means 1e3 x the initial ``H^s`` norm."""
    sobolev_s: float = 2.6
    record_stride: int = 1
    eta: float = 1.0
    nonlinear: bool = True
    dealias: bool = True

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_max >= 0:
            raise ValueError("t_max must be nonnegative")
        if self.integrator != "if_rk4":
            raise ValueError(f"unknown integrator {self.integrator!r}")
        if not self.sobolev_s > 2.5:
            raise ValueError("sobolev_s must exceed 5/2")
        if int(self.record_stride) != self.record_stride or self.record_stride < 1:
            raise ValueError("record_stride must be a positive integer")
        if not self.eta > 0:
            raise ValueError("eta must be positive")
        if not self.dealias:
            raise ValueError("dealiasing cannot be switched off")
        if self.blowup_threshold is not None and not self.blowup_threshold > 0:
            raise ValueError("blowup_threshold must be positive")

    def check_grid(self, grid, gamma_bar):
        if self.dt * gamma_bar * grid.xi_max > 10:
            raise ValueError(
                f"dt * gamma_bar * xi_max = {self.dt * gamma_bar * grid.xi_max:.3g} exceeds 10"
            )

    @property
    def n_steps(self):
        return int(round(self.t_max / self.dt))


def max_modulus(U):
    phys = U.to_physical(real=True)
    return float(np.max(np.sqrt(np.sum(phys**2, axis=0))))


def default_dt(U0, gamma_bar):
    """``0.5 / (gamma_bar * xi_max * max|U0| + 1)``."""
    return 0.5 / (gamma_bar * U0.grid.xi_max * max_modulus(U0) + 1.0)


class Stepper:
    """Integrating-factor RK4 (Lawson) for a fixed ``(grid, gamma_bar, eps, dt)``.

    ``rhs(coeffs) -> coeffs`` is the nonlinear tendency; ``None`` gives the
    exact linear flow.
    """

    def __init__(self, grid, gamma_bar, eps, dt, rhs=None):
        if not eps > 0:
            raise ValueError("eps must be positive")
        self.prop = get_propagator(grid, gamma_bar)
        self.dt = float(dt)
        self.full = self.prop.matrices(dt / eps)
        self.half = self.prop.matrices(dt / (2.0 * eps))
        self.rhs = rhs

    def _E(self, mats, c):
        return self.prop.apply_matrices(mats, c)

    def step(self, c):
        dt = self.dt
        Ec = self._E(self.full, c)
        if self.rhs is None:
            return Ec
        N = self.rhs
        k1 = N(c)
        Ehc = self._E(self.half, c)
        Ehk1 = self._E(self.half, k1)
        k2 = N(Ehc + 0.5 * dt * Ehk1)
        k3 = N(Ehc + 0.5 * dt * k2)
        k4 = N(Ec + dt * self._E(self.half, k3))
        return Ec + dt / 6.0 * (self._E(self.full, k1) + 2.0 * self._E(self.half, k2 + k3) + k4)


def step(U, dt, eps, gamma_bar, nonlinear=True):
    """One IF-RK4 step of the full system."""
    grid = U.grid

    def rhs(c):
        return -apply_A(StateField(grid, c), c, gamma_bar)

    stepper = Stepper(grid, gamma_bar, eps, dt, rhs if nonlinear else None)
    out = stepper.step(U.coeffs)
    if not np.all(np.isfinite(out)):
        raise BlowupError("non-finite state after one step", 0.0)
    return StateField(grid, out)


# ---------------------------------------------------------------------------
# full simulation


MONITOR_COLUMNS = (
    "t",
    "l2_norm",
    "hs_norm_U",
    "hs_norm_Utilde",
    "cl_norm_Utilde",
    "max_abs",
    "energy_rate",
    "energy_residual",
    "transport_residual",
    "coupling_residual",
    "skew_residual",
    "hermitian_defect",
)


@dataclass
class Trajectory:
    columns: dict
    status: str
    """``completed``, ``threshold`` (stopped by ``stop_above``) or ``blowup``"""
    t_valid: float
    final: StateField
    snapshots: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def times(self):
        return self.columns["t"]

    def rows(self):
        return list(zip(*(self.columns[c] for c in MONITOR_COLUMNS)))


def _identity_monitors(U, gamma_bar):
    tr = transport_identity(StateField(U.grid, U.coeffs[:3]), U)
    co = coupling_identity(U)
    return tr.relative, co.relative


def _eps_of(spec, eps):
    eps = spec.eps if eps is None else eps
    if not (np.isfinite(eps) and eps > 0):
        raise ValueError("eps must be positive (pass eps= for manual-mode specs)")
    return float(eps)


def simulate(U0, spec, config, eps=None, monitors=True, keep_snapshots=False, stop_above=None):
    """Evolve ``U0`` and track ``Ubar`` (linear flow of ``P U0``) and ``Utilde = U - Ubar``.

    Records every ``record_stride`` steps.  ``stop_above`` halts the run once
    the running Chemin-Lerner ``L~^inf H^s`` norm of ``Utilde`` exceeds it.
    A non-finite state or an ``H^s`` norm above the blow-up cap stops the run
    with status ``blowup``.
    """
    if U0.ncomp != 4:
        raise ValueError("expected a four-component state")
    eps = _eps_of(spec, eps)
    grid = U0.grid
    gbar = spec.gamma_bar
    config.check_grid(grid, gbar)
    s = config.sobolev_s
    prop = get_propagator(grid, gbar)
    bar0, _ = project(U0, spec)

    def rhs(c):
        return -apply_A(StateField(grid, c), c, gbar)

    stepper = Stepper(grid, gbar, eps, config.dt, rhs if config.nonlinear else None)
    hs0 = lp.sobolev_norm_direct(U0, s)
    cap = config.blowup_threshold if config.blowup_threshold is not None else 1e3 * max(hs0, 1e-300)
    qs = np.arange(-1, lp.q_max(grid) + 1)
    block_weights = 2.0 ** (2 * qs * s)
    block_syms = [lp.block_symbol(grid, int(q)) for q in qs]
    running = np.zeros(len(qs))

    cols = {c: [] for c in MONITOR_COLUMNS}
    snaps = []

    def record(t, c):
        nonlocal running
        U = StateField(grid, c)
        bar = prop.apply_coeffs(bar0.coeffs, t / eps)
        tilde = StateField(grid, c - bar)
        blocks = np.array([l2_norm(tilde.multiply(sym)) for sym in block_syms])
        running = np.maximum(running, blocks)
        cl = float(np.sqrt(np.sum(block_weights * running**2)))
        hs = lp.sobolev_norm_direct(U, s)
        cols["t"].append(t)
        cols["l2_norm"].append(U.norm())
        cols["hs_norm_U"].append(hs)
        cols["hs_norm_Utilde"].append(lp.sobolev_norm_direct(tilde, s))
        cols["cl_norm_Utilde"].append(cl)
        cols["max_abs"].append(max_modulus(U))
        if monitors:
            rate = energy_rate(U, gbar) if config.nonlinear else 0.0
            tr, co = _identity_monitors(U, gbar)
            cols["energy_rate"].append(rate)
            cols["transport_residual"].append(tr)
            cols["coupling_residual"].append(co)
            cols["skew_residual"].append(skew_residual(U, gbar))
            cols["hermitian_defect"].append(_hermitian_defect(c))
        else:
            for k in ("energy_rate", "transport_residual", "coupling_residual", "skew_residual", "hermitian_defect"):
                cols[k].append(0.0)
        if keep_snapshots:
            snaps.append((U, tilde))
        return hs, cl

    c = U0.coeffs.copy()
    t = 0.0
    status = "completed"
    hs, cl = record(t, c)
    if stop_above is not None and cl > stop_above:
        raise ValueError(
            f"initial tail norm {cl:.4g} already exceeds the detection threshold {stop_above:.4g}"
        )
    nsteps = config.n_steps
    t_valid = 0.0
    blowup_window = None
    for k in range(1, nsteps + 1):
        c_new = stepper.step(c)
        if not np.all(np.isfinite(c_new)):
            status = "blowup"
            blowup_window = (t_valid, t_valid + config.dt)
            break
        c = c_new
        t = k * config.dt
        t_valid = t
        if k % config.record_stride == 0 or k == nsteps:
            hs, cl = record(t, c)
            if not np.isfinite(hs) or hs > cap:
                status = "blowup"
                blowup_window = (float(cols["t"][-2]), t)
                break
            if stop_above is not None and cl > stop_above:
                status = "threshold"
                break

    columns = {k: np.asarray(v, dtype=float) for k, v in cols.items()}
    columns["energy_residual"] = _energy_residual(columns, grid)
    return Trajectory(
        columns=columns,
        status=status,
        t_valid=t_valid,
        final=StateField(grid, c),
        snapshots=snaps,
        meta={"eps": eps, "dt": config.dt, "blowup_cap": cap, "stride": config.record_stride,
              "blowup_window": blowup_window},
    )


def _hermitian_defect(c):
    return float(np.max(np.abs(reflect(c) - np.conj(c))))


def _energy_residual(columns, grid):
    """``|d/dt E (finite differences) - <N(U)|U>|`` at each record (zeros if < 5 uniform records)."""
    t = columns["t"]
    out = np.zeros_like(t)
    if t.size < 5:
        return out
    h = np.diff(t)
    if not np.allclose(h, h[0], rtol=1e-9):
        # the final record may be off-stride; use the uniform prefix
        t, h = t[:-1], h[:-1]
        if t.size < 5:
            return out
    energy = 0.5 * columns["l2_norm"][: t.size] ** 2
    d = fd_derivative(energy, h[0])
    out[: t.size] = np.abs(d - columns["energy_rate"][: t.size])
    return out


# ---------------------------------------------------------------------------
# lifespan


@dataclass
class LifespanRecord:
    eps: float
    T_lo: float
    T_hi: float
    rule: str
    """``threshold``, ``blowup`` or ``none`` (window exhausted)"""
    beta: float
    s0: float
    threshold: float
    window: float
    max_tail: float = float("nan")

    @property
    def detected(self):
        return self.rule != "none"

    @property
    def detected_T(self):
        if not self.detected:
            return "window_exhausted"
        return 0.5 * (self.T_lo + self.T_hi)

    def row(self):
        return (self.eps, self.T_lo, self.T_hi, self.rule)


def lifespan_threshold(eps, beta, s0):
    """``2 eps^(beta s0 / 2)``."""
    return 2.0 * eps ** (beta * s0 / 2.0)


def lifespan_detect(U0, eps, beta, s0, config, spec=None, s=None, p=1.5, gamma_bar=0.5, return_trajectory=False):
    """First time the running ``L~^inf H^s`` norm of ``Utilde`` exceeds ``2 eps^(beta s0/2)``.

    ``spec`` defaults to the schedule-mode cut-off for ``(eps, beta, s, s0, p)``.
    Undetected runs report the window as a lower bound (``rule = none``).
    """
    s = config.sobolev_s if s is None else s
    if spec is None:
        spec = schedule(eps, beta, s, s0, p, gamma_bar=gamma_bar)
    thr = lifespan_threshold(eps, beta, s0)
    traj = simulate(U0, spec, config, eps=eps, monitors=False, stop_above=thr)
    times = traj.times
    if traj.status == "threshold":
        rec = LifespanRecord(eps, float(times[-2]), float(times[-1]), "threshold", beta, s0, thr, config.t_max)
    elif traj.status == "blowup":
        lo, hi = traj.meta["blowup_window"]
        rec = LifespanRecord(eps, lo, hi, "blowup", beta, s0, thr, config.t_max)
    else:
        rec = LifespanRecord(eps, config.t_max, float("inf"), "none", beta, s0, thr, config.t_max)
    rec.max_tail = float(np.max(traj.columns["hs_norm_Utilde"]))
    return (rec, traj) if return_trajectory else rec


def intervals_nondecreasing(records):
    """Detection intervals, ordered by decreasing ``eps``, are nondecreasing up to overlap."""
    for a, b in zip(records, records[1:]):
        if b.T_hi < a.T_lo:
            return False
    return True


@dataclass
class LifespanSweep:
    records: list
    alpha_hat: float
    lower_bound_only: bool
    tail_slope: float
    predicted_tail_slope: float
    trajectories: list = field(default_factory=list, repr=False)

    def rows(self):
        return [rec.row() for rec in self.records]


def lifespan_sweep(U0, eps_list, beta, s0, config, s=None, p=1.5, gamma_bar=0.5, workers=1):
    """Detect the lifespan for each ``eps`` and fit ``log T`` against ``log(1/eps)``.

    Also fits ``max_t ||Utilde||_{H^s}`` over the common window against ``eps``.
    """
    eps_list = [float(e) for e in eps_list]
    if len(eps_list) < 4:
        raise ValueError("need at least four eps values")
    if not is_geometric(eps_list):
        raise ValueError("eps_list must be geometric")

    def run(eps):
        return lifespan_detect(U0, eps, beta, s0, config, s=s, p=p, gamma_bar=gamma_bar, return_trajectory=True)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            out = list(pool.map(run, eps_list))
    else:
        out = [run(e) for e in eps_list]
    records = [o[0] for o in out]
    trajs = [o[1] for o in out]
    hits = [r for r in records if r.detected]
    if len(hits) >= 2:
        try:
            alpha_hat, _ = loglog_fit([1.0 / r.eps for r in hits], [r.detected_T for r in hits])
            lower = False
        except DegenerateFit:
            alpha_hat, lower = 0.0, True
    else:
        alpha_hat, lower = 0.0, True
    # tail growth over the window every run covered
    common = min(tr.times[-1] for tr in trajs)
    tails = [float(np.max(tr.columns["hs_norm_Utilde"][tr.times <= common])) for tr in trajs]
    try:
        tail_slope, _ = loglog_fit(eps_list, tails)
    except DegenerateFit:
        tail_slope = float("nan")
    return LifespanSweep(records, float(alpha_hat), lower, tail_slope, beta * s0 / 2.0, trajs)


# ---------------------------------------------------------------------------
# iterative scheme


def galerkin_mask(grid, n):
    """Sharp indicator of ``{|xi| <= n, |xi_h| >= 1/n, |xi_3| >= 1/n}``."""
    return (grid.xi_norm <= n) & (grid.xi_h_norm >= 1.0 / n) & (grid.xi3_abs >= 1.0 / n)


@dataclass
class GalerkinResult:
    differences: np.ndarray
    """``v_n = ||Ut^{n+1} - Ut^n||_{L^inf L^2}`` for ``n = 0 .. n_max-1``"""
    confinement: np.ndarray
    """``max_t ||J_{n+1} Ut^{n+1} - Ut^{n+1}||`` per iterate"""
    sigma_norms: np.ndarray
    """``||Ut^{n+1}||_{L~^inf H^sigma}`` per iterate"""
    times: np.ndarray
    final: list = field(default_factory=list, repr=False)

    @property
    def ratios(self):
        v = self.differences
        with np.errstate(divide="ignore", invalid="ignore"):
            return v[1:] / v[:-1]


def _cl_inf(history, s):
    return float(lp.chemin_lerner_running(history, s)[-1])


def galerkin_iterate(spec, config, U0, n_max, eps=None, s0=0.5):
    """Iterates of the linearized scheme for ``Utilde`` over ``[0, config.t_max]``.

    ``Ut^{n+1}`` solves the frozen-coefficient system

        dV/dt = (1/eps) B V - J A(Ubar + Ut^n, D) J (V + Ubar),
        V(0) = J (1 - P) U0,      J = J_{n+1},

    with a Lawson-Heun step, which only samples the coefficients at the
    stored times.  The initial datum is ``J``-truncated so that the iterate
    lives in the range of ``J``.
    """
    eps = _eps_of(spec, eps)
    grid = U0.grid
    gbar = spec.gamma_bar
    config.check_grid(grid, gbar)
    sigma = config.sobolev_s + s0 / 2.0
    prop = get_propagator(grid, gbar)
    nt = config.n_steps
    dt = config.dt
    times = np.arange(nt + 1) * dt
    bar0, tilde0 = project(U0, spec)
    bars = [prop.apply_coeffs(bar0.coeffs, t / eps) for t in times]
    E = prop.matrices(dt / eps)
    prev = [np.zeros_like(bar0.coeffs) for _ in times]
    diffs, confine, sig = [], [], []
    for n in range(n_max):
        J = galerkin_mask(grid, n + 1).astype(float)

        def F(k, V, J=J, prev=prev):
            W = StateField(grid, bars[k] + prev[k])
            return -J * apply_A(W, J * (V + bars[k]), gbar)

        V = J * tilde0.coeffs
        cur = [V]
        for k in range(nt):
            k1 = F(k, V)
            Ek1 = prop.apply_matrices(E, k1)
            Vs = prop.apply_matrices(E, V) + dt * Ek1
            k2 = F(k + 1, Vs)
            V = prop.apply_matrices(E, V) + 0.5 * dt * (Ek1 + k2)
            if not np.all(np.isfinite(V)):
                raise BlowupError(f"iterate {n + 1} is not finite", times[k])
            cur.append(V)
        diffs.append(max(l2_norm(StateField(grid, a - b)) for a, b in zip(cur, prev)))
        confine.append(max(l2_norm(StateField(grid, J * a - a)) for a in cur))
        hist = [StateField(grid, a) for a in cur]
        sig_n = _cl_inf(hist, sigma)
        sig.append(sig_n)
        if sig_n > config.eta:
            raise IterationBoundError(
                f"iterate {n + 1}: L~inf H^sigma norm {sig_n:.4g} exceeds eta = {config.eta}"
            )
        prev = cur
    return GalerkinResult(np.array(diffs), np.array(confine), np.array(sig), times, final=prev)


# ---------------------------------------------------------------------------
# continuity in the data


@dataclass
class LipschitzReport:
    times: np.ndarray
    separation: np.ndarray
    bound: np.ndarray
    delta0: float

    @property
    def holds(self):
        return bool(np.all(self.separation <= self.bound))


def lipschitz_check(U0, perturbation, spec, config, eps=None, slack=1.5):
    """Separation of two runs against ``slack * ||delta0|| exp(int (||U1||_Hs + ||U2||_Hs))``."""
    config = replace(config, record_stride=1)
    a = simulate(U0, spec, config, eps=eps, monitors=False, keep_snapshots=True)
    b = simulate(U0 + perturbation, spec, config, eps=eps, monitors=False, keep_snapshots=True)
    if a.status != "completed" or b.status != "completed":
        raise BlowupError("a run did not complete", min(a.t_valid, b.t_valid))
    sep = np.array([(ua - ub).norm() for (ua, _), (ub, _) in zip(a.snapshots, b.snapshots)])
    rate = a.columns["hs_norm_U"] + b.columns["hs_norm_U"]
    t = a.times
    integral = np.concatenate([[0.0], np.cumsum(0.5 * (rate[1:] + rate[:-1]) * np.diff(t))])
    delta0 = perturbation.norm()
    # exponent kept in log form; exp overflow is harmless here (inf bound)
    with np.errstate(over="ignore"):
        bound = slack * delta0 * np.exp(integral)
    return LipschitzReport(t, sep, bound, delta0)
