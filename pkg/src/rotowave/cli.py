"""Command-line experiment drivers.

Every subcommand reads the flat configuration (``--config``), applies
per-key overrides, writes CSV tables plus a JSON manifest and exits with
0 (checks passed), 2 (a check failed) or 3 (configuration error).
"""

import argparse
import sys
import warnings

import numpy as np

from . import acceptance as acc
from . import nonlinear as nl
from .config import DEFAULTS, ConfigError, default_config, load_config
from .cutoff import CutoffSpec, schedule, tail_norm_sweep
from .fields import bump_state, gaussian_envelope, random_state
from .freewave import kernel_decay_fit, strichartz_sweep
from .grid import Grid
from .output import NonFiniteOutput, RunManifest, resolve_out_dir
from .rotor import branch_frequencies, char_poly, char_poly_coeffs, eigensystem_batch, eigenvalues_closed_form

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 2, 3

SUBCOMMANDS = (
    "spectrum-check",
    "lp-check",
    "cutoff-sweep",
    "kernel-decay",
    "strichartz-sweep",
    "simulate",
    "galerkin",
    "lifespan-sweep",
    "all-acceptance",
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_CONFIG)


def _flag(key):
    return "--" + key.replace("_", "-")


def _list_arg(text):
    return [float(v) for v in text.strip("[]").split(",") if v.strip()]


def _add_common(p):
    p.add_argument("--config", help="flat key = value configuration file")
    p.add_argument("--out-dir", help="output directory (default: $ROTOWAVE_OUT or out_dir)")
    for key, default in DEFAULTS.items():
        if key == "out_dir":
            continue
        if isinstance(default, list):
            p.add_argument(_flag(key), dest=key, type=_list_arg, help=f"comma list (default {default})")
        elif isinstance(default, str):
            p.add_argument(_flag(key), dest=key, help=f"(default {default})")
        elif isinstance(default, int):
            p.add_argument(_flag(key), dest=key, type=int, help=f"(default {default})")
        else:
            p.add_argument(_flag(key), dest=key, type=float, help=f"(default {default:g})")


def build_parser():
    parser = _Parser(prog="rotowave", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in SUBCOMMANDS:
        _add_common(sub.add_parser(name))
    return parser


def resolve_config(args):
    cfg = load_config(args.config) if args.config else default_config()
    overrides = {k: getattr(args, k, None) for k in DEFAULTS if k != "out_dir"}
    return cfg.override(**overrides)


def _grid(cfg):
    return Grid(cfg.n, cfg.length)


def _spec(cfg, eps=None):
    if cfg.mode == "schedule":
        return schedule(eps or cfg.eps, cfg.beta, cfg.s, cfg.s0, cfg.p, gamma_bar=cfg.gamma_bar)
    return CutoffSpec.manual(cfg.r, cfg.R, cfg.gamma_bar)


def _grid_info(grid):
    return {"n": grid.n, "length": grid.length, "dk": grid.dk, "xi_max": grid.xi_max}


# ---------------------------------------------------------------------------
# drivers: each returns (passed, results) and writes tables through the manifest


def run_spectrum_check(cfg, man):
    rng = np.random.default_rng(cfg.seed)
    xis = acc.sample_region(rng, cfg.samples, 0.25, 8.0)
    g = cfg.gamma_bar
    lam = eigenvalues_closed_form(xis, g)
    c2, c0 = char_poly_coeffs(xis, g)
    scale = np.abs(lam) ** 4 + c2[:, None] * np.abs(lam) ** 2 + c0[:, None]
    cp = np.max(np.abs(char_poly(lam, xis[:, None, :], g)) / scale, axis=1)
    _, vecs, _ = eigensystem_batch(xis, g)
    gram = np.max(np.abs(np.matmul(np.conj(np.swapaxes(vecs, 1, 2)), vecs) - np.eye(4)), axis=(1, 2))
    om = branch_frequencies(xis, g)
    vs = np.abs(om[:, 0] ** 2 + om[:, 1] ** 2 - c2) / c2
    vp = np.abs(om[:, 0] ** 2 * om[:, 1] ** 2 - c0) / np.maximum(c0, 1e-300)
    rows = [(*x, a, b, c, d) for x, a, b, c, d in zip(xis, cp, gram, vs, vp)]
    man.table(
        "residuals",
        ["xi1", "xi2", "xi3", "char_poly_residual", "gram_deviation", "vieta_sum", "vieta_product"],
        rows,
    )
    worst = float(max(cp.max(), gram.max(), vs.max(), vp.max()))
    return worst < 1e-10, {"worst_residual": worst}


def run_lp_check(cfg, man):
    res = acc.a6_littlewood_paley(seed=cfg.seed)
    m = res.metrics
    rows = [
        ("partition_residual", m["partition"], 1e-10),
        ("bony_relative_error", m["bony"], 1e-10),
        ("block_overlap", m["orthogonality"], 0.0),
        ("chemin_lerner_excess", m["cl_excess"], 1e-12),
        ("commutator_coarse", m["commutator"][0], float("nan")),
        ("commutator_fine", m["commutator"][1], float("nan")),
        ("product_rule_coarse", m["product_rule"][0], float("nan")),
        ("product_rule_fine", m["product_rule"][1], float("nan")),
    ]
    man.table("metrics", ["metric", "value", "limit"], [(a, b, "" if np.isnan(c) else c) for a, b, c in rows])
    return res.passed, {"summary": res.summary}


def run_cutoff_sweep(cfg, man):
    grid = _grid(cfg)
    band = grid.xi_max
    if 2 * max(cfg.R_list) > band:
        raise ConfigError(
            f"R_list: 2*max(R) = {2 * max(cfg.R_list):g} exceeds the lattice band {band:g}; "
            "use a finer grid (e.g. n = 128, length = 4*pi)"
        )
    gauss, sat = acc.tail_profiles(grid, cfg.seed)
    results, ok = {}, True
    for name, data in (("gaussian", gauss), ("saturating", sat)):
        sw = tail_norm_sweep(data, cfg.s, cfg.s0, cfg.p, cfg.R_list)
        man.table(name, ["R", "r", "tail_norm", "C_U0", "ratio"], sw.rows())
        results[f"{name}_slope"] = sw.slope
        if name == "gaussian":
            ok &= sw.saturated or sw.slope <= -cfg.s0 + 0.2
        else:
            ok &= abs(sw.slope + cfg.s0) <= 0.3
    return ok, results


def run_kernel_decay(cfg, man):
    taus = np.geomspace(cfg.tau_min, cfg.tau_max, cfg.n_tau)
    fit = kernel_decay_fit(cfg.r, cfg.R, cfg.gamma_bar, tuple(cfg.branch), taus)
    man.table("kernel", ["tau", "abs_K", "sqrt_tau_abs_K"], fit.rows())
    ok = -0.8 <= fit.slope <= -0.35 and np.isfinite(fit.sup_scaled)
    return ok, {"slope": fit.slope, "sup_scaled": fit.sup_scaled, "normalized": fit.normalized}


def run_strichartz_sweep(cfg, man):
    grid = _grid(cfg)
    U0 = bump_state(grid, gaussian_envelope(cfg.data_width), l2=1.0)
    spec = _spec(cfg, cfg.eps_list[0])
    sw = strichartz_sweep(U0, spec, cfg.eps_list, cfg.t_window, cfg.p_time, cfg.q_space)
    man.table("norms", ["eps", "norm", "normalized"], sw.rows())
    monotone = bool(np.all(np.diff(sw.norms) < 0))
    spread = float(sw.normalized.max() / sw.normalized.min())
    ok = monotone and sw.slope >= 0.1 and spread < 5
    return ok, {"slope": sw.slope, "spread": spread, "monotone": monotone}


def _solver(cfg, U0):
    dt = cfg.dt or nl.default_dt(U0, cfg.gamma_bar)
    cap = cfg.blowup_threshold or None
    return nl.SolverConfig(
        dt=dt, t_max=cfg.t_max, sobolev_s=cfg.s, record_stride=cfg.record_stride, eta=cfg.eta, blowup_threshold=cap
    )


def _data(cfg, grid, peak=None):
    return random_state(grid, cfg.seed, envelope=gaussian_envelope(cfg.data_width), peak=peak or cfg.amplitude)


def run_simulate(cfg, man):
    grid = _grid(cfg)
    U0 = _data(cfg, grid)
    solver = _solver(cfg, U0)
    traj = nl.simulate(U0, _spec(cfg), solver, eps=cfg.eps)
    man.table("monitors", list(nl.MONITOR_COLUMNS), traj.rows())
    c = traj.columns
    checks = {
        "transport": float(c["transport_residual"].max()),
        "coupling": float(c["coupling_residual"].max()),
        "skew": float(c["skew_residual"].max()),
        "hermitian": float(c["hermitian_defect"].max()),
    }
    ok = (
        traj.status == "completed"
        and checks["transport"] < 1e-10
        and checks["coupling"] < 1e-10
        and checks["skew"] < 1e-12
        and checks["hermitian"] < 1e-12
    )
    return ok, {"status": traj.status, "t_valid": traj.t_valid, "dt": solver.dt, **checks, "grid": _grid_info(grid)}


def run_galerkin(cfg, man):
    grid = _grid(cfg)
    U0 = _data(cfg, grid)
    solver = _solver(cfg, U0)
    try:
        res = nl.galerkin_iterate(_spec(cfg), solver, U0, cfg.n_max, eps=cfg.eps, s0=cfg.s0)
    except nl.IterationBoundError as exc:
        print(f"galerkin: {exc}", file=sys.stderr)
        return False, {"error": str(exc)}
    rows = [(n + 1, v, c, s) for n, (v, c, s) in enumerate(zip(res.differences, res.confinement, res.sigma_norms))]
    man.table("iterates", ["n", "difference", "confinement", "sigma_norm"], rows)
    v = res.differences
    live = v[v > 1e-13 * v.max()] if v.max() > 0 else v[:0]
    eventual = float(live[-1] / live[-2]) if live.size >= 2 else 0.0
    ok = res.confinement.max() < 1e-12 and eventual <= 0.75
    return ok, {"eventual_ratio": eventual, "grid": _grid_info(grid)}


def run_lifespan_sweep(cfg, man):
    grid = _grid(cfg)
    U0 = acc.modes_state(grid, acc.plateau_mask(grid, cfg.eps_list, cfg.beta), cfg.seed, cfg.amplitude)
    if not np.any(U0.coeffs):
        raise ConfigError("no lattice mode lies where every scheduled cut-off equals 1; refine the grid")
    solver = _solver(cfg, U0)
    sw = nl.lifespan_sweep(U0, cfg.eps_list, cfg.beta, cfg.s0, solver, p=cfg.p, gamma_bar=cfg.gamma_bar, workers=cfg.threads)
    man.table("lifespan", ["eps", "T_lo", "T_hi", "rule"], [(e, lo, hi if np.isfinite(hi) else "inf", r) for e, lo, hi, r in sw.rows()])
    monotone = nl.intervals_nondecreasing(sw.records)
    return monotone, {
        "alpha_hat": sw.alpha_hat,
        "lower_bound_only": sw.lower_bound_only,
        "tail_slope": sw.tail_slope,
        "predicted_tail_slope": sw.predicted_tail_slope,
    }


def run_all_acceptance(cfg, man):
    results = []
    for name, runner in acc.RUNNERS.items():
        res = runner()
        print(res.line(), flush=True)
        results.append(res)
    man.table(
        "summary",
        ["criterion", "title", "passed", "seconds", "summary"],
        [(r.name, r.title, r.passed, round(r.seconds, 2), r.summary) for r in results],
    )
    return all(r.passed for r in results), {r.name: r.passed for r in results}


DRIVERS = {
    "spectrum-check": run_spectrum_check,
    "lp-check": run_lp_check,
    "cutoff-sweep": run_cutoff_sweep,
    "kernel-decay": run_kernel_decay,
    "strichartz-sweep": run_strichartz_sweep,
    "simulate": run_simulate,
    "galerkin": run_galerkin,
    "lifespan-sweep": run_lifespan_sweep,
    "all-acceptance": run_all_acceptance,
}


def _set_threads(n):
    if n <= 1:
        return
    try:
        import numba

        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))
    except Exception:  # numba missing or built without a threading layer
        pass


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        out_dir = resolve_out_dir(args.out_dir, cfg.out_dir)
    except (ConfigError, OSError) as exc:
        print(f"rotowave: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    _set_threads(cfg.threads)
    name = args.command.replace("-", "_")
    man = RunManifest(out_dir, name, cfg.as_dict(), seed=cfg.seed)
    code = EXIT_FAIL
    try:
        passed, results = DRIVERS[args.command](cfg, man)
        man.results = results
        man.complete = True
        code = EXIT_OK if passed else EXIT_FAIL
        print(f"{args.command}: {'ok' if passed else 'check failed'} ({out_dir})")
    except ConfigError as exc:
        print(f"rotowave: configuration error: {exc}", file=sys.stderr)
        code = EXIT_CONFIG
    except NonFiniteOutput as exc:
        print(f"rotowave: non-finite output: {exc}", file=sys.stderr)
        code = EXIT_FAIL
    except (ValueError, nl.BlowupError) as exc:
        print(f"rotowave: {args.command} failed: {exc}", file=sys.stderr)
        code = EXIT_FAIL
    finally:
        man.write()
    return code


if __name__ == "__main__":
    sys.exit(main())
