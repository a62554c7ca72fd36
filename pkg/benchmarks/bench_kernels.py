"""Time the numba and pure-numpy variants of each hot kernel side by side.

    python benchmarks/bench_kernels.py [--modes 32768] [--repeat 5]

Prints one line per kernel: best wall time of each path, the speedup and the
maximum absolute difference between the two outputs.  A second section times a
full linear propagation and one nonlinear step with the dispatching entry points,
in whichever mode ``ROTOWAVE_DISABLE_NUMBA`` selects for this process.
"""

import argparse
import timeit

import numpy as np

from rotowave import _accel, _kernels
from rotowave.fields import gaussian_envelope, random_state
from rotowave.grid import Grid, StateField
from rotowave.nonlinear import Stepper, nonlin_tendency
from rotowave.rotor import get_propagator, propagate


def _inputs(nmode, rng):
    vectors = np.linalg.qr(rng.standard_normal((nmode, 4, 4)) + 1j * rng.standard_normal((nmode, 4, 4)))[0]
    omega = rng.standard_normal((nmode, 4))
    coeffs = rng.standard_normal((nmode, 4)) + 1j * rng.standard_normal((nmode, 4))
    mats = rng.standard_normal((nmode, 4, 4)) + 1j * rng.standard_normal((nmode, 4, 4))
    # rank-3 matrices for the null-vector kernel
    sing = mats.copy()
    sing[:, 3] = sing[:, 0] + sing[:, 1]
    npts = 8 * nmode
    quad = (rng.random(npts), rng.standard_normal(npts), rng.standard_normal(npts))
    return vectors, omega, coeffs, mats, sing, quad


def _best(fn, repeat):
    fn()  # warm-up (jit compile)
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def _null_gap(a, b):
    # null vectors are defined up to a unit phase
    phase = np.sum(np.conj(a) * b, axis=1)
    phase = phase / np.abs(phase)
    return float(np.max(np.abs(a * phase[:, None] - b)))


def kernel_table(nmode, repeat, seed=0):
    rng = np.random.default_rng(seed)
    vectors, omega, coeffs, mats, sing, (w, ph, z) = _inputs(nmode, rng)
    cases = [
        ("apply_modal", lambda k: k(vectors, omega, 0.7, coeffs), None),
        ("apply_matrices", lambda k: k(mats, coeffs), None),
        ("null_vectors", lambda k: k(sing), _null_gap),
        ("oscillatory_sum", lambda k: k(w, ph, z, 3.0, 0.5), None),
    ]
    rows = []
    for name, call, gap in cases:
        fast = getattr(_kernels, f"{name}_numba")
        slow = getattr(_kernels, f"{name}_numpy")
        t_nb = _best(lambda: call(fast), repeat)
        t_np = _best(lambda: call(slow), repeat)
        a, b = np.asarray(call(fast)), np.asarray(call(slow))
        diff = gap(a, b) if gap else float(np.max(np.abs(a - b)))
        rows.append((name, t_nb, t_np, diff))
    return rows


def end_to_end(n, repeat, seed=0):
    grid = Grid(n, 8 * np.pi)
    U = random_state(grid, seed, envelope=gaussian_envelope(2.0), peak=0.1)
    get_propagator(grid, 0.5)  # eigensystem build excluded from timings
    t_lin = _best(lambda: propagate(U, 0.3, 0.05, 0.5), repeat)
    stepper = Stepper(grid, 0.5, 0.05, 0.02, rhs=lambda c: nonlin_tendency(StateField(grid, c), 0.5).coeffs)
    t_step = _best(lambda: stepper.step(U.coeffs), repeat)
    return t_lin, t_step


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--modes", type=int, default=32768)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--grid", type=int, default=32)
    args = ap.parse_args(argv)

    print(f"numba available: {_accel.HAVE_NUMBA}, dispatch uses numba: {_accel.USE_NUMBA}")
    print(f"{'kernel':<18}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}{'max |diff|':>13}")
    for name, t_nb, t_np, diff in kernel_table(args.modes, args.repeat):
        print(f"{name:<18}{t_nb:>12.4g}{t_np:>12.4g}{t_np / t_nb:>10.2f}{diff:>13.2e}")
    t_lin, t_step = end_to_end(args.grid, args.repeat)
    mode = "numba" if _accel.USE_NUMBA else "numpy"
    print(f"{args.grid}^3 propagate ({mode}): {t_lin:.4g} s, IF-RK4 step ({mode}): {t_step:.4g} s")


if __name__ == "__main__":
    main()
