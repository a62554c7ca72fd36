import numpy as np
import pytest

from rotowave.cutoff import CutoffSpec, psi_on_grid
from rotowave.fields import bump_state, gaussian_envelope, random_state
from rotowave.fitting import DegenerateFit
from rotowave.freewave import (
    KernelQuery,
    QuadratureError,
    admissible,
    box_crossing_time,
    kernel_K,
    kernel_decay_fit,
    kernel_volume,
    solve_linear,
    spatial_norm,
    strichartz_norm,
    strichartz_sweep,
)
from rotowave.grid import Grid, StateField
from rotowave.rotor import eigensystem

SPEC = CutoffSpec.manual(0.5, 2.0, 0.5)


@pytest.fixture(scope="module")
def grid():
    return Grid(16, 4 * np.pi)


@pytest.fixture(scope="module")
def data(grid):
    return random_state(grid, 0, envelope=gaussian_envelope(2.0), l2=1.0)


def test_solve_linear_t0_is_projection(grid, data):
    (snap,) = solve_linear(data, SPEC, 0.1, [0.0])
    np.testing.assert_array_equal(snap.coeffs, data.coeffs * psi_on_grid(grid, SPEC.r, SPEC.R))


def test_solve_linear_support_and_norm(grid, data):
    snaps = solve_linear(data, SPEC, 0.05, np.linspace(0, 2, 9))
    outside = psi_on_grid(grid, SPEC.r, SPEC.R) == 0
    n0 = snaps[0].norm()
    for s in snaps:
        assert np.all(s.coeffs[:, outside] == 0)
        assert s.norm() == pytest.approx(n0, rel=1e-12)


def test_solve_linear_eigenmode_phase(grid):
    k = (1, 2, 3)
    xi = grid.wavevector(k)
    es = eigensystem(xi, SPEC.gamma_bar)
    c = np.zeros((4,) + grid.shape, dtype=complex)
    c[(slice(None),) + grid.index_of(k)] = es.vectors[:, 1]
    U = StateField(grid, c)
    assert psi_on_grid(grid, SPEC.r, SPEC.R)[grid.index_of(k)] == 1.0
    t, eps = 0.7, 0.03
    (_, out) = solve_linear(U, SPEC, eps, [0.0, t])
    expected = np.exp(t / eps * es.lambdas[1]) * es.vectors[:, 1]
    np.testing.assert_allclose(out.coeffs[(slice(None),) + grid.index_of(k)], expected, atol=1e-12)


def test_solve_linear_errors(grid, data):
    with pytest.raises(ValueError):
        solve_linear(data, SPEC, 0.0, [0.0])
    with pytest.raises(ValueError):
        solve_linear(data, SPEC, 0.1, [0.5, 0.1])


def test_strichartz_norm_trivial(grid, data):
    snaps = solve_linear(data, SPEC, 0.05, np.linspace(0, 1, 11))
    assert strichartz_norm(snaps, 0.1, np.inf, 2.0) == pytest.approx(snaps[0].norm(), rel=1e-12)
    zero = [StateField.zeros(grid)] * 3
    assert strichartz_norm(zero, 0.1, 4.0, np.inf) == 0.0
    assert strichartz_norm(snaps, 0.1, 4.0, np.inf) > 0
    with pytest.raises(ValueError):
        strichartz_norm([], 0.1, 4.0, np.inf)


def test_strichartz_norm_quadrature(grid, data):
    snaps = solve_linear(data, SPEC, 0.05, np.linspace(0, 1, 11))
    vals = np.array([spatial_norm(s, np.inf) for s in snaps])
    direct = np.trapezoid(vals**4, dx=0.1) ** 0.25
    assert strichartz_norm(snaps, 0.1, 4.0, np.inf) == pytest.approx(direct, rel=1e-14)


def test_sup_norm_upsampling_not_below_grid_max(grid, data):
    u = solve_linear(data, SPEC, 0.05, [0.3])[0]
    assert spatial_norm(u, np.inf, upsample=2) >= spatial_norm(u, np.inf, upsample=1) * (1 - 1e-14)


def test_admissible():
    assert admissible(4.0, np.inf)
    assert not admissible(3.9, np.inf)
    assert admissible(np.inf, 2.0)
    assert admissible(8.0, 4.0) and not admissible(7.0, 4.0)
    assert not admissible(4.0, 1.5)


def test_kernel_at_origin_is_volume():
    q = KernelQuery(0.0, (0.0, 0.0, 0.0), (1, 1), 0.5, 4.0, 0.5)
    k = kernel_K(q)
    assert abs(k.imag) < 1e-10 * abs(k.real) and k.real > 0
    vol = kernel_volume(0.5, 4.0)
    assert k.real == pytest.approx(vol, rel=0.01)
    coarse = kernel_K(KernelQuery(0.0, (0.0, 0.0, 0.0), (1, 1), 0.5, 4.0, 0.5, resolution=128), check=False)
    assert coarse.real == pytest.approx(k.real, rel=0.01)


def test_kernel_rotation_invariance():
    base = kernel_K(KernelQuery(5.0, (3.0, 4.0, 1.0), (1, 1), 0.5, 4.0, 0.5, resolution=256), check=False)
    rot = kernel_K(KernelQuery(5.0, (5.0, 0.0, 1.0), (1, 1), 0.5, 4.0, 0.5, resolution=256), check=False)
    assert abs(abs(base) - abs(rot)) <= 1e-6 * abs(rot)


def test_kernel_branch_conjugation():
    for br in ((1, 1), (1, -1)):
        a = kernel_K(KernelQuery(7.0, (1.0, 0.5, 2.0), br, 0.5, 4.0, 0.5, resolution=256), check=False)
        b = kernel_K(KernelQuery(7.0, (-1.0, -0.5, -2.0), (-br[0], br[1]), 0.5, 4.0, 0.5, resolution=256), check=False)
        assert abs(a - np.conj(b)) <= 1e-10 * abs(a)


def test_kernel_envelope_damped():
    vals = [abs(kernel_K(KernelQuery(t, (0.0, 0.0, 0.0), (1, 1), 0.5, 4.0, 0.5))) for t in (0.0, 10.0, 100.0)]
    assert vals[1] <= vals[0] and vals[2] <= vals[0]


def test_kernel_query_validation():
    with pytest.raises(ValueError):
        KernelQuery(-1.0, (0, 0, 0), (1, 1), 0.5, 4.0, 0.5)
    with pytest.raises(ValueError):
        KernelQuery(1.0, (0, 0, 0), (1, 0), 0.5, 4.0, 0.5)
    with pytest.raises(ValueError):
        KernelQuery(1.0, (0, 0, 0), (1, 1), 4.0, 0.5, 0.5)


def test_kernel_low_resolution_rejected():
    q = KernelQuery(200.0, (0.0, 0.0, 0.0), (1, 1), 0.5, 4.0, 0.5, resolution=40)
    with pytest.raises(QuadratureError):
        kernel_K(q)


def test_kernel_decay_fit_shape():
    taus = np.geomspace(10, 1000, 6)
    fit = kernel_decay_fit(0.5, 4.0, 0.5, (1, 1), taus)
    assert np.isfinite(fit.sup_scaled) and fit.sup_scaled > 0
    assert fit.normalized == pytest.approx(fit.sup_scaled / (4.0**3 * 0.5**-2))
    assert fit.slope < 0
    assert len(fit.rows()) == 6
    with pytest.raises(DegenerateFit):
        kernel_decay_fit(0.5, 4.0, 0.5, (1, 1), taus[:5])
    with pytest.raises(DegenerateFit):
        kernel_decay_fit(0.5, 4.0, 0.5, (1, 1), np.linspace(10, 100, 6))


def test_strichartz_sweep_decreasing():
    g = Grid(32, 8 * np.pi)
    u = bump_state(g, gaussian_envelope(2.0), l2=1.0)
    spec = CutoffSpec.manual(0.5, 2.0, 0.5)
    eps = [0.1, 0.05, 0.025, 0.0125]
    window = 0.25
    assert window < box_crossing_time(g, eps[-1], 0.5)
    sw = strichartz_sweep(u, spec, eps, window, 4.0, np.inf)
    assert np.all(np.diff(sw.norms) < 0)
    assert sw.slope >= 0.1
    assert sw.normalized.max() / sw.normalized.min() < 5


def test_strichartz_sweep_zero_and_errors(grid):
    zero = StateField.zeros(grid)
    sw = strichartz_sweep(zero, SPEC, [0.1, 0.05, 0.025, 0.0125], 0.1, 4.0, np.inf)
    assert sw.degenerate and np.all(sw.norms == 0)
    with pytest.raises(ValueError, match="p >= 4q"):
        strichartz_sweep(zero, SPEC, [0.1, 0.05, 0.025, 0.0125], 0.1, 3.0, np.inf)
    with pytest.raises(ValueError):
        strichartz_sweep(zero, SPEC, [0.1, 0.05, 0.025], 0.1, 4.0, np.inf)
    with pytest.raises(ValueError):
        strichartz_sweep(zero, SPEC, [0.0125, 0.025, 0.05, 0.1], 0.1, 4.0, np.inf)
