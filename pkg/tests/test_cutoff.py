import numpy as np
import pytest

from rotowave import lp
from rotowave.cutoff import (
    CutoffSpec,
    conjugate_exponent,
    in_region,
    project,
    psi_on_grid,
    psi_profile,
    psi_rR,
    schedule,
    schedule_delta,
    tail_norm_sweep,
)
from rotowave.fields import gaussian_envelope, random_state
from rotowave.grid import Grid, StateField, inner_product


def test_psi_profile_values():
    assert psi_profile(0.5) == 1.0
    assert psi_profile(1.0) == 1.0
    assert psi_profile(3.0) == 0.0
    assert psi_profile(2.0) == 0.0
    mid = psi_profile(1.5)
    assert 0 < mid < 1
    h = 1e-6
    assert (psi_profile(1.5 + h) - psi_profile(1.5 - h)) / (2 * h) < 0


def test_psi_profile_monotone_and_smooth():
    t = np.linspace(0, 3, 30001)
    v = psi_profile(t)
    assert np.all(np.diff(v) <= 0)
    # derivatives vanish at the junctions (flat to all orders)
    h = 1e-3
    for t0 in (1.0, 2.0):
        assert abs(psi_profile(t0 + h) - psi_profile(t0 - h)) < 1e-100


@pytest.mark.parametrize(
    "xi, expected", [((1.0, 0.0, 1.0), 1.0), ((0.2, 0.0, 1.0), 0.0), ((9.0, 0.0, 0.0), 0.0)]
)
def test_psi_rR_examples(xi, expected):
    assert psi_rR(np.array(xi), 0.5, 4.0) == expected


def test_psi_rR_support(rng):
    r, R = 0.5, 4.0
    xi = rng.uniform(-10, 10, size=(20000, 3))
    v = psi_rR(xi, r, R)
    assert np.all((v >= 0) & (v <= 1))
    full, h, z = np.linalg.norm(xi, axis=1), np.hypot(xi[:, 0], xi[:, 1]), np.abs(xi[:, 2])
    inside = (full <= R) & (h >= r) & (z >= r)
    assert np.all(v[inside] == 1)
    outside = (full >= 2 * R) | (h <= r / 2) | (z <= r / 2)
    assert np.all(v[outside] == 0)
    with pytest.raises(ValueError):
        psi_rR(xi, 4.0, 0.5)


def test_grid_psi_matches_pointwise():
    g = Grid(16, 4 * np.pi)
    on_grid = psi_on_grid(g, 0.5, 4.0).ravel()
    np.testing.assert_allclose(on_grid, psi_rR(g.xi_vectors, 0.5, 4.0), atol=1e-15)
    assert np.all(on_grid[in_region(g, 0.5, 4.0).ravel()] == 1)


def test_project_inside_region(grid16):
    mask = in_region(grid16, 0.5, 4.0)
    u = random_state(grid16, 0, envelope=None)
    u = u.multiply(mask)
    bar, tilde = project(u, CutoffSpec.manual(0.5, 4.0))
    assert np.all(tilde.coeffs == 0)
    np.testing.assert_array_equal(bar.coeffs, u.coeffs)


def test_project_outside_support(grid16):
    u = StateField.plane_wave(grid16, (0, 0, 3), ncomp=4)  # xi_h = 0
    bar, tilde = project(u, CutoffSpec.manual(0.5, 4.0))
    assert np.all(bar.coeffs == 0)
    np.testing.assert_array_equal(tilde.coeffs, u.coeffs)


def test_project_parseval_expansion(grid16):
    u = random_state(grid16, 1, envelope=gaussian_envelope(2.0), l2=1.0)
    bar, tilde = project(u, CutoffSpec.manual(0.5, 2.0))
    np.testing.assert_allclose((bar + tilde).coeffs, u.coeffs, rtol=0, atol=1e-15 * np.max(np.abs(u.coeffs)))
    lhs = bar.norm() ** 2 + tilde.norm() ** 2 + 2 * inner_product(bar, tilde).real
    assert lhs == pytest.approx(u.norm() ** 2, rel=1e-12)


def test_project_linear_and_idempotent_on_sharp_fields(grid16):
    spec = CutoffSpec.manual(0.5, 4.0)
    psi = psi_on_grid(grid16, spec.r, spec.R)
    sharp = (psi == 0) | (psi == 1)
    a = random_state(grid16, 2).multiply(sharp)
    b = random_state(grid16, 3).multiply(sharp)
    pa, pb = project(a, spec)[0], project(b, spec)[0]
    np.testing.assert_allclose(project(a * 2 + b, spec)[0].coeffs, (pa * 2 + pb).coeffs, atol=1e-15)
    np.testing.assert_array_equal(project(pa, spec)[0].coeffs, pa.coeffs)


def test_schedule_arithmetic():
    assert conjugate_exponent(1.5) == pytest.approx(3.0)
    delta = schedule_delta(2.6, 0.5, 1.5)
    assert delta == pytest.approx(18.6)
    spec = schedule(0.01, 0.01, 2.6, 0.5, 1.5)
    assert spec.R == pytest.approx(10**0.02, rel=1e-14)
    assert spec.R == pytest.approx(1.047, abs=1e-3)
    assert spec.r == pytest.approx(spec.R**-18.6, rel=1e-14)
    assert spec.r == pytest.approx(0.424, abs=1e-3)
    assert spec.mode == "schedule"
    assert 0 < spec.r < 1 < spec.R


def test_feasibility_flags():
    bound = 1 / (10 + 4 * 18.6 + 4 * 0.5)
    assert bound == pytest.approx(1 / 86.4)
    ok = schedule(0.01, 0.99 * bound, 2.6, 0.5, 1.5)
    bad = schedule(0.01, 1.01 * bound, 2.6, 0.5, 1.5)
    assert ok.feasible_lifespan and not bad.feasible_lifespan
    assert ok.beta_bound == pytest.approx(bound)
    # energy condition beta (5 + 2 delta) < 1/2
    e_bound = 0.5 / (5 + 2 * 18.6)
    assert schedule(0.01, 0.99 * e_bound, 2.6, 0.5, 1.5).feasible_energy
    assert not schedule(0.01, 1.01 * e_bound, 2.6, 0.5, 1.5).feasible_energy


def test_alpha_formula():
    spec = schedule(0.01, 0.01, 2.6, 0.5, 1.5)
    expected = min(0.25 - 0.01 * (5 + 2 * 18.6) / 2, 0.01 * 0.5 / 2)
    assert spec.alpha == pytest.approx(expected)


@pytest.mark.parametrize(
    "args, match",
    [((1.5, 0.01, 2.6, 0.5, 1.5), "eps"), ((0.1, 0.0, 2.6, 0.5, 1.5), "beta"), ((0.1, 0.01, 2.6, 0.5, 2.0), "p")],
)
def test_schedule_errors(args, match):
    with pytest.raises(ValueError, match=match):
        schedule(*args)


def test_spec_validation():
    with pytest.raises(ValueError):
        CutoffSpec.manual(2.0, 1.0)
    with pytest.raises(ValueError, match="gamma_bar"):
        CutoffSpec.manual(0.5, 4.0, gamma_bar=-1.0)


def test_tail_sweep_saturated():
    g = Grid(16, 4 * np.pi)
    # content only where Psi = 1 for every radius in the sweep
    mask = np.ones(g.shape, dtype=bool)
    for R in (2.0, 3.0, 4.0):
        mask &= in_region(g, R ** -schedule_delta(2.6, 0.5, 1.5), R)
    u = random_state(g, 0).multiply(mask)
    sweep = tail_norm_sweep(u, 2.6, 0.5, 1.5, [2.0, 3.0, 4.0])
    assert sweep.saturated and np.isnan(sweep.slope)


def test_tail_sweep_monotone_and_rows():
    g = Grid(32, 4 * np.pi)
    u = random_state(g, 1, envelope=gaussian_envelope(2.0), l2=1.0, avoid_planes=True)
    sweep = tail_norm_sweep(u, 2.6, 0.5, 1.5, [2.0, 3.0, 4.0, 6.0])
    tails = [rec.measured for rec in sweep.records]
    assert np.all(np.diff(tails) <= 0)
    assert sweep.slope < 0
    assert len(sweep.rows()) == 4 and sweep.c_of_u0 == pytest.approx(lp.c_of_u0(u, 2.6, 0.5, 1.5))


def test_tail_sweep_errors(grid8):
    u = StateField.zeros(grid8)
    with pytest.raises(ValueError, match="three"):
        tail_norm_sweep(u, 2.6, 0.5, 1.5, [2.0, 3.0])
    with pytest.raises(ValueError, match="increasing"):
        tail_norm_sweep(u, 2.6, 0.5, 1.5, [3.0, 2.0, 4.0])
