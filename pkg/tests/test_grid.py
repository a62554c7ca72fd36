import numpy as np
import pytest

from rotowave.grid import (
    Grid,
    GridError,
    StateField,
    derivative,
    divergence,
    from_padded,
    gradient,
    hermitian_defect,
    inner_product,
    make_grid,
    padded_physical,
    physical_inner_product,
    reflect,
    to_physical,
    to_spectral,
)


def test_unit_spacing_lattice():
    g = make_grid(8, 2 * np.pi)
    assert g.dk == 1.0
    assert sorted(set(g.k1d.tolist())) == list(range(-4, 4))
    np.testing.assert_array_equal(g.xi[0].ravel(), g.k1d.astype(float))


def test_spacing_half():
    g = make_grid(16, 4 * np.pi)
    assert g.dk == pytest.approx(0.5)
    assert np.all(np.abs(np.diff(np.sort(g.xi[1].ravel()))) == pytest.approx(0.5))


@pytest.mark.parametrize(
    "n, length, message",
    [(7, 1.0, "n must be even"), (6, 1.0, "at least 8"), (8, 0.0, "positive"), (8, -2.0, "positive")],
)
def test_invalid_grids(n, length, message):
    with pytest.raises(GridError, match=message):
        make_grid(n, length)


def test_origin_wavevector(grid16):
    np.testing.assert_array_equal(grid16.wavevector((0, 0, 0)), np.zeros(3))
    assert grid16.index_of((0, 0, 0)) == (0, 0, 0)
    with pytest.raises(GridError):
        grid16.index_of((8, 0, 0))


def test_negation_closed_off_nyquist(grid8):
    k = grid8.k1d
    inside = k[k != -4]
    assert set((-inside).tolist()) == set(inside.tolist())


def test_constant_is_dc(grid8):
    u = to_spectral(grid8, np.full(grid8.shape, 3.5))
    nz = np.argwhere(np.abs(u.coeffs) > 1e-14)
    assert nz.tolist() == [[0, 0, 0, 0]]
    assert u.coeffs[0, 0, 0, 0] == pytest.approx(3.5)


def test_pure_mode_single_coefficient(grid8):
    x1 = grid8.x[0] + 0 * grid8.x[1] + 0 * grid8.x[2]
    u = to_spectral(grid8, np.exp(1j * x1))
    idx = np.argwhere(np.abs(u.coeffs) > 1e-12)
    assert idx.tolist() == [[0, 1, 0, 0]]
    assert u.coeffs[0, 1, 0, 0] == pytest.approx(1.0)


def test_round_trip(grid16, rng):
    f = rng.standard_normal((4,) + grid16.shape)
    back = to_physical(to_spectral(grid16, f), real=True)
    assert np.max(np.abs(back - f)) < 1e-12 * np.max(np.abs(f))


def test_shape_mismatch(grid8):
    with pytest.raises(GridError):
        to_spectral(grid8, np.zeros((4, 8, 8)))
    with pytest.raises(GridError):
        StateField(grid8, np.zeros((4, 16, 16, 16)))


def test_parseval(grid16, rng):
    f = rng.standard_normal((4,) + grid16.shape)
    u = to_spectral(grid16, f)
    phys = np.sqrt(grid16.cell_volume * np.sum(f**2))
    assert u.norm() == pytest.approx(phys, rel=1e-12)


def test_inner_product_orthogonal_modes(grid8):
    a = StateField.plane_wave(grid8, (1, 0, 0))
    b = StateField.plane_wave(grid8, (0, 2, 0))
    assert abs(inner_product(a, b)) == 0.0


def test_unit_mode_has_box_volume(grid16):
    a = StateField.plane_wave(grid16, (1, 2, -3))
    assert inner_product(a, a).real == pytest.approx(grid16.volume, rel=1e-14)


def test_inner_product_matches_quadrature(grid16, rng):
    f = to_spectral(grid16, rng.standard_normal((4,) + grid16.shape))
    g = to_spectral(grid16, rng.standard_normal((4,) + grid16.shape))
    spec = inner_product(f, g)
    phys = physical_inner_product(f, g)
    assert abs(spec - phys) < 1e-12 * abs(phys)
    assert inner_product(f, f).imag == pytest.approx(0.0, abs=1e-12)
    assert inner_product(f, f).real >= 0


def test_inner_product_grid_mismatch(grid8, grid16):
    with pytest.raises(GridError):
        inner_product(StateField.zeros(grid8), StateField.zeros(grid16))


def test_second_derivative_symbol(grid16, rng):
    u = to_spectral(grid16, rng.standard_normal(grid16.shape))
    for axis in range(3):
        twice = derivative(derivative(u, axis), axis)
        sym = -(grid16.xi[axis] ** 2) * (grid16.k1d != -8).reshape(grid16.xi[axis].shape)
        np.testing.assert_allclose(twice.coeffs, u.coeffs * sym, rtol=1e-15, atol=0)


def test_derivative_of_sine(grid16):
    x1 = grid16.x[0] + 0 * grid16.x[1] + 0 * grid16.x[2]
    u = to_spectral(grid16, np.sin(2 * grid16.dk * x1))
    du = to_physical(derivative(u, 0), real=True)[0]
    np.testing.assert_allclose(du, 2 * grid16.dk * np.cos(2 * grid16.dk * x1), atol=1e-12)


def test_gradient_divergence(grid16, rng):
    f = to_spectral(grid16, rng.standard_normal(grid16.shape))
    lap = divergence(gradient(f))
    # each d/dx_j drops only its own Nyquist plane
    sym = sum(-(grid16.xi[j] ** 2) * (grid16.k1d != -8).reshape(grid16.xi[j].shape) for j in range(3))
    expected = f.coeffs[0] * sym
    np.testing.assert_allclose(lap.coeffs[0], expected, atol=1e-12)
    with pytest.raises(GridError):
        gradient(StateField.zeros(grid16, 2))
    with pytest.raises(GridError):
        divergence(StateField.zeros(grid16, 2))


def test_reality_under_multipliers(grid16, rng):
    u = to_spectral(grid16, rng.standard_normal((4,) + grid16.shape))
    assert hermitian_defect(u) < 1e-14
    for axis in range(3):
        assert hermitian_defect(derivative(u, axis)) < 1e-13
    assert hermitian_defect(u.multiply(np.exp(-grid16.xi_norm))) < 1e-14


def test_reflect_is_involution(grid8, rng):
    c = rng.standard_normal((2,) + grid8.shape)
    np.testing.assert_array_equal(reflect(reflect(c)), c)
    k = np.zeros(grid8.shape)
    k[grid8.index_of((1, -2, 3))] = 1
    assert reflect(k)[grid8.index_of((-1, 2, -3))] == 1


def test_padded_transform_roundtrip(grid16, rng):
    f = rng.standard_normal((3,) + grid16.shape)
    u = to_spectral(grid16, f)
    c = u.coeffs * ~grid16.nyquist_mask
    padded = padded_physical(c)
    assert padded.shape == (3, 32, 32, 32)
    np.testing.assert_allclose(from_padded(padded, 16), c, atol=1e-14)


def test_padded_product_is_exact(grid16):
    # (cos a x)(cos b x) = (cos((a-b)x) + cos((a+b)x)) / 2, with a + b above the n-grid band
    g = grid16
    x1 = g.x[0] + 0 * g.x[1] + 0 * g.x[2]
    a, b = 5 * g.dk, 6 * g.dk
    c = to_spectral(g, np.stack([np.cos(a * x1), np.cos(b * x1)])).coeffs
    p = padded_physical(c)
    prod = from_padded((p[0] * p[1])[None], 16)[0]
    expected = to_spectral(g, 0.5 * np.cos((b - a) * x1)).coeffs[0]
    # the (a + b) = 11 harmonic is not representable on the 16-grid and is dropped
    np.testing.assert_allclose(prod, expected, atol=1e-14)


def test_field_arithmetic(grid8, rng):
    a = StateField(grid8, rng.standard_normal((4,) + grid8.shape))
    b = StateField(grid8, rng.standard_normal((4,) + grid8.shape))
    np.testing.assert_allclose((a + b - b).coeffs, a.coeffs)
    np.testing.assert_allclose((2 * a).coeffs, (a * 2).coeffs)
    np.testing.assert_allclose((-a).coeffs, -a.coeffs)
    assert a.component(3).ncomp == 1
    with pytest.raises(GridError):
        a + StateField.zeros(Grid(16, 1.0))
