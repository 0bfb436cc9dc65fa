import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dplab.experiments import random_field
from dplab.spectral import (
    Field,
    Spectrum,
    apply_multiplier,
    dealiased_product,
    derivative,
    forward,
    helmholtz_grad,
    helmholtz_inverse,
    integral_moment,
    inverse,
    lp_norm,
    make_grid,
)

from oracles import direct_coeffs, kernel_convolution

GRID = make_grid(np.pi, 64)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def _rand(seed, grid=GRID, band=8.0):
    return random_field(grid, np.random.default_rng(seed), band)


class TestGrid:
    def test_rejects_bad_sizes(self):
        for N in (100, 8, 0):
            with pytest.raises(ValueError, match="power of two"):
                make_grid(np.pi, N)
        with pytest.raises(ValueError):
            make_grid(0.0, 64)

    def test_spacing(self):
        g = make_grid(12 * np.pi, 4096)
        assert g.dxi == pytest.approx(1 / 12)
        assert g.x[0] == -g.L and g.x.size == g.N
        assert g.nyquist == pytest.approx(g.N / 2 * g.dxi)

    def test_arrays_read_only(self):
        with pytest.raises(ValueError):
            GRID.x[0] = 1.0


class TestField:
    def test_nonfinite_rejected(self):
        v = np.zeros(64)
        v[3] = np.nan
        with pytest.raises(ValueError, match="finite"):
            Field(GRID, v)

    def test_field_product_refused(self):
        f = Field.constant(GRID, 1.0)
        with pytest.raises(TypeError):
            f * f

    def test_grid_mismatch(self):
        with pytest.raises(ValueError):
            Field.zeros(GRID) + Field.zeros(make_grid(np.pi, 32))


def test_cos3_coefficient():
    f = Field.from_function(GRID, lambda x: np.cos(3 * x))
    c = forward(f).coeffs
    assert c[3] == pytest.approx(0.5, abs=1e-15)
    assert np.abs(np.delete(c, 3)).max() < 1e-15


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_forward_matches_direct_sum(seed):
    f = _rand(seed, band=20.0)
    assert np.allclose(forward(f).coeffs, direct_coeffs(GRID, f.values), atol=1e-14)


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_roundtrip(seed):
    rng = np.random.default_rng(seed)
    f = Field(GRID, rng.standard_normal(GRID.N))
    assert np.abs(inverse(forward(f)).values - f.values).max() < 1e-13


def test_spectrum_full_and_energy():
    f = _rand(3)
    s = forward(f)
    full = s.full()
    assert full.size == GRID.N
    assert s.energy() == pytest.approx(np.mean(f.values**2), rel=1e-12)
    assert np.allclose(np.sort(np.abs(full)), np.sort(np.abs(np.fft.fft(f.values) / GRID.N)))


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_helmholtz_matches_kernel_quadrature(seed):
    f = _rand(seed)
    ref = kernel_convolution(GRID, direct_coeffs(GRID, f.values))
    assert np.abs(helmholtz_inverse(f).values - ref).max() <= 1e-8


def test_helmholtz_closed_form():
    f = Field.from_function(GRID, lambda x: np.cos(2 * x))
    assert np.allclose(helmholtz_inverse(f).values, np.cos(2 * GRID.x) / 5, atol=1e-15)
    assert np.allclose(helmholtz_grad(f).values, -2 * np.sin(2 * GRID.x) / 5, atol=1e-15)


def test_derivative_exact_on_band():
    f = Field.from_function(GRID, lambda x: np.sin(5 * x) + 0.3 * np.cos(x))
    want = 5 * np.cos(5 * GRID.x) - 0.3 * np.sin(GRID.x)
    assert np.abs(derivative(f).values - want).max() < 1e-12


def test_derivative_against_finite_differences():
    # second-order centred differences converge at order >= 1.9 to the spectral derivative
    errs = []
    hs = []
    for N in (64, 128, 256, 512):
        g = make_grid(np.pi, N)
        f = Field.from_function(g, lambda x: np.exp(np.sin(x)))
        fd = (np.roll(f.values, -1) - np.roll(f.values, 1)) / (2 * g.dx)
        errs.append(np.abs(fd - derivative(f).values).max())
        hs.append(g.dx)
    order = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    assert order >= 1.9


def test_nyquist_derivative_zero():
    v = np.cos(32 * GRID.x)  # Nyquist mode on N = 64, L = pi
    assert np.abs(derivative(Field(GRID, v)).values).max() < 1e-12


def test_apply_multiplier_identity_and_nonfinite():
    f = _rand(11)
    s = forward(f)
    assert np.allclose(apply_multiplier(s, lambda xi: np.ones_like(xi)).coeffs, s.coeffs)
    with pytest.raises(ValueError, match="finite"), np.errstate(divide="ignore"):
        apply_multiplier(s, lambda xi: 1.0 / xi)


def test_dealiased_product_exact_in_band():
    f = Field.from_function(GRID, lambda x: np.cos(4 * x))
    prod = dealiased_product(f, f)
    assert np.abs(prod.values - np.cos(4 * GRID.x) ** 2).max() < 1e-14


def test_dealiased_product_drops_high_modes():
    f = Field.from_function(GRID, lambda x: np.cos(15 * x))
    # cos^2(15x) = (1 + cos 30x)/2, and 30 > N/3 so only the mean survives
    assert np.abs(dealiased_product(f, f).values - 0.5).max() < 1e-14


@settings(max_examples=20, deadline=None)
@given(seeds, seeds)
def test_dealiased_product_symmetric(a, b):
    f, g = _rand(a), _rand(b)
    assert np.array_equal(dealiased_product(f, g).values, dealiased_product(g, f).values)


def test_lp_norms():
    f = Field.constant(GRID, -2.0)
    assert lp_norm(f) == 2.0
    assert lp_norm(f, 1) == pytest.approx(4 * np.pi)
    assert lp_norm(f, 2) == pytest.approx(2 * np.sqrt(2 * np.pi))
    assert lp_norm(f, 3) == pytest.approx((8 * 2 * np.pi) ** (1 / 3))
    with pytest.raises(ValueError):
        lp_norm(f, 0.5)


def test_moments():
    f = Field.from_function(GRID, lambda x: 1 + np.cos(x))
    assert integral_moment(f, 1) == pytest.approx(2 * np.pi)
    # (1 + cos)^3 has mean 1 + 3/2
    assert integral_moment(f, 3) == pytest.approx(2 * np.pi * 2.5)
    with pytest.raises(ValueError):
        integral_moment(f, 2)


def test_spectrum_shape_check():
    with pytest.raises(ValueError):
        Spectrum(GRID, np.zeros(10))
