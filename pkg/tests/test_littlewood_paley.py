import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dplab.experiments import random_field
from dplab.littlewood_paley import (
    BesovParams,
    besov_norm,
    block,
    block_norms,
    block_operator_norm,
    blocks,
    build_family,
    chi,
    interpolation_ratio,
    low_cutoff,
    phi_lp,
    product_estimate_ratio,
    smooth_step,
)
from dplab.spectral import Field, derivative, lp_norm, make_grid

GRID = make_grid(np.pi, 256)
FAMILY = build_family()
seeds = st.integers(min_value=0, max_value=2**32 - 1)


def _rand(seed, band=40.0, grid=GRID):
    return random_field(grid, np.random.default_rng(seed), band)


class TestCutoffs:
    def test_smooth_step_symmetry(self):
        t = np.linspace(-0.5, 1.5, 401)
        assert np.allclose(smooth_step(t) + smooth_step(1 - t), 1.0, atol=1e-15)
        assert smooth_step(0.0) == 0.0 and smooth_step(1.0) == 1.0

    def test_chi_support(self):
        assert np.all(chi(np.linspace(-1, 1, 101)) == 1.0)
        assert np.all(chi(np.array([4 / 3, 1.5, -2.0])) == 0.0)
        assert chi(7 / 6) == pytest.approx(0.5, abs=1e-15)

    def test_phi_values(self):
        assert phi_lp(1.5) == pytest.approx(1.0, abs=1e-15)
        assert np.all(phi_lp(np.array([0.5, 0.7, 3.0])) == 0.0)
        xi = np.linspace(0, 3, 1001)
        assert np.all((phi_lp(xi) >= 0) & (phi_lp(xi) <= 1))

    def test_partition_of_unity(self):
        jm = FAMILY.j_max(GRID)
        total = sum(FAMILY.symbol(j, GRID.xi) for j in range(-1, jm + 1))
        assert np.abs(total - 1).max() <= 1e-12

    def test_symbol_outside_range(self):
        assert np.all(FAMILY.symbol(-2, GRID.xi) == 0)


def test_block_out_of_range_zero():
    f = _rand(0)
    assert np.all(block(f, -3).values == 0)
    assert np.all(block(f, FAMILY.j_max(GRID) + 1).values == 0)


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_reconstruction(seed):
    f = _rand(seed)
    assert np.abs(blocks(f).sum(axis=0) - f.values).max() <= 1e-10


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_quasi_orthogonality(seed):
    f = _rand(seed)
    jm = FAMILY.j_max(GRID)
    worst = 0.0
    for j in range(-1, jm + 1):
        bj = block(f, j)
        for k in range(-1, jm + 1):
            if abs(j - k) >= 2:
                worst = max(worst, lp_norm(block(bj, k)))
    assert worst <= 1e-12


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_bernstein(seed):
    f = _rand(seed)
    for j in range(0, FAMILY.j_max(GRID) + 1):
        b = block(f, j)
        n = lp_norm(b)
        if n > 1e-12:
            assert lp_norm(derivative(b)) <= 8 / 3 * 2.0**j * n * (1 + 1e-6)


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_block_bounded_by_operator_norm(seed):
    # the blocks are not contractions on L^inf; the exact bound is the kernel's l^1 norm
    f = _rand(seed)
    norms = block_norms(f)
    for j in range(-1, FAMILY.j_max(GRID) + 1):
        assert norms[j + 1] <= block_operator_norm(GRID, j) * lp_norm(f) * (1 + 1e-12)


def test_operator_norms_uniform():
    ops = [block_operator_norm(GRID, j) for j in range(-1, FAMILY.j_max(GRID) + 1)]
    assert max(ops) < 2.5


def test_low_cutoff_telescopes():
    f = _rand(5)
    for n in range(0, 5):
        direct = blocks(f)[: n + 1].sum(axis=0)
        assert np.abs(low_cutoff(f, n).values - direct).max() < 1e-12
    with pytest.raises(ValueError):
        low_cutoff(f, -1)


class TestClosedForms:
    def test_cos3_b1(self):
        # xi = 3 lies where phi(xi/2) = 1, i.e. only block j = 1
        f = Field.from_function(GRID, lambda x: np.cos(3 * x))
        assert besov_norm(f, BesovParams(1.0)) == pytest.approx(2.0, abs=1e-12)

    def test_constant(self):
        f = Field.constant(GRID, -3.0)
        assert besov_norm(f, (1.0, np.inf, 1.0)) == pytest.approx(1.5, abs=1e-14)

    def test_interpolation_ratio_constant(self):
        # a single block at j = -1: B1/sqrt(B0 B2) = (c/2) / sqrt(c * c/4) = 1
        assert interpolation_ratio(Field.constant(GRID, 2.0)) == pytest.approx(1.0)

    def test_r_inf_is_max(self):
        f = _rand(2)
        n = block_norms(f)
        j = np.arange(-1, n.size - 1)
        assert besov_norm(f, BesovParams(0.5, np.inf, np.inf)) == pytest.approx((2.0 ** (0.5 * j) * n).max())


def test_bad_params():
    with pytest.raises(ValueError):
        BesovParams(1.0, 0.5, 1.0)
    with pytest.raises(ValueError):
        BesovParams(1.0, np.inf, 0.0)


@settings(max_examples=20, deadline=None)
@given(seeds, st.floats(min_value=-5, max_value=5).filter(lambda a: abs(a) > 1e-3))
def test_norm_homogeneous(seed, a):
    f = _rand(seed)
    prm = BesovParams(1.0)
    assert besov_norm(a * f, prm) == pytest.approx(abs(a) * besov_norm(f, prm), rel=1e-12)


@settings(max_examples=20, deadline=None)
@given(seeds, seeds)
def test_triangle_inequality(a, b):
    f, g = _rand(a), _rand(b)
    prm = BesovParams(1.0, np.inf, 1.0)
    assert besov_norm(f + g, prm) <= besov_norm(f, prm) + besov_norm(g, prm) + 1e-12


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_norm_monotone_in_s(seed):
    f = _rand(seed)
    vals = [besov_norm(f, BesovParams(s)) for s in (0.0, 0.5, 1.0, 2.0)]
    # blocks j >= 0 get heavier weights; block -1 gets lighter ones
    hi = [besov_norm_high(f, s) for s in (0.0, 0.5, 1.0, 2.0)]
    assert all(x <= y + 1e-14 for x, y in zip(hi, hi[1:]))
    assert all(np.isfinite(vals))


def besov_norm_high(f, s):
    n = block_norms(f)[1:]
    return float((2.0 ** (s * np.arange(n.size)) * n).sum())


@settings(max_examples=20, deadline=None)
@given(seeds, seeds)
def test_product_ratio_finite(a, b):
    r = product_estimate_ratio(_rand(a, 8.0), _rand(b, 8.0), 1.0)
    assert np.isfinite(r) and r > 0


def test_product_ratio_zero_fields():
    z = Field.zeros(GRID)
    with pytest.raises(ZeroDivisionError):
        product_estimate_ratio(z, z, 1.0)
    with pytest.raises(ValueError):
        product_estimate_ratio(z, z, 0.0)
    with pytest.raises(ZeroDivisionError):
        interpolation_ratio(z)
