import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dplab.dynamics import (
    SolverConfig,
    _step_plan,
    default_dt,
    energy_functional,
    integrate,
    nonlocal_term,
    rhs,
    rk4_step,
    spectral_tail_fraction,
    v0,
)
from dplab.experiments import random_field
from dplab.spectral import Field, make_grid

GRID = make_grid(np.pi, 128)
seeds = st.integers(min_value=0, max_value=2**32 - 1)


def _rand(seed, scale=0.3):
    f = random_field(GRID, np.random.default_rng(seed), 6.0)
    return f * (scale / np.abs(f.values).max())


def test_cos_rhs_closed_form():
    u = Field.from_function(GRID, np.cos)
    assert np.abs(nonlocal_term(u).values - 0.3 * np.sin(2 * GRID.x)).max() < 1e-14
    assert np.abs(rhs(u).values - 0.8 * np.sin(2 * GRID.x)).max() < 1e-14
    assert np.array_equal(v0(u).values, rhs(u).values)


@pytest.mark.parametrize("c", [0.0, 1.0, -2.5, 7.0])
def test_constants_are_steady(c):
    u = Field.constant(GRID, c)
    assert np.abs(rhs(u).values).max() <= 1e-13
    assert np.abs(rk4_step(u, 0.1).values - c).max() <= 1e-13


def test_energy_functional_cos3():
    u = Field.from_function(GRID, lambda x: np.cos(3 * x))
    assert energy_functional(u) == pytest.approx(13.0, abs=1e-9)


@settings(max_examples=15, deadline=None)
@given(seeds, st.integers(min_value=0, max_value=127))
def test_translation_equivariance(seed, shift):
    u = _rand(seed)
    shifted = Field(GRID, np.roll(u.values, shift))
    assert np.abs(rhs(shifted).values - np.roll(rhs(u).values, shift)).max() < 1e-13


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_reflection_symmetry(seed):
    # v(x) = -u(-x) is mapped to itself by the equation
    u = _rand(seed)
    idx = (-np.arange(GRID.N)) % GRID.N
    v = Field(GRID, -u.values[idx])
    assert np.abs(rhs(v).values + rhs(u).values[idx]).max() < 1e-13


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_rhs_conserves_moments(seed):
    u = _rand(seed)
    r = rhs(u).values
    assert abs(np.sum(r)) * GRID.dx < 1e-13
    # d/dt int u^3 = 3 int u^2 u_t vanishes for band-limited data
    assert abs(np.sum(u.values**2 * r)) * GRID.dx < 1e-15


def test_rk4_local_and_global_order():
    u0 = Field.from_function(GRID, lambda x: 0.3 * np.cos(x))
    ref = u0
    for _ in range(64):
        ref = rk4_step(ref, 0.1 / 64)
    local = [np.abs(rk4_step(u0, h).values - _fine(u0, h)).max() for h in (0.04, 0.02, 0.01)]
    p_local = np.log2(local[0] / local[1]), np.log2(local[1] / local[2])
    assert min(p_local) > 4.7
    glob = []
    for k in (4, 8, 16):
        u = u0
        for _ in range(k):
            u = rk4_step(u, 0.1 / k)
        glob.append(np.abs(u.values - ref.values).max())
    assert np.log2(glob[1] / glob[2]) == pytest.approx(4.0, abs=0.2)


def _fine(u, h, k=64):
    for _ in range(k):
        u = rk4_step(u, h / k)
    return u.values


def test_rk4_rejects_nonpositive_dt():
    with pytest.raises(ValueError):
        rk4_step(Field.zeros(GRID), 0.0)


class TestSolverConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            SolverConfig(dt=0.0)
        with pytest.raises(ValueError):
            SolverConfig(dealias=False)
        with pytest.raises(ValueError):
            SolverConfig(t_end=-1)
        assert SolverConfig(snapshot_times=(0.3, 0.1)).snapshot_times == (0.1, 0.3)


def test_step_plan_hits_marks():
    plan = _step_plan(0.1, 0.003, (0.01, 0.05))
    t = np.cumsum([h for h, _ in plan])
    marks = t[[m for _, m in plan]]
    assert np.allclose(marks, [0.01, 0.05, 0.1], atol=1e-15)
    assert max(h for h, _ in plan) <= 0.003


def test_integrate_snapshots_and_conservation():
    u0 = Field.from_function(GRID, lambda x: 0.25 * np.cos(x) + 0.1 * np.sin(2 * x))
    rec = integrate(u0, SolverConfig(dt=1e-2, t_end=0.5, snapshot_times=(0.2,)))
    assert rec.completed and rec.reason is None
    assert [t for t, _ in rec.snapshots] == [0.0, 0.2, 0.5]
    assert rec.snapshot(0.2) is rec.snapshots[1][1]
    drift = rec.moment_drift()
    assert drift["m1_abs"] < 1e-13 and drift["m3_rel"] < 1e-12
    assert rec.diagnostics["t"][-1] == 0.5
    assert 0 < rec.apriori_ratio() < 2
    with pytest.raises(KeyError):
        rec.snapshot(0.3)


def test_wave_breaking_trips_guard():
    u0 = Field.from_function(GRID, np.cos)
    rec = integrate(u0, SolverConfig(dt=1e-3, t_end=2.0))
    assert not rec.completed
    assert rec.reason in ("gradient", "tail", "nonfinite")
    assert 0.5 < rec.t_stop < 2.0
    assert rec.final is rec.snapshots[-1][1]


def test_default_dt_and_tail():
    u = Field.from_function(GRID, np.cos)
    assert 0 < default_dt(u) <= 1e-3
    assert spectral_tail_fraction(u) < 1e-25
    assert spectral_tail_fraction(Field.zeros(GRID)) == 0.0
    hi = Field.from_function(GRID, lambda x: np.cos(40 * x))
    assert spectral_tail_fraction(hi) == pytest.approx(1.0)
