"""
Degasperis-Procesi dynamics in nonlocal form,

    u_t + u u_x = -(3/2) d/dx (1 - d^2/dx^2)^{-1} (u^2),

advanced by classical RK4 on the dealiased pseudo-spectral discretization.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .littlewood_paley import BesovParams, besov_norm
from .spectral import (
    Field,
    _irfft,
    _rfft,
    dealiased_product,
    derivative,
    helmholtz_grad,
    integral_moment,
    lp_norm,
)

__all__ = [
    "SolverConfig",
    "TrajectoryRecord",
    "nonlocal_term",
    "rhs",
    "v0",
    "energy_functional",
    "rk4_step",
    "integrate",
    "default_dt",
    "spectral_tail_fraction",
]

B1 = BesovParams(1.0, np.inf, 1.0)


def nonlocal_term(u: Field) -> Field:
    """P(u) = -(3/2) d/dx (1 - d^2/dx^2)^{-1} (u^2)."""
    return -1.5 * helmholtz_grad(dealiased_product(u, u))


def _rhs_values(grid, u: np.ndarray) -> np.ndarray:
    # same arithmetic as rhs() below, fused to save transforms
    mask = grid.dealias_mask
    uh = _rfft(grid, u) * mask
    ut = _irfft(grid, uh)
    ux = _irfft(grid, grid._ik * uh)
    adv = _rfft(grid, ut * ux) * mask
    sq = _rfft(grid, ut * ut) * mask
    return _irfft(grid, -adv - 1.5 * grid._helm_grad * sq)


def rhs(u: Field) -> Field:
    """-u u_x + P(u), both products dealiased."""
    return Field(u.grid, _rhs_values(u.grid, u.values))


def v0(u0: Field) -> Field:
    """First-order coefficient P(u0) - u0 d/dx u0 of the short-time expansion."""
    return rhs(u0)


def energy_functional(u0: Field) -> float:
    """1 + ||u0||_inf (||u0||_{B^2_{inf,1}} + ||u0||_inf ||u0||_{B^3_{inf,1}})."""
    a = lp_norm(u0)
    b2 = besov_norm(u0, BesovParams(2.0, np.inf, 1.0))
    b3 = besov_norm(u0, BesovParams(3.0, np.inf, 1.0))
    return 1.0 + a * (b2 + a * b3)


def _rk4_values(grid, u: np.ndarray, dt: float) -> np.ndarray:
    k1 = _rhs_values(grid, u)
    k2 = _rhs_values(grid, u + 0.5 * dt * k1)
    k3 = _rhs_values(grid, u + 0.5 * dt * k2)
    k4 = _rhs_values(grid, u + dt * k3)
    return u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_step(u: Field, dt: float) -> Field:
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    return Field(u.grid, _rk4_values(u.grid, u.values, dt))


def default_dt(u0: Field) -> float:
    return min(1e-3, 0.5 / (u0.grid.nyquist * max(1.0, lp_norm(u0))))


def spectral_tail_fraction(u: Field) -> float:
    """Energy share of the top 10% of retained (2/3-rule) modes."""
    grid = u.grid
    c = _rfft(grid, u.values)
    e = grid._weights * np.abs(c) ** 2
    kmax = grid.N // 3
    total = e[: kmax + 1].sum()
    if total == 0:
        return 0.0
    return float(e[int(math.floor(0.9 * kmax)) + 1 : kmax + 1].sum() / total)


@dataclass(frozen=True)
class SolverConfig:
    dt: float | None = None
    t_end: float = 1.0
    dealias: bool = True
    guard_gradient_max: float = 1e3
    guard_tail_max: float = 1e-6
    snapshot_times: tuple = ()
    diagnostics_every: int = 1

    def __post_init__(self):
        if self.dt is not None and not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.t_end >= 0:
            raise ValueError(f"t_end must be >= 0, got {self.t_end}")
        if not (self.guard_gradient_max > 0 and self.guard_tail_max > 0):
            raise ValueError("guard thresholds must be positive")
        if self.diagnostics_every < 1:
            raise ValueError("diagnostics_every must be >= 1")
        if not self.dealias:
            raise ValueError("only the dealiased discretization is implemented")
        object.__setattr__(self, "snapshot_times", tuple(sorted(float(t) for t in self.snapshot_times)))


@dataclass(frozen=True)
class TrajectoryRecord:
    """Snapshots and per-step diagnostics of one run.

    ``diagnostics`` is a structured array with fields t, b1, linf, grad,
    V, m1, m3. ``termination`` is ``"completed"`` or ``"guard_tripped"``
    with ``reason`` and ``t_stop`` filled in for the latter.
    """

    snapshots: list
    diagnostics: np.ndarray
    termination: str
    reason: str | None = None
    t_stop: float | None = None
    dt: float = 0.0
    steps: int = 0

    @property
    def completed(self) -> bool:
        return self.termination == "completed"

    def snapshot(self, t: float) -> Field:
        for ts, f in self.snapshots:
            if abs(ts - t) <= 1e-12 * max(1.0, abs(t)):
                return f
        raise KeyError(f"no snapshot at t={t}")

    @property
    def final(self) -> Field:
        return self.snapshots[-1][1]

    def moment_drift(self) -> dict:
        d = self.diagnostics
        return {
            "m1_abs": float(np.max(np.abs(d["m1"] - d["m1"][0]))),
            "m3_rel": float(np.max(np.abs(d["m3"] - d["m3"][0])) / max(1.0, abs(d["m3"][0]))),
        }

    def apriori_ratio(self) -> float:
        """max_t ||u(t)||_{B^1} / (||u0||_{B^1} exp(V(t)))."""
        d = self.diagnostics
        if d["b1"][0] == 0:
            return 0.0
        return float(np.max(d["b1"] / (d["b1"][0] * np.exp(d["V"]))))


_DIAG_DTYPE = [("t", float), ("b1", float), ("linf", float), ("grad", float), ("V", float), ("m1", float), ("m3", float)]


def _diag_row(t: float, u: Field, V: float, b1: float) -> tuple:
    return (t, b1, lp_norm(u), lp_norm(derivative(u)), V, integral_moment(u, 1), integral_moment(u, 3))


def _step_plan(t_end: float, dt: float, snapshot_times: Sequence[float]) -> list[tuple[float, bool]]:
    """Step sizes that land exactly on every snapshot time and on t_end."""
    marks = sorted({t for t in snapshot_times if 0 < t <= t_end} | {t_end})
    plan = []
    t = 0.0
    for mark in marks:
        span = mark - t
        if span <= 0:
            continue
        k = max(1, math.ceil(span / dt - 1e-9))
        h = span / k
        plan.extend([(h, False)] * (k - 1))
        plan.append((h, True))
        t = mark
    return plan


def integrate(u0: Field, cfg: SolverConfig) -> TrajectoryRecord:
    """Advance u0 to cfg.t_end with RK4, stopping early if a guard trips.

    Snapshots are kept at t = 0, at each requested snapshot time and at the
    final time. Each interval between marks is split into equal steps no
    longer than dt, so marks are hit exactly.
    """
    grid = u0.grid
    dt = cfg.dt if cfg.dt is not None else default_dt(u0)
    wanted = set(cfg.snapshot_times)
    plan = _step_plan(cfg.t_end, dt, cfg.snapshot_times)

    u = u0
    t = 0.0
    b1 = besov_norm(u, B1)
    V = 0.0
    rows = [_diag_row(t, u, V, b1)]
    snaps = [(0.0, u0)]
    termination, reason, t_stop = "completed", None, None
    steps = 0
    for i, (h, at_mark) in enumerate(plan):
        new = _rk4_values(grid, u.values, h)
        t_new = t + h
        if not np.all(np.isfinite(new)):
            termination, reason, t_stop = "guard_tripped", "nonfinite", t_new
            break
        u = Field(grid, new)
        t = t_new
        steps += 1
        last = i == len(plan) - 1
        if at_mark:
            # snap accumulated rounding onto the requested time
            t = min(wanted | {cfg.t_end}, key=lambda m: abs(m - t))
        if at_mark or last or steps % cfg.diagnostics_every == 0:
            b1_new = besov_norm(u, B1)
            V += 0.5 * (t - rows[-1][0]) * (b1 + b1_new)
            b1 = b1_new
            rows.append(_diag_row(t, u, V, b1))
            grad = rows[-1][3]
            if grad > cfg.guard_gradient_max:
                termination, reason, t_stop = "guard_tripped", "gradient", t
            elif spectral_tail_fraction(u) > cfg.guard_tail_max:
                termination, reason, t_stop = "guard_tripped", "tail", t
        if at_mark:
            snaps.append((t, u))
        if termination != "completed":
            break
    if snaps[-1][0] != t:
        snaps.append((t, u))
    return TrajectoryRecord(
        snapshots=snaps,
        diagnostics=np.array(rows, dtype=_DIAG_DTYPE),
        termination=termination,
        reason=reason,
        t_stop=t_stop,
        dt=dt,
        steps=steps,
    )
