"""
Reproducible experiments on the DP data-to-solution map.

Every ``exp_*`` function returns an :class:`ExperimentReport`. Its verdicts
are recomputed from the report tables alone by the matching ``verdicts_*``
function, so a checker holding only the CSV files and the config echo can
re-derive every pass/fail flag (see :func:`recheck`).

Experiment ids:

    E1  family_scaling      packet norm scalings in n
    E2  product_lower       lower bound for ||g_n d/dx f_n||_{B^1_{inf,inf}}
    E3  expansion           O(t^2) residual of the first-order expansion
    E4a nonuniform          separation of S_t(f_n + g_n) and S_t(f_n)
    E4b stability           L^inf Lipschitz ratios for random smooth pairs
    E5  mollify             S_t(S_N u0) -> S_t(u0)
    E6  validation          solver convergence, conservation, a priori ratio
    L2  lemma_constants     empirical product / interpolation constants
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .config import (
    Config,
    ExpansionConfig,
    FamilyConfig,
    LemmaConfig,
    MollifyConfig,
    NonuniformConfig,
    StabilityConfig,
    ValidationConfig,
    config_to_dict,
)
from .dynamics import SolverConfig, default_dt, energy_functional, integrate, rhs, rk4_step, v0
from .littlewood_paley import (
    BesovParams,
    besov_norm,
    besov_norm_from_blocks,
    block_norms,
    blocks,
    interpolation_ratio,
    low_cutoff,
    product_estimate_ratio,
)
from .spectral import Field, Grid1D, _irfft, lp_norm, make_grid
from .wavepackets import carrier, grid_for_packets, make_envelope, make_fn, make_gn, packet_diagnostics

__all__ = [
    "SlopeFit",
    "Table",
    "ExperimentReport",
    "fit_loglog_slope",
    "field_from_spec",
    "random_field",
    "exp_family_scaling",
    "exp_product_lower",
    "exp_expansion",
    "exp_nonuniform",
    "exp_linf_stability",
    "exp_mollification",
    "exp_solver_validation",
    "exp_lemma_constants",
    "recheck",
    "EXPERIMENTS",
]

B1 = BesovParams(1.0, np.inf, 1.0)


@dataclass(frozen=True)
class SlopeFit:
    points: tuple
    slope: float
    intercept: float
    max_residual: float


def fit_loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> SlopeFit:
    """Least-squares line through (log x, log y)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.size < 3:
        raise ValueError("need two equal-length sequences with at least 3 points")
    if np.any(xs <= 0) or np.any(ys <= 0) or not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
        raise ValueError("log-log fit needs finite positive data")
    lx, ly = np.log(xs), np.log(ys)
    A = np.column_stack([lx, np.ones_like(lx)])
    (slope, intercept), *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - (slope * lx + intercept)
    return SlopeFit(tuple(zip(lx.tolist(), ly.tolist())), float(slope), float(intercept), float(np.abs(resid).max()))


@dataclass
class Table:
    columns: tuple
    rows: list = field(default_factory=list)

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def where(self, **match) -> "Table":
        idx = {k: self.columns.index(k) for k in match}
        rows = [r for r in self.rows if all(r[idx[k]] == v for k, v in match.items())]
        return Table(self.columns, rows)


@dataclass
class ExperimentReport:
    experiment: str
    name: str
    config: dict
    tables: dict
    slopes: dict = field(default_factory=dict)
    constants: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    notices: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.verdicts) and all(self.verdicts.values())

    def summary(self) -> str:
        failed = [k for k, v in self.verdicts.items() if not v]
        status = "PASS" if self.passed else "FAIL"
        extra = f" (failed: {', '.join(failed)})" if failed else ""
        return f"{self.experiment} {self.name}: {status}{extra}"


def _pmap(fn: Callable, items: list, workers: int) -> list:
    if workers <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def _variation(values) -> float:
    v = np.asarray(values, dtype=float)
    return float(v.max() / v.min())


# ----------------------------------------------------------------------------
# initial data
# ----------------------------------------------------------------------------


def field_from_spec(spec: str, grid: Grid1D, env=None) -> Field:
    """Build initial data from a ``+``-joined list of terms.

    Terms: ``cos:k[:a]``, ``sin:k[:a]``, ``const:c``, ``fn:n``, ``gn:n`` and
    ``packet:n`` (= f_n + g_n). Packet terms need ``L >= 12 pi``.
    """
    total = np.zeros(grid.N)
    for term in spec.replace(" ", "").split("+"):
        kind, _, rest = term.partition(":")
        args = rest.split(":") if rest else []
        try:
            if kind in ("cos", "sin"):
                k = float(args[0])
                amp = float(args[1]) if len(args) > 1 else 1.0
                if abs(k / grid.dxi - round(k / grid.dxi)) > 1e-9:
                    raise ValueError(f"frequency {k:g} is not periodic on [-{grid.L:g}, {grid.L:g})")
                total += amp * (np.cos if kind == "cos" else np.sin)(k * grid.x)
            elif kind == "const":
                total += float(args[0])
            elif kind in ("fn", "gn", "packet"):
                n = int(args[0])
                env = env if env is not None else make_envelope(grid)
                if kind in ("fn", "packet"):
                    total += make_fn(env, n).values
                if kind in ("gn", "packet"):
                    total += make_gn(env, n).values
            else:
                raise ValueError(f"unknown term kind {kind!r}")
        except (IndexError, ValueError) as exc:
            raise ValueError(f"bad initial-data term {term!r}: {exc}") from None
    return Field(grid, total)


def _spec_packet_index(spec: str) -> int:
    n = 0
    for term in spec.replace(" ", "").split("+"):
        kind, _, rest = term.partition(":")
        if kind in ("fn", "gn", "packet"):
            n = max(n, int(rest.split(":")[0]))
    return n


def _spec_frequency(spec: str) -> float:
    top = 0.0
    for term in spec.replace(" ", "").split("+"):
        kind, _, rest = term.partition(":")
        if kind in ("cos", "sin"):
            top = max(top, abs(float(rest.split(":")[0])))
        elif kind in ("fn", "packet"):
            top = max(top, carrier(int(rest.split(":")[0])) + 0.5)
    return top


def packet_grid(cfg: Config, n_max: int, min_frequency: float = 0.0) -> Grid1D:
    """Grid for packet experiments: explicit ``grid.N`` or the automatic choice."""
    if cfg.grid.N is not None:
        return make_grid(cfg.grid.L, cfg.grid.N)
    grid = grid_for_packets(max(n_max, 1), cfg.grid.L, cfg.grid.nyquist_factor)
    while grid.nyquist < cfg.grid.nyquist_factor * min_frequency:
        grid = make_grid(grid.L, grid.N * 2)
    return grid


def random_field(grid: Grid1D, rng: np.random.Generator, band: float = 8.0) -> Field:
    """Random real trigonometric polynomial with spectrum in |xi| <= band.

    Coefficient m has standard complex normal entries scaled by 1/(1 + m^2).
    """
    mmax = int(math.floor(band / grid.dxi + 1e-9))
    if mmax >= grid.N // 3:
        raise ValueError("band exceeds the dealiased range of the grid")
    m = np.arange(mmax + 1)
    c = (rng.standard_normal(mmax + 1) + 1j * rng.standard_normal(mmax + 1)) / (1.0 + m**2)
    c[0] = c[0].real
    coeffs = np.zeros(grid.N // 2 + 1, dtype=complex)
    coeffs[: mmax + 1] = c
    return Field(grid, _irfft(grid, coeffs))


def _solver(cfg: Config, t_end: float, snapshot_times=(), dt=None) -> SolverConfig:
    return SolverConfig(
        dt=dt if dt is not None else cfg.solver.dt,
        t_end=t_end,
        guard_gradient_max=cfg.solver.guard_gradient_max,
        guard_tail_max=cfg.solver.guard_tail_max,
        snapshot_times=tuple(snapshot_times),
    )


def _every_step(t_end: float, dt: float) -> np.ndarray:
    k = max(1, math.ceil(t_end / dt - 1e-9))
    return t_end * np.arange(1, k + 1) / k


def _meta(grid: Grid1D, started: float, **extra) -> dict:
    return dict(L=grid.L, N=grid.N, wall_clock_s=round(time.perf_counter() - started, 3), **extra)


# ----------------------------------------------------------------------------
# E1 / E2: packet norms
# ----------------------------------------------------------------------------


def verdicts_family_scaling(tables: dict, fc: FamilyConfig):
    t = tables["family_scaling"]
    slopes, verdicts = {}, {}
    sigmas = sorted(set(t.column("sigma")))
    for s in sigmas:
        sub = t.where(sigma=s)
        x = 2.0 ** np.asarray(sub.column("n"), dtype=float)
        sf = fit_loglog_slope(x, sub.column("norm_f"))
        sg = fit_loglog_slope(x, sub.column("norm_g"))
        slopes[f"norm_f_sigma{s:g}"] = sf
        slopes[f"norm_g_sigma{s:g}"] = sg
        verdicts[f"f_slope_sigma{s:g}"] = abs(sf.slope - (s - 1.0)) <= fc.slope_tol
        verdicts[f"g_slope_sigma{s:g}"] = abs(sg.slope + 1.0) <= fc.slope_tol
    sub = t.where(sigma=sigmas[0])
    x = 2.0 ** np.asarray(sub.column("n"), dtype=float)
    sl = fit_loglog_slope(x, sub.column("linf_f"))
    slopes["linf_f"] = sl
    verdicts["linf_f_slope"] = abs(sl.slope + 1.0) <= fc.linf_slope_tol
    return verdicts, slopes, {}


def _family_rows(cfg: Config):
    fc = cfg.family
    grid = packet_grid(cfg, fc.n_max)
    env = make_envelope(grid)
    return grid, env, packet_diagnostics(env, range(fc.n_min, fc.n_max + 1), fc.sigma)


def exp_family_scaling(cfg: Config, workers: int = 1, _rows=None) -> ExperimentReport:
    started = time.perf_counter()
    grid, env, rows = _rows or _family_rows(cfg)
    cols = ("n", "sigma", "norm_f", "norm_g", "linf_f", "linf_g")
    table = Table(cols, [tuple(r[c] for c in cols) for r in rows])
    tables = {"family_scaling": table}
    verdicts, slopes, _ = verdicts_family_scaling(tables, cfg.family)
    constants = {
        "phi0": env.phi0,
        "envelope_tail_ratio": env.tail_ratio,
        "C_f": max(r["norm_f"] / (2.0 ** ((r["sigma"] - 1) * r["n"]) * env.phi0) for r in rows),
        "C_g": max(r["norm_g"] / (2.0 ** (-(r["n"] + r["sigma"])) * env.phi0) for r in rows),
    }
    return ExperimentReport(
        "E1", "family_scaling", config_to_dict(cfg), tables, slopes, constants, verdicts,
        meta=_meta(grid, started),
    )


def verdicts_product_lower(tables: dict, fc: FamilyConfig):
    t = tables["product_lower"]
    x = 2.0 ** np.asarray(t.column("n"), dtype=float)
    fg = np.asarray(t.column("prod_fg"))
    gg = np.asarray(t.column("prod_gg"))
    sfg = fit_loglog_slope(x, fg)
    sgg = fit_loglog_slope(x, gg)
    verdicts = {
        "positive": bool(np.all(fg > 0)),
        "no_decay": bool(fg.min() >= fc.product_min_over_median * np.median(fg)),
        "slope_flat": abs(sfg.slope) <= fc.product_slope_tol,
        "contrast_decays": sgg.slope <= fc.contrast_slope_max,
    }
    return verdicts, {"prod_fg": sfg, "prod_gg": sgg}, {"M1": float(fg.min())}


def exp_product_lower(cfg: Config, workers: int = 1, _rows=None) -> ExperimentReport:
    started = time.perf_counter()
    grid, env, rows = _rows or _family_rows(cfg)
    seen = {}
    for r in rows:
        seen.setdefault(r["n"], (r["n"], r["prod_fg"], r["prod_gg"]))
    tables = {"product_lower": Table(("n", "prod_fg", "prod_gg"), [seen[n] for n in sorted(seen)])}
    verdicts, slopes, constants = verdicts_product_lower(tables, cfg.family)
    return ExperimentReport(
        "E2", "product_lower", config_to_dict(cfg), tables, slopes, constants, verdicts,
        meta=_meta(grid, started),
    )


# ----------------------------------------------------------------------------
# E3: first-order expansion
# ----------------------------------------------------------------------------


def verdicts_expansion(tables: dict, ec: ExpansionConfig):
    t = tables["expansion"]
    verdicts, slopes, constants = {}, {}, {}
    for uid in ec.u0:
        sub = t.where(u0_id=uid)
        ts, res, t2e = (np.asarray(sub.column(c)) for c in ("t", "residual", "t_squared_times_E"))
        ok = len(ts) >= 3 and np.all(res > 0)
        if ok:
            fit = fit_loglog_slope(ts, res)
            slopes[uid] = fit
            verdicts[f"slope_{uid}"] = ec.slope_low <= fit.slope <= ec.slope_high
            constants[f"C_{uid}"] = float(np.max(res / t2e))
        else:
            verdicts[f"slope_{uid}"] = False
    return verdicts, slopes, constants


def _expansion_cell(args):
    uid, cfg, grid, times = args
    u0 = field_from_spec(uid, grid)
    rec = integrate(u0, _solver(cfg, times[-1], times))
    first = v0(u0)
    E = energy_functional(u0)
    rows, skipped = [], []
    for t in times:
        if rec.completed or (rec.t_stop is not None and t < rec.t_stop):
            r = besov_norm(rec.snapshot(t) - u0 - t * first, B1)
            rows.append((uid, float(t), r, t * t * E))
        else:
            skipped.append(float(t))
    return uid, rows, skipped, rec.reason, E


def exp_expansion(cfg: Config, workers: int = 1) -> ExperimentReport:
    started = time.perf_counter()
    ec = cfg.experiment.expansion
    n_max = max((_spec_packet_index(s) for s in ec.u0), default=0)
    grid = packet_grid(cfg, n_max, max(_spec_frequency(s) for s in ec.u0))
    times = tuple(np.geomspace(ec.t_min, ec.t_max, ec.t_points).tolist())
    results = _pmap(_expansion_cell, [(uid, cfg, grid, times) for uid in ec.u0], workers)
    rows, notices, constants = [], [], {}
    for uid, r, skipped, reason, E in sorted(results, key=lambda z: ec.u0.index(z[0])):
        rows.extend(r)
        constants[f"E_{uid}"] = E
        if skipped:
            notices.append(f"{uid}: guard tripped ({reason}); omitted t = {skipped}")
    tables = {"expansion": Table(("u0_id", "t", "residual", "t_squared_times_E"), rows)}
    verdicts, slopes, c2 = verdicts_expansion(tables, ec)
    constants.update(c2)
    return ExperimentReport(
        "E3", "expansion", config_to_dict(cfg), tables, slopes, constants, verdicts, notices,
        meta=_meta(grid, started),
    )


# ----------------------------------------------------------------------------
# E4a: non-uniform dependence
# ----------------------------------------------------------------------------


def verdicts_nonuniform(tables: dict, nc: NonuniformConfig):
    t = tables["nonuniform"]
    verdicts, slopes, constants = {}, {}, {}
    ns = sorted(set(t.column("n")))
    d0 = [t.where(n=n).column("d0")[0] for n in ns]
    x = 2.0 ** np.asarray(ns, dtype=float)
    fit = fit_loglog_slope(x, d0)
    slopes["d0"] = fit
    verdicts["d0_slope"] = abs(fit.slope + 1.0) <= nc.d0_slope_tol
    D_all = np.asarray(t.column("D"))
    Db_all = np.asarray(t.column("D_blockwise"))
    verdicts["two_route_consistency"] = bool(np.all(np.abs(D_all - Db_all) <= 1e-10 * np.maximum(1.0, D_all)))
    for ts in sorted(set(t.column("t_star"))):
        sub = t.where(t_star=ts)
        if sorted(sub.column("n")) != ns:
            verdicts[f"lower_bound_t{ts:g}"] = False
            verdicts[f"amplification_t{ts:g}"] = False
            continue
        D = np.asarray(sub.column("D"))
        kappa = D / ts
        flow = np.asarray(sub.column("flow_sep")) / ts
        constants[f"kappa_t{ts:g}"] = float(kappa.min())
        constants[f"kappa_variation_t{ts:g}"] = _variation(kappa)
        constants[f"flow_rate_min_t{ts:g}"] = float(flow.min())
        constants[f"flow_rate_variation_t{ts:g}"] = _variation(flow)
        verdicts[f"lower_bound_t{ts:g}"] = bool(kappa.min() > 0 and _variation(kappa) <= nc.kappa_variation_max)
        amp = fit_loglog_slope(x, D / np.asarray(d0))
        slopes[f"amplification_t{ts:g}"] = amp
        verdicts[f"amplification_t{ts:g}"] = amp.slope >= nc.amplification_slope_min
    return verdicts, slopes, constants


def _nonuniform_cell(args):
    n, cfg, grid, t_star = args
    env = make_envelope(grid)
    f = make_fn(env, n)
    g = make_gn(env, n)
    u0 = f + g
    sc = _solver(cfg, max(t_star), t_star)
    dt = sc.dt if sc.dt is not None else min(default_dt(u0), default_dt(f))
    sc = _solver(cfg, max(t_star), t_star, dt=dt)
    ru = integrate(u0, sc)
    rf = integrate(f, sc)
    d0 = besov_norm(g, B1)
    rows, notices = [], []
    for ts in t_star:
        try:
            a, b = ru.snapshot(ts), rf.snapshot(ts)
        except KeyError:
            notices.append(f"n={n}, t*={ts:g}: guard tripped ({ru.reason or rf.reason}), cell aborted")
            continue
        w = a - b
        D = besov_norm(w, B1)
        # second route: blocks of each solution, differenced blockwise
        ba, bb = blocks(a), blocks(b)
        per_block = np.abs(ba - bb).max(axis=1)
        D_blk = besov_norm_from_blocks(per_block, 1.0, 1.0)
        flow = besov_norm(w - (u0 - f), B1)
        rows.append((n, float(ts), d0, D, D_blk, flow))
    return n, rows, notices


def exp_nonuniform(cfg: Config, workers: int = 1) -> ExperimentReport:
    started = time.perf_counter()
    nc = cfg.experiment.nonuniform
    grid = packet_grid(cfg, nc.n_max)
    t_star = tuple(sorted(float(t) for t in nc.t_star))
    cells = [(n, cfg, grid, t_star) for n in range(nc.n_min, nc.n_max + 1)]
    results = sorted(_pmap(_nonuniform_cell, cells, workers), key=lambda z: z[0])
    rows = [r for _, rs, _ in results for r in rs]
    notices = [m for _, _, ms in results for m in ms]
    tables = {"nonuniform": Table(("n", "t_star", "d0", "D", "D_blockwise", "flow_sep"), rows)}
    verdicts, slopes, constants = verdicts_nonuniform(tables, nc)
    return ExperimentReport(
        "E4a", "nonuniform", config_to_dict(cfg), tables, slopes, constants, verdicts, notices,
        meta=_meta(grid, started),
    )


# ----------------------------------------------------------------------------
# E4b: L^inf stability
# ----------------------------------------------------------------------------


def verdicts_stability(tables: dict, sc: StabilityConfig):
    t = tables["stability"]
    done = t.where(completed=1)
    trials = sorted(set(done.column("trial")))
    total = len(set(t.column("trial")))
    ratios = np.asarray(done.column("ratio")) if done.rows else np.array([np.inf])
    per_trial = [_variation(done.where(trial=k).column("ratio")) for k in trials]
    constants = {
        "max_ratio": float(ratios.max()),
        "max_delta_variation": float(max(per_trial)) if per_trial else float("inf"),
        "completed_trials": len(trials),
    }
    verdicts = {
        "enough_trials": len(trials) >= max(1, (total + 1) // 2),
        "bounded": bool(ratios.max() <= sc.ratio_max),
        "delta_stable": bool(per_trial) and max(per_trial) <= sc.delta_variation_max,
    }
    return verdicts, {}, constants


def _stability_cell(args):
    trial, cfg, seed = args
    sc = cfg.experiment.stability
    grid = make_grid(sc.L, sc.N)
    rng = np.random.default_rng([seed, trial])
    u0 = random_field(grid, rng, sc.band)
    u0 = u0 / besov_norm(u0, B1)
    eta = random_field(grid, rng, sc.band)
    eta = eta / lp_norm(eta)
    times = _every_step(sc.horizon, sc.dt)
    solver = _solver(cfg, sc.horizon, times, dt=sc.dt)
    ru = integrate(u0, solver)
    rows = []
    for delta in sc.deltas:
        rv = integrate(u0 + delta * eta, solver)
        done = ru.completed and rv.completed
        if done:
            dist = max(lp_norm(a - b) for (_, a), (_, b) in zip(ru.snapshots, rv.snapshots))
            ratio = dist / lp_norm(delta * eta)
        else:
            ratio = float("nan")
        rows.append((trial, float(delta), ratio, int(done)))
    reason = None if ru.completed else ru.reason
    return trial, rows, reason


def exp_linf_stability(cfg: Config, workers: int = 1) -> ExperimentReport:
    started = time.perf_counter()
    sc = cfg.experiment.stability
    seed = cfg.experiment.seed
    results = sorted(_pmap(_stability_cell, [(k, cfg, seed) for k in range(sc.trials)], workers), key=lambda z: z[0])
    rows = [r for _, rs, _ in results for r in rs]
    notices = [f"trial {k}: guard tripped ({reason})" for k, rs, reason in results if any(r[3] == 0 for r in rs)]
    tables = {"stability": Table(("trial", "delta", "ratio", "completed"), rows)}
    verdicts, slopes, constants = verdicts_stability(tables, sc)
    return ExperimentReport(
        "E4b", "stability", config_to_dict(cfg), tables, slopes, constants, verdicts, notices,
        meta=_meta(make_grid(sc.L, sc.N), started, seed=seed),
    )


# ----------------------------------------------------------------------------
# E5: continuity through mollified data
# ----------------------------------------------------------------------------


def verdicts_mollify(tables: dict, mc: MollifyConfig):
    t = tables["mollify"]
    a = np.asarray(t.column("a"))
    b = np.asarray(t.column("b"))
    zero = mc.zero_tol * max(a.max(), b.max(), np.finfo(float).tiny)
    live = a > zero
    verdicts, constants = {}, {}
    if live.any():
        ratio = b[live] / a[live]
        constants["C"] = float(ratio.max())
        constants["C_variation"] = _variation(ratio)
        verdicts["ratio_stable"] = _variation(ratio) <= mc.ratio_variation_max
    else:
        verdicts["ratio_stable"] = False

    def monotone_to_zero(v):
        steps_ok = all(v[i + 1] <= (1.0 + mc.ripple) * v[i] + zero for i in range(len(v) - 1))
        return bool(steps_ok and v[-1] <= zero)

    verdicts["a_to_zero"] = monotone_to_zero(a)
    verdicts["b_to_zero"] = monotone_to_zero(b)
    ir = np.asarray(t.column("interp_ratio"))[live]
    ib = np.asarray(t.column("interp_bound"))[live]
    verdicts["interpolation"] = bool(np.all(ir <= ib))
    return verdicts, {}, constants


def _lemma_interp_constant(cfg: Config) -> float:
    lc = cfg.experiment.lemma
    grid = make_grid(lc.L, lc.N_list[0])
    rng = np.random.default_rng([cfg.experiment.seed, 0x1E55])
    return max(interpolation_ratio(random_field(grid, rng, lc.band)) for _ in range(lc.samples))


def _mollify_cell(args):
    data, cfg, grid, times, dt = args
    rec = integrate(data, _solver(cfg, times[-1], times, dt=dt))
    return rec


def exp_mollification(cfg: Config, workers: int = 1) -> ExperimentReport:
    started = time.perf_counter()
    mc = cfg.experiment.mollify
    spec = f"fn:{mc.packet_n}+{mc.background}"
    grid = packet_grid(cfg, mc.packet_n, _spec_frequency(spec))
    u0 = field_from_spec(spec, grid)
    dt = cfg.solver.dt if cfg.solver.dt is not None else default_dt(u0)
    times = tuple(_every_step(mc.horizon, dt).tolist())
    cutoffs = sorted(mc.cutoffs)
    data = [u0] + [low_cutoff(u0, N) for N in cutoffs]
    # identical mollified data share one trajectory
    unique, index = [], []
    for d in data:
        for k, e in enumerate(unique):
            if np.array_equal(e.values, d.values):
                index.append(k)
                break
        else:
            index.append(len(unique))
            unique.append(d)
    recs = _pmap(_mollify_cell, [(d, cfg, grid, times, dt) for d in unique], workers)
    ref = recs[index[0]]
    interp_C = _lemma_interp_constant(cfg)
    rows, notices = [], []
    if not ref.completed:
        notices.append(f"reference run tripped a guard ({ref.reason}) at t={ref.t_stop:g}")
    for N, k, d in zip(cutoffs, index[1:], data[1:]):
        rec = recs[k]
        if not rec.completed:
            notices.append(f"N={N}: guard tripped ({rec.reason}) at t={rec.t_stop:g}")
        a = besov_norm(d - u0, B1)
        best, arg = -1.0, None
        for (_, x), (_, y) in zip(rec.snapshots, ref.snapshots):
            diff = x - y
            val = besov_norm(diff, B1)
            if val > best:
                best, arg = val, diff
        ir = interpolation_ratio(arg) if lp_norm(arg) > 0 else 0.0
        rows.append((N, a, best, ir, mc.interp_slack * interp_C))
    tables = {"mollify": Table(("N", "a", "b", "interp_ratio", "interp_bound"), rows)}
    verdicts, slopes, constants = verdicts_mollify(tables, mc)
    if not (ref.completed and all(recs[k].completed for k in index)):
        verdicts["runs_completed"] = False
    constants["interp_C"] = interp_C
    constants["u0_b1"] = besov_norm(u0, B1)
    return ExperimentReport(
        "E5", "mollify", config_to_dict(cfg), tables, slopes, constants, verdicts, notices,
        meta=_meta(grid, started),
    )


# ----------------------------------------------------------------------------
# E6: solver validation
# ----------------------------------------------------------------------------


def verdicts_validation(tables: dict, vc: ValidationConfig):
    verdicts, slopes, constants = {}, {}, {}
    cons = tables["validation_conservation"]
    drift = dict(zip(cons.column("quantity"), cons.column("max_drift")))
    rel = dict(zip(cons.column("quantity"), cons.column("relative_drift")))
    verdicts["mass_conserved"] = drift["int_u"] <= vc.m1_abs_max
    verdicts["cubic_conserved"] = rel["int_u3"] <= vc.m3_rel_max
    order = tables["validation_order"]
    fit = fit_loglog_slope(order.column("dt"), order.column("error"))
    slopes["dt_order"] = fit
    verdicts["dt_order"] = abs(fit.slope - vc.order_target) <= vc.order_tol
    ref = tables["validation_refinement"]
    errs = ref.column("error")
    # pairs whose coarse error already sits at roundoff carry no information
    factors = [errs[i] / max(errs[i + 1], 1e-300) for i in range(len(errs) - 1) if errs[i] > vc.refine_floor]
    constants["refinement_factors"] = [float(f) for f in factors]
    verdicts["spectral_refinement"] = bool(factors) and all(f >= vc.refine_factor_min for f in factors)
    steady = tables["validation_steady"]
    verdicts["steady_states"] = max(steady.column("max_change")) <= vc.steady_max
    ap = tables["validation_apriori"]
    constants["apriori_ratio"] = float(max(ap.column("ratio")))
    verdicts["apriori_bound"] = constants["apriori_ratio"] <= vc.apriori_max
    return verdicts, slopes, constants


def _validation_run(args):
    vc, cfg, N, dt, t_end = args
    grid = make_grid(vc.L, N)
    u0 = Field(grid, vc.amplitude * np.cos(grid.x))
    return integrate(u0, _solver(cfg, t_end, (), dt=dt))


def exp_solver_validation(cfg: Config, workers: int = 1) -> ExperimentReport:
    started = time.perf_counter()
    vc = cfg.experiment.validation
    dts = sorted(vc.order_dts, reverse=True)
    jobs = [(vc, cfg, vc.N, vc.dt, vc.t_end)]
    jobs += [(vc, cfg, vc.N, dt, vc.t_end) for dt in dts]
    jobs += [(vc, cfg, N, vc.dt, vc.t_end) for N in sorted(vc.refine_N)]
    recs = _pmap(_validation_run, jobs, workers)
    main, order_recs, refine_recs = recs[0], recs[1 : 1 + len(dts)], recs[1 + len(dts) :]
    notices = [f"run {j[2:4]} tripped a guard ({r.reason})" for j, r in zip(jobs, recs) if not r.completed]

    d = main.diagnostics
    cons_rows = [
        ("int_u", float(d["m1"][0]), float(np.abs(d["m1"] - d["m1"][0]).max()),
         float(np.abs(d["m1"] - d["m1"][0]).max() / max(1.0, abs(d["m1"][0])))),
        ("int_u3", float(d["m3"][0]), float(np.abs(d["m3"] - d["m3"][0]).max()),
         float(np.abs(d["m3"] - d["m3"][0]).max() / max(1.0, abs(d["m3"][0])))),
    ]
    order_rows = [
        (dts[i], float(np.abs(order_recs[i].final.values - order_recs[i + 1].final.values).max()))
        for i in range(len(dts) - 1)
    ]
    fine = main.final
    refine_rows = []
    for N, rec in zip(sorted(vc.refine_N), refine_recs):
        # compare on the coarse grid: the fine grid's samples at matching points
        step = vc.N // N
        refine_rows.append((N, float(np.abs(rec.final.values - fine.values[::step]).max())))
    steady_rows = []
    grid = make_grid(vc.L, vc.N)
    for c in (-1.0, 0.0, 0.3, 2.5):
        u = Field.constant(grid, c)
        steady_rows.append((c, lp_norm(rhs(u)), lp_norm(rk4_step(u, vc.dt) - u)))
    ratio = d["b1"] / (d["b1"][0] * np.exp(d["V"]))
    # thinned trace; the last step and the maximizing step are always kept
    keep = set(range(0, len(d), max(1, len(d) // 100))) | {len(d) - 1, int(np.argmax(ratio))}
    ap_rows = [(float(d["t"][i]), float(d["b1"][i]), float(d["V"][i]), float(ratio[i])) for i in sorted(keep)]
    tables = {
        "validation_conservation": Table(("quantity", "initial", "max_drift", "relative_drift"), cons_rows),
        "validation_order": Table(("dt", "error"), order_rows),
        "validation_refinement": Table(("N", "error"), refine_rows),
        "validation_steady": Table(("c", "max_rhs", "max_change"), steady_rows),
        "validation_apriori": Table(("t", "b1", "V", "ratio"), ap_rows),
    }
    verdicts, slopes, constants = verdicts_validation(tables, vc)
    verdicts["runs_completed"] = all(r.completed for r in recs)
    return ExperimentReport(
        "E6", "validation", config_to_dict(cfg), tables, slopes, constants, verdicts, notices,
        meta=_meta(grid, started),
    )


# ----------------------------------------------------------------------------
# L2: empirical constants of the product and interpolation inequalities
# ----------------------------------------------------------------------------


def verdicts_lemma(tables: dict, lc: LemmaConfig):
    t = tables["lemma_constants"]
    verdicts, constants = {}, {}
    maxima = {"product_ratio": [], "interp_ratio": []}
    for N in sorted(set(t.column("N"))):
        sub = t.where(N=N)
        for key in maxima:
            vals = np.asarray(sub.column(key))
            maxima[key].append(float(vals.max()))
            constants[f"{key}_max_N{N}"] = float(vals.max())
            constants[f"{key}_spread_N{N}"] = _variation(vals)
        # sample stability: maxima over the two halves of the draw
        half = len(sub.rows) // 2
        for key in maxima:
            vals = np.asarray(sub.column(key))
            constants[f"{key}_halves_N{N}"] = _variation([vals[:half].max(), vals[half:].max()])
    for key, vals in maxima.items():
        finite = bool(np.all(np.isfinite(t.column(key))))
        verdicts[f"{key}_finite"] = finite
        verdicts[f"{key}_stable_grids"] = finite and _variation(vals) <= lc.variation_max
        halves = [v for k, v in constants.items() if k.startswith(f"{key}_halves")]
        verdicts[f"{key}_stable_samples"] = finite and max(halves) <= lc.variation_max
    return verdicts, {}, constants


def exp_lemma_constants(cfg: Config, workers: int = 1) -> ExperimentReport:
    """Random sweep of the product-estimate and interpolation ratios.

    The same seeded trigonometric polynomials are sampled on every grid in
    ``N_list``, so the resolution comparison isolates discretization effects.
    """
    started = time.perf_counter()
    lc = cfg.experiment.lemma
    rows = []
    for N in sorted(lc.N_list):
        grid = make_grid(lc.L, N)
        rng = np.random.default_rng([cfg.experiment.seed, 0x1E22A])
        for k in range(lc.samples):
            u = random_field(grid, rng, lc.band)
            v = random_field(grid, rng, lc.band)
            rows.append((N, k, product_estimate_ratio(u, v, lc.s), interpolation_ratio(u)))
    tables = {"lemma_constants": Table(("N", "trial", "product_ratio", "interp_ratio"), rows)}
    verdicts, slopes, constants = verdicts_lemma(tables, lc)
    return ExperimentReport(
        "L2", "lemma_constants", config_to_dict(cfg), tables, slopes, constants, verdicts,
        meta=_meta(make_grid(lc.L, max(lc.N_list)), started, seed=cfg.experiment.seed),
    )


_VERDICTS = {
    "family_scaling": lambda tb, c: verdicts_family_scaling(tb, c.family),
    "product_lower": lambda tb, c: verdicts_product_lower(tb, c.family),
    "expansion": lambda tb, c: verdicts_expansion(tb, c.experiment.expansion),
    "nonuniform": lambda tb, c: verdicts_nonuniform(tb, c.experiment.nonuniform),
    "stability": lambda tb, c: verdicts_stability(tb, c.experiment.stability),
    "mollify": lambda tb, c: verdicts_mollify(tb, c.experiment.mollify),
    "validation": lambda tb, c: verdicts_validation(tb, c.experiment.validation),
    "lemma_constants": lambda tb, c: verdicts_lemma(tb, c.experiment.lemma),
}


def recheck(name: str, tables: dict, cfg: Config) -> dict:
    """Re-derive the table-based verdicts of experiment ``name``."""
    return _VERDICTS[name](tables, cfg)[0]


EXPERIMENTS = {
    "E1": exp_family_scaling,
    "E2": exp_product_lower,
    "E3": exp_expansion,
    "E4a": exp_nonuniform,
    "E4b": exp_linf_stability,
    "E5": exp_mollification,
    "E6": exp_solver_validation,
    "L2": exp_lemma_constants,
}
