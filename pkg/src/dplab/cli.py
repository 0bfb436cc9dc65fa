"""
``dp-lab`` command-line entry point.

Exit status: 0 when every verdict passes, 2 when some verdict fails (or a
single trajectory trips a guard), 1 on usage, config or I/O errors.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import os
import sys
from pathlib import Path

import numpy as np

from .config import Config, ConfigError, config_from_dict, config_to_dict, load_config
from .dynamics import integrate
from .experiments import (
    Table,
    _solver,
    _spec_frequency,
    _spec_packet_index,
    exp_expansion,
    exp_family_scaling,
    exp_lemma_constants,
    exp_linf_stability,
    exp_mollification,
    exp_nonuniform,
    exp_product_lower,
    exp_solver_validation,
    field_from_spec,
    packet_grid,
)
from .experiments import _family_rows
from .littlewood_paley import BesovParams, besov_norm
from .report import format_value, write_config, write_report, write_table
from .spectral import Field, make_grid

__all__ = ["run_cli", "main"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _int_range(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition("..")
    try:
        a, b = int(lo), int(hi if sep else lo)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected A..B, got {text!r}") from None
    if b < a:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return a, b


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _strings(text: str) -> list[str]:
    return [v for v in text.split(",") if v]


def _build_parser() -> _Parser:
    common = _Parser(add_help=False)
    common.add_argument("--out", default="dp-lab-out", help="output directory (default: %(default)s)")
    common.add_argument("--seed", type=int, help="experiment seed (unsigned 64-bit)")
    common.add_argument("--plots", action="store_true", help="also write SVG log-log plots")
    common.add_argument("--workers", type=int, default=os.cpu_count() or 1, help="worker processes")
    common.add_argument("--config", help="TOML config file; flags override its values")

    p = _Parser(prog="dp-lab", description="Numerical experiments for the Degasperis-Procesi equation.")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    sub.add_parser("validate", parents=[common], help="solver convergence and conservation checks (E6)")

    s = sub.add_parser("family", parents=[common], help="wavepacket norm scalings and product bound (E1, E2)")
    s.add_argument("--n", type=_int_range, help="packet indices, e.g. 4..10")
    s.add_argument("--sigma", type=_floats, help="Besov indices, e.g. 0.5,1,2")

    s = sub.add_parser("expansion", parents=[common], help="first-order short-time expansion (E3)")
    s.add_argument("--u0", type=_strings, help="comma-separated initial data, e.g. cos:1,packet:5")
    s.add_argument("--t-min", type=float)
    s.add_argument("--t-max", type=float)
    s.add_argument("--t-points", type=int)

    s = sub.add_parser("nonuniform", parents=[common], help="packet separation (E4a)")
    s.add_argument("--n", type=_int_range, help="packet indices, e.g. 4..8")
    s.add_argument("--t", type=_floats, help="observation times, e.g. 0.01,0.05,0.1")

    s = sub.add_parser("stability", parents=[common], help="L^inf difference ratios (E4b)")
    s.add_argument("--trials", type=int)
    s.add_argument("--horizon", type=float)
    s.add_argument("--deltas", type=_floats)

    s = sub.add_parser("mollify", parents=[common], help="mollified data convergence (E5)")
    s.add_argument("--cutoffs", type=_ints, help="cutoff indices, e.g. 2,3,4")
    s.add_argument("--horizon", type=float)

    sub.add_parser("lemma", parents=[common], help="product and interpolation constants (L2)")

    s = sub.add_parser("simulate", parents=[common], help="single trajectory with snapshot dumps")
    s.add_argument("--u0", help="initial data, e.g. packet:5 or cos:1:0.5+const:1")
    s.add_argument("--t-end", type=float)
    s.add_argument("--snapshots", type=_floats, help="snapshot times")
    s.add_argument("--L", type=float, help="half-period of the domain")
    s.add_argument("--N", type=int, help="grid points")
    s.add_argument("--dt", type=float, help="time step")

    s = sub.add_parser("besov", parents=[common], help="Besov norm of a field stored as CSV with columns x,u")
    s.add_argument("input", help="CSV file with header x,u on a uniform grid x_k = -L + k dx")
    s.add_argument("--s", type=float, default=1.0)
    s.add_argument("--p", type=float, default=np.inf)
    s.add_argument("--r", type=float, default=1.0)
    return p


def _strip_none(d):
    if isinstance(d, dict):
        return {k: _strip_none(v) for k, v in d.items() if v is not None}
    return d


def _apply(cfg: Config, overrides: dict) -> Config:
    """Set dotted-path overrides and revalidate the whole config."""
    data = config_to_dict(cfg)
    for path, value in overrides.items():
        if value is None:
            continue
        node = data
        *parents, leaf = path.split(".")
        for key in parents:
            node = node[key]
        node[leaf] = value
    return config_from_dict(_strip_none(data))


def _overrides(args) -> dict:
    cmd = args.command
    o = {"experiment.seed": args.seed}
    if cmd == "family" and args.n:
        o.update({"family.n_min": args.n[0], "family.n_max": args.n[1]})
    if cmd == "family":
        o["family.sigma"] = args.sigma
    if cmd == "expansion":
        o.update({
            "experiment.expansion.u0": args.u0,
            "experiment.expansion.t_min": args.t_min,
            "experiment.expansion.t_max": args.t_max,
            "experiment.expansion.t_points": args.t_points,
        })
    if cmd == "nonuniform":
        if args.n:
            o.update({"experiment.nonuniform.n_min": args.n[0], "experiment.nonuniform.n_max": args.n[1]})
        o["experiment.nonuniform.t_star"] = args.t
    if cmd == "stability":
        o.update({
            "experiment.stability.trials": args.trials,
            "experiment.stability.horizon": args.horizon,
            "experiment.stability.deltas": args.deltas,
        })
    if cmd == "mollify":
        o.update({"experiment.mollify.cutoffs": args.cutoffs, "experiment.mollify.horizon": args.horizon})
    if cmd == "simulate":
        o.update({
            "experiment.simulate.u0": args.u0,
            "experiment.simulate.t_end": args.t_end,
            "experiment.simulate.snapshots": args.snapshots,
            "grid.L": args.L,
            "grid.N": args.N,
            "solver.dt": args.dt,
        })
    return o


def _prepare_out(path: str) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".dp-lab-write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise UsageError(f"output directory {path!r} is not writable: {exc}") from None
    return out


def _simulate(cfg: Config, out: Path) -> tuple[str, bool]:
    sc = cfg.experiment.simulate
    n = _spec_packet_index(sc.u0)
    grid = packet_grid(cfg, max(n, 1), _spec_frequency(sc.u0))
    u0 = field_from_spec(sc.u0, grid)
    rec = integrate(u0, _solver(cfg, sc.t_end, sc.snapshots))
    snap_rows = [(float(t), float(x), float(v)) for t, f in rec.snapshots for x, v in zip(grid.x, f.values)]
    write_table(Table(("t", "x", "u"), snap_rows), out / "snapshots.csv")
    d = rec.diagnostics
    write_table(Table(d.dtype.names, [tuple(float(v) for v in row) for row in d]), out / "diagnostics.csv")
    write_config(cfg, out)
    status = "completed" if rec.completed else f"guard tripped ({rec.reason}) at t={rec.t_stop:.6g}"
    return f"simulate {sc.u0} on N={grid.N}: {status}, {rec.steps} steps", rec.completed


def _read_field(path: str) -> Field:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise UsageError(f"cannot read {path!r}: {exc}") from None
    if not rows or [c.strip() for c in rows[0]] != ["x", "u"]:
        raise UsageError(f"{path}: expected header 'x,u'")
    try:
        data = np.array([[float(a), float(b)] for a, b in rows[1:]])
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from None
    x, u = data.T
    N = x.size
    L = -x[0]
    try:
        grid = make_grid(L, N)
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from None
    if not np.allclose(x, grid.x, rtol=0, atol=1e-9 * L):
        raise UsageError(f"{path}: x must be the uniform grid -L + k*2L/N")
    return Field(grid, u)


def _experiment_reports(cmd: str, cfg: Config, workers: int):
    if cmd == "validate":
        return [exp_solver_validation(cfg, workers)]
    if cmd == "family":
        rows = _family_rows(cfg)
        return [exp_family_scaling(cfg, workers, rows), exp_product_lower(cfg, workers, rows)]
    runner = {
        "expansion": exp_expansion,
        "nonuniform": exp_nonuniform,
        "stability": exp_linf_stability,
        "mollify": exp_mollification,
        "lemma": exp_lemma_constants,
    }[cmd]
    return [runner(cfg, workers)]


def run_cli(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _apply(load_config(args.config), _overrides(args))
        if args.workers < 1:
            raise UsageError("--workers must be >= 1")
        out = _prepare_out(args.out)
    except (UsageError, ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    if args.command == "simulate":
        try:
            line, ok = _simulate(cfg, out)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        print(line)
        return 0 if ok else 2

    if args.command == "besov":
        try:
            f = _read_field(args.input)
            prm = BesovParams(args.s, args.p, args.r)
        except (UsageError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        norm = besov_norm(f, prm)
        (out / "besov.csv").write_text(
            "s,p,r,N,norm\n" + ",".join(format_value(v) for v in (prm.s, prm.p, prm.r, f.grid.N, norm)) + "\n"
        )
        print(f"besov B^{prm.s:g}_{{{prm.p:g},{prm.r:g}}} norm = {norm:.17e}")
        return 0

    started = _dt.datetime.now(_dt.timezone.utc).isoformat()
    try:
        reports = _experiment_reports(args.command, cfg, args.workers)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    ok = True
    for rep in reports:
        try:
            write_report(rep, out, cfg, plots=args.plots, started=started)
        except OSError as exc:
            print(f"error: writing {rep.name}: {exc}", file=sys.stderr)
            return 1
        print(rep.summary())
        ok = ok and rep.passed
    return 0 if ok else 2


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
