"""
Serialization of experiment reports.

Tables go to CSV with a fixed header. Floats are written as ``%.17e`` so
they round-trip exactly, integers and strings as-is, booleans as
``true``/``false``. Every run appends one JSON line to ``manifests.jsonl``
and writes the canonical config echo ``config.json`` whose sha256 is the
manifest digest.
"""
from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import io
import json
import math
from pathlib import Path

import numpy as np

from .config import Config, canonical_json, config_to_dict
from .experiments import ExperimentReport, SlopeFit, Table

__all__ = ["format_value", "write_table", "read_table", "write_report", "write_config", "report_summary_json"]

TOOL_VERSION = "0.1.0"


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17e" % float(v)
    return str(v)


def _parse_value(s: str):
    if s == "true":
        return True
    if s == "false":
        return False
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def write_table(table: Table, path: Path) -> Path:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for row in table.rows:
        w.writerow([format_value(v) for v in row])
    path.write_text(buf.getvalue(), encoding="utf-8")
    return path


def read_table(path: str | Path) -> Table:
    """Inverse of :func:`write_table`."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return Table(tuple(rows[0]), [tuple(_parse_value(v) for v in r) for r in rows[1:]])


def _jsonable(v):
    if isinstance(v, SlopeFit):
        return {"slope": v.slope, "intercept": v.intercept, "max_residual": v.max_residual}
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    return v


def report_summary_json(report: ExperimentReport) -> str:
    """Deterministic JSON of slopes, constants, verdicts and notices (no timings)."""
    doc = {
        "experiment": report.experiment,
        "name": report.name,
        "passed": report.passed,
        "verdicts": _jsonable(report.verdicts),
        "slopes": _jsonable(report.slopes),
        "constants": _jsonable(report.constants),
        "notices": list(report.notices),
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def write_config(cfg: Config, out: Path) -> tuple[Path, str]:
    """Write the canonical config echo and return (path, sha256 of its bytes)."""
    data = canonical_json(config_to_dict(cfg)).encode()
    path = out / "config.json"
    path.write_bytes(data)
    return path, hashlib.sha256(data).hexdigest()


def _plot(report: ExperimentReport, out: Path) -> list[Path]:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "dplab"
    paths = []
    for key, fit in report.slopes.items():
        if not isinstance(fit, SlopeFit):
            continue
        lx, ly = np.array(fit.points).T
        fig, ax = plt.subplots(figsize=(4.5, 3.5))
        ax.scatter(lx, ly, s=14)
        xs = np.linspace(lx.min(), lx.max(), 2)
        ax.plot(xs, fit.slope * xs + fit.intercept, lw=1)
        ax.set_xlabel("log x")
        ax.set_ylabel("log y")
        ax.set_title(f"{report.experiment} {key}: slope {fit.slope:.3f}")
        fig.tight_layout()
        path = out / f"{report.name}_{key}.svg"
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
        paths.append(path)
    return paths


def write_report(
    report: ExperimentReport,
    out: str | Path,
    cfg: Config,
    *,
    plots: bool = False,
    started: str | None = None,
) -> list[Path]:
    """Write tables, summary, optional plots; append the manifest line. Returns written files."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    files = [write_table(t, out / f"{name}.csv") for name, t in report.tables.items()]
    summary = out / f"{report.name}_summary.json"
    summary.write_text(report_summary_json(report), encoding="utf-8")
    files.append(summary)
    if plots:
        files.extend(_plot(report, out))
    cfg_path, digest = write_config(cfg, out)
    files.append(cfg_path)
    now = _dt.datetime.now(_dt.timezone.utc).isoformat()
    manifest = {
        "tool_version": TOOL_VERSION,
        "config_digest": digest,
        "experiment": report.experiment,
        "name": report.name,
        "grid": {"L": report.meta.get("L"), "N": report.meta.get("N")},
        "solver": _jsonable(config_to_dict(cfg)["solver"]),
        "seed": cfg.experiment.seed,
        "started": started or now,
        "finished": now,
        "wall_clock_s": report.meta.get("wall_clock_s"),
        "passed": report.passed,
        "files": sorted(p.name for p in files),
    }
    with open(out / "manifests.jsonl", "a", encoding="utf-8") as fh:
        fh.write(json.dumps(manifest, sort_keys=True) + "\n")
    return files
