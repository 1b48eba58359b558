"""Deterministic file writers: long-format CSV, JSON documents, minimal SVG plots.

Floats are written with ``repr`` so that a file read back reproduces the exact doubles.
JSON has sorted keys and carries non-finite numbers as the strings "inf", "-inf" and
"nan", since strict JSON has no literal for them. Nothing time- or host-dependent goes
into these files; that lives in ``provenance.json``.
"""
from __future__ import annotations

import csv
import json
import math
import os
import platform
import sys
import time
from dataclasses import asdict, is_dataclass
from pathlib import Path

import numpy as np

SUMMARY_SCHEMA = "chemoflux.summary/1"


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def jsonable(obj):
    """Recursively convert dataclasses, numpy scalars/arrays and non-finite floats."""
    if is_dataclass(obj) and not isinstance(obj, type):
        obj = obj.to_dict() if hasattr(obj, "to_dict") else asdict(obj)
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def dumps_json(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(dumps_json(obj), encoding="utf-8")
    return path


def write_rows(path, header, rows) -> Path:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])
    return path


def write_fields_csv(path, snapshots) -> Path:
    """Long format, one row per (t, x): ``t,x,u,v,a,b``."""
    def rows():
        for s in snapshots:
            x = s.mesh.cell_centers
            for i in range(x.size):
                yield (s.t, x[i], s.u[i], s.v[i], s.a[i], s.b[i])
    return write_rows(path, ("t", "x", "u", "v", "a", "b"), rows())


def write_diagnostics_csv(path, records) -> Path:
    if not records:
        raise ValueError("no diagnostics records to write")
    header = type(records[0]).columns()
    return write_rows(path, header, ([getattr(r, k) for k in header] for r in records))


def read_csv(path) -> tuple[list, np.ndarray]:
    """Header and float matrix of a file written by ``write_rows``."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = [[float(x) for x in row] for row in reader]
    return header, np.array(data, dtype=np.float64).reshape(-1, len(header))


def write_provenance(path, argv=None, started=None, extra=None) -> Path:
    """Run metadata that is allowed to differ between identical runs."""
    import numba
    import scipy

    from . import __version__

    info = {
        "package_version": __version__,
        "python": sys.version.split()[0],
        "platform": platform.platform(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "numba": numba.__version__,
        "argv": list(argv if argv is not None else sys.argv),
        "written_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "pid": os.getpid(),
    }
    if started is not None:
        info["wall_seconds"] = time.perf_counter() - started
    if extra:
        info.update(extra)
    return write_json(path, info)


# ---------------------------------------------------------------------------
# SVG


_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def svg_line_plot(series: dict, title: str = "", xlabel: str = "x",
                  width: int = 640, height: int = 400) -> str:
    """Minimal SVG 1.1 line chart; ``series`` maps label -> (xs, ys)."""
    left, right, top, bottom = 60, 120, 30, 40
    xs_all = np.concatenate([np.asarray(v[0], dtype=float) for v in series.values()])
    ys_all = np.concatenate([np.asarray(v[1], dtype=float) for v in series.values()])
    finite = np.isfinite(ys_all)
    x0, x1 = float(xs_all.min()), float(xs_all.max())
    y0 = float(ys_all[finite].min()) if finite.any() else 0.0
    y1 = float(ys_all[finite].max()) if finite.any() else 1.0
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pw, ph = width - left - right, height - top - bottom

    def px(x):
        return left + (x - x0) / (x1 - x0) * pw

    def py(y):
        return top + (y1 - y) / (y1 - y0) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
        f'<text x="{width / 2:.1f}" y="18" text-anchor="middle" font-size="14">{title}</text>',
        f'<text x="{left + pw / 2:.1f}" y="{height - 8}" text-anchor="middle" '
        f'font-size="12">{xlabel}</text>',
        f'<text x="{left - 4}" y="{top + 4}" text-anchor="end" font-size="10">{y1:.4g}</text>',
        f'<text x="{left - 4}" y="{top + ph}" text-anchor="end" font-size="10">{y0:.4g}</text>',
        f'<text x="{left}" y="{top + ph + 14}" text-anchor="middle" font-size="10">{x0:.4g}</text>',
        f'<text x="{left + pw}" y="{top + ph + 14}" text-anchor="middle" '
        f'font-size="10">{x1:.4g}</text>',
    ]
    for k, (label, (xs, ys)) in enumerate(series.items()):
        color = _COLORS[k % len(_COLORS)]
        pts = " ".join(f"{px(x):.2f},{py(y):.2f}"
                       for x, y in zip(np.asarray(xs, float), np.asarray(ys, float))
                       if math.isfinite(y))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        ly = top + 14 + 16 * k
        out.append(f'<line x1="{left + pw + 10}" y1="{ly - 4}" x2="{left + pw + 30}" '
                   f'y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw + 34}" y="{ly}" font-size="11">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path, series: dict, **kwargs) -> Path:
    path = Path(path)
    path.write_text(svg_line_plot(series, **kwargs), encoding="utf-8")
    return path
