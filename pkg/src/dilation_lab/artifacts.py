"""CSV, SVG and JSON output files.

Every file carries a metadata block (config hash, tool version, seed): a
leading ``#`` line in CSV, an XML comment in SVG, a ``meta`` key in JSON.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .numrange import SupportProfile

VIEWPORT = 1.1
SVG_SIZE = 600


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _meta_line(meta: dict) -> str:
    return "# " + " ".join(f"{k}={v}" for k, v in meta.items())


def write_boundary_csv(path, profile: SupportProfile, meta: dict) -> Path:
    path = Path(path)
    pts = profile.boundary()
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(_meta_line(meta) + "\n")
        w = csv.writer(fh)
        w.writerow(["angle", "support", "boundary_x", "boundary_y"])
        for a, h, p in zip(profile.angles, profile.values, pts):
            w.writerow([_fmt(a), _fmt(h), _fmt(p.real), _fmt(p.imag)])
    return path


def read_csv_rows(path) -> tuple[dict, list[dict]]:
    meta, lines = {}, []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#"):
                for tok in line[1:].split():
                    key, _, val = tok.partition("=")
                    meta[key] = val
            else:
                lines.append(line)
    return meta, list(csv.DictReader(lines))


def read_boundary_csv(path) -> tuple[SupportProfile, dict]:
    meta, rows = read_csv_rows(path)
    angles = np.array([float(r["angle"]) for r in rows])
    values = np.array([float(r["support"]) for r in rows])
    return SupportProfile(angles, values), meta


def write_table_csv(path, header: list[str], rows, meta: dict) -> Path:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(_meta_line(meta) + "\n")
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) if isinstance(v, float) else v for v in row])
    return path


def write_json(path, payload: dict, meta: dict) -> Path:
    path = Path(path)
    path.write_text(json.dumps({"meta": meta, **payload}, indent=2, default=_json_default), encoding="utf-8")
    return path


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return [[float(z.real), float(z.imag)] for z in obj.reshape(-1)] if obj.ndim == 1 else \
                [_json_default(r) for r in obj]
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    raise TypeError(f"cannot serialise {type(obj)}")


def _svg_xy(z: complex) -> tuple[float, float]:
    scale = SVG_SIZE / (2 * VIEWPORT)
    return (z.real + VIEWPORT) * scale, (VIEWPORT - z.imag) * scale


def _polygon(points, style: str, label: str) -> str:
    coords = " ".join("{:.4f},{:.4f}".format(*_svg_xy(complex(p))) for p in points)
    return f'  <polygon data-set="{label}" points="{coords}" {style}/>'


def write_svg(path, layers, meta: dict) -> Path:
    """Write polygons on the fixed viewport ``[-1.1, 1.1]^2``.

    ``layers`` is a sequence of ``(label, points, style)``; points are
    complex boundary vertices in order.
    """
    path = Path(path)
    circle_r = SVG_SIZE / (2 * VIEWPORT)
    cx, cy = _svg_xy(0j)
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_SIZE}" height="{SVG_SIZE}" '
        f'viewBox="0 0 {SVG_SIZE} {SVG_SIZE}">',
        "<!--",
        *(f"  {k}: {v}" for k, v in meta.items()),
        f"  viewport: [-{VIEWPORT}, {VIEWPORT}]^2",
        "-->",
        f'  <circle cx="{cx:.4f}" cy="{cy:.4f}" r="{circle_r:.4f}" fill="none" stroke="#bbbbbb" '
        'stroke-dasharray="4 4"/>',
    ]
    for label, points, style in layers:
        out.append(_polygon(points, style, label))
    out.append("</svg>")
    path.write_text("\n".join(out) + "\n", encoding="utf-8")
    return path
