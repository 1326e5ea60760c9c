"""Canonical JSON envelopes, run manifests, CSV flattening and SVG overlays."""

from __future__ import annotations

import csv
import datetime as _dt
import io
import json
import math
from importlib import resources
from typing import Any, Dict, Optional, Sequence

from . import __version__

SCHEMA_NAME = "report.schema.json"
# manifest keys that change between otherwise identical runs
VOLATILE_KEYS = ("started_at", "finished_at", "elapsed_seconds")


def now_iso() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="milliseconds")


def make_manifest(command: str, config: Dict[str, Any], seed: Optional[int], started_at: str) -> Dict[str, Any]:
    return {
        "tool": "charex",
        "version": __version__,
        "command": command,
        "config": config,
        "seed": seed,
        "started_at": started_at,
        "finished_at": None,
        "elapsed_seconds": None,
        "outcome": None,
    }


def canonical_json(doc: Any) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=True, allow_nan=False) + "\n"


def strip_volatile(doc: Dict[str, Any]) -> Dict[str, Any]:
    """Copy of an envelope without timestamps, for determinism comparisons."""
    out = json.loads(json.dumps(doc))
    manifest = out.get("manifest", {})
    for key in VOLATILE_KEYS:
        manifest.pop(key, None)
    return out


def load_schema() -> Dict[str, Any]:
    text = resources.files("charex").joinpath("schemas", SCHEMA_NAME).read_text(encoding="utf-8")
    return json.loads(text)


def validate_envelope(doc: Dict[str, Any]) -> None:
    import jsonschema

    jsonschema.validate(doc, load_schema())


def grid_csv(grid: Sequence[float], lhs: Sequence[float], rhs: Sequence[float]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["x", "lhs", "rhs", "abs_diff"])
    for x, a, b in zip(grid, lhs, rhs):
        writer.writerow([repr(float(x)), repr(float(a)), repr(float(b)), repr(abs(float(a) - float(b)))])
    return buf.getvalue()


def _esc(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")


def _ticks(lo: float, hi: float, count: int = 5):
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    start = math.ceil(lo / step) * step
    out = []
    v = start
    while v <= hi + 1e-9 * step:
        out.append(round(v, 12))
        v += step
    return out


def svg_overlay(
    grid: Sequence[float],
    lhs: Sequence[float],
    rhs: Sequence[float],
    title: str = "",
    labels=("left-hand side", "order statistic"),
    width: int = 640,
    height: int = 400,
) -> str:
    """Two density curves on shared axes as a standalone SVG document."""
    ml, mr, mt, mb = 60, 20, 36, 44
    pw, ph = width - ml - mr, height - mt - mb
    xs = [float(v) for v in grid]
    ys = [float(v) for v in lhs] + [float(v) for v in rhs]
    x0, x1 = (min(xs), max(xs)) if xs else (0.0, 1.0)
    y1 = max(ys) if ys else 1.0
    y0 = 0.0
    if x1 <= x0:
        x1 = x0 + 1.0
    if y1 <= y0:
        y1 = y0 + 1.0
    y1 *= 1.05

    def px(x):
        return ml + (x - x0) / (x1 - x0) * pw

    def py(y):
        return mt + ph - (y - y0) / (y1 - y0) * ph

    def polyline(values, colour, dash=""):
        pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, values))
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        return f'<polyline fill="none" stroke="{colour}" stroke-width="2"{extra} points="{pts}"/>'

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="14">{_esc(title)}</text>',
        f'<line x1="{ml}" y1="{mt + ph}" x2="{ml + pw}" y2="{mt + ph}" stroke="black"/>',
        f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt + ph}" stroke="black"/>',
    ]
    for t in _ticks(x0, x1):
        parts.append(f'<line x1="{px(t):.2f}" y1="{mt + ph}" x2="{px(t):.2f}" y2="{mt + ph + 5}" stroke="black"/>')
        parts.append(f'<text x="{px(t):.2f}" y="{mt + ph + 18}" text-anchor="middle">{t:g}</text>')
    for t in _ticks(y0, y1):
        parts.append(f'<line x1="{ml - 5}" y1="{py(t):.2f}" x2="{ml}" y2="{py(t):.2f}" stroke="black"/>')
        parts.append(f'<text x="{ml - 8}" y="{py(t) + 4:.2f}" text-anchor="end">{t:g}</text>')
    parts.append(f'<text x="{ml + pw / 2:.1f}" y="{height - 6}" text-anchor="middle">x</text>')
    if xs:
        parts.append(polyline([float(v) for v in lhs], "#1f77b4"))
        parts.append(polyline([float(v) for v in rhs], "#d62728", "6,4"))
    lx, ly = ml + pw - 170, mt + 10
    parts.append(f'<rect x="{lx}" y="{ly}" width="165" height="42" fill="white" stroke="#888"/>')
    parts.append(f'<line x1="{lx + 8}" y1="{ly + 14}" x2="{lx + 32}" y2="{ly + 14}" stroke="#1f77b4" stroke-width="2"/>')
    parts.append(f'<text x="{lx + 38}" y="{ly + 18}">{_esc(labels[0])}</text>')
    parts.append(
        f'<line x1="{lx + 8}" y1="{ly + 31}" x2="{lx + 32}" y2="{ly + 31}" stroke="#d62728" '
        f'stroke-width="2" stroke-dasharray="6,4"/>'
    )
    parts.append(f'<text x="{lx + 38}" y="{ly + 35}">{_esc(labels[1])}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
