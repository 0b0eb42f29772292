"""Write a RunRecord to disk: CSV tables, a JSON record, an SVG histogram."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

FORMATS = ("csv", "json", "svg")
WIDTH, HEIGHT, PAD = 640, 400, 50


def _cell(val):
    if val is None:
        return ""
    if isinstance(val, (float, np.floating)):
        return repr(float(val))
    return val


def write_rows(fh, columns: list[str], rows: list[list]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(v) for v in row])


def write_csv(path: Path, columns: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        write_rows(fh, columns, rows)


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return str(obj)


def histogram_svg(values: np.ndarray, title: str, atoms=None, legend: list[str] = (), bins: int = 60) -> str:
    """Bar histogram (density) with optional vertical markers at ``atoms``."""
    values = np.asarray(values, dtype=float)
    lo, hi = float(values.min()), float(values.max())
    if atoms is not None and len(atoms):
        lo, hi = min(lo, float(np.min(atoms))), max(hi, float(np.max(atoms)))
    if hi - lo < 1e-12:
        lo, hi = lo - 0.5, hi + 0.5
    span = hi - lo
    lo, hi = lo - 0.03 * span, hi + 0.03 * span
    counts, edges = np.histogram(values, bins=bins, range=(lo, hi), density=True)
    top = float(counts.max()) or 1.0
    sx = lambda v: PAD + (v - lo) / (hi - lo) * (WIDTH - 2 * PAD)
    sy = lambda v: HEIGHT - PAD - v / top * (HEIGHT - 2 * PAD)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
           f'viewBox="0 0 {WIDTH} {HEIGHT}">',
           f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
           f'<text x="{WIDTH / 2}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>']
    for c, a, b in zip(counts, edges[:-1], edges[1:]):
        if c > 0:
            out.append(f'<rect x="{sx(a):.2f}" y="{sy(c):.2f}" width="{max(sx(b) - sx(a) - 0.5, 0.5):.2f}" '
                       f'height="{HEIGHT - PAD - sy(c):.2f}" fill="#7aa6d6"/>')
    for v in atoms if atoms is not None else ():
        out.append(f'<line x1="{sx(v):.2f}" y1="{PAD}" x2="{sx(v):.2f}" y2="{HEIGHT - PAD}" '
                   f'stroke="#c0392b" stroke-width="1.5" stroke-dasharray="4 3"/>')
    axis_y = HEIGHT - PAD
    out.append(f'<line x1="{PAD}" y1="{axis_y}" x2="{WIDTH - PAD}" y2="{axis_y}" stroke="black"/>')
    for t in np.linspace(lo, hi, 5):
        out.append(f'<text x="{sx(t):.2f}" y="{axis_y + 18}" text-anchor="middle" font-size="11">{t:.3g}</text>')
    for i, line in enumerate(legend):
        out.append(f'<text x="{WIDTH - PAD}" y="{PAD + 16 * i}" text-anchor="end" font-size="12">'
                   f'{escape(line)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_outputs(record, formats, out_dir) -> list[Path]:
    """Write the requested formats into ``out_dir``; returns the written paths."""
    formats = [f for f in formats if f]
    bad = sorted(set(formats) - set(FORMATS))
    if bad:
        raise ValueError(f"unknown output format(s): {', '.join(bad)}")
    if not formats:
        return []
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    written = []
    if "csv" in formats:
        for name, table in record.tables.items():
            path = out / f"{name}.csv"
            write_csv(path, table.columns, table.rows)
            written.append(path)
    if "json" in formats:
        path = out / "record.json"
        path.write_text(json.dumps(record.to_dict(), indent=2, sort_keys=True, default=_json_default) + "\n",
                        encoding="utf-8")
        written.append(path)
    if "svg" in formats and record.histogram is not None:
        h = record.histogram
        if h["kind"] == "fixed_k":
            svg = histogram_svg(h["values"], h["title"], atoms=h["atoms"],
                                legend=["dashed: predicted atoms"])
        else:
            m1, m2 = h["moments"]
            svg = histogram_svg(h["values"], h["title"],
                                legend=[f"predicted m1 = {m1:.4g}", f"predicted m2 = {m2:.4g}"])
        path = out / "spectrum.svg"
        path.write_text(svg, encoding="utf-8")
        written.append(path)
    return written
