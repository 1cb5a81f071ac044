"""CSV and SVG emitters for evaluation outputs.

SVGs are assembled as plain strings (no rendering dependency) and are
deterministic for identical inputs, like every CSV here.
"""

from __future__ import annotations

import csv

import numpy as np


def write_csv(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _svg_document(width: int, height: int, body: list[str]) -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">'
    )
    return "\n".join([head, '<rect width="100%" height="100%" fill="white"/>'] + body + ["</svg>"])


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def histogram_svg(counts, edges, title: str = "Reviews per screened fraction",
                  xlabel: str = "fraction screened", width: int = 640, height: int = 400) -> str:
    """Bar chart of per-bin counts (one bar per 10% bin)."""
    counts = np.asarray(counts)
    edges = np.asarray(edges, dtype=np.float64)
    margin = 50
    plot_w, plot_h = width - 2 * margin, height - 2 * margin
    top = max(1, int(counts.max()) if counts.size else 1)
    body = [f'<text x="{width/2:.0f}" y="20" text-anchor="middle" font-size="14">{title}</text>']
    n = counts.size
    for i in range(n):
        bar_w = plot_w / n
        h = plot_h * counts[i] / top
        x = margin + i * bar_w
        y = margin + plot_h - h
        body.append(
            f'<rect x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(bar_w * 0.9)}" height="{_fmt(h)}" '
            f'fill="#4878a8"/>'
        )
        body.append(
            f'<text x="{_fmt(x + bar_w * 0.45)}" y="{height - margin + 16}" text-anchor="middle" '
            f'font-size="10">{edges[i]:.1f}-{edges[i + 1]:.1f}</text>'
        )
        if counts[i]:
            body.append(
                f'<text x="{_fmt(x + bar_w * 0.45)}" y="{_fmt(y - 4)}" text-anchor="middle" '
                f'font-size="10">{int(counts[i])}</text>'
            )
    body.append(
        f'<text x="{width/2:.0f}" y="{height - 8}" text-anchor="middle" font-size="12">{xlabel}</text>'
    )
    body.append(f'<line x1="{margin}" y1="{margin + plot_h}" x2="{margin + plot_w}" '
                f'y2="{margin + plot_h}" stroke="black"/>')
    return _svg_document(width, height, body)


def polyline_svg(points, title: str, xlabel: str, ylabel: str,
                 width: int = 640, height: int = 400) -> str:
    """Single polyline through (x, y) points, axes scaled to the data."""
    pts = [(float(x), float(y)) for x, y in points]
    if not pts:
        raise ValueError("polyline needs at least one point")
    margin = 50
    plot_w, plot_h = width - 2 * margin, height - 2 * margin
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    x_span = (x_hi - x_lo) or 1.0
    y_span = (y_hi - y_lo) or 1.0

    def px(x):
        return margin + (x - x_lo) / x_span * plot_w

    def py(y):
        return margin + plot_h - (y - y_lo) / y_span * plot_h

    path = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in pts)
    body = [
        f'<text x="{width/2:.0f}" y="20" text-anchor="middle" font-size="14">{title}</text>',
        f'<polyline points="{path}" fill="none" stroke="#a84848" stroke-width="2"/>',
        f'<line x1="{margin}" y1="{margin + plot_h}" x2="{margin + plot_w}" y2="{margin + plot_h}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{margin + plot_h}" stroke="black"/>',
        f'<text x="{width/2:.0f}" y="{height - 8}" text-anchor="middle" font-size="12">{xlabel}</text>',
        f'<text x="14" y="{height/2:.0f}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 14 {height/2:.0f})">{ylabel}</text>',
        f'<text x="{margin}" y="{margin + plot_h + 16}" font-size="10">{x_lo:g}</text>',
        f'<text x="{margin + plot_w - 20}" y="{margin + plot_h + 16}" font-size="10">{x_hi:g}</text>',
        f'<text x="{margin - 4}" y="{_fmt(py(y_hi) + 4)}" text-anchor="end" font-size="10">{y_hi:g}</text>',
        f'<text x="{margin - 4}" y="{_fmt(py(y_lo) + 4)}" text-anchor="end" font-size="10">{y_lo:g}</text>',
    ]
    return _svg_document(width, height, body)
