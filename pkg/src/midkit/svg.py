"""Dependency-free SVG renderers for the CLI's plot output.

Each renderer returns one <g class="plot"> panel; render_document stacks
panels vertically into a standalone SVG with a JSON metadata element.
Styling is fixed; the point is diffable, testable data fidelity.
"""

from __future__ import annotations

import json
from xml.sax.saxutils import escape

import numpy as np

WIDTH = 640
PANEL_H = 360
MARGIN = dict(left=64, right=20, top=36, bottom=44)

_SERIES_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _span(lo: float, hi: float) -> tuple[float, float]:
    if hi <= lo:
        pad = abs(lo) * 0.1 + 1.0
        return lo - pad, lo + pad
    pad = (hi - lo) * 0.05
    return lo - pad, hi + pad


class _Axes:
    def __init__(self, xlo, xhi, ylo, yhi):
        self.xlo, self.xhi = _span(xlo, xhi)
        self.ylo, self.yhi = _span(ylo, yhi)
        self.x0 = MARGIN["left"]
        self.x1 = WIDTH - MARGIN["right"]
        self.y0 = MARGIN["top"]
        self.y1 = PANEL_H - MARGIN["bottom"]

    def px(self, x):
        return self.x0 + (x - self.xlo) / (self.xhi - self.xlo) * (self.x1 - self.x0)

    def py(self, y):
        return self.y1 - (y - self.ylo) / (self.yhi - self.ylo) * (self.y1 - self.y0)

    def frame(self, title, xlabel, ylabel):
        parts = [
            f'<rect x="{self.x0}" y="{self.y0}" width="{self.x1 - self.x0}" '
            f'height="{self.y1 - self.y0}" fill="none" stroke="#333"/>',
            f'<text x="{WIDTH // 2}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>',
        ]
        if xlabel:
            parts.append(
                f'<text x="{(self.x0 + self.x1) // 2}" y="{PANEL_H - 10}" '
                f'text-anchor="middle" font-size="11">{escape(xlabel)}</text>'
            )
        if ylabel:
            parts.append(
                f'<text x="14" y="{(self.y0 + self.y1) // 2}" font-size="11" text-anchor="middle" '
                f'transform="rotate(-90 14 {(self.y0 + self.y1) // 2})">{escape(ylabel)}</text>'
            )
        # axis ticks: ends and midpoint
        for frac in (0.0, 0.5, 1.0):
            xv = self.xlo + frac * (self.xhi - self.xlo)
            yv = self.ylo + frac * (self.yhi - self.ylo)
            parts.append(
                f'<text x="{_fmt(self.px(xv))}" y="{self.y1 + 14}" text-anchor="middle" '
                f'font-size="10">{_fmt(xv)}</text>'
            )
            parts.append(
                f'<text x="{self.x0 - 4}" y="{_fmt(self.py(yv) + 3)}" text-anchor="end" '
                f'font-size="10">{_fmt(yv)}</text>'
            )
        return parts


def line_panel(pid: str, title: str, x, series, xlabel: str = "", ylabel: str = "") -> str:
    """Line plot panel; series is a list of (label, values) pairs."""
    x = np.asarray(x, dtype=np.float64)
    all_y = np.concatenate([np.asarray(ys, dtype=np.float64) for _, ys in series])
    ax = _Axes(float(x.min()), float(x.max()), float(all_y.min()), float(all_y.max()))
    parts = ax.frame(title, xlabel, ylabel)
    many = len(series) > 8
    for i, (label, ys) in enumerate(series):
        ys = np.asarray(ys, dtype=np.float64)
        pts = " ".join(f"{_fmt(ax.px(a))},{_fmt(ax.py(b))}" for a, b in zip(x, ys))
        color = "#888888" if many else _SERIES_COLORS[i % len(_SERIES_COLORS)]
        opacity = ' stroke-opacity="0.5"' if many else ""
        label_attr = f' data-label="{escape(str(label))}"' if label else ""
        parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.2"{opacity}{label_attr} points="{pts}"/>'
        )
    return f'<g class="plot" id="{escape(pid)}">' + "".join(parts) + "</g>"


def _color_scale(v, lo, hi):
    t = 0.5 if hi <= lo else (v - lo) / (hi - lo)
    r = int(255 * t)
    b = int(255 * (1 - t))
    g = int(96 + 64 * (1 - abs(2 * t - 1)))
    return f"rgb({r},{g},{b})"


def heatmap_panel(pid: str, title: str, xlabels, ylabels, values, xlabel="", ylabel="") -> str:
    """Value-grid heatmap; values[i][j] maps to row i (y), column j (x)."""
    values = np.asarray(values, dtype=np.float64)
    n_rows, n_cols = values.shape
    ax = _Axes(0, n_cols, 0, n_rows)
    lo, hi = float(np.nanmin(values)), float(np.nanmax(values))
    parts = [
        f'<text x="{WIDTH // 2}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>'
    ]
    cw = (ax.x1 - ax.x0) / n_cols
    ch = (ax.y1 - ax.y0) / n_rows
    for i in range(n_rows):
        for j in range(n_cols):
            v = values[i, j]
            if np.isnan(v):
                continue
            parts.append(
                f'<rect x="{_fmt(ax.x0 + j * cw)}" y="{_fmt(ax.y1 - (i + 1) * ch)}" '
                f'width="{_fmt(cw)}" height="{_fmt(ch)}" fill="{_color_scale(v, lo, hi)}">'
                f"<title>{escape(str(ylabels[i]))},{escape(str(xlabels[j]))}: {_fmt(v)}</title></rect>"
            )
    step = max(1, n_cols // 8)
    for j in range(0, n_cols, step):
        parts.append(
            f'<text x="{_fmt(ax.x0 + (j + 0.5) * cw)}" y="{ax.y1 + 14}" text-anchor="middle" '
            f'font-size="9">{escape(str(xlabels[j]))}</text>'
        )
    step = max(1, n_rows // 8)
    for i in range(0, n_rows, step):
        parts.append(
            f'<text x="{ax.x0 - 4}" y="{_fmt(ax.y1 - (i + 0.5) * ch + 3)}" text-anchor="end" '
            f'font-size="9">{escape(str(ylabels[i]))}</text>'
        )
    if xlabel:
        parts.append(
            f'<text x="{(ax.x0 + ax.x1) // 2}" y="{PANEL_H - 10}" text-anchor="middle" '
            f'font-size="11">{escape(xlabel)}</text>'
        )
    if ylabel:
        parts.append(
            f'<text x="14" y="{(ax.y0 + ax.y1) // 2}" font-size="11" text-anchor="middle" '
            f'transform="rotate(-90 14 {(ax.y0 + ax.y1) // 2})">{escape(ylabel)}</text>'
        )
    return f'<g class="plot" id="{escape(pid)}">' + "".join(parts) + "</g>"


def bar_panel(pid: str, title: str, labels, values, ylabel="") -> str:
    """Horizontal bar chart, one bar per label, values may be negative."""
    values = np.asarray(values, dtype=np.float64)
    n = len(values)
    ax = _Axes(min(0.0, float(values.min())), max(0.0, float(values.max())), 0, n)
    parts = ax.frame(title, ylabel, "")
    bh = (ax.y1 - ax.y0) / max(n, 1)
    zero = ax.px(0.0)
    for i, (label, v) in enumerate(zip(labels, values)):
        xpix = ax.px(v)
        x = min(zero, xpix)
        parts.append(
            f'<rect x="{_fmt(x)}" y="{_fmt(ax.y0 + i * bh + 1)}" width="{_fmt(abs(xpix - zero))}" '
            f'height="{_fmt(max(bh - 2, 1))}" fill="#1f77b4">'
            f"<title>{escape(str(label))}: {_fmt(v)}</title></rect>"
        )
        parts.append(
            f'<text x="{ax.x0 - 4}" y="{_fmt(ax.y0 + (i + 0.6) * bh)}" text-anchor="end" '
            f'font-size="9">{escape(str(label))}</text>'
        )
    return f'<g class="plot" id="{escape(pid)}">' + "".join(parts) + "</g>"


def waterfall_panel(pid: str, title: str, labels, cumulative) -> str:
    """Waterfall of running sums; labels has one entry per step."""
    cumulative = np.asarray(cumulative, dtype=np.float64)
    n = len(labels)
    ax = _Axes(float(cumulative.min()), float(cumulative.max()), 0, n)
    parts = ax.frame(title, "cumulative value", "")
    bh = (ax.y1 - ax.y0) / max(n, 1)
    for i, label in enumerate(labels):
        a, b = cumulative[i], cumulative[i + 1]
        lo, hi = min(a, b), max(a, b)
        color = "#2ca02c" if b >= a else "#d62728"
        parts.append(
            f'<rect x="{_fmt(ax.px(lo))}" y="{_fmt(ax.y0 + i * bh + 1)}" '
            f'width="{_fmt(max(ax.px(hi) - ax.px(lo), 0.5))}" height="{_fmt(max(bh - 2, 1))}" '
            f'fill="{color}"><title>{escape(str(label))}: {_fmt(b - a)}</title></rect>'
        )
        parts.append(
            f'<text x="{ax.x0 - 4}" y="{_fmt(ax.y0 + (i + 0.6) * bh)}" text-anchor="end" '
            f'font-size="9">{escape(str(label))}</text>'
        )
        parts.append(
            f'<line x1="{_fmt(ax.px(b))}" y1="{_fmt(ax.y0 + i * bh + 1)}" x2="{_fmt(ax.px(b))}" '
            f'y2="{_fmt(ax.y0 + min(i + 2, n) * bh - 1)}" stroke="#333" stroke-dasharray="2,2"/>'
        )
    return f'<g class="plot" id="{escape(pid)}">' + "".join(parts) + "</g>"


def render_document(panels: list[str], meta: dict) -> str:
    """Stack panels vertically into one standalone SVG document."""
    height = PANEL_H * max(len(panels), 1)
    body = []
    for i, panel in enumerate(panels):
        body.append(f'<g transform="translate(0 {i * PANEL_H})">{panel}</g>')
    return (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" '
        f'viewBox="0 0 {WIDTH} {height}">'
        f"<metadata>{escape(json.dumps(meta, sort_keys=True))}</metadata>"
        f'<rect width="{WIDTH}" height="{height}" fill="white"/>'
        + "".join(body)
        + "</svg>\n"
    )
