"""Standalone SVG figures.

Every plotted series carries its data verbatim in ``data-x`` / ``data-y``
attributes (shortest round-trip floats), so a figure can be checked
against the tables it was drawn from.
"""

from __future__ import annotations

import math
from typing import List, Optional, Sequence
from xml.sax.saxutils import escape, quoteattr

import numpy as np

PALETTE = [
    "#8b0000", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd",
    "#17becf", "#e377c2", "#7f7f7f", "#bcbd22", "#8c564b",
]


def _fmt(v: float) -> str:
    return repr(float(v))


def _nice_ticks(lo: float, hi: float, n: int = 6) -> List[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=10 * mag)
    first = math.ceil(lo / step) * step
    return [first + i * step for i in range(int((hi - first) / step) + 1)]


class Figure:
    """Minimal x/y chart writer."""

    def __init__(self, title: str, xlabel: str, ylabel: str,
                 xlim: Sequence[float], ylim: Sequence[float],
                 width: int = 720, height: int = 440):
        self.title, self.xlabel, self.ylabel = title, xlabel, ylabel
        self.width, self.height = width, height
        self.left, self.right, self.top, self.bottom = 70, 20, 40, 55
        x0, x1 = map(float, xlim)
        y0, y1 = map(float, ylim)
        if x1 <= x0:
            x0, x1 = x0 - 0.5, x0 + 0.5
        if y1 <= y0:
            y0, y1 = y0 - 0.5, y0 + 0.5
        self.xlim, self.ylim = (x0, x1), (y0, y1)
        self.body: List[str] = []

    def px(self, x):
        x0, x1 = self.xlim
        return self.left + (np.asarray(x, float) - x0) / (x1 - x0) * (self.width - self.left - self.right)

    def py(self, y):
        y0, y1 = self.ylim
        return self.height - self.bottom - (np.asarray(y, float) - y0) / (y1 - y0) * (
            self.height - self.top - self.bottom)

    def _data_attrs(self, name: str, x, y) -> str:
        xs = " ".join(_fmt(v) for v in np.asarray(x, float))
        ys = " ".join(_fmt(v) for v in np.asarray(y, float))
        return f'data-name={quoteattr(name)} data-x="{xs}" data-y="{ys}"'

    def polyline(self, name: str, x, y, color: str = "#1f77b4", width: float = 1.5,
                 css: str = "series", break_gaps: Optional[float] = None) -> None:
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        px, py = self.px(x), self.py(y)
        parts = []
        for i in range(x.size):
            jump = i == 0 or (break_gaps is not None and x[i] - x[i - 1] > break_gaps)
            parts.append(f"{'M' if jump else 'L'}{px[i]:.2f},{py[i]:.2f}")
        self.body.append(
            f'<path class="{css}" {self._data_attrs(name, x, y)} d="{" ".join(parts)}" '
            f'fill="none" stroke="{color}" stroke-width="{width}"/>'
        )

    def markers(self, name: str, x, y, color: str = "#1f77b4", shape: str = "circle",
                css: str = "series", size: float = 3.5) -> None:
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        items = []
        for a, b in zip(self.px(x), self.py(y)):
            if shape == "cross":
                s = size
                items.append(f'<path d="M{a - s:.2f},{b - s:.2f}L{a + s:.2f},{b + s:.2f}'
                             f'M{a - s:.2f},{b + s:.2f}L{a + s:.2f},{b - s:.2f}" stroke="{color}"/>')
            else:
                items.append(f'<circle cx="{a:.2f}" cy="{b:.2f}" r="{size}" fill="{color}"/>')
        self.body.append(f'<g class="{css}" {self._data_attrs(name, x, y)}>{"".join(items)}</g>')

    def segment(self, name: str, x0, y0, x1, y1, color: str, css: str = "line", extra: str = "") -> None:
        a0, a1 = self.px([x0, x1])
        b0, b1 = self.py([y0, y1])
        self.body.append(
            f'<line class="{css}" {self._data_attrs(name, [x0, x1], [y0, y1])} {extra} '
            f'x1="{a0:.2f}" y1="{b0:.2f}" x2="{a1:.2f}" y2="{b1:.2f}" '
            f'stroke="{color}" stroke-width="2"/>'
        )

    def span(self, name: str, x0: float, x1: float, color: str = "#ffd27f") -> None:
        a0, a1 = self.px([x0, x1])
        top, bottom = self.top, self.height - self.bottom
        self.body.append(
            f'<rect class="mountain" data-name={quoteattr(name)} data-lo="{_fmt(x0)}" '
            f'data-hi="{_fmt(x1)}" x="{a0:.2f}" y="{top}" width="{max(a1 - a0, 0.5):.2f}" '
            f'height="{bottom - top}" fill="{color}" fill-opacity="0.35"/>'
        )

    def _axes(self) -> str:
        out = []
        x_axis_y = self.height - self.bottom
        out.append(f'<line x1="{self.left}" y1="{x_axis_y}" x2="{self.width - self.right}" '
                   f'y2="{x_axis_y}" stroke="black"/>')
        out.append(f'<line x1="{self.left}" y1="{self.top}" x2="{self.left}" y2="{x_axis_y}" stroke="black"/>')
        for t in _nice_ticks(*self.xlim):
            p = float(self.px(t))
            out.append(f'<line x1="{p:.2f}" y1="{x_axis_y}" x2="{p:.2f}" y2="{x_axis_y + 5}" stroke="black"/>')
            out.append(f'<text x="{p:.2f}" y="{x_axis_y + 18}" font-size="11" text-anchor="middle">{t:g}</text>')
        for t in _nice_ticks(*self.ylim):
            p = float(self.py(t))
            out.append(f'<line x1="{self.left - 5}" y1="{p:.2f}" x2="{self.left}" y2="{p:.2f}" stroke="black"/>')
            out.append(f'<text x="{self.left - 8}" y="{p + 4:.2f}" font-size="11" text-anchor="end">{t:g}</text>')
        out.append(f'<text x="{(self.left + self.width - self.right) / 2}" y="{self.height - 12}" '
                   f'font-size="13" text-anchor="middle">{escape(self.xlabel)}</text>')
        mid = (self.top + self.height - self.bottom) / 2
        out.append(f'<text x="16" y="{mid}" font-size="13" text-anchor="middle" '
                   f'transform="rotate(-90 16 {mid})">{escape(self.ylabel)}</text>')
        out.append(f'<text x="{self.width / 2}" y="24" font-size="15" text-anchor="middle">'
                   f'{escape(self.title)}</text>')
        return "\n".join(out)

    def to_svg(self) -> str:
        clip = (f'<clipPath id="plot"><rect x="{self.left}" y="{self.top}" '
                f'width="{self.width - self.left - self.right}" '
                f'height="{self.height - self.top - self.bottom}"/></clipPath>')
        return (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{self.height}" '
            f'viewBox="0 0 {self.width} {self.height}">\n<defs>{clip}</defs>\n'
            f'<rect width="100%" height="100%" fill="white"/>\n'
            f'<g clip-path="url(#plot)">\n' + "\n".join(self.body) + "\n</g>\n"
            + self._axes() + "\n</svg>\n"
        )


def _padded(lo: float, hi: float, frac: float = 0.05):
    pad = (hi - lo) * frac or 1.0
    return lo - pad, hi + pad


def track_figure(times, f0_hz, hop_sec: float) -> Figure:
    times = np.asarray(times, float)
    f0 = np.asarray(f0_hz, float)
    mask = np.isfinite(f0)
    t, f = times[mask], f0[mask]
    fig = Figure("Pitch track", "time (s)", "f0 (Hz)",
                 _padded(times.min(), times.max(), 0.01) if times.size else (0, 1),
                 _padded(f.min(), f.max()) if f.size else (0, 1))
    fig.polyline("f0", t, f, break_gaps=1.5 * hop_sec, width=1.0)
    return fig


def histogram_figure(raw, smoothed, mountains) -> Figure:
    centers = raw.centers
    fig = Figure("Pitch histogram", "pitch (cents)", "frames per bin",
                 (raw.edges[0], raw.edges[-1]), (0, max(raw.counts.max(), 1) * 1.05))
    for i, m in enumerate(mountains):
        fig.span(f"mountain {i}", raw.edges[m.lo_bin], raw.edges[m.hi_bin + 1])
    fig.polyline("raw", centers, raw.counts, color="#7f7f7f", width=1.0)
    fig.polyline("smoothed", centers, smoothed.counts, color="#d62728", width=2.0)
    return fig


def fit_figure(raw, mountain, fit) -> Figure:
    sl = slice(mountain.lo_bin, mountain.hi_bin + 1)
    x = raw.centers[sl]
    y = raw.counts[sl]
    grid = np.linspace(x[0], x[-1], 10 * (x.size - 1) + 1)
    curve = fit(grid)
    top = max(float(y.max()), float(curve.max()))
    fig = Figure("Tilted Gaussian peak fit", "pitch (cents)", "frames per bin",
                 _padded(x[0], x[-1], 0.02), (min(0.0, float(curve.min())), top * 1.1))
    fig.markers("bins", x, y, color="#1f77b4")
    fig.polyline("fit", grid, curve, color="#d62728", width=2.0)
    fig.segment("peak", fit.peak_cents, 0, fit.peak_cents, top * 1.05, "#2ca02c", css="peak")
    return fig


def scatter_figure(points) -> Figure:
    x = np.array([p.sentence_index for p in points], float)
    y = np.array([p.cents for p in points], float)
    fig = Figure("Detected peaks per sentence", "sentence", "pitch (cents)",
                 _padded(x.min(), x.max()) if x.size else (0, 1),
                 _padded(y.min(), y.max()) if y.size else (0, 1))
    fig.markers("peaks", x, y, color="#1f77b4")
    return fig


def clusters_figure(report) -> Figure:
    pts = report.points
    x = np.array([p.sentence_index for p in pts], float)
    y = np.array([p.cents for p in pts], float)
    xlim = _padded(x.min(), x.max()) if x.size else (0, 1)
    fig = Figure("DBSCAN clusters and drift lines", "sentence", "pitch (cents)", xlim,
                 _padded(y.min(), y.max()) if y.size else (0, 1))
    for cluster, line in report.clusters:
        color = PALETTE[cluster.id % len(PALETTE)]
        cx = [p.sentence_index for p in cluster.points]
        cy = [p.cents for p in cluster.points]
        fig.markers(f"cluster {cluster.id}", cx, cy, color=color, css="series cluster")
        if line is not None:
            x0, x1 = min(cx), max(cx)
            fig.segment(
                f"line {cluster.id}", x0, line.intercept + line.slope * x0,
                x1, line.intercept + line.slope * x1, color, css="regression",
                extra=f'data-cluster="{cluster.id}" data-slope="{_fmt(line.slope)}" '
                      f'data-intercept="{_fmt(line.intercept)}" '
                      f'data-significant="{str(cluster.significant).lower()}"',
            )
    if report.noise:
        fig.markers("noise", [p.sentence_index for p in report.noise],
                    [p.cents for p in report.noise], color="black", shape="cross",
                    css="series noise")
    return fig
