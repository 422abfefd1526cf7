"""Minimal SVG 1.1 plots: lines, scatter points, axes with ticks, legend.

Output is a pure function of the inputs; coordinates are printed with a
fixed number of decimals so regenerating a plot from the same CSV gives
identical bytes.
"""

import csv
import math
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 440
MARGIN = {"left": 70, "right": 160, "top": 40, "bottom": 55}
COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
          "#bcbd22", "#17becf"]


def _fmt(v):
    return f"{v:.2f}"


def _nice_ticks(lo, hi, n=5):
    if hi <= lo:
        hi = lo + 1.0
    step = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(step))
    for mult in (1, 2, 2.5, 5, 10):
        if step <= mult * mag:
            step = mult * mag
            break
    start = math.ceil(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return ticks


def _label(v):
    return f"{v:.4g}"


class Plot:
    """Collects series and renders them on shared axes.

    Parameters
    ----------
    logx, logy : bool
        Base-10 log axes; non-positive values are dropped.
    """

    def __init__(self, title="", xlabel="", ylabel="", logx=False, logy=False):
        self.title, self.xlabel, self.ylabel = title, xlabel, ylabel
        self.logx, self.logy = logx, logy
        self.series = []

    def _tx(self, v, log):
        v = np.asarray(v, dtype=float)
        if log:
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.where(v > 0, np.log10(np.where(v > 0, v, 1.0)), np.nan)
        return v

    def line(self, x, y, label, dashed=False):
        self.series.append(("line", self._tx(x, self.logx), self._tx(y, self.logy), label, dashed))
        return self

    def scatter(self, x, y, label):
        self.series.append(("scatter", self._tx(x, self.logx), self._tx(y, self.logy), label, False))
        return self

    def render(self):
        xs = np.concatenate([s[1] for s in self.series]) if self.series else np.zeros(1)
        ys = np.concatenate([s[2] for s in self.series]) if self.series else np.zeros(1)
        ok = np.isfinite(xs) & np.isfinite(ys)
        xs, ys = (xs[ok], ys[ok]) if ok.any() else (np.zeros(1), np.zeros(1))
        x0, x1 = float(xs.min()), float(xs.max())
        y0, y1 = float(ys.min()), float(ys.max())
        if x1 == x0:
            x0, x1 = x0 - 0.5, x1 + 0.5
        if y1 == y0:
            y0, y1 = y0 - 0.5, y1 + 0.5
        pad = 0.04 * (y1 - y0)
        y0, y1 = y0 - pad, y1 + pad
        L, R, T, B = MARGIN["left"], WIDTH - MARGIN["right"], MARGIN["top"], HEIGHT - MARGIN["bottom"]

        def px(v):
            return L + (v - x0) / (x1 - x0) * (R - L)

        def py(v):
            return B - (v - y0) / (y1 - y0) * (B - T)

        out = [
            '<?xml version="1.0" encoding="UTF-8"?>',
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
            f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
            f'<text x="{(L + R) / 2:.1f}" y="22" text-anchor="middle" font-size="14">{escape(self.title)}</text>',
            f'<rect x="{L}" y="{T}" width="{R - L}" height="{B - T}" fill="none" stroke="black"/>',
        ]
        for t in _nice_ticks(x0, x1):
            X = px(t)
            lab = _label(10 ** t) if self.logx else _label(t)
            out.append(f'<line x1="{_fmt(X)}" y1="{B}" x2="{_fmt(X)}" y2="{B + 5}" stroke="black"/>')
            out.append(f'<text x="{_fmt(X)}" y="{B + 18}" text-anchor="middle">{lab}</text>')
        for t in _nice_ticks(y0, y1):
            Y = py(t)
            lab = _label(10 ** t) if self.logy else _label(t)
            out.append(f'<line x1="{L - 5}" y1="{_fmt(Y)}" x2="{L}" y2="{_fmt(Y)}" stroke="black"/>')
            out.append(f'<text x="{L - 8}" y="{_fmt(Y + 4)}" text-anchor="end">{lab}</text>')
        out.append(f'<text x="{(L + R) / 2:.1f}" y="{HEIGHT - 15}" text-anchor="middle">{escape(self.xlabel)}</text>')
        out.append(f'<text x="18" y="{(T + B) / 2:.1f}" text-anchor="middle" '
                   f'transform="rotate(-90 18 {(T + B) / 2:.1f})">{escape(self.ylabel)}</text>')

        for i, (kind, x, y, label, dashed) in enumerate(self.series):
            color = COLORS[i % len(COLORS)]
            ok = np.isfinite(x) & np.isfinite(y)
            pts = [(px(a), py(b)) for a, b in zip(x[ok], y[ok])]
            if kind == "line" and pts:
                path = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in pts)
                dash = ' stroke-dasharray="6,4"' if dashed else ""
                out.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.6"{dash}/>')
            else:
                out.extend(f'<circle cx="{_fmt(a)}" cy="{_fmt(b)}" r="2" fill="{color}" fill-opacity="0.6"/>'
                           for a, b in pts)
            ly = T + 14 + 18 * i
            out.append(f'<rect x="{R + 12}" y="{ly - 8}" width="14" height="8" fill="{color}"/>')
            out.append(f'<text x="{R + 32}" y="{ly}">{escape(str(label))}</text>')
        out.append("</svg>")
        return "\n".join(out) + "\n"

    def save(self, path):
        with open(path, "w", newline="\n") as fh:
            fh.write(self.render())


def read_csv(path):
    """Columns of a CSV file as a dict of lists of strings."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    cols = {k: [] for k in (rows[0].keys() if rows else [])}
    for r in rows:
        for k, v in r.items():
            cols[k].append(v)
    return cols


def floats(values):
    return np.array([float(v) for v in values])
