"""Tiny deterministic SVG plotter: line plots with error bars, histograms.

Output is a pure function of the numeric inputs (coordinates are formatted
with a fixed precision), so re-plotting identical data yields identical
bytes. That property is load-bearing: report generation is tested by
re-ingesting its own CSV output.
"""

from __future__ import annotations

import math

WIDTH, HEIGHT = 640, 480
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 20, 40, 50
PALETTE = ("#1f6fb4", "#d45500", "#2a8f43", "#b03060", "#6a51a3", "#555555")


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _nice_ticks(lo: float, hi: float, n: int = 5):
    if not (math.isfinite(lo) and math.isfinite(hi)):
        return [0.0, 1.0]
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    start = math.ceil(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-12 * step:
        ticks.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return ticks or [lo, hi]


class _Canvas:
    def __init__(self, title, xlabel, ylabel, xlim, ylim):
        self.parts = []
        self.x0, self.x1 = xlim
        self.y0, self.y1 = ylim
        if self.x1 <= self.x0:
            self.x1 = self.x0 + 1.0
        if self.y1 <= self.y0:
            self.y1 = self.y0 + 1.0
        self.parts.append(
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
            f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">')
        self.parts.append(f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>')
        self._text(WIDTH / 2, MARGIN_T / 2 + 6, title, anchor="middle", size=15)
        self._text(WIDTH / 2, HEIGHT - 12, xlabel, anchor="middle")
        self.parts.append(
            f'<text x="16" y="{HEIGHT / 2}" font-family="sans-serif" font-size="12" '
            f'text-anchor="middle" transform="rotate(-90 16 {HEIGHT / 2})">{ylabel}</text>')
        self._axes()

    def px(self, x):
        span = self.x1 - self.x0
        return MARGIN_L + (x - self.x0) / span * (WIDTH - MARGIN_L - MARGIN_R)

    def py(self, y):
        span = self.y1 - self.y0
        return HEIGHT - MARGIN_B - (y - self.y0) / span * (HEIGHT - MARGIN_T - MARGIN_B)

    def _text(self, x, y, s, anchor="start", size=12):
        self.parts.append(
            f'<text x="{_fmt(x)}" y="{_fmt(y)}" font-family="sans-serif" '
            f'font-size="{size}" text-anchor="{anchor}">{s}</text>')

    def _axes(self):
        bx0, bx1 = MARGIN_L, WIDTH - MARGIN_R
        by0, by1 = MARGIN_T, HEIGHT - MARGIN_B
        self.parts.append(
            f'<rect x="{bx0}" y="{by0}" width="{bx1 - bx0}" height="{by1 - by0}" '
            f'fill="none" stroke="#333" stroke-width="1"/>')
        for t in _nice_ticks(self.x0, self.x1):
            if not self.x0 <= t <= self.x1:
                continue
            x = self.px(t)
            self.parts.append(f'<line x1="{_fmt(x)}" y1="{by1}" x2="{_fmt(x)}" '
                              f'y2="{by1 + 5}" stroke="#333"/>')
            self._text(x, by1 + 18, _fmt(t), anchor="middle")
        for t in _nice_ticks(self.y0, self.y1):
            if not self.y0 <= t <= self.y1:
                continue
            y = self.py(t)
            self.parts.append(f'<line x1="{bx0 - 5}" y1="{_fmt(y)}" x2="{bx0}" '
                              f'y2="{_fmt(y)}" stroke="#333"/>')
            self._text(bx0 - 8, y + 4, _fmt(t), anchor="end")

    def polyline(self, xs, ys, color):
        pts = " ".join(f"{_fmt(self.px(x))},{_fmt(self.py(y))}" for x, y in zip(xs, ys))
        self.parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                          f'stroke-width="1.5"/>')
        for x, y in zip(xs, ys):
            self.parts.append(f'<circle cx="{_fmt(self.px(x))}" cy="{_fmt(self.py(y))}" '
                              f'r="3" fill="{color}"/>')

    def errorbars(self, xs, ys, errs, color):
        for x, y, e in zip(xs, ys, errs):
            px = self.px(x)
            lo, hi = self.py(y - e), self.py(y + e)
            self.parts.append(f'<line x1="{_fmt(px)}" y1="{_fmt(lo)}" x2="{_fmt(px)}" '
                              f'y2="{_fmt(hi)}" stroke="{color}" stroke-width="1"/>')
            for yy in (lo, hi):
                self.parts.append(f'<line x1="{_fmt(px - 3)}" y1="{_fmt(yy)}" '
                                  f'x2="{_fmt(px + 3)}" y2="{_fmt(yy)}" '
                                  f'stroke="{color}" stroke-width="1"/>')

    def bar(self, x_left, x_right, height, color):
        y = self.py(height)
        base = self.py(max(self.y0, 0.0))
        self.parts.append(
            f'<rect x="{_fmt(self.px(x_left))}" y="{_fmt(min(y, base))}" '
            f'width="{_fmt(self.px(x_right) - self.px(x_left))}" '
            f'height="{_fmt(abs(base - y))}" fill="{color}" stroke="#333" '
            f'stroke-width="0.5"/>')

    def legend(self, labels_colors):
        y = MARGIN_T + 14
        for label, color in labels_colors:
            x = WIDTH - MARGIN_R - 150
            self.parts.append(f'<line x1="{x}" y1="{y - 4}" x2="{x + 22}" y2="{y - 4}" '
                              f'stroke="{color}" stroke-width="2"/>')
            self._text(x + 28, y, label)
            y += 16

    def render(self) -> str:
        return "\n".join(self.parts) + "\n</svg>\n"


def line_plot(series, title, xlabel, ylabel, hline=None) -> str:
    """Render series = [{label, x, y, yerr?}, ...] to an SVG string."""
    xs = [x for s in series for x in s["x"]]
    ys = []
    for s in series:
        errs = s.get("yerr") or [0.0] * len(s["y"])
        for y, e in zip(s["y"], errs):
            ys.extend((y - e, y + e))
    if hline is not None:
        ys.append(hline)
    pad_x = 0.05 * (max(xs) - min(xs)) if len(set(xs)) > 1 else 0.5
    pad_y = 0.05 * (max(ys) - min(ys)) if len(set(ys)) > 1 else 0.5
    cv = _Canvas(title, xlabel, ylabel,
                 (min(xs) - pad_x, max(xs) + pad_x),
                 (min(ys) - pad_y, max(ys) + pad_y))
    if hline is not None and cv.y0 <= hline <= cv.y1:
        y = cv.py(hline)
        cv.parts.append(f'<line x1="{MARGIN_L}" y1="{_fmt(y)}" '
                        f'x2="{WIDTH - MARGIN_R}" y2="{_fmt(y)}" stroke="#999" '
                        f'stroke-dasharray="4 3"/>')
    legend = []
    for i, s in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        order = sorted(range(len(s["x"])), key=lambda j: s["x"][j])
        xs_o = [s["x"][j] for j in order]
        ys_o = [s["y"][j] for j in order]
        if s.get("yerr"):
            cv.errorbars(xs_o, ys_o, [s["yerr"][j] for j in order], color)
        cv.polyline(xs_o, ys_o, color)
        legend.append((s["label"], color))
    cv.legend(legend)
    return cv.render()


def histogram_plot(edges, counts, title, xlabel) -> str:
    cv = _Canvas(title, xlabel, "count",
                 (float(edges[0]), float(edges[-1])),
                 (0.0, float(max(counts)) * 1.05 if max(counts) > 0 else 1.0))
    for i, c in enumerate(counts):
        cv.bar(float(edges[i]), float(edges[i + 1]), float(c), "#7aa6d2")
    return cv.render()
