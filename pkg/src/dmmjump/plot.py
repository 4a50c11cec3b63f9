"""Dependency-free SVG rendering of histogram, trajectory, sweep and scaling CSVs.

Output bytes are a deterministic function of the input table and options.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 420
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 20, 30, 55
PALETTE = ["#1f77b4", "#2ca02c", "#d62728", "#9467bd", "#ff7f0e", "#8c564b",
           "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"]


class SchemaError(ValueError):
    pass


def read_table(text: str, required: set[str]) -> tuple[list[str], list[dict[str, str]]]:
    reader = csv.DictReader(io.StringIO(text))
    cols = reader.fieldnames or []
    missing = required - set(cols)
    if missing:
        raise SchemaError(f"missing column(s): {', '.join(sorted(missing))}")
    return list(cols), list(reader)


def _num(s: str) -> float | None:
    s = s.strip()
    return float(s) if s else None


def _f(x: float) -> str:
    return f"{x:.2f}"


@dataclass
class Axis:
    lo: float
    hi: float
    log: bool
    pix_lo: float
    pix_hi: float

    @classmethod
    def fit(cls, values, log, pix_lo, pix_hi, include_zero=False):
        vals = [v for v in values if v is not None and math.isfinite(v) and (v > 0 or not log)]
        if not vals:
            vals = [1.0] if log else [0.0]
        lo, hi = min(vals), max(vals)
        if include_zero and not log:
            lo = min(lo, 0.0)
        if log:
            lo, hi = math.log10(lo), math.log10(hi)
        if hi == lo:
            lo, hi = lo - 0.5, hi + 0.5
        pad = 0.05 * (hi - lo)
        if not (include_zero and not log and lo == 0.0):
            lo -= pad
        hi += pad
        return cls(lo, hi, log, pix_lo, pix_hi)

    def __call__(self, v: float) -> float:
        x = math.log10(v) if self.log else v
        return self.pix_lo + (x - self.lo) / (self.hi - self.lo) * (self.pix_hi - self.pix_lo)

    def ticks(self, k=5):
        if self.log:
            return [10.0**e for e in range(math.ceil(self.lo), math.floor(self.hi) + 1)]
        span = self.hi - self.lo
        step = 10 ** math.floor(math.log10(span / k))
        for mult in (1, 2, 5, 10):
            if span / (step * mult) <= k:
                step *= mult
                break
        start = math.ceil(self.lo / step) * step
        out, t = [], start
        while t <= self.hi + 1e-12:
            out.append(round(t, 10))
            t += step
        return out


class Svg:
    def __init__(self, title: str):
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
            f'<text x="{WIDTH / 2}" y="18" text-anchor="middle" font-size="14">{escape(title)}</text>',
        ]

    def add(self, s: str):
        self.parts.append(s)

    def axes(self, xa: Axis, ya: Axis, xlabel: str, ylabel: str):
        x0, x1 = MARGIN_L, WIDTH - MARGIN_R
        y0, y1 = HEIGHT - MARGIN_B, MARGIN_T
        self.add(f'<path class="frame" d="M{x0} {y1} V{y0} H{x1}" fill="none" stroke="black"/>')
        for t in xa.ticks():
            px = xa(t)
            self.add(f'<path class="tick" d="M{_f(px)} {y0} v5" stroke="black"/>'
                     f'<text x="{_f(px)}" y="{y0 + 18}" text-anchor="middle">{t:g}</text>')
        for t in ya.ticks():
            py = ya(t)
            self.add(f'<path class="tick" d="M{x0} {_f(py)} h-5" stroke="black"/>'
                     f'<text x="{x0 - 8}" y="{_f(py + 4)}" text-anchor="end">{t:g}</text>')
        self.add(f'<text x="{(x0 + x1) / 2}" y="{HEIGHT - 15}" text-anchor="middle">{escape(xlabel)}</text>')
        self.add(f'<text x="16" y="{(y0 + y1) / 2}" text-anchor="middle" '
                 f'transform="rotate(-90 16 {(y0 + y1) / 2})">{escape(ylabel)}</text>')

    def polyline(self, pts, color, cls="series", dashed=False, width=1.5):
        if len(pts) < 1:
            return
        d = " ".join(f"{_f(x)},{_f(y)}" for x, y in pts)
        dash = ' stroke-dasharray="6 4"' if dashed else ""
        self.add(f'<polyline class="{cls}" points="{d}" fill="none" stroke="{color}" '
                 f'stroke-width="{width}"{dash}/>')

    def markers(self, pts, color):
        for x, y in pts:
            self.add(f'<circle class="marker" cx="{_f(x)}" cy="{_f(y)}" r="3" fill="{color}"/>')

    def legend(self, entries):
        for k, (label, color, dashed) in enumerate(entries):
            y = MARGIN_T + 8 + 16 * k
            x = WIDTH - MARGIN_R - 150
            dash = ' stroke-dasharray="6 4"' if dashed else ""
            self.add(f'<path class="legend" d="M{x} {y} h20" stroke="{color}" stroke-width="2"{dash}/>'
                     f'<text x="{x + 26}" y="{y + 4}">{escape(label)}</text>')

    def render(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def _x_span():
    return MARGIN_L, WIDTH - MARGIN_R


def _y_span():
    return HEIGHT - MARGIN_B, MARGIN_T


def plot_histogram(text: str, logy: bool = False, title: str = "TTS distribution") -> str:
    cols, rows = read_table(text, {"bin_center", "count"})
    xs = [float(r["bin_center"]) for r in rows]
    counts = [float(r["count"]) for r in rows]
    fitted = [_num(r["fitted_value"]) for r in rows] if "fitted_value" in cols else []
    w = (xs[1] - xs[0]) if len(xs) > 1 else 1.0
    xa = Axis.fit([x - w / 2 for x in xs] + [x + w / 2 for x in xs], False, *_x_span())
    ya = Axis.fit(counts + [f for f in fitted if f is not None], logy, *_y_span(), include_zero=True)
    svg = Svg(title)
    svg.axes(xa, ya, "TTS", "count")
    base = ya(ya.lo if not logy else 10**ya.lo)
    for x, c in zip(xs, counts):
        if logy and c <= 0:
            continue
        top = ya(c)
        left, right = xa(x - w / 2), xa(x + w / 2)
        svg.add(f'<rect class="bar" x="{_f(left)}" y="{_f(top)}" width="{_f(right - left)}" '
                f'height="{_f(base - top)}" fill="#9ecae1" stroke="#3182bd"/>')
    pts = [(xa(x), ya(f)) for x, f in zip(xs, fitted) if f is not None and (f > 0 or not logy)]
    svg.polyline(pts, "#d62728", cls="fit")
    return svg.render()


def plot_trajectory(text: str, title: str = "Voltage trajectories") -> str:
    cols, rows = read_table(text, {"t"})
    vcols = [c for c in cols if c.startswith("v")]
    if not vcols:
        raise SchemaError("trajectory CSV needs at least one v<i> column")
    ts = [float(r["t"]) for r in rows]
    xa = Axis.fit(ts, False, *_x_span())
    ya = Axis(-1.05, 1.05, False, *_y_span())
    svg = Svg(title)
    svg.axes(xa, ya, "t", "v")
    for k, c in enumerate(vcols):
        svg.polyline([(xa(t), ya(float(r[c]))) for t, r in zip(ts, rows)],
                     PALETTE[k % len(PALETTE)], width=1.0)
    return svg.render()


def plot_sweep(text: str, title: str = "Normalized median TTS") -> str:
    cols, rows = read_table(text, {"v_thr", "v_jump", "n", "nmtts"})
    thr = [float(r["v_thr"]) for r in rows]
    # threshold sweep unless every row shares one threshold
    xkey = "v_jump" if len(set(thr)) == 1 else "v_thr"
    groups: dict[str, list] = {}
    for r in rows:
        groups.setdefault(r["n"], []).append(r)
    xs = [float(r[xkey]) for r in rows]
    ys = [_num(r["nmtts"]) for r in rows]
    models = [(_num(r["model_curve"]) if "model_curve" in cols else 1 - float(r["v_jump"]) / 2)
              for r in rows]
    xa = Axis.fit(xs, False, *_x_span())
    ya = Axis.fit(ys + models + [1.0], False, *_y_span(), include_zero=True)
    svg = Svg(title)
    svg.axes(xa, ya, "V_thr" if xkey == "v_thr" else "V_jump", "NMTTS")
    legend = []
    for k, (n, grp) in enumerate(sorted(groups.items(), key=lambda g: int(g[0]))):
        color = PALETTE[k % len(PALETTE)]
        pts = sorted((float(r[xkey]), _num(r["nmtts"])) for r in grp if _num(r["nmtts"]) is not None)
        pix = [(xa(x), ya(y)) for x, y in pts]
        svg.polyline(pix, color)
        svg.markers(pix, color)
        legend.append((f"N={n}", color, False))
    model_pts = sorted({(x, m) for x, m in zip(xs, models) if m is not None})
    svg.polyline([(xa(x), ya(m)) for x, m in model_pts], "black", cls="model", dashed=True)
    legend.append(("1 - V_jump/2", "black", True))
    svg.legend(legend)
    return svg.render()


def plot_scaling(text: str, logx: bool = True, logy: bool = True, title: str = "Scaling") -> str:
    cols, rows = read_table(text, {"n", "median_base", "median_mod"})
    ns = [float(r["n"]) for r in rows]
    series = [("median_base", "unmodified"), ("median_mod", "with jumps")]
    vals = [_num(r[c]) for r in rows for c, _ in series]
    xa = Axis.fit(ns, logx, *_x_span())
    ya = Axis.fit(vals, logy, *_y_span())
    svg = Svg(title)
    svg.axes(xa, ya, "N", "median TTS")
    legend = []
    for k, (c, label) in enumerate(series):
        color = PALETTE[k]
        pts = sorted((n, _num(r[c])) for n, r in zip(ns, rows) if _num(r[c]) is not None)
        pix = [(xa(x), ya(y)) for x, y in pts]
        svg.polyline(pix, color)
        svg.markers(pix, color)
        legend.append((label, color, False))
    svg.legend(legend)
    return svg.render()


def render(kind: str, text: str, logx: bool | None = None, logy: bool | None = None) -> str:
    """Render one of the four plot kinds; ``None`` log flags use the kind's default."""
    if kind == "histogram":
        return plot_histogram(text, logy=bool(logy))
    if kind == "trajectory":
        return plot_trajectory(text)
    if kind == "sweep":
        return plot_sweep(text)
    if kind == "scaling":
        return plot_scaling(text, logx=True if logx is None else logx,
                            logy=True if logy is None else logy)
    raise ValueError(f"unknown plot kind {kind!r}")
