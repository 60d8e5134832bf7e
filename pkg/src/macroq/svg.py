"""Minimal deterministic SVG line charts (axes, optional log scales, a few series)."""
from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

_STYLES = (
    ("#000000", ""),
    ("#1f4fbf", "6,4"),
    ("#c0392b", "2,3"),
    ("#2e8b57", "8,3,2,3"),
)
_W, _H = 640, 420
_L, _R, _T, _B = 78, 20, 36, 56


def _nice_ticks(lo, hi, n=5):
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((s * mag for s in (1, 2, 2.5, 5, 10) if s * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return ticks


def _fmt(v):
    return f"{v:.3f}"


def line_chart(
    series,
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    logx: bool = False,
    logy: bool = False,
) -> str:
    """Render ``series`` = [(label, x, y), ...] as an SVG document string.

    Non-finite points (and non-positive ones on log axes) are skipped, which
    breaks the polyline at that point.
    """
    tx = (lambda v: np.log10(v)) if logx else (lambda v: v)
    ty = (lambda v: np.log10(v)) if logy else (lambda v: v)
    prepared = []
    for label, x, y in series:
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        ok = np.isfinite(x) & np.isfinite(y)
        if logx:
            ok &= x > 0
        if logy:
            ok &= y > 0
        with np.errstate(divide="ignore", invalid="ignore"):
            prepared.append((label, np.where(ok, tx(x), np.nan), np.where(ok, ty(y), np.nan)))
    xs = np.concatenate([p[1] for p in prepared]) if prepared else np.array([0.0, 1.0])
    ys = np.concatenate([p[2] for p in prepared]) if prepared else np.array([0.0, 1.0])
    xs, ys = xs[np.isfinite(xs)], ys[np.isfinite(ys)]
    if xs.size == 0:
        xs = np.array([0.0, 1.0])
    if ys.size == 0:
        ys = np.array([0.0, 1.0])
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pad = 0.04 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad
    pw, ph = _W - _L - _R, _H - _T - _B

    def px(v):
        return _L + (v - x0) / (x1 - x0) * pw

    def py(v):
        return _T + ph - (v - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}" '
        'font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="#ffffff"/>',
        f'<rect x="{_L}" y="{_T}" width="{pw}" height="{ph}" fill="none" stroke="#000000"/>',
    ]
    if title:
        out.append(f'<text x="{_W / 2:.1f}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>')

    def ticks(lo, hi, log):
        if log:
            return [float(k) for k in range(math.ceil(lo), math.floor(hi) + 1)] or _nice_ticks(lo, hi)
        return _nice_ticks(lo, hi)

    for t in ticks(x0, x1, logx):
        label = f"1e{int(t)}" if logx and float(t).is_integer() else f"{10 ** t if logx else t:g}"
        out.append(f'<line x1="{_fmt(px(t))}" y1="{_T + ph}" x2="{_fmt(px(t))}" y2="{_T + ph + 5}" stroke="#000000"/>')
        out.append(f'<text x="{_fmt(px(t))}" y="{_T + ph + 19}" text-anchor="middle">{label}</text>')
    for t in ticks(y0, y1, logy):
        label = f"1e{int(t)}" if logy and float(t).is_integer() else f"{10 ** t if logy else t:g}"
        out.append(f'<line x1="{_L - 5}" y1="{_fmt(py(t))}" x2="{_L}" y2="{_fmt(py(t))}" stroke="#000000"/>')
        out.append(f'<text x="{_L - 8}" y="{_fmt(py(t) + 4)}" text-anchor="end">{label}</text>')
    if xlabel:
        out.append(f'<text x="{_L + pw / 2:.1f}" y="{_H - 14}" text-anchor="middle">{escape(xlabel)}</text>')
    if ylabel:
        out.append(
            f'<text x="18" y="{_T + ph / 2:.1f}" text-anchor="middle" '
            f'transform="rotate(-90 18 {_T + ph / 2:.1f})">{escape(ylabel)}</text>'
        )

    for i, (label, x, y) in enumerate(prepared):
        color, dash = _STYLES[i % len(_STYLES)]
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        segment = []
        for xv, yv in zip(x, y):
            if np.isfinite(xv) and np.isfinite(yv):
                segment.append(f"{_fmt(px(xv))},{_fmt(py(yv))}")
            elif segment:
                out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash_attr} points="{" ".join(segment)}"/>')
                segment = []
        if segment:
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash_attr} points="{" ".join(segment)}"/>')
        ly = _T + 14 + 16 * i
        out.append(f'<line x1="{_L + pw - 150}" y1="{ly}" x2="{_L + pw - 122}" y2="{ly}" stroke="{color}" stroke-width="1.5"{dash_attr}/>')
        out.append(f'<text x="{_L + pw - 116}" y="{ly + 4}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
