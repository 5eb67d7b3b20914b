"""Minimal deterministic SVG charts (no timestamps, fixed number formatting)."""

from __future__ import annotations

import math
from typing import Sequence

WIDTH, HEIGHT = 640, 400
MARGIN = 60
COLORS = ("#1f77b4", "#d62728", "#7f7f7f", "#bdbdbd", "#2ca02c")


def _f(x: float) -> str:
    return f"{x:.2f}"


def _header(title: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="24" text-anchor="middle" font-family="sans-serif" font-size="15">{_esc(title)}</text>',
    ]


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _axes(lines: list[str], xlabel: str, ylabel: str) -> None:
    x0, y0, x1, y1 = MARGIN, HEIGHT - MARGIN, WIDTH - MARGIN / 2, MARGIN / 2 + 10
    lines.append(f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>')
    lines.append(f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>')
    lines.append(f'<text x="{(x0 + x1) / 2}" y="{HEIGHT - 15}" text-anchor="middle" font-family="sans-serif" font-size="12">{_esc(xlabel)}</text>')
    lines.append(f'<text x="16" y="{(y0 + y1) / 2}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 16 {(y0 + y1) / 2})">{_esc(ylabel)}</text>')


def _legend(lines: list[str], labels: Sequence[str]) -> None:
    for i, label in enumerate(labels):
        y = MARGIN / 2 + 20 + 16 * i
        x = WIDTH - 170
        lines.append(f'<rect x="{x}" y="{y - 9}" width="10" height="10" fill="{COLORS[i % len(COLORS)]}"/>')
        lines.append(f'<text x="{x + 15}" y="{y}" font-family="sans-serif" font-size="11">{_esc(label)}</text>')


def loglog_curves(series: dict[str, tuple[Sequence[float], Sequence[float]]], title: str, xlabel: str = "round", ylabel: str = "total regret") -> str:
    """Polylines on log-log axes; non-positive points are skipped."""
    pts = {
        name: [(math.log10(x), math.log10(y)) for x, y in zip(xs, ys) if x > 0 and y > 0]
        for name, (xs, ys) in series.items()
    }
    allx = [p[0] for v in pts.values() for p in v] or [0.0, 1.0]
    ally = [p[1] for v in pts.values() for p in v] or [0.0, 1.0]
    lox, hix = math.floor(min(allx)), math.ceil(max(allx))
    loy, hiy = math.floor(min(ally)), math.ceil(max(ally))
    hix = max(hix, lox + 1)
    hiy = max(hiy, loy + 1)
    x0, x1 = MARGIN, WIDTH - MARGIN / 2
    y0, y1 = HEIGHT - MARGIN, MARGIN / 2 + 10

    def sx(x: float) -> float:
        return x0 + (x - lox) / (hix - lox) * (x1 - x0)

    def sy(y: float) -> float:
        return y0 - (y - loy) / (hiy - loy) * (y0 - y1)

    lines = _header(title)
    _axes(lines, xlabel, ylabel)
    for d in range(lox, hix + 1):
        lines.append(f'<text x="{_f(sx(d))}" y="{y0 + 16}" text-anchor="middle" font-family="sans-serif" font-size="10">1e{d}</text>')
    for d in range(loy, hiy + 1):
        lines.append(f'<text x="{x0 - 6}" y="{_f(sy(d) + 3)}" text-anchor="end" font-family="sans-serif" font-size="10">1e{d}</text>')
    for i, (name, p) in enumerate(pts.items()):
        if not p:
            continue
        path = " ".join(f"{_f(sx(x))},{_f(sy(y))}" for x, y in p)
        lines.append(f'<polyline fill="none" stroke="{COLORS[i % len(COLORS)]}" stroke-width="1.5" points="{path}"/>')
    _legend(lines, list(pts))
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def grouped_bars(labels: Sequence[str], groups: dict[str, Sequence[float]], title: str, ylabel: str = "average soldiers") -> str:
    """One bar per (battle, series); reference series are drawn in gray."""
    k = len(labels)
    top = max([max(v) for v in groups.values() if len(v)] + [1.0])
    x0, x1 = MARGIN, WIDTH - MARGIN / 2
    y0, y1 = HEIGHT - MARGIN, MARGIN / 2 + 10
    slot = (x1 - x0) / max(k, 1)
    bar = slot * 0.8 / max(len(groups), 1)
    lines = _header(title)
    _axes(lines, "battle", ylabel)
    for tick in range(5):
        val = top * tick / 4
        y = y0 - val / top * (y0 - y1)
        lines.append(f'<text x="{x0 - 6}" y="{_f(y + 3)}" text-anchor="end" font-family="sans-serif" font-size="10">{val:.1f}</text>')
    for j, label in enumerate(labels):
        cx = x0 + slot * (j + 0.5)
        lines.append(f'<text x="{_f(cx)}" y="{y0 + 16}" text-anchor="middle" font-family="sans-serif" font-size="10">{_esc(label)}</text>')
        for g, vals in enumerate(groups.values()):
            h = vals[j] / top * (y0 - y1)
            x = x0 + slot * j + slot * 0.1 + g * bar
            lines.append(f'<rect x="{_f(x)}" y="{_f(y0 - h)}" width="{_f(bar)}" height="{_f(h)}" fill="{COLORS[g % len(COLORS)]}"/>')
    _legend(lines, list(groups))
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
