"""Minimal deterministic SVG charts (no plotting dependency, no timestamps).

Two chart types cover the run artifacts: step charts for supply curves and
grouped bar charts for capacity additions. Output depends only on the data
passed in, so reruns produce byte-identical files.
"""

from __future__ import annotations

import math
from typing import Sequence

_WIDTH = 920.0
_HEIGHT = 560.0
_MARGIN_LEFT = 90.0
_MARGIN_RIGHT = 30.0
_MARGIN_TOP = 50.0
_MARGIN_BOTTOM = 70.0

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def _fmt(value: float) -> str:
    return f"{value:.2f}"


def _nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    span = hi - lo
    raw = span / max(target, 2)
    power = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        step = mult * power
        if span / step <= target:
            break
    first = math.ceil(lo / step) * step
    ticks = []
    value = first
    while value <= hi + 1e-9 * span:
        ticks.append(round(value, 10))
        value += step
    return ticks


class _Canvas:
    def __init__(self, title: str, x_label: str, y_label: str,
                 x_range: tuple[float, float], y_range: tuple[float, float],
                 x_ticks: bool = True):
        self.parts: list[str] = []
        self.x_lo, self.x_hi = x_range
        self.y_lo, self.y_hi = y_range
        self.x_ticks = x_ticks
        if self.x_hi <= self.x_lo:
            self.x_hi = self.x_lo + 1.0
        if self.y_hi <= self.y_lo:
            self.y_hi = self.y_lo + 1.0
        self.parts.append(
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{int(_WIDTH)}" '
            f'height="{int(_HEIGHT)}" viewBox="0 0 {int(_WIDTH)} {int(_HEIGHT)}" '
            f'font-family="Helvetica, Arial, sans-serif">'
        )
        self.parts.append(f'<rect width="{int(_WIDTH)}" height="{int(_HEIGHT)}" fill="#ffffff"/>')
        self.parts.append(
            f'<text x="{_fmt(_WIDTH / 2)}" y="28" font-size="18" text-anchor="middle" '
            f'fill="#222222">{title}</text>'
        )
        self.parts.append(
            f'<text x="{_fmt(_MARGIN_LEFT + self._plot_w() / 2)}" y="{_fmt(_HEIGHT - 16)}" '
            f'font-size="13" text-anchor="middle" fill="#444444">{x_label}</text>'
        )
        cy = _MARGIN_TOP + self._plot_h() / 2
        self.parts.append(
            f'<text x="22" y="{_fmt(cy)}" font-size="13" text-anchor="middle" '
            f'fill="#444444" transform="rotate(-90 22 {_fmt(cy)})">{y_label}</text>'
        )
        self._axes()

    @staticmethod
    def _plot_w() -> float:
        return _WIDTH - _MARGIN_LEFT - _MARGIN_RIGHT

    @staticmethod
    def _plot_h() -> float:
        return _HEIGHT - _MARGIN_TOP - _MARGIN_BOTTOM

    def px(self, x: float) -> float:
        return _MARGIN_LEFT + (x - self.x_lo) / (self.x_hi - self.x_lo) * self._plot_w()

    def py(self, y: float) -> float:
        return _MARGIN_TOP + (1.0 - (y - self.y_lo) / (self.y_hi - self.y_lo)) * self._plot_h()

    def _axes(self) -> None:
        x0, x1 = _MARGIN_LEFT, _WIDTH - _MARGIN_RIGHT
        y0, y1 = _MARGIN_TOP, _HEIGHT - _MARGIN_BOTTOM
        for tick in _nice_ticks(self.y_lo, self.y_hi):
            yy = self.py(tick)
            self.parts.append(
                f'<line x1="{_fmt(x0)}" y1="{_fmt(yy)}" x2="{_fmt(x1)}" y2="{_fmt(yy)}" '
                f'stroke="#e0e0e0" stroke-width="1"/>'
            )
            self.parts.append(
                f'<text x="{_fmt(x0 - 8)}" y="{_fmt(yy + 4)}" font-size="11" '
                f'text-anchor="end" fill="#555555">{tick:g}</text>'
            )
        if self.x_ticks:
            for tick in _nice_ticks(self.x_lo, self.x_hi):
                xx = self.px(tick)
                self.parts.append(
                    f'<text x="{_fmt(xx)}" y="{_fmt(y1 + 18)}" font-size="11" '
                    f'text-anchor="middle" fill="#555555">{tick:g}</text>'
                )
        self.parts.append(
            f'<rect x="{_fmt(x0)}" y="{_fmt(y0)}" width="{_fmt(x1 - x0)}" '
            f'height="{_fmt(y1 - y0)}" fill="none" stroke="#333333" stroke-width="1"/>'
        )

    def legend(self, labels: Sequence[str]) -> None:
        x = _MARGIN_LEFT + 14
        y = _MARGIN_TOP + 16
        for k, label in enumerate(labels):
            color = PALETTE[k % len(PALETTE)]
            self.parts.append(
                f'<rect x="{_fmt(x)}" y="{_fmt(y - 9)}" width="14" height="10" fill="{color}"/>'
            )
            self.parts.append(
                f'<text x="{_fmt(x + 20)}" y="{_fmt(y)}" font-size="12" fill="#333333">{label}</text>'
            )
            y += 18

    def finish(self) -> str:
        self.parts.append("</svg>")
        return "\n".join(self.parts) + "\n"


def step_chart(title: str, x_label: str, y_label: str,
               series: Sequence[tuple[str, Sequence[float], Sequence[float]]]) -> str:
    """Left-continuous step chart; each series is (label, xs, ys)."""
    xs_all = [x for _, xs, _ in series for x in xs] or [0.0]
    ys_all = [y for _, _, ys in series for y in ys] or [0.0]
    canvas = _Canvas(title, x_label, y_label,
                     (0.0, max(xs_all)), (0.0, max(ys_all) * 1.05))
    for k, (label, xs, ys) in enumerate(series):
        color = PALETTE[k % len(PALETTE)]
        points: list[str] = []
        prev_x = 0.0
        for x, y in zip(xs, ys):
            points.append(f"{_fmt(canvas.px(prev_x))},{_fmt(canvas.py(y))}")
            points.append(f"{_fmt(canvas.px(x))},{_fmt(canvas.py(y))}")
            prev_x = x
        if points:
            canvas.parts.append(
                f'<polyline fill="none" stroke="{color}" stroke-width="2" '
                f'points="{" ".join(points)}"/>'
            )
    canvas.legend([label for label, _, _ in series])
    return canvas.finish()


def grouped_bar_chart(title: str, x_label: str, y_label: str,
                      groups: Sequence[str],
                      series: Sequence[tuple[str, Sequence[float]]]) -> str:
    """Grouped bars; each series is (label, values aligned with groups)."""
    top = max((v for _, values in series for v in values), default=0.0)
    canvas = _Canvas(title, x_label, y_label, (0.0, float(len(groups))),
                     (0.0, top * 1.1), x_ticks=False)
    n_series = max(len(series), 1)
    slot = canvas._plot_w() / max(len(groups), 1)
    bar_w = slot * 0.8 / n_series
    for g, group in enumerate(groups):
        x_left = _MARGIN_LEFT + g * slot + slot * 0.1
        for k, (_, values) in enumerate(series):
            value = values[g]
            y_top = canvas.py(value)
            height = (_HEIGHT - _MARGIN_BOTTOM) - y_top
            canvas.parts.append(
                f'<rect x="{_fmt(x_left + k * bar_w)}" y="{_fmt(y_top)}" '
                f'width="{_fmt(bar_w)}" height="{_fmt(max(height, 0.0))}" '
                f'fill="{PALETTE[k % len(PALETTE)]}"/>'
            )
        canvas.parts.append(
            f'<text x="{_fmt(x_left + slot * 0.4)}" y="{_fmt(_HEIGHT - _MARGIN_BOTTOM + 18)}" '
            f'font-size="11" text-anchor="middle" fill="#555555">{group}</text>'
        )
    canvas.legend([label for label, _ in series])
    return canvas.finish()
