"""Minimal deterministic SVG charts (line, box, bar) from result CSVs."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np
import pandas as pd

WIDTH, HEIGHT = 640, 400
LEFT, RIGHT, TOP, BOTTOM = 60, 20, 30, 50
PALETTE = ("#1f77b4", "#d62728", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b", "#7f7f7f")


@dataclass(frozen=True)
class ChartSpec:
    kind: str  # line | box | bar
    x: str
    y: str
    group: str | None = None
    title: str = ""
    where: tuple[tuple[str, str], ...] = ()  # equality filters applied before plotting

    def __post_init__(self) -> None:
        if self.kind not in ("line", "box", "bar"):
            raise ValueError(f"unknown chart kind {self.kind!r}")


def _range(lo: float, hi: float) -> tuple[float, float]:
    if not (np.isfinite(lo) and np.isfinite(hi)):
        return 0.0, 1.0
    if lo == hi:
        return lo - 0.5, hi + 0.5
    return lo, hi


class _Axes:
    def __init__(self, xlo: float, xhi: float, ylo: float, yhi: float) -> None:
        self.xlo, self.xhi = _range(xlo, xhi)
        self.ylo, self.yhi = _range(ylo, yhi)

    def px(self, x: float) -> float:
        return LEFT + (x - self.xlo) / (self.xhi - self.xlo) * (WIDTH - LEFT - RIGHT)

    def py(self, y: float) -> float:
        return HEIGHT - BOTTOM - (y - self.ylo) / (self.yhi - self.ylo) * (HEIGHT - TOP - BOTTOM)


def _f(v: float) -> str:
    return f"{v:.2f}"


def _frame(ax: _Axes, spec: ChartSpec) -> list[str]:
    x0, x1 = LEFT, WIDTH - RIGHT
    y0, y1 = HEIGHT - BOTTOM, TOP
    out = [
        f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>',
        f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>',
        f'<text x="{(x0 + x1) / 2:.2f}" y="{HEIGHT - 10}" text-anchor="middle" font-size="12">{escape(spec.x)}</text>',
        f'<text x="15" y="{(y0 + y1) / 2:.2f}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 15 {(y0 + y1) / 2:.2f})">{escape(spec.y)}</text>',
    ]
    for t in np.linspace(ax.ylo, ax.yhi, 5):
        out.append(f'<text x="{LEFT - 5}" y="{_f(ax.py(t) + 4)}" text-anchor="end" font-size="10">{t:.3g}</text>')
    if spec.title:
        out.append(f'<text x="{WIDTH / 2:.2f}" y="18" text-anchor="middle" font-size="14">{escape(spec.title)}</text>')
    return out


def render_svg_frame(df: pd.DataFrame, spec: ChartSpec) -> str:
    for col, val in spec.where:
        if col in df.columns:
            df = df[df[col].astype(str) == val]
    body: list[str] = []
    if df.empty or spec.x not in df.columns or spec.y not in df.columns:
        ax = _Axes(0.0, 1.0, 0.0, 1.0)
    elif spec.kind == "line":
        xs, ys = df[spec.x].astype(float), df[spec.y].astype(float)
        ax = _Axes(xs.min(), xs.max(), ys.min(), ys.max())
        groups = [("", df)] if spec.group is None else list(df.groupby(spec.group, sort=True))
        for i, (name, sub) in enumerate(groups):
            sub = sub.sort_values(spec.x, kind="mergesort")
            pts = " ".join(f"{_f(ax.px(x))},{_f(ax.py(y))}" for x, y in zip(sub[spec.x].astype(float),
                                                                              sub[spec.y].astype(float)))
            colour = PALETTE[i % len(PALETTE)]
            body.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{pts}"/>')
            if spec.group is not None:
                body.append(f'<text x="{WIDTH - RIGHT - 5}" y="{TOP + 14 * (i + 1)}" text-anchor="end" '
                            f'font-size="11" fill="{colour}">{escape(str(name))}</text>')
    else:
        cats = sorted(df[spec.x].unique(), key=lambda v: (isinstance(v, str), v))
        ys = df[spec.y].astype(float)
        lo = min(0.0, ys.min()) if spec.kind == "bar" else ys.min()
        ax = _Axes(-0.5, len(cats) - 0.5, lo, ys.max())
        slot = (WIDTH - LEFT - RIGHT) / len(cats)
        for i, c in enumerate(cats):
            v = df.loc[df[spec.x] == c, spec.y].astype(float).to_numpy()
            cx = ax.px(i)
            half = 0.3 * slot
            if spec.kind == "bar":
                top, base = ax.py(float(v.mean())), ax.py(0.0)
                y, h = min(top, base), abs(base - top)
                body.append(f'<rect x="{_f(cx - half)}" y="{_f(y)}" width="{_f(2 * half)}" height="{_f(h)}" '
                            f'fill="{PALETTE[0]}"/>')
            else:
                q0, q1, q2, q3, q4 = np.quantile(v, [0, 0.25, 0.5, 0.75, 1])
                body += [
                    f'<line x1="{_f(cx)}" y1="{_f(ax.py(q0))}" x2="{_f(cx)}" y2="{_f(ax.py(q1))}" stroke="black"/>',
                    f'<line x1="{_f(cx)}" y1="{_f(ax.py(q3))}" x2="{_f(cx)}" y2="{_f(ax.py(q4))}" stroke="black"/>',
                    f'<rect x="{_f(cx - half)}" y="{_f(ax.py(q3))}" width="{_f(2 * half)}" '
                    f'height="{_f(ax.py(q1) - ax.py(q3))}" fill="none" stroke="{PALETTE[0]}"/>',
                    f'<line x1="{_f(cx - half)}" y1="{_f(ax.py(q2))}" x2="{_f(cx + half)}" y2="{_f(ax.py(q2))}" '
                    f'stroke="{PALETTE[1]}"/>',
                ]
            body.append(f'<text x="{_f(cx)}" y="{HEIGHT - BOTTOM + 15}" text-anchor="middle" '
                        f'font-size="10">{escape(str(c))}</text>')
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}">')
    return "\n".join([head, *_frame(ax, spec), *body, "</svg>"]) + "\n"


def render_svg(csv_path: str | Path, spec: ChartSpec, out_path: str | Path | None = None) -> str:
    try:
        df = pd.read_csv(csv_path, keep_default_na=False, na_values=[""])
    except (pd.errors.ParserError, UnicodeDecodeError) as exc:
        raise ValueError(f"{csv_path}: malformed CSV ({exc})") from None
    except pd.errors.EmptyDataError:
        df = pd.DataFrame()
    text = render_svg_frame(df, spec)
    if out_path is not None:
        Path(out_path).write_text(text)
    return text
