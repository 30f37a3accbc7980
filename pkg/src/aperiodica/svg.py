"""Minimal SVG peak plots: stems for 1D, area-scaled disks for 2D."""

from __future__ import annotations

import math
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

W, H, PAD = 640, 400, 50


def _frame(body: list[str], title: str, xlabel: str, ylabel: str) -> str:
    return "\n".join([
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<text x="{W / 2}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<text x="{W / 2}" y="{H - 10}" text-anchor="middle" font-size="12">{escape(xlabel)}</text>',
        f'<text x="15" y="{H / 2}" text-anchor="middle" font-size="12" transform="rotate(-90 15 {H / 2})">{escape(ylabel)}</text>',
        *body,
        "</svg>",
        "",
    ])


def _ticks(lo: float, hi: float, to_px, axis: str) -> list[str]:
    out = []
    for v in np.linspace(lo, hi, 5):
        px = to_px(v)
        if axis == "x":
            out.append(f'<text x="{px:.1f}" y="{H - PAD + 15}" text-anchor="middle" font-size="10">{v:.3g}</text>')
        else:
            out.append(f'<text x="{PAD - 5}" y="{px:.1f}" text-anchor="end" font-size="10">{v:.3g}</text>')
    return out


def stem_plot(xi: np.ndarray, intensity: np.ndarray, title: str = "Bragg peaks") -> str:
    xi = np.asarray(xi, dtype=float).ravel()
    y = np.asarray(intensity, dtype=float).ravel()
    lo, hi = (float(xi.min()), float(xi.max())) if len(xi) else (0.0, 1.0)
    if hi <= lo:
        lo, hi = lo - 1, hi + 1
    top = float(y.max()) if len(y) and y.max() > 0 else 1.0

    def px(v):
        return PAD + (v - lo) / (hi - lo) * (W - 2 * PAD)

    def py(v):
        return H - PAD - v / top * (H - 2 * PAD)

    body = [f'<line x1="{PAD}" y1="{H - PAD}" x2="{W - PAD}" y2="{H - PAD}" stroke="black"/>',
            f'<line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{H - PAD}" stroke="black"/>']
    for a, b in zip(xi, y):
        body.append(f'<line x1="{px(a):.2f}" y1="{H - PAD}" x2="{px(a):.2f}" y2="{py(b):.2f}" stroke="navy"/>')
    body += _ticks(lo, hi, px, "x") + _ticks(0.0, top, py, "y")
    return _frame(body, title, "xi", "intensity")


def disk_plot(xi: np.ndarray, intensity: np.ndarray, title: str = "Bragg peaks") -> str:
    """Disk area proportional to intensity."""
    xi = np.asarray(xi, dtype=float).reshape(-1, 2)
    y = np.asarray(intensity, dtype=float).ravel()
    r = float(np.abs(xi).max()) if len(xi) else 1.0
    r = r or 1.0
    top = float(y.max()) if len(y) and y.max() > 0 else 1.0
    side = min(W, H) - 2 * PAD
    cx, cy = W / 2, H / 2

    def to(v):
        return cx + v[0] / r * side / 2, cy - v[1] / r * side / 2

    body = [f'<rect x="{cx - side / 2}" y="{cy - side / 2}" width="{side}" height="{side}" fill="none" stroke="black"/>']
    rmax = side / 30
    for v, b in zip(xi, y):
        if b <= 0:
            continue
        x, yy = to(v)
        body.append(f'<circle cx="{x:.2f}" cy="{yy:.2f}" r="{rmax * math.sqrt(b / top):.2f}" fill="navy"/>')
    body.append(f'<text x="{cx + side / 2}" y="{cy + side / 2 + 15}" text-anchor="end" font-size="10">{r:.3g}</text>')
    return _frame(body, title, "xi_1", "xi_2")


def write_peak_svg(path: str | Path, xi: np.ndarray, intensity: np.ndarray, title: str = "Bragg peaks") -> None:
    xi = np.asarray(xi, dtype=float)
    dim = xi.shape[1] if xi.ndim == 2 else 1
    if dim == 1:
        text = stem_plot(xi, intensity, title)
    elif dim == 2:
        text = disk_plot(xi, intensity, title)
    else:
        raise ValueError("plots are available for 1D and 2D peaks")
    Path(path).write_text(text)
