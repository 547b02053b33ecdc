"""Dependency-free SVG rendering of example signals and confusion matrices."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

_W, _H = 640, 320
_MARGIN = 48


def _fmt(v):
    return f"{v:.2f}"


def signal_svg(samples, sample_rate, title=""):
    """One polyline of every sample, with a box frame, zero line and axis labels."""
    y = np.asarray(samples, dtype=float)
    n = y.size
    t = np.arange(n) / sample_rate
    left, right = _MARGIN, _W - _MARGIN / 2
    top, bottom = _MARGIN / 2, _H - _MARGIN
    span = float(np.max(np.abs(y))) or 1.0
    xs = left + (right - left) * (np.arange(n) / max(n - 1, 1))
    ys = (top + bottom) / 2 - (bottom - top) / 2 * (y / span)
    points = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in zip(xs, ys))
    zero = (top + bottom) / 2
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}">',
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
        f'<rect x="{_fmt(left)}" y="{_fmt(top)}" width="{_fmt(right - left)}" height="{_fmt(bottom - top)}" '
        'fill="none" stroke="black" stroke-width="1"/>',
        f'<line x1="{_fmt(left)}" y1="{_fmt(zero)}" x2="{_fmt(right)}" y2="{_fmt(zero)}" '
        'stroke="#999999" stroke-width="0.5"/>',
        f'<polyline fill="none" stroke="#1f4e9c" stroke-width="1" points="{points}"/>',
        f'<text x="{_fmt(left)}" y="{_fmt(bottom + 16)}" font-size="11" font-family="sans-serif">0 s</text>',
        f'<text x="{_fmt(right)}" y="{_fmt(bottom + 16)}" font-size="11" font-family="sans-serif" '
        f'text-anchor="end">{t[-1] if n else 0:.4f} s</text>',
        f'<text x="{_fmt((left + right) / 2)}" y="{_fmt(bottom + 32)}" font-size="12" font-family="sans-serif" '
        'text-anchor="middle">time</text>',
        f'<text x="{_fmt(left - 6)}" y="{_fmt(top + 4)}" font-size="11" font-family="sans-serif" '
        f'text-anchor="end">{span:.3g}</text>',
        f'<text x="{_fmt(left - 6)}" y="{_fmt(bottom)}" font-size="11" font-family="sans-serif" '
        f'text-anchor="end">{-span:.3g}</text>',
    ]
    if title:
        parts.append(
            f'<text x="{_fmt(_W / 2)}" y="{_fmt(top - 6)}" font-size="13" font-family="sans-serif" '
            f'text-anchor="middle">{escape(title)}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _shade(fraction):
    # White (0) to dark blue (1).
    r = round(255 - fraction * (255 - 8))
    g = round(255 - fraction * (255 - 48))
    b = round(255 - fraction * (255 - 107))
    return f"#{r:02x}{g:02x}{b:02x}"


def confusion_svg(counts, names, title=""):
    """Shaded grid, rows = true class, columns = predicted; shade scales with the global maximum."""
    counts = np.asarray(counts, dtype=np.int64)
    k = counts.shape[0]
    cell = 44
    label_w = 170
    top = 40
    width = label_w + k * cell + 20
    height = top + k * cell + 150
    peak = counts.max() if counts.size and counts.max() > 0 else 1
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]
    if title:
        parts.append(
            f'<text x="{width / 2:.1f}" y="22" font-size="14" font-family="sans-serif" '
            f'text-anchor="middle">{escape(title)}</text>'
        )
    for i in range(k):
        y = top + i * cell
        parts.append(
            f'<text x="{label_w - 6}" y="{y + cell / 2 + 4:.1f}" font-size="11" font-family="sans-serif" '
            f'text-anchor="end">{escape(names[i])}</text>'
        )
        for j in range(k):
            x = label_w + j * cell
            v = int(counts[i, j])
            frac = v / peak
            parts.append(
                f'<rect class="cell" data-row="{i}" data-col="{j}" data-count="{v}" x="{x}" y="{y}" '
                f'width="{cell}" height="{cell}" fill="{_shade(frac)}" stroke="#cccccc" stroke-width="0.5"/>'
            )
            ink = "white" if frac > 0.5 else "black"
            parts.append(
                f'<text x="{x + cell / 2:.1f}" y="{y + cell / 2 + 4:.1f}" font-size="11" '
                f'font-family="sans-serif" text-anchor="middle" fill="{ink}">{v}</text>'
            )
    base = top + k * cell + 8
    for j in range(k):
        x = label_w + j * cell + cell / 2
        parts.append(
            f'<text x="{x:.1f}" y="{base}" font-size="11" font-family="sans-serif" text-anchor="end" '
            f'transform="rotate(-60 {x:.1f} {base})">{escape(names[j])}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
