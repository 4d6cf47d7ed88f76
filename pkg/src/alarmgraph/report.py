"""Static SVG renderings: similarity heat map, dendrogram and 2-D cluster scatter."""

from __future__ import annotations

from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

from .cluster import Dendrogram

# dark -> bright ramp; brighter cells mean more similar alarms
_RAMP = [(0, 0, 4), (80, 18, 123), (182, 54, 121), (251, 136, 97), (252, 253, 191)]
_PALETTE = ["#1f77b4", "#2ca02c", "#e6b800", "#9467bd", "#d62728", "#17becf", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22"]


def ramp_color(t: float) -> str:
    """Map t in [0, 1] onto the brightness ramp."""
    t = min(max(float(t), 0.0), 1.0) * (len(_RAMP) - 1)
    i = min(int(t), len(_RAMP) - 2)
    f = t - i
    rgb = [round(a + (b - a) * f) for a, b in zip(_RAMP[i], _RAMP[i + 1])]
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def _svg(width: float, height: float, body: list[str]) -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" height="{height:.0f}" '
        f'viewBox="0 0 {width:.0f} {height:.0f}" font-family="sans-serif" font-size="10">'
    )
    return "\n".join([head, f'<rect width="{width:.0f}" height="{height:.0f}" fill="white"/>', *body, "</svg>"]) + "\n"


def heatmap_svg(S: np.ndarray, labels: Sequence[str], cell: int = 14) -> str:
    """Square grid of cells, one per (row, column) pair; similarity -1..1 maps dark..bright."""
    n = len(labels)
    margin = 8 + 6 * max((len(t) for t in labels), default=1)
    size = margin + n * cell + 10
    body = []
    for i in range(n):
        y = margin + i * cell
        body.append(f'<text x="{margin - 4}" y="{y + cell * 0.75:.1f}" text-anchor="end">{escape(labels[i])}</text>')
        x = margin + i * cell + cell * 0.75
        body.append(
            f'<text x="{x:.1f}" y="{margin - 4}" transform="rotate(-90 {x:.1f} {margin - 4})">{escape(labels[i])}</text>'
        )
        for j in range(n):
            color = ramp_color((S[i, j] + 1.0) / 2.0)
            body.append(
                f'<rect class="cell" x="{margin + j * cell}" y="{y}" width="{cell}" height="{cell}" '
                f'fill="{color}"><title>{escape(labels[i])} / {escape(labels[j])}: {S[i, j]:.4f}</title></rect>'
            )
    return _svg(size, size, body)


def leaf_order(dendrogram: Dendrogram) -> list[int]:
    H = dendrogram.n_leaves
    children = dendrogram.children()
    root = 2 * H - 2
    if H == 1:
        return [0]
    order, stack = [], [root]
    while stack:
        node = stack.pop()
        if node < H:
            order.append(node)
        else:
            left, right = children[node]
            stack.extend([right, left])
    return order


def dendrogram_svg(dendrogram: Dendrogram, labels: Sequence[str], width: int = 640, leaf_gap: int = 16) -> str:
    """Horizontal dendrogram: leaves on the left, merge height grows to the right."""
    H = dendrogram.n_leaves
    order = leaf_order(dendrogram)
    label_w = 8 + 6 * max((len(t) for t in labels), default=1)
    top = 20
    plot_w = width - label_w - 30
    max_h = max((m.height for m in dendrogram.merges), default=1.0) or 1.0
    xs = lambda h: label_w + plot_w * h / max_h  # noqa: E731
    pos = {leaf: (xs(0.0), top + k * leaf_gap) for k, leaf in enumerate(order)}
    body = []
    for leaf in order:
        x, y = pos[leaf]
        body.append(f'<text x="{x - 4:.1f}" y="{y + 3:.1f}" text-anchor="end">{escape(labels[leaf])}</text>')
    for step, m in enumerate(dendrogram.merges):
        (xl, yl), (xr, yr) = pos[m.left], pos[m.right]
        xm = xs(m.height)
        for x0, y0 in ((xl, yl), (xr, yr)):
            body.append(f'<line x1="{x0:.1f}" y1="{y0:.1f}" x2="{xm:.1f}" y2="{y0:.1f}" stroke="black"/>')
        body.append(f'<line x1="{xm:.1f}" y1="{yl:.1f}" x2="{xm:.1f}" y2="{yr:.1f}" stroke="black"/>')
        pos[H + step] = (xm, (yl + yr) / 2)
    axis_y = top + H * leaf_gap
    body.append(f'<line x1="{xs(0):.1f}" y1="{axis_y}" x2="{xs(max_h):.1f}" y2="{axis_y}" stroke="gray"/>')
    for t in np.linspace(0, max_h, 5):
        body.append(f'<text x="{xs(t):.1f}" y="{axis_y + 12}" text-anchor="middle">{t:.2f}</text>')
    return _svg(width, axis_y + 24, body)


def scatter_svg(
    points: np.ndarray, labels: Sequence[str], clusters: Sequence[int | None], size: int = 480
) -> str:
    """2-D scatter of projected vectors, one colour per cluster."""
    P = np.asarray(points, dtype=float)
    if P.shape[1] < 2:
        P = np.hstack([P, np.zeros((len(P), 2 - P.shape[1]))])
    P = P[:, :2]
    pad = 40
    lo, hi = P.min(axis=0), P.max(axis=0)
    span = np.where(hi - lo > 0, hi - lo, 1.0)
    body = [f'<rect x="{pad}" y="{pad}" width="{size - 2 * pad}" height="{size - 2 * pad}" fill="none" stroke="gray"/>']
    for (px, py), label, c in zip(P, labels, clusters):
        x = pad + (px - lo[0]) / span[0] * (size - 2 * pad)
        y = size - pad - (py - lo[1]) / span[1] * (size - 2 * pad)
        color = _PALETTE[c % len(_PALETTE)] if c is not None else "#000000"
        body.append(f'<circle class="point" cx="{x:.1f}" cy="{y:.1f}" r="4" fill="{color}"/>')
        body.append(f'<text x="{x + 5:.1f}" y="{y - 5:.1f}">{escape(label)}</text>')
    body.append(f'<text x="{size / 2:.0f}" y="{size - 10}" text-anchor="middle">PC1</text>')
    body.append(f'<text x="12" y="{size / 2:.0f}" transform="rotate(-90 12 {size / 2:.0f})">PC2</text>')
    return _svg(size, size, body)
