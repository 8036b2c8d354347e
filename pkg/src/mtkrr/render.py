"""Static SVG rendering of mean-ratio heatmaps.

Hand-rolled on purpose: the output must be byte-identical across runs, which
rules out plotting backends that embed hashed ids or timestamps.
"""

from __future__ import annotations

CELL = 64
MARGIN_LEFT = 110
MARGIN_TOP = 70
MARGIN_BOTTOM = 30
LEGEND_WIDTH = 150


def _color(value: float, lo: float, hi: float) -> str:
    """Diverging blue-white-red ramp anchored at 1.0 (ratio parity)."""
    if value <= 1.0:
        t = 0.0 if lo >= 1.0 else max(0.0, min(1.0, (1.0 - value) / (1.0 - lo)))
        r, g, b = (int(round(255 - t * (255 - 33))), int(round(255 - t * (255 - 102))), 255)
    else:
        t = 0.0 if hi <= 1.0 else max(0.0, min(1.0, (value - 1.0) / (hi - 1.0)))
        r, g, b = (255, int(round(255 - t * (255 - 60))), int(round(255 - t * (255 - 40))))
    return f"#{r:02x}{g:02x}{b:02x}"


def svg_heatmap(
    values: list[list[float]],
    halfwidths: list[list[float]],
    row_name: str,
    row_labels: list[float],
    col_name: str,
    col_labels: list[float],
    title: str,
    path: str,
) -> None:
    """Write a grid heatmap of mean ratios; each cell prints value +- half-width."""
    n_rows, n_cols = len(values), len(values[0])
    flat = [v for row in values for v in row]
    lo, hi = min(flat), max(flat)
    width = MARGIN_LEFT + n_cols * CELL + LEGEND_WIDTH
    height = MARGIN_TOP + n_rows * CELL + MARGIN_BOTTOM
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="monospace" font-size="11">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{MARGIN_LEFT}" y="20" font-size="14">{title}</text>',
        f'<text x="{MARGIN_LEFT + n_cols * CELL / 2:.1f}" y="{MARGIN_TOP - 28}" text-anchor="middle">{col_name}</text>',
        f'<text x="18" y="{MARGIN_TOP + n_rows * CELL / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 18 {MARGIN_TOP + n_rows * CELL / 2:.1f})">{row_name}</text>',
    ]
    for j, cl in enumerate(col_labels):
        x = MARGIN_LEFT + j * CELL + CELL / 2
        parts.append(f'<text x="{x:.1f}" y="{MARGIN_TOP - 10}" text-anchor="middle">{cl:g}</text>')
    for i, rl in enumerate(row_labels):
        y = MARGIN_TOP + i * CELL + CELL / 2 + 4
        parts.append(f'<text x="{MARGIN_LEFT - 8}" y="{y:.1f}" text-anchor="end">{rl:g}</text>')
    for i in range(n_rows):
        for j in range(n_cols):
            x, y = MARGIN_LEFT + j * CELL, MARGIN_TOP + i * CELL
            parts.append(
                f'<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" '
                f'fill="{_color(values[i][j], lo, hi)}" stroke="#888"/>'
            )
            parts.append(
                f'<text x="{x + CELL / 2:.1f}" y="{y + CELL / 2:.1f}" text-anchor="middle">{values[i][j]:.3f}</text>'
            )
            parts.append(
                f'<text x="{x + CELL / 2:.1f}" y="{y + CELL / 2 + 14:.1f}" text-anchor="middle" '
                f'font-size="9" fill="#444">&#177;{halfwidths[i][j]:.3f}</text>'
            )
    # legend: three reference swatches (min, parity, max)
    lx = MARGIN_LEFT + n_cols * CELL + 20
    for k, (label, val) in enumerate((("min", lo), ("1.0", 1.0), ("max", hi))):
        y = MARGIN_TOP + k * 28
        parts.append(f'<rect x="{lx}" y="{y}" width="20" height="20" fill="{_color(val, lo, hi)}" stroke="#888"/>')
        parts.append(f'<text x="{lx + 28}" y="{y + 14}">{label} = {val:.3f}</text>')
    parts.append("</svg>")
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(parts))
        fh.write("\n")
