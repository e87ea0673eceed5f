"""Minimal SVG line plots for emitted curves: axes, polylines, legend.

Deliberately small: no interactivity, no styling knobs beyond per-series
colors.  Non-finite samples split a series into separate polyline segments
so divergence gaps are visible rather than interpolated over.
"""

import math

WIDTH, HEIGHT = 640, 480
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 20, 40, 50
COLORS = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b")


def _finite(values):
    return [v for v in values if math.isfinite(v)]


def _span(lo, hi):
    if hi <= lo:
        pad = 1.0 if lo == 0 else abs(lo) * 0.1
        return lo - pad, hi + pad
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def _fmt(v):
    return f"{v:.4g}"


def render_lines(series, title="", xlabel="", ylabel=""):
    """Render [(label, xs, ys), ...] to an SVG document string."""
    xs_all, ys_all = [], []
    for _, xs, ys in series:
        xs_all += _finite(list(xs))
        ys_all += [y for x, y in zip(xs, ys)
                   if math.isfinite(x) and math.isfinite(y)]
    if not xs_all or not ys_all:
        xs_all, ys_all = [0.0, 1.0], [0.0, 1.0]
    x_lo, x_hi = _span(min(xs_all), max(xs_all))
    y_lo, y_hi = _span(min(ys_all), max(ys_all))

    def px(x):
        return MARGIN_L + (x - x_lo) / (x_hi - x_lo) * (WIDTH - MARGIN_L - MARGIN_R)

    def py(y):
        return HEIGHT - MARGIN_B - (y - y_lo) / (y_hi - y_lo) * (
            HEIGHT - MARGIN_T - MARGIN_B)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
        f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="16">{title}</text>',
        # axes
        f'<line x1="{MARGIN_L}" y1="{HEIGHT - MARGIN_B}" '
        f'x2="{WIDTH - MARGIN_R}" y2="{HEIGHT - MARGIN_B}" stroke="black"/>',
        f'<line x1="{MARGIN_L}" y1="{MARGIN_T}" x2="{MARGIN_L}" '
        f'y2="{HEIGHT - MARGIN_B}" stroke="black"/>',
        f'<text x="{(MARGIN_L + WIDTH - MARGIN_R) / 2}" y="{HEIGHT - 12}" '
        f'text-anchor="middle" font-family="sans-serif" font-size="13">'
        f'{xlabel}</text>',
        f'<text x="16" y="{(MARGIN_T + HEIGHT - MARGIN_B) / 2}" '
        f'text-anchor="middle" font-family="sans-serif" font-size="13" '
        f'transform="rotate(-90 16 {(MARGIN_T + HEIGHT - MARGIN_B) / 2})">'
        f'{ylabel}</text>',
    ]
    # min/max tick labels on both axes
    for x in (x_lo, x_hi):
        parts.append(
            f'<text x="{px(x):.1f}" y="{HEIGHT - MARGIN_B + 18}" '
            f'text-anchor="middle" font-family="sans-serif" font-size="11">'
            f'{_fmt(x)}</text>')
    for y in (y_lo, y_hi):
        parts.append(
            f'<text x="{MARGIN_L - 6}" y="{py(y):.1f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{_fmt(y)}</text>')

    for i, (label, xs, ys) in enumerate(series):
        color = COLORS[i % len(COLORS)]
        segment = []
        segments = []
        for x, y in zip(xs, ys):
            if math.isfinite(x) and math.isfinite(y):
                segment.append(f"{px(x):.2f},{py(y):.2f}")
            elif segment:
                segments.append(segment)
                segment = []
        if segment:
            segments.append(segment)
        for seg in segments:
            if len(seg) == 1:
                cx, cy = seg[0].split(",")
                parts.append(f'<circle cx="{cx}" cy="{cy}" r="2" '
                             f'fill="{color}"/>')
            else:
                parts.append(f'<polyline points="{" ".join(seg)}" '
                             f'fill="none" stroke="{color}" '
                             f'stroke-width="1.5"/>')
        ly = MARGIN_T + 16 * i + 8
        parts.append(f'<line x1="{WIDTH - MARGIN_R - 120}" y1="{ly}" '
                     f'x2="{WIDTH - MARGIN_R - 96}" y2="{ly}" '
                     f'stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{WIDTH - MARGIN_R - 90}" y="{ly + 4}" '
                     f'font-family="sans-serif" font-size="12">{label}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_svg(path, series, title="", xlabel="", ylabel=""):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(render_lines(series, title, xlabel, ylabel))
    return path
