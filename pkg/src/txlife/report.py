"""Minimal self-contained SVG scatter of the two life-cycle durations."""

from __future__ import annotations

from xml.sax.saxutils import escape

COLORS = {
    "fast_peak_fast_decay": "#1b9e77",
    "fast_peak_slow_decay": "#d95f02",
    "slow_peak_fast_decay": "#7570b3",
    "slow_peak_slow_decay": "#e7298a",
    None: "#666666",
}
W, H, PAD = 640, 480, 56


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def scatter_svg(summaries: list[dict], thresholds: dict | None = None) -> bytes:
    pts = [s for s in summaries if s["t_peak_to_diminishing"] is not None]
    censored = len(summaries) - len(pts)
    xmax = max([s["t_start_to_peak"] for s in pts] + [1])
    ymax = max([s["t_peak_to_diminishing"] for s in pts] + [1])

    def sx(v):
        return PAD + (W - 2 * PAD) * v / xmax

    def sy(v):
        return H - PAD - (H - 2 * PAD) * v / ymax

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<line x1="{PAD}" y1="{H - PAD}" x2="{W - PAD}" y2="{H - PAD}" stroke="black"/>',
        f'<line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{H - PAD}" stroke="black"/>',
        f'<text x="{W / 2}" y="{H - 16}" text-anchor="middle" font-size="13">'
        f'days from launch to peak (max {xmax})</text>',
        f'<text x="16" y="{H / 2}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 16 {H / 2})">days from peak to diminishing (max {ymax})</text>',
    ]
    if thresholds and thresholds.get("peak_threshold"):
        px = sx(thresholds["peak_threshold"]["value"])
        dy = sy(thresholds["decay_threshold"]["value"])
        out.append(f'<line x1="{_fmt(px)}" y1="{PAD}" x2="{_fmt(px)}" y2="{H - PAD}" '
                   'stroke="#999" stroke-dasharray="4 3"/>')
        out.append(f'<line x1="{PAD}" y1="{_fmt(dy)}" x2="{W - PAD}" y2="{_fmt(dy)}" '
                   'stroke="#999" stroke-dasharray="4 3"/>')
    for s in pts:
        color = COLORS.get(s["category"], COLORS[None])
        out.append(
            f'<circle cx="{_fmt(sx(s["t_start_to_peak"]))}" cy="{_fmt(sy(s["t_peak_to_diminishing"]))}" '
            f'r="3" fill="{color}" fill-opacity="0.7"><title>{escape(s["project_id"])}</title></circle>'
        )
    out.append(f'<text x="{W - PAD}" y="{PAD - 12}" text-anchor="end" font-size="12">'
               f'{len(pts)} plotted, {censored} censored</text>')
    out.append("</svg>")
    return ("\n".join(out) + "\n").encode("utf-8")
