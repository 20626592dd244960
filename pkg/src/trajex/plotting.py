"""Deterministic SVG plots of computed trajectories.

The renderer is pure string assembly over the trace document (the dict form
produced by trace_document / written by the trace command), so the same input
always yields byte-identical SVG.  Axes are in meters with equal scale on
both, the origin (the hit point) is marked, and each object gets its own
series color and legend entry.
"""

from __future__ import annotations

import math

STYLES = ("points", "path", "both")

_COLORS = (
    "#1965b0",  # blue
    "#dc050c",  # red
    "#4eb265",  # green
    "#f7a600",  # amber
    "#882e72",  # purple
    "#72190e",  # brown
    "#1caeae",  # teal
    "#777777",  # gray
)

_WIDTH = 720.0
_HEIGHT = 540.0
_MARGIN = 58.0


def _fmt(v: float) -> str:
    return f"{v:.8f}"


def _nice_step(span: float, target_ticks: int = 6) -> float:
    if span <= 0:
        return 1.0
    raw = span / target_ticks
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if mag * mult >= raw:
            return mag * mult
    return mag * 10.0


def _tick_values(lo: float, hi: float, step: float) -> list[float]:
    first = math.ceil(lo / step)
    last = math.floor(hi / step)
    return [i * step for i in range(first, last + 1)]


def _esc(text: str) -> str:
    return (
        text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")
    )


def trace_svg(doc: dict, style: str = "points") -> str:
    """Render a trace document to an SVG string."""
    if style not in STYLES:
        raise ValueError(f"style must be one of {STYLES}, got {style!r}")

    trajectories = doc.get("trajectories", [])
    xs: list[float] = [0.0]
    ys: list[float] = [0.0]
    for t in trajectories:
        for p in t["points"]:
            xs.append(p["x_m"])
            ys.append(p["y_m"])
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    span_x = max(x_hi - x_lo, 1e-9)
    span_y = max(y_hi - y_lo, 1e-9)
    pad = 0.08 * max(span_x, span_y)
    x_lo, x_hi = x_lo - pad, x_hi + pad
    y_lo, y_hi = y_lo - pad, y_hi + pad

    avail_w = _WIDTH - 2 * _MARGIN
    avail_h = _HEIGHT - 2 * _MARGIN
    scale = min(avail_w / (x_hi - x_lo), avail_h / (y_hi - y_lo))
    cx = 0.5 * (x_lo + x_hi)
    cy = 0.5 * (y_lo + y_hi)

    def px(x: float) -> float:
        return _WIDTH / 2 + (x - cx) * scale

    def py(y: float) -> float:
        return _HEIGHT / 2 - (y - cy) * scale

    view_x_lo = cx - (_WIDTH / 2 - _MARGIN) / scale
    view_x_hi = cx + (_WIDTH / 2 - _MARGIN) / scale
    view_y_lo = cy - (_HEIGHT / 2 - _MARGIN) / scale
    view_y_hi = cy + (_HEIGHT / 2 - _MARGIN) / scale

    parts: list[str] = []
    parts.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH:g}" height="{_HEIGHT:g}" '
        f'viewBox="0 0 {_WIDTH:g} {_HEIGHT:g}">'
    )
    parts.append(f'<rect width="{_WIDTH:g}" height="{_HEIGHT:g}" fill="#ffffff"/>')

    # gridless tick axes along the plot frame
    step = _nice_step(max(view_x_hi - view_x_lo, view_y_hi - view_y_lo))
    frame_l, frame_r = _MARGIN, _WIDTH - _MARGIN
    frame_t, frame_b = _MARGIN, _HEIGHT - _MARGIN
    parts.append(
        f'<rect x="{_fmt(frame_l)}" y="{_fmt(frame_t)}" width="{_fmt(frame_r - frame_l)}" '
        f'height="{_fmt(frame_b - frame_t)}" fill="none" stroke="#444444" stroke-width="1"/>'
    )
    for vx in _tick_values(view_x_lo, view_x_hi, step):
        sx = px(vx)
        if not (frame_l - 0.5 <= sx <= frame_r + 0.5):
            continue
        parts.append(
            f'<line x1="{_fmt(sx)}" y1="{_fmt(frame_b)}" x2="{_fmt(sx)}" '
            f'y2="{_fmt(frame_b + 5)}" stroke="#444444" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_fmt(sx)}" y="{_fmt(frame_b + 18)}" font-size="11" '
            f'text-anchor="middle" fill="#222222" font-family="sans-serif">{vx:g}</text>'
        )
    for vy in _tick_values(view_y_lo, view_y_hi, step):
        sy = py(vy)
        if not (frame_t - 0.5 <= sy <= frame_b + 0.5):
            continue
        parts.append(
            f'<line x1="{_fmt(frame_l - 5)}" y1="{_fmt(sy)}" x2="{_fmt(frame_l)}" '
            f'y2="{_fmt(sy)}" stroke="#444444" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_fmt(frame_l - 8)}" y="{_fmt(sy + 4)}" font-size="11" '
            f'text-anchor="end" fill="#222222" font-family="sans-serif">{vy:g}</text>'
        )
    parts.append(
        f'<text x="{_fmt((frame_l + frame_r) / 2)}" y="{_fmt(_HEIGHT - 14)}" font-size="12" '
        f'text-anchor="middle" fill="#222222" font-family="sans-serif">lateral X (m)</text>'
    )
    parts.append(
        f'<text x="16" y="{_fmt((frame_t + frame_b) / 2)}" font-size="12" '
        f'text-anchor="middle" fill="#222222" font-family="sans-serif" '
        f'transform="rotate(-90 16 {_fmt((frame_t + frame_b) / 2)})">longitudinal Y (m)</text>'
    )

    # axis lines through the origin when visible
    if view_x_lo <= 0.0 <= view_x_hi:
        parts.append(
            f'<line x1="{_fmt(px(0.0))}" y1="{_fmt(frame_t)}" x2="{_fmt(px(0.0))}" '
            f'y2="{_fmt(frame_b)}" stroke="#cccccc" stroke-width="1"/>'
        )
    if view_y_lo <= 0.0 <= view_y_hi:
        parts.append(
            f'<line x1="{_fmt(frame_l)}" y1="{_fmt(py(0.0))}" x2="{_fmt(frame_r)}" '
            f'y2="{_fmt(py(0.0))}" stroke="#cccccc" stroke-width="1"/>'
        )

    event_frames = {e["frame_index"]: e["type"] for e in doc.get("events", [])}

    for i, t in enumerate(trajectories):
        color = _COLORS[i % len(_COLORS)]
        pts = t["points"]
        if style in ("path", "both") and len(pts) >= 2:
            coords = " ".join(f"{_fmt(px(p['x_m']))},{_fmt(py(p['y_m']))}" for p in pts)
            dash = ' stroke-dasharray="5,4"' if t.get("approximate") else ""
            parts.append(
                f'<polyline points="{coords}" fill="none" stroke="{color}" '
                f'stroke-width="1.5"{dash}/>'
            )
        if style in ("points", "both"):
            for p in pts:
                parts.append(
                    f'<circle cx="{_fmt(px(p["x_m"]))}" cy="{_fmt(py(p["y_m"]))}" '
                    f'r="3" fill="{color}"/>'
                )
        for p in pts:
            if p["frame_index"] in event_frames:
                parts.append(
                    f'<circle cx="{_fmt(px(p["x_m"]))}" cy="{_fmt(py(p["y_m"]))}" '
                    f'r="6" fill="none" stroke="{color}" stroke-width="1"/>'
                )

    # origin (hit point) marker
    ox, oy = px(0.0), py(0.0)
    parts.append(
        f'<line x1="{_fmt(ox - 6)}" y1="{_fmt(oy)}" x2="{_fmt(ox + 6)}" y2="{_fmt(oy)}" '
        f'stroke="#000000" stroke-width="1.5"/>'
    )
    parts.append(
        f'<line x1="{_fmt(ox)}" y1="{_fmt(oy - 6)}" x2="{_fmt(ox)}" y2="{_fmt(oy + 6)}" '
        f'stroke="#000000" stroke-width="1.5"/>'
    )
    hit = doc.get("hit_frame")
    hit_label = "hit (0, 0)" if hit is None else f"hit (0, 0) @ frame {hit}"
    parts.append(
        f'<text x="{_fmt(ox + 9)}" y="{_fmt(oy - 9)}" font-size="11" fill="#000000" '
        f'font-family="sans-serif">{_esc(hit_label)}</text>'
    )

    # legend
    ly = frame_t + 16
    for i, t in enumerate(trajectories):
        color = _COLORS[i % len(_COLORS)]
        label = t["object_id"]
        if t.get("approximate"):
            label += " (approx.)"
        parts.append(
            f'<rect x="{_fmt(frame_l + 10)}" y="{_fmt(ly - 9)}" width="10" height="10" '
            f'fill="{color}"/>'
        )
        parts.append(
            f'<text x="{_fmt(frame_l + 26)}" y="{_fmt(ly)}" font-size="12" fill="#222222" '
            f'font-family="sans-serif">{_esc(label)}</text>'
        )
        ly += 16

    parts.append("</svg>")
    return "\n".join(parts) + "\n"
