"""Gantt chart SVG for a simulation trace: one lane per core."""

from __future__ import annotations

from xml.sax.saxutils import escape, quoteattr

from .engine import EventKind, Trace

PALETTE = (
    "#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2",
    "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
)

LANE_HEIGHT = 40
LANE_GAP = 24
LEFT = 70
TOP = 20
MAX_WIDTH = 1600


def _tick_step(horizon: int, scale: float) -> int:
    step = 1
    while step * scale < 40:
        for mult in (2, 5, 10):
            if step * mult * scale >= 40 or mult == 10:
                step *= mult
                break
    return step


def render_svg(trace: Trace, task_order) -> str:
    """Return the SVG document as text.

    Each contiguous execution interval becomes a ``rect`` with class
    ``exec`` carrying ``data-task``, ``data-job``, ``data-start`` and
    ``data-len``. Releases and deadlines are short vertical ticks; misses
    are red ``miss`` markers.
    """
    horizon = trace.horizon
    lanes = len(trace.schedules)
    scale = max(1.0, min(20.0, MAX_WIDTH / horizon)) if horizon else 1.0
    width = int(LEFT + horizon * scale + 20)
    height = TOP + lanes * (LANE_HEIGHT + LANE_GAP) + 30
    color = {tid: PALETTE[i % len(PALETTE)] for i, tid in enumerate(task_order)}

    def x(t):
        return f"{LEFT + t * scale:.2f}"

    def lane_y(core):
        return TOP + core * (LANE_HEIGHT + LANE_GAP)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="monospace" font-size="11">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]
    for core in range(lanes):
        y = lane_y(core)
        out.append(f'<text x="4" y="{y + LANE_HEIGHT / 2 + 4:.0f}">core {core}</text>')
        out.append(f'<rect class="lane" x="{LEFT}" y="{y}" width="{horizon * scale:.2f}" '
                   f'height="{LANE_HEIGHT}" fill="#f4f4f4" stroke="#999"/>')

    for s in trace.slices():
        y = lane_y(s.core)
        w = (s.end - s.start) * scale
        out.append(
            f'<rect class="exec" data-task={quoteattr(s.task_id)} data-job="{s.job}" '
            f'data-start="{s.start}" data-len="{s.end - s.start}" x="{x(s.start)}" '
            f'y="{y + 8}" width="{w:.2f}" height="{LANE_HEIGHT - 16}" '
            f'fill="{color.get(s.task_id, "#888")}" stroke="black" stroke-width="0.5">'
            f"<title>{escape(s.task_id)} job {s.job} [{s.start}, {s.end})</title></rect>"
        )
        if w >= 7 * len(s.task_id):
            out.append(f'<text x="{LEFT + (s.start + s.end) / 2 * scale:.2f}" '
                       f'y="{y + LANE_HEIGHT / 2 + 4:.0f}" text-anchor="middle">'
                       f"{escape(s.task_id)}</text>")

    for e in trace.events:
        y = lane_y(e.core)
        if e.kind is EventKind.RELEASE:
            out.append(f'<line class="release" data-task={quoteattr(e.task_id)} '
                       f'x1="{x(e.time)}" y1="{y}" x2="{x(e.time)}" y2="{y + 8}" '
                       f'stroke="#2a7" stroke-width="1.5"/>')
            if e.abs_deadline is not None and e.abs_deadline <= horizon:
                out.append(f'<line class="deadline" data-task={quoteattr(e.task_id)} '
                           f'x1="{x(e.abs_deadline)}" y1="{y + LANE_HEIGHT - 8}" '
                           f'x2="{x(e.abs_deadline)}" y2="{y + LANE_HEIGHT}" '
                           f'stroke="#a22" stroke-width="1.5"/>')
        elif e.kind is EventKind.DEADLINE_MISS:
            cx = x(e.time)
            out.append(f'<circle class="miss" data-task={quoteattr(e.task_id)} '
                       f'data-job="{e.job}" cx="{cx}" cy="{y + LANE_HEIGHT + 6}" r="4" '
                       f'fill="red"><title>{escape(e.task_id)} job {e.job} missed at '
                       f"{e.time}</title></circle>")

    axis_y = TOP + lanes * (LANE_HEIGHT + LANE_GAP) + 4
    step = _tick_step(horizon, scale)
    for t in range(0, horizon + 1, step):
        out.append(f'<line x1="{x(t)}" y1="{axis_y - 4}" x2="{x(t)}" y2="{axis_y}" stroke="black"/>')
        out.append(f'<text x="{x(t)}" y="{axis_y + 12}" text-anchor="middle">{t}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
