"""Rejection-rate curves from sweep tables.

``render_svg`` writes a small hand-built SVG (one ``<polyline>`` per sample
size, ``<line>`` elements for the level and the null boundary) whose bytes
depend only on the table.  ``render_figure`` draws the same panels with
matplotlib for raster or PDF output.
"""

from __future__ import annotations

from collections import OrderedDict
from xml.sax.saxutils import escape

from .simulation import SweepResult, boundary_deltas

PALETTE = ["#1b6ca8", "#d1495b", "#2e933c", "#edae49", "#6a4c93", "#00798c", "#8d6a9f", "#30343f"]

PANEL_W, PANEL_H = 360, 240
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 52, 16, 30, 42


def _panels(result: SweepResult):
    panels = OrderedDict()
    for row in sorted(result.rows, key=lambda r: r.sort_key()):
        panels.setdefault((row.scenario, row.norm), []).append(row)
    return panels


def _series(rows):
    series = OrderedDict()
    for row in sorted(rows, key=lambda r: (r.n1, r.n2, r.delta)):
        series.setdefault((row.n1, row.n2), []).append(row)
    return series


def _fmt(v: float) -> str:
    s = f"{v:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _x_range(rows):
    xs = [r.delta for r in rows]
    lo, hi = min(xs), max(xs)
    if hi == lo:
        lo, hi = lo - 0.05, hi + 0.05
    return lo, hi


def render_svg(result: SweepResult) -> str:
    panels = _panels(result)
    if not panels:
        raise ValueError("no rows to plot")
    ncol = min(2, len(panels))
    nrow = (len(panels) + ncol - 1) // ncol
    width, height = ncol * PANEL_W, nrow * PANEL_H
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="10">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]
    for idx, ((scenario, norm), rows) in enumerate(panels.items()):
        ox = (idx % ncol) * PANEL_W
        oy = (idx // ncol) * PANEL_H
        x0, y0 = ox + MARGIN_L, oy + MARGIN_T
        pw = PANEL_W - MARGIN_L - MARGIN_R
        ph = PANEL_H - MARGIN_T - MARGIN_B
        lo, hi = _x_range(rows)

        def sx(d):
            return x0 + (d - lo) / (hi - lo) * pw

        def sy(r):
            return y0 + (1.0 - r) * ph

        out.append(f'<g class="panel" data-scenario="{escape(scenario)}" data-norm="{escape(norm)}">')
        out.append(f'<text x="{_fmt(ox + PANEL_W / 2)}" y="{_fmt(oy + 18)}" text-anchor="middle">'
                   f'{escape(scenario)} ({escape(norm)})</text>')
        out.append(f'<rect class="frame" x="{_fmt(x0)}" y="{_fmt(y0)}" width="{_fmt(pw)}" height="{_fmt(ph)}" '
                   f'fill="none" stroke="#444" stroke-width="1"/>')
        for t in (0.0, 0.25, 0.5, 0.75, 1.0):
            out.append(f'<text x="{_fmt(x0 - 4)}" y="{_fmt(sy(t) + 3)}" text-anchor="end">{_fmt(t)}</text>')
        for t in (lo, (lo + hi) / 2, hi):
            out.append(f'<text x="{_fmt(sx(t))}" y="{_fmt(y0 + ph + 14)}" text-anchor="middle">{_fmt(t)}</text>')
        out.append(f'<text x="{_fmt(x0 + pw / 2)}" y="{_fmt(y0 + ph + 30)}" text-anchor="middle">delta</text>')

        for alpha in sorted({r.alpha for r in rows}):
            out.append(f'<line class="alpha-ref" data-alpha="{_fmt(alpha)}" x1="{_fmt(x0)}" y1="{_fmt(sy(alpha))}" '
                       f'x2="{_fmt(x0 + pw)}" y2="{_fmt(sy(alpha))}" stroke="#777" stroke-dasharray="4 3"/>')
        for eps in sorted({r.epsilon for r in rows}):
            for d in boundary_deltas(scenario, eps):
                if lo <= d <= hi:
                    out.append(f'<line class="boundary" data-delta="{_fmt(d)}" x1="{_fmt(sx(d))}" y1="{_fmt(y0)}" '
                               f'x2="{_fmt(sx(d))}" y2="{_fmt(y0 + ph)}" stroke="#777" stroke-dasharray="2 2"/>')

        for j, ((n1, n2), srows) in enumerate(_series(rows).items()):
            colour = PALETTE[j % len(PALETTE)]
            pts = " ".join(f"{_fmt(sx(r.delta))},{_fmt(sy(r.rejection_rate))}" for r in srows)
            out.append(f'<polyline class="series" data-n1="{n1}" data-n2="{n2}" points="{pts}" '
                       f'fill="none" stroke="{colour}" stroke-width="1.5"/>')
            ly = y0 + 10 + 12 * j
            out.append(f'<text x="{_fmt(x0 + pw - 4)}" y="{_fmt(ly)}" text-anchor="end" fill="{colour}">n={n1}</text>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_figure(result: SweepResult, path) -> None:
    """Write the rejection-rate panels with matplotlib; format follows the suffix."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    panels = _panels(result)
    if not panels:
        raise ValueError("no rows to plot")
    ncol = min(2, len(panels))
    nrow = (len(panels) + ncol - 1) // ncol
    with plt.rc_context({"svg.hashsalt": "equivboot", "font.size": 9}):
        fig, axes = plt.subplots(nrow, ncol, figsize=(4.2 * ncol, 2.8 * nrow), squeeze=False)
        for ax, ((scenario, norm), rows) in zip(axes.flat, panels.items()):
            for (n1, _n2), srows in _series(rows).items():
                ax.plot([r.delta for r in srows], [r.rejection_rate for r in srows], marker="o", ms=3, label=f"n={n1}")
            for alpha in sorted({r.alpha for r in rows}):
                ax.axhline(alpha, color="0.45", ls="--", lw=0.8)
            lo, hi = _x_range(rows)
            for eps in sorted({r.epsilon for r in rows}):
                for d in boundary_deltas(scenario, eps):
                    if lo <= d <= hi:
                        ax.axvline(d, color="0.45", ls=":", lw=0.8)
            ax.set_ylim(-0.02, 1.02)
            ax.set_xlabel("delta")
            ax.set_ylabel("rejection rate")
            ax.set_title(f"{scenario} ({norm})")
            ax.legend(fontsize=7, frameon=False)
        for ax in list(axes.flat)[len(panels):]:
            ax.set_visible(False)
        fig.tight_layout()
        suffix = str(path).rsplit(".", 1)[-1].lower()
        metadata = {"png": {"Software": None}, "pdf": {"CreationDate": None, "Producer": None},
                    "svg": {"Date": None}}.get(suffix)
        fig.savefig(path, metadata=metadata)
        plt.close(fig)
