"""Standalone SVG rendering of a ROC curve family.

The output is plain text with fixed coordinate formatting, so identical
curve sets render to identical bytes.
"""

from __future__ import annotations

from typing import Any
from xml.sax.saxutils import escape

WIDTH = 560
HEIGHT = 480
MARGIN_LEFT = 60
MARGIN_TOP = 20
PLOT_SIZE = 400

PALETTE = (
    "#1f77b4",
    "#d62728",
    "#2ca02c",
    "#9467bd",
    "#ff7f0e",
    "#8c564b",
    "#e377c2",
    "#17becf",
)


def _display_name(kind: str) -> str:
    if kind.startswith("class_"):
        return "class " + kind.split("_", 1)[1]
    return {"micro": "micro-average", "macro": "macro-average", "worst_case": "worst case"}.get(
        kind, kind
    )


def _to_px(fpr: float, tpr: float) -> tuple[float, float]:
    x = MARGIN_LEFT + fpr * PLOT_SIZE
    y = MARGIN_TOP + (1.0 - tpr) * PLOT_SIZE
    return x, y


def render_roc_svg(curves: list[dict[str, Any]]) -> str:
    """Render one polyline per curve plus axes and an AUC legend.

    Args:
        curves: dicts with "kind", "auc", and "points" ([fpr, tpr] pairs),
            as stored in a report bundle.

    Returns:
        A complete SVG document as a string.
    """
    if not curves:
        raise ValueError("need at least one curve to plot")
    parts: list[str] = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{PLOT_SIZE}" height="{PLOT_SIZE}" '
        'fill="none" stroke="black" stroke-width="1"/>',
    ]
    # axis ticks and labels
    for i in range(5):
        frac = i / 4.0
        x, _ = _to_px(frac, 0.0)
        _, y = _to_px(0.0, frac)
        bottom = MARGIN_TOP + PLOT_SIZE
        parts.append(
            f'<line x1="{x:.1f}" y1="{bottom}" x2="{x:.1f}" y2="{bottom + 5}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{x:.1f}" y="{bottom + 18}" font-size="11" text-anchor="middle">'
            f"{frac:.2f}</text>"
        )
        parts.append(
            f'<line x1="{MARGIN_LEFT - 5}" y1="{y:.1f}" x2="{MARGIN_LEFT}" y2="{y:.1f}" '
            'stroke="black"/>'
        )
        parts.append(
            f'<text x="{MARGIN_LEFT - 8}" y="{y + 4:.1f}" font-size="11" text-anchor="end">'
            f"{frac:.2f}</text>"
        )
    parts.append(
        f'<text x="{MARGIN_LEFT + PLOT_SIZE / 2:.1f}" y="{MARGIN_TOP + PLOT_SIZE + 38}" '
        'font-size="13" text-anchor="middle">False Positive Rate</text>'
    )
    parts.append(
        f'<text x="16" y="{MARGIN_TOP + PLOT_SIZE / 2:.1f}" font-size="13" '
        f'text-anchor="middle" transform="rotate(-90 16 {MARGIN_TOP + PLOT_SIZE / 2:.1f})">'
        "True Positive Rate</text>"
    )

    legend_entries: list[tuple[str, str, str]] = []
    color_index = 0
    for curve in curves:
        kind = curve["kind"]
        if kind == "worst_case":
            color, dash = "#777777", ' stroke-dasharray="6 4"'
        else:
            color, dash = PALETTE[color_index % len(PALETTE)], ""
            color_index += 1
        coords = " ".join(
            f"{x:.2f},{y:.2f}" for x, y in (_to_px(p[0], p[1]) for p in curve["points"])
        )
        parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>'
        )
        label = f"{_display_name(kind)} (area = {curve['auc']:.2f})"
        legend_entries.append((label, color, dash))

    legend_x = MARGIN_LEFT + PLOT_SIZE - 230
    legend_y = MARGIN_TOP + PLOT_SIZE - 14 * len(legend_entries) - 12
    for i, (label, color, dash) in enumerate(legend_entries):
        y = legend_y + 14 * (i + 1)
        parts.append(
            f'<line x1="{legend_x}" y1="{y - 4}" x2="{legend_x + 22}" y2="{y - 4}" '
            f'stroke="{color}" stroke-width="1.5"{dash}/>'
        )
        parts.append(
            f'<text x="{legend_x + 28}" y="{y}" font-size="11">{escape(label)}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
