"""Figure rendering for the report path.

All figures are written as self-contained SVG files via the Agg-free
matplotlib SVG backend, with a fixed hash salt and no embedded date so
repeated runs produce byte-identical output.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.patches import Ellipse

_HASHSALT = "bechdelkit"

_B_COLORS = {3: "#08306b", 2: "#6baed6", 1: "#fc9272", 0: "#99000d",
             None: "#999999"}


def _save(fig, path) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _rc():
    return plt.rc_context({"svg.hashsalt": _HASHSALT, "figure.dpi": 100})


def score_scatter(points, path, title="Bechdel scores per movie") -> None:
    """Scatter of (B_F, B_M) per movie, colored by the classic test value.

    `points` holds (b_f, b_m, b) tuples; b may be None (gray).
    """
    with _rc():
        fig, ax = plt.subplots(figsize=(6, 6))
        plotted = False
        for b_value in (None, 0, 1, 2, 3):
            xs = [p[0] for p in points if p[2] == b_value and p[0] is not None]
            ys = [p[1] for p in points if p[2] == b_value and p[1] is not None]
            if not xs:
                continue
            label = "no test data" if b_value is None else f"b = {b_value}"
            ax.scatter(xs, ys, s=28, color=_B_COLORS[b_value], label=label,
                       edgecolors="none", alpha=0.85)
            plotted = True
        ax.set_xlabel("female Bechdel score $B_F$")
        ax.set_ylabel("male Bechdel score $B_M$")
        ax.set_title(title)
        if plotted:
            ax.legend(loc="upper right", frameon=False)
        _save(fig, path)


def centroid_ellipses(groups, path,
                      title="Score centroids (1 sd ellipses)") -> None:
    """Centroid-plus-ellipse view of score distributions.

    `groups` holds (label, centroid (b_f, b_m), sd (sd_f, sd_m), color)
    tuples, e.g. the stream bootstrap against the pass/fail movie groups.
    """
    with _rc():
        fig, ax = plt.subplots(figsize=(6, 6))
        plotted = False
        for label, centroid, sd, color in groups:
            if centroid is None:
                continue
            ax.plot([centroid[0]], [centroid[1]], "o", color=color,
                    label=label, markersize=7)
            plotted = True
            if sd is not None:
                ax.add_patch(Ellipse(centroid, width=2 * sd[0],
                                     height=2 * sd[1], facecolor=color,
                                     alpha=0.2, edgecolor=color))
        ax.set_xlabel("female Bechdel score $B_F$")
        ax.set_ylabel("male Bechdel score $B_M$")
        ax.set_title(title)
        if plotted:
            ax.legend(loc="upper right", frameon=False)
        _save(fig, path)


def state_asymmetry_chart(rows, path,
                          title="Gender independence asymmetry by state") -> None:
    """Horizontal bars of I_M - I_F per state; undefined states listed gray.

    `rows` holds (state, asymmetry or None) tuples.
    """
    defined = sorted((r for r in rows if r[1] is not None), key=lambda r: r[1])
    undefined = sorted(r[0] for r in rows if r[1] is None)
    with _rc():
        height = max(2.5, 0.28 * len(defined) + 1.2)
        fig, ax = plt.subplots(figsize=(7, height))
        if defined:
            names = [r[0] for r in defined]
            values = [r[1] for r in defined]
            colors = ["#2166ac" if v >= 0 else "#b2182b" for v in values]
            ax.barh(range(len(defined)), values, color=colors)
            ax.set_yticks(range(len(defined)), names, fontsize=7)
            ax.axvline(0.0, color="black", linewidth=0.8)
        ax.set_xlabel("$I_M - I_F$")
        if undefined:
            title = f"{title}\n(insufficient data: {', '.join(undefined)})"
        ax.set_title(title, fontsize=10)
        fig.tight_layout()
        _save(fig, path)


def trend_scatter(x, y, labels, path, xlabel, ylabel, title="") -> None:
    """Scatter with a dashed linear-trend overlay (least squares)."""
    with _rc():
        fig, ax = plt.subplots(figsize=(6, 4.5))
        ax.scatter(x, y, s=24, color="#2166ac", edgecolors="none")
        for xi, yi, lab in zip(x, y, labels):
            ax.annotate(lab, (xi, yi), fontsize=6,
                        xytext=(2, 2), textcoords="offset points")
        if len(x) >= 2 and len(set(x)) > 1:
            slope, intercept = np.polyfit(np.asarray(x, float),
                                          np.asarray(y, float), 1)
            grid = np.linspace(min(x), max(x), 50)
            ax.plot(grid, slope * grid + intercept, "r--", linewidth=1.2)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title, fontsize=10)
        fig.tight_layout()
        _save(fig, path)


def cohort_errorbars(rows, path,
                     title="Gender independence by cohort") -> None:
    """I_F and I_M with confidence intervals per cohort side.

    `rows` holds (label, i_f, ci_f, i_m, ci_m); undefined entries are
    skipped.
    """
    with _rc():
        fig, ax = plt.subplots(figsize=(7, 4.5))
        xs = np.arange(len(rows))
        offset = 0.12
        plotted = False
        for dx, key_i, key_ci, color, label in (
                (-offset, 1, 2, "#b2182b", "$I_F$"),
                (offset, 3, 4, "#2166ac", "$I_M$")):
            pts = [(x + dx, row[key_i], row[key_ci])
                   for x, row in zip(xs, rows) if row[key_i] is not None]
            if not pts:
                continue
            px = [p[0] for p in pts]
            py = [p[1] for p in pts]
            yerr = np.array([
                [p[1] - p[2][0] for p in pts],
                [p[2][1] - p[1] for p in pts]]) if all(p[2] for p in pts) \
                else None
            ax.errorbar(px, py, yerr=yerr, fmt="o", color=color, label=label,
                        capsize=3, markersize=5, linestyle="none")
            plotted = True
        ax.set_xticks(xs, [r[0] for r in rows], rotation=30, ha="right",
                      fontsize=8)
        ax.set_ylabel("independence ratio")
        ax.set_ylim(-0.02, 1.02)
        ax.set_title(title, fontsize=10)
        if plotted:
            ax.legend(loc="best", frameon=False)
        fig.tight_layout()
        _save(fig, path)
