"""Static figure rendering.

All writers emit deterministic SVG: a fixed hash salt and stripped date
metadata make identical inputs produce byte-identical files.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .filtration import PersistenceDiagram  # noqa: E402
from .inference import RejectionBand  # noqa: E402

_SVG_OPTS = {"metadata": {"Date": None}}

_H0_STYLE = dict(marker="o", color="#c23b22", label="H0")
_H1_STYLE = dict(marker="^", color="#1f4e8c", label="H1")


def _deterministic_save(fig, path):
    with matplotlib.rc_context({"svg.hashsalt": "maxtda"}):
        fig.savefig(path, **_SVG_OPTS)
    plt.close(fig)


def band_polygon(lo: float, hi: float, t_alpha: float) -> list[tuple[float, float]]:
    """Corners of the rejection band {(b, d): b <= d <= b + 2*t_alpha}.

    The band hugs the diagonal with perpendicular width sqrt(2)*t_alpha.
    """
    return [(lo, lo), (hi, hi), (hi, hi + 2.0 * t_alpha), (lo, lo + 2.0 * t_alpha)]


def render_diagram_svg(
    diagram: PersistenceDiagram,
    band: RejectionBand | None,
    path,
    title: str | None = None,
) -> None:
    """Render a persistence diagram (birth vs death) to an SVG file.

    Unbounded classes are drawn as open markers pinned to the top of the axes.
    """
    finite = [(k, b, d) for k, b, d in diagram.points if math.isfinite(d)]
    essential = [(k, b, d) for k, b, d in diagram.points if not math.isfinite(d)]

    coords = [b for _, b, _ in diagram.points] + [d for _, _, d in finite]
    if coords:
        lo = min(coords)
        hi = max(coords)
    else:
        lo, hi = 0.0, 1.0
    if band is not None:
        hi = max(hi, lo + 2.0 * band.t_alpha)
    span = hi - lo if hi > lo else 1.0
    lo -= 0.05 * span
    hi += 0.10 * span

    fig, ax = plt.subplots(figsize=(4.8, 4.8))
    if band is not None:
        corners = band_polygon(lo, hi, band.t_alpha)
        ax.fill(
            [c[0] for c in corners],
            [c[1] for c in corners],
            color="#f6c9d0",
            alpha=0.6,
            linewidth=0,
            zorder=0,
        )
    ax.plot([lo, hi], [lo, hi], color="0.4", linewidth=1.0, zorder=1)

    for dim, style in ((0, _H0_STYLE), (1, _H1_STYLE)):
        pts = [(b, d) for k, b, d in finite if k == dim]
        if pts:
            arr = np.asarray(pts)
            ax.scatter(arr[:, 0], arr[:, 1], s=28, zorder=2, **style)
        ess = [b for k, b, _ in essential if k == dim]
        if ess:
            ax.scatter(
                ess,
                [hi] * len(ess),
                s=40,
                zorder=2,
                facecolors="none",
                edgecolors=style["color"],
                marker=style["marker"],
            )

    ax.set_xlim(lo, hi)
    ax.set_ylim(lo, hi)
    ax.set_xlabel("birth")
    ax.set_ylabel("death")
    if title:
        ax.set_title(title)
    ax.set_aspect("equal")
    fig.tight_layout()
    _deterministic_save(fig, path)


def plot_point_cloud(cloud: np.ndarray, path, labels=None, title: str | None = None) -> None:
    """Scatter a 2D or 3D cloud to SVG; labels color the points."""
    cloud = np.atleast_2d(np.asarray(cloud, dtype=np.float64))
    d = cloud.shape[1]
    if d == 3:
        fig = plt.figure(figsize=(5.2, 4.8))
        ax = fig.add_subplot(projection="3d")
        args = (cloud[:, 0], cloud[:, 1], cloud[:, 2])
    else:
        fig, ax = plt.subplots(figsize=(4.8, 4.8))
        args = (cloud[:, 0], cloud[:, 1] if d > 1 else np.zeros(cloud.shape[0]))
        ax.set_aspect("equal")
    if labels is None:
        ax.scatter(*args, s=8, color="#1f4e8c")
    else:
        labels = np.asarray(labels)
        for value in np.unique(labels):
            mask = labels == value
            pts = tuple(a[mask] for a in args)
            ax.scatter(*pts, s=8, label=f"label {int(value)}")
        ax.legend(loc="upper right", fontsize=8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    _deterministic_save(fig, path)


def plot_time_series(series_map: dict[str, np.ndarray], path, cadence: float = 1.0) -> None:
    """Line plot of one or more named series against time."""
    fig, ax = plt.subplots(figsize=(7.0, 3.2))
    for name, values in series_map.items():
        values = np.asarray(values, dtype=np.float64)
        ax.plot(np.arange(values.size) * cadence, values, linewidth=1.0, label=name)
    ax.set_xlabel("time")
    ax.set_ylabel("value")
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    _deterministic_save(fig, path)
