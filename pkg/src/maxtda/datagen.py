"""Deterministic generators for the benchmark experiments.

All generators are bit-deterministic under (seed, scale); the scale factor
multiplies the sample counts. Label partitions are exact and exhaustive.
"""

from __future__ import annotations

import math

import numpy as np

from .rng import derive_seed, generator
from .timeseries import TimeSeries

# label carried by the dense "signal" structure in each labeled cloud
TWO_CIRCLES_SIGNAL = 1
ELLIPSES_SIGNAL = 0

# radial perturbation of the circle samples; 0.05 reproduces the benchmark's
# density scale (thresholds around 0.6-0.7 inside a [0.1, 1] search range)
_CIRCLE_NOISE_SD = 0.05

# sample counts at scale 1
_N_SPARSE, _N_DENSE, _N_UNIFORM = 50, 500, 450
_N_DENSE_ELLIPSE, _N_SPARSE_ELLIPSE = 180, 51

# 200-day baseline at quarter-day cadence: keeps the 4-day orbit at 16
# samples per period, so a 4-step delay is a quarter period (a 1-step-per-day
# cadence would make the 4-step delay a full period and collapse the
# embedding onto a line)
_RV_DAYS = 200
_RV_CADENCE = 0.25
_RV_NOISE_STREAM = 1001


def gen_two_circles(seed: int, scale: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Two noisy circles plus uniform background in [-1, 1]^2.

    At scale 1: 50 points around the unit circle, 500 around a radius-0.5
    circle (radius perturbed by N(0, sqrt(0.05))), 450 uniform points. Labels:
    0 sparse circle, 1 dense circle (the signal), 2 background.
    """
    if scale <= 0:
        raise ValueError("scale must be positive")
    counts = [round(_N_SPARSE * scale), round(_N_DENSE * scale), round(_N_UNIFORM * scale)]
    if min(counts) < 1:
        raise ValueError("scale too small: empty component")
    rng = generator(seed)

    def circle(n, radius):
        theta = rng.uniform(0.0, 2.0 * math.pi, n)
        r = radius + rng.normal(0.0, _CIRCLE_NOISE_SD, n)
        return np.column_stack([r * np.cos(theta), r * np.sin(theta)])

    sparse = circle(counts[0], 1.0)
    dense = circle(counts[1], 0.5)
    background = rng.uniform(-1.0, 1.0, (counts[2], 2))
    cloud = np.concatenate([sparse, dense, background], axis=0)
    labels = np.concatenate(
        [np.full(counts[0], 0), np.full(counts[1], TWO_CIRCLES_SIGNAL), np.full(counts[2], 2)]
    ).astype(np.int64)
    return cloud, labels


def two_circles_truth(n: int = 500) -> np.ndarray:
    """Noise-free radius-0.5 circle, n points equally spaced."""
    theta = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
    return 0.5 * np.column_stack([np.cos(theta), np.sin(theta)])


# (center, axis-u, axis-v) frames of the four ellipses; index 0 is the dense
# one. Semi-axes are 1.0 and 0.5 (2:1) for all of them.
_ELLIPSE_FRAMES = (
    ((0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (0.0, 1.0, 0.0)),
    ((2.6, 0.0, 0.6), (1.0, 0.0, 0.0), (0.0, 0.5, math.sqrt(3) / 2)),
    ((0.0, 2.6, -0.6), (0.5, 0.0, math.sqrt(3) / 2), (0.0, 1.0, 0.0)),
    ((2.6, 2.6, 0.0), (math.sqrt(0.5), math.sqrt(0.5), 0.0), (0.0, 0.0, 1.0)),
)
_ELLIPSE_AXES = (1.0, 0.5)
_ELLIPSE_JITTER_SD = 0.01


def gen_ellipses3d(seed: int, scale: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Four 2:1 ellipses in R^3, the first markedly denser (n = 333 at scale 1).

    Labels are the ellipse index 0..3; label 0 is the dense ground truth.
    """
    if scale <= 0:
        raise ValueError("scale must be positive")
    counts = [round(_N_DENSE_ELLIPSE * scale)] + [round(_N_SPARSE_ELLIPSE * scale)] * 3
    if min(counts) < 1:
        raise ValueError("scale too small: empty component")
    rng = generator(seed)
    a, b = _ELLIPSE_AXES
    parts, labels = [], []
    for idx, (center, u, v) in enumerate(_ELLIPSE_FRAMES):
        n = counts[idx]
        theta = rng.uniform(0.0, 2.0 * math.pi, n)
        c = np.asarray(center)
        pts = (
            c
            + a * np.cos(theta)[:, None] * np.asarray(u)
            + b * np.sin(theta)[:, None] * np.asarray(v)
        )
        pts = pts + rng.normal(0.0, _ELLIPSE_JITTER_SD, (n, 3))
        parts.append(pts)
        labels.append(np.full(n, idx))
    return np.concatenate(parts, axis=0), np.concatenate(labels).astype(np.int64)


def ellipse_circumference() -> float:
    """Ramanujan approximation for the common 2:1 ellipse circumference."""
    a, b = _ELLIPSE_AXES
    return math.pi * (3 * (a + b) - math.sqrt((3 * a + b) * (a + 3 * b)))


def ellipses3d_truth(n: int = 400) -> np.ndarray:
    """Dense deterministic sampling of the noise-free dense ellipse."""
    center, u, v = _ELLIPSE_FRAMES[0]
    a, b = _ELLIPSE_AXES
    theta = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
    return (
        np.asarray(center)
        + a * np.cos(theta)[:, None] * np.asarray(u)
        + b * np.sin(theta)[:, None] * np.asarray(v)
    )


def rv_noise(seed: int, n: int | None = None) -> np.ndarray:
    """The N(0,1) noise stream added to the combined RV signal."""
    if n is None:
        n = int(_RV_DAYS / _RV_CADENCE)
    return generator(derive_seed(seed, _RV_NOISE_STREAM)).standard_normal(n)


def gen_rv_series(seed: int, which: str) -> TimeSeries:
    """Simulated radial-velocity series over 200 days at quarter-day cadence.

    planet: 0.87 m/s semi-amplitude, 4-day period. spot: sinusoidal proxy,
    0.58 m/s at the 25.05-day rotation. combined: planet + spot + N(0,1).
    """
    t = np.arange(int(_RV_DAYS / _RV_CADENCE), dtype=np.float64) * _RV_CADENCE
    planet = 0.87 * np.sin(2.0 * math.pi * t / 4.0)
    spot = 0.58 * np.sin(2.0 * math.pi * t / 25.05)
    if which == "planet":
        values = planet
    elif which == "spot":
        values = spot
    elif which == "combined":
        values = planet + spot + rv_noise(seed, t.size)
    else:
        raise ValueError("which must be 'planet', 'spot', or 'combined'")
    return TimeSeries(values, cadence=_RV_CADENCE)
