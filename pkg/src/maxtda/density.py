"""Gaussian KDE, empirical distance-to-measure, and the level-set sampler.

The sampler draws uniform proposals over an axis-aligned box and accepts a
proposal x* with probability f(x*)/Gamma, additionally requiring f(x*) >= lam,
so every returned point lies in the upper level set of the density estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import as_cloud, bounding_box
from .rng import generator

# proposals drawn per vectorized batch; fixed so output is seed-deterministic
_BATCH = 4096
# one full window of proposals without a single acceptance aborts the sampler
_STALL_WINDOW = 10**6


@dataclass(frozen=True)
class KdeModel:
    """Gaussian kernel density estimate: sample points plus bandwidth."""

    sample: np.ndarray
    bandwidth: float

    def __post_init__(self):
        object.__setattr__(self, "sample", as_cloud(self.sample))
        if not (self.bandwidth > 0):
            raise ValueError("bandwidth must be positive")

    @property
    def dim(self) -> int:
        return self.sample.shape[1]


@dataclass(frozen=True)
class ProposalRegion:
    """Axis-aligned box the uniform proposal distribution is supported on."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=np.float64).reshape(-1)
        upper = np.asarray(self.upper, dtype=np.float64).reshape(-1)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        if lower.shape != upper.shape or not np.all(lower < upper):
            raise ValueError("region corners must satisfy lower < upper componentwise")

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    def contains(self, points: np.ndarray) -> bool:
        pts = np.atleast_2d(points)
        return bool(np.all(pts >= self.lower) and np.all(pts <= self.upper))


@dataclass(frozen=True)
class Envelope:
    """Upper bound Gamma on the KDE over a proposal region."""

    gamma: float

    def __post_init__(self):
        if not (self.gamma > 0):
            raise ValueError("envelope must be positive")


def default_region(cloud, bandwidth: float) -> ProposalRegion:
    """Data bounding box padded by 3 bandwidths per side."""
    lo, hi = bounding_box(cloud)
    pad = 3.0 * float(bandwidth)
    return ProposalRegion(lo - pad, hi + pad)


def _sq_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances via the gemm identity, clamped at 0."""
    sq = (a * a).sum(axis=1)[:, None] + (b * b).sum(axis=1)[None, :]
    sq -= 2.0 * (a @ b.T)
    return np.maximum(sq, 0.0, out=sq)


def kde_eval(model: KdeModel, points) -> np.ndarray | float:
    """Evaluate the Gaussian KDE at one point or at rows of an array.

    f(x) = (1/n) sum_i (2*pi)^(-d/2) sigma^(-d) exp(-||x - x_i||^2 / (2 sigma^2))
    """
    pts = np.asarray(points, dtype=np.float64)
    scalar = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if pts.shape[1] != model.dim:
        raise ValueError("query dimension does not match sample dimension")
    sig = model.bandwidth
    d = model.dim
    norm = (2.0 * math.pi) ** (-d / 2.0) * sig ** (-d)
    out = np.empty(pts.shape[0], dtype=np.float64)
    # chunked so grid evaluations stay within a modest memory envelope
    chunk = max(1, int(8e6) // max(1, model.sample.shape[0]))
    for start in range(0, pts.shape[0], chunk):
        sq = _sq_dists(pts[start : start + chunk], model.sample)
        sq *= -1.0 / (2.0 * sig * sig)
        np.exp(sq, out=sq)
        out[start : start + chunk] = sq.mean(axis=1)
    out *= norm
    return float(out[0]) if scalar else out


def dtm_eval(cloud, m: float, points) -> np.ndarray | float:
    """Empirical distance-to-measure at resolution m in (0, 1).

    Root mean of squared distances to the k = ceil(m*n) nearest sample points.
    """
    cloud = as_cloud(cloud)
    if not (0.0 < m < 1.0):
        raise ValueError("resolution m must lie in (0, 1)")
    n = cloud.shape[0]
    k = int(math.ceil(m * n))
    pts = np.asarray(points, dtype=np.float64)
    scalar = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if pts.shape[1] != cloud.shape[1]:
        raise ValueError("query dimension does not match cloud dimension")
    out = np.empty(pts.shape[0], dtype=np.float64)
    chunk = max(1, int(8e6) // n)
    for start in range(0, pts.shape[0], chunk):
        sq = _sq_dists(pts[start : start + chunk], cloud)
        if k < n:
            nearest = np.partition(sq, k - 1, axis=1)[:, :k]
        else:
            nearest = sq
        out[start : start + chunk] = np.sqrt(nearest.mean(axis=1))
    return float(out[0]) if scalar else out


def _probe_axes(region: ProposalRegion, resolution: int) -> list[np.ndarray]:
    return [
        np.linspace(region.lower[i], region.upper[i], resolution)
        for i in range(region.dim)
    ]


def estimate_envelope(
    model: KdeModel, region: ProposalRegion, probe_resolution: int = 48
) -> Envelope:
    """Estimate Gamma >= sup of the KDE over the region.

    Gamma is 1.1 times the maximum of the KDE over a probe grid of
    resolution^d points together with the sample points themselves (where the
    maxima of a Gaussian mixture concentrate). The sampler treats any later
    evaluation above Gamma as a contract violation.
    """
    if probe_resolution < 2:
        raise ValueError("probe_resolution must be at least 2")
    if region.dim != model.dim:
        raise ValueError("region dimension does not match sample dimension")
    if not region.contains(model.sample):
        raise ValueError("region must contain all sample points")
    axes = _probe_axes(region, probe_resolution)
    mesh = np.meshgrid(*axes, indexing="ij")
    grid = np.stack([m.ravel() for m in mesh], axis=1)
    best = float(np.max(kde_eval(model, grid)))
    best = max(best, float(np.max(kde_eval(model, model.sample))))
    return Envelope(1.1 * best)


def smooth_subsample(
    cloud,
    lam: float,
    bandwidth: float,
    size: int,
    seed: int,
    region: ProposalRegion | None = None,
    probe_resolution: int = 48,
) -> np.ndarray:
    """Rejection-sample ``size`` points from the KDE restricted to {f >= lam}.

    Proposals are uniform on ``region`` (default: bounding box padded by three
    bandwidths), u ~ Uniform(0, Gamma); a proposal is kept when u <= f(x*) and
    f(x*) >= lam. Output is bit-identical for identical inputs and seed.

    Raises ValueError("threshold above reachable density") when lam >= Gamma
    or when a window of 1e6 consecutive proposals yields no acceptance.
    """
    cloud = as_cloud(cloud)
    if size < 1:
        raise ValueError("subsample size must be at least 1")
    if lam < 0:
        raise ValueError("threshold must be nonnegative")
    model = KdeModel(cloud, float(bandwidth))
    if region is None:
        region = default_region(cloud, model.bandwidth)
    if region.dim != model.dim:
        raise ValueError("region dimension does not match cloud dimension")
    envelope = estimate_envelope(model, region, probe_resolution)
    gamma = envelope.gamma
    if lam >= gamma:
        raise ValueError("threshold above reachable density")

    rng = generator(seed)
    width = region.upper - region.lower
    accepted = np.empty((size, model.dim), dtype=np.float64)
    count = 0
    proposals_since_accept = 0
    while count < size:
        props = region.lower + width * rng.random((_BATCH, model.dim))
        dens = kde_eval(model, props)
        if np.any(dens > gamma):
            raise RuntimeError("envelope contract violated: density above Gamma")
        u = rng.uniform(0.0, gamma, _BATCH)
        keep = (u <= dens) & (dens >= lam)
        idx = np.flatnonzero(keep)
        if idx.size == 0:
            proposals_since_accept += _BATCH
        else:
            take = idx[: size - count]
            accepted[count : count + take.size] = props[take]
            count += take.size
            # acceptances beyond the fill point still reset the stall window
            proposals_since_accept = _BATCH - (idx[-1] + 1) if count < size else 0
        if proposals_since_accept >= _STALL_WINDOW:
            raise ValueError("threshold above reachable density")
    return accepted
