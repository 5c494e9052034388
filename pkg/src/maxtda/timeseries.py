"""Time-delay embeddings, delay/dimension selection, PCA, periodicity score."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .filtration import PersistenceDiagram
from .metrics import max_persistence


@dataclass
class TimeSeries:
    """Scalar series with a (metadata-only) time step per sample."""

    values: np.ndarray
    cadence: float = 1.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if self.values.size < 2:
            raise ValueError("series must have at least 2 samples")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("series values must be finite")
        if not (self.cadence > 0):
            raise ValueError("cadence must be positive")

    def __len__(self) -> int:
        return self.values.size


@dataclass
class EmbeddingConfig:
    """Delay tau (steps) and M extra coordinates: rows have M+1 entries."""

    tau: int
    m: int

    def __post_init__(self):
        if self.tau < 1:
            raise ValueError("tau must be a positive integer")
        if self.m < 0:
            raise ValueError("m must be nonnegative")


def delay_embed(series: TimeSeries, cfg: EmbeddingConfig) -> np.ndarray:
    """Delay-embedding matrix: row t is (x(t), x(t+tau), ..., x(t+M*tau)).

    Exactly n - M*tau rows of dimension M+1.
    """
    x = series.values
    n = x.size
    span = cfg.m * cfg.tau
    nrows = n - span
    if nrows < 1:
        raise ValueError("embedding span exceeds series length")
    cols = [x[i * cfg.tau : i * cfg.tau + nrows] for i in range(cfg.m + 1)]
    return np.column_stack(cols)


@dataclass
class AmiResult:
    values: list[float]  # I(tau) for tau = 1..tau_max
    selected_tau: int
    has_local_min: bool


def ami_profile(series: TimeSeries, tau_max: int, bins: int = 16) -> AmiResult:
    """Average mutual information profile and the first-local-minimum delay.

    The series range is split into equal-width bins; I(tau) uses natural
    logarithms with 0*log(0/.) taken as 0. The selected tau is the smallest
    with I(tau-1) > I(tau) < I(tau+1); when no interior local minimum exists
    the argmin is returned with has_local_min=False.
    """
    x = series.values
    n = x.size
    if bins < 2:
        raise ValueError("bins must be at least 2")
    if not (1 <= tau_max < n / 2):
        raise ValueError("tau_max must satisfy 1 <= tau_max < n/2")
    lo, hi = float(x.min()), float(x.max())
    if hi == lo:
        raise ValueError("degenerate range")
    idx = np.minimum((bins * (x - lo) / (hi - lo)).astype(np.int64), bins - 1)

    values = []
    for tau in range(1, tau_max + 1):
        a = idx[: n - tau]
        b = idx[tau:]
        joint = np.bincount(a * bins + b, minlength=bins * bins).reshape(bins, bins)
        joint = joint / joint.sum()
        pi = joint.sum(axis=1)
        pj = joint.sum(axis=0)
        mask = joint > 0
        denom = pi[:, None] * pj[None, :]
        values.append(float(np.sum(joint[mask] * np.log(joint[mask] / denom[mask]))))

    selected = None
    for tau in range(2, tau_max):
        if values[tau - 2] > values[tau - 1] < values[tau]:
            selected = tau
            break
    if selected is None:
        return AmiResult(values, int(np.argmin(values)) + 1, False)
    return AmiResult(values, selected, True)


def cao_dimension(
    series: TimeSeries, tau: int, d_max: int, threshold: float = 0.05
) -> int:
    """Embedding dimension by saturation of Cao's E1 statistic.

    a(i, d) = |y_i(d+1) - y_nn(d+1)|_inf / |y_i(d) - y_nn(d)|_inf with the
    nearest neighbor taken in dimension d under the max norm (ties by index);
    E(d) is the mean over i and E1(d) = E(d+1)/E(d). Returns the smallest
    dimension d with |E1(d+1) - E1(d)| < threshold, or d_max when the ratio
    never settles. Exact-duplicate rows are excluded from the neighbor search.
    """
    if d_max < 2:
        raise ValueError("d_max must be at least 2")
    x = series.values
    n = x.size
    if n - d_max * tau < 2:
        raise ValueError("series too short for the requested d_max")

    e_vals = []
    for d in range(1, d_max + 2):
        emb_lo = delay_embed(series, EmbeddingConfig(tau=tau, m=d - 1))
        emb_hi = delay_embed(series, EmbeddingConfig(tau=tau, m=d))
        rows = emb_hi.shape[0]
        lo = emb_lo[:rows]
        dist = cdist(lo, lo, metric="chebyshev")
        np.fill_diagonal(dist, np.inf)
        dist[dist == 0.0] = np.inf  # duplicates have no expansion ratio
        nn = np.argmin(dist, axis=1)
        denom = dist[np.arange(rows), nn]
        valid = np.isfinite(denom)
        if not np.any(valid):
            raise ValueError("all embedding rows are duplicates")
        num = np.abs(emb_hi[valid] - emb_hi[nn[valid]]).max(axis=1)
        e_vals.append(float(np.mean(num / denom[valid])))

    e1 = [e_vals[i + 1] / e_vals[i] for i in range(d_max)]
    for d in range(1, d_max):
        if abs(e1[d] - e1[d - 1]) < threshold:
            return d
    return d_max


def pca_fit(cloud) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Center/scale a cloud and eigendecompose its sample covariance.

    Returns (standardized data, components as columns, explained-variance
    fractions, column scales). Columns are centered to mean 0 and scaled to
    unit sample variance; zero-variance columns are centered only. Each
    component's largest-magnitude loading is made positive.
    """
    pts = np.atleast_2d(np.asarray(cloud, dtype=np.float64))
    n, d = pts.shape
    center = pts.mean(axis=0)
    z = pts - center
    scale = z.std(axis=0, ddof=1) if n > 1 else np.ones(d)
    scale = np.where(scale > 0, scale, 1.0)
    z = z / scale
    cov = (z.T @ z) / max(n - 1, 1)
    eigval, eigvec = np.linalg.eigh(cov)
    order = np.argsort(eigval)[::-1]
    eigval = np.maximum(eigval[order], 0.0)
    eigvec = eigvec[:, order]
    for c in range(d):
        lead = np.argmax(np.abs(eigvec[:, c]))
        if eigvec[lead, c] < 0:
            eigvec[:, c] = -eigvec[:, c]
    total = eigval.sum()
    ratio = eigval / total if total > 0 else np.zeros(d)
    return z, eigvec, ratio, scale


def pca_project(cloud, ncomp: int) -> np.ndarray:
    """Project onto the top principal components of the standardized cloud."""
    pts = np.atleast_2d(np.asarray(cloud, dtype=np.float64))
    if ncomp > pts.shape[1]:
        raise ValueError("ncomp exceeds the cloud dimension")
    if ncomp < 1:
        raise ValueError("ncomp must be positive")
    z, components, _, _ = pca_fit(pts)
    return z @ components[:, :ncomp]


def periodicity_score(diagram: PersistenceDiagram, normalized: bool = False) -> float:
    """Maximal H1 persistence; divided by sqrt(3) when normalized."""
    score = max_persistence(diagram, dim=1)
    return score / math.sqrt(3.0) if normalized else score


def write_time_series(path, series: TimeSeries, t0: float = 0.0) -> None:
    """Write a series as CSV with columns time,value."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# time,value\n")
        for i, v in enumerate(series.values):
            fh.write(f"{format(t0 + i * series.cadence, '.17g')},{format(v, '.17g')}\n")


def read_time_series(path) -> TimeSeries:
    """Read a time,value CSV; rejects non-uniform or non-increasing time."""
    times, vals = [], []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            t, v = line.split(",")
            times.append(float(t))
            vals.append(float(v))
    if len(vals) < 2:
        raise ValueError("series must have at least 2 samples")
    t = np.asarray(times)
    steps = np.diff(t)
    if np.any(steps <= 0):
        raise ValueError("time must be strictly increasing")
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-12):
        raise ValueError("non-uniform cadence")
    return TimeSeries(np.asarray(vals), cadence=float(steps[0]))
