"""Parameter selection, bootstrap rejection bands, and feature classification.

Bootstrap replicates and parameter-grid cells derive their random streams
from the base seed and their own index, so a run's results are identical
whether the work is executed serially or on a thread pool.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .density import smooth_subsample
from .filtration import PersistenceDiagram
from .geometry import as_cloud
from .metrics import bottleneck
from .pipelines import PipelineSpec, pipeline_diagram
from .rng import derive_seed, generator

# replicate-index offsets: 0 is reserved for the reference subsample
_SUBSTREAM = 1


@dataclass
class ParameterGrid:
    """Candidate thresholds and bandwidths with top-T feature weights."""

    lambdas: list[float]
    sigmas: list[float]
    top_features: int = 1
    weights: list[float] | None = None

    def __post_init__(self):
        self.lambdas = [float(v) for v in self.lambdas]
        self.sigmas = [float(v) for v in self.sigmas]
        if not self.lambdas or not self.sigmas:
            raise ValueError("candidate lists must be nonempty")
        if self.top_features < 1:
            raise ValueError("top_features must be at least 1")
        if self.weights is None:
            self.weights = [1.0] * self.top_features
        self.weights = [float(w) for w in self.weights]
        if len(self.weights) != self.top_features:
            raise ValueError("weights length must equal top_features")
        if any(w < 0 for w in self.weights):
            raise ValueError("weights must be nonnegative")


@dataclass
class RejectionBand:
    """Significance band: points with persistence <= 2*t_alpha are rejected."""

    alpha: float
    t_alpha: float
    dim: int
    n_boot: int

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise ValueError("alpha must lie in (0, 1)")
        if self.t_alpha < 0:
            raise ValueError("t_alpha must be nonnegative")


@dataclass
class BootstrapRecord:
    index: int
    value: float


def cumulative_persistence(
    diagram: PersistenceDiagram, dim: int, top_features: int, weights: list[float]
) -> float:
    """Weighted sum of the top-T lifetimes, padding with zeros when scarce."""
    pers = np.sort(diagram.persistences(dim))[::-1]
    score = 0.0
    for i in range(top_features):
        life = float(pers[i]) if i < pers.size else 0.0
        score += weights[i] * life
    return score


def adaptive_feature_count(diagram: PersistenceDiagram, dim: int) -> int:
    """Index of the sharpest consecutive drop in the ordered lifetimes.

    A natural cutoff for T; a trailing zero lifetime counts as an infinite
    drop. Returns 1 when fewer than two features exist.
    """
    pers = np.sort(diagram.persistences(dim))[::-1]
    if pers.size < 2:
        return min(1, pers.size) or 1
    ratios = np.where(pers[1:] > 0, pers[:-1] / np.maximum(pers[1:], 1e-300), np.inf)
    return int(np.argmax(ratios)) + 1


def _spec_with_bandwidth(pipeline: PipelineSpec, sigma: float) -> PipelineSpec:
    if pipeline.kind == "kde" and pipeline.bandwidth is None:
        return PipelineSpec(
            kind="kde",
            bandwidth=sigma,
            dtm_m=pipeline.dtm_m,
            grid_res=pipeline.grid_res,
            delta_max=pipeline.delta_max,
            max_dim=pipeline.max_dim,
            pad=pipeline.pad,
        )
    return pipeline


def select_parameters(
    cloud,
    grid: ParameterGrid,
    pipeline: PipelineSpec | str,
    dim: int,
    subsample_size: int,
    seed: int,
    jobs: int = 1,
):
    """Pick (lambda*, sigma*) maximizing the cumulative top-T persistence.

    Each grid cell subsamples the cloud at its (lambda, sigma), builds the
    pipeline's diagram, and scores the weighted top-T lifetimes of ``dim``.
    Ties break toward smaller lambda, then smaller sigma. Cells whose
    threshold is unreachable score -inf; if every cell fails, raises.

    Returns (lambda*, sigma*, table) where table rows are
    (lambda, sigma, score, ok).
    """
    cloud = as_cloud(cloud)
    if isinstance(pipeline, str):
        pipeline = PipelineSpec(kind=pipeline)
    cells = [(lam, sig) for lam in grid.lambdas for sig in grid.sigmas]

    def run_cell(args):
        index, (lam, sig) = args
        try:
            pts = smooth_subsample(cloud, lam, sig, subsample_size, derive_seed(seed, index))
            diagram = pipeline_diagram(pts, _spec_with_bandwidth(pipeline, sig))
            return cumulative_persistence(diagram, dim, grid.top_features, grid.weights), True
        except ValueError:
            return -math.inf, False

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_cell, enumerate(cells)))
    else:
        results = [run_cell(item) for item in enumerate(cells)]

    table = [(lam, sig, score, ok) for (lam, sig), (score, ok) in zip(cells, results)]
    if not any(ok for _, _, _, ok in table):
        raise ValueError("threshold above reachable density for every candidate")
    best = max(table, key=lambda row: (row[2], -row[0], -row[1]))
    return best[0], best[1], table


def bootstrap_talpha(
    cloud,
    lam: float,
    bandwidth: float,
    pipeline: PipelineSpec | str,
    dim: int,
    n_boot: int,
    alpha: float,
    seed: int,
    subsample_size: int | None = None,
    use_subsample: bool = True,
    jobs: int = 1,
) -> tuple[RejectionBand, list[BootstrapRecord]]:
    """Monte-Carlo estimate of the 1-alpha bottleneck quantile t_alpha.

    For each replicate b = 1..N: resample n points with replacement, run the
    level-set subsampler on the resample (same lambda and bandwidth, stream
    derived from (seed, b)), build the pipeline diagram, and record its
    bottleneck distance to the reference diagram built once from the original
    cloud's own subsample. t_alpha is the ceil((1-alpha)*N)-th order
    statistic. With use_subsample=False the diagrams are built directly on
    the resamples (the plain bootstrap the subsampled variant is compared
    against).

    Failed replicates are tolerated up to 5% and dropped from the records.
    """
    cloud = as_cloud(cloud)
    if n_boot < 1:
        raise ValueError("replicate count must be at least 1")
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha must lie in (0, 1)")
    if isinstance(pipeline, str):
        pipeline = PipelineSpec(kind=pipeline)
    pipeline = _spec_with_bandwidth(pipeline, bandwidth)
    n = cloud.shape[0]
    size = subsample_size if subsample_size is not None else n

    if use_subsample:
        reference_pts = smooth_subsample(cloud, lam, bandwidth, size, derive_seed(seed, 0))
    else:
        reference_pts = cloud
    reference = pipeline_diagram(reference_pts, pipeline)

    def run_replicate(b: int):
        rep_seed = derive_seed(seed, b)
        rng = generator(rep_seed)
        resample = cloud[rng.integers(0, n, n)]
        try:
            if use_subsample:
                pts = smooth_subsample(
                    resample, lam, bandwidth, size, derive_seed(rep_seed, _SUBSTREAM)
                )
            else:
                pts = resample
            diagram = pipeline_diagram(pts, pipeline)
            return bottleneck(diagram, reference, dim)
        except ValueError:
            return None

    indices = list(range(1, n_boot + 1))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            raw = list(pool.map(run_replicate, indices))
    else:
        raw = [run_replicate(b) for b in indices]

    records = [BootstrapRecord(b, v) for b, v in zip(indices, raw) if v is not None]
    failed = n_boot - len(records)
    if failed > 0.05 * n_boot:
        raise ValueError(f"{failed} of {n_boot} bootstrap replicates failed")

    values = np.sort(np.array([r.value for r in records]))
    rank = math.ceil((1.0 - alpha) * values.size)
    t_alpha = float(values[max(rank, 1) - 1])
    band = RejectionBand(alpha=alpha, t_alpha=t_alpha, dim=dim, n_boot=values.size)
    return band, records


def classify_features(
    diagram: PersistenceDiagram, band: RejectionBand
) -> tuple[list[tuple[int, float, float]], list[tuple[int, float, float]]]:
    """Partition the band's dimension into (significant, rejected) points.

    A point is significant exactly when its persistence exceeds 2*t_alpha.
    """
    significant, rejected = [], []
    for k, b, d in diagram.points:
        if k != band.dim:
            continue
        if d - b > 2.0 * band.t_alpha:
            significant.append((k, b, d))
        else:
            rejected.append((k, b, d))
    return significant, rejected


def save_band(band: RejectionBand, records: list[BootstrapRecord], path) -> None:
    payload = {
        "alpha": band.alpha,
        "t_alpha": band.t_alpha,
        "dim": band.dim,
        "N": band.n_boot,
        "records": [r.value for r in records],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def load_band(path) -> tuple[RejectionBand, list[BootstrapRecord]]:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    band = RejectionBand(
        alpha=float(payload["alpha"]),
        t_alpha=float(payload["t_alpha"]),
        dim=int(payload["dim"]),
        n_boot=int(payload["N"]),
    )
    records = [BootstrapRecord(i + 1, float(v)) for i, v in enumerate(payload["records"])]
    return band, records
