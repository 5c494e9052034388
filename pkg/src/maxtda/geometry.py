"""Point clouds, set distances, and nearest-neighbor summaries.

A point cloud is an (n, d) float array, d in {1, 2, 3} for the end-to-end
pipelines. All distances are Euclidean; computations are brute force in double
precision (documented hotspot, acceptable for n up to a few thousand).
"""

from __future__ import annotations

import numpy as np


def as_cloud(points, dim: int | None = None) -> np.ndarray:
    """Coerce input to an (n, d) float64 cloud and validate it.

    Raises ValueError on empty input, non-finite coordinates, or a dimension
    mismatch against ``dim``.
    """
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise ValueError("empty set")
    if not np.all(np.isfinite(arr)):
        raise ValueError("non-finite coordinates")
    if dim is not None and arr.shape[1] != dim:
        raise ValueError(f"expected dimension {dim}, got {arr.shape[1]}")
    return arr


def pairwise_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """All Euclidean distances between rows of ``a`` and rows of ``b``."""
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    diff = a[:, None, :] - b[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def dist_to_set(x, cloud) -> float:
    """Euclidean distance from point ``x`` to the nearest point of ``cloud``."""
    cloud = as_cloud(cloud)
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.shape[0] != cloud.shape[1]:
        raise ValueError("point dimension does not match set dimension")
    return float(np.min(np.linalg.norm(cloud - x, axis=1)))


def hausdorff(s1, s2) -> float:
    """Hausdorff distance between two nonempty point sets.

    Max of the two directed sup-inf Euclidean distances; symmetric and zero
    exactly when the inputs are equal as sets.
    """
    s1 = as_cloud(s1)
    s2 = as_cloud(s2, dim=s1.shape[1])
    d = pairwise_distances(s1, s2)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def knn_distances(cloud: np.ndarray, k: int) -> np.ndarray:
    """Distance from each point to its k-th nearest neighbor (self excluded).

    Ties in neighbor ranking are broken by point index order.
    """
    cloud = as_cloud(cloud)
    n = cloud.shape[0]
    if k < 1:
        raise ValueError("k must be positive")
    if k >= n:
        raise ValueError("k must be smaller than the number of points")
    d = pairwise_distances(cloud, cloud)
    np.fill_diagonal(d, np.inf)
    # stable partition: sorting the full row keeps index-order tie breaking
    return np.sort(d, axis=1, kind="stable")[:, k - 1]


def mean_knn_distance(cloud, k: int) -> float:
    """Mean over all points of the distance to their k-th nearest neighbor."""
    return float(knn_distances(cloud, k).mean())


def bounding_box(cloud) -> tuple[np.ndarray, np.ndarray]:
    """Componentwise (lower, upper) corners of the cloud's bounding box."""
    cloud = as_cloud(cloud)
    return cloud.min(axis=0), cloud.max(axis=0)


def diameter(cloud) -> float:
    """Largest pairwise distance in the cloud."""
    cloud = as_cloud(cloud)
    if cloud.shape[0] == 1:
        return 0.0
    return float(pairwise_distances(cloud, cloud).max())


def write_point_cloud(path, cloud, labels=None) -> None:
    """Write a cloud as CSV: one point per row, optional integer label column.

    The header line starts with '#' and names the columns; a trailing 'label'
    column is recognized by :func:`read_point_cloud`.
    """
    cloud = as_cloud(cloud)
    d = cloud.shape[1]
    names = [f"x{i}" for i in range(d)]
    if labels is not None:
        labels = np.asarray(labels, dtype=np.int64)
        if labels.shape[0] != cloud.shape[0]:
            raise ValueError("labels length does not match cloud size")
        names.append("label")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# " + ",".join(names) + "\n")
        for i in range(cloud.shape[0]):
            row = [format(v, ".17g") for v in cloud[i]]
            if labels is not None:
                row.append(str(int(labels[i])))
            fh.write(",".join(row) + "\n")


def read_point_cloud(path) -> tuple[np.ndarray, np.ndarray | None]:
    """Read a point-cloud CSV, returning (cloud, labels-or-None).

    Rows are points with d numeric columns; an optional header line beginning
    with '#' may name the columns. A final column named 'label' in the header
    is split off and returned as an integer array.
    """
    has_label = False
    data_rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                cols = [c.strip() for c in line.lstrip("#").split(",")]
                has_label = bool(cols) and cols[-1] == "label"
                continue
            data_rows.append([float(tok) for tok in line.split(",")])
    if not data_rows:
        raise ValueError("empty set")
    arr = np.asarray(data_rows, dtype=np.float64)
    if has_label:
        if arr.shape[1] < 2:
            raise ValueError("label column requires at least one coordinate")
        return as_cloud(arr[:, :-1]), arr[:, -1].astype(np.int64)
    return as_cloud(arr), None
