"""Bottleneck distance and maximal persistence.

The bottleneck distance is computed exactly: candidate values are every
pairwise L-infinity distance between the two diagrams plus every diagonal
projection distance (death - birth)/2, and the answer is the smallest
candidate whose threshold graph admits a perfect matching (checked by
augmenting-path maximum bipartite matching with diagonal padding).
"""

from __future__ import annotations

import math

import numpy as np

from .filtration import PersistenceDiagram


def _finite_points(diagram: PersistenceDiagram, dim: int) -> np.ndarray:
    return diagram.finite(dim)


def _perfect_matching_exists(costs: np.ndarray, pa: np.ndarray, pb: np.ndarray, t: float) -> bool:
    """Perfect matching test on the diagonal-augmented threshold graph.

    Left side: the n1 points of D1 plus n2 diagonal slots; right side: the n2
    points of D2 plus n1 diagonal slots. A point may take its own diagonal
    slot when its projection distance is <= t; diagonal slots pair freely.
    """
    n1, n2 = costs.shape
    total = n1 + n2
    adj: list[list[int]] = []
    for i in range(n1):
        nb = list(np.flatnonzero(costs[i] <= t))
        if pa[i] <= 2.0 * t:
            nb.append(n2 + i)
        adj.append(nb)
    dr_all = list(range(n2, n2 + n1))
    for j in range(n2):
        nb = [j] if pb[j] <= 2.0 * t else []
        nb.extend(dr_all)
        adj.append(nb)

    match_right = [-1] * total
    match_left = [-1] * total

    for start in range(total):
        if match_left[start] >= 0:
            continue
        # iterative DFS for an augmenting path from `start`
        visited = [False] * total
        stack = [start]
        iters = [iter(adj[start])]
        via = []  # via[i]: right node chosen from stack[i]
        augmented = False
        while stack:
            found = -1
            for right in iters[-1]:
                if not visited[right]:
                    visited[right] = True
                    found = right
                    break
            if found < 0:
                stack.pop()
                iters.pop()
                if via:
                    via.pop()
                continue
            if match_right[found] < 0:
                via.append(found)
                for left, right in zip(stack, via):
                    match_left[left] = right
                    match_right[right] = left
                augmented = True
                break
            via.append(found)
            nxt = match_right[found]
            stack.append(nxt)
            iters.append(iter(adj[nxt]))
        if not augmented:
            return False
    return True


def bottleneck(d1: PersistenceDiagram, d2: PersistenceDiagram, dim: int) -> float:
    """Exact bottleneck distance between the dim-restricted finite parts.

    Unbounded bars are excluded from the matching; a mismatch in their counts
    makes the diagrams incomparable and raises ValueError.
    """
    if d1.essential_count(dim) != d2.essential_count(dim):
        raise ValueError("incomparable essential classes")
    a = _finite_points(d1, dim)
    b = _finite_points(d2, dim)
    n1, n2 = a.shape[0], b.shape[0]
    if n1 == 0 and n2 == 0:
        return 0.0

    pa = a[:, 1] - a[:, 0] if n1 else np.empty(0)
    pb = b[:, 1] - b[:, 0] if n2 else np.empty(0)
    if n1 and n2:
        costs = np.maximum(
            np.abs(a[:, 0][:, None] - b[:, 0][None, :]),
            np.abs(a[:, 1][:, None] - b[:, 1][None, :]),
        )
    else:
        costs = np.zeros((n1, n2))

    cands = np.concatenate([[0.0], pa / 2.0, pb / 2.0, costs.ravel()])
    cands = np.unique(cands)

    lo, hi = 0, cands.size - 1
    # the largest candidate is always feasible (everything fits the threshold)
    while lo < hi:
        mid = (lo + hi) // 2
        if _perfect_matching_exists(costs, pa, pb, float(cands[mid])):
            hi = mid
        else:
            lo = mid + 1
    return float(cands[lo])


def max_persistence(diagram: PersistenceDiagram, dim: int) -> float:
    """Largest death - birth among the finite points of the given dimension.

    Equals twice the bottleneck distance to the diagonal-only diagram; zero
    for an empty restriction.
    """
    pers = diagram.persistences(dim)
    if pers.size == 0:
        return 0.0
    return float(pers.max())


def diagonal_diagram() -> PersistenceDiagram:
    """The diagram with points only along the diagonal (empty finite part)."""
    return PersistenceDiagram([], "distance")
