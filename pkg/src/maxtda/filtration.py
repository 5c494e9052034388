"""Filtered complexes and persistence diagrams.

Two complex builders are provided: Vietoris-Rips on point clouds, and a
Freudenthal-triangulated grid carrying a function's lower- or upper-level set
filtration. Persistence is computed by standard Z/2 boundary-matrix column
reduction (sparse columns as sorted index lists, clearing optimization) over
simplices sorted by (filtration value, dimension, lexicographic vertices).

Upper-level set filtrations are realized by negating the vertex values and
filtering as lower-level sets; the resulting complex stores the negated
values and is tagged scale='function-upper'. Diagrams are reported in a
canonical orientation with death >= birth for every point: finite pairs
(b', d') of the negated reduction become (-d', -b'), and unbounded classes
keep death = +inf with birth mapped back to the original value.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .geometry import as_cloud, diameter, pairwise_distances

_PACK = 1 << 20  # vertex ids must stay below this for key packing

DISTANCE = "distance"
FUNCTION_LOWER = "function-lower"
FUNCTION_UPPER = "function-upper"
_SCALES = (DISTANCE, FUNCTION_LOWER, FUNCTION_UPPER)


@dataclass
class FilteredComplex:
    """Simplices (dim <= 3) with filtration values, closed under faces.

    ``verts`` is an (m, width) int64 matrix of strictly increasing vertex ids
    padded with -1 on the right; ``values`` the filtration values. For
    scale='function-upper' the stored values are the negated function values.
    """

    verts: np.ndarray
    values: np.ndarray
    scale: str = DISTANCE

    def __post_init__(self):
        self.verts = np.atleast_2d(np.asarray(self.verts, dtype=np.int64))
        self.values = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if self.verts.shape[0] != self.values.shape[0]:
            raise ValueError("verts and values length mismatch")
        if self.scale not in _SCALES:
            raise ValueError(f"unknown scale {self.scale!r}")

    @property
    def dims(self) -> np.ndarray:
        return (self.verts >= 0).sum(axis=1).astype(np.int64) - 1

    def __len__(self) -> int:
        return self.verts.shape[0]

    def simplex_list(self) -> list[tuple[tuple[int, ...], float]]:
        """Simplices as (vertex tuple, value) pairs, in storage order."""
        out = []
        for row, val in zip(self.verts, self.values):
            out.append((tuple(int(v) for v in row if v >= 0), float(val)))
        return out


def from_simplices(simplices, scale: str = DISTANCE) -> FilteredComplex:
    """Build a complex from (vertex tuple, value) pairs (mainly for tests)."""
    if not simplices:
        return FilteredComplex(np.empty((0, 1), np.int64), np.empty(0), scale)
    width = max(len(s) for s, _ in simplices)
    verts = np.full((len(simplices), width), -1, dtype=np.int64)
    values = np.empty(len(simplices), dtype=np.float64)
    for i, (vs, val) in enumerate(simplices):
        vs = tuple(int(v) for v in vs)
        if len(vs) == 0 or any(b <= a for a, b in zip(vs, vs[1:])):
            raise ValueError("vertex indices must be strictly increasing")
        verts[i, : len(vs)] = vs
        values[i] = val
    return FilteredComplex(verts, values, scale)


@dataclass
class PersistenceDiagram:
    """Multiset of (homology dim, birth, death) triples plus a scale tag.

    death >= birth for every point; unbounded classes carry death = +inf.
    Zero-persistence pairs are never stored.
    """

    points: list[tuple[int, float, float]] = field(default_factory=list)
    scale: str = DISTANCE

    def restricted(self, dim: int) -> list[tuple[float, float]]:
        return [(b, d) for k, b, d in self.points if k == dim]

    def finite(self, dim: int) -> np.ndarray:
        pts = [(b, d) for k, b, d in self.points if k == dim and math.isfinite(d)]
        return np.asarray(pts, dtype=np.float64).reshape(-1, 2)

    def essential_count(self, dim: int) -> int:
        return sum(1 for k, _, d in self.points if k == dim and math.isinf(d))

    def persistences(self, dim: int) -> np.ndarray:
        f = self.finite(dim)
        if f.size == 0:
            return np.empty(0, dtype=np.float64)
        return f[:, 1] - f[:, 0]


def build_vr(cloud, max_dim: int = 2, delta_max: float | None = None) -> FilteredComplex:
    """Vietoris-Rips complex up to ``max_dim`` <= 2 with edge cutoff ``delta_max``.

    Vertices enter at 0, an edge at its length if <= delta_max, a triangle at
    the maximum of its edge lengths if <= delta_max. Default delta_max is the
    cloud diameter, which makes every H1 class die at a finite value. Brute
    force O(n^2) distances and O(n^3) triangle enumeration; the delta_max flag
    is the lever when that becomes too slow.
    """
    cloud = as_cloud(cloud)
    n = cloud.shape[0]
    if not 0 <= max_dim <= 2:
        raise ValueError("max_dim must be 0, 1, or 2")
    if n >= _PACK:
        raise ValueError("too many points for vertex id packing")
    if delta_max is None:
        delta_max = diameter(cloud)
    delta_max = float(delta_max)

    width = max_dim + 1
    rows = [np.full((n, width), -1, dtype=np.int64)]
    rows[0][:, 0] = np.arange(n)
    vals = [np.zeros(n)]

    dmat = pairwise_distances(cloud, cloud)
    if max_dim >= 1 and n >= 2:
        iu, ju = np.triu_indices(n, 1)
        elen = dmat[iu, ju]
        keep = elen <= delta_max
        iu, ju, elen = iu[keep], ju[keep], elen[keep]
        erows = np.full((iu.size, width), -1, dtype=np.int64)
        erows[:, 0] = iu
        erows[:, 1] = ju
        rows.append(erows)
        vals.append(elen)

        if max_dim == 2 and iu.size:
            adj = dmat <= delta_max
            np.fill_diagonal(adj, False)
            tri_parts = []
            tval_parts = []
            for a, b, dab in zip(iu, ju, elen):
                ks = np.flatnonzero(adj[a] & adj[b])
                ks = ks[ks > b]
                if ks.size == 0:
                    continue
                block = np.empty((ks.size, 3), dtype=np.int64)
                block[:, 0] = a
                block[:, 1] = b
                block[:, 2] = ks
                tri_parts.append(block)
                tval_parts.append(np.maximum(dab, np.maximum(dmat[a, ks], dmat[b, ks])))
            if tri_parts:
                rows.append(np.concatenate(tri_parts, axis=0))
                vals.append(np.concatenate(tval_parts))

    return FilteredComplex(np.concatenate(rows, axis=0), np.concatenate(vals), DISTANCE)


def _grid_edges_tris(shape: tuple[int, ...]) -> tuple[np.ndarray, np.ndarray]:
    """Edge and triangle vertex-id arrays of the Freudenthal triangulation."""
    if len(shape) == 1:
        (nx,) = shape
        ids = np.arange(nx, dtype=np.int64)
        edges = np.stack([ids[:-1], ids[1:]], axis=1)
        return edges, np.empty((0, 3), dtype=np.int64)

    if len(shape) == 2:
        nx, ny = shape
        ids = (np.arange(nx)[:, None] * ny + np.arange(ny)[None, :]).astype(np.int64)
        v00 = ids[:-1, :-1].ravel()
        sx, sy = ny, 1
        edges = [
            np.stack([ids[:, :-1].ravel(), ids[:, :-1].ravel() + sy], axis=1),
            np.stack([ids[:-1, :].ravel(), ids[:-1, :].ravel() + sx], axis=1),
            np.stack([v00, v00 + sx + sy], axis=1),
        ]
        tris = [
            np.stack([v00, v00 + sx, v00 + sx + sy], axis=1),
            np.stack([v00, v00 + sy, v00 + sx + sy], axis=1),
        ]
        return np.concatenate(edges, axis=0), np.concatenate(tris, axis=0)

    nx, ny, nz = shape
    sx, sy, sz = ny * nz, nz, 1
    base = (
        np.arange(nx - 1)[:, None, None] * sx
        + np.arange(ny - 1)[None, :, None] * sy
        + np.arange(nz - 1)[None, None, :]
    ).astype(np.int64).ravel()
    # Kuhn subdivision: one tetrahedron per axis permutation, vertices along
    # the monotone lattice path from the cube's base corner
    tets = []
    import itertools

    for perm in itertools.permutations((sx, sy, sz)):
        v0 = base
        v1 = v0 + perm[0]
        v2 = v1 + perm[1]
        v3 = v2 + perm[2]
        tets.append(np.stack([v0, v1, v2, v3], axis=1))
    tets = np.concatenate(tets, axis=0)

    face_idx = [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)]
    tris = np.concatenate([tets[:, f] for f in face_idx], axis=0)
    edge_idx = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    edges = np.concatenate([tets[:, e] for e in edge_idx], axis=0)

    ekey = edges[:, 0] * _PACK + edges[:, 1]
    edges = edges[np.unique(ekey, return_index=True)[1]]
    tkey = (tris[:, 0] * _PACK + tris[:, 1]) * _PACK + tris[:, 2]
    tris = tris[np.unique(tkey, return_index=True)[1]]
    return edges, tris


def build_function_complex(values, direction: str) -> FilteredComplex:
    """Level-set filtration of a function sampled on a regular grid.

    ``values`` is a 1-, 2-, or 3-dimensional array of function samples; the
    grid is triangulated (segments / 2 triangles per cell / 6 tetrahedra per
    cell with faces kept up to dimension 2). Each simplex enters at the max of
    its vertex values for direction='lower'; direction='upper' negates the
    values internally and tags the complex scale as function-upper.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim not in (1, 2, 3):
        raise ValueError("grid must be 1-, 2-, or 3-dimensional")
    if any(s < 2 for s in arr.shape):
        raise ValueError("degenerate grid")
    if not np.all(np.isfinite(arr)):
        raise ValueError("grid values must be finite")
    if arr.size >= _PACK:
        raise ValueError("grid too large for vertex id packing")

    if direction == "upper":
        work = -arr
        scale = FUNCTION_UPPER
    elif direction == "lower":
        work = arr
        scale = FUNCTION_LOWER
    else:
        raise ValueError("direction must be 'upper' or 'lower'")

    flat = work.ravel(order="C")
    nvert = flat.size
    edges, tris = _grid_edges_tris(arr.shape)

    width = 3 if tris.size else 2
    vrows = np.full((nvert, width), -1, dtype=np.int64)
    vrows[:, 0] = np.arange(nvert)
    rows = [vrows]
    vals = [flat.copy()]

    erows = np.full((edges.shape[0], width), -1, dtype=np.int64)
    erows[:, :2] = edges
    rows.append(erows)
    vals.append(np.maximum(flat[edges[:, 0]], flat[edges[:, 1]]))

    if tris.size:
        rows.append(tris)
        vals.append(np.maximum.reduce([flat[tris[:, i]] for i in range(3)]))

    return FilteredComplex(np.concatenate(rows, axis=0), np.concatenate(vals), scale)


@njit(cache=True, nogil=True)
def _reduce_columns(faces, npos):  # pragma: no cover - exercised via wrapper
    """Reduce boundary columns given as sorted face-position rows.

    Returns, per column, the pivot row position after reduction, or -1 when
    the column reduces to zero. Columns are processed in index order; reduced
    pivot-owning columns are stored as sorted index lists and merged into
    later columns by symmetric difference.
    """
    m, w = faces.shape
    owner = np.full(npos, -1, np.int64)
    owner_start = np.zeros(m, np.int64)
    owner_len = np.zeros(m, np.int64)
    store = np.empty(max(1024, 2 * m * w), np.int64)
    store_top = 0
    pivot_of = np.full(m, -1, np.int64)
    cur = np.empty(npos + 1, np.int64)
    tmp = np.empty(npos + 1, np.int64)

    for j in range(m):
        wlen = 0
        for t in range(w):
            cur[wlen] = faces[j, t]
            wlen += 1
        while wlen > 0:
            piv = cur[wlen - 1]
            k = owner[piv]
            if k < 0:
                need = store_top + wlen
                if need > store.size:
                    ns = store.size
                    while ns < need:
                        ns *= 2
                    grown = np.empty(ns, np.int64)
                    grown[:store_top] = store[:store_top]
                    store = grown
                for t in range(wlen):
                    store[store_top + t] = cur[t]
                owner[piv] = j
                owner_start[j] = store_top
                owner_len[j] = wlen
                store_top += wlen
                pivot_of[j] = piv
                break
            s0 = owner_start[k]
            sl = owner_len[k]
            a = 0
            b = 0
            o = 0
            while a < wlen and b < sl:
                va = cur[a]
                vb = store[s0 + b]
                if va == vb:
                    a += 1
                    b += 1
                elif va < vb:
                    tmp[o] = va
                    o += 1
                    a += 1
                else:
                    tmp[o] = vb
                    o += 1
                    b += 1
            while a < wlen:
                tmp[o] = cur[a]
                o += 1
                a += 1
            while b < sl:
                tmp[o] = store[s0 + b]
                o += 1
                b += 1
            swap = cur
            cur = tmp
            tmp = swap
            wlen = o
    return pivot_of


def _pack_rows(verts: np.ndarray, d: int) -> np.ndarray:
    key = verts[:, 0].astype(np.int64).copy()
    for c in range(1, d + 1):
        key = key * _PACK + verts[:, c]
    return key


def _sorted_order(verts: np.ndarray, values: np.ndarray, dims: np.ndarray) -> np.ndarray:
    keys = [verts[:, c] for c in range(verts.shape[1] - 1, -1, -1)]
    keys.append(dims)
    keys.append(values)
    return np.lexsort(tuple(keys))


def compute_persistence(cx: FilteredComplex, max_hom_dim: int = 1) -> PersistenceDiagram:
    """Persistence diagram of a monotone filtered complex.

    Standard Z/2 column reduction over simplices sorted by (value, dim,
    lexicographic vertices), with the clearing optimization (dimensions
    processed top down; pivot rows of one pass are skipped as columns in the
    next). Zero-persistence pairs are dropped; unbounded classes get death
    +inf, one H0 class per connected component.
    """
    if not 0 <= max_hom_dim <= 1:
        raise ValueError("max_hom_dim must be 0 or 1")
    m = len(cx)
    if m == 0:
        return PersistenceDiagram([], cx.scale)

    order = _sorted_order(cx.verts, cx.values, cx.dims)
    verts = cx.verts[order]
    vals = cx.values[order]
    dims = cx.dims[order]
    top_dim = int(dims.max())

    # face lookup tables per dimension, and the monotonicity/closure check
    dim_positions = {d: np.flatnonzero(dims == d) for d in range(top_dim + 1)}
    keys = {}
    key_order = {}
    for d, pos in dim_positions.items():
        k = _pack_rows(verts[pos], d)
        if np.unique(k).size != k.size:
            raise ValueError("duplicate simplices in complex")
        o = np.argsort(k)
        keys[d] = k[o]
        key_order[d] = pos[o]

    face_cols: dict[int, np.ndarray] = {}
    for d in range(1, top_dim + 1):
        pos = dim_positions[d]
        if pos.size == 0:
            face_cols[d] = np.empty((0, d + 1), dtype=np.int64)
            continue
        sub = verts[pos]
        fpos = np.empty((pos.size, d + 1), dtype=np.int64)
        if keys[d - 1].size == 0:
            raise ValueError("complex not closed under faces")
        for drop in range(d + 1):
            cols = [c for c in range(d + 1) if c != drop]
            fverts = sub[:, cols]
            fkey = _pack_rows(fverts, d - 1)
            loc = np.clip(np.searchsorted(keys[d - 1], fkey), 0, keys[d - 1].size - 1)
            if not np.all(keys[d - 1][loc] == fkey):
                raise ValueError("complex not closed under faces")
            fpos[:, drop] = key_order[d - 1][loc]
        if np.any(vals[fpos] > vals[pos][:, None]):
            raise ValueError("non-monotone complex")
        face_cols[d] = np.sort(fpos, axis=1)

    pairs: list[tuple[int, int]] = []
    cleared = np.zeros(m, dtype=bool)
    zero_cols: dict[int, np.ndarray] = {}
    max_pass = min(top_dim, max_hom_dim + 1)
    for d in range(max_pass, 0, -1):
        pos = dim_positions[d]
        active = pos[~cleared[pos]]
        if active.size == 0:
            zero_cols[d] = np.empty(0, dtype=np.int64)
            continue
        sel = ~cleared[pos]
        pivot_of = _reduce_columns(face_cols[d][sel], m)
        hit = pivot_of >= 0
        for r, c in zip(pivot_of[hit], active[hit]):
            pairs.append((int(r), int(c)))
        cleared[pivot_of[hit]] = True
        zero_cols[d] = active[~hit]

    points: list[tuple[int, float, float]] = []
    for r, c in pairs:
        hdim = int(dims[r])
        if hdim > max_hom_dim:
            continue
        birth, death = float(vals[r]), float(vals[c])
        if birth == death:
            continue
        points.append((hdim, birth, death))

    # essential classes: positive simplices never used as a pivot row
    paired_rows = np.zeros(m, dtype=bool)
    for r, _ in pairs:
        paired_rows[r] = True
    for p in dim_positions[0]:
        if not paired_rows[p]:
            points.append((0, float(vals[p]), math.inf))
    if max_hom_dim >= 1:
        # uncleared edges whose columns reduced to zero create 1-cycles that
        # no triangle ever fills
        for p in zero_cols.get(1, np.empty(0, np.int64)):
            points.append((1, float(vals[p]), math.inf))

    if cx.scale == FUNCTION_UPPER:
        flipped = []
        for k, b, d in points:
            if math.isinf(d):
                flipped.append((k, -b, math.inf))
            else:
                flipped.append((k, -d, -b))
        points = flipped

    points.sort(key=lambda p: (p[0], p[1], p[2]))
    return PersistenceDiagram(points, cx.scale)


def save_diagram(diagram: PersistenceDiagram, path) -> None:
    """Write a diagram as a JSON array; infinite deaths become "inf"."""
    payload = [
        {
            "dim": int(k),
            "birth": float(b),
            "death": "inf" if math.isinf(d) else float(d),
            "scale": diagram.scale,
        }
        for k, b, d in diagram.points
    ]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def load_diagram(path) -> PersistenceDiagram:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    points = []
    scale = DISTANCE
    for item in payload:
        death = math.inf if item["death"] == "inf" else float(item["death"])
        points.append((int(item["dim"]), float(item["birth"]), death))
        scale = item.get("scale", DISTANCE)
    points.sort(key=lambda p: (p[0], p[1], p[2]))
    return PersistenceDiagram(points, scale)
