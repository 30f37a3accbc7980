"""Centered ball patches, their census, frequencies, repetitivity and entropy."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .conventions import ball_volume
from .pointset import PointSet, cluster_ids, delone_params

NOT_REPETITIVE = "not repetitive in sample"


class BoundaryPatchError(ValueError):
    pass


def _canonical_order(offsets: np.ndarray) -> np.ndarray:
    r = np.round(offsets, 6)
    return np.lexsort([r[:, k] for k in range(r.shape[1] - 1, -1, -1)])


@dataclass(frozen=True, eq=False)
class Patch:
    """(Lambda - x) & B_S; ``label_key`` is set when the sample carries labels."""

    radius: float
    offsets: np.ndarray
    label_key: tuple | None = None
    tol: float = field(default=1e-9, repr=False)

    def __eq__(self, other):
        if not isinstance(other, Patch) or len(self.offsets) != len(other.offsets):
            return False
        if not math.isclose(self.radius, other.radius, rel_tol=1e-12):
            return False
        if self.label_key is not None and other.label_key is not None:
            return self.label_key == other.label_key
        return bool(np.allclose(self.offsets, other.offsets, rtol=0, atol=max(self.tol, other.tol)))

    def __hash__(self):
        return hash((len(self.offsets), round(self.radius, 9)))

    def __len__(self):
        return len(self.offsets)


def _neighbourhoods(p: PointSet, centers: np.ndarray, s: float) -> list[np.ndarray]:
    if p.dim == 1:
        xs = p.points[:, 0]
        order = np.argsort(xs, kind="stable")
        sx = xs[order]
        c = xs[centers]
        slack = 1e-12 * max(1.0, s)
        lo = np.searchsorted(sx, c - s - slack, side="left")
        hi = np.searchsorted(sx, c + s + slack, side="right")
        return [order[a:b] for a, b in zip(lo, hi)]
    return [np.asarray(sorted(nb), dtype=np.int64) for nb in p.tree.query_ball_point(p.points[centers], s * (1 + 1e-12))]


def patch_keys(p: PointSet, centers: np.ndarray, s: float) -> tuple[list, list[Patch]]:
    """Hashable class keys and patches for the given center indices.

    Keys are sorted label differences for labelled samples; otherwise every
    offset vector is snapped to a cluster of offsets closer than eps_q, and
    the key is the sorted tuple of cluster ids.
    """
    centers = np.asarray(centers, dtype=np.int64)
    hoods = _neighbourhoods(p, centers, s)
    tol = p.eps_q()
    offsets = [p.points[nb] - p.points[c] for c, nb in zip(centers, hoods)]
    keys: list = []
    if p.labels is not None:
        for c, nb in zip(centers, hoods):
            diffs = p.labels[nb] - p.labels[c]
            keys.append(tuple(sorted(map(tuple, diffs.tolist()))))
        lkeys = keys
    else:
        sizes = [len(o) for o in offsets]
        flat = np.vstack(offsets) if offsets else np.zeros((0, p.dim))
        ids = cluster_ids(flat, tol)
        splits = np.cumsum(sizes)[:-1]
        for chunk in np.split(ids, splits):
            keys.append(tuple(sorted(chunk.tolist())))
        lkeys = [None] * len(keys)
    patches = []
    for off, lk in zip(offsets, lkeys):
        off = off[_canonical_order(off)]
        off.setflags(write=False)
        patches.append(Patch(float(s), off, lk, tol))
    return keys, patches


def patch_at(p: PointSet, x, s: float) -> Patch:
    """The patch of radius s at the sample point x (index or coordinates)."""
    if np.ndim(x) == 0 and isinstance(x, (int, np.integer)):
        idx = int(x)
    else:
        d, idx = p.tree.query(np.asarray(x, dtype=float).reshape(p.dim))
        if d > p.eps_q() * 10:
            raise ValueError("x is not a point of the sample")
    if p.region.boundary_distance(p.points[idx])[0] < s - 1e-12 * max(1.0, s):
        raise BoundaryPatchError("boundary patch")
    return patch_keys(p, np.array([idx]), s)[1][0]


@dataclass
class PatchClass:
    patch: Patch
    count: int
    centers: list[int]


@dataclass
class PatchCensus:
    radius: float
    classes: dict  # key -> PatchClass, in order of first appearance
    centers_considered: int

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    def class_of(self, patch: Patch):
        for key, cls in self.classes.items():
            if cls.patch == patch:
                return key
        return None


def patch_census(p: PointSet, s: float, centers: np.ndarray | None = None) -> PatchCensus:
    """Count patch classes of radius s over all interior centers.

    Passing ``centers`` (indices at distance >= s from the boundary) fixes the
    center set, so censuses at different radii are comparable.
    """
    if not s > 0:
        raise ValueError("s must be positive")
    if centers is None:
        centers = p.interior(s)
    else:
        centers = np.asarray(centers, dtype=np.int64)
        if len(centers) and p.region.boundary_distance(p.points[centers]).min() < s - 1e-12 * max(1.0, s):
            raise BoundaryPatchError("boundary patch")
    if len(centers) == 0:
        raise ValueError("region too small")
    keys, patches = patch_keys(p, centers, s)
    classes: dict = {}
    for c, key, patch in zip(centers.tolist(), keys, patches):
        entry = classes.get(key)
        if entry is None:
            classes[key] = PatchClass(patch, 1, [c])
        else:
            entry.count += 1
            entry.centers.append(c)
    return PatchCensus(float(s), classes, len(centers))


def locator_set(p: PointSet, patch: Patch) -> np.ndarray:
    """Indices of interior centers at which ``patch`` occurs."""
    centers = p.interior(patch.radius)
    if len(centers) == 0:
        return centers
    _, patches = patch_keys(p, centers, patch.radius)
    hit = [c for c, q in zip(centers.tolist(), patches) if q == patch]
    return np.asarray(hit, dtype=np.int64)


def patch_frequency(p: PointSet, patch: Patch, window_positions: Sequence, s_avg: float) -> tuple[float, float]:
    """Occurrence density of ``patch`` in B_{s_avg} and its worst deviation over shifted balls."""
    positions = np.asarray(window_positions, dtype=float).reshape(-1, p.dim) if len(window_positions) else np.zeros((0, p.dim))
    reach = s_avg + patch.radius + (np.max(np.linalg.norm(positions, axis=1)) if len(positions) else 0.0)
    if reach > p.region.inner_radius * (1 + 1e-12):
        raise ValueError("averaging windows leave the sampling region")
    occ = p.points[locator_set(p, patch)]
    vol = ball_volume(s_avg, p.dim)
    nu = np.count_nonzero(np.linalg.norm(occ, axis=1) <= s_avg) / vol
    dev = 0.0
    for pos in positions:
        est = np.count_nonzero(np.linalg.norm(occ - pos, axis=1) <= s_avg) / vol
        dev = max(dev, abs(est - nu))
    return float(nu), float(dev)


def repetitivity_radius(p: PointSet, patch: Patch) -> float | str:
    """Smallest R' such that every test ball of radius R' holds an occurrence.

    Test centers form a grid of step packing_radius over the ball of half the
    usable radius (region inner radius minus patch radius).  Returns
    ``NOT_REPETITIVE`` when the patch is absent or some test ball of that
    half radius misses it.
    """
    usable = p.region.inner_radius - patch.radius
    if usable <= 0:
        raise ValueError("region too small")
    occ = p.points[locator_set(p, patch)]
    if len(occ) == 0:
        return NOT_REPETITIVE
    step = delone_params(p).packing_radius
    half = usable / 2
    n = int(half // step)
    axis = step * np.arange(-n, n + 1)
    grid = np.stack(np.meshgrid(*([axis] * p.dim), indexing="ij"), axis=-1).reshape(-1, p.dim)
    grid = grid[np.linalg.norm(grid, axis=1) <= half]
    from scipy.spatial import cKDTree

    dist, _ = cKDTree(occ).query(grid)
    r = float(dist.max())
    # grid nodes stop up to one step short of the test ball's edge
    slack = step * math.sqrt(p.dim)
    return NOT_REPETITIVE if r + slack >= half else r


class EntropyPoint(NamedTuple):
    s: float
    n_patches: int
    entropy: float


def entropy_estimate(p: PointSet, s_list: Sequence[float]) -> list[EntropyPoint]:
    """ln N(S) / |B_S| for each S, without extrapolation."""
    if any(b <= a for a, b in zip(s_list, s_list[1:])):
        raise ValueError("s_list must be increasing")
    out = []
    for s in s_list:
        n = patch_census(p, s).n_classes
        out.append(EntropyPoint(float(s), n, math.log(n) / ball_volume(s, p.dim)))
    return out


def factor_complexity(word: Sequence, n: int) -> int:
    """Number of distinct factors of length n."""
    w = list(word)
    return len({tuple(w[i : i + n]) for i in range(len(w) - n + 1)})
