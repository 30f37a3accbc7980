"""Finite samples of Delone sets and their elementary diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .conventions import EPS_Q_REL, ball_volume


class DegenerateSampleError(ValueError):
    pass


@dataclass(frozen=True)
class Region:
    """Sampling region: a centered closed ball or an axis-aligned box."""

    kind: str
    radius: float = 0.0
    lo: tuple[float, ...] = ()
    hi: tuple[float, ...] = ()

    @classmethod
    def ball(cls, radius: float) -> "Region":
        return cls("ball", radius=float(radius))

    @classmethod
    def box(cls, lo: Sequence[float], hi: Sequence[float]) -> "Region":
        return cls("box", lo=tuple(float(v) for v in lo), hi=tuple(float(v) for v in hi))

    def __post_init__(self):
        if self.kind == "ball":
            if not self.radius > 0:
                raise ValueError("ball region needs a positive radius")
        elif self.kind == "box":
            if len(self.lo) != len(self.hi) or any(a > b for a, b in zip(self.lo, self.hi)):
                raise ValueError("box region needs lo <= hi componentwise")
        else:
            raise ValueError(f"unknown region kind {self.kind!r}")

    def boundary_distance(self, pts: np.ndarray) -> np.ndarray:
        """Signed distance to the boundary, positive inside."""
        pts = np.atleast_2d(pts)
        if self.kind == "ball":
            return self.radius - np.linalg.norm(pts, axis=1)
        lo, hi = np.asarray(self.lo), np.asarray(self.hi)
        return np.min(np.minimum(pts - lo, hi - pts), axis=1)

    def contains(self, pts: np.ndarray, tol: float = 0.0) -> np.ndarray:
        return self.boundary_distance(pts) >= -tol

    @property
    def inner_radius(self) -> float:
        """Radius of the largest origin-centered ball inside the region."""
        if self.kind == "ball":
            return self.radius
        return float(max(0.0, min(min(-a for a in self.lo), min(self.hi))))

    def volume(self, dim: int) -> float:
        if self.kind == "ball":
            return ball_volume(self.radius, dim)
        return float(np.prod(np.subtract(self.hi, self.lo)))

    def header(self) -> str:
        if self.kind == "ball":
            return f"region ball {self.radius!r}"
        bounds = " ".join(f"{a!r} {b!r}" for a, b in zip(self.lo, self.hi))
        return f"region box {bounds}"


@dataclass(frozen=True, eq=False)
class PointSet:
    """A finite sample of a point set in R^N.

    ``labels`` are optional exact integer coordinates (one row per point) and
    ``label_map`` the real ``N x d`` matrix sending a label to its position.
    """

    dim: int
    points: np.ndarray
    region: Region
    labels: np.ndarray | None = None
    label_map: np.ndarray | None = None
    meta: str = ""
    _tree: list = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float).reshape(-1, self.dim)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if not 1 <= self.dim <= 3:
            raise ValueError("dimension must be 1, 2 or 3")
        if len(pts) and not np.all(self.region.contains(pts, tol=1e-9 * (1 + self.region.inner_radius))):
            raise ValueError("points outside the sampling region")
        if self.labels is not None:
            lab = np.array(self.labels, dtype=np.int64).reshape(len(pts), -1)
            lab.setflags(write=False)
            object.__setattr__(self, "labels", lab)
            if len(np.unique(lab, axis=0)) != len(lab):
                raise ValueError("labels are not pairwise distinct")
            if self.label_map is not None:
                lm = np.array(self.label_map, dtype=float).reshape(self.dim, lab.shape[1])
                lm.setflags(write=False)
                object.__setattr__(self, "label_map", lm)
        elif len(pts) > 1:
            d, _ = self.tree.query(pts, k=2)
            if np.min(d[:, 1]) <= 0:
                raise ValueError("coincident points")

    def __len__(self) -> int:
        return len(self.points)

    @property
    def tree(self) -> cKDTree:
        if not self._tree:
            self._tree.append(cKDTree(self.points))
        return self._tree[0]

    @property
    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.points, axis=1)

    def interior(self, s: float) -> np.ndarray:
        """Indices of points whose closed s-ball lies inside the region."""
        return np.flatnonzero(self.region.boundary_distance(self.points) >= s - 1e-12 * max(1.0, s))

    def translate(self, t: Sequence[float]) -> "PointSet":
        """The sample of ``Lambda + t``; a ball region becomes its shifted box hull."""
        t = np.asarray(t, dtype=float).reshape(self.dim)
        if self.region.kind == "ball":
            r = self.region.radius
            region = Region.box(t - r, t + r) if np.any(t) else self.region
        else:
            region = Region.box(np.asarray(self.region.lo) + t, np.asarray(self.region.hi) + t)
        return PointSet(self.dim, self.points + t, region, self.labels, self.label_map, self.meta)

    def restrict(self, radius: float) -> "PointSet":
        keep = self.norms <= radius
        return PointSet(
            self.dim, self.points[keep], Region.ball(radius),
            None if self.labels is None else self.labels[keep], self.label_map, self.meta,
        )

    def eps_q(self) -> float:
        """Identification tolerance for positions in this sample."""
        if len(self) < 2:
            return EPS_Q_REL
        d, _ = self.tree.query(self.points, k=2)
        return EPS_Q_REL * float(np.min(d[:, 1])) / 2.0


def cluster_ids(vectors: np.ndarray, tol: float) -> np.ndarray:
    """Group vectors closer than ``tol`` (transitively); ids in first-seen order."""
    v = np.asarray(vectors, dtype=float)
    n = len(v)
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    v = v.reshape(n, -1)
    if v.shape[1] == 1:
        order = np.argsort(v[:, 0], kind="stable")
        jumps = np.diff(v[order, 0]) > tol
        comp_sorted = np.concatenate([[0], np.cumsum(jumps)])
        comp = np.empty(n, dtype=np.int64)
        comp[order] = comp_sorted
    else:
        pairs = cKDTree(v).query_pairs(tol, output_type="ndarray")
        graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
        _, comp = connected_components(graph, directed=False)
    # relabel so that ids follow first appearance
    _, first = np.unique(comp, return_index=True)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first)] = np.arange(len(first))
    return rank[comp]


# ---------------------------------------------------------------- Delone data


@dataclass(frozen=True)
class DeloneParams:
    packing_radius: float
    covering_radius: float
    exact: bool


def delone_params(p: PointSet) -> DeloneParams:
    """Packing radius (half the minimal distance) and covering radius.

    In 1D the covering radius is half the largest gap between consecutive
    points.  In 2D/3D it is estimated on a grid of step packing/10 restricted
    to grid points at distance at least the running estimate from the region
    boundary, and flagged non-exact.
    """
    if len(p) < 2:
        raise DegenerateSampleError("degenerate sample")
    d, _ = p.tree.query(p.points, k=2)
    packing = float(np.min(d[:, 1])) / 2.0
    if p.dim == 1:
        xs = np.sort(p.points[:, 0])
        return DeloneParams(packing, float(np.max(np.diff(xs))) / 2.0, True)

    step = packing / 10.0
    if p.region.kind == "ball":
        lo = np.full(p.dim, -p.region.radius)
        hi = -lo
    else:
        lo, hi = np.asarray(p.region.lo), np.asarray(p.region.hi)
    axes = [np.arange(a + step / 2, b, step) for a, b in zip(lo, hi)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, p.dim)
    margin = p.region.boundary_distance(grid)
    dist, _ = p.tree.query(grid)
    covering = 0.0
    for _ in range(20):
        inside = margin >= covering
        new = float(dist[inside].max()) if np.any(inside) else covering
        if new <= covering:
            break
        covering = new
    return DeloneParams(packing, covering, False)


# ----------------------------------------------------------- difference sets


def ordered_pairs(p: PointSet, s_max: float, sources: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """All ordered index pairs (i, j), i != j, with |x_j - x_i| <= s_max.

    With ``sources`` only pairs whose first index lies in ``sources`` are kept.
    """
    if len(p) < 2:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    pairs = p.tree.query_pairs(s_max * (1 + 1e-12), output_type="ndarray")
    i = np.concatenate([pairs[:, 0], pairs[:, 1]])
    j = np.concatenate([pairs[:, 1], pairs[:, 0]])
    if sources is not None:
        mask = np.zeros(len(p), dtype=bool)
        mask[sources] = True
        keep = mask[i]
        i, j = i[keep], j[keep]
    return i, j


def _sort_vectors(vectors: np.ndarray) -> np.ndarray:
    """Order by norm, then lexicographically."""
    keys = [vectors[:, k] for k in range(vectors.shape[1] - 1, -1, -1)]
    keys.append(np.round(np.linalg.norm(vectors, axis=1), 9))
    return np.lexsort(keys)


def group_vectors(p: PointSet, i: np.ndarray, j: np.ndarray):
    """Group the differences x_j - x_i into classes.

    Returns ``(vectors, counts, label_diffs, inverse)``: one representative
    per class (sorted by norm), multiplicities, exact label differences when
    the sample carries labels (else ``None``) and the class index of every
    input pair.
    """
    raw = p.points[j] - p.points[i]
    if len(raw) == 0:
        return np.zeros((0, p.dim)), np.zeros(0, dtype=np.int64), None, np.zeros(0, dtype=np.int64)
    if p.labels is not None:
        ldiff = p.labels[j] - p.labels[i]
        uniq, first, inverse, counts = np.unique(ldiff, axis=0, return_index=True, return_inverse=True, return_counts=True)
        inverse = inverse.reshape(-1)
        vecs = uniq @ p.label_map.T if p.label_map is not None else raw[first]
    else:
        ids = cluster_ids(raw, p.eps_q())
        counts = np.bincount(ids)
        first = np.zeros(len(counts), dtype=np.int64)
        first[ids[::-1]] = np.arange(len(ids))[::-1]
        vecs = raw[first]
        uniq, inverse = None, ids
    order = _sort_vectors(vecs)
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    return vecs[order], counts[order], None if uniq is None else uniq[order], rank[inverse]


@dataclass(frozen=True, eq=False)
class DifferenceSet:
    vectors: np.ndarray
    multiplicities: np.ndarray
    cutoff: float
    labels: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.vectors)

    def multiplicity(self, z: Sequence[float], tol: float = 1e-9) -> int:
        hit = np.all(np.abs(self.vectors - np.asarray(z, dtype=float)) <= tol, axis=1)
        return int(self.multiplicities[hit].sum())


def difference_set(p: PointSet, s_max: float) -> DifferenceSet:
    """Multiset of differences x - y with |x - y| <= s_max over ordered pairs."""
    if not s_max > 0:
        raise ValueError("s_max must be positive")
    n = len(p)
    i, j = ordered_pairs(p, s_max)
    diag = np.arange(n)
    vecs, counts, labs, _ = group_vectors(p, np.concatenate([diag, i]), np.concatenate([diag, j]))
    return DifferenceSet(vecs, counts, float(s_max), labs)


def meyer_diagnostic(p: PointSet, s_max: float) -> float:
    """Smallest distance between distinct elements of the difference set."""
    if len(p) == 0:
        raise DegenerateSampleError("empty sample")
    ds = difference_set(p, s_max)
    if len(ds) < 2:
        return math.inf
    d, _ = cKDTree(ds.vectors).query(ds.vectors, k=2)
    return float(np.min(d[:, 1]))


# --------------------------------------------------- sequences <-> Delone sets


def _split_word(word) -> tuple[list, list]:
    if isinstance(word, str):
        if word.count("|") != 1:
            raise ValueError("word must mark the origin with exactly one '|'")
        left, right = word.split("|")
        return list(left), list(right)
    left, right = word
    return list(left), list(right)


def seq_to_delone(word, lengths: Mapping[str, float], exact_labels: bool = False) -> PointSet:
    """Tile the line with intervals of the given lengths.

    ``word`` is either a string with one ``'|'`` marking the origin (``"ab|ab"``)
    or a pair ``(left, right)``; ``left[-1]`` is the letter just left of the
    origin.  With ``exact_labels`` every point is labelled by its signed
    letter-count vector (alphabet in sorted order), which is exact only when
    the lengths are rationally independent.
    """
    left, right = _split_word(word)
    if not left and not right:
        raise ValueError("empty word")
    alphabet = sorted(lengths)
    for a in alphabet:
        la = lengths[a]
        if not (la > 0 and math.isfinite(la)):
            raise ValueError(f"length of {a!r} must be positive and finite")
    missing = set(left + right) - set(alphabet)
    if missing:
        raise ValueError(f"no length for symbols {sorted(missing)}")
    index = {a: k for k, a in enumerate(alphabet)}
    lvec = np.array([lengths[a] for a in alphabet], dtype=float)

    def counts(seq):
        c = np.zeros((len(seq), len(alphabet)), dtype=np.int64)
        if seq:
            c[np.arange(len(seq)), [index[a] for a in seq]] = 1
        return np.cumsum(c, axis=0)

    right_c = counts(right)
    left_c = -counts(left[::-1])
    labels = np.vstack([left_c[::-1], np.zeros((1, len(alphabet)), dtype=np.int64), right_c])
    right_x = np.cumsum([lengths[a] for a in right]) if right else np.zeros(0)
    left_x = -np.cumsum([lengths[a] for a in left[::-1]]) if left else np.zeros(0)
    pts = np.concatenate([left_x[::-1], [0.0], right_x])
    region = Region.box([pts[0]], [pts[-1]])
    meta = f"sequence of {len(left)}+{len(right)} letters, lengths {dict(lengths)}"
    if exact_labels:
        return PointSet(1, pts, region, labels, lvec.reshape(1, -1), meta)
    return PointSet(1, pts, region, meta=meta)


@dataclass(frozen=True)
class SymbolSequence:
    """Patch-class sequence of a 1D set; ``letters[origin]`` belongs to x = 0."""

    letters: list[int]
    origin: int
    alphabet: list  # representative Patch per letter
    positions: np.ndarray

    def gap_word(self) -> tuple[list[int], list[float]]:
        """Letter n = class of the gap x_{n+1} - x_n, read off the patch at x_n.

        Needs every patch to reach its right neighbour (true for r >= 2R).
        Gap letters are numbered by first appearance; returns the word and
        the gap length of each letter.
        """
        gaps = []
        for k in self.letters:
            off = self.alphabet[k].offsets[:, 0]
            pos = off[off > 0]
            if len(pos) == 0:
                raise ValueError("patch radius too small to see the right neighbour")
            gaps.append(pos.min())
        gaps = np.asarray(gaps)
        ids = cluster_ids(gaps.reshape(-1, 1), 1e-9 * max(1.0, float(gaps.max())))
        lengths = [float(gaps[np.flatnonzero(ids == j)[0]]) for j in range(int(ids.max()) + 1)]
        return ids.tolist(), lengths


def delone_to_seq(p: PointSet, r_class: float) -> SymbolSequence:
    """Encode a 1D sample as the sequence of classes of (Lambda - x_n) & B_r.

    Only points whose r-ball lies inside the region are encoded; the letters
    are numbered in order of first appearance from the left.
    """
    from .patches import patch_keys

    if p.dim != 1:
        raise ValueError("delone_to_seq needs a 1-dimensional sample")
    order = np.argsort(p.points[:, 0], kind="stable")
    zero = np.flatnonzero(np.abs(p.points[order, 0]) <= p.eps_q())
    if len(zero) == 0:
        raise ValueError("origin required")
    inner = set(p.interior(r_class).tolist())
    idx = np.array([k for k in order if k in inner], dtype=np.int64)
    if order[zero[0]] not in inner:
        raise ValueError("origin too close to the region boundary for r_class")
    keys, patches = patch_keys(p, idx, r_class)
    letter_of: dict = {}
    alphabet = []
    letters = []
    for key, patch in zip(keys, patches):
        if key not in letter_of:
            letter_of[key] = len(alphabet)
            alphabet.append(patch)
        letters.append(letter_of[key])
    origin = int(np.flatnonzero(idx == order[zero[0]])[0])
    return SymbolSequence(letters, origin, alphabet, p.points[idx, 0].copy())


# ------------------------------------------------------------- generators


def fibonacci_word(n: int) -> str:
    """Prefix of length n of the fixed point of a -> ab, b -> a."""
    w = "a"
    while len(w) < n:
        w = "".join("ab" if c == "a" else "a" for c in w)
    return w[:n]


def random_tiling(
    half_letters: int,
    seed: int,
    lengths: Mapping[str, float] | None = None,
    p_first: float = 0.5,
) -> PointSet:
    """Seeded i.i.d. two-length tiling with exact count labels.

    Default lengths are 1 and sqrt(2); labels are exact because these are
    rationally independent.
    """
    lengths = dict(lengths or {"a": 1.0, "b": math.sqrt(2.0)})
    alphabet = sorted(lengths)
    rng = np.random.default_rng(seed)
    probs = [p_first] + [(1 - p_first) / (len(alphabet) - 1)] * (len(alphabet) - 1)
    draw = rng.choice(len(alphabet), size=2 * half_letters, p=probs)
    letters = [alphabet[k] for k in draw]
    ps = seq_to_delone((letters[:half_letters], letters[half_letters:]), lengths, exact_labels=True)
    r = min(-ps.region.lo[0], ps.region.hi[0])
    out = ps.restrict(r)
    return PointSet(1, out.points, out.region, out.labels, out.label_map, f"random tiling seed={seed} lengths={lengths}")

