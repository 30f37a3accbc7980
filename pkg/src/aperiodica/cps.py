"""Cut-and-project schemes with internal space R^m.

The lattice is spanned by the columns of the basis matrix ``B``; its first
``phys_dim`` rows are physical components, the rest internal.  Conventions
for the dual lattice and the covolume normalization are in
:mod:`aperiodica.conventions`.
"""

from __future__ import annotations

import itertools
import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial import ConvexHull

from ._lattice import cylinder_points
from .conventions import TAU, TAU_CONJ
from .pointset import PointSet, Region
from .windows import Interval, Polygon, Window, window_from_json


class SchemeError(ValueError):
    pass


class DensityWarning(UserWarning):
    pass


class RegularityWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class CutProjectScheme:
    phys_dim: int
    int_dim: int
    basis: np.ndarray
    window: Window
    covolume: float
    name: str = ""

    @property
    def total_dim(self) -> int:
        return self.phys_dim + self.int_dim

    @property
    def inverse(self) -> np.ndarray:
        return np.linalg.inv(self.basis)

    @property
    def dual_basis(self) -> np.ndarray:
        return 2 * np.pi * np.linalg.inv(self.basis).T

    @property
    def density(self) -> float:
        return self.window.volume / self.covolume

    def with_window(self, window: Window) -> "CutProjectScheme":
        return CutProjectScheme(self.phys_dim, self.int_dim, self.basis, window, self.covolume, self.name)

    def to_json(self) -> dict:
        return {
            "phys_dim": self.phys_dim,
            "int_dim": self.int_dim,
            "basis": self.basis.tolist(),
            "window": self.window.to_json(),
        }


def _scan_vectors(d: int, q_check: int) -> np.ndarray:
    r = max(1, int((q_check ** (1.0 / d) - 1) // 2))
    rng = range(-r, r + 1)
    return np.array(list(itertools.product(rng, repeat=d)), dtype=np.int64)


def cps_new(
    basis,
    window: Window,
    check_bounds: tuple[int, float, float | None] = (10_000, 1e-9, None),
    name: str = "",
) -> CutProjectScheme:
    """Validate a scheme and cache its covolume.

    ``check_bounds = (Q_check, eps_inj, delta_dense)``: about ``Q_check``
    lattice vectors (a cube of integer vectors) are scanned.  Injectivity
    fails when a nonzero scanned vector has physical norm below ``eps_inj``
    and internal part in the bounding box of W - W, i.e. when it could
    identify two points of the model set.  Density is only warned about: the
    window bounding box is cut into cells of side ``delta_dense`` (default a
    quarter of its largest extent) and every cell must receive an internal
    projection.
    """
    B = np.array(basis, dtype=float)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise SchemeError("basis must be a square matrix")
    m = window.dim
    d = B.shape[0]
    n = d - m
    if n < 1:
        raise SchemeError("basis too small for the window's internal dimension")
    det = abs(np.linalg.det(B))
    if not det > 1e-12 * np.prod(np.linalg.norm(B, axis=0)):
        raise SchemeError("singular basis")

    q_check, eps_inj, delta = check_bounds
    qs = _scan_vectors(d, q_check)
    v = qs @ B.T
    lo, hi = window.bbox()
    width = hi - lo
    near = np.linalg.norm(v[:, :n], axis=1) < eps_inj
    in_diff = np.all(np.abs(v[:, n:]) <= width + 1e-12, axis=1)
    bad = np.flatnonzero(near & in_diff & np.any(qs != 0, axis=1))
    if len(bad):
        raise SchemeError(f"projection not injective: q={qs[bad[0]].tolist()} projects to 0")

    delta = float(np.max(width)) / 4 if delta is None else delta
    cells = np.maximum(np.ceil(width / delta).astype(int), 1)
    inside = np.all((v[:, n:] >= lo) & (v[:, n:] <= hi), axis=1)
    idx = np.minimum(((v[inside, n:] - lo) / delta).astype(int), cells - 1)
    hit = len({tuple(r) for r in idx.tolist()})
    if hit < int(np.prod(cells)):
        warnings.warn(
            f"internal projections hit {hit}/{int(np.prod(cells))} window cells: not dense",
            DensityWarning,
            stacklevel=2,
        )
    if not window.regular:
        warnings.warn("window not flagged regular; diffraction claims do not apply", RegularityWarning, stacklevel=2)
    return CutProjectScheme(n, m, B, window, float(det), name)


def star_map(cps: CutProjectScheme, q) -> tuple[np.ndarray, np.ndarray]:
    """Physical and internal parts of the lattice vector B q."""
    v = cps.basis @ np.asarray(q, dtype=float)
    return v[: cps.phys_dim], v[cps.phys_dim :]


def model_set_points(
    cps: CutProjectScheme,
    region_radius: float,
    shift=None,
    internal_shift=None,
) -> PointSet:
    """Points of ``t + {x in L : x* + h in W}`` inside the centered ball.

    ``shift`` is t and ``internal_shift`` is h (both default to zero).  The
    output carries the integer lattice coordinates of every point.
    """
    if not region_radius > 0:
        raise ValueError("region_radius must be positive")
    n, m = cps.phys_dim, cps.int_dim
    t = np.zeros(n) if shift is None else np.asarray(shift, dtype=float).reshape(n)
    h = np.zeros(m) if internal_shift is None else np.asarray(internal_shift, dtype=float).reshape(m)
    c, rho = cps.window.enclosing_ball()
    q = cylinder_points(cps.basis, n, region_radius, c - h, rho, phys_center=-t)
    v = q @ cps.basis.T if len(q) else np.zeros((0, n + m))
    x = v[:, :n] + t
    keep = cps.window.contains(v[:, n:] + h) & (np.linalg.norm(x, axis=1) <= region_radius)
    q, x = q[keep], x[keep]
    if n == 1:
        order = np.argsort(x[:, 0], kind="stable")
    else:
        order = np.lexsort([x[:, k] for k in range(n - 1, -1, -1)] + [np.round(np.linalg.norm(x, axis=1), 9)])
    if len(q) == 0:
        warnings.warn("window misses the projected lattice in this region", stacklevel=2)
    meta = f"model set {cps.name or 'custom'} radius={region_radius!r} t={t.tolist()} h={h.tolist()}"
    return PointSet(n, x[order], Region.ball(region_radius), q[order], cps.basis[:n], meta)


@dataclass(frozen=True, eq=False)
class FourierModule:
    """Dual-lattice elements (q, k, k*) with (k, k*) = dual_basis @ q, sorted by |k|."""

    dual_basis: np.ndarray
    q: np.ndarray
    k: np.ndarray
    k_star: np.ndarray
    k_phys_max: float
    k_int_max: float
    tail_bound: float

    def __len__(self) -> int:
        return len(self.q)


def fourier_module(cps: CutProjectScheme, k_phys_max: float, k_int_max: float) -> FourierModule:
    if not (k_phys_max > 0 and k_int_max > 0):
        raise ValueError("cutoffs must be positive")
    n = cps.phys_dim
    D = cps.dual_basis
    q = cylinder_points(D, n, k_phys_max, np.zeros(cps.int_dim), k_int_max)
    kk = q @ D.T if len(q) else np.zeros((0, cps.total_dim))
    k, ks = kk[:, :n], kk[:, n:]
    keys = [q[:, j] for j in range(q.shape[1] - 1, -1, -1)]
    keys += [k[:, j] for j in range(n - 1, -1, -1)]
    keys.append(np.round(np.linalg.norm(k, axis=1), 10))
    order = np.lexsort(keys) if len(q) else np.zeros(0, dtype=int)
    return FourierModule(D, q[order], k[order], ks[order], float(k_phys_max), float(k_int_max),
                         cps.window.tail_bound(k_int_max))


def _octagon_window() -> Polygon:
    ang = 3 * np.pi / 4 * np.arange(4)
    gens = np.column_stack([np.cos(ang), np.sin(ang)])
    corners = np.array([s @ gens / 2 for s in itertools.product((-1, 1), repeat=4)])
    hull = ConvexHull(corners)
    return Polygon(corners[hull.vertices], regular=True)  # scipy orders 2D hulls counterclockwise


def builtin(name: str) -> CutProjectScheme:
    """Canonical schemes: ``"fibonacci"`` (gaps 1 and tau) and ``"octagonal"``.

    Fibonacci: lattice spanned by (1, 1) and (tau, tau'), window [-1, tau - 1).
    Octagonal (Ammann-Beenker vertices): Z^4 with physical star
    e_j = (cos j pi/4, sin j pi/4), internal star e_j* = (cos 3j pi/4,
    sin 3j pi/4) and the regular octagon of unit edge as window.
    """
    if name == "fibonacci":
        B = np.array([[1.0, TAU], [1.0, TAU_CONJ]])
        return cps_new(B, Interval(-1.0, -TAU_CONJ, regular=True), name="fibonacci")
    if name == "octagonal":
        j = np.arange(4)
        B = np.vstack([np.cos(j * np.pi / 4), np.sin(j * np.pi / 4), np.cos(3 * j * np.pi / 4), np.sin(3 * j * np.pi / 4)])
        B[np.abs(B) < 1e-15] = 0.0
        return cps_new(B, _octagon_window(), name="octagonal")
    raise SchemeError(f"unknown builtin scheme {name!r}")


def scheme_from_json(obj: dict, **kwargs) -> CutProjectScheme:
    try:
        n, m = int(obj["phys_dim"]), int(obj["int_dim"])
        basis = np.asarray(obj["basis"], dtype=float)
        window = window_from_json(obj["window"], m)
    except (KeyError, TypeError) as exc:
        raise SchemeError(f"malformed scheme config: {exc}") from exc
    if basis.shape != (n + m, n + m) or window.dim != m:
        raise SchemeError("basis/window dimensions disagree with phys_dim/int_dim")
    return cps_new(basis, window, **kwargs)


def load_scheme(path: str | Path) -> CutProjectScheme:
    with open(path) as fh:
        return scheme_from_json(json.load(fh), name=Path(path).stem)


def octagonal_rotation_labels(q: np.ndarray) -> np.ndarray:
    """Label action of the rotation by pi/4 on the octagonal lattice: e_j -> e_{j+1}, e_3 -> -e_0."""
    q = np.asarray(q)
    return np.column_stack([-q[:, 3], q[:, 0], q[:, 1], q[:, 2]])


__all__ = [
    "CutProjectScheme", "FourierModule", "SchemeError", "DensityWarning", "RegularityWarning",
    "cps_new", "star_map", "model_set_points", "fourier_module", "builtin",
    "scheme_from_json", "load_scheme", "octagonal_rotation_labels",
]
