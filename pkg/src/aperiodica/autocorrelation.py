"""Finite-volume autocorrelation combs and their coefficients c_z."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .conventions import ball_volume
from .cps import CutProjectScheme, star_map
from .pointset import PointSet, group_vectors, ordered_pairs

ESTIMATORS = ("anchored", "pairs-in-ball")


@dataclass(frozen=True, eq=False)
class WeightedComb:
    """sum_z w_z delta_z, support sorted by |z|.

    ``pairs-in-ball`` counts pairs with both ends in B_n (the approximant
    gamma^n); ``anchored`` counts x in B_n with x + z anywhere in the sample.
    """

    support: np.ndarray
    weights: np.ndarray
    normalization_volume: float
    estimator: str
    n: float
    s_max: float
    labels: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.support)

    def weight_at(self, z, tol: float = 1e-9) -> float:
        hit = np.all(np.abs(self.support - np.asarray(z, dtype=float)) <= tol, axis=1)
        return float(self.weights[hit].sum())

    def weight_at_label(self, label) -> float:
        if self.labels is None:
            raise ValueError("comb carries no labels")
        hit = np.all(self.labels == np.asarray(label), axis=1)
        return float(self.weights[hit].sum())


def _check_estimator(estimator: str) -> None:
    if estimator not in ESTIMATORS:
        raise ValueError(f"unknown estimator {estimator!r}; use one of {ESTIMATORS}")


def _needed_radius(n: float, s_max: float, estimator: str) -> float:
    return n + s_max if estimator == "anchored" else n


def autocorr(p: PointSet, n: float, s_max: float, estimator: str = "anchored") -> WeightedComb:
    _check_estimator(estimator)
    if not (n > 0 and s_max >= 0):
        raise ValueError("need n > 0 and s_max >= 0")
    if _needed_radius(n, s_max, estimator) > p.region.inner_radius * (1 + 1e-12):
        raise ValueError("region too small")
    inside = np.flatnonzero(p.norms <= n)
    i, j = ordered_pairs(p, s_max, sources=inside)
    if estimator == "pairs-in-ball":
        keep = p.norms[j] <= n
        i, j = i[keep], j[keep]
    i = np.concatenate([inside, i])
    j = np.concatenate([inside, j])
    vecs, counts, labs, _ = group_vectors(p, i, j)
    vol = ball_volume(n, p.dim)
    return WeightedComb(vecs, counts / vol, vol, estimator, float(n), float(s_max), labs)


def coefficient(p: PointSet, n: float, z, estimator: str = "anchored") -> float:
    """(1/|B_n|) #{x in B_n : x + z in sample} (both ends in B_n for pairs-in-ball)."""
    _check_estimator(estimator)
    z = np.asarray(z, dtype=float).reshape(p.dim)
    if _needed_radius(n, float(np.linalg.norm(z)), estimator) > p.region.inner_radius * (1 + 1e-12):
        raise ValueError("region too small")
    src = p.points[p.norms <= n]
    if len(src) == 0:
        return 0.0
    tol = 10 * p.eps_q()
    d, idx = p.tree.query(src + z, distance_upper_bound=tol)
    hit = np.isfinite(d)
    if estimator == "pairs-in-ball":
        hit[hit] = p.norms[idx[hit]] <= n
    return float(np.count_nonzero(hit)) / ball_volume(n, p.dim)


def autocorr_convergence(p: PointSet, n_list: Sequence[float], z, estimator: str = "anchored") -> list[tuple[float, float]]:
    return [(float(n), coefficient(p, n, z, estimator)) for n in n_list]


def overlap_oracle(cps: CutProjectScheme, z_label) -> float:
    """vol(W & (W - z*)) / covol: the limiting c_z of the regular model set."""
    _, zs = star_map(cps, z_label)
    return float(cps.window.overlap(zs)) / cps.covolume
