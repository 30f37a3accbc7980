"""Bragg amplitudes, peak scans, model-set intensities and the consistency identity.

Every finite amplitude is evaluated by :func:`_amplitudes`: points are sorted by
norm, ``cos`` and ``sin`` of the phases are accumulated by a running sum down
that order, and the sum at radius ``s`` is read off at the last point with
``|x| <= s``.  Each candidate sees the same sequence of floating-point
operations, so the amplitude at ``-xi`` is bit-for-bit the conjugate of the
one at ``xi``.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .autocorrelation import WeightedComb
from .conventions import ball_volume
from .cps import CutProjectScheme, FourierModule, fourier_module
from .pointset import PointSet
from .windows import window_fourier

_CHUNK_ENTRIES = 2_000_000


def default_threads() -> int:
    env = os.environ.get("APERIODICA_THREADS")
    return max(1, int(env)) if env else 1


class _SortedSample:
    def __init__(self, p: PointSet):
        r = p.norms
        order = np.argsort(r, kind="stable")
        self.points = p.points[order]
        self.norms = r[order]
        self.dim = p.dim
        self.region_radius = p.region.inner_radius

    def counts(self, s_list: np.ndarray) -> np.ndarray:
        return np.searchsorted(self.norms, s_list * (1 + 1e-14), side="right")


def _amplitudes(sample: _SortedSample, xis: np.ndarray, s_list: np.ndarray) -> np.ndarray:
    """Complex c_s(xi), shape (len(s_list), len(xis))."""
    counts = sample.counts(s_list)
    top = int(counts.max()) if len(counts) else 0
    vols = np.array([ball_volume(s, sample.dim) for s in s_list])
    out = np.zeros((len(s_list), len(xis)), dtype=complex)
    if top == 0 or len(xis) == 0:
        return out
    pts = sample.points[:top]
    chunk = max(1, _CHUNK_ENTRIES // top)
    rows = counts - 1
    has = counts > 0
    for a in range(0, len(xis), chunk):
        # elementwise phases and sin/cos of |phase| keep c(-xi) = conj c(xi)
        # bit for bit; BLAS products and SIMD sin need not be odd
        blk = xis[a : a + chunk]
        ph = pts[:, 0, None] * blk[None, :, 0]
        for k in range(1, sample.dim):
            ph = ph + pts[:, k, None] * blk[None, :, k]
        mag = np.abs(ph)
        cs = np.cumsum(np.cos(mag), axis=0)
        sm = np.sin(mag)
        sn = np.cumsum(np.where(ph < 0, -sm, sm), axis=0)
        re = np.where(has[:, None], cs[np.maximum(rows, 0)], 0.0)
        im = np.where(has[:, None], sn[np.maximum(rows, 0)], 0.0)
        out[:, a : a + chunk] = (re - 1j * im) / vols[:, None]
    return out


@dataclass(frozen=True)
class BTAmplitude:
    xi: np.ndarray
    s: float
    value: complex
    n_points: int

    @property
    def intensity(self) -> float:
        return abs(self.value) ** 2


def _as_xis(xi, dim: int) -> np.ndarray:
    a = np.asarray(xi, dtype=float)
    if a.size == 0:
        return np.zeros((0, dim))
    return a.reshape(-1, dim)


def bt_amplitude(p: PointSet, xi, s: float) -> BTAmplitude:
    """c_s(xi) = |B_s|^-1 sum_{x in B_s} exp(-i xi.x)."""
    if s > p.region.inner_radius * (1 + 1e-12):
        raise ValueError("s exceeds the sampling region")
    sample = _SortedSample(p)
    x = _as_xis(xi, p.dim)
    v = _amplitudes(sample, x, np.array([float(s)]))[0, 0]
    return BTAmplitude(x[0].copy(), float(s), complex(v), int(sample.counts(np.array([float(s)]))[0]))


@dataclass(frozen=True, eq=False)
class PeakEntry:
    xi: np.ndarray
    intensity_bt: float
    intensity_closed: float | None = None
    q_label: np.ndarray | None = None
    history: np.ndarray | None = None  # |c_s|^2 for every s in the scan


@dataclass(frozen=True, eq=False)
class PeakList:
    entries: list
    s_used: float
    s_list: np.ndarray
    cutoffs: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def xis(self) -> np.ndarray:
        if not self.entries:
            return np.zeros((0, 0))
        return np.array([e.xi for e in self.entries])

    @property
    def intensities(self) -> np.ndarray:
        return np.array([e.intensity_bt for e in self.entries])

    def top(self, count: int, by: str = "intensity_bt") -> "PeakList":
        key = (lambda e: e.intensity_bt) if by == "intensity_bt" else (lambda e: e.intensity_closed or 0.0)
        keep = sorted(self.entries, key=key, reverse=True)[:count]
        keep = sorted(keep, key=lambda e: _xi_sort_key(e.xi))
        return PeakList(keep, self.s_used, self.s_list, dict(self.cutoffs))

    def find(self, xi, tol: float = 1e-9):
        xi = np.asarray(xi, dtype=float)
        for e in self.entries:
            if np.all(np.abs(e.xi - xi) <= tol):
                return e
        return None


def _xi_sort_key(xi: np.ndarray):
    return (round(float(np.linalg.norm(xi)), 10), tuple(np.round(xi, 10)))


def peak_scan(
    p: PointSet,
    candidates,
    s_list: Sequence[float],
    *,
    closed: Sequence[float] | None = None,
    q_labels: np.ndarray | None = None,
    threads: int | None = None,
    cesaro: bool = False,
    cutoffs: dict | None = None,
) -> PeakList:
    """|c_s(xi)|^2 for every candidate and every s in ``s_list``.

    ``intensity_bt`` is the value at the largest s, or with ``cesaro`` the
    mean over the second half of the s sequence.  Candidates are split into
    chunks evaluated on ``threads`` worker threads.
    """
    s_arr = np.sort(np.asarray(s_list, dtype=float))
    if len(s_arr) == 0:
        raise ValueError("s_list is empty")
    if s_arr[-1] > p.region.inner_radius * (1 + 1e-12):
        raise ValueError("s exceeds the sampling region")
    xis = _as_xis(candidates, p.dim)
    cut = dict(cutoffs or {})
    if len(xis) == 0:
        return PeakList([], float(s_arr[-1]), s_arr, cut)
    sample = _SortedSample(p)
    threads = threads or default_threads()
    if threads > 1 and len(xis) > threads:
        parts = np.array_split(np.arange(len(xis)), threads)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            blocks = list(pool.map(lambda ix: _amplitudes(sample, xis[ix], s_arr), parts))
        amp = np.concatenate(blocks, axis=1)
    else:
        amp = _amplitudes(sample, xis, s_arr)
    hist = np.abs(amp) ** 2
    if cesaro:
        final = hist[len(s_arr) // 2 :].mean(axis=0)
    else:
        final = hist[-1]
    entries = []
    for j in range(len(xis)):
        entries.append(PeakEntry(
            xis[j].copy(),
            float(final[j]),
            None if closed is None else float(closed[j]),
            None if q_labels is None else np.asarray(q_labels[j]).copy(),
            hist[:, j].copy(),
        ))
    entries.sort(key=lambda e: _xi_sort_key(e.xi))
    return PeakList(entries, float(s_arr[-1]), s_arr, cut)


def grid_candidates(lo: Sequence[float], hi: Sequence[float], step: float) -> np.ndarray:
    """Uniform grid including both ends; the step is the position uncertainty."""
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    axes = [a + step * np.arange(int(math.floor((b - a) / step + 1e-9)) + 1) for a, b in zip(lo, hi)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def refine_peak(p: PointSet, xi0: float, step: float, s: float) -> tuple[float, float]:
    """Maximize |c_s|^2 on [xi0 - step, xi0 + step] (1D only)."""
    if p.dim != 1:
        raise ValueError("peak refinement is implemented for 1D samples")
    sample = _SortedSample(p)
    s_arr = np.array([float(s)])

    def neg(x):
        return -abs(_amplitudes(sample, np.array([[x]]), s_arr)[0, 0]) ** 2

    res = minimize_scalar(neg, bounds=(xi0 - step, xi0 + step), method="bounded", options={"xatol": 1e-10})
    return float(res.x), float(-res.fun)


def model_set_intensity(cps: CutProjectScheme, q) -> float:
    """A_k = |int_W exp(i k*.y) dy|^2 / covol^2 for the dual element labelled q."""
    kk = cps.dual_basis @ np.asarray(q, dtype=float)
    val = window_fourier(cps.window, kk[cps.phys_dim :])
    return float(abs(complex(val)) ** 2) / cps.covolume**2


def module_intensities(cps: CutProjectScheme, module: FourierModule) -> np.ndarray:
    if len(module) == 0:
        return np.zeros(0)
    vals = np.asarray(cps.window.fourier(module.k_star))
    return np.abs(vals) ** 2 / cps.covolume**2


def module_scan(
    p: PointSet,
    cps: CutProjectScheme,
    k_phys_max: float,
    k_int_max: float,
    s_list: Sequence[float],
    threads: int | None = None,
    cesaro: bool = False,
) -> PeakList:
    """Peak scan over the Fourier module with closed-form intensities attached."""
    mod = fourier_module(cps, k_phys_max, k_int_max)
    cut = {"kmax": float(k_phys_max), "kintmax": float(k_int_max), "tail_bound": mod.tail_bound}
    return peak_scan(p, mod.k, s_list, closed=module_intensities(cps, mod), q_labels=mod.q,
                     threads=threads, cesaro=cesaro, cutoffs=cut)


# ---------------------------------------------------------------- kernels


def _m4(x: np.ndarray) -> np.ndarray:
    """Centered cubic B-spline on [-2, 2]."""
    a = np.abs(x)
    return np.where(a <= 1, 2 / 3 - a**2 + a**3 / 2, np.where(a <= 2, (2 - a) ** 3 / 6, 0.0))


def _sinc(x: np.ndarray) -> np.ndarray:
    return np.sinc(x / np.pi)


@dataclass(frozen=True)
class SmoothingKernel:
    """Normalized, even, compactly supported kernel on [-width, width]^dim.

    In dimension > 1 the kernel is the product of 1D kernels, so transforms
    and autoconvolutions factor.
    """

    shape: str
    width: float
    dim: int = 1

    def __post_init__(self):
        if self.shape not in ("triangular", "raised-cosine"):
            raise ValueError(f"unknown kernel shape {self.shape!r}")
        if not self.width > 0:
            raise ValueError("kernel width must be positive")

    @property
    def support_radius(self) -> float:
        """Radius of a ball containing the support of phi * phi~."""
        return 2 * self.width * math.sqrt(self.dim)

    def _cols(self, t) -> np.ndarray:
        return np.asarray(t, dtype=float).reshape(-1, self.dim)

    def _value1(self, t):
        w = self.width
        a = np.abs(t)
        if self.shape == "triangular":
            return np.maximum(1 - a / w, 0.0) / w
        return np.where(a <= w, (1 + np.cos(np.pi * t / w)) / (2 * w), 0.0)

    def _ft1(self, xi):
        w = self.width
        if self.shape == "triangular":
            return _sinc(xi * w / 2) ** 2
        x = np.abs(xi) * w
        d = x - np.pi
        near = np.abs(d) < 1e-3
        with np.errstate(divide="ignore", invalid="ignore"):
            far = np.pi**2 * _sinc(x) / (np.pi**2 - x**2)
            # x = pi + d: the removable singularity cancels exactly
            close = np.pi**2 * _sinc(d) / ((np.pi + d) * (2 * np.pi + d))
        out = np.where(near, close, far)
        return out

    def _auto1(self, z):
        w = self.width
        if self.shape == "triangular":
            return _m4(z / w) / w
        a = np.abs(z)
        c, s = np.cos(np.pi * a / w), np.sin(np.pi * a / w)
        g = (2 * np.pi * w * (c + 2) + 3 * w * s - np.pi * a * (c + 2)) / (8 * np.pi * w**2)
        return np.where(a <= 2 * w, g, 0.0)

    def value(self, t) -> np.ndarray:
        return np.prod(self._value1(self._cols(t)), axis=1)

    def ft(self, xi) -> np.ndarray:
        """int phi(t) exp(-i xi.t) dt (real because phi is even)."""
        return np.prod(self._ft1(self._cols(xi)), axis=1)

    def autoconv(self, z) -> np.ndarray:
        """(phi * phi~)(z); phi~ = phi since phi is even."""
        return np.prod(self._auto1(self._cols(z)), axis=1)

    def ft_envelope(self, r: float) -> float:
        """Upper bound for |ft| over all xi with |xi|_inf >= r."""
        x = r * self.width
        if x <= 0:
            return 1.0
        if self.shape == "triangular":
            return min(1.0, (2 / x) ** 2)
        if x <= 2 * np.pi:
            return 1.0
        return float(np.pi**2 / (x * (x**2 - np.pi**2)))

    def cutoff(self, rel: float = 1e-6) -> float:
        """Smallest r with ft_envelope(r)^2 <= rel (ft(0) = 1 is the maximum)."""
        hi = 1.0 / self.width
        while self.ft_envelope(hi) ** 2 > rel:
            hi *= 2
        return float(brentq(lambda r: self.ft_envelope(r) ** 2 - rel, hi / 2 if hi > 1 / self.width else 1e-12, hi))


@dataclass(frozen=True)
class Consistency:
    lhs: float
    rhs: float
    rel_error: float


def pure_point_consistency(p: PointSet, peaks: PeakList, kernel: SmoothingKernel, comb: WeightedComb) -> Consistency:
    """Compare sum_z c_z (phi*phi~)(z) with sum_xi I(xi) |ft(xi)|^2.

    Equality for every admissible kernel is the finite shadow of pure point
    diffraction; a continuous component shows up as rhs < lhs.
    """
    if kernel.dim != p.dim:
        raise ValueError("kernel dimension differs from the sample")
    if len(p) >= 2:
        d, _ = p.tree.query(p.points, k=2)
        packing = float(d[:, 1].min()) / 2
        if not kernel.width < packing:
            raise ValueError("kernel width must be below the packing radius")
    if comb.s_max < kernel.support_radius:
        raise ValueError("comb cutoff shorter than the kernel autoconvolution support")
    need = kernel.cutoff(1e-6)
    have = float(np.max(np.abs(peaks.xis))) if len(peaks) else 0.0
    if have < need * (1 - 1e-9):
        raise ValueError(f"peaks reach |xi| = {have:.4g}; kernel transform needs {need:.4g}")
    near = np.linalg.norm(comb.support, axis=1) <= kernel.support_radius
    lhs = float(np.sum(comb.weights[near] * kernel.autoconv(comb.support[near])))
    if not lhs > 0:
        raise ValueError("degenerate kernel/comb")
    rhs = float(np.sum(peaks.intensities * kernel.ft(peaks.xis) ** 2))
    return Consistency(lhs, rhs, abs(lhs - rhs) / lhs)


def symmetry_check(
    peaks: PeakList,
    v,
    p: PointSet | None = None,
    tol: float = 1e-9,
    remeasure: str = "missing",
) -> float:
    """max |I(xi) - I(V xi)| over the peak list.

    I(V xi) comes from the list when V xi is listed (within ``tol``) and is
    otherwise measured on ``p`` at the scan's s.  ``remeasure="all"``
    measures both sides on ``p``.
    """
    v = np.atleast_2d(np.asarray(v, dtype=float))
    if v.shape[0] != v.shape[1] or not np.allclose(v.T @ v, np.eye(len(v)), rtol=0, atol=1e-10):
        raise ValueError("V is not orthogonal")
    if remeasure not in ("missing", "all"):
        raise ValueError("remeasure must be 'missing' or 'all'")
    if len(peaks) == 0:
        return 0.0
    xis = peaks.xis
    if xis.shape[1] != len(v):
        raise ValueError("V dimension differs from the peaks")
    images = xis @ v.T
    base = peaks.intensities.copy()
    other = np.full(len(xis), np.nan)
    if remeasure == "missing":
        from scipy.spatial import cKDTree

        dist, idx = cKDTree(xis).query(images, distance_upper_bound=tol)
        found = np.isfinite(dist)
        other[found] = base[idx[found]]
    todo = np.flatnonzero(np.isnan(other))
    if len(todo) or remeasure == "all":
        if p is None:
            raise ValueError("some V xi are not listed; pass the sample to re-measure them")
        sample = _SortedSample(p)
        s = np.array([peaks.s_used])
        if remeasure == "all":
            base = np.abs(_amplitudes(sample, xis, s)[0]) ** 2
        other[todo] = np.abs(_amplitudes(sample, images[todo], s)[0]) ** 2
    return float(np.max(np.abs(base - other)))


def closure_violations(peaks: PeakList, threshold: float, tol: float = 1e-6) -> list[tuple[int, int]]:
    """Pairs of detected peaks whose sum lies inside the scanned range but off every candidate.

    Only reported; detected peaks are those with intensity_bt >= threshold.
    """
    xis = peaks.xis
    if len(xis) == 0:
        return []
    from scipy.spatial import cKDTree

    det = np.flatnonzero(peaks.intensities >= threshold)
    reach = np.max(np.linalg.norm(xis, axis=1))
    tree = cKDTree(xis)
    bad = []
    for a in det:
        for b in det[det >= a]:
            s = xis[a] + xis[b]
            if np.linalg.norm(s) <= reach and not np.isfinite(tree.query(s, distance_upper_bound=tol)[0]):
                bad.append((int(a), int(b)))
    return bad
