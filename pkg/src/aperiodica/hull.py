"""Hull metric, the torus factor of a cut-and-project scheme and Wiener/Wintner averages.

The torus T = R^{N+m} / L~ is represented in lattice coordinates v in
[0, 1)^{N+m}; a point (t, h) of R^N x R^m has coordinates B^-1 (t, h).  The
physical action is v -> v + B^-1 (t, 0) mod 1.  For the character
e_q(v) = exp(2 pi i q.v) and the character cocycle exp(i xi.t),

    U_t e_q (v) = exp(i xi.t) e_q(v - B^-1 (t, 0)) = e_q(v) exp(i theta_q.t),
    theta_q = xi - 2 pi (B^-T q)_phys,

so the average over B_n of a single term is e_q(v) times the ball average of
a plane wave of frequency theta_q.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import j1

from .cps import CutProjectScheme
from .pointset import PointSet

HULL_CAP = 1.0 / math.sqrt(2.0)
RESONANCE_TOL = 1e-10


# ------------------------------------------------------------------ metric


def _near_ok(tree_a: cKDTree, pts_a: np.ndarray, tree_b: cKDTree, sa: np.ndarray, sb: np.ndarray,
             radius: float, tol: float, k: int) -> np.ndarray:
    """Row-wise: do the k points of A nearest to sa reappear in B around sb?"""
    k = min(k, len(pts_a))
    _, idx = tree_a.query(sa, k=k)
    idx = idx.reshape(len(sa), k)
    rel = pts_a[idx] - sa[:, None, :]
    inside = np.linalg.norm(rel, axis=2) <= radius - tol
    d, _ = tree_b.query((rel + sb[:, None, :]).reshape(-1, sa.shape[1]), distance_upper_bound=tol)
    hit = np.isfinite(d).reshape(len(sa), k)
    return np.all(hit | ~inside, axis=1)


def _agree(t1: cKDTree, a1: np.ndarray, t2: cKDTree, a2: np.ndarray, x, y, radius: float, tol: float) -> bool:
    """(A1 - x) & B_r == (A2 - y) & B_r up to tol.

    A point only counts as a mismatch when it lies at least ``tol`` inside the
    ball, so points on the sphere cannot break agreement by rounding.
    """
    inner = radius - tol
    for tree_a, pts_a, tree_b, sa, sb in ((t1, a1, t2, x, y), (t2, a2, t1, y, x)):
        pts = pts_a[np.asarray(tree_a.query_ball_point(sa, radius), dtype=np.int64)]
        rel = pts - sa
        rel = rel[np.linalg.norm(rel, axis=1) <= inner]
        if len(rel) == 0:
            continue
        d, _ = tree_b.query(rel + sb, distance_upper_bound=tol)
        if not np.all(np.isfinite(d)):
            return False
    return True


def _ball_grid(eps: float, dim: int) -> np.ndarray:
    step = eps / 50
    axis = step * np.arange(-50, 51)
    g = np.stack(np.meshgrid(*([axis] * dim), indexing="ij"), axis=-1).reshape(-1, dim)
    g = g[np.linalg.norm(g, axis=1) <= eps * (1 + 1e-12)]
    return g[np.argsort(np.linalg.norm(g, axis=1), kind="stable")]


def _close_at(p1: PointSet, p2: PointSet, eps: float, tol: float) -> bool:
    """Is there x, y in B_eps (on the eps/50 grid) with agreement on B_{1/eps}?"""
    n1, n2 = p1.norms, p2.norms
    r0 = max(float(n1.min()), float(n2.min())) + 2 * eps
    a = p1.points[n1 <= r0]
    b = p2.points[n2 <= r0]
    deltas = (b[None, :, :] - a[:, None, :]).reshape(-1, p1.dim)
    deltas = deltas[np.linalg.norm(deltas, axis=1) <= 2 * eps * (1 + 1e-12)]
    deltas = np.vstack([np.zeros((1, p1.dim)), deltas])
    deltas = deltas[np.argsort(np.linalg.norm(deltas, axis=1), kind="stable")]
    grid = _ball_grid(eps, p1.dim)
    radius = 1.0 / eps
    slack = eps * (1 + 1e-12)
    for delta in deltas:
        # y - x = delta; x on the grid, or y on the grid (keeps d symmetric)
        for xs, ys in ((grid, grid + delta), (grid - delta, grid)):
            ok = (np.linalg.norm(xs, axis=1) <= slack) & (np.linalg.norm(ys, axis=1) <= slack)
            xs, ys = xs[ok], ys[ok]
            if len(xs) == 0:
                continue
            cheap = _near_ok(p1.tree, p1.points, p2.tree, xs, ys, radius, tol, 8)
            cheap &= _near_ok(p2.tree, p2.points, p1.tree, ys, xs, radius, tol, 8)
            for j in np.flatnonzero(cheap):
                if _agree(p1.tree, p1.points, p2.tree, p2.points, xs[j], ys[j], radius, tol):
                    return True
    return False


def hull_metric(p1: PointSet, p2: PointSet, eps_grid: float = 1e-3) -> float:
    """min(1/sqrt 2, inf{eps : samples agree on B_{1/eps} up to shifts in B_eps}).

    Bisection over eps in [eps_grid, 1/sqrt 2]; returns the midpoint of the
    final bracket, whose width is at most eps_grid (0 is the lower end when
    the samples already agree at eps_grid).
    """
    if p1.dim != p2.dim:
        raise ValueError("samples differ in dimension")
    if not 0 < eps_grid < HULL_CAP:
        raise ValueError("eps_grid must lie in (0, 1/sqrt 2)")
    need = 1.0 / eps_grid + 2 * eps_grid
    if min(p1.region.inner_radius, p2.region.inner_radius) < need:
        raise ValueError("sample too small for requested precision")
    if len(p1) == 0 or len(p2) == 0:
        raise ValueError("empty sample")
    tol = min(p1.eps_q(), p2.eps_q()) if min(len(p1), len(p2)) > 1 else 1e-9
    if not _close_at(p1, p2, HULL_CAP, tol):
        return HULL_CAP
    if _close_at(p1, p2, eps_grid, tol):
        return eps_grid / 2
    lo, hi = eps_grid, HULL_CAP
    while hi - lo > eps_grid:
        mid = (lo + hi) / 2
        if _close_at(p1, p2, mid, tol):
            hi = mid
        else:
            lo = mid
    return min(HULL_CAP, (lo + hi) / 2)


# ------------------------------------------------------------------- torus


@dataclass(frozen=True, eq=False)
class TorusSystem:
    """(T, alpha') for a scheme: lattice coordinates, physical translations."""

    phys_dim: int
    basis: np.ndarray

    @classmethod
    def from_scheme(cls, cps: CutProjectScheme) -> "TorusSystem":
        return cls(cps.phys_dim, cps.basis)

    @property
    def total_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def inverse(self) -> np.ndarray:
        return np.linalg.inv(self.basis)

    def phys_frequencies(self, q: np.ndarray) -> np.ndarray:
        """2 pi (B^-T q)_phys for integer rows q."""
        q = np.atleast_2d(np.asarray(q, dtype=float))
        return 2 * np.pi * (q @ self.inverse)[:, : self.phys_dim]

    def act(self, v, t) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        full = np.zeros(self.total_dim)
        full[: self.phys_dim] = np.asarray(t, dtype=float).reshape(self.phys_dim)
        return np.mod(v + self.inverse @ full, 1.0)


def torus_address(cps: CutProjectScheme, t, h) -> np.ndarray:
    """B^-1 (t, h) mod 1: the torus point of the model set t + cut(W - h)."""
    th = np.concatenate([np.asarray(t, dtype=float).reshape(cps.phys_dim), np.asarray(h, dtype=float).reshape(cps.int_dim)])
    return np.mod(np.linalg.solve(cps.basis, th), 1.0)


@dataclass(frozen=True, eq=False)
class TrigPolynomial:
    """f(v) = sum_q c_q exp(2 pi i q.v); repeated q are merged."""

    q: np.ndarray
    coeffs: np.ndarray

    @classmethod
    def from_terms(cls, terms) -> "TrigPolynomial":
        merged: dict = {}
        for q, c in terms:
            key = tuple(int(v) for v in q)
            merged[key] = merged.get(key, 0j) + complex(c)
        if not merged:
            return cls(np.zeros((0, 0), dtype=np.int64), np.zeros(0, dtype=complex))
        keys = list(merged)
        dims = {len(k) for k in keys}
        if len(dims) != 1:
            raise ValueError("terms have different lengths")
        return cls(np.array(keys, dtype=np.int64), np.array([merged[k] for k in keys], dtype=complex))

    @classmethod
    def from_json(cls, obj) -> "TrigPolynomial":
        return cls.from_terms((t["q"], complex(t.get("re", 0.0), t.get("im", 0.0))) for t in obj)

    def to_json(self) -> list:
        return [{"q": q.tolist(), "re": c.real, "im": c.imag} for q, c in zip(self.q, self.coeffs)]

    @property
    def terms(self) -> list:
        return [(tuple(q.tolist()), complex(c)) for q, c in zip(self.q, self.coeffs)]

    def __len__(self) -> int:
        return len(self.coeffs)

    def sup_bound(self) -> float:
        return float(np.abs(self.coeffs).sum())

    def characters(self, v) -> np.ndarray:
        """exp(2 pi i q.v), shape (len(v), len(terms))."""
        v = np.atleast_2d(np.asarray(v, dtype=float))
        if len(self) == 0:
            return np.zeros((len(v), 0), dtype=complex)
        ph = 2 * np.pi * (v @ self.q.T)
        return np.cos(ph) + 1j * np.sin(ph)

    def __call__(self, v) -> np.ndarray:
        return self.characters(v) @ self.coeffs

    def __add__(self, other: "TrigPolynomial") -> "TrigPolynomial":
        return TrigPolynomial.from_terms(self.terms + other.terms)

    def scale(self, a: complex) -> "TrigPolynomial":
        return TrigPolynomial(self.q.copy(), self.coeffs * a)


@dataclass(frozen=True)
class Cocycle:
    """Character cocycle phi(x, omega) = exp(i xi.x)."""

    xi: tuple

    def __init__(self, xi):
        object.__setattr__(self, "xi", tuple(float(v) for v in np.atleast_1d(xi)))

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.xi)

    def __call__(self, x, omega=None) -> complex:
        ph = float(np.dot(self.vector, np.asarray(x, dtype=float).reshape(-1)))
        return complex(math.cos(ph), math.sin(ph))


def _thetas(ts: TorusSystem, f: TrigPolynomial, c: Cocycle) -> np.ndarray:
    if len(f) == 0:
        return np.zeros((0, ts.phys_dim))
    xi = c.vector.reshape(ts.phys_dim)
    return xi[None, :] - ts.phys_frequencies(f.q)


def ball_wave_average(theta: np.ndarray, n: float, dim: int) -> np.ndarray:
    """|B_n|^-1 int_{B_n} exp(i theta.t) dt for rows theta (real by symmetry)."""
    x = np.linalg.norm(np.atleast_2d(theta), axis=1) * n
    out = np.ones_like(x)
    nz = x > 1e-6
    xs = x[nz]
    small = x[~nz] ** 2
    if dim == 1:
        out[nz] = np.sin(xs) / xs
        out[~nz] = 1 - small / 6
    elif dim == 2:
        out[nz] = 2 * j1(xs) / xs
        out[~nz] = 1 - small / 8
    elif dim == 3:
        out[nz] = 3 * (np.sin(xs) - xs * np.cos(xs)) / xs**3
        out[~nz] = 1 - small / 10
    else:
        raise ValueError("closed form available for dimensions 1 to 3")
    return out


def max_step(ts: TorusSystem, f: TrigPolynomial, c: Cocycle) -> float:
    """Largest admissible step: 0.1 rad per step for every frequency involved."""
    fr = np.linalg.norm(ts.phys_frequencies(f.q), axis=1).max() if len(f) else 0.0
    return 0.1 / (float(np.linalg.norm(c.vector)) + float(fr)) if (fr > 0 or np.any(c.vector)) else math.inf


def default_step(ts: TorusSystem, f: TrigPolynomial, c: Cocycle, n: float, tol: float = 1e-10) -> float:
    """Midpoint step meeting ``tol`` on the average, capped by :func:`max_step`.

    For one term the midpoint rule multiplies the exact integral by
    (theta h / 2) / sin(theta h / 2) ~ 1 + (theta h)^2 / 24 and the integral is
    at most min(|B_n|, 2 |B_n| / (theta n)) in size.
    """
    th = np.linalg.norm(_thetas(ts, f, c), axis=1)
    cap = max_step(ts, f, c)
    budget = 0.0
    for t, a in zip(th, np.abs(f.coeffs)):
        if t > 0:
            budget += a * t**2 / 24 * min(1.0, 2.0 / (t * n))
    if budget == 0:
        return min(cap, n / 10)
    return min(cap, math.sqrt(tol / budget), n / 10)


def _midpoint_term_averages(theta: np.ndarray, n: float, h: float, dim: int) -> np.ndarray:
    """Midpoint-rule |B_n|^-1 int_{B_n} exp(i theta.t) dt for each row of theta."""
    m = int(math.ceil(2 * n / h))
    h = 2 * n / m
    axis = -n + h * (np.arange(m) + 0.5)
    out = np.zeros(len(theta), dtype=complex)
    if dim == 1:
        chunk = 1 << 20
        for a in range(0, m, chunk):
            t = axis[a : a + chunk]
            ph = np.outer(theta[:, 0], t)
            out += np.cos(ph).sum(axis=1) + 1j * np.sin(ph).sum(axis=1)
        return out * h / (2 * n)
    mesh = np.stack(np.meshgrid(*([axis] * dim), indexing="ij"), axis=-1).reshape(-1, dim)
    mesh = mesh[np.linalg.norm(mesh, axis=1) <= n]
    for a in range(0, len(mesh), 1 << 18):
        ph = mesh[a : a + (1 << 18)] @ theta.T
        out += np.cos(ph).sum(axis=0) + 1j * np.sin(ph).sum(axis=0)
    from .conventions import ball_volume

    return out * h**dim / ball_volume(n, dim)


def term_averages(ts: TorusSystem, f: TrigPolynomial, c: Cocycle, n: float,
                  quad_step: float | None = None, method: str = "auto") -> np.ndarray:
    """Per-term ball averages of exp(i theta_q.t); independent of omega."""
    if method not in ("auto", "closed", "quadrature"):
        raise ValueError("method must be 'auto', 'closed' or 'quadrature'")
    theta = _thetas(ts, f, c)
    if len(f) == 0:
        return np.zeros(0, dtype=complex)
    if method == "auto":
        method = "closed" if ts.phys_dim == 1 else "quadrature"
    if method == "closed":
        return ball_wave_average(theta, n, ts.phys_dim).astype(complex)
    h = default_step(ts, f, c, n) if quad_step is None else float(quad_step)
    if h > max_step(ts, f, c) * (1 + 1e-12):
        raise ValueError("quadrature step too coarse")
    res = np.ones(len(f), dtype=complex)
    live = np.linalg.norm(theta, axis=1) > 0
    if np.any(live):
        res[live] = _midpoint_term_averages(theta[live], n, h, ts.phys_dim)
    return res


def ww_average(ts: TorusSystem, f: TrigPolynomial, c: Cocycle, omega, n: float,
               quad_step: float | None = None, method: str = "auto") -> complex | np.ndarray:
    """A_n(f)(omega) = |B_n|^-1 int_{B_n} exp(i xi.t) f(omega - B^-1 (t, 0)) dt.

    ``omega`` may be one torus point or an array of them.  Resonant terms
    integrate a constant and are exact on every path.
    """
    w = term_averages(ts, f, c, n, quad_step, method)
    vals = f.characters(omega) @ (f.coeffs * w)
    return complex(vals[0]) if np.ndim(omega) == 1 else vals


def ww_projection(ts: TorusSystem, f: TrigPolynomial, c: Cocycle, tol: float = RESONANCE_TOL) -> TrigPolynomial:
    """Terms whose physical frequency equals xi componentwise within tol."""
    if len(f) == 0:
        return f
    keep = np.all(np.abs(_thetas(ts, f, c)) <= tol, axis=1)
    return TrigPolynomial(f.q[keep].copy(), f.coeffs[keep].copy())


def omega_grid(ts: TorusSystem, points: int = 100) -> np.ndarray:
    """Regular grid on [0, 1)^d with ceil(points^(1/d)) nodes per axis."""
    per = int(math.ceil(points ** (1.0 / ts.total_dim) - 1e-9))
    axis = np.arange(per) / per
    g = np.meshgrid(*([axis] * ts.total_dim), indexing="ij")
    return np.stack([a.ravel() for a in g], axis=1)


def ww_uniform_test(ts: TorusSystem, f: TrigPolynomial, c: Cocycle, omega_samples, n_list: Sequence[float],
                    quad_step: float | None = None, method: str = "auto") -> list[tuple[float, float]]:
    """sup over the samples of |A_n(f) - P f| for every n."""
    om = np.atleast_2d(np.asarray(omega_samples, dtype=float))
    if om.size == 0:
        raise ValueError("omega_samples is empty")
    proj = ww_projection(ts, f, c)
    target = proj(om)
    out = []
    for n in n_list:
        vals = ww_average(ts, f, c, om, n, quad_step, method)
        out.append((float(n), float(np.max(np.abs(vals - target)))))
    return out
