"""Windows in internal space R^m with exact Fourier transforms and overlaps."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import j1


def _half_sinc(w):
    """(exp(iw) - 1) / (iw), stable at w = 0."""
    w = np.asarray(w, dtype=float)
    return np.exp(0.5j * w) * np.sinc(w / (2 * np.pi))


def interval_fourier(a: float, b: float, k):
    """int_a^b exp(i k y) dy, equal to b - a at k = 0."""
    k = np.asarray(k, dtype=float)
    return (b - a) * np.exp(1j * k * a) * _half_sinc(k * (b - a))


def simplex_fourier(u, v):
    """int over {s, t >= 0, s + t <= 1} of exp(i(s u + t v)) ds dt."""
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    swap = np.abs(u) > np.abs(v)
    big = np.where(swap, u, v)
    other = np.where(swap, v, u)
    out = np.empty(u.shape, dtype=complex)

    small = np.abs(big) < 0.5
    if np.any(~small):
        vb, ub = big[~small], other[~small]
        out[~small] = (np.exp(1j * vb) * _half_sinc(ub - vb) - _half_sinc(ub)) / (1j * vb)
    if np.any(small):
        us, vs = u[small], v[small]
        h = np.ones_like(us, dtype=complex)
        upow = np.ones_like(us)
        total = h / 2.0
        fact = 2.0
        for n in range(1, 30):
            upow = upow * us
            h = vs * h + upow
            fact *= n + 2
            total = total + (1j**n) * h / fact
        out[small] = total
    return out


class Window:
    """Bounded window W in R^m; ``regular`` records that dW has measure zero."""

    dim: int
    regular: bool = True

    def contains(self, y) -> np.ndarray:
        raise NotImplementedError

    @property
    def volume(self) -> float:
        raise NotImplementedError

    @property
    def boundary_measure(self) -> float:
        raise NotImplementedError

    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def fourier(self, kstar) -> np.ndarray:
        """int_W exp(i k*.y) dy for each row of ``kstar``."""
        raise NotImplementedError

    def overlap(self, shift) -> float:
        """vol(W & (W - shift))."""
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError

    def enclosing_ball(self) -> tuple[np.ndarray, float]:
        lo, hi = self.bbox()
        c = (lo + hi) / 2
        return c, float(np.linalg.norm(hi - c))

    def tail_bound(self, kint: float) -> float:
        """Upper bound of |fourier(k*)| over |k*| >= kint (divergence theorem)."""
        return min(self.volume, self.boundary_measure / kint) if kint > 0 else self.volume

    def _rows(self, y) -> np.ndarray:
        return np.asarray(y, dtype=float).reshape(-1, self.dim)


@dataclass(frozen=True)
class Interval(Window):
    """Half-open interval [a, b)."""

    a: float
    b: float
    regular: bool = True
    dim = 1

    def __post_init__(self):
        if not self.b > self.a:
            raise ValueError("interval window needs a < b")

    def contains(self, y):
        y = self._rows(y)[:, 0]
        return (y >= self.a) & (y < self.b)

    @property
    def volume(self):
        return self.b - self.a

    @property
    def boundary_measure(self):
        return 2.0

    def bbox(self):
        return np.array([self.a]), np.array([self.b])

    def fourier(self, kstar):
        k = np.asarray(kstar, dtype=float).reshape(-1)
        return interval_fourier(self.a, self.b, k)

    def overlap(self, shift):
        s = float(np.ravel(shift)[0])
        return max(0.0, min(self.b, self.b - s) - max(self.a, self.a - s))

    def to_json(self):
        return {"type": "interval", "a": self.a, "b": self.b, "regular": self.regular}


@dataclass(frozen=True)
class Box(Window):
    """Half-open box prod [lo_i, hi_i)."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]
    regular: bool = True

    def __post_init__(self):
        if len(self.lo) != len(self.hi) or not all(b > a for a, b in zip(self.lo, self.hi)):
            raise ValueError("box window needs lo < hi componentwise")

    @property
    def dim(self):
        return len(self.lo)

    def contains(self, y):
        y = self._rows(y)
        return np.all((y >= np.asarray(self.lo)) & (y < np.asarray(self.hi)), axis=1)

    @property
    def volume(self):
        return float(np.prod(np.subtract(self.hi, self.lo)))

    @property
    def boundary_measure(self):
        sides = np.subtract(self.hi, self.lo)
        if self.dim == 1:
            return 2.0
        return float(sum(2 * np.prod(np.delete(sides, i)) for i in range(self.dim)))

    def bbox(self):
        return np.array(self.lo, dtype=float), np.array(self.hi, dtype=float)

    def fourier(self, kstar):
        k = self._rows(kstar)
        out = np.ones(len(k), dtype=complex)
        for i, (a, b) in enumerate(zip(self.lo, self.hi)):
            out *= interval_fourier(a, b, k[:, i])
        return out

    def overlap(self, shift):
        s = np.ravel(shift)
        vol = 1.0
        for a, b, si in zip(self.lo, self.hi, s):
            vol *= max(0.0, min(b, b - si) - max(a, a - si))
        return vol

    def to_json(self):
        return {"type": "box", "lo": list(self.lo), "hi": list(self.hi), "regular": self.regular}


def _polygon_area(v: np.ndarray) -> float:
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _clip_convex(subject: np.ndarray, clip: np.ndarray) -> np.ndarray:
    """Sutherland-Hodgman clipping of a convex polygon by a CCW convex polygon."""
    out = subject
    for i in range(len(clip)):
        if len(out) == 0:
            break
        p, q = clip[i], clip[(i + 1) % len(clip)]
        d = q - p
        side = d[0] * (out[:, 1] - p[1]) - d[1] * (out[:, 0] - p[0])
        new = []
        for j in range(len(out)):
            a, b = out[j], out[(j + 1) % len(out)]
            sa, sb = side[j], side[(j + 1) % len(out)]
            if sa >= 0:
                new.append(a)
            if (sa >= 0) != (sb >= 0):
                new.append(a + (b - a) * (sa / (sa - sb)))
        out = np.array(new).reshape(-1, 2)
    return out


@dataclass(frozen=True, eq=False)
class Polygon(Window):
    """Convex polygon with counterclockwise vertices.

    Boundary points belong to W exactly on the edges whose outward normal
    points to negative x (or straight down), so translates tile without
    double counting.
    """

    vertices: np.ndarray
    regular: bool = True
    dim = 2

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float).reshape(-1, 2)
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        if len(v) < 3:
            raise ValueError("polygon needs at least 3 vertices")
        d = np.roll(v, -1, axis=0) - v
        turn = d[:, 0] * np.roll(d, -1, axis=0)[:, 1] - d[:, 1] * np.roll(d, -1, axis=0)[:, 0]
        if np.any(turn <= 0):
            raise ValueError("polygon must be convex and counterclockwise")
        angle = np.sum(np.arctan2(turn, np.einsum("ij,ij->i", d, np.roll(d, -1, axis=0))))
        if not math.isclose(angle, 2 * math.pi, rel_tol=1e-9):
            raise ValueError("polygon is not simple")

    def contains(self, y):
        y = self._rows(y)
        v = self.vertices
        d = np.roll(v, -1, axis=0) - v
        inside = np.ones(len(y), dtype=bool)
        for (px, py), (dx, dy) in zip(v, d):
            cross = dx * (y[:, 1] - py) - dy * (y[:, 0] - px)
            nx, ny = dy, -dx
            closed_edge = nx < 0 or (nx == 0 and ny < 0)
            inside &= (cross >= 0) if closed_edge else (cross > 0)
        return inside

    @property
    def volume(self):
        return _polygon_area(self.vertices)

    @property
    def boundary_measure(self):
        return float(np.sum(np.linalg.norm(np.roll(self.vertices, -1, axis=0) - self.vertices, axis=1)))

    def bbox(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def enclosing_ball(self):
        c = self.vertices.mean(axis=0)
        return c, float(np.max(np.linalg.norm(self.vertices - c, axis=1)))

    def fourier(self, kstar):
        k = self._rows(kstar)
        c = self.vertices.mean(axis=0)
        rel = self.vertices - c
        nxt = np.roll(rel, -1, axis=0)
        out = np.zeros(len(k), dtype=complex)
        for a, b in zip(rel, nxt):
            area2 = a[0] * b[1] - a[1] * b[0]
            out += area2 * simplex_fourier(k @ a, k @ b)
        return out * np.exp(1j * (k @ c))

    def overlap(self, shift):
        s = np.ravel(shift)
        clipped = _clip_convex(self.vertices, self.vertices - s)
        return _polygon_area(clipped) if len(clipped) >= 3 else 0.0

    def to_json(self):
        return {"type": "polygon", "vertices": self.vertices.tolist(), "regular": self.regular}

    @classmethod
    def regular_polygon(cls, n: int, circumradius: float, phase: float = 0.0) -> "Polygon":
        ang = phase + 2 * np.pi * np.arange(n) / n
        return cls(circumradius * np.column_stack([np.cos(ang), np.sin(ang)]))


@dataclass(frozen=True)
class BallWindow(Window):
    """Closed ball of the given radius centered at the origin of R^m."""

    radius: float
    m: int
    regular: bool = True

    def __post_init__(self):
        if not self.radius > 0 or self.m not in (1, 2, 3):
            raise ValueError("ball window needs radius > 0 and dimension 1..3")

    @property
    def dim(self):
        return self.m

    def contains(self, y):
        return np.linalg.norm(self._rows(y), axis=1) <= self.radius

    @property
    def volume(self):
        r = self.radius
        return (2 * r, math.pi * r * r, 4 / 3 * math.pi * r**3)[self.m - 1]

    @property
    def boundary_measure(self):
        r = self.radius
        return (2.0, 2 * math.pi * r, 4 * math.pi * r * r)[self.m - 1]

    def bbox(self):
        return np.full(self.m, -self.radius), np.full(self.m, self.radius)

    def enclosing_ball(self):
        return np.zeros(self.m), self.radius

    def fourier(self, kstar):
        k = np.linalg.norm(self._rows(kstar), axis=1)
        r = self.radius
        x = k * r
        out = np.full(len(k), self.volume, dtype=float)
        nz = x > 1e-8
        xs = x[nz]
        if self.m == 1:
            out[nz] = 2 * np.sin(xs) / k[nz]
        elif self.m == 2:
            out[nz] = 2 * np.pi * r * j1(xs) / k[nz]
        else:
            out[nz] = 4 * np.pi * (np.sin(xs) - xs * np.cos(xs)) / k[nz] ** 3
        return out.astype(complex)

    def overlap(self, shift):
        d = float(np.linalg.norm(np.ravel(shift)))
        r = self.radius
        if d >= 2 * r:
            return 0.0
        if self.m == 1:
            return 2 * r - d
        if self.m == 2:
            return 2 * r * r * math.acos(d / (2 * r)) - 0.5 * d * math.sqrt(4 * r * r - d * d)
        return math.pi / 12 * (4 * r + d) * (2 * r - d) ** 2

    def to_json(self):
        return {"type": "ball", "radius": self.radius, "dim": self.m, "regular": self.regular}


def window_from_json(obj: dict, int_dim: int | None = None) -> Window:
    kind = obj.get("type")
    regular = bool(obj.get("regular", False))
    if kind == "interval":
        return Interval(float(obj["a"]), float(obj["b"]), regular)
    if kind == "box":
        return Box(tuple(map(float, obj["lo"])), tuple(map(float, obj["hi"])), regular)
    if kind == "polygon":
        return Polygon(np.asarray(obj["vertices"], dtype=float), regular)
    if kind == "ball":
        return BallWindow(float(obj["radius"]), int(obj.get("dim", int_dim or 1)), regular)
    raise ValueError(f"unknown window type {kind!r}")


def window_fourier(w: Window, kstar: Sequence[float] | np.ndarray) -> complex | np.ndarray:
    """int_W exp(i k*.y) dy; scalar for one frequency, array for a stack."""
    k = np.asarray(kstar, dtype=float)
    out = w.fourier(k.reshape(-1, w.dim))
    if k.ndim <= 1 and (k.ndim == 0 or len(k) == w.dim):
        return complex(out[0])
    return out
