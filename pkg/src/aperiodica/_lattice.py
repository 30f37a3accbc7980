"""Integer points of a lattice inside a product of two balls."""

from __future__ import annotations

import numpy as np


def ellipsoid_points(R: np.ndarray, center: np.ndarray, r2: float, slack: float = 1e-9) -> np.ndarray:
    """All integer q with ||R (q - center)||^2 <= r2 for upper-triangular R.

    Breadth-first sliced enumeration from the last coordinate down; each
    level solves the triangular system for the admissible integer range of
    the next coordinate.
    """
    d = R.shape[0]
    center = np.asarray(center, dtype=float)
    # rows of partial assignments q[i+1:], accumulated squared norm, and the
    # shift s_i = sum_{j>i} R_ij (q_j - c_j) for the next row
    qs = np.zeros((1, 0), dtype=np.int64)
    rem = np.array([r2 * (1 + slack) + slack])
    for i in range(d - 1, -1, -1):
        rii = R[i, i]
        if qs.shape[1]:
            shift = (qs - center[i + 1:]) @ R[i, i + 1:] / rii
        else:
            shift = np.zeros(len(qs))
        half = np.sqrt(np.maximum(rem, 0.0)) / abs(rii)
        mid = center[i] - shift
        lo = np.ceil(mid - half).astype(np.int64)
        hi = np.floor(mid + half).astype(np.int64)
        cnt = np.maximum(hi - lo + 1, 0)
        total = int(cnt.sum())
        parent = np.repeat(np.arange(len(qs)), cnt)
        offs = np.arange(total) - np.repeat(np.cumsum(cnt) - cnt, cnt)
        qi = lo[parent] + offs
        term = (rii * (qi - mid[parent])) ** 2
        rem = rem[parent] - term
        qs = np.column_stack([qi, qs[parent]])
    return qs


def cylinder_points(
    M: np.ndarray,
    n_phys: int,
    phys_radius: float,
    int_center: np.ndarray,
    int_radius: float,
    phys_center: np.ndarray | None = None,
) -> np.ndarray:
    """Integer q with ||(Mq)_phys - c_p|| <= phys_radius and ||(Mq)_int - c_i|| <= int_radius.

    The product of balls is enclosed in an ellipsoid, enumerated exactly and
    then filtered.
    """
    d = M.shape[0]
    m = d - n_phys
    pc = np.zeros(n_phys) if phys_center is None else np.asarray(phys_center, dtype=float)
    ic = np.asarray(int_center, dtype=float).reshape(m)
    scale = np.concatenate([np.full(n_phys, 1.0 / phys_radius), np.full(m, 1.0 / int_radius)])
    A = scale[:, None] * M
    _, R = np.linalg.qr(A)
    center = np.linalg.solve(M, np.concatenate([pc, ic]))
    q = ellipsoid_points(R, center, 2.0)
    if len(q) == 0:
        return q
    v = q @ M.T
    tol = 1e-12 * (1 + phys_radius)
    keep = (np.linalg.norm(v[:, :n_phys] - pc, axis=1) <= phys_radius + tol) & (
        np.linalg.norm(v[:, n_phys:] - ic, axis=1) <= int_radius * (1 + 1e-12)
    )
    return q[keep]
