"""Sign and normalization conventions shared by every module.

Waves and amplitudes
    A point ``x`` scatters the wave ``xi -> exp(-i xi.x)``.  The finite
    amplitude over a ball is ``c_S(xi) = |B_S|^-1 sum_{x in B_S} exp(-i xi.x)``
    and Bragg intensities are limits of ``|c_S(xi)|**2``.  No factor of 2*pi
    appears in the physical exponent.

Dual lattice
    The lattice ``L~`` is generated by the columns of ``B`` (first ``N`` rows
    physical, last ``m`` rows internal).  Its dual is generated by the columns
    of ``2*pi * inv(B).T`` so that ``exp(i k.l) = 1`` for every dual vector
    ``k`` and lattice vector ``l``.  Torus characters are
    ``e_q(v) = exp(2*pi*i q.v)`` in lattice coordinates ``v``.

Haar normalization
    User bases have covolume ``|det B| != 1``.  Densities and intensities divide
    internal volumes by the covolume: density ``vol(W)/covol``, limiting
    autocorrelation ``vol(W & (W - z*))/covol``, Bragg intensity
    ``|int_W exp(i k*.y) dy|**2 / covol**2``.

Fourier transform of test functions
    ``F(phi)(xi) = int phi(t) exp(-i xi.t) dt``.  With this choice Poisson
    summation reads ``sum_n g(n) = sum_k F(g)(2*pi*k)`` and the consistency
    identity is ``sum_z c_z (phi * phi~)(z) = sum_xi I(xi) |F(phi)(xi)|**2``.

Balls
    Closed Euclidean balls ``B_S`` centered at the origin; volumes 2S (1D),
    pi S^2 (2D), 4/3 pi S^3 (3D).
"""

from __future__ import annotations

import math

TAU = (1.0 + math.sqrt(5.0)) / 2.0
TAU_CONJ = (1.0 - math.sqrt(5.0)) / 2.0

# Relative tolerance for identifying floating-point positions (times the
# packing radius when one is known).
EPS_Q_REL = 1e-9


def ball_volume(radius: float, dim: int) -> float:
    if dim == 1:
        return 2.0 * radius
    if dim == 2:
        return math.pi * radius**2
    if dim == 3:
        return 4.0 / 3.0 * math.pi * radius**3
    return math.pi ** (dim / 2) / math.gamma(dim / 2 + 1) * radius**dim
