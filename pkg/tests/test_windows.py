import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import dblquad, quad

from aperiodica import BallWindow, Box, Interval, Polygon, window_fourier
from aperiodica.windows import simplex_fourier, window_from_json

finite = st.floats(-30, 30, allow_nan=False)


def quad_complex(f, a, b):
    re = quad(lambda y: f(y).real, a, b, limit=400)[0]
    im = quad(lambda y: f(y).imag, a, b, limit=400)[0]
    return re + 1j * im


@given(finite)
def test_interval_fourier_matches_quadrature(k):
    w = Interval(-1.0, 0.618)
    ref = quad_complex(lambda y: np.exp(1j * k * y), -1.0, 0.618)
    assert abs(complex(w.fourier([k])[0]) - ref) < 1e-9


def test_interval_basics():
    w = Interval(0.0, 2.0)
    assert w.volume == 2.0
    assert list(w.contains([0.0, 1.999, 2.0, -1e-12])) == [True, True, False, False]
    assert w.overlap([0.5]) == pytest.approx(1.5)
    assert w.overlap([3.0]) == 0.0
    with pytest.raises(ValueError):
        Interval(1.0, 1.0)


def test_box_fourier_factors():
    b = Box((0.0, -1.0), (1.0, 2.0))
    k = np.array([[0.7, -1.3]])
    ref = Interval(0.0, 1.0).fourier([0.7])[0] * Interval(-1.0, 2.0).fourier([-1.3])[0]
    assert abs(b.fourier(k)[0] - ref) < 1e-14
    assert b.volume == pytest.approx(3.0)
    assert b.overlap([0.5, 1.0]) == pytest.approx(0.5 * 2.0)


@given(st.floats(-15, 15), st.floats(-15, 15))
def test_simplex_fourier_series_and_closed_form_agree_with_quadrature(u, v):
    ref_re = dblquad(lambda t, s: math.cos(s * u + t * v), 0, 1, 0, lambda s: 1 - s, epsabs=1e-11)[0]
    ref_im = dblquad(lambda t, s: math.sin(s * u + t * v), 0, 1, 0, lambda s: 1 - s, epsabs=1e-11)[0]
    got = complex(simplex_fourier(np.array([u]), np.array([v]))[0])
    assert abs(got - (ref_re + 1j * ref_im)) < 1e-8


def test_octagon_fourier_against_grid_sum(octa):
    w = octa.window
    assert w.volume == pytest.approx(2 * (1 + math.sqrt(2)))
    lo, hi = w.bbox()
    n = 2000
    h = (hi - lo) / n
    xs = lo[0] + h[0] * (np.arange(n) + 0.5)
    ys = lo[1] + h[1] * (np.arange(n) + 0.5)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    inside = w.contains(np.column_stack([gx.ravel(), gy.ravel()]))
    px, py = gx.ravel()[inside], gy.ravel()[inside]
    rng = np.random.default_rng(3)
    for k in rng.normal(scale=4.0, size=(4, 2)):
        ref = np.sum(np.exp(1j * (k[0] * px + k[1] * py))) * h[0] * h[1]
        # midpoint sum over a discontinuous indicator: error ~ perimeter * step
        assert abs(complex(w.fourier(k.reshape(1, 2))[0]) - ref) < 1e-2


def test_polygon_overlap_monte_carlo(octa):
    w = octa.window
    rng = np.random.default_rng(5)
    lo, hi = w.bbox()
    pts = rng.uniform(lo, hi, size=(400_000, 2))
    area = np.prod(hi - lo)
    z = np.array([0.6, -0.3])
    est = np.mean(w.contains(pts) & w.contains(pts + z)) * area
    assert w.overlap(z) == pytest.approx(est, abs=0.02)
    assert w.overlap(np.zeros(2)) == pytest.approx(w.volume)


def test_polygon_rejects_clockwise():
    with pytest.raises(ValueError):
        Polygon(np.array([[0, 0], [0, 1], [1, 0]]))


@pytest.mark.parametrize("m", [1, 2, 3])
def test_ball_window_fourier(m):
    w = BallWindow(0.8, m)
    k = np.zeros((1, m))
    k[0, 0] = 2.3
    if m == 1:
        ref = quad(lambda y: math.cos(2.3 * y), -0.8, 0.8)[0]
    elif m == 2:
        ref = dblquad(lambda y, x: math.cos(2.3 * x), -0.8, 0.8,
                      lambda x: -math.sqrt(0.64 - x * x), lambda x: math.sqrt(0.64 - x * x))[0]
    else:
        ref = quad(lambda x: math.cos(2.3 * x) * math.pi * (0.64 - x * x), -0.8, 0.8)[0]
    assert complex(w.fourier(k)[0]) == pytest.approx(ref, abs=1e-9)


@given(st.floats(0, 2.0))
def test_disc_overlap_is_lens_area(d):
    w = BallWindow(1.0, 2)
    lens = 2 * math.acos(d / 2) - d / 2 * math.sqrt(4 - d * d) if d < 2 else 0.0
    assert w.overlap([d, 0.0]) == pytest.approx(lens, abs=1e-12)


def test_window_fourier_at_zero_is_volume(octa, fib):
    assert window_fourier(fib.window, [0.0]) == pytest.approx(fib.window.volume)
    assert abs(window_fourier(octa.window, [0.0, 0.0]) - octa.window.volume) < 1e-12


def test_window_json_round_trip(octa, fib):
    for w in (fib.window, octa.window, Box((0.0,), (1.0,)), BallWindow(0.5, 2)):
        back = window_from_json(w.to_json())
        assert back.volume == pytest.approx(w.volume)
