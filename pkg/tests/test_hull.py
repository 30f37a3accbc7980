import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from aperiodica import model_set_points
from aperiodica.hull import (
    HULL_CAP,
    Cocycle,
    TorusSystem,
    TrigPolynomial,
    ball_wave_average,
    hull_metric,
    omega_grid,
    term_averages,
    torus_address,
    ww_average,
    ww_projection,
    ww_uniform_test,
)

from conftest import integer_line

Z = integer_line(1100)


def shifted(a):
    return Z.translate([a])


def test_lattice_shift_distance():
    for a in (0.1, 0.25, 0.4, 0.8):
        assert hull_metric(Z, shifted(a)) == pytest.approx(min(a, 1 - a) / 2, abs=1e-3)


def test_identical_and_unrelated_samples(fib):
    assert hull_metric(Z, Z) == pytest.approx(5e-4)
    f = model_set_points(fib, 1100.0)
    assert hull_metric(f, f.translate([0.3])) == pytest.approx(0.15, abs=1e-3)
    d = hull_metric(Z, f)
    assert d == hull_metric(f, Z)
    assert 0.3 < d <= HULL_CAP


def test_hull_metric_validation(fib_2000):
    with pytest.raises(ValueError):
        hull_metric(integer_line(100), integer_line(100))
    with pytest.raises(ValueError):
        hull_metric(Z, Z, eps_grid=0.9)


def test_torus_address_and_action(fib):
    assert np.allclose(torus_address(fib, [0.0], [0.0]), 0.0)
    ts = TorusSystem.from_scheme(fib)
    v = torus_address(fib, [0.4], [0.1])
    # acting by t moves the physical coordinate of the address by t
    assert np.allclose(ts.act(v, [1.5]), torus_address(fib, [1.9], [0.1]))


@given(st.floats(-50, 50), st.floats(0.5, 30))
def test_ball_average_1d_matches_quadrature(theta, n):
    ref = quad(lambda t: math.cos(theta * t), -n, n, limit=500)[0] / (2 * n)
    assert ball_wave_average(np.array([[theta]]), n, 1)[0] == pytest.approx(ref, abs=1e-9)


@pytest.mark.parametrize("dim", [2, 3])
def test_ball_average_higher_dims(dim):
    theta = np.zeros((1, dim))
    theta[0, 0] = 1.7
    n = 2.0
    if dim == 2:
        ref = quad(lambda x: math.cos(1.7 * x) * 2 * math.sqrt(n * n - x * x), -n, n)[0] / (math.pi * n * n)
    else:
        ref = quad(lambda x: math.cos(1.7 * x) * math.pi * (n * n - x * x), -n, n)[0] / (4 / 3 * math.pi * n**3)
    assert ball_wave_average(theta, n, dim)[0] == pytest.approx(ref, abs=1e-12)


def f3():
    return TrigPolynomial.from_terms([((1, 0), 1.0), ((0, 1), 0.5 - 0.5j), ((1, 1), 0.25)])


def test_trig_polynomial_algebra():
    f = f3()
    assert len(f) == 3
    assert f.sup_bound() == pytest.approx(1 + math.sqrt(0.5) + 0.25)
    v = np.array([[0.1, 0.3]])
    direct = np.exp(2j * np.pi * 0.1) + (0.5 - 0.5j) * np.exp(2j * np.pi * 0.3) + 0.25 * np.exp(2j * np.pi * 0.4)
    assert f(v)[0] == pytest.approx(direct)
    assert len(f + f) == 3
    assert (f + f)(v)[0] == pytest.approx(2 * direct)
    assert TrigPolynomial.from_json(f.to_json()).terms == f.terms


def test_quadrature_agrees_with_closed_form(fib):
    ts = TorusSystem.from_scheme(fib)
    c = Cocycle([0.9])
    for n in (10.0, 100.0, 1000.0):
        a = term_averages(ts, f3(), c, n, method="closed")
        b = term_averages(ts, f3(), c, n, method="quadrature")
        assert np.max(np.abs(a - b)) < 1e-8


def test_quadrature_step_guard(fib):
    ts = TorusSystem.from_scheme(fib)
    with pytest.raises(ValueError):
        term_averages(ts, f3(), Cocycle([0.9]), 10.0, quad_step=5.0, method="quadrature")
    with pytest.raises(ValueError):
        term_averages(ts, f3(), Cocycle([0.9]), 10.0, method="simpson")


def test_projection_keeps_resonant_terms(fib):
    ts = TorusSystem.from_scheme(fib)
    k10 = ts.phys_frequencies([[1, 0]])[0]
    pf = ww_projection(ts, f3(), Cocycle(k10))
    assert pf.terms == [((1, 0), 1.0 + 0j)]
    assert len(ww_projection(ts, f3(), Cocycle([0.9]))) == 0


def test_single_resonant_term_is_exact(fib):
    ts = TorusSystem.from_scheme(fib)
    f = TrigPolynomial.from_terms([((1, 0), 2.0)])
    c = Cocycle(ts.phys_frequencies([[1, 0]])[0])
    res = ww_uniform_test(ts, f, c, omega_grid(ts, 100), [10.0, 1000.0])
    assert all(dev == 0.0 for _, dev in res)


def test_average_matches_direct_integral(fib):
    ts = TorusSystem.from_scheme(fib)
    f, c = f3(), Cocycle([0.9])
    om = np.array([0.2, 0.7])
    n = 5.0

    def integrand(t, part):
        val = np.exp(1j * 0.9 * t) * f(ts.act(om, [-t]).reshape(1, -1))[0]
        return val.real if part == 0 else val.imag

    ref = (quad(integrand, -n, n, args=(0,), limit=400)[0] + 1j * quad(integrand, -n, n, args=(1,), limit=400)[0]) / (2 * n)
    assert ww_average(ts, f, c, om, n) == pytest.approx(ref, abs=1e-9)


def test_omega_grid_sizes(fib, octa):
    assert len(omega_grid(TorusSystem.from_scheme(fib), 100)) == 100
    assert len(omega_grid(TorusSystem.from_scheme(octa), 100)) == 4**4
