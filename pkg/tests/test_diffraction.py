import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from aperiodica import fourier_module, model_set_points
from aperiodica.autocorrelation import autocorr
from aperiodica.diffraction import (
    SmoothingKernel,
    bt_amplitude,
    closure_violations,
    grid_candidates,
    model_set_intensity,
    module_intensities,
    module_scan,
    peak_scan,
    pure_point_consistency,
    refine_peak,
    symmetry_check,
)
from aperiodica.svg import write_peak_svg

from conftest import integer_line


def dirichlet(xi, s):
    """|B_s|^-1 sum_{|k| <= s} exp(-i xi k) for integer s."""
    if abs(math.sin(xi / 2)) < 1e-15:
        return (2 * s + 1) / (2 * s)
    return math.sin((s + 0.5) * xi) / math.sin(xi / 2) / (2 * s)


@given(st.floats(-20, 20), st.integers(1, 90))
def test_lattice_amplitude_is_dirichlet_kernel(xi, s):
    p = integer_line(100)
    c = bt_amplitude(p, [xi], float(s)).value
    assert abs(c - dirichlet(xi, s)) < 1e-12


def test_bt_amplitude_direct_sum(fib):
    p = model_set_points(fib, 300.0)
    x = p.points[np.abs(p.points[:, 0]) <= 250.0, 0]
    ref = np.exp(-1j * 1.3 * x).sum() / 500.0
    got = bt_amplitude(p, [1.3], 250.0)
    assert abs(got.value - ref) < 1e-12
    assert got.n_points == len(x)
    with pytest.raises(ValueError):
        bt_amplitude(p, [1.0], 400.0)


def test_peak_scan_history_and_cesaro(z_100):
    pl = peak_scan(z_100, [[2 * np.pi], [1.0]], [10, 50, 90])
    e = pl.find([2 * np.pi])
    assert e.history == pytest.approx([(21 / 20) ** 2, (101 / 100) ** 2, (181 / 180) ** 2])
    ces = peak_scan(z_100, [[2 * np.pi]], [10, 50, 90], cesaro=True)
    assert ces.entries[0].intensity_bt == pytest.approx(np.mean(e.history[1:]))


def test_peak_scan_thread_invariance(fib_2000):
    cand = grid_candidates([0.0], [6.0], 0.01)
    a = peak_scan(fib_2000, cand, [1000.0, 1900.0], threads=1)
    b = peak_scan(fib_2000, cand, [1000.0, 1900.0], threads=4)
    assert np.array_equal(a.intensities, b.intensities)


def test_grid_candidates_include_both_ends():
    g = grid_candidates([0.0, -1.0], [1.0, 1.0], 0.5)
    assert len(g) == 3 * 5
    assert g[-1].tolist() == [1.0, 1.0]


def test_model_set_intensity_is_window_transform(fib):
    # A_0 = density^2 and the hand-evaluated interval transform for q = (1, 0)
    assert model_set_intensity(fib, [0, 0]) == pytest.approx(fib.density**2)
    ks = (fib.dual_basis @ np.array([1.0, 0.0]))[1]
    a, b = -1.0, (math.sqrt(5) - 1) / 2
    ref = abs((np.exp(1j * ks * b) - np.exp(1j * ks * a)) / (1j * ks)) ** 2 / 5
    assert model_set_intensity(fib, [1, 0]) == pytest.approx(ref, rel=1e-12)
    m = fourier_module(fib, 5.0, 10.0)
    assert np.allclose(module_intensities(fib, m), [model_set_intensity(fib, q) for q in m.q])


def test_module_scan_converges(fib):
    p = model_set_points(fib, 5000.0)
    pl = module_scan(p, fib, 6.0, 10.0, [2000.0, 4990.0])
    top = pl.top(5, by="closed")
    a0 = model_set_intensity(fib, [0, 0])
    for e in top.entries:
        assert abs(e.intensity_bt - e.intensity_closed) / a0 < 1e-2
    assert pl.cutoffs["kmax"] == 6.0


def test_refine_peak_finds_lattice_peak(z_100):
    x, val = refine_peak(z_100, 6.27, 0.02, 90.0)
    assert x == pytest.approx(2 * math.pi, abs=1e-6)
    assert val == pytest.approx((181 / 180) ** 2, rel=1e-9)


@pytest.mark.parametrize("shape", ["triangular", "raised-cosine"])
def test_kernel_transforms_against_quadrature(shape):
    k = SmoothingKernel(shape, 0.3)
    assert quad(lambda t: k.value([t])[0], -0.3, 0.3)[0] == pytest.approx(1.0, abs=1e-12)
    for xi in (0.0, 1.0, math.pi / 0.3, 17.0, 60.0):
        ref = quad(lambda t: k.value([t])[0] * math.cos(xi * t), -0.3, 0.3, limit=200)[0]
        assert k.ft([xi])[0] == pytest.approx(ref, abs=1e-12)
    for z in (0.0, 0.1, 0.35, 0.59):
        ref = quad(lambda t: k.value([t])[0] * k.value([t - z])[0], -0.3, 0.3, points=[z - 0.3, z], limit=200)[0]
        assert k.autoconv([z])[0] == pytest.approx(ref, abs=1e-10)
    assert k.autoconv([0.61])[0] == 0.0


@pytest.mark.parametrize("shape", ["triangular", "raised-cosine"])
def test_kernel_envelope_bounds_transform(shape):
    k = SmoothingKernel(shape, 0.2)
    xs = np.linspace(0, 500, 20001)
    ft = np.abs(k.ft(xs))
    for r in (10.0, 40.0, 100.0, 300.0):
        assert ft[xs >= r].max() <= k.ft_envelope(r) * (1 + 1e-12)
    assert k.ft_envelope(k.cutoff()) ** 2 == pytest.approx(1e-6, rel=1e-6)


def test_kernel_validation():
    with pytest.raises(ValueError):
        SmoothingKernel("gaussian", 0.2)
    with pytest.raises(ValueError):
        SmoothingKernel("triangular", 0.0)


def test_consistency_guards(z_100):
    comb = autocorr(z_100, 50.0, 2.0)
    peaks = peak_scan(z_100, grid_candidates([-400.0], [400.0], 2 * np.pi), [90.0])
    with pytest.raises(ValueError):
        pure_point_consistency(z_100, peaks, SmoothingKernel("triangular", 0.6), comb)
    with pytest.raises(ValueError):
        pure_point_consistency(z_100, peaks, SmoothingKernel("triangular", 0.2), autocorr(z_100, 50.0, 0.1))
    short = peak_scan(z_100, [[0.0]], [90.0])
    with pytest.raises(ValueError):
        pure_point_consistency(z_100, short, SmoothingKernel("triangular", 0.2), comb)


def test_consistency_on_lattice(z_100):
    # the lattice is pure point with peaks on 2 pi Z
    comb = autocorr(z_100, 50.0, 1.0)
    kern = SmoothingKernel("triangular", 0.2)
    reach = kern.cutoff() + 10
    m = int(reach / (2 * np.pi)) + 1
    peaks = peak_scan(z_100, 2 * np.pi * np.arange(-m, m + 1.0), [90.0])
    res = pure_point_consistency(z_100, peaks, kern, comb)
    assert res.rel_error < 2e-2


def test_symmetry_minus_identity_is_exact(octa):
    p = model_set_points(octa, 40.0)
    pl = peak_scan(p, grid_candidates([-3.0, -3.0], [3.0, 3.0], 0.25), [35.0])
    assert symmetry_check(pl, -np.eye(2)) == 0.0
    assert symmetry_check(pl, -np.eye(2), p, remeasure="all") == 0.0


def test_symmetry_check_validation(octa):
    p = model_set_points(octa, 20.0)
    pl = peak_scan(p, [[0.5, 0.0]], [15.0])
    with pytest.raises(ValueError):
        symmetry_check(pl, [[1.0, 1.0], [0.0, 1.0]])
    with pytest.raises(ValueError):
        symmetry_check(pl, [[0.0, -1.0], [1.0, 0.0]])
    assert symmetry_check(pl, [[0.0, -1.0], [1.0, 0.0]], p) >= 0


def test_closure_violations_reports_missing_sums(z_100):
    pl = peak_scan(z_100, [[0.0], [2 * np.pi], [2.0], [4 * np.pi]], [90.0])
    assert closure_violations(pl, 0.5) == []
    partial = peak_scan(z_100, [[0.0], [2 * np.pi], [4.0 * np.pi + 1.0], [5.0 * np.pi]], [90.0])
    assert closure_violations(partial, 0.5)


def test_svg_output(tmp_path):
    write_peak_svg(tmp_path / "a.svg", np.array([[0.0], [1.0]]), np.array([1.0, 0.5]))
    write_peak_svg(tmp_path / "b.svg", np.array([[0.0, 0.0], [1.0, 1.0]]), np.array([1.0, 0.5]))
    assert (tmp_path / "a.svg").read_text().startswith("<svg")
    assert "<circle" in (tmp_path / "b.svg").read_text()
    with pytest.raises(ValueError):
        write_peak_svg(tmp_path / "c.svg", np.zeros((1, 3)), np.ones(1))
