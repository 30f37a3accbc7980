import itertools
import json
import math
import warnings

import numpy as np
import pytest

from aperiodica import Interval, SchemeError, builtin, cps_new, fourier_module, model_set_points, star_map
from aperiodica.cps import DensityWarning, load_scheme, octagonal_rotation_labels, scheme_from_json

TAU = (1 + math.sqrt(5)) / 2


def brute_force(cps, radius, span=60):
    out = []
    for q in itertools.product(range(-span, span + 1), repeat=cps.total_dim):
        x, y = star_map(cps, q)
        if np.linalg.norm(x) <= radius and cps.window.contains(y.reshape(1, -1))[0]:
            out.append(x)
    return np.array(sorted(map(tuple, out)))


def test_fibonacci_matches_brute_force(fib):
    p = model_set_points(fib, 40.0)
    ref = brute_force(fib, 40.0)
    assert len(p) == len(ref)
    assert np.allclose(np.sort(p.points[:, 0]), ref[:, 0], atol=1e-12)


def test_fibonacci_gaps_and_density(fib):
    p = model_set_points(fib, 2000.0)
    gaps = np.unique(np.round(np.diff(np.sort(p.points[:, 0])), 9))
    assert np.allclose(gaps, [1.0, TAU])
    assert fib.covolume == pytest.approx(math.sqrt(5))
    assert fib.density == pytest.approx(TAU / math.sqrt(5))
    assert len(p) / 4000.0 == pytest.approx(fib.density, rel=2e-3)


def test_octagonal_matches_brute_force(octa):
    p = model_set_points(octa, 6.0)
    ref = brute_force(octa, 6.0, span=7)
    assert len(p) == len(ref)
    key = lambda a: np.lexsort(a.T[::-1])
    assert np.allclose(p.points[key(p.points)], ref[key(ref)], atol=1e-9)


def test_octagonal_density_and_unit_edges(octa):
    p = model_set_points(octa, 60.0)
    assert octa.covolume == pytest.approx(4.0)
    assert octa.density == pytest.approx((1 + math.sqrt(2)) / 2)
    assert len(p) / (math.pi * 3600) == pytest.approx(octa.density, rel=0.02)
    d, _ = p.tree.query(p.points, k=2)
    assert d[:, 1].min() == pytest.approx(math.sqrt(2 - math.sqrt(2)), abs=1e-9)


def test_shifted_model_set(fib):
    p = model_set_points(fib, 30.0, shift=[0.25], internal_shift=[0.1])
    x, y = star_map(fib, p.labels.T)
    assert np.allclose(x[0] + 0.25, p.points[:, 0])
    assert fib.window.contains((y + 0.1).reshape(-1, 1)).all()


def test_octagonal_rotation_labels(octa):
    q = np.array(list(itertools.product(range(-2, 3), repeat=4)))
    x = q @ octa.basis[:2].T
    rot = np.array([[math.cos(math.pi / 4), -math.sin(math.pi / 4)], [math.sin(math.pi / 4), math.cos(math.pi / 4)]])
    assert np.allclose(octagonal_rotation_labels(q) @ octa.basis[:2].T, x @ rot.T, atol=1e-12)


def test_fourier_module_enumeration(fib):
    m = fourier_module(fib, 1.0, 30.0)
    # brute-force search over the dual lattice
    best = []
    for q in itertools.product(range(-20, 21), repeat=2):
        k, ks = fib.dual_basis @ np.array(q)
        if abs(k) <= 1.0 and abs(ks) <= 30.0:
            best.append(round(abs(k), 12))
    assert sorted(best) == sorted(np.round(np.abs(m.k[:, 0]), 12).tolist())
    assert abs(m.k[1, 0]) == pytest.approx(0.40996266268763737, rel=1e-12)
    assert m.tail_bound >= 0


def test_dual_basis_pairing(octa, fib):
    for c in (fib, octa):
        assert np.allclose(c.dual_basis.T @ c.basis, 2 * np.pi * np.eye(c.total_dim), atol=1e-12)


def test_rejects_non_injective_projection():
    with pytest.raises(SchemeError):
        cps_new(np.array([[1.0, 0.0], [0.0, 1.0]]), Interval(-1.0, 1.0))


def test_density_warning_for_rational_internal_direction():
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        cps_new(np.array([[1.0, math.sqrt(2)], [1.0, 2.0]]), Interval(0.0, 1.5))
    assert any(issubclass(w.category, DensityWarning) for w in rec)


def test_singular_basis():
    with pytest.raises(SchemeError):
        cps_new(np.ones((2, 2)), Interval(0.0, 1.0))


def test_json_round_trip(tmp_path, octa):
    path = tmp_path / "octa.json"
    path.write_text(json.dumps(octa.to_json()))
    back = load_scheme(path)
    assert np.allclose(back.basis, octa.basis)
    assert back.window.volume == pytest.approx(octa.window.volume)
    with pytest.raises(SchemeError):
        scheme_from_json({"phys_dim": 1})


def test_unknown_builtin():
    with pytest.raises(SchemeError):
        builtin("penrose")
