import math

import numpy as np
import pytest

from aperiodica import (
    delone_params,
    delone_to_seq,
    difference_set,
    fibonacci_word,
    meyer_diagnostic,
    model_set_points,
    random_tiling,
    seq_to_delone,
)
from aperiodica.pointset import DegenerateSampleError, PointSet, Region, cluster_ids, ordered_pairs
from aperiodica.patches import factor_complexity

TAU = (1 + math.sqrt(5)) / 2


def test_seq_to_delone_positions():
    p = seq_to_delone("ab|ba", {"a": 1.0, "b": 2.0})
    assert np.allclose(p.points[:, 0], [-3, -2, 0, 2, 3])
    assert p.region.inner_radius == pytest.approx(3.0)


def test_seq_to_delone_exact_labels():
    p = seq_to_delone("ab|ab", {"a": 1.0, "b": math.sqrt(2)}, exact_labels=True)
    assert np.allclose(p.labels @ p.label_map.T, p.points)


def test_seq_to_delone_errors():
    with pytest.raises(ValueError):
        seq_to_delone("abab", {"a": 1.0, "b": 2.0})
    with pytest.raises(ValueError):
        seq_to_delone("ab|c", {"a": 1.0, "b": 2.0})
    with pytest.raises(ValueError):
        seq_to_delone("a|a", {"a": -1.0})


def test_delone_params_of_integers(z_100):
    d = delone_params(z_100)
    assert d.packing_radius == pytest.approx(0.5)
    assert d.covering_radius == pytest.approx(0.5, abs=1e-6)


def test_delone_params_of_fibonacci(fib_2000):
    d = delone_params(fib_2000)
    assert d.packing_radius == pytest.approx(0.5)
    assert d.covering_radius == pytest.approx(TAU / 2, abs=1e-6)


def test_difference_set_brute_force(fib):
    p = model_set_points(fib, 25.0)
    x = p.points[:, 0]
    d = (x[:, None] - x[None, :]).ravel()
    d = d[np.abs(d) <= 6.0]
    vals, counts = np.unique(np.round(d, 9), return_counts=True)
    ds = difference_set(p, 6.0)
    assert len(ds) == len(vals)
    for v, c in zip(vals, counts):
        assert ds.multiplicity([v]) == c


def test_meyer_diagnostic_fibonacci_vs_random(fib_2000, rand_tiling):
    # brute force over radius 300 gives tau - 2 + 1 = 0.3819660112501...
    assert meyer_diagnostic(fib_2000, 10.0) == pytest.approx(0.3819660112501051, abs=1e-9)
    assert meyer_diagnostic(fib_2000, 20.0) == pytest.approx(0.3819660112501051, abs=1e-9)
    shrink = [meyer_diagnostic(rand_tiling, s) for s in (5.0, 20.0, 50.0)]
    assert shrink[-1] < shrink[0] / 4


def test_meyer_diagnostic_empty():
    p = PointSet(1, np.zeros((0, 1)), Region.ball(1.0))
    with pytest.raises(DegenerateSampleError):
        meyer_diagnostic(p, 1.0)


def test_ordered_pairs_excludes_diagonal(z_100):
    i, j = ordered_pairs(z_100, 2.0)
    assert np.all(i != j)
    assert len(i) == 2 * (200 + 199)


def test_cluster_ids_transitive():
    ids = cluster_ids(np.array([[0.0], [0.4], [0.8], [5.0]]), 0.5)
    assert ids.tolist() == [0, 0, 0, 1]


def test_fibonacci_word_prefix():
    assert fibonacci_word(13) == "abaababaabaab"


def test_sturmian_round_trip(fib):
    """Model set -> patch sequence -> gap word has n + 1 factors of length n."""
    p = model_set_points(fib, 1500.0)
    seq = delone_to_seq(p, 2 * TAU)
    ids, lengths = seq.gap_word()
    assert sorted(lengths) == pytest.approx([1.0, TAU])
    for n in range(1, 21):
        assert factor_complexity(ids, n) == n + 1
    assert seq.positions[seq.origin] == 0.0


def test_sequence_round_trip_recovers_word():
    word = fibonacci_word(400)
    p = seq_to_delone((word[::-1][:200][::-1], word[:200]), {"a": TAU, "b": 1.0})
    ids, lengths = delone_to_seq(p, 2 * TAU).gap_word()
    back = "".join("a" if lengths[k] > 1.5 else "b" for k in ids)
    assert back in word[::-1][:200][::-1] + word[:200]


def test_random_tiling_reproducible():
    a, b = random_tiling(200, seed=4), random_tiling(200, seed=4)
    assert np.array_equal(a.points, b.points)
    assert not np.array_equal(a.points, random_tiling(200, seed=5).points)
    gaps = np.unique(np.round(np.diff(a.points[:, 0]), 9))
    assert np.allclose(gaps, [1.0, math.sqrt(2)])


def test_translate_and_restrict(fib_2000):
    q = fib_2000.restrict(100.0)
    assert np.all(q.norms <= 100.0)
    t = q.translate([0.5])
    assert np.allclose(t.points, q.points + 0.5)
