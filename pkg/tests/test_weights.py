import math

import numpy as np
import pytest

from echcap.services.geometry import make_region, region_area, triangle_region
from echcap.services.weights import (
    ExpansionExhausted,
    brute_force_weights,
    largest_triangle,
    split_region,
    weight_sequence,
)

W2 = 3 * math.sqrt(3) - 4
W4 = 4 * math.sqrt(2) - 3 * math.sqrt(3)
PHI = (1 + math.sqrt(5)) / 2


def test_largest_triangle_of_triangle():
    a, first, last = largest_triangle(triangle_region(4.0, 3 * math.sqrt(3)))
    assert a == pytest.approx(4.0)
    assert first == last == 1


def test_largest_triangle_rejects_tiny_region():
    with pytest.raises(ExpansionExhausted):
        largest_triangle(triangle_region(1e-7), area_min=1e-12)


def test_split_region_of_ellipsoid_triangle():
    r = triangle_region(4.0, 3 * math.sqrt(3))
    upper, lower = split_region(r, 4.0, 1, 1)
    assert lower is None
    np.testing.assert_allclose(upper.vertices, [[0.0, W2], [4.0, 0.0]], atol=1e-12)


def test_flat_contact_leaves_no_children():
    r = make_region([[0.0, 3.0], [1.0, 2.0], [3.0, 0.0]])
    a, first, last = largest_triangle(r)
    assert a == pytest.approx(3.0)
    assert split_region(r, a, first, last) == (None, None)


def test_ellipsoid_weights():
    seq = weight_sequence(triangle_region(4.0, 3 * math.sqrt(3)), 4)
    np.testing.assert_allclose(seq.weights, [4.0, W2, W2, W2], rtol=1e-12)


def test_omega0_weights(omega0_8192):
    w = weight_sequence(omega0_8192, 5).weights
    assert w[0] == pytest.approx(4.0, abs=1e-5)
    assert w[1] == pytest.approx(W2, abs=1e-4)
    assert w[2] == pytest.approx(W2, abs=1e-4)
    assert w[3] == pytest.approx(W4, abs=1e-3)
    assert w[4] == pytest.approx(W4, abs=1e-3)


def test_weights_are_non_increasing(omega0_4096):
    w = np.array(weight_sequence(omega0_4096, 200).weights)
    assert np.all(np.diff(w) <= 1e-12)


def test_golden_triangle_matches_recursive_expansion():
    r = triangle_region(1.0, PHI)
    queued = weight_sequence(r, 20).weights
    recursive = brute_force_weights(r, depth=20)
    np.testing.assert_allclose(queued, recursive[:20], rtol=1e-12)
    expected = [PHI ** -k for k in range(15)]
    np.testing.assert_allclose(queued[:15], expected, rtol=1e-6)


def test_rational_triangle_expansion_ends_naturally():
    seq = weight_sequence(triangle_region(2.0, 3.0), 10)
    assert seq.weights == pytest.approx((2.0, 1.0, 1.0))
    assert not seq.truncated
    assert seq.area_covered == pytest.approx(seq.region_area)


def test_w_min_truncates():
    seq = weight_sequence(triangle_region(2.0, 3.0), 10, w_min=1.5)
    assert seq.weights == pytest.approx((2.0,))
    assert seq.truncated


@pytest.mark.slow
def test_area_is_exhausted(omega0_8192):
    seq = weight_sequence(omega0_8192, 2000)
    covered = np.cumsum(np.square(seq.weights)) / 2
    area = region_area(omega0_8192)
    assert np.all(np.diff(covered) >= 0)
    assert covered[-1] <= area + 1e-12
    assert covered[-1] >= 0.995 * area


def test_invalid_arguments():
    r = triangle_region(1.0)
    with pytest.raises(ValueError):
        weight_sequence(r, 0)
    with pytest.raises(ValueError):
        weight_sequence(r, 3, w_min=-1.0)


def random_region(rng, edges):
    slopes = -np.sort(rng.uniform(0.05, 20.0, edges))[::-1]
    dx = rng.uniform(0.1, 1.0, edges)
    dy = slopes * dx
    xs = np.concatenate(([0.0], np.cumsum(dx)))
    ys = -np.sum(dy) + np.concatenate(([0.0], np.cumsum(dy)))
    ys[-1] = 0.0
    return make_region(np.column_stack((xs, ys)))


def test_splits_conserve_area_and_shrink_weights():
    rng = np.random.default_rng(7)
    for _ in range(100):
        r = random_region(rng, int(rng.integers(2, 12)))
        a, first, last = largest_triangle(r)
        children = [c for c in split_region(r, a, first, last) if c is not None]
        total = a * a / 2 + sum(region_area(c) for c in children)
        assert total == pytest.approx(region_area(r), rel=1e-9)
        for child in children:
            assert largest_triangle(child)[0] <= a + 1e-12


def test_omega0_weights_come_in_pairs(omega0_8192):
    w = weight_sequence(omega0_8192, 41).weights
    for m in range(1, 21):
        assert w[2 * m - 1] == pytest.approx(w[2 * m], abs=1e-10)
