import math

import numpy as np
import pytest

from echcap.models import ConcaveRegion
from echcap.services.geometry import (
    RegionError,
    apply_unimodular,
    make_region,
    make_unimodular,
    min_functional,
    omega0_alpha_grid,
    omega0_point,
    omega0_region,
    polygon_area,
    region_area,
    region_contains,
    region_from_json,
    region_to_json,
    sample_omega0,
    triangle_region,
)


def test_omega0_point_special_values():
    for alpha, expected in [(0.0, (0.0, 2 * math.pi)), (math.pi, (2.0, 2.0)), (2 * math.pi, (2 * math.pi, 0.0))]:
        p = omega0_point(alpha)
        assert (p.x, p.y) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("alpha", [-0.1, 2 * math.pi + 1e-6])
def test_omega0_point_out_of_range(alpha):
    with pytest.raises(RegionError):
        omega0_point(alpha)


def test_alpha_grid_hits_pi_for_even_n():
    grid = omega0_alpha_grid(64)
    assert grid[0] == 0.0 and grid[-1] == 2 * math.pi
    assert grid[32] == math.pi
    assert np.all(np.diff(grid) > 0)


def test_sample_omega0_is_valid_and_contains_midpoint():
    r = sample_omega0(256)
    assert len(r) == 257
    np.testing.assert_array_equal(r.vertices[128], [2.0, 2.0])
    assert r.vertices[0, 0] == 0.0 and r.vertices[-1, 1] == 0.0


def test_sample_omega0_rejects_tiny_n():
    with pytest.raises(RegionError):
        sample_omega0(1)


def test_region_area_of_omega0(omega0_8192):
    assert region_area(omega0_8192) == pytest.approx(math.pi ** 2, abs=1e-4)


def test_region_area_of_triangle():
    assert region_area(triangle_region(2.0, 3.0)) == pytest.approx(3.0)


@pytest.mark.parametrize("vertices", [
    [[0.1, 1.0], [1.0, 0.0]],                 # does not start on the y-axis
    [[0.0, 1.0], [0.5, 1.0], [1.0, 0.0]],     # y not strictly decreasing
    [[0.0, 1.0], [0.8, 0.8], [1.0, 0.0]],     # bulges outward
    [[0.0, 1.0], [math.nan, 0.5], [1.0, 0.0]],
])
def test_make_region_rejects_invalid_chains(vertices):
    with pytest.raises(RegionError):
        make_region(vertices)


def test_region_is_read_only():
    r = triangle_region(1.0)
    with pytest.raises(ValueError):
        r.vertices[0, 0] = 1.0


def test_min_functional_reports_flat_contact_range():
    r = make_region([[0.0, 3.0], [1.0, 2.0], [2.0, 1.0], [3.0, 0.0]])
    value, first, last = min_functional(r, 1.0, 1.0)
    assert value == pytest.approx(3.0)
    assert (first, last) == (0, 3)


def test_unimodular_requires_determinant_one():
    with pytest.raises(RegionError):
        make_unimodular(((2, 0), (0, 1)))


def test_unimodular_shear_preserves_area():
    chain = np.array([[0.0, 2.0], [1.0, 0.5], [2.0, 0.0]])
    shear = make_unimodular(((1, 0), (1, 1)), (0.0, -1.0))
    mapped = apply_unimodular(shear, chain)
    np.testing.assert_allclose(mapped[0], [0.0, 1.0])
    assert abs(polygon_area(mapped)) == pytest.approx(abs(polygon_area(chain)))


def test_region_contains():
    r = triangle_region(1.0)
    assert region_contains(r, 0.25, 0.25)
    assert region_contains(r, 0.5, 0.5)
    assert not region_contains(r, 0.6, 0.6)
    assert not region_contains(r, -0.1, 0.1)


def test_region_json_round_trip_and_literal():
    r = make_region([[0.0, 2.0], [1.0, 0.5], [2.0, 0.0]])
    again = region_from_json(region_to_json(r))
    assert isinstance(again, ConcaveRegion)
    np.testing.assert_array_equal(again.vertices, r.vertices)
    assert len(omega0_region("omega0:16")) == 17
    with pytest.raises(RegionError):
        omega0_region("omega1:16")


@pytest.mark.parametrize("n", [2048, 3001, 4096, 8192, 16384])
def test_sample_omega0_large_n_is_swap_symmetric(n):
    r = sample_omega0(n)
    assert len(r) == n + 1
    np.testing.assert_array_equal(r.vertices, r.vertices[::-1, ::-1])


def test_omega0_point_swap_symmetry_on_grid():
    for alpha in np.linspace(0.0, 2 * math.pi, 97):
        p = omega0_point(float(alpha))
        q = omega0_point(float(max(0.0, 2 * math.pi - alpha)))
        assert (p.x, p.y) == pytest.approx((q.y, q.x), abs=1e-12)


def test_omega0_point_near_zero_matches_leading_term():
    alpha = 1e-4
    p = omega0_point(alpha)
    assert p.x == pytest.approx(alpha ** 3 / 12.0, rel=1e-6)
    assert p.y < 2 * math.pi


def test_omega0_chain_area_shrinks_toward_pi_squared():
    # vertices lie on a convex curve, so each refinement cuts a corner off the chain
    areas = [region_area(sample_omega0(n)) for n in (64, 128, 256, 512, 1024, 2048, 4096)]
    assert np.all(np.diff(areas) <= 1e-12)
    assert areas[-1] >= math.pi ** 2 - 1e-9
    assert areas[-1] == pytest.approx(math.pi ** 2, abs=1e-4)


def test_apply_unimodular_identity_and_area_on_region():
    r = sample_omega0(64)
    identity = make_unimodular(((1, 0), (0, 1)))
    np.testing.assert_array_equal(apply_unimodular(identity, r), r.vertices)
    shear = make_unimodular(((1, 1), (0, 1)), (0.5, -0.25))
    closed = np.vstack(([[0.0, 0.0]], r.vertices))
    mapped = apply_unimodular(shear, closed)
    assert abs(polygon_area(mapped)) == pytest.approx(region_area(r), rel=1e-12)
