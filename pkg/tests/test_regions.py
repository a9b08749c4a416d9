import math

import numpy as np
import pytest
from scipy.spatial import ConvexHull

from avwiretap.channel import MainChannel, random_full_rank_channel
from avwiretap.rates import (
    bc_region,
    capacity_term,
    convex_hull_2d,
    mac_region,
    region_sum_sdof,
)


def test_hull_single_point_closure():
    hull = convex_hull_2d([(1.0, 1.0)])
    assert sorted(map(tuple, hull)) == [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)]


def test_hull_drops_interior_point():
    hull = convex_hull_2d([(2.0, 0.0), (0.0, 2.0), (1.0, 1.0)])
    assert sorted(map(tuple, hull)) == [(0.0, 0.0), (0.0, 2.0), (2.0, 0.0)]


def test_hull_collinear_collapse():
    hull = convex_hull_2d([(1.0, 0.0), (2.0, 0.0), (3.0, 0.0)])
    assert sorted(map(tuple, hull)) == [(0.0, 0.0), (3.0, 0.0)]


def test_hull_rejects_nan():
    with pytest.raises(ValueError):
        convex_hull_2d([(np.nan, 0.0)])


def test_hull_counterclockwise_and_matches_qhull(rng):
    # oracle: scipy's qhull on the same closed point set
    for _ in range(25):
        pts = rng.uniform(0.1, 5.0, size=(int(rng.integers(3, 12)), 2))
        mine = convex_hull_2d(pts)
        closed = np.vstack(
            [
                pts,
                np.column_stack([pts[:, 0], np.zeros(len(pts))]),
                np.column_stack([np.zeros(len(pts)), pts[:, 1]]),
                [[0.0, 0.0]],
            ]
        )
        ref = ConvexHull(closed)
        ref_vertices = sorted(map(tuple, np.round(closed[ref.vertices], 12)))
        assert sorted(map(tuple, np.round(mine, 12))) == ref_vertices
        # counterclockwise: positive signed area
        x, y = mine[:, 0], mine[:, 1]
        area = 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)
        assert area > 0


def _identity_pair():
    return MainChannel(np.eye(2)), MainChannel(np.eye(2))


def test_mac_region_alpha_one_corner():
    ch1, ch2 = _identity_pair()
    region = mac_region(ch1, ch2, pbar=102.0, n_eve=1, alpha_grid=[1.0])
    r1, r2 = region.raw_points[0]
    assert r1 == pytest.approx(2 * math.log2(26) - math.log2(101))
    assert r2 == 0.0


def test_mac_region_symmetric_split():
    ch1, ch2 = _identity_pair()
    region = mac_region(ch1, ch2, pbar=102.0, n_eve=1, alpha_grid=[0.5])
    expected = 0.5 * (2 * math.log2(51.5) - math.log2(203))
    assert region.raw_points[0] == pytest.approx((expected, expected))


def test_mac_region_collapses_when_eve_matches_antennas():
    ch1, ch2 = _identity_pair()
    region = mac_region(ch1, ch2, pbar=102.0, n_eve=2)
    assert np.allclose(region.raw_points, 0.0)
    assert np.array_equal(region.hull, [[0.0, 0.0]])


def test_mac_region_rejects_empty_grid():
    ch1, ch2 = _identity_pair()
    with pytest.raises(ValueError):
        mac_region(ch1, ch2, 102.0, 1, alpha_grid=[])


def test_bc_region_symmetric_triangle():
    ch1, ch2 = _identity_pair()
    region = bc_region(ch1, ch2, pbar=102.0, n_eve=1)
    corner = 2 * math.log2(26) - math.log2(101)
    assert sorted(map(tuple, np.round(region.hull, 10))) == sorted(
        map(tuple, np.round([(0.0, 0.0), (corner, 0.0), (0.0, corner)], 10))
    )


def test_bc_region_asymmetric_corner_formula():
    ch1 = MainChannel(np.eye(2))
    ch2 = MainChannel(np.diag([3.0, 1.0]))
    region = bc_region(ch1, ch2, pbar=102.0, n_eve=1)
    expected = max(
        capacity_term(9 * 100 / (10 * 2)) + capacity_term(100 / (2 * 2)) - math.log2(101),
        0.0,
    )
    assert region.raw_points[2][1] == pytest.approx(expected)


def test_bc_region_collapses_when_eve_matches_antennas():
    ch1, ch2 = _identity_pair()
    region = bc_region(ch1, ch2, pbar=102.0, n_eve=2)
    assert np.array_equal(region.hull, [[0.0, 0.0]])


def test_regions_shrink_as_eve_grows(rng):
    ch1 = random_full_rank_channel(2, 2, rng, max_condition=5)
    ch2 = random_full_rank_channel(2, 2, rng, max_condition=5)
    for builder in (mac_region, bc_region):
        big = builder(ch1, ch2, 200.0, 1)
        small = builder(ch1, ch2, 200.0, 2)
        for vertex in small.hull:
            assert big.contains(vertex, tol=1e-9)


def test_no_raw_point_dominates_a_frontier_vertex(rng):
    ch1 = random_full_rank_channel(2, 2, rng, max_condition=5)
    ch2 = random_full_rank_channel(2, 2, rng, max_condition=5)
    region = mac_region(ch1, ch2, 300.0, 1)
    for vx, vy in region.hull:
        if vx == 0.0 or vy == 0.0:
            continue  # axis corners come from the downward closure
        dominated = np.any(
            (region.raw_points[:, 0] > vx + 1e-9)
            & (region.raw_points[:, 1] > vy + 1e-9)
        )
        # a strictly dominated frontier vertex would mean the hull missed an
        # achievable pair
        assert not dominated


def test_region_sum_sdof_slopes():
    ch1, ch2 = _identity_pair()
    grid = [1e3, 1e4, 1e5, 1e6]
    mac_slope = region_sum_sdof(lambda p: mac_region(ch1, ch2, p, 1), grid)
    bc_slope = region_sum_sdof(lambda p: bc_region(ch1, ch2, p, 1), grid)
    assert mac_slope == pytest.approx(1.0, abs=0.05)
    assert bc_slope == pytest.approx(1.0, abs=0.05)
    flat = region_sum_sdof(lambda p: bc_region(ch1, ch2, p, 2), grid)
    assert flat == pytest.approx(0.0, abs=1e-9)


def test_region_half_convention_scaling():
    ch1, ch2 = _identity_pair()
    full = mac_region(ch1, ch2, 102.0, 1, alpha_grid=[0.25, 0.5, 0.75])
    half = mac_region(ch1, ch2, 102.0, 1, alpha_grid=[0.25, 0.5, 0.75], convention="half")
    assert np.allclose(half.raw_points, 0.5 * full.raw_points)
