import math

import numpy as np
import pytest

import carpetlab as cl
from carpetlab import (
    PointCloud,
    TooFewPoints,
    box_dim_estimate,
    cantor_endpoints,
    distance_set_build,
    distset_experiment,
    log_scale_range,
    sample_support,
)

CANTOR_DIM = math.log(2) / math.log(3)


def test_sample_support_point_mass(pointmass):
    cloud = sample_support(pointmass, "exhaustive", depth=5)
    assert len(cloud) == 1


def test_sample_support_uniform_counts(u23):
    # Delta-cell counts along the t=0 phase orbit: m, mn, m -> 2*6*2 = 24
    cloud = sample_support(u23, "exhaustive", depth=3)
    assert len(cloud) == 24


def test_sample_support_carpet_counts(c1):
    # positive cells: 3 digit pairs at paired levels, 2 column letters beyond
    for depth in (4, 6):
        ell = cl.PhaseState.create(2, 3, 0).ell(depth)
        cloud = sample_support(c1, "exhaustive", depth=depth)
        assert len(cloud) == 3 ** ell * 2 ** (depth - ell)


def test_sample_support_monte_carlo_deterministic(c1):
    a = sample_support(c1, "monte-carlo", depth=8, count=500, seed=3)
    b = sample_support(c1, "monte-carlo", depth=8, count=500, seed=3)
    assert np.array_equal(a.points, b.points)


def test_distance_set_two_points(u23):
    cloud = PointCloud(np.array([[0.0, 0.0], [1.0, 1.0]]), 1, u23)
    ds = distance_set_build(cloud)
    assert ds.distances.tolist() == [pytest.approx(math.sqrt(2))]
    assert not ds.direction_coverage


def test_distance_set_collinear_cloud(u23):
    pts = np.column_stack([np.linspace(0, 1, 40), np.zeros(40)])
    ds = distance_set_build(PointCloud(pts, 1, u23))
    assert not ds.direction_coverage
    assert ds.direction_hist.sum() > 0
    assert (ds.direction_hist > 0).sum() == 2  # one direction and its opposite


def test_distance_set_coverage_uniform(u23):
    # the 24-point depth-3 grid leaves empty arcs; 864 points at depth 5
    # are the first full-square cloud covering all 64 arcs
    ds3 = distance_set_build(sample_support(u23, "exhaustive", depth=3))
    assert (ds3.direction_hist > 0).sum() == 44
    ds5 = distance_set_build(sample_support(u23, "exhaustive", depth=5))
    assert ds5.direction_coverage


def test_distance_set_too_few(u23):
    with pytest.raises(TooFewPoints):
        distance_set_build(PointCloud(np.zeros((1, 2)), 1, u23))


def test_distance_set_pair_budget(u23):
    cloud = sample_support(u23, "exhaustive", depth=4)  # 144 points
    ds = distance_set_build(cloud, pair_budget=500, seed=1)
    assert ds.n_pairs <= 500


def test_distance_set_pair_selection(u23):
    cloud = sample_support(u23, "exhaustive", depth=3)
    ds = distance_set_build(cloud, target_angle=0.5, angle_tol=0.05)
    a, b = ds.selected_pair
    d = cloud.points[b] - cloud.points[a]
    ang = math.atan2(d[1], d[0])
    delta = abs((ang - 0.5 + math.pi) % (2 * math.pi) - math.pi)
    assert min(delta, abs(delta - math.pi)) <= 0.05


def test_distances_isometry_invariant(c1):
    cloud = sample_support(c1, "exhaustive", depth=6)
    theta = 0.7
    rot = np.array([[math.cos(theta), -math.sin(theta)],
                    [math.sin(theta), math.cos(theta)]])
    moved = PointCloud(cloud.points @ rot.T + np.array([0.3, -1.2]), 6, c1)
    d1 = distance_set_build(cloud, seed=9).distances
    d2 = distance_set_build(moved, seed=9).distances
    assert np.allclose(np.sort(d1), np.sort(d2), atol=1e-12)


def test_distance_monotonicity_under_union(u23):
    pts1 = np.array([[0.0, 0.0], [0.5, 0.0], [0.0, 0.25]])
    pts2 = np.array([[0.9, 0.9], [0.1, 0.8]])
    d1 = distance_set_build(PointCloud(pts1, 1, u23)).distances
    d2 = distance_set_build(PointCloud(pts2, 1, u23)).distances
    both = distance_set_build(PointCloud(np.vstack([pts1, pts2]), 1, u23)).distances
    union = set(np.round(np.concatenate([d1, d2]), 12))
    assert union <= set(np.round(both, 12))


def test_box_dim_finite_set_below_separation():
    vals = np.array([0.0, 0.25, 0.5, 0.75])
    assert box_dim_estimate(vals, [0.01, 0.001]) == pytest.approx(0.0)


def test_box_dim_uniform_oracle():
    rng = np.random.Generator(np.random.Philox(key=np.uint64(51)))
    vals = rng.random(100000)
    d = box_dim_estimate(vals, [2.0 ** -j for j in range(4, 11)])
    assert abs(d - 1.0) <= 0.05


def test_box_dim_cantor_oracle():
    pts = cantor_endpoints(10)
    d = box_dim_estimate(pts, [3.0 ** -j for j in range(3, 9)])
    assert abs(d - CANTOR_DIM) <= 0.08


def test_box_dim_scale_consistency_cantor():
    pts = cantor_endpoints(10)
    base = box_dim_estimate(pts, [3.0 ** -j for j in range(3, 8)])
    finer = box_dim_estimate(pts, [3.0 ** -j for j in range(3, 9)])
    assert abs(base - finer) <= 0.05


def test_distset_estimate_monotone_in_depth(c1):
    scales = log_scale_range(2.0 ** -8, 2.0 ** -4, 5)
    shallow = distset_experiment(c1, 6, scales, seed=2).dim_distance_estimate
    deep = distset_experiment(c1, 8, scales, seed=2).dim_distance_estimate
    assert deep >= shallow - 0.05


def test_distset_experiment_point_mass(pointmass):
    rep = distset_experiment(pointmass, 5, [0.1, 0.01], seed=1)
    assert rep.dim_distance_estimate == 0.0
    assert rep.n_points == 1


def test_distset_report_csv_columns(c1):
    rep = distset_experiment(c1, 5, log_scale_range(2.0 ** -6, 2.0 ** -3, 4), seed=4)
    row = rep.csv_row()
    assert list(row) == ["m", "n", "dim_mu_exact", "depth", "n_points", "n_pairs",
                         "eps_min", "eps_max", "dim_D_estimate",
                         "direction_coverage", "seed"]
