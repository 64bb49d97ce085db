"""Distance-set experiments on carpet supports.

The support of a weight table is approximated by a finite point cloud
(sampled or one point per positive cell), its pairwise distances are
collected under a pair budget, and the box-counting slope of the distance
values estimates the dimension of the distance set.  Box counting is a
one-sided desk check: it bounds the distance-set dimension from below at
the chosen scales, it does not reproduce Hausdorff values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .dimension import cell_atoms, exact_dimension, support_dimension
from .errors import BudgetExceeded, DegenerateRange, TooFewPoints
from .scenery import PhaseState, coded_point
from .symbolic import BernoulliSpec, sample_point

DIRECTION_BINS = 64


@dataclass
class PointCloud:
    """Deduplicated points of the coded support with their provenance."""

    points: np.ndarray  # (N, 2)
    depth: int
    spec: BernoulliSpec
    seed: Optional[int] = None

    def __len__(self) -> int:
        return len(self.points)


def sample_support(spec: BernoulliSpec, mode: str = "exhaustive",
                   depth: int = 8, count: int = 10000, seed: int = 0,
                   phase: Optional[PhaseState] = None,
                   budget: int = 4_000_000) -> PointCloud:
    """Finite approximation of the support.

    ``exhaustive`` places one point at the corner of every positive
    depth-``depth`` cell; ``monte-carlo`` codes ``count`` sampled symbolic
    points.  Points are deduplicated.
    """
    if phase is None:
        phase = PhaseState.create(spec.m, spec.n, 0)
    if mode == "exhaustive":
        x, y, _, _ = cell_atoms(spec, depth, phase, budget)
        pts = np.unique(np.column_stack([x, y]), axis=0)
        return PointCloud(pts, depth, spec, None)
    if mode != "monte-carlo":
        raise ValueError(f"unknown mode {mode!r}")
    if count > budget:
        raise BudgetExceeded(f"{count} sample points exceed budget {budget}")
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    pts = np.empty((count, 2))
    for a in range(count):
        p = sample_point(spec, rng, depth)
        pts[a] = coded_point(p, spec.m, spec.n)
    pts = np.unique(pts, axis=0)
    return PointCloud(pts, depth, spec, seed)


@dataclass
class DistanceSet:
    distances: np.ndarray  # sorted, positive
    n_pairs: int
    direction_hist: np.ndarray  # occupancy over DIRECTION_BINS arcs of the circle
    direction_coverage: bool
    selected_pair: Optional[tuple[int, int]] = None


def _pair_indices(n_points: int, budget: int, rng: np.random.Generator):
    total = n_points * (n_points - 1) // 2
    if total <= budget:
        a, b = np.triu_indices(n_points, k=1)
        return a, b
    # distinct unordered pairs from the index grid: draw flat indices and
    # deduplicate (memory stays O(budget) even for huge index grids)
    flat = np.unique(rng.integers(0, total, size=budget, dtype=np.int64))
    # invert the triangular enumeration: pair (a, b), a < b
    n = n_points
    a = (n - 2 - np.floor(
        np.sqrt(-8.0 * flat + 4.0 * n * (n - 1) - 7) / 2.0 - 0.5
    )).astype(np.int64)
    row_start = a * (n - 1) - a * (a - 1) // 2
    a -= flat < row_start  # correct float-sqrt off-by-one
    row_start = a * (n - 1) - a * (a - 1) // 2
    row_end = (a + 1) * (n - 1) - (a + 1) * a // 2
    a += flat >= row_end
    row_start = a * (n - 1) - a * (a - 1) // 2
    b = flat - row_start + a + 1
    return a, b


def distance_set_build(cloud: PointCloud, pair_budget: int = 10_000_000,
                       seed: int = 0,
                       target_angle: Optional[float] = None,
                       angle_tol: float = 0.05) -> DistanceSet:
    """Pairwise distances with direction diagnostics.

    The direction histogram covers the full circle in ``DIRECTION_BINS``
    arcs (each unordered pair contributes both opposite directions); the
    coverage flag reports whether every arc is hit.  When ``target_angle``
    is given the closest sampled pair direction within ``angle_tol`` is
    returned, mirroring the pair-selection step that picks a good
    projection direction.
    """
    if len(cloud) < 2:
        raise TooFewPoints("need at least two points")
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    a, b = _pair_indices(len(cloud), pair_budget, rng)
    diffs = cloud.points[b] - cloud.points[a]
    dist = np.hypot(diffs[:, 0], diffs[:, 1])
    keep = dist > 0
    diffs, dist = diffs[keep], dist[keep]
    a, b = a[keep], b[keep]
    ang = np.arctan2(diffs[:, 1], diffs[:, 0])  # in (-pi, pi]
    bins = ((ang + math.pi) / (2 * math.pi) * DIRECTION_BINS).astype(np.int64)
    bins = np.clip(bins, 0, DIRECTION_BINS - 1)
    hist = np.zeros(DIRECTION_BINS, dtype=np.int64)
    np.add.at(hist, bins, 1)
    np.add.at(hist, (bins + DIRECTION_BINS // 2) % DIRECTION_BINS, 1)
    selected = None
    if target_angle is not None:
        delta = np.abs((ang - target_angle + math.pi) % (2 * math.pi) - math.pi)
        delta = np.minimum(delta, np.abs(delta - math.pi))
        best = int(np.argmin(delta))
        if delta[best] <= angle_tol:
            selected = (int(a[best]), int(b[best]))
    return DistanceSet(
        distances=np.sort(dist),
        n_pairs=int(len(dist)),
        direction_hist=hist,
        direction_coverage=bool(np.all(hist > 0)),
        selected_pair=selected,
    )


def box_dim_estimate(values: np.ndarray, scales: Sequence[float]) -> float:
    """Box-counting slope of a set of reals over the given scales.

    Counts occupied cells of the eps-grid for each eps and fits
    log N_eps against log(1/eps) by least squares.
    """
    values = np.asarray(values, dtype=float)
    if len(scales) < 2:
        raise DegenerateRange("need at least two scales")
    if len(values) == 0:
        raise TooFewPoints("empty value set")
    xs, ys = [], []
    for eps in scales:
        n_eps = len(np.unique(np.floor(values / eps).astype(np.int64)))
        xs.append(math.log(1.0 / eps))
        ys.append(math.log(n_eps))
    xs = np.array(xs)
    ys = np.array(ys)
    den = ((xs - xs.mean()) ** 2).sum()
    if den == 0:
        raise DegenerateRange("degenerate scale range")
    return float(((xs - xs.mean()) * (ys - ys.mean())).sum() / den)


def log_scale_range(eps_min: float, eps_max: float, count: int = 6) -> list[float]:
    return list(np.exp(np.linspace(math.log(eps_min), math.log(eps_max), count)))


def cantor_endpoints(depth: int) -> np.ndarray:
    """Endpoints of the middle-thirds construction, the calibration oracle."""
    pts = np.array([0.0, 1.0])
    for _ in range(depth):
        pts = np.concatenate([pts / 3.0, pts / 3.0 + 2.0 / 3.0])
    return np.unique(pts)


@dataclass
class DistsetReport:
    spec: BernoulliSpec
    depth: int
    n_points: int
    n_pairs: int
    eps_min: float
    eps_max: float
    dim_mu_exact: float
    dim_support: float
    dim_distance_estimate: float
    direction_coverage: bool
    seed: int

    def csv_row(self) -> dict:
        return {
            "m": self.spec.m,
            "n": self.spec.n,
            "dim_mu_exact": self.dim_mu_exact,
            "depth": self.depth,
            "n_points": self.n_points,
            "n_pairs": self.n_pairs,
            "eps_min": self.eps_min,
            "eps_max": self.eps_max,
            "dim_D_estimate": self.dim_distance_estimate,
            "direction_coverage": self.direction_coverage,
            "seed": self.seed,
        }


def distset_experiment(spec: BernoulliSpec, depth: int, scales: Sequence[float],
                       seed: int = 0, mode: str = "exhaustive",
                       count: int = 20000,
                       pair_budget: int = 10_000_000) -> DistsetReport:
    """End-to-end distance-set run for one weight table."""
    cloud = sample_support(spec, mode=mode, depth=depth, count=count, seed=seed)
    if len(cloud) == 1:
        return DistsetReport(
            spec, depth, 1, 0, min(scales), max(scales),
            exact_dimension(spec), support_dimension(spec), 0.0, False, seed,
        )
    ds = distance_set_build(cloud, pair_budget=pair_budget, seed=seed)
    dim_d = box_dim_estimate(ds.distances, scales)
    return DistsetReport(
        spec=spec,
        depth=depth,
        n_points=len(cloud),
        n_pairs=ds.n_pairs,
        eps_min=min(scales),
        eps_max=max(scales),
        dim_mu_exact=exact_dimension(spec),
        dim_support=support_dimension(spec),
        dim_distance_estimate=dim_d,
        direction_coverage=ds.direction_coverage,
        seed=seed,
    )
