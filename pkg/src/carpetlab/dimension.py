"""Entropy and dimension estimators, projections, and the expected
discrete projection dimension.

Dimensions are estimated from exact cell masses: the Shannon entropy of
the depth-k cell partition has a closed form (the digit coordinates are
independent), and a brute-force enumeration over cells serves as its
oracle.  Projected measures are discretized as weighted corner atoms of
positive-mass cells; their entropy at dyadic window scales yields slope
estimates of projection dimensions and the Monte Carlo expected discrete
dimension over the magnified-measure ensemble.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import (
    BudgetExceeded,
    DegenerateRange,
    ResolutionTooCoarse,
)
from .scenery import PhaseState, classify_alpha
from .symbolic import BernoulliSpec

DEFAULT_ATOM_BUDGET = 4_000_000


def shannon(weights: Iterable[Fraction]) -> float:
    """Shannon entropy in nats of an exact finite distribution."""
    h = 0.0
    for w in weights:
        x = float(w)
        if x > 0.0:
            h -= x * math.log(x)
    return h


def joint_entropy(spec: BernoulliSpec) -> float:
    return shannon(w for row in spec.p for w in row)


def marginal_entropy_i(spec: BernoulliSpec) -> float:
    return shannon(spec.q)


def marginal_entropy_j(spec: BernoulliSpec) -> float:
    return shannon(spec.r)


def exact_dimension(spec: BernoulliSpec) -> float:
    """Closed-form Hausdorff dimension of the Bernoulli measure.

    dim mu = H(p)/log n + (1/log m - 1/log n) H(q); degenerate
    (line-supported) weight tables reduce to the correct 1-D value.
    """
    hp = joint_entropy(spec)
    hq = marginal_entropy_i(spec)
    lm, ln_ = math.log(spec.m), math.log(spec.n)
    return hp / ln_ + (1.0 / lm - 1.0 / ln_) * hq


def support_dimension(spec: BernoulliSpec) -> float:
    """Hausdorff dimension of the supporting carpet: log_m sum_i t_i^alpha,
    with t_i the number of positive cells in column i."""
    alpha = math.log(spec.m) / math.log(spec.n)
    s = 0.0
    for i in range(spec.m):
        t = sum(1 for j in range(spec.n) if spec.p[i][j] > 0)
        if t:
            s += t ** alpha
    return math.log(s) / math.log(spec.m)


def partition_entropy(spec: BernoulliSpec, k: int, phase: PhaseState,
                      method: str = "closed") -> float:
    """Entropy (nats) of the depth-k cell partition of the unit square.

    A cell is [i|_k] x [j|_ell] with ell = ell_t(k); digits are independent
    across levels, so H_k = ell*H(p) + (k - ell)*H(q) exactly.  The
    ``enumerate`` method recomputes the sum -sum mu(A) log mu(A) over all
    positive cells and is meant as an oracle for small k.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    ell = phase.ell(k)
    if method == "closed":
        return ell * joint_entropy(spec) + (k - ell) * marginal_entropy_i(spec)
    if method != "enumerate":
        raise ValueError(f"unknown method {method!r}")
    pairs = [(i, j) for i in range(spec.m) for j in range(spec.n) if spec.p[i][j] > 0]
    singles = [i for i in range(spec.m) if spec.q[i] > 0]
    h = 0.0
    for paired in itertools.product(pairs, repeat=ell):
        base = Fraction(1)
        for i, j in paired:
            base *= spec.p[i][j]
        for tail in itertools.product(singles, repeat=k - ell):
            mass = base
            for i in tail:
                mass *= spec.q[i]
            x = float(mass)
            h -= x * math.log(x)
    return h


def entropy_dimension_estimate(spec: BernoulliSpec, phase: PhaseState,
                               k_lo: int = 8, k_hi: int = 14) -> float:
    """Dimension estimate from the growth of partition entropies.

    Each depth-k partition lives at geometric mean scale
    sqrt(width * height) = exp(-(k log m + ell log n)/2); the estimate is
    the least-squares slope through the origin of H_k against that
    log-scale over the window [k_lo, k_hi].
    """
    if k_hi < k_lo:
        raise DegenerateRange("empty fit window")
    num = den = 0.0
    lm, ln_ = math.log(spec.m), math.log(spec.n)
    for k in range(k_lo, k_hi + 1):
        ell = phase.ell(k)
        x = 0.5 * (k * lm + ell * ln_)
        y = partition_entropy(spec, k, phase)
        num += x * y
        den += x * x
    return num / den


# ---------------------------------------------------------------------------
# Discrete measures and window entropy
# ---------------------------------------------------------------------------


@dataclass
class DiscreteMeasure1D:
    """Weighted atoms on the line at a stated resolution.

    ``core`` holds the locations before the scalar prefactor ``scale`` is
    applied, so rescaled projections can be compared atom-for-atom.
    """

    locations: np.ndarray
    weights: np.ndarray
    resolution: float
    scale: float = 1.0
    core: Optional[np.ndarray] = None

    def __post_init__(self):
        self.locations = np.asarray(self.locations, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)


@dataclass
class DiscreteMeasure2D:
    points: np.ndarray  # (N, 2)
    weights: np.ndarray
    resolution: float


def r_entropy(measure, r: float, max_centers: Optional[int] = None,
              seed: int = 0) -> float:
    """Window entropy -sum w_a log nu(W(x_a, r)) at window diameter r.

    ``W(x, r)`` is the open window of total width r about x (Euclidean
    disk of diameter r in 2-D).  Requires r above the stored resolution.
    Exhaustive over all atoms by default (deterministic); with
    ``max_centers`` the outer integral is Monte Carlo over centers drawn
    by weight (deterministic given ``seed``).
    """
    if r <= measure.resolution:
        raise ResolutionTooCoarse(
            f"window {r} at or below atom resolution {measure.resolution}"
        )
    if isinstance(measure, DiscreteMeasure2D):
        pts, w = measure.points, measure.weights
        centers, cw = _pick_centers(pts, w, max_centers, seed)
        half2 = (0.5 * r) ** 2
        out = 0.0
        step = max(1, int(4e7) // max(len(pts), 1))
        for a in range(0, len(centers), step):
            chunk = centers[a:a + step]
            d2 = ((chunk[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
            mass = (w[None, :] * (d2 < half2)).sum(axis=1)
            out -= float((cw[a:a + step] * np.log(mass)).sum())
        return out
    order = np.argsort(measure.locations, kind="stable")
    locs = measure.locations[order]
    w = measure.weights[order]
    csum = np.concatenate([[0.0], np.cumsum(w)])
    centers, cw = _pick_centers(locs, w, max_centers, seed)
    half = 0.5 * r
    lo = np.searchsorted(locs, centers - half, side="right")
    hi = np.searchsorted(locs, centers + half, side="left")
    mass = csum[hi] - csum[lo]
    return float(-(cw * np.log(mass)).sum())


def _pick_centers(locs, w, max_centers, seed):
    if max_centers is None or len(locs) <= max_centers:
        return locs, w
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    idx = rng.choice(len(locs), size=max_centers, p=w / w.sum())
    return locs[idx], np.full(max_centers, 1.0 / max_centers)


def entropy_slope(measure, scales: Sequence[float]) -> float:
    """Least-squares slope of H_r against log(1/r) over the given scales."""
    if len(scales) < 2:
        raise DegenerateRange("need at least two scales")
    xs = np.log(1.0 / np.asarray(scales, dtype=float))
    ys = np.array([r_entropy(measure, r) for r in scales])
    xbar, ybar = xs.mean(), ys.mean()
    den = ((xs - xbar) ** 2).sum()
    if den == 0:
        raise DegenerateRange("degenerate scale range")
    return float(((xs - xbar) * (ys - ybar)).sum() / den)


# ---------------------------------------------------------------------------
# Projections
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Projection:
    """A projection from the non-exceptional family x +/- n^-s y, or an axis.

    ``kind`` is "oblique", "pi1" (horizontal: keep x) or "pi2" (vertical:
    keep y); the oblique family covers every direction except those two.
    """

    kind: str
    s: float = 0.0
    sign: int = 1

    @staticmethod
    def oblique(s: float, sign: int = 1) -> "Projection":
        if sign not in (-1, 1):
            raise ValueError("sign must be +-1")
        return Projection("oblique", float(s), sign)

    @staticmethod
    def pi1() -> "Projection":
        return Projection("pi1")

    @staticmethod
    def pi2() -> "Projection":
        return Projection("pi2")

    def label(self) -> str:
        return f"{self.s:g}" if self.kind == "oblique" else self.kind

    def apply(self, x: np.ndarray, y: np.ndarray, n: int) -> np.ndarray:
        if self.kind == "pi1":
            return x
        if self.kind == "pi2":
            return y
        return x + self.sign * float(n) ** (-self.s) * y


def cell_atoms(spec: BernoulliSpec, k: int, phase: PhaseState,
               budget: int = DEFAULT_ATOM_BUDGET):
    """Corner atoms (x, y, weight) of the positive depth-k cells."""
    ell = phase.ell(k)
    pairs = [(i, j) for i in range(spec.m) for j in range(spec.n) if spec.p[i][j] > 0]
    singles = [i for i in range(spec.m) if spec.q[i] > 0]
    count = len(pairs) ** ell * len(singles) ** (k - ell)
    if count > budget:
        raise BudgetExceeded(f"{count} cells exceed the atom budget {budget}")
    x = np.zeros(1)
    y = np.zeros(1)
    w = np.ones(1)
    pm = spec.p_float()
    qf = np.array([float(v) for v in spec.q])
    for l in range(ell):
        xi = np.array([i for i, _ in pairs], dtype=float) * float(spec.m) ** -(l + 1)
        yj = np.array([j for _, j in pairs], dtype=float) * float(spec.n) ** -(l + 1)
        pw = np.array([pm[i][j] for i, j in pairs])
        x = (x[:, None] + xi[None, :]).ravel()
        y = (y[:, None] + yj[None, :]).ravel()
        w = (w[:, None] * pw[None, :]).ravel()
    for l in range(ell, k):
        xi = np.array(singles, dtype=float) * float(spec.m) ** -(l + 1)
        qw = qf[singles]
        x = (x[:, None] + xi[None, :]).ravel()
        y = np.repeat(y, len(singles))
        w = (w[:, None] * qw[None, :]).ravel()
    return x, y, w, ell


def project_measure(spec: BernoulliSpec, k: int, phase: PhaseState, proj: Projection,
                    rescale_phase: Optional[float] = None,
                    budget: int = DEFAULT_ATOM_BUDGET) -> DiscreteMeasure1D:
    """Push the depth-k cell approximation through a projection.

    With ``rescale_phase`` tau the measure is first renormalized by the
    hyperbolic matrix S_tau; for the oblique family the identity
    pi_s o S_tau = n^(-tau/2) pi_(s-tau) is applied exactly, so the atom
    ``core`` equals the unrescaled pi_(s-tau) atoms and only the recorded
    ``scale`` differs.
    """
    x, y, w, ell = cell_atoms(spec, k, phase, budget)
    n = spec.n
    if rescale_phase is None:
        sx = sy = 1.0
        eff_s = proj.s
    else:
        tau = float(rescale_phase)
        sx = float(n) ** (-tau / 2.0)
        sy = float(n) ** (tau / 2.0)
        eff_s = proj.s - tau
    if proj.kind == "pi1":
        core, scale = x, sx
        res = float(spec.m) ** (-k) * scale
    elif proj.kind == "pi2":
        core, scale = y, sy
        res = float(n) ** (-ell) * scale
    else:
        coeff = float(n) ** (-eff_s)
        core = x + proj.sign * coeff * y
        scale = sx
        res = (float(spec.m) ** (-k) + coeff * float(n) ** (-ell)) * scale
    return DiscreteMeasure1D(
        locations=scale * core, weights=w, resolution=res, scale=scale, core=core,
    )


# ---------------------------------------------------------------------------
# Expected discrete projection dimension
# ---------------------------------------------------------------------------


def _kron_weights(rows: Sequence[np.ndarray]) -> np.ndarray:
    w = np.ones(1)
    for r in rows:
        w = (w[:, None] * r[None, :]).ravel()
    return w


def _window_entropy_hist(hist: np.ndarray, half_bins: int) -> float:
    total = hist.sum()
    if total <= 0:
        return 0.0
    h = hist / total
    csum = np.concatenate([[0.0], np.cumsum(h)])
    n = len(h)
    idx = np.arange(n)
    lo = np.maximum(idx - half_bins + 1, 0)
    hi = np.minimum(idx + half_bins, n)
    mass = csum[hi] - csum[lo]
    occ = h > 0
    return float(-(h[occ] * np.log(mass[occ])).sum())


@dataclass
class EqEstimate:
    value: float
    per_sample: np.ndarray
    samples: int
    q: int


def estimate_Eq(spec: BernoulliSpec, proj: Projection, q: int, samples: int,
                seed: int, depth_margin: int = 4, grid_factor: int = 16) -> EqEstimate:
    """Monte Carlo estimate of the expected delta^q-discrete dimension.

    Draw (t, fiber word) from the stationary ensemble, form the projected
    rescaled product measure at working depth, and average the window
    entropy at scale delta^q = m^-q divided by q log(1/delta).  The
    projected law of the product measure is built by convolving the two
    coordinate histograms, which keeps the cost linear in grid size.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    cert = classify_alpha(spec.m, spec.n)
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    m, n = spec.m, spec.n
    kx = q + depth_margin
    ky = int(math.ceil(kx * math.log(m) / math.log(n))) + 1
    qf = np.array([float(v) for v in spec.q])
    rowsf = np.array([[float(v) for v in row] for row in spec.rows])
    x_weights = _kron_weights([qf] * kx)
    x_grid = np.arange(m ** kx) * float(m) ** (-kx)
    y_grid = np.arange(n ** ky) * float(n) ** (-ky)
    r0 = float(m) ** (-q)
    wbin = r0 / grid_factor
    half_bins = grid_factor // 2

    if cert.is_rational:
        qprime = cert.rational.denominator
        t_choices = np.arange(qprime) / qprime

    vals = np.empty(samples)
    for a in range(samples):
        t = float(rng.choice(t_choices)) if cert.is_rational else float(rng.random())
        widx = rng.choice(m, size=ky, p=qf / qf.sum())
        cx = float(n) ** (-t / 2.0)
        cy = float(n) ** (t / 2.0)
        if proj.kind == "pi1":
            locs = cx * x_grid
            hist = np.bincount((locs / wbin).astype(np.int64), weights=x_weights)
            vals[a] = _window_entropy_hist(hist, half_bins) / (q * math.log(m))
            continue
        y_weights = _kron_weights([rowsf[i] for i in widx])
        if proj.kind == "pi2":
            locs = cy * y_grid
            hist = np.bincount((locs / wbin).astype(np.int64), weights=y_weights)
            vals[a] = _window_entropy_hist(hist, half_bins) / (q * math.log(m))
            continue
        coeff = proj.sign * float(n) ** (-proj.s) * cy
        xl = cx * x_grid
        yl = coeff * y_grid
        off_x = np.floor(xl.min() / wbin).astype(np.int64)
        off_y = np.floor(yl.min() / wbin).astype(np.int64)
        hx = np.bincount((xl / wbin - off_x).astype(np.int64), weights=x_weights)
        hy = np.bincount((yl / wbin - off_y).astype(np.int64), weights=y_weights)
        hist = np.convolve(hx, hy)
        vals[a] = _window_entropy_hist(hist, half_bins) / (q * math.log(m))
    return EqEstimate(float(vals.mean()), vals, samples, q)


def line_projection_dimension(spec: BernoulliSpec, proj: Projection) -> float:
    """Exact projected dimension for line-supported specs (1-D formulas)."""
    vertical = sum(1 for qi in spec.q if qi > 0) == 1
    if vertical:
        i = next(i for i in range(spec.m) if spec.q[i] > 0)
        fiber_dim = shannon(spec.rows[i]) / math.log(spec.n)
        return 0.0 if proj.kind == "pi1" else fiber_dim
    base_dim = marginal_entropy_i(spec) / math.log(spec.m)
    return 0.0 if proj.kind == "pi2" else base_dim


@dataclass
class SweepRow:
    proj: Projection
    q: int
    eq_estimate: float
    direct_estimate: float
    samples: int
    seed: int
    line_supported: bool = False

    def label(self) -> str:
        return self.proj.label()


def marstrand_sweep(spec: BernoulliSpec, s_grid: Sequence[float], signs: Sequence[int],
                    q: int, samples: int, seed: int, depth: int,
                    phase: Optional[PhaseState] = None,
                    fit_levels: Optional[Sequence[int]] = None,
                    budget: int = DEFAULT_ATOM_BUDGET,
                    include_axes: bool = True,
                    threads: int = 1) -> list[SweepRow]:
    """Per-projection table of E_q estimates and direct slope estimates.

    The direct estimate fits the window entropy of the depth-``depth``
    projected approximation across dyadic levels ``fit_levels``
    (``entropy_slope`` against log(1/r) is already a dimension).
    Line-supported tables get the exact 1-D projected dimension instead
    of a slope fit.
    """
    if phase is None:
        phase = PhaseState.create(spec.m, spec.n, 0)
    if fit_levels is None:
        fit_levels = range(max(2, depth - 9), depth - 3)
    scales = [float(spec.m) ** (-j) for j in fit_levels]
    projections = []
    if include_axes:
        projections.append(Projection.pi1())
        projections.append(Projection.pi2())
    for s in s_grid:
        for sign in signs:
            projections.append(Projection.oblique(s, sign))
    x, y, w, ell = cell_atoms(spec, depth, phase, budget)

    def one_row(task):
        idx, proj = task
        locs = proj.apply(x, y, spec.n)
        if proj.kind == "pi2":
            res = float(spec.n) ** (-ell)
        else:
            coeff = 0.0 if proj.kind == "pi1" else float(spec.n) ** (-proj.s)
            res = float(spec.m) ** (-depth) + coeff * float(spec.n) ** (-ell)
        dm = DiscreteMeasure1D(locs, w, res)
        if spec.line_supported:
            direct = line_projection_dimension(spec, proj)
        else:
            direct = entropy_slope(dm, scales)
        eq = estimate_Eq(spec, proj, q, samples, seed + idx)
        return SweepRow(proj, q, eq.value, direct, samples, seed,
                        line_supported=spec.line_supported)

    tasks = list(enumerate(projections))
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one_row, tasks))
    return [one_row(t) for t in tasks]
