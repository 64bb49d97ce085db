"""Measure-space metrics and empirical scenery statistics.

Magnified measures of a fixed Bernoulli law form a totally disconnected
set: two parametrized measures either agree on every cylinder up to some
generation g or they disagree at g, so the weak metric restricted to this
class is computed by locating the first disagreeing generation.  On top of
that the module builds empirical scenery distributions with phase
marginals, and exact limits for indicator test functions along orbits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import (
    BudgetExceeded,
    IncompatibleSpecs,
    InsufficientDepth,
    NotPsiForm,
)
from .scenery import PhaseState, SceneryOrbit
from .symbolic import (
    BernoulliSpec,
    CylinderMeasure,
    SymbolicPoint,
    Word,
)


def h0(spec: BernoulliSpec) -> int:
    """Smallest h with m^-h strictly below the least nonzero row gap.

    At and above this resolution, distinct conditional rows are separated
    by more than one metric ball, which is what makes Psi_h-equality an
    open-ball condition.  Zero when all rows coincide.
    """
    gap = spec.min_row_gap()
    if gap is None:
        return 0
    h = 0
    # m^-h < gap  <=>  gap.den < gap.num * m^h
    while gap.denominator >= gap.numerator * spec.m ** h:
        h += 1
    return h


def _psi_position_matches(spec: BernoulliSpec, k1: int, w1, k2: int, w2, l: int) -> bool:
    """Do two parametrized measures act identically at fiber position l?

    A depth-k form pins the conditional row of its stored word below k and
    lets the letter there be supplied by the cylinder (or averaged by the
    marginal) from k on.  Free positions agree only at equal depth, or
    when every positive-marginal letter shares a single row.
    """
    row1 = spec.rows[w1[l]] if l < k1 else None
    row2 = spec.rows[w2[l]] if l < k2 else None
    if row1 is not None and row2 is not None:
        return row1 == row2
    if row1 is None and row2 is None:
        if k1 == k2:
            return True
        support = [u for u in range(spec.m) if spec.q[u] > 0]
        return all(spec.rows[u] == spec.rows[support[0]] for u in support)
    pinned = row1 if row1 is not None else row2
    return all(spec.rows[u] == pinned for u in range(spec.m) if spec.q[u] > 0)


SLAB_WORK_BUDGET = 100_000  # cylinder masses cost O(depth) exact products each


def first_disagreement_generation(
    nu1: CylinderMeasure, nu2: CylinderMeasure, max_gen: int,
    slab_budget: int = SLAB_WORK_BUDGET,
) -> Optional[int]:
    """Smallest generation g <= max_gen whose cylinder masses differ.

    Generation g covers all cylinders with both word lengths at most g.
    Two parametrized forms over the same weights are compared fiber
    position by fiber position; other representations fall back to exact
    generation slabs, whose (mn)^g size is capped by ``slab_budget``
    (BudgetExceeded past the cap: lower max_gen or use parametrized forms).
    """
    if (nu1.spec.m, nu1.spec.n) != (nu2.spec.m, nu2.spec.n):
        raise IncompatibleSpecs("measures over different alphabets")
    max_gen = min(max_gen, nu1.generation, nu2.generation)
    p1, p2 = nu1.psi_params(), nu2.psi_params()
    if p1 is not None and p2 is not None and nu1.spec == nu2.spec:
        k1, w1 = p1
        k2, w2 = p2
        k1 = len(w1) if k1 is None else k1
        k2 = len(w2) if k2 is None else k2
        for l in range(max_gen):
            if not _psi_position_matches(nu1.spec, k1, w1, k2, w2, l):
                return l + 1
        return None
    cells = nu1.spec.m * nu1.spec.n
    for g in range(1, max_gen + 1):
        if cells ** g > slab_budget:
            raise BudgetExceeded(
                f"generation-{g} slab of {cells ** g} cylinders exceeds the "
                f"comparison budget; pass a smaller max_gen"
            )
        if nu1.slab(g) != nu2.slab(g):
            return g
    return None


def prokhorov_distance(
    nu1: CylinderMeasure, nu2: CylinderMeasure, max_gen: Optional[int] = None
) -> float:
    """Weak distance between two stored measures, as m^-g*.

    g* is the first generation at which cylinder masses differ, so
    d < m^-h exactly when the measures agree on every cylinder of
    generation at most h: the open-ball characterization of the
    parametrized class.  Agreement through the common stored generation
    gives 0 (indiscernible at this resolution).
    """
    if max_gen is None:
        max_gen = min(nu1.generation, nu2.generation, 48)
    g = first_disagreement_generation(nu1, nu2, max_gen)
    if g is None:
        return 0.0
    return float(nu1.spec.m) ** (-g)


def ball_membership(nu: CylinderMeasure, v: Word, h: int) -> bool:
    """Whether nu's generating word matches v's conditional rows through h."""
    params = nu.psi_params()
    if params is None:
        raise NotPsiForm(f"{nu!r} is not a parametrized product form")
    k, prefix = params
    depth = len(prefix) if k is None else k
    if h > depth:
        raise InsufficientDepth(
            f"membership at level {h} needs a parametrized depth >= {h}, got {depth}"
        )
    if v.alphabet != nu.spec.m or len(v) < h:
        raise InsufficientDepth(f"center word must have length >= {h} over I")
    rows = nu.spec.rows
    return all(rows[prefix[l]] == rows[v[l]] for l in range(h))


# ---------------------------------------------------------------------------
# Empirical scenery distributions
# ---------------------------------------------------------------------------


def _class_key(spec: BernoulliSpec, kparam: int, prefix, g: int):
    d = min(kparam, g)
    return (d,) + tuple(spec.row_class[x] for x in prefix[:d])


class EmpiricalDistribution:
    """Weighted sample of magnified measures plus its phase marginal.

    Measures are stored through their parametrization: the fiber depth
    ``k`` and the generating prefix (capped at ``resolution`` letters;
    identical parameters are pooled).  Weights are uniform 1/N unless
    given.  Distances between two empirical distributions are computed in
    the Prokhorov sense over the measure metric, exploiting that metric
    balls of radius m^-g are exactly the depth-g parameter classes.
    """

    def __init__(self, spec: BernoulliSpec, params: list[tuple[int, tuple[int, ...]]],
                 weights: Optional[np.ndarray] = None,
                 phases: Optional[np.ndarray] = None,
                 phase_fracs: Optional[list[Fraction]] = None,
                 resolution: int = 12):
        self.spec = spec
        self.resolution = resolution
        n = len(params)
        if weights is None:
            weights = np.full(n, 1.0 / n)
        weights = np.asarray(weights, dtype=float)
        if abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {weights.sum()}, expected 1")
        if np.any(weights < 0):
            raise ValueError("negative weight")
        # pool identical stored parameters
        pooled: dict[tuple, float] = {}
        for (kp, pref), w in zip(params, weights):
            key = (min(kp, resolution), tuple(pref[: min(kp, resolution)]))
            pooled[key] = pooled.get(key, 0.0) + w
        self.params = list(pooled.keys())
        self.weights = np.array(list(pooled.values()))
        self.phases = None if phases is None else np.asarray(phases, dtype=float)
        self.phase_fracs = phase_fracs

    @staticmethod
    def from_orbit(orbit: SceneryOrbit, resolution: int = 12) -> "EmpiricalDistribution":
        idig = orbit.point.iword.digits
        params = []
        for k, ell in zip(orbit.ks.tolist(), orbit.ells.tolist()):
            d = min(k - ell, resolution)
            params.append((k - ell, idig[ell:ell + d]))
        fracs = orbit.phase_fractions() if orbit.phase0.is_rational else None
        return EmpiricalDistribution(
            orbit.spec, params, phases=orbit.phase_floats,
            phase_fracs=fracs, resolution=resolution,
        )

    # -- measure marginal ---------------------------------------------------

    def class_histogram(self, g: int) -> dict[tuple, float]:
        if g > self.resolution:
            raise InsufficientDepth(f"class depth {g} beyond stored resolution")
        hist: dict[tuple, float] = {}
        for (kp, pref), w in zip(self.params, self.weights):
            key = _class_key(self.spec, kp, pref, g)
            hist[key] = hist.get(key, 0.0) + w
        return hist

    def prokhorov_to(self, other: "EmpiricalDistribution", max_gen: Optional[int] = None) -> float:
        """Prokhorov distance between the two measure marginals.

        For each depth g the m^-g-neighborhood of a set of atoms is the
        union of their parameter classes, so the optimal epsilon at depth g
        is the positive-part total variation between class histograms;
        minimizing max(m^-g, TV_g) over g gives the distance.
        """
        if self.spec.m != other.spec.m:
            raise IncompatibleSpecs("different alphabets")
        cap = min(self.resolution, other.resolution)
        if max_gen is not None:
            cap = min(cap, max_gen)
        best = 1.0
        for g in range(cap + 1):
            h1 = self.class_histogram(g)
            h2 = other.class_histogram(g)
            tv = sum(max(w - h2.get(key, 0.0), 0.0) for key, w in h1.items())
            best = min(best, max(float(self.spec.m) ** (-g), tv))
        return best

    # -- phase marginal -------------------------------------------------------

    def phase_histogram(self, bins: int = 64) -> np.ndarray:
        if self.phases is None:
            raise ValueError("no phase marginal attached")
        hist, _ = np.histogram(self.phases, bins=bins, range=(0.0, 1.0))
        return hist / len(self.phases)

    def phase_ks_uniform(self) -> float:
        """Kolmogorov-Smirnov distance of the phase marginal to Lebesgue."""
        if self.phases is None:
            raise ValueError("no phase marginal attached")
        x = np.sort(self.phases)
        n = len(x)
        up = np.max(np.arange(1, n + 1) / n - x)
        down = np.max(x - np.arange(0, n) / n)
        return float(max(up, down))

    def phase_atoms(self) -> dict[Fraction, float]:
        """Exact phase atoms with their empirical frequencies (rational case)."""
        if self.phase_fracs is None:
            raise ValueError("exact phases only available for rational alpha")
        out: dict[Fraction, float] = {}
        w = 1.0 / len(self.phase_fracs)
        for t in self.phase_fracs:
            out[t] = out.get(t, 0.0) + w
        return out


def scenery_distribution(spec: BernoulliSpec, phase: PhaseState, point: SymbolicPoint,
                         N: int, q: int = 1, resolution: int = 12) -> EmpiricalDistribution:
    """Empirical distribution of the measure coordinates of Z^{q k}, k < N."""
    orbit = SceneryOrbit(spec, phase, point, N, q)
    return EmpiricalDistribution.from_orbit(orbit, resolution=resolution)


def tau_atoms(phase: PhaseState, q: int) -> tuple[list[Fraction], Fraction]:
    """Support and per-atom weight of the q-sparse periodic phase measure.

    For alpha = p'/q' in lowest terms the q-sparse orbit of t visits
    q'/gcd(q,q') equally weighted points t + j*gcd(q,q')/q' mod 1.
    """
    if not phase.is_rational:
        raise ValueError("tau atoms are only defined for rational alpha")
    a = phase.alpha_frac
    qprime = a.denominator
    g = math.gcd(q, qprime)
    count = qprime // g
    t0 = phase.t_fraction
    atoms = [(t0 + Fraction(j * g, qprime)) % 1 for j in range(count)]
    return atoms, Fraction(g, qprime)


def phase_interval_measure(phase: PhaseState, q: int, a, b):
    """Limiting frequency of phases in [a, b): Lebesgue or tau_{t,q} mass."""
    if not phase.is_rational:
        return float(b) - float(a)
    atoms, w = tau_atoms(phase, q)
    af, bf = Fraction(a), Fraction(b)
    return w * sum(1 for t in atoms if af <= t < bf)


# ---------------------------------------------------------------------------
# Simple indicator test functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SimpleTestFunction:
    """Indicator of [a,b) x [i'] x [j'] x (depth-h parameter ball around v)."""

    a: float
    b: float
    iprefix: Word
    jprefix: Word
    center: Word
    h: int

    def __post_init__(self):
        if not 0 <= self.a < self.b <= 1:
            raise ValueError("need 0 <= a < b <= 1")
        if self.h > len(self.center):
            raise InsufficientDepth("center word shorter than h")


@dataclass(frozen=True)
class TestAverageResult:
    empirical: float
    exact: float
    phase_factor: float
    symbolic_factor: Fraction
    hits: int
    N: int


def simple_test_limit(spec: BernoulliSpec, g: SimpleTestFunction,
                      phase: PhaseState, q: int) -> tuple[float, Fraction]:
    """Exact limit of the orbit average of g: phase mass times cylinder mass.

    The symbolic factor integrates mu_v[j'] over the parameter class of the
    center word and multiplies by the I-cylinder mass; positions factor, so
    it is a product over letter positions of restricted marginal sums.
    """
    phase_factor = phase_interval_measure(phase, q, g.a, g.b)
    sym = Fraction(1)
    for d in g.iprefix:
        sym *= spec.q[d]
    L = max(g.h, len(g.jprefix))
    cls = spec.row_class
    for l in range(L):
        allowed = [
            u for u in range(spec.m)
            if l >= g.h or cls[u] == cls[g.center[l]]
        ]
        term = Fraction(0)
        for u in allowed:
            f = spec.q[u]
            if l < len(g.jprefix):
                f *= spec.rows[u][g.jprefix[l]]
            term += f
        sym *= term
    return float(phase_factor), sym


def simple_test_average(spec: BernoulliSpec, g: SimpleTestFunction,
                        phase: PhaseState, point: SymbolicPoint,
                        N: int, q: int = 1,
                        orbit: Optional[SceneryOrbit] = None) -> TestAverageResult:
    """Empirical orbit average of g along Z^{q k}, k < N, plus its exact limit.

    Pass a precomputed ``orbit`` (same phase/point/q, at least N states) to
    evaluate several test functions along one trajectory.
    """
    if orbit is None:
        orbit = SceneryOrbit(spec, phase, point, N, q, h=max(g.h, len(g.jprefix)))
    else:
        if orbit.q != q:
            raise ValueError("orbit sparsity differs from requested q")
        orbit = orbit.truncate(N)
    need_i = q * (N - 1) + len(g.iprefix)
    if len(point.iword) < max(need_i, int(orbit.ells[-1]) + g.h):
        raise InsufficientDepth("i-word too short for the test function")
    if len(point.jword) < int(orbit.ells[-1]) + len(g.jprefix):
        raise InsufficientDepth("j-word too short for the test function")
    iarr = np.array(point.iword.digits, dtype=np.int64)
    jarr = np.array(point.jword.digits, dtype=np.int64)
    ks = orbit.ks
    ells = orbit.ells

    ind = np.ones(N, dtype=bool)
    if phase.is_rational:
        # exact interval test on the lattice phases
        mod = phase.mod
        af, bf = Fraction(g.a), Fraction(g.b)
        ind &= np.array([af <= Fraction(t, mod) < bf for t in orbit._t_nums])
    else:
        ph = orbit.phase_floats
        ind &= (ph >= g.a) & (ph < g.b)
    for l, d in enumerate(g.iprefix):
        ind &= iarr[ks + l] == d
    for l, d in enumerate(g.jprefix):
        ind &= jarr[ells + l] == d
    if g.h > 0:
        cls = np.array(spec.row_class, dtype=np.int64)
        for l in range(g.h):
            ind &= cls[iarr[ells + l]] == cls[g.center[l]]
    hits = int(ind.sum())
    phase_factor, sym = simple_test_limit(spec, g, phase, q)
    return TestAverageResult(
        empirical=hits / N,
        exact=float(phase_factor) * float(sym),
        phase_factor=float(phase_factor),
        symbolic_factor=sym,
        hits=hits,
        N=N,
    )
