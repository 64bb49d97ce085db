"""Exact-identity property suite over random weight tables.

Each check exercises one identity that must hold with exact rational
equality (or bitwise equality for atom locations); the CLI ``verify``
command runs the whole battery and records one manifest line per check.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .dimension import Projection, project_measure
from .scenery import (
    ApproxSquare,
    PhaseState,
    minimeasure_blowup,
    minimeasure_psi,
    partition_children,
    rotate_and_count,
)
from .symbolic import (
    BernoulliMeasure,
    BernoulliSpec,
    Word,
    blowup,
    build_spec,
    cylinder_mass,
    fiber_cylinder_mass,
    measures_agree_to,
    psi_measure,
    sample_point,
)


def random_spec(rng: np.random.Generator, m: int | None = None, n: int | None = None,
                max_denominator: int = 24, min_cells: int = 2,
                distinct_rows: bool = False, max_h0: int | None = None,
                mn_choices=((2, 3), (2, 4), (2, 5), (3, 4), (3, 5), (4, 5))) -> BernoulliSpec:
    """Draw a random exact weight table, resampling until constraints hold."""
    from .metrics import h0 as _h0

    for _ in range(10000):
        if m is None or n is None:
            mm, nn = mn_choices[rng.integers(len(mn_choices))]
        else:
            mm, nn = m, n
        w = rng.integers(0, max_denominator, size=(mm, nn))
        if (w > 0).sum() < min_cells:
            continue
        total = int(w.sum())
        spec = build_spec(mm, nn, [[Fraction(int(x), total) for x in row] for row in w])
        if distinct_rows and not spec.distinct_rows():
            continue
        if max_h0 is not None and _h0(spec) > max_h0:
            continue
        return spec
    raise RuntimeError("could not sample a spec under the given constraints")


def random_word(rng: np.random.Generator, spec: BernoulliSpec, length: int,
                support_only: bool = True) -> Word:
    """Random I-word; by default only letters with positive marginal."""
    letters = [i for i in range(spec.m) if spec.q[i] > 0] if support_only else list(range(spec.m))
    return Word(tuple(int(letters[rng.integers(len(letters))]) for _ in range(length)), spec.m)


def check_cylinder_additivity(spec, rng, trials=20) -> int:
    """mass([i] x [j]) splits over one-letter extensions in each coordinate."""
    mu = BernoulliMeasure(spec)
    ok = 0
    for _ in range(trials):
        pt = sample_point(spec, rng, 4)
        a, b = int(rng.integers(0, 4)), int(rng.integers(0, 4))
        iw, jw = pt.iword.prefix(a), pt.jword.prefix(b)
        mass = mu.mass(iw, jw)
        ext_i = sum(mu.mass(iw + Word((c,), spec.m), jw) for c in range(spec.m))
        ext_j = sum(mu.mass(iw, jw + Word((c,), spec.n)) for c in range(spec.n))
        assert ext_i == mass and ext_j == mass
        ok += 1
    return ok


def check_disintegration(spec, rng, trials=20) -> int:
    """mu([i] x [j]) is the I-marginal mass times the fiber conditional."""
    ok = 0
    for _ in range(trials):
        pt = sample_point(spec, rng, 5)
        a = int(rng.integers(1, 6))
        b = int(rng.integers(0, a + 1))
        iw, jw = pt.iword.prefix(a), pt.jword.prefix(b)
        marg = Fraction(1)
        for d in iw:
            marg *= spec.q[d]
        assert cylinder_mass(spec, iw, jw) == marg * fiber_cylinder_mass(spec, iw, jw)
        ok += 1
    return ok


def check_psi_agreement(spec, rng, trials=10) -> int:
    """Psi_k(i) and Psi(i) give equal mass to every generation <= k cylinder."""
    ok = 0
    for _ in range(trials):
        k = int(rng.integers(1, 4))
        w = random_word(rng, spec, k + 3)
        psi_k = psi_measure(spec, w, k)
        psi = psi_measure(spec, w, None)
        g = measures_agree_to(psi_k, psi, k)
        assert g is None, f"Psi_{k} vs Psi disagree at generation {g}"
        ok += 1
    return ok


def check_blowup_composition(spec, rng, trials=12) -> int:
    """Blowing up along C1 then C2 equals blowing up along C1C2."""
    mu = BernoulliMeasure(spec)
    ok = 0
    for _ in range(trials):
        pt = sample_point(spec, rng, 6)
        a1, b1 = int(rng.integers(0, 3)), int(rng.integers(0, 3))
        a2, b2 = int(rng.integers(0, 3)), int(rng.integers(0, 3))
        i1, j1 = pt.iword.prefix(a1), pt.jword.prefix(b1)
        i2 = Word(pt.iword.digits[a1:a1 + a2], spec.m)
        j2 = Word(pt.jword.digits[b1:b1 + b2], spec.n)
        two = blowup(blowup(mu, i1, j1), i2, j2)
        one = blowup(mu, i1 + i2, j1 + j2)
        assert measures_agree_to(two, one, 2) is None
        ok += 1
    return ok


def check_minimeasure_parametrization(spec, rng, trials=10, gen=2) -> int:
    """Fast-path Psi form of Z^k equals the direct cylinder-ratio blow-up."""
    ok = 0
    for _ in range(trials):
        k = int(rng.integers(1, 9))
        t = Fraction(int(rng.integers(0, 64)), 64)
        phase = PhaseState.create(spec.m, spec.n, t)
        pt = sample_point(spec, rng, k + gen + 2)
        ell = phase.ell(k)
        fast = minimeasure_psi(spec, pt, k, ell)
        oracle = minimeasure_blowup(spec, phase, pt, k)
        assert measures_agree_to(fast, oracle, gen) is None
        ok += 1
    return ok


def check_rotation_duality(rng, trials=20, kmax=300) -> int:
    """Floor formula for the revolution count equals the threshold hit count."""
    ok = 0
    for _ in range(trials):
        m = int(rng.integers(2, 5))
        n = int(rng.integers(m + 1, 9))
        t = Fraction(int(rng.integers(0, 997)), 997)
        phase = PhaseState.create(m, n, t)
        k = int(rng.integers(0, kmax))
        rotate_and_count(phase, k, verify=True)
        ok += 1
    return ok


def check_partition_composition(spec, rng, trials=6) -> int:
    """Children of children tile identically to the two-step partition."""
    ok = 0
    for _ in range(trials):
        t = Fraction(int(rng.integers(0, 64)), 64)
        root = ApproxSquare.root(spec, PhaseState.create(spec.m, spec.n, t))
        one = partition_children(root)
        two = [g for ch in one for g in partition_children(ch)]
        rects = sorted(sq.rect() for sq in two)
        # tiling: disjoint rectangles covering the unit square
        area = sum((r[1] - r[0]) * (r[3] - r[2]) for r in rects)
        assert area == 1
        assert len(set(rects)) == len(rects)
        ell2 = root.phase.ell(2)
        assert len(two) == spec.m ** 2 * spec.n ** ell2
        ok += 1
    return ok


def check_scaling_identity(spec, rng, trials=6, depth=4) -> int:
    """pi_s o S_t atoms equal the rescaled pi_(s-t) atoms bit for bit."""
    ok = 0
    phase = PhaseState.create(spec.m, spec.n, 0)
    for _ in range(trials):
        s = float(rng.uniform(0.05, 0.95))
        tau = float(rng.uniform(0.0, 1.0))
        sign = 1 if rng.random() < 0.5 else -1
        proj = Projection.oblique(s, sign)
        rescaled = project_measure(spec, depth, phase, proj, rescale_phase=tau)
        plain = project_measure(spec, depth, phase, Projection.oblique(s - tau, sign))
        assert np.array_equal(rescaled.core, plain.locations)
        assert np.array_equal(rescaled.weights, plain.weights)
        ok += 1
    return ok


def run_verification(seed: int = 0, n_specs: int = 50) -> list[tuple[str, int, bool]]:
    """Run every identity check over ``n_specs`` random weight tables."""
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    specs = [random_spec(rng) for _ in range(n_specs)]
    results = []

    def battery(name, fn, per_spec=True):
        count = 0
        try:
            if per_spec:
                for spec in specs:
                    count += fn(spec, rng)
            else:
                count += fn(rng)
            results.append((name, count, True))
        except AssertionError:
            results.append((name, count, False))

    battery("cylinder_additivity", check_cylinder_additivity)
    battery("disintegration", check_disintegration)
    battery("psi_agreement", check_psi_agreement)
    battery("blowup_composition", check_blowup_composition)
    battery("minimeasure_parametrization", check_minimeasure_parametrization)
    battery("rotation_duality", check_rotation_duality, per_spec=False)
    battery("partition_composition", check_partition_composition)
    battery("scaling_identity", check_scaling_identity)
    return results
