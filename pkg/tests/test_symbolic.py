from fractions import Fraction as F

import numpy as np
import pytest

from carpetlab import (
    BadShape,
    BernoulliMeasure,
    DepthMismatch,
    InsufficientDepth,
    OrderViolation,
    SumNotOne,
    SymbolicPoint,
    ZeroMassCylinder,
    blowup,
    build_spec,
    cylinder_mass,
    fiber_cylinder_mass,
    measures_agree_to,
    psi_measure,
    sample_point,
    word,
)
from carpetlab.verification import random_spec, random_word


def test_build_spec_marginals(s1):
    assert s1.q == (F(3, 4), F(1, 4))
    assert s1.r == (F(1, 2), F(3, 8), F(1, 8))
    assert s1.rows[0] == (F(2, 3), F(1, 3), F(0))
    assert s1.rows[1] == (F(0), F(1, 2), F(1, 2))
    assert not s1.line_supported


def test_build_spec_uniform(u23):
    assert u23.q == (F(1, 2), F(1, 2))
    assert not u23.distinct_rows()


def test_build_spec_rejects_bad_input():
    with pytest.raises(OrderViolation):
        build_spec(3, 2, [[F(1, 2)] * 2] * 3)
    with pytest.raises(OrderViolation):
        build_spec(1, 3, [[F(1, 3)] * 3])
    with pytest.raises(SumNotOne):
        build_spec(2, 3, [[F(1, 2), 0, 0], [0, 0, F(1, 4)]])
    with pytest.raises(BadShape):
        build_spec(2, 3, [[F(1, 2), F(1, 2)], [0, 0]])
    with pytest.raises(BadShape):
        build_spec(2, 3, [[F(3, 2), 0, 0], [F(-1, 2), 0, 0]])
    with pytest.raises(BadShape):
        build_spec(2, 3, [[0.5, 0.5, 0], [0, 0, 0]])


def test_line_supported_flag():
    vertical = build_spec(2, 3, [[F(1, 2), F(1, 4), F(1, 4)], [0, 0, 0]])
    assert vertical.line_supported
    horizontal = build_spec(2, 3, [[0, F(1, 2), 0], [0, F(1, 2), 0]])
    assert horizontal.line_supported


def test_word_operations():
    w = word([0, 1, 1], 2)
    assert len(w) == 3
    assert w.shift().digits == (1, 1)
    assert w.prefix(2).digits == (0, 1)
    assert (w + word([0], 2)).digits == (0, 1, 1, 0)
    with pytest.raises(BadShape):
        word([2], 2)
    with pytest.raises(InsufficientDepth):
        w.prefix(4)


def test_cylinder_mass_examples(s1):
    assert cylinder_mass(s1, word([0], 2), word([1], 3)) == F(1, 4)
    assert cylinder_mass(s1, word([0, 1], 2), word([1], 3)) == F(1, 16)
    assert cylinder_mass(s1, word([0], 2), word([1, 2], 3)) == F(1, 32)
    assert cylinder_mass(s1, word([], 2), word([], 3)) == 1


def test_cylinder_additivity_random():
    rng = np.random.Generator(np.random.Philox(key=np.uint64(7)))
    for _ in range(25):
        spec = random_spec(rng)
        mu = BernoulliMeasure(spec)
        pt = sample_point(spec, rng, 5)
        a, b = int(rng.integers(0, 4)), int(rng.integers(0, 4))
        iw, jw = pt.iword.prefix(a), pt.jword.prefix(b)
        mass = mu.mass(iw, jw)
        assert mass == sum(mu.mass(iw + word([c], spec.m), jw) for c in range(spec.m))
        assert mass == sum(mu.mass(iw, jw + word([c], spec.n)) for c in range(spec.n))


def test_fiber_cylinder_mass(s1):
    assert fiber_cylinder_mass(s1, word([0, 0], 2), word([1], 3)) == F(1, 3)
    assert fiber_cylinder_mass(s1, word([0, 1], 2), word([1, 2], 3)) == F(1, 6)
    assert fiber_cylinder_mass(s1, word([], 2), word([], 3)) == 1
    with pytest.raises(DepthMismatch):
        fiber_cylinder_mass(s1, word([0], 2), word([1, 1], 3))


def test_disintegration_recovery():
    # mu([i] x [j]) = pi_1(mu)[i] * mu_i[j] whenever |i| >= |j|
    rng = np.random.Generator(np.random.Philox(key=np.uint64(8)))
    for _ in range(25):
        spec = random_spec(rng)
        pt = sample_point(spec, rng, 6)
        a = int(rng.integers(1, 7))
        b = int(rng.integers(0, a + 1))
        iw, jw = pt.iword.prefix(a), pt.jword.prefix(b)
        marg = F(1)
        for d in iw:
            marg *= spec.q[d]
        assert cylinder_mass(spec, iw, jw) == marg * fiber_cylinder_mass(spec, iw, jw)


def test_blowup_examples(s1):
    mu = BernoulliMeasure(s1)
    assert blowup(mu, word([], 2), word([], 3)) is mu
    nu = blowup(mu, word([0], 2), word([], 3))
    assert nu.mass(word([], 2), word([1], 3)) == F(1, 3)
    with pytest.raises(ZeroMassCylinder):
        blowup(mu, word([0], 2), word([2], 3))


def test_blowup_composition_random():
    rng = np.random.Generator(np.random.Philox(key=np.uint64(9)))
    for _ in range(15):
        spec = random_spec(rng)
        mu = BernoulliMeasure(spec)
        pt = sample_point(spec, rng, 6)
        i1, j1 = pt.iword.prefix(2), pt.jword.prefix(1)
        i2 = word(pt.iword.digits[2:4], spec.m)
        j2 = word(pt.jword.digits[1:3], spec.n)
        assert measures_agree_to(
            blowup(blowup(mu, i1, j1), i2, j2), blowup(mu, i1 + i2, j1 + j2), 2
        ) is None


def test_blowup_at_equal_depths_recovers_mu():
    # renormalizing on [i|_k] x [j|_k] gives back the product law itself
    rng = np.random.Generator(np.random.Philox(key=np.uint64(10)))
    spec = random_spec(rng)
    mu = BernoulliMeasure(spec)
    pt = sample_point(spec, rng, 4)
    nu = blowup(mu, pt.iword.prefix(3), pt.jword.prefix(3))
    assert measures_agree_to(nu, mu, 2) is None


def test_psi_examples(s1):
    psi = psi_measure(s1, word([0, 0, 0], 2), None)
    assert psi.mass(word([], 2), word([1], 3)) == F(1, 3)
    psi1 = psi_measure(s1, word([1, 0, 0], 2), 1)
    assert psi1.mass(word([0], 2), word([2], 3)) == F(3, 8)


def test_psi_k_agrees_with_psi_up_to_generation_k():
    rng = np.random.Generator(np.random.Philox(key=np.uint64(11)))
    for _ in range(20):
        spec = random_spec(rng)
        k = int(rng.integers(1, 4))
        w = random_word(rng, spec, k + 3)
        assert measures_agree_to(
            psi_measure(spec, w, k), psi_measure(spec, w, None), k
        ) is None


def test_psi_zero_generation_is_mu(s1):
    psi0 = psi_measure(s1, word([0, 1], 2), 0)
    assert measures_agree_to(psi0, BernoulliMeasure(s1), 2) is None


def test_psi_depth_validation(s1):
    with pytest.raises(InsufficientDepth):
        psi_measure(s1, word([0], 2), 3)
    with pytest.raises(InsufficientDepth):
        psi_measure(s1, word([0], 2), None, h=4)
    with pytest.raises(ZeroMassCylinder):
        vertical = build_spec(2, 3, [[F(1, 2), F(1, 4), F(1, 4)], [0, 0, 0]])
        psi_measure(vertical, word([1, 1], 2), 2)


def test_psi_mass_beyond_prefix_raises(s1):
    psi = psi_measure(s1, word([0, 0], 2), None)
    with pytest.raises(InsufficientDepth):
        psi.mass(word([], 2), word([1, 1, 1], 3))


def test_sample_point_deterministic_and_in_law(pointmass, u23):
    pt = sample_point(pointmass, 3, 20)
    assert pt.iword.digits == (0,) * 20
    assert pt.jword.digits == (0,) * 20

    a = sample_point(u23, 123, 50)
    b = sample_point(u23, 123, 50)
    assert a == b

    big = sample_point(u23, 5, 10000)
    pairs = np.array(big.iword.digits) * 3 + np.array(big.jword.digits)
    freqs = np.bincount(pairs, minlength=6) / 10000
    sigma = np.sqrt((1 / 6) * (5 / 6) / 10000)
    assert np.all(np.abs(freqs - 1 / 6) <= 3 * sigma)


def test_sample_point_depth_validation(u23):
    with pytest.raises(InsufficientDepth):
        sample_point(u23, 0, 0)


def test_symbolic_point_depth(u23):
    pt = SymbolicPoint(word([0, 1], 2), word([2], 3))
    assert pt.depth == 1


def test_cylinder_measures_have_total_mass_one():
    rng = np.random.Generator(np.random.Philox(key=np.uint64(12)))
    for _ in range(10):
        spec = random_spec(rng)
        pt = sample_point(spec, rng, 6)
        measures = [
            BernoulliMeasure(spec),
            psi_measure(spec, pt.iword.prefix(3), 2),
            psi_measure(spec, pt.iword.prefix(3), None),
            blowup(BernoulliMeasure(spec), pt.iword.prefix(2), pt.jword.prefix(1)),
        ]
        for nu in measures:
            assert sum(nu.slab(1).values()) == 1
