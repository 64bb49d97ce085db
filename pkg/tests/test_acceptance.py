"""Acceptance suite: one test per criterion, each at its stated tolerance.

Every test ends by printing a single PASS line with the measured numbers
(run pytest with -s to stream them); a failing assertion is the FAIL line.
All randomness is driven by fixed master seeds, so the suite is
deterministic.
"""

import math
import time
from fractions import Fraction as F

import numpy as np
import pytest

import carpetlab as cl
from carpetlab import (
    PhaseState,
    Projection,
    ball_membership,
    box_dim_estimate,
    cantor_endpoints,
    distset_experiment,
    entropy_dimension_estimate,
    exact_dimension,
    h0,
    log_scale_range,
    marstrand_sweep,
    measures_agree_to,
    minimeasure,
    minimeasure_blowup,
    project_measure,
    prokhorov_distance,
    psi_measure,
    rotate_and_count,
    sample_point,
    scenery_distribution,
    simple_test_average,
    tau_atoms,
    word,
    z_orbit,
)
from carpetlab.cli import default_test_battery
from carpetlab.verification import random_spec, random_word

S1_WEIGHTS = [[F(1, 2), F(1, 4), 0], [0, F(1, 8), F(1, 8)]]


def _rng(seed):
    return np.random.Generator(np.random.Philox(key=np.uint64(seed)))


def test_c01_minimeasure_parametrization_exact(s1):
    """Fast-path parametrized minimeasures equal cylinder-ratio blow-ups."""
    rng = _rng(101)
    start = time.perf_counter()
    cases = 0
    for _ in range(1000):
        spec = random_spec(rng)
        t = F(int(rng.integers(0, 4096)), 4096)
        phase = PhaseState.create(spec.m, spec.n, t)
        k = int(rng.integers(1, 13))
        pt = sample_point(spec, rng, k + 4)
        fast = minimeasure(spec, phase, pt, k)
        oracle = minimeasure_blowup(spec, phase, pt, k)
        assert measures_agree_to(fast, oracle, 2) is None
        cases += 1
    elapsed = time.perf_counter() - start
    assert cases == 1000
    assert elapsed < 30.0
    print(f"ACCEPTANCE 1 (minimeasure parametrization): PASS - "
          f"{cases} exact matches in {elapsed:.1f}s")


def test_c02_psi_k_agrees_with_psi():
    """Psi_k(i) and Psi(i) coincide on every cylinder of generation <= k."""
    rng = _rng(102)
    cases = 0
    for _ in range(1000):
        spec = random_spec(rng, mn_choices=((2, 3), (2, 4), (3, 4)))
        k = int(rng.integers(1, 4))
        w = random_word(rng, spec, k + 3)
        psi_k = psi_measure(spec, w, k)
        psi = psi_measure(spec, w, None)
        assert measures_agree_to(psi_k, psi, k) is None
        # longer I-words at fiber generation <= k agree as well
        iw = random_word(rng, spec, k + 2)
        jw = cl.Word(tuple(int(rng.integers(0, spec.n)) for _ in range(k)), spec.n)
        assert psi_k.mass(iw, jw) == psi.mass(iw, jw)
        cases += 1
    assert cases == 1000
    print(f"ACCEPTANCE 2 (cylinder agreement): PASS - {cases} exact cases")


def test_c03_rotation_counter_duality():
    """Floor formula vs threshold hit count at 256-bit precision."""
    rng = _rng(103)
    pairs = [(2, 3), (2, 5), (3, 4), (3, 5), (2, 4), (4, 8)]
    cases = 0
    start = time.perf_counter()
    for idx in range(10000):
        m, n = pairs[int(rng.integers(len(pairs)))]
        if cl.classify_alpha(m, n).is_rational:
            t = F(int(rng.integers(0, 1024)), 1024)
        else:
            t = F(int.from_bytes(rng.bytes(32), "big"), 1 << 256)
        phase = PhaseState.create(m, n, t, prec=256)
        if idx < 5:
            k = 10000  # pin the extreme depth a few times
        else:
            k = int(10000 ** rng.random())
        rotate_and_count(phase, k, verify=True)
        cases += 1
    elapsed = time.perf_counter() - start
    assert cases == 10000
    print(f"ACCEPTANCE 3 (rotation duality): PASS - {cases} cases, "
          f"zero failures, {elapsed:.1f}s")


def test_c04_ball_lemma():
    """Metric-ball membership at radius m^-h is depth-h parameter equality."""
    rng = _rng(104)
    total = 0
    for _ in range(100):
        spec = random_spec(rng, distinct_rows=True, max_h0=5)
        base = h0(spec)
        for h in range(base, base + 4):
            v = random_word(rng, spec, h + 2)
            psi_v = psi_measure(spec, v, None)
            for _ in range(250):
                k = h + int(rng.integers(0, 4))
                w = random_word(rng, spec, k + 2)
                if rng.random() < 0.5 and h > 0:
                    cut = min(h, k)
                    w = v.prefix(cut) + word(w.digits[cut:], spec.m)
                nu = psi_measure(spec, w, k)
                in_ball = prokhorov_distance(nu, psi_v) < float(spec.m) ** -h
                assert in_ball == ball_membership(nu, v, h)
                total += 1
    assert total == 100 * 4 * 250
    print(f"ACCEPTANCE 4 (ball lemma): PASS - {total} exact equivalences")


def test_c05_scenery_ergodic_averages(s1):
    """Orbit averages of the indicator battery hit their exact limits."""
    start = time.perf_counter()
    battery = default_test_battery(s1)
    N = 100000
    medians = {}
    sq_small, sq_big = [], []
    errs = {(q, i): [] for q in (1, 2, 3) for i in range(len(battery))}
    for seed in range(10):
        srng = _rng(1000 + seed)
        t = float(srng.random())
        phase = PhaseState.create(2, 3, t)
        pt = sample_point(s1, 1500 + seed, 3 * N + 12)
        for q in (1, 2, 3):
            orbit = z_orbit(s1, phase, pt, N, q, h=4)
            for i, g in enumerate(battery):
                res = simple_test_average(s1, g, phase, pt, N, q, orbit=orbit)
                errs[(q, i)].append(abs(res.empirical - res.exact))
                small = simple_test_average(s1, g, phase, pt, N // 4, q, orbit=orbit)
                sq_big.append((res.empirical - res.exact) ** 2)
                sq_small.append((small.empirical - small.exact) ** 2)
    for key, values in errs.items():
        medians[key] = float(np.median(values))
        assert medians[key] <= 0.02, f"median error {medians[key]} at {key}"
    ratio = math.sqrt(np.mean(sq_big)) / math.sqrt(np.mean(sq_small))
    assert 0.375 <= ratio <= 0.625  # error halves (+-25%) when N quadruples
    elapsed = time.perf_counter() - start
    assert elapsed < 120.0
    print(f"ACCEPTANCE 5 (scenery ergodic averages): PASS - worst median "
          f"{max(medians.values()):.5f} <= 0.02, quadrupling ratio {ratio:.3f}, "
          f"{elapsed:.1f}s")


def test_c06_rational_dichotomy():
    """q-sparse phase marginals sit exactly on the predicted periodic atoms."""
    N = 100000
    details = []
    for m, n in ((2, 4), (4, 8)):
        spec = cl.uniform_spec(m, n)
        phase = PhaseState.create(m, n, 0)
        pt = sample_point(spec, 60 + m, 3 * N + 8)
        for q in (1, 2, 3):
            emp = scenery_distribution(spec, phase, pt, N, q)
            atoms = emp.phase_atoms()
            predicted, weight = tau_atoms(phase, q)
            assert set(atoms) == set(predicted)
            worst = max(abs(freq - float(weight)) for freq in atoms.values())
            assert worst <= 1e-3
            details.append(f"({m},{n}) q={q}: {len(predicted)} atoms, "
                           f"max freq dev {worst:.2e}")
    print("ACCEPTANCE 6 (rational dichotomy): PASS - " + "; ".join(details))


def test_c07_dimension_oracle(s1, u23, phase0):
    """Entropy growth slope matches the closed-form dimension within 0.05."""
    rng = _rng(107)
    specs = [s1, u23] + [random_spec(rng) for _ in range(20)]
    worst = 0.0
    for spec in specs:
        phase = PhaseState.create(spec.m, spec.n, 0)
        est = entropy_dimension_estimate(spec, phase, 8, 14)
        err = abs(est - exact_dimension(spec))
        worst = max(worst, err)
        assert err <= 0.05
    assert exact_dimension(u23) == pytest.approx(2.0, abs=1e-12)
    assert exact_dimension(s1) == pytest.approx(1.4036, abs=5e-4)
    print(f"ACCEPTANCE 7 (dimension oracle): PASS - 22 specs, worst slope "
          f"error {worst:.4f} <= 0.05")


def test_c08_projection_theorem_desk_scale(s1):
    """Sweep over the oblique family: both estimators see full dimension 1;
    the two axis directions show their exceptional marginal dimensions."""
    rows = marstrand_sweep(
        s1, [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9], (1, -1),
        q=8, samples=200, seed=880, depth=12,
    )
    by_kind = {}
    for row in rows:
        if row.proj.kind == "oblique":
            assert row.direct_estimate >= 0.9, f"direct at s={row.proj.s}"
            assert row.eq_estimate >= 0.9, f"E_q at s={row.proj.s}"
        else:
            by_kind[row.proj.kind] = row
    # the two genuine exceptional directions: dimension drops to the
    # marginal values H(q)/log m and H(r)/log n
    assert abs(by_kind["pi1"].direct_estimate - 0.8113) <= 0.05
    assert abs(by_kind["pi2"].direct_estimate - 0.8868) <= 0.05
    assert abs(by_kind["pi1"].eq_estimate - 0.8113) <= 0.05
    # E_q at pi2 measures the ensemble's fiber law (dimension
    # (H(p)-H(q))/log n ~ 0.59), strictly below dim pi2(mu) ~ 0.8868:
    # the expected-projection functional and the projected dimension
    # genuinely split at this exceptional direction, so it is reported
    # but not banded against the marginal value
    assert by_kind["pi2"].eq_estimate < by_kind["pi2"].direct_estimate
    print(f"ACCEPTANCE 8 (projection theorem): PASS - 18 oblique rows >= 0.9 "
          f"both estimators; pi1 direct {by_kind['pi1'].direct_estimate:.4f} "
          f"Eq {by_kind['pi1'].eq_estimate:.4f}; "
          f"pi2 direct {by_kind['pi2'].direct_estimate:.4f} "
          f"Eq {by_kind['pi2'].eq_estimate:.4f} (fiber law)")


def test_c09_scaling_identity():
    """pi_s o S_t equals n^(-t/2) pi_(s-t) atom for atom, exactly."""
    rng = _rng(109)
    cases = 0
    for _ in range(100):
        spec = random_spec(rng)
        phase = PhaseState.create(spec.m, spec.n, 0)
        depth = 8
        while depth > 1:
            pairs = sum(1 for i in range(spec.m) for j in range(spec.n)
                        if spec.p[i][j] > 0)
            if pairs ** phase.ell(depth) * spec.m ** (depth - phase.ell(depth)) <= 100000:
                break
            depth -= 1
        s = float(rng.uniform(0.05, 0.95))
        tau = float(rng.uniform(0.0, 1.0))
        sign = 1 if rng.random() < 0.5 else -1
        rescaled = project_measure(spec, depth, phase, Projection.oblique(s, sign),
                                   rescale_phase=tau)
        plain = project_measure(spec, depth, phase, Projection.oblique(s - tau, sign))
        assert np.array_equal(rescaled.core, plain.locations)
        assert np.array_equal(rescaled.weights, plain.weights)
        cases += 1
    assert cases == 100
    print(f"ACCEPTANCE 9 (scaling identity): PASS - {cases} exact atom matches")


def test_c10_distance_set(c1, u23):
    """Box-dimension of distance sets: calibrated oracle, then carpets."""
    cantor = box_dim_estimate(cantor_endpoints(10), [3.0 ** -j for j in range(3, 9)])
    cantor_err = abs(cantor - math.log(2) / math.log(3))
    assert cantor_err <= 0.08
    scales = log_scale_range(2.0 ** -9, 2.0 ** -4, 6)
    rep_c1 = distset_experiment(c1, 9, scales, seed=10)
    assert rep_c1.dim_distance_estimate >= 0.85
    assert rep_c1.direction_coverage
    rep_u = distset_experiment(u23, 9, scales, seed=10)
    assert rep_u.dim_distance_estimate >= 0.9
    assert rep_u.direction_coverage
    print(f"ACCEPTANCE 10 (distance set): PASS - cantor err {cantor_err:.4f}, "
          f"C1 dim D {rep_c1.dim_distance_estimate:.3f} >= 0.85, "
          f"U dim D {rep_u.dim_distance_estimate:.3f} >= 0.9 "
          f"(one-sided box-counting check)")


def test_c11_reproducibility(tmp_path):
    """Identical config/seed/threads give byte-identical CSV artifacts."""
    from carpetlab.cli import run
    from carpetlab.config import ExperimentConfig

    ini = """\
[spec]
m = 2
n = 3
weights = 1/2 1/4 0 ; 0 1/8 1/8

[run]
seed = 5
precision = 256
threads = 2

[scenery]
n_steps = 3000

[project]
s_grid = 0.4
samples = 8
depth = 8

[distset]
depth = 6
"""
    artifacts = ["dim.csv", "scenery.csv", "project.csv", "distset.csv"]
    outs = []
    for name in ("first", "second"):
        out = tmp_path / name
        cfg = ExperimentConfig.parse(ini)
        for cmd in ("dim", "scenery", "project", "distset"):
            assert run(cmd, cfg, out) == 0
        outs.append(out)
    for artifact in artifacts:
        a = (outs[0] / artifact).read_bytes()
        b = (outs[1] / artifact).read_bytes()
        assert a == b, f"{artifact} differs between identical runs"
    print(f"ACCEPTANCE 11 (reproducibility): PASS - {len(artifacts)} CSV "
          f"artifacts byte-identical across reruns")
