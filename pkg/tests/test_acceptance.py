"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``criterion N: PASS|FAIL`` line (run with ``-s`` to
see them inline); the lines are also repeated in the terminal summary.
"""
import math
import time

import numpy as np
import pytest

import conftest
from conftest import random_dist, random_trivial_dist
from qleak.attacks import accessible_information, ot_attack, povm_outcome_distribution, random_povm
from qleak.distributions import (
    JointDistribution,
    binary_entropy,
    dependent_quotient,
    is_trivial,
)
from qleak.embeddings import (
    PhaseFunction,
    TripartiteImplementation,
    classical_implementation,
    leakage_general,
    leakage_regular,
    make_general,
    make_regular,
    tripartite_leakage,
)
from qleak.optimizer import OptimizerConfig, minimize_leakage
from qleak.primitives import (
    Kind,
    PrimitiveSpec,
    build_primitive,
    ot_cycle_phase,
    otp_lower_bound,
    rot_closed_form_leakage,
    rot_leakage_gap,
    simulate_classical_otp_quarter,
    success_probability,
)
from qleak.quantum import holevo_from_unnormalized, partial_trace

ROT1 = binary_entropy(0.25) - 0.5


def verdict(number: int, ok: bool, elapsed: float, budget: float, detail: str = "") -> None:
    in_time = elapsed < budget
    status = "PASS" if ok and in_time else "FAIL"
    line = f"criterion {number}: {status} ({elapsed:.2f}s / {budget:g}s budget){' ' + detail if detail else ''}"
    print(line)
    conftest.ACCEPTANCE_LINES.append(line)
    assert ok, line
    assert in_time, line


def test_criterion_1_rabin_exact():
    start = time.perf_counter()
    d = build_primitive(PrimitiveSpec(Kind.ROT, r=1))
    canonical = leakage_regular(make_regular(d))
    rng = np.random.default_rng(101)
    others = [leakage_regular(make_regular(d, PhaseFunction.random(d, rng))) for _ in range(20)]
    spread = max(abs(v - canonical) for v in others)
    ok = abs(canonical - ROT1) <= 1e-9 and spread <= 1e-9
    verdict(1, ok, time.perf_counter() - start, 1.0,
            f"leakage={canonical:.12f} phase spread={spread:.1e}")


def test_criterion_2_rabin_family():
    start = time.perf_counter()
    errors = []
    for r in range(1, 7):
        d = build_primitive(PrimitiveSpec(Kind.ROT, r=r))
        errors.append(abs(leakage_regular(make_regular(d)) - rot_closed_form_leakage(r)))
    gaps = np.array([rot_leakage_gap(r) for r in range(1, 41)])
    scale = np.array([r * 2.0 ** -r for r in range(1, 41)])
    fitted = float(np.max(gaps / scale))
    ok = (max(errors) <= 1e-9 and bool(np.all(gaps > 0))
          and bool(np.all(np.diff(gaps) < 0)) and fitted < 4)
    verdict(2, ok, time.perf_counter() - start, 5.0,
            f"max numeric error={max(errors):.1e} fitted C={fitted:.4f}")


def _ot_spectrum_formula(omega: float) -> np.ndarray:
    c, s = math.cos(omega / 4), math.sin(omega / 4)
    return np.sort([(1 + c) / 4, (1 - c) / 4, (1 + s) / 4, (1 - s) / 4])


def test_criterion_3_ot_exact():
    start = time.perf_counter()
    d = build_primitive(PrimitiveSpec(Kind.OT))
    res = minimize_leakage(d)
    omega = res.best_free[0] % (2 * math.pi)
    at_zero = min(omega, 2 * math.pi - omega) < 1e-3
    rng = np.random.default_rng(303)
    worst = 0.0
    for _ in range(20):
        theta = PhaseFunction.random(d, rng)
        e = make_regular(d, theta)
        w = ot_cycle_phase(d, theta.matrix(d.shape))
        eigs = np.sort(partial_trace(e.state, [0]).eigenvalues())
        worst = max(worst, float(np.max(np.abs(eigs - _ot_spectrum_formula(w)))))
    ok = abs(res.best_leakage - 0.5) <= 1e-6 and at_zero and worst <= 1e-9
    verdict(3, ok, time.perf_counter() - start, 10.0,
            f"min={res.best_leakage:.9f} at omega={omega:.2e} eigen error={worst:.1e}")


def test_criterion_4_sand():
    start = time.perf_counter()
    res = minimize_leakage(build_primitive(PrimitiveSpec(Kind.SAND)))
    verdict(4, abs(res.best_leakage - 0.5) <= 1e-6, time.perf_counter() - start, 30.0,
            f"min={res.best_leakage:.9f}")


@pytest.mark.slow
def test_criterion_5_string_ot_reduction():
    start = time.perf_counter()
    parts = []
    ok = True
    for r in (2, 3):
        d = build_primitive(PrimitiveSpec(Kind.OT_STRING, r=r))
        res = minimize_leakage(d, OptimizerConfig(starts=8))
        bound = rot_closed_form_leakage(r)
        ok &= res.best_leakage >= bound - 1e-6
        parts.append(f"r={r}: {res.best_leakage:.6f} >= {bound:.6f}")
    verdict(5, ok, time.perf_counter() - start, 300.0, "; ".join(parts))


def test_criterion_6_noisy_ot_bound():
    start = time.perf_counter()
    parts = []
    ok = True
    for p in (0.01, 0.05, 0.1):
        leak = leakage_regular(make_regular(build_primitive(PrimitiveSpec(Kind.OT_NOISY, p=p))))
        for proof in (False, True):
            bound = otp_lower_bound(p, proof_constant=proof)
            ok &= bound is not None and leak >= bound
        parts.append(f"p={p}: {leak:.4f} >= {otp_lower_bound(p):.5f}")
    verdict(6, ok, time.perf_counter() - start, 5.0, "; ".join(parts))


def test_criterion_7_classical_noisy_ot():
    start = time.perf_counter()
    simulated = simulate_classical_otp_quarter()
    target = build_primitive(PrimitiveSpec(Kind.OT_NOISY, p=0.25))
    same = (simulated.x_alphabet == target.x_alphabet and simulated.y_alphabet == target.y_alphabet
            and np.array_equal(simulated.probs, target.probs))
    success = success_probability(simulated)
    trivial = is_trivial(simulated)
    ok = same and abs(success - 0.75) <= 1e-12 and trivial
    verdict(7, ok, time.perf_counter() - start, 1.0,
            f"equal={same} (tv={simulated.total_variation(target):.3f}) "
            f"Pr[y=x_c]={success:.4f} trivial={trivial}")


def test_criterion_8_ot_attack():
    start = time.perf_counter()
    summary, _, _ = ot_attack()
    ok = (abs(summary.alice_success - 0.5) <= 1e-10 and abs(summary.bob_success - 0.5) <= 1e-10
          and abs(summary.bob_correct - 1.0) <= 1e-10)
    verdict(8, ok, time.perf_counter() - start, 1.0,
            f"alice={summary.alice_success:.12f} bob={summary.bob_success:.12f} "
            f"xor correctness={summary.bob_correct:.12f}")


def _random_general(rng: np.random.Generator):
    d = random_dist(rng, int(rng.integers(2, 4)), int(rng.integers(2, 4)), zero_frac=0.25)
    k = int(rng.integers(1, 4))
    weights = rng.dirichlet(np.ones(k))
    return make_general(d, weights, [PhaseFunction.random(d, rng) for _ in range(k)])


def _split_symbols(rng: np.random.Generator) -> JointDistribution:
    """A random table with one Alice and one Bob symbol split into proportional copies."""
    base = random_dist(rng, int(rng.integers(2, 4)), int(rng.integers(2, 4)), zero_frac=0.2)
    w = base.probs
    i = int(rng.integers(w.shape[0]))
    t = rng.uniform(0.2, 0.8)
    w = np.vstack([w, t * w[i]])
    w[i] *= 1 - t
    j = int(rng.integers(w.shape[1]))
    t = rng.uniform(0.2, 0.8)
    w = np.hstack([w, t * w[:, [j]]])
    w[:, j] *= 1 - t
    return conftest.dist_from_weights(w)


@pytest.mark.slow
def test_criterion_9_property_suites():
    start = time.perf_counter()
    failures = {}
    rng = np.random.default_rng(909)

    asym = negative = 0
    for _ in range(100):
        g = _random_general(rng)
        # a single-state "environment" exposes both sides without symmetrising
        bob, alice = tripartite_leakage(TripartiteImplementation(g.dist, np.ones(1), (g.tensor(),)))
        asym += abs(bob - alice) > 1e-9
        negative += leakage_general(g) < -1e-9
    failures["symmetry"] = asym
    failures["non-negativity"] = negative

    bad = 0
    for _ in range(100):
        d = random_dist(rng, int(rng.integers(1, 5)), int(rng.integers(1, 5)), zero_frac=0.3)
        theta = PhaseFunction.random(d, rng)
        moved = theta.shifted(rng.uniform(0, 2 * math.pi, d.shape[0]), rng.uniform(0, 2 * math.pi, d.shape[1]))
        bad += abs(leakage_regular(make_regular(d, theta)) - leakage_regular(make_regular(d, moved))) > 1e-9
    failures["gauge invariance"] = bad

    bad = 0
    for _ in range(50):
        g = _random_general(rng)
        average = sum(w * leakage_regular(c) for w, c in zip(g.weights, g.components))
        bad += leakage_general(g) < average - 1e-9
    failures["mixture inequality"] = bad

    bad = 0
    for n in range(50):
        d = _split_symbols(rng)
        q = dependent_quotient(d)
        full = minimize_leakage(d, OptimizerConfig(starts=4, seed=n)).best_leakage
        reduced = minimize_leakage(q, OptimizerConfig(starts=8, seed=n)).best_leakage
        bad += full < reduced - 1e-6
    failures["quotient inequality"] = bad

    bad = seen = 0
    while seen < 50:
        d = random_dist(rng, int(rng.integers(2, 4)), int(rng.integers(2, 4)), zero_frac=0.3)
        if is_trivial(d):
            continue
        seen += 1
        bad += minimize_leakage(d, OptimizerConfig(starts=4, seed=seen)).best_leakage <= 1e-6
    for _ in range(50):
        d = random_trivial_dist(rng)
        bad += not is_trivial(d)
        bad += minimize_leakage(d, OptimizerConfig(starts=2)).best_leakage > 1e-9
    failures["triviality dichotomy"] = bad

    bad = 0
    for n in range(20):
        d = build_primitive(PrimitiveSpec(Kind.OT) if n % 2 else PrimitiveSpec(Kind.ROT, r=1))
        projective = n % 4 == 0
        outcomes = int(rng.integers(2, d.shape[1] + 1 if projective else 6))
        povm = random_povm(d.shape[1], outcomes, seed=n, projective=projective)
        e = make_regular(d, PhaseFunction.random(d, rng))
        amps = e.amplitudes
        holevo = holevo_from_unnormalized([np.outer(amps[x], amps[x].conj()) for x in range(d.shape[0])])
        total = povm_outcome_distribution(e, [1], povm).probabilities.sum()
        bad += abs(total - 1) > 1e-10
        bad += accessible_information(e, povm) > holevo + 1e-9
    failures["holevo dominance"] = bad

    broken = {k: v for k, v in failures.items() if v}
    verdict(9, not broken, time.perf_counter() - start, 300.0,
            "all suites clean" if not broken else f"failures: {broken}")


def test_criterion_10_classical_tripartite():
    start = time.perf_counter()
    bob, alice = tripartite_leakage(classical_implementation(build_primitive(PrimitiveSpec(Kind.OT))))
    verdict(10, abs(bob) <= 1e-9 and abs(alice) <= 1e-9, time.perf_counter() - start, 1.0,
            f"leakage=({bob:.1e}, {alice:.1e})")
