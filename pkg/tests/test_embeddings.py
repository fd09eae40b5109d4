import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import dist_from_weights, distributions, random_dist, random_trivial_dist
from qleak.distributions import JointDistribution, is_trivial, shannon_entropy
from qleak.embeddings import (
    PhaseFunction,
    TripartiteImplementation,
    classical_implementation,
    correctness_check,
    leakage_general,
    leakage_regular,
    make_general,
    make_regular,
    mix_implementations,
    regularize,
    tripartite_correctness,
    tripartite_leakage,
)
from qleak.errors import IncorrectEmbedding, NonDistribution, PhaseDomainMismatch
from qleak.quantum import StateVector, partial_trace, von_neumann_entropy

# h(1/4) - 1/2 at 30 digits
ROT1_LEAKAGE = 0.3112781244591329

CORRELATED = np.array([[0.4, 0.1], [0.1, 0.4]])


def omega_pi(d: JointDistribution) -> PhaseFunction:
    theta = {xy: 0.0 for xy in d.support()}
    theta[(d.x_alphabet.index("1,1"), d.y_alphabet.index("1,1"))] = math.pi
    return PhaseFunction(theta)


class TestMakeRegular:
    def test_perfect_bit(self, perfect_bit):
        e = make_regular(perfect_bit)
        np.testing.assert_allclose(e.state.amplitudes, [1 / math.sqrt(2), 0, 0, 1 / math.sqrt(2)])

    def test_ot_amplitudes(self, ot):
        amps = make_regular(ot).amplitudes
        nz = amps[np.abs(amps) > 0]
        assert len(nz) == 8
        np.testing.assert_allclose(nz, 1 / (2 * math.sqrt(2)), atol=1e-15)

    def test_missing_pair(self, perfect_bit):
        with pytest.raises(PhaseDomainMismatch):
            make_regular(perfect_bit, {(0, 0): 0.1})

    def test_extra_pair(self, perfect_bit):
        with pytest.raises(PhaseDomainMismatch):
            make_regular(perfect_bit, {(0, 0): 0.1, (1, 1): 0.0, (0, 1): 0.2})

    @given(distributions(), st.integers(0, 2 ** 32 - 1))
    def test_reproduces_distribution(self, d, seed):
        e = make_regular(d, PhaseFunction.random(d, np.random.default_rng(seed)))
        np.testing.assert_allclose(np.abs(e.amplitudes) ** 2, d.probs, atol=1e-10)


class TestLeakageRegular:
    def test_perfect_bit(self, perfect_bit):
        assert leakage_regular(make_regular(perfect_bit)) == pytest.approx(0.0, abs=1e-12)

    def test_rabin(self, rot1):
        assert leakage_regular(make_regular(rot1)) == pytest.approx(ROT1_LEAKAGE, abs=1e-12)

    def test_ot(self, ot):
        assert leakage_regular(make_regular(ot)) == pytest.approx(0.5, abs=1e-12)

    def test_fast_path_matches(self, ot):
        e = make_regular(ot, omega_pi(ot))
        assert leakage_regular(e, check=False) == pytest.approx(leakage_regular(e), abs=1e-12)

    @given(distributions(), st.integers(0, 2 ** 32 - 1))
    def test_non_negative(self, d, seed):
        e = make_regular(d, PhaseFunction.random(d, np.random.default_rng(seed)))
        assert leakage_regular(e) >= -1e-9

    @given(distributions(), st.integers(0, 2 ** 32 - 1))
    def test_gauge_invariance(self, d, seed):
        rng = np.random.default_rng(seed)
        theta = PhaseFunction.random(d, rng)
        alpha = rng.uniform(0, 2 * math.pi, d.shape[0])
        beta = rng.uniform(0, 2 * math.pi, d.shape[1])
        a = leakage_regular(make_regular(d, theta))
        b = leakage_regular(make_regular(d, theta.shifted(alpha, beta)))
        assert a == pytest.approx(b, abs=1e-9)

    def test_nontrivial_canonical_is_strictly_below_entropy(self):
        rng = np.random.default_rng(11)
        checked = 0
        while checked < 30:
            d = random_dist(rng, int(rng.integers(2, 5)), int(rng.integers(2, 5)), zero_frac=0.3)
            if is_trivial(d):
                continue
            e = make_regular(d)
            s_a = von_neumann_entropy(partial_trace(e.state, [0]))
            s_b = von_neumann_entropy(partial_trace(e.state, [1]))
            assert s_b < shannon_entropy(d.px) - 1e-9
            assert s_a < shannon_entropy(d.py) - 1e-9
            checked += 1


class TestGeneral:
    def test_single_component(self, ot):
        g = make_general(ot, [1.0], [None])
        assert g.state.dims == (4, 4, 1, 1)
        np.testing.assert_allclose(g.state.amplitudes, make_regular(ot).state.amplitudes)
        assert leakage_general(g) == pytest.approx(0.5, abs=1e-12)
        assert regularize(g)[0][0] == 1.0

    def test_ot_pair(self, ot):
        g = make_general(ot, [0.5, 0.5], [None, omega_pi(ot)])
        assert g.state.dims == (4, 4, 2, 2)
        ab = partial_trace(g.state, [0, 1]).entries
        expected = sum(0.5 * np.outer(c.state.amplitudes, c.state.amplitudes.conj())
                       for c in g.components)
        np.testing.assert_allclose(ab, expected, atol=1e-10)
        assert correctness_check(g.state, ot)
        parts = regularize(g)
        assert [w for w, _ in parts] == [0.5, 0.5]
        assert parts[1][1] is g.components[1]
        assert min(leakage_regular(c) for _, c in parts) <= leakage_general(g) + 1e-9

    def test_bad_weights(self, ot):
        with pytest.raises(NonDistribution):
            make_general(ot, [0.7, 0.2], [None, None])

    def test_bad_phase_domain(self, perfect_bit):
        with pytest.raises(PhaseDomainMismatch):
            make_general(perfect_bit, [1.0], [{(0, 0): 0.0}])

    def test_rabin_mixture(self, rot1):
        rng = np.random.default_rng(5)
        g = make_general(rot1, [0.5, 0.5], [PhaseFunction.random(rot1, rng) for _ in range(2)])
        assert leakage_general(g) == pytest.approx(ROT1_LEAKAGE, abs=1e-9)

    def test_trivial_mixture(self):
        d = random_trivial_dist(np.random.default_rng(2))
        rng = np.random.default_rng(3)
        g = make_general(d, [0.3, 0.7], [None, None])
        assert leakage_general(g) == pytest.approx(0.0, abs=1e-9)
        del rng

    @given(distributions(max_x=3, max_y=3), st.integers(1, 3), st.integers(0, 2 ** 32 - 1))
    def test_properties(self, d, k, seed):
        rng = np.random.default_rng(seed)
        weights = rng.dirichlet(np.ones(k))
        thetas = [PhaseFunction.random(d, rng) for _ in range(k)]
        g = make_general(d, weights, thetas)
        report = correctness_check(g.state, d)
        assert report, report
        value = leakage_general(g)  # raises on asymmetry beyond 1e-9
        assert value >= -1e-9
        regs = [leakage_regular(c) for c in g.components]
        assert value >= float(np.dot(weights, regs)) - 1e-9
        assert min(regs) <= value + 1e-9


def _state4(d: JointDistribution, dims, place):
    psi = np.zeros(dims, dtype=complex)
    for x, y in d.support():
        psi[place(x, y)] = math.sqrt(d.probs[x, y])
    return StateVector(psi.ravel(), dims)


class TestCorrectness:
    def test_wrong_distribution(self, perfect_bit, independent_bits):
        report = correctness_check(make_regular(perfect_bit).state.amplitudes.reshape(2, 2, 1, 1),
                                   independent_bits)
        assert not report
        assert report.total_variation == pytest.approx(0.5)

    def test_copy_of_x_on_bob_side_fails(self):
        d = dist_from_weights(CORRELATED)
        state = _state4(d, (2, 2, 1, 2), lambda x, y: (x, y, 0, x))
        report = correctness_check(state, d)
        assert not report
        assert report.total_variation == pytest.approx(0.0, abs=1e-12)
        assert report.bob_gap > 0.1
        assert report.alice_gap == pytest.approx(0.0, abs=1e-9)

    def test_copy_of_y_on_alice_side_fails(self):
        d = dist_from_weights(CORRELATED)
        state = _state4(d, (2, 2, 2, 1), lambda x, y: (x, y, y, 0))
        report = correctness_check(state, d)
        assert not report
        assert report.alice_gap > 0.1

    def test_copy_of_y_on_bob_side_passes(self):
        # B' is a function of Y here, so it adds nothing to Bob's knowledge of X
        d = dist_from_weights(CORRELATED)
        state = _state4(d, (2, 2, 1, 2), lambda x, y: (x, y, 0, y))
        assert correctness_check(state, d)


class TestTripartite:
    def test_single_environment(self, ot):
        g = make_general(ot, [0.5, 0.5], [None, omega_pi(ot)])
        t = TripartiteImplementation(ot, np.array([1.0]), (g,))
        bob, alice = tripartite_leakage(t)
        assert bob == pytest.approx(leakage_general(g), abs=1e-9)
        assert alice == pytest.approx(leakage_general(g), abs=1e-9)

    def test_classical_ot(self, ot):
        t = classical_implementation(ot)
        bob, alice = tripartite_leakage(t)
        assert bob == pytest.approx(0.0, abs=1e-9)
        assert alice == pytest.approx(0.0, abs=1e-9)
        assert tripartite_correctness(t)

    def test_half_classical_half_canonical(self, ot):
        canonical = TripartiteImplementation(ot, np.array([1.0]), (make_regular(ot),))
        t = mix_implementations([(0.5, canonical), (0.5, classical_implementation(ot))])
        for value in tripartite_leakage(t):
            assert 1e-6 < value < 0.5 - 1e-6

    def test_rejects_wrong_mixture(self, ot, perfect_bit):
        bad = np.zeros((4, 4, 1, 1), dtype=complex)
        bad[0, 0, 0, 0] = 1.0
        with pytest.raises(IncorrectEmbedding):
            TripartiteImplementation(ot, np.array([1.0]), (bad,))

    @given(distributions(max_x=3, max_y=3), st.integers(0, 2 ** 32 - 1))
    def test_non_negative(self, d, seed):
        rng = np.random.default_rng(seed)
        quantum = TripartiteImplementation(d, np.array([1.0]),
                                           (make_regular(d, PhaseFunction.random(d, rng)),))
        lam = float(rng.random())
        t = mix_implementations([(lam, quantum), (1 - lam, classical_implementation(d))])
        for value in tripartite_leakage(t):
            assert value >= -1e-9
