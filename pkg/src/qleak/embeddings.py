"""Regular, general and tripartite embeddings of a primitive and their leakage.

Register order in flattened states is A, B, A', B': Alice's output register,
Bob's output register, then Alice's and Bob's work registers. A general
embedding is stored in the mixture form

    sum_k sqrt(lambda_k) |psi_k>_{AB} |k, k>_{A'B'}

so its tensor has shape (|X|, |Y|, K, K).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .distributions import JointDistribution, mutual_information
from .errors import (
    DimensionMismatch,
    IncorrectEmbedding,
    NonDistribution,
    NumericalError,
    PhaseDomainMismatch,
)
from .quantum import (
    StateVector,
    _checked_eigenvalues,
    entropy_from_eigenvalues,
    holevo_from_unnormalized,
)

TWO_PI = 2.0 * math.pi
SYMMETRY_TOL = 1e-9
CORRECTNESS_TOL = 1e-9


@dataclass(frozen=True)
class PhaseFunction:
    """Phases on support index pairs ``(x_index, y_index)``, reduced to [0, 2pi)."""

    values: Mapping[tuple[int, int], float]

    def __post_init__(self):
        vals = {(int(x), int(y)): float(t) % TWO_PI for (x, y), t in self.values.items()}
        object.__setattr__(self, "values", vals)

    @classmethod
    def canonical(cls, d: JointDistribution) -> PhaseFunction:
        return cls({xy: 0.0 for xy in d.support()})

    @classmethod
    def from_matrix(cls, d: JointDistribution, phases: np.ndarray) -> PhaseFunction:
        phases = np.asarray(phases, dtype=float)
        return cls({xy: phases[xy] for xy in d.support()})

    @classmethod
    def random(cls, d: JointDistribution, rng: np.random.Generator) -> PhaseFunction:
        support = d.support()
        angles = rng.uniform(0.0, TWO_PI, size=len(support))
        return cls(dict(zip(support, angles)))

    def shifted(self, alpha: Sequence[float], beta: Sequence[float]) -> PhaseFunction:
        """theta(x, y) + alpha(x) + beta(y): a local diagonal unitary on each side."""
        return PhaseFunction({(x, y): t + alpha[x] + beta[y] for (x, y), t in self.values.items()})

    def matrix(self, shape: tuple[int, int]) -> np.ndarray:
        out = np.zeros(shape)
        for xy, t in self.values.items():
            out[xy] = t
        return out


def _resolve_theta(d: JointDistribution, theta) -> PhaseFunction:
    if theta is None or (isinstance(theta, str) and theta == "canonical"):
        return PhaseFunction.canonical(d)
    if not isinstance(theta, PhaseFunction):
        theta = PhaseFunction(theta)
    support = set(d.support())
    domain = set(theta.values)
    if domain != support:
        missing = sorted(support - domain)
        extra = sorted(domain - support)
        raise PhaseDomainMismatch(
            f"phase domain differs from support (missing {missing[:4]}, extra {extra[:4]})"
        )
    return theta


@dataclass(frozen=True, eq=False)
class RegularEmbedding:
    dist: JointDistribution
    theta: PhaseFunction
    state: StateVector

    @property
    def amplitudes(self) -> np.ndarray:
        """Amplitudes as an |X| x |Y| matrix."""
        return self.state.amplitudes.reshape(self.dist.shape)


def regular_amplitudes(d: JointDistribution, phases: np.ndarray) -> np.ndarray:
    return np.sqrt(d.probs) * np.exp(1j * np.asarray(phases))


def make_regular(d: JointDistribution, theta=None) -> RegularEmbedding:
    """sum_{x,y} e^{i theta(x,y)} sqrt(P(x,y)) |x, y>; ``theta=None`` is canonical."""
    theta = _resolve_theta(d, theta)
    amps = regular_amplitudes(d, theta.matrix(d.shape))
    amps[d.probs == 0] = 0.0
    return RegularEmbedding(d, theta, StateVector(amps.ravel(), d.shape))


def _gram_entropies(amps: np.ndarray) -> tuple[float, float]:
    rho_a = amps @ amps.conj().T
    rho_b = amps.T @ amps.conj()
    return (entropy_from_eigenvalues(_checked_eigenvalues(rho_a)),
            entropy_from_eigenvalues(_checked_eigenvalues(rho_b)))


def regular_leakage_fast(amps: np.ndarray, mi: float) -> float:
    """S(rho_B) - I(X;Y) from the smaller Gram matrix, without checks."""
    gram = amps @ amps.conj().T if amps.shape[0] <= amps.shape[1] else amps.T @ amps.conj()
    eigs = np.linalg.eigvalsh(gram)
    eigs = eigs[eigs > 0]
    return float(-np.sum(eigs * np.log2(eigs))) - mi


def leakage_regular(e: RegularEmbedding, check: bool = True) -> float:
    """Leakage S(X;B) - I(X;Y) = S(rho_B) - I(X;Y) of a regular embedding.

    With ``check`` both reduced states are diagonalised and must agree.
    """
    mi = mutual_information(e.dist)
    if not check:
        return regular_leakage_fast(e.amplitudes, mi)
    s_a, s_b = _gram_entropies(e.amplitudes)
    if abs(s_a - s_b) > SYMMETRY_TOL:
        raise NumericalError(f"S(A)={s_a!r} and S(B)={s_b!r} differ for a pure state")
    return s_b - mi


@dataclass(frozen=True, eq=False)
class GeneralEmbedding:
    weights: np.ndarray
    components: tuple[RegularEmbedding, ...]
    state: StateVector

    @property
    def dist(self) -> JointDistribution:
        return self.components[0].dist

    def tensor(self) -> np.ndarray:
        return self.state.tensor()


def make_general(d: JointDistribution, weights: Sequence[float],
                 thetas: Sequence) -> GeneralEmbedding:
    weights = np.asarray(weights, dtype=float)
    if weights.ndim != 1 or len(weights) < 1 or len(weights) != len(thetas):
        raise NonDistribution("need one weight per phase function (K >= 1)")
    if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
        raise NonDistribution(f"weights sum to {weights.sum()!r}")
    comps = tuple(make_regular(d, t) for t in thetas)
    k = len(comps)
    psi = np.zeros(d.shape + (k, k), dtype=complex)
    for i, (lam, c) in enumerate(zip(weights, comps)):
        psi[:, :, i, i] = math.sqrt(lam) * c.amplitudes
    state = StateVector(psi.ravel(), d.shape + (k, k))
    return GeneralEmbedding(weights, comps, state)


# cq-state blocks over four-register tensors -------------------------------

def _as_tensor4(state) -> np.ndarray:
    if isinstance(state, GeneralEmbedding):
        return state.tensor()
    if isinstance(state, RegularEmbedding):
        return state.amplitudes[:, :, None, None]
    if isinstance(state, StateVector):
        if len(state.dims) != 4:
            raise DimensionMismatch(f"expected registers (A, B, A', B'), got dims {state.dims}")
        return state.tensor()
    arr = np.asarray(state, dtype=complex)
    if arr.ndim != 4:
        raise DimensionMismatch("expected a 4-register tensor")
    return arr


def _pad(psi: np.ndarray, ka: int, kb: int) -> np.ndarray:
    x, y, a, b = psi.shape
    if (a, b) == (ka, kb):
        return psi
    out = np.zeros((x, y, ka, kb), dtype=complex)
    out[:, :, :a, :b] = psi
    return out


def _bob_blocks(terms: Sequence[tuple[float, np.ndarray]]) -> list[np.ndarray]:
    """Unnormalised P(x) rho^x_{BB'} for each x, for a mixture of pure states."""
    nx, ny, _, kb = terms[0][1].shape
    blocks = [np.zeros((ny * kb, ny * kb), dtype=complex) for _ in range(nx)]
    for w, psi in terms:
        for x in range(nx):
            v = psi[x].transpose(1, 0, 2).reshape(psi.shape[2], ny * kb)
            blocks[x] += w * (v.T @ v.conj())
    return blocks


def _dephase_output(blocks: list[np.ndarray], ny: int, kb: int) -> list[np.ndarray]:
    """Measure Bob's output register in the computational basis, keep B'."""
    mask = np.kron(np.eye(ny), np.ones((kb, kb)))
    return [b * mask for b in blocks]


def _swap(psi: np.ndarray) -> np.ndarray:
    return psi.transpose(1, 0, 3, 2)


def _output_distribution(terms) -> np.ndarray:
    return sum(w * np.sum(np.abs(psi) ** 2, axis=(2, 3)) for w, psi in terms)


@dataclass(frozen=True)
class CorrectnessReport:
    passed: bool
    total_variation: float
    bob_gap: float  # S(X;YB') - I(X;Y)
    alice_gap: float  # S(XA';Y) - I(X;Y)

    def __bool__(self):
        return self.passed


def _correctness(terms, d: JointDistribution) -> CorrectnessReport:
    nx, ny, ka, kb = terms[0][1].shape
    if (nx, ny) != d.shape:
        raise DimensionMismatch(f"output registers {(nx, ny)} vs alphabets {d.shape}")
    tv = 0.5 * float(np.abs(_output_distribution(terms) - d.probs).sum())
    mi = mutual_information(d)
    bob = holevo_from_unnormalized(_dephase_output(_bob_blocks(terms), ny, kb)) - mi
    swapped = [(w, _swap(psi)) for w, psi in terms]
    alice = holevo_from_unnormalized(_dephase_output(_bob_blocks(swapped), nx, ka)) - mi
    passed = tv <= CORRECTNESS_TOL and abs(bob) <= CORRECTNESS_TOL and abs(alice) <= CORRECTNESS_TOL
    return CorrectnessReport(passed, tv, bob, alice)


def correctness_check(state, d: JointDistribution) -> CorrectnessReport:
    """Check the output distribution and both work-register Markov conditions.

    ``state`` is a four-register pure state (A, B, A', B'); empty work
    registers are dimension 1.
    """
    return _correctness([(1.0, _as_tensor4(state))], d)


def _two_sided_information(terms) -> tuple[float, float]:
    """(S(X;BB'), S(AA';Y)) of a mixture of four-register pure states."""
    s_x_b = holevo_from_unnormalized(_bob_blocks(terms))
    s_a_y = holevo_from_unnormalized(_bob_blocks([(w, _swap(psi)) for w, psi in terms]))
    return s_x_b, s_a_y


def leakage_general(g: GeneralEmbedding, check: bool = True) -> float:
    """max{S(X;BB'), S(AA';Y)} - I(X;Y); the two sides must agree."""
    mi = mutual_information(g.dist)
    terms = [(1.0, g.tensor())]
    if not check:
        return holevo_from_unnormalized(_bob_blocks(terms)) - mi
    s_x_b, s_a_y = _two_sided_information(terms)
    if abs(s_x_b - s_a_y) > SYMMETRY_TOL:
        raise NumericalError(f"asymmetric leakage: {s_x_b!r} vs {s_a_y!r}")
    return max(s_x_b, s_a_y) - mi


def regularize(g: GeneralEmbedding) -> list[tuple[float, RegularEmbedding]]:
    """The (lambda_k, psi_k) components, in input order."""
    return [(float(w), c) for w, c in zip(g.weights, g.components)]


@dataclass(frozen=True, eq=False)
class TripartiteImplementation:
    """A mixture sum_e P_E(e) |psi^e><psi^e| obtained by tracing out a trusted
    environment. Components need not be embeddings of ``dist`` themselves;
    only the mixture must reproduce it."""

    dist: JointDistribution
    env_weights: np.ndarray
    env_states: tuple = field(default=())

    def __post_init__(self):
        w = np.asarray(self.env_weights, dtype=float)
        states = tuple(self.env_states)
        if w.ndim != 1 or len(w) != len(states) or not states:
            raise NonDistribution("need one environment weight per state")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise NonDistribution("environment weights are not a distribution")
        tensors = [_as_tensor4(s) for s in states]
        if any(t.shape[:2] != self.dist.shape for t in tensors):
            raise DimensionMismatch("environment states do not share the alphabets")
        object.__setattr__(self, "env_weights", w)
        object.__setattr__(self, "env_states", states)
        tv = 0.5 * float(np.abs(_output_distribution(self.terms()) - self.dist.probs).sum())
        if tv > CORRECTNESS_TOL:
            raise IncorrectEmbedding(f"mixture output is {tv:.3g} away from the target")

    def terms(self) -> list[tuple[float, np.ndarray]]:
        tensors = [_as_tensor4(s) for s in self.env_states]
        ka = max(t.shape[2] for t in tensors)
        kb = max(t.shape[3] for t in tensors)
        return [(float(w), _pad(t, ka, kb)) for w, t in zip(self.env_weights, tensors)]


def classical_implementation(d: JointDistribution) -> TripartiteImplementation:
    """The environment samples (x, y) and hands out basis states |x>|y>."""
    weights, states = [], []
    for x, y in d.support():
        psi = np.zeros(d.shape + (1, 1), dtype=complex)
        psi[x, y, 0, 0] = 1.0
        weights.append(d.probs[x, y])
        states.append(psi)
    return TripartiteImplementation(d, np.array(weights), tuple(states))


def mix_implementations(parts: Sequence[tuple[float, TripartiteImplementation]]
                        ) -> TripartiteImplementation:
    """Convex combination of implementations of the same primitive."""
    d = parts[0][1].dist
    weights, states = [], []
    for p, t in parts:
        weights.extend(p * t.env_weights)
        states.extend(t.env_states)
    return TripartiteImplementation(d, np.array(weights), tuple(states))


def tripartite_leakage(t: TripartiteImplementation) -> tuple[float, float]:
    """(S(X;BB') - I(X;Y), S(AA';Y) - I(X;Y)); not symmetrised."""
    mi = mutual_information(t.dist)
    s_x_b, s_a_y = _two_sided_information(t.terms())
    return s_x_b - mi, s_a_y - mi


def tripartite_correctness(t: TripartiteImplementation) -> CorrectnessReport:
    return _correctness(t.terms(), t.dist)
