"""Fixed POVM measurements on subsystems of embedding states."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import unitary_group

from .distributions import JointDistribution, mutual_information
from .embeddings import RegularEmbedding, make_regular
from .errors import DimensionMismatch, NotAPovm
from .quantum import StateVector, kron
from .primitives import Kind, PrimitiveSpec, build_primitive

POVM_TOL = 1e-10
PSD_TOL = 1e-9

_S = 1.0 / np.sqrt(2.0)
ZERO = np.array([1.0, 0.0], dtype=complex)
ONE = np.array([0.0, 1.0], dtype=complex)
PLUS = _S * (ZERO + ONE)
MINUS = _S * (ZERO - ONE)
PHI_PLUS = _S * (kron(ZERO, ZERO) + kron(ONE, ONE))
PHI_MINUS = _S * (kron(ZERO, ZERO) - kron(ONE, ONE))
PSI_PLUS = _S * (kron(ZERO, ONE) + kron(ONE, ZERO))
PSI_MINUS = _S * (kron(ZERO, ONE) - kron(ONE, ZERO))


def projector(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())


@dataclass(frozen=True, eq=False)
class Povm:
    labels: tuple[str, ...]
    elements: tuple[np.ndarray, ...]

    def __post_init__(self):
        labels = tuple(str(l) for l in self.labels)
        elements = tuple(np.asarray(e, dtype=complex) for e in self.elements)
        if not elements or len(labels) != len(elements):
            raise NotAPovm("need one label per element and at least one element")
        if len(set(labels)) != len(labels):
            raise NotAPovm("POVM labels must be distinct")
        n = elements[0].shape[0]
        for lab, e in zip(labels, elements):
            if e.shape != (n, n):
                raise DimensionMismatch(f"element {lab!r} has shape {e.shape}, expected {(n, n)}")
            if np.max(np.abs(e - e.conj().T)) > POVM_TOL:
                raise NotAPovm(f"element {lab!r} is not Hermitian")
            if np.linalg.eigvalsh(e)[0] < -PSD_TOL:
                raise NotAPovm(f"element {lab!r} is not positive semidefinite")
        gap = np.max(np.abs(sum(elements) - np.eye(n)))
        if gap > POVM_TOL:
            raise NotAPovm(f"elements sum to identity only within {gap:.3g}")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "elements", elements)

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    @classmethod
    def computational(cls, labels: Sequence[str]) -> Povm:
        n = len(labels)
        return cls(tuple(labels), tuple(projector(np.eye(n)[i]) for i in range(n)))


@dataclass(frozen=True, eq=False)
class OutcomeReport:
    """Outcome probabilities and the joint law with the rest measured in the computational basis.

    ``joint[l, j]`` is Pr[outcome l, rest = j]; ``conditional[l]`` is the
    distribution of the rest given outcome l, or ``None`` for a null outcome.
    """

    labels: tuple[str, ...]
    probabilities: np.ndarray
    other_labels: tuple[str, ...]
    joint: np.ndarray
    conditional: tuple[np.ndarray | None, ...]

    def probability(self, label: str) -> float:
        return float(self.probabilities[self.labels.index(label)])

    def as_distribution(self) -> JointDistribution:
        """Joint law as a distribution over (rest, outcome)."""
        probs = np.clip(self.joint.T.real, 0.0, None)
        return JointDistribution(self.other_labels, self.labels, probs / probs.sum())


def povm_outcome_distribution(state: StateVector | RegularEmbedding,
                              subsystem: Iterable[int], povm: Povm) -> OutcomeReport:
    """Measure ``povm`` on ``subsystem`` and the remaining registers in the computational basis."""
    other_labels = None
    if isinstance(state, RegularEmbedding):
        d = state.dist
        state = state.state
        alphabets = (d.x_alphabet, d.y_alphabet)
    else:
        alphabets = None
    dims = state.dims
    sub = sorted(set(int(s) for s in subsystem))
    if not sub or any(s < 0 or s >= len(dims) for s in sub):
        raise DimensionMismatch(f"subsystem {sub} out of range for {len(dims)} registers")
    rest = [k for k in range(len(dims)) if k not in sub]
    ds = int(np.prod([dims[k] for k in sub]))
    dr = int(np.prod([dims[k] for k in rest])) if rest else 1
    if povm.dim != ds:
        raise DimensionMismatch(f"POVM acts on dimension {povm.dim}, subsystem has {ds}")

    m = np.transpose(state.tensor(), sub + rest).reshape(ds, dr)
    joint = np.array([np.einsum("ij,ik,kj->j", m.conj(), e, m).real for e in povm.elements])
    joint = np.clip(joint, 0.0, None)
    probs = joint.sum(axis=1)

    if alphabets is not None and len(rest) == 1:
        other_labels = tuple(alphabets[rest[0]])
    else:
        other_labels = tuple(str(j) for j in range(dr))
    conditional = tuple(row / p if p > POVM_TOL else None for row, p in zip(joint, probs))
    return OutcomeReport(povm.labels, probs, other_labels, joint, conditional)


def canonical_ot_povms() -> tuple[Povm, Povm]:
    """Alice's and Bob's measurements against the canonical 1-2 OT embedding.

    Alice's outcomes "0"/"1" reveal Bob's choice bit c; Bob's reveal x0 XOR x1.
    Each "?" element is the completion to the identity.
    """
    a0 = projector(kron(MINUS, PLUS))
    a1 = projector(kron(PLUS, MINUS))
    b0 = projector(_S * (PSI_MINUS - PHI_MINUS))
    b1 = projector(_S * (PSI_PLUS - PHI_PLUS))
    eye = np.eye(4)
    alice = Povm(("0", "1", "?"), (a0, a1, eye - a0 - a1))
    bob = Povm(("0", "1", "?"), (b0, b1, eye - b0 - b1))
    return alice, bob


@dataclass(frozen=True)
class OtAttackSummary:
    alice_success: float
    alice_correct: float
    bob_success: float
    bob_correct: float


def _conditional_accuracy(report: OutcomeReport, predicate) -> float:
    hit = total = 0.0
    for lab in ("0", "1"):
        row = report.joint[report.labels.index(lab)]
        for j, other in enumerate(report.other_labels):
            total += row[j]
            if predicate(lab, other):
                hit += row[j]
    return hit / total if total > 0 else float("nan")


def ot_attack(embedding: RegularEmbedding | None = None
              ) -> tuple[OtAttackSummary, OutcomeReport, OutcomeReport]:
    """Run both canonical OT POVMs; defaults to the canonical embedding."""
    if embedding is None:
        embedding = make_regular(build_primitive(PrimitiveSpec(Kind.OT)))
    alice, bob = canonical_ot_povms()
    ra = povm_outcome_distribution(embedding, [0], alice)
    rb = povm_outcome_distribution(embedding, [1], bob)

    def c_matches(lab, y):
        return y.split(",")[0] == lab

    def xor_matches(lab, x):
        x0, x1 = x.split(",")
        return str(int(x0) ^ int(x1)) == lab

    summary = OtAttackSummary(
        alice_success=ra.probability("0") + ra.probability("1"),
        alice_correct=_conditional_accuracy(ra, c_matches),
        bob_success=rb.probability("0") + rb.probability("1"),
        bob_correct=_conditional_accuracy(rb, xor_matches),
    )
    return summary, ra, rb


def random_povm(dim: int, outcomes: int, seed: int, projective: bool = False) -> Povm:
    """Seeded random POVM built from columns of a Haar unitary.

    Projective: the first ``outcomes - 1`` columns give rank-1 projectors and
    the last element completes them to the identity. Otherwise the elements are
    V^dag (|l><l| x I) V for an isometry V made of ``dim`` columns of a unitary
    on ``outcomes * dim`` dimensions.
    """
    if outcomes < 2:
        raise NotAPovm("a random POVM needs at least two outcomes")
    if projective:
        if outcomes > dim:
            raise DimensionMismatch("projective POVM cannot have more outcomes than dimensions")
        u = unitary_group.rvs(dim, random_state=seed)
        elements = [projector(u[:, k]) for k in range(outcomes - 1)]
        elements.append(np.eye(dim) - sum(elements))
    else:
        u = unitary_group.rvs(outcomes * dim, random_state=seed)
        v = u[:, :dim].reshape(outcomes, dim, dim)
        elements = [blk.conj().T @ blk for blk in v]
        # absorb rounding so the sum is the identity to machine precision
        elements[-1] = elements[-1] + (np.eye(dim) - sum(elements))
        elements = [(e + e.conj().T) / 2 for e in elements]
    return Povm(tuple(str(k) for k in range(outcomes)), tuple(elements))


def accessible_information(embedding: RegularEmbedding, povm: Povm, side: int = 1) -> float:
    """I(other party's output; outcome) when ``povm`` measures register ``side``."""
    report = povm_outcome_distribution(embedding, [side], povm)
    return mutual_information(report.as_distribution())
