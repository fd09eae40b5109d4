"""Small dense quantum states: partial traces, entropies, Holevo quantity.

Subsystem 0 is the leftmost tensor factor; flattening is row-major, so the
last subsystem index varies fastest.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    NonDistribution,
    NotHermitian,
    NotPositiveSemidefinite,
)

NORM_TOL = 1e-10
HERMITIAN_TOL = 1e-10
EIGEN_CLAMP_TOL = 1e-9
NEGLIGIBLE_WEIGHT = 1e-14


@dataclass(frozen=True, eq=False)
class StateVector:
    amplitudes: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).ravel()
        dims = tuple(int(n) for n in self.dims)
        if any(n < 1 for n in dims) or int(np.prod(dims)) != amps.size:
            raise DimensionMismatch(f"dims {dims} do not match length {amps.size}")
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > NORM_TOL:
            raise NonDistribution(f"state has squared norm {norm2!r}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "dims", dims)

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.dims)

    def density_matrix(self) -> DensityMatrix:
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()), self.dims)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    entries: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        rho = np.asarray(self.entries, dtype=complex)
        dims = tuple(int(n) for n in self.dims)
        n = int(np.prod(dims))
        if rho.shape != (n, n):
            raise DimensionMismatch(f"matrix shape {rho.shape} does not match dims {dims}")
        _check_hermitian(rho)
        if abs(np.trace(rho).real - 1.0) > NORM_TOL:
            raise NonDistribution(f"trace is {np.trace(rho).real!r}")
        _checked_eigenvalues(rho)
        rho = rho.copy()
        rho.setflags(write=False)
        object.__setattr__(self, "entries", rho)
        object.__setattr__(self, "dims", dims)

    def eigenvalues(self) -> np.ndarray:
        return _checked_eigenvalues(self.entries)


@dataclass(frozen=True, eq=False)
class Ensemble:
    weights: np.ndarray
    states: tuple[DensityMatrix, ...]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        states = tuple(s if isinstance(s, DensityMatrix) else _as_density(s) for s in self.states)
        if w.ndim != 1 or len(w) != len(states) or not states:
            raise DimensionMismatch("need one weight per state")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise NonDistribution("ensemble weights are not a distribution")
        if len({s.entries.shape for s in states}) != 1:
            raise DimensionMismatch("ensemble states differ in dimension")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "states", states)

    def average(self) -> np.ndarray:
        return sum(w * s.entries for w, s in zip(self.weights, self.states))


def _as_density(rho) -> DensityMatrix:
    if isinstance(rho, DensityMatrix):
        return rho
    if isinstance(rho, StateVector):
        return rho.density_matrix()
    rho = np.asarray(rho, dtype=complex)
    return DensityMatrix(rho, (rho.shape[0],))


def _check_hermitian(m: np.ndarray) -> None:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    if m.size and np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL:
        raise NotHermitian("matrix is not Hermitian within tolerance")


def _checked_eigenvalues(m: np.ndarray) -> np.ndarray:
    """Eigenvalues of a density operator, clamped to [0, 1]."""
    eigs = np.linalg.eigvalsh(m)
    if eigs.size and eigs[0] < -EIGEN_CLAMP_TOL:
        raise NotPositiveSemidefinite(f"eigenvalue {eigs[0]!r} below -{EIGEN_CLAMP_TOL}")
    return np.clip(eigs, 0.0, 1.0)


def entropy_from_eigenvalues(eigs: np.ndarray) -> float:
    eigs = eigs[eigs > 0]
    return float(max(0.0, -np.sum(eigs * np.log2(eigs))))


def partial_trace(rho: DensityMatrix | StateVector, keep: Iterable[int]) -> DensityMatrix:
    """Reduced state on the subsystems in ``keep`` (returned in ascending order)."""
    dims = rho.dims
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise DimensionMismatch(f"keep={keep} out of range for {len(dims)} subsystems")
    drop = [k for k in range(len(dims)) if k not in keep]
    dk = int(np.prod([dims[k] for k in keep]))
    dd = int(np.prod([dims[k] for k in drop]))
    kept_dims = tuple(dims[k] for k in keep)

    if isinstance(rho, StateVector):
        m = np.transpose(rho.tensor(), keep + drop).reshape(dk, dd)
        return DensityMatrix(m @ m.conj().T, kept_dims)

    n = len(dims)
    t = rho.entries.reshape(dims + dims)
    order = keep + drop + [n + k for k in keep] + [n + k for k in drop]
    t = np.transpose(t, order).reshape(dk, dd, dk, dd)
    return DensityMatrix(np.einsum("ijkj->ik", t), kept_dims)


def von_neumann_entropy(rho: DensityMatrix | np.ndarray) -> float:
    """S(rho) = -tr rho log2 rho."""
    m = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    _check_hermitian(m)
    return entropy_from_eigenvalues(_checked_eigenvalues(m))


def trace_norm(m: np.ndarray | DensityMatrix) -> float:
    """Sum of absolute eigenvalues of a Hermitian matrix."""
    m = m.entries if isinstance(m, DensityMatrix) else np.asarray(m, dtype=complex)
    _check_hermitian(m)
    return float(np.sum(np.abs(np.linalg.eigvalsh(m))))


def holevo_information(e: Ensemble) -> float:
    """S(sum_x w_x rho_x) - sum_x w_x S(rho_x)."""
    avg = von_neumann_entropy(e.average())
    parts = sum(w * von_neumann_entropy(s) for w, s in zip(e.weights, e.states) if w > 0)
    return max(0.0, avg - parts)


def holevo_from_unnormalized(blocks: Sequence[np.ndarray]) -> float:
    """Holevo quantity of the cq-state sum_x |x><x| (x) blocks[x].

    Each block is P(x) rho_x; the average state is their sum.
    """
    total = sum(blocks)
    avg = entropy_from_eigenvalues(_checked_eigenvalues(total))
    parts = 0.0
    for b in blocks:
        w = float(np.trace(b).real)
        # w * S(b / w) <= w log2(dim): negligible, and b / w may overflow
        if w > NEGLIGIBLE_WEIGHT:
            parts += w * entropy_from_eigenvalues(_checked_eigenvalues(b / w))
    return max(0.0, avg - parts)


def ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def kron(*factors: np.ndarray) -> np.ndarray:
    out = np.ones(1, dtype=complex)
    for f in factors:
        out = np.kron(out, f)
    return out
