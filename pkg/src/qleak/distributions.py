"""Finite joint distributions P_{X,Y} and their classical information measures.

Alice holds X (rows), Bob holds Y (columns). All entropies are in bits.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Hashable, Mapping, Sequence

import numpy as np

from .errors import (
    AlphabetTooLarge,
    NonDistribution,
    NumericalError,
    ZeroProbabilityEvent,
)

NORMALIZATION_TOL = 1e-12
ENTROPY_INPUT_TOL = 1e-9
GROUPING_TOL = 1e-9
TRIVIALITY_TOL = 1e-9
RELABEL_TOL = 1e-9
MAX_RELABEL_SYMBOLS = 8


class Side(str, Enum):
    ALICE = "alice"
    BOB = "bob"


@dataclass(frozen=True, eq=False)
class JointDistribution:
    x_alphabet: tuple[str, ...]
    y_alphabet: tuple[str, ...]
    probs: np.ndarray

    def __post_init__(self):
        xs, ys = tuple(self.x_alphabet), tuple(self.y_alphabet)
        probs = np.array(self.probs, dtype=float)
        if probs.ndim != 2 or probs.shape != (len(xs), len(ys)):
            raise NonDistribution(
                f"probs has shape {probs.shape}, expected {(len(xs), len(ys))}"
            )
        for name, alphabet in (("x", xs), ("y", ys)):
            if len(set(alphabet)) != len(alphabet):
                raise NonDistribution(f"{name}_alphabet has repeated symbols")
        if not np.all(np.isfinite(probs)) or np.any(probs < 0):
            raise NonDistribution("probabilities must be finite and non-negative")
        total = probs.sum()
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise NonDistribution(f"probabilities sum to {total!r}, not 1")
        probs.setflags(write=False)
        object.__setattr__(self, "x_alphabet", xs)
        object.__setattr__(self, "y_alphabet", ys)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_dict(cls, table: Mapping[tuple[str, str], float],
                  x_alphabet: Sequence[str] | None = None,
                  y_alphabet: Sequence[str] | None = None) -> JointDistribution:
        """Build from a sparse ``{(x, y): p}`` mapping; alphabets default to
        first-appearance order."""
        if x_alphabet is None:
            x_alphabet = list(dict.fromkeys(x for x, _ in table))
        if y_alphabet is None:
            y_alphabet = list(dict.fromkeys(y for _, y in table))
        xi = {s: i for i, s in enumerate(x_alphabet)}
        yi = {s: i for i, s in enumerate(y_alphabet)}
        probs = np.zeros((len(x_alphabet), len(y_alphabet)))
        for (x, y), p in table.items():
            probs[xi[x], yi[y]] += float(p)
        return cls(tuple(x_alphabet), tuple(y_alphabet), probs)

    @property
    def shape(self) -> tuple[int, int]:
        return self.probs.shape

    @property
    def px(self) -> np.ndarray:
        return self.probs.sum(axis=1)

    @property
    def py(self) -> np.ndarray:
        return self.probs.sum(axis=0)

    def support(self) -> list[tuple[int, int]]:
        """Index pairs with strictly positive mass, row-major order."""
        return [tuple(ix) for ix in np.argwhere(self.probs > 0)]

    def prob(self, x: str, y: str) -> float:
        return float(self.probs[self.x_alphabet.index(x), self.y_alphabet.index(y)])

    def transpose(self) -> JointDistribution:
        """Swap the roles of Alice and Bob."""
        return JointDistribution(self.y_alphabet, self.x_alphabet, self.probs.T)

    def drop_zero_symbols(self) -> JointDistribution:
        keep_x = self.px > 0
        keep_y = self.py > 0
        return JointDistribution(
            tuple(s for s, k in zip(self.x_alphabet, keep_x) if k),
            tuple(s for s, k in zip(self.y_alphabet, keep_y) if k),
            self.probs[np.ix_(keep_x, keep_y)],
        )

    def total_variation(self, other: JointDistribution) -> float:
        if self.x_alphabet != other.x_alphabet or self.y_alphabet != other.y_alphabet:
            raise ValueError("alphabets differ; reorder before comparing")
        return 0.5 * float(np.abs(self.probs - other.probs).sum())

    def __repr__(self):
        return (f"JointDistribution({len(self.x_alphabet)}x{len(self.y_alphabet)}, "
                f"support={len(self.support())})")


def shannon_entropy(p) -> float:
    """Shannon entropy in bits, with 0 log 0 = 0."""
    p = np.asarray(p, dtype=float).ravel()
    if p.size == 0 or np.any(p < -ENTROPY_INPUT_TOL) or abs(p.sum() - 1.0) > ENTROPY_INPUT_TOL:
        raise NonDistribution("not a probability vector")
    p = p[p > 0]
    return float(max(0.0, -np.sum(p * np.log2(p))))


def binary_entropy(q: float) -> float:
    return shannon_entropy([q, 1.0 - q])


def _entropy_unchecked(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def mutual_information(d: JointDistribution) -> float:
    """I(X;Y) = H(X) + H(Y) - H(XY)."""
    value = (_entropy_unchecked(d.px) + _entropy_unchecked(d.py)
             - _entropy_unchecked(d.probs.ravel()))
    return max(0.0, value)


def conditional_entropy(d: JointDistribution, side: Side | str = Side.ALICE) -> float:
    """H(X|Y) for side Alice, H(Y|X) for side Bob."""
    side = Side(side)
    other = d.py if side is Side.ALICE else d.px
    return max(0.0, _entropy_unchecked(d.probs.ravel()) - _entropy_unchecked(other))


@dataclass(frozen=True)
class DependentPartMap:
    """Result of collapsing one side's symbols with equal conditionals.

    ``class_of`` maps every symbol of positive marginal on the collapsed side
    to its class id. ``quotient`` keeps Alice on rows whichever side was
    collapsed.
    """

    source: Side
    class_of: dict[str, int]
    class_count: int
    quotient: JointDistribution

    def classes(self) -> list[list[str]]:
        out: list[list[str]] = [[] for _ in range(self.class_count)]
        for sym, k in self.class_of.items():
            out[k].append(sym)
        return out


def dependent_part(d: JointDistribution, side: Side | str) -> DependentPartMap:
    """Dependent part of Alice's output w.r.t. Bob's (side Alice), or vice versa.

    Symbols are grouped when their conditional rows agree entry-wise within
    ``GROUPING_TOL``; class ids follow first appearance.
    """
    side = Side(side)
    d = d.drop_zero_symbols()
    table = d.probs if side is Side.ALICE else d.probs.T
    symbols = d.x_alphabet if side is Side.ALICE else d.y_alphabet
    conditionals = table / table.sum(axis=1, keepdims=True)

    reps: list[np.ndarray] = []
    class_of: dict[str, int] = {}
    for sym, row in zip(symbols, conditionals):
        for k, rep in enumerate(reps):
            if np.max(np.abs(rep - row)) <= GROUPING_TOL:
                class_of[sym] = k
                break
        else:
            class_of[sym] = len(reps)
            reps.append(row)

    merged = np.zeros((len(reps), table.shape[1]))
    members: list[list[str]] = [[] for _ in reps]
    for sym, row in zip(symbols, table):
        merged[class_of[sym]] += row
        members[class_of[sym]].append(sym)
    labels = tuple("|".join(m) for m in members)
    if side is Side.ALICE:
        quotient = JointDistribution(labels, d.y_alphabet, merged)
    else:
        quotient = JointDistribution(d.x_alphabet, labels, merged.T)
    return DependentPartMap(side, class_of, len(reps), quotient)


def dependent_quotient(d: JointDistribution) -> JointDistribution:
    """P of (X collapsed w.r.t. Y, Y collapsed w.r.t. X)."""
    q = dependent_part(d, Side.ALICE).quotient
    return dependent_part(q, Side.BOB).quotient


def monotone(d: JointDistribution, side: Side | str) -> float:
    """H(X↘Y | Y) for side Alice, H(Y↘X | X) for side Bob."""
    side = Side(side)
    quotient = dependent_part(d, side).quotient
    return conditional_entropy(quotient, side)


def is_trivial(d: JointDistribution) -> bool:
    """True iff the primitive can be generated by a classical HBC protocol."""
    alice = monotone(d, Side.ALICE)
    bob = monotone(d, Side.BOB)
    trivial = alice <= TRIVIALITY_TOL
    if trivial != (bob <= TRIVIALITY_TOL):
        raise NumericalError(
            f"monotones disagree on triviality: alice={alice!r}, bob={bob!r}"
        )
    return trivial


Projection = Callable[[str], tuple[Hashable, Hashable]]


def _identity_projection(symbol: str) -> tuple[str, None]:
    return symbol, None


def condition_on(d: JointDistribution,
                 x_projection: Projection | None,
                 y_projection: Projection | None,
                 x_value=None, y_value=None) -> JointDistribution:
    """Condition on the "conditioned parts" of each symbol and keep the rest.

    A projection splits a symbol into ``(kept, conditioned)``. A value of
    ``None`` leaves that side unconditioned (its projection is ignored).
    Kept parts are listed in first-appearance order among symbols that are
    consistent with the event.
    """
    xp = x_projection if x_value is not None else _identity_projection
    yp = y_projection if y_value is not None else _identity_projection
    if xp is None or yp is None:
        raise ValueError("a projection is required on each conditioned side")

    x_parts = [xp(s) for s in d.x_alphabet]
    y_parts = [yp(s) for s in d.y_alphabet]
    rows = [i for i, (_, c) in enumerate(x_parts) if x_value is None or c == x_value]
    cols = [j for j, (_, c) in enumerate(y_parts) if y_value is None or c == y_value]
    kept_x = list(dict.fromkeys(x_parts[i][0] for i in rows))
    kept_y = list(dict.fromkeys(y_parts[j][0] for j in cols))
    xi = {k: n for n, k in enumerate(kept_x)}
    yi = {k: n for n, k in enumerate(kept_y)}

    table = np.zeros((len(kept_x), len(kept_y)))
    for i in rows:
        for j in cols:
            table[xi[x_parts[i][0]], yi[y_parts[j][0]]] += d.probs[i, j]
    mass = table.sum()
    if mass <= 0:
        raise ZeroProbabilityEvent(f"event x={x_value!r}, y={y_value!r} has probability 0")
    return JointDistribution(tuple(str(k) for k in kept_x),
                             tuple(str(k) for k in kept_y),
                             table / mass)


def _canonical_form(m: np.ndarray) -> np.ndarray:
    key = np.round(m, 12)
    for _ in range(2 * sum(m.shape) + 2):
        rows = np.lexsort(key.T[::-1])
        key = key[rows]
        cols = np.lexsort(key[::-1])
        key = key[:, cols]
        if np.array_equal(rows, np.arange(len(rows))) and np.array_equal(
                cols, np.arange(len(cols))):
            break
    return key


def _columns_match(a: np.ndarray, b: np.ndarray) -> bool:
    ka = np.round(a, 12)
    kb = np.round(b, 12)
    ca = a[:, np.lexsort(ka[::-1])]
    cb = b[:, np.lexsort(kb[::-1])]
    return bool(np.max(np.abs(ca - cb), initial=0.0) <= RELABEL_TOL)


def equivalent_up_to_relabeling(d1: JointDistribution, d2: JointDistribution,
                                max_symbols: int = MAX_RELABEL_SYMBOLS) -> bool:
    """Whether permuting the alphabets of ``d1`` yields ``d2`` (within 1e-9).

    Zero-probability symbols are ignored on both sides. A canonical sort is
    tried first; on failure an exhaustive search over row permutations
    (restricted to rows with matching sorted entries) decides.
    """
    a = d1.drop_zero_symbols().probs
    b = d2.drop_zero_symbols().probs
    if a.shape != b.shape:
        return False
    if np.max(np.abs(np.sort(a, axis=None) - np.sort(b, axis=None))) > RELABEL_TOL:
        return False
    if np.max(np.abs(_canonical_form(a) - _canonical_form(b))) <= RELABEL_TOL:
        return True

    if a.shape[0] > a.shape[1]:
        a, b = a.T, b.T
    n = a.shape[0]
    if n > max_symbols:
        raise AlphabetTooLarge(
            f"exhaustive relabeling over {n} symbols exceeds bound {max_symbols}"
        )
    sorted_a = np.sort(a, axis=1)
    sorted_b = np.sort(b, axis=1)
    candidates = [
        [j for j in range(n) if np.max(np.abs(sorted_a[i] - sorted_b[j])) <= RELABEL_TOL]
        for i in range(n)
    ]
    if any(not c for c in candidates):
        return False

    def extend(perm: list[int]) -> bool:
        if len(perm) == n:
            return True
        i = len(perm)
        for j in candidates[i]:
            if j in perm:
                continue
            trial = perm + [j]
            if _columns_match(a[: i + 1], b[trial]) and extend(trial):
                return True
        return False

    return extend([])


def reducibility_mass(big: JointDistribution, small: JointDistribution,
                      x_projection: Projection, y_projection: Projection) -> float:
    """Total probability of conditioning events under which ``big`` restricted
    to the kept parts is a relabeling of ``small``.

    This is ``1 - delta`` in the reducibility condition: a value of 1 means
    every conditional of ``big`` looks like ``small``.
    """
    x_cond = list(dict.fromkeys(x_projection(s)[1] for s in big.x_alphabet))
    y_cond = list(dict.fromkeys(y_projection(s)[1] for s in big.y_alphabet))
    x_of = np.array([x_projection(s)[1] for s in big.x_alphabet], dtype=object)
    y_of = np.array([y_projection(s)[1] for s in big.y_alphabet], dtype=object)
    mass = 0.0
    for xv in x_cond:
        for yv in y_cond:
            weight = float(big.probs[np.ix_(x_of == xv, y_of == yv)].sum())
            if weight <= 0:
                continue
            cond = condition_on(big, x_projection, y_projection, xv, yv)
            if equivalent_up_to_relabeling(cond, small):
                mass += weight
    return mass
