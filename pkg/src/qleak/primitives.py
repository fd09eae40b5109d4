"""Randomised universal primitives and their closed-form leakage results.

Symbols: bit strings are literal strings such as ``"01"``, composite symbols
are comma-joined (``"x0,x1"``, ``"c,y"``) and the erasure is ``"⊥"``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

from .distributions import JointDistribution, binary_entropy
from .embeddings import make_regular
from .errors import InvalidSpec

ERASURE = "⊥"
MAX_R = 12
MAX_R_STRING_OT = 4
MAX_R_CLOSED_FORM = 60
OTP_THRESHOLD = 0.5 - 1.0 / (2.0 * math.sqrt(2.0))


class Kind(str, Enum):
    ROT = "rot"
    OT = "ot"
    OT_STRING = "ot-string"
    SAND = "sand"
    OT_NOISY = "ot-noisy"


@dataclass(frozen=True)
class PrimitiveSpec:
    kind: Kind
    r: int | None = None
    p: float | None = None

    def __post_init__(self):
        try:
            kind = Kind(self.kind)
        except ValueError:
            raise InvalidSpec(f"unknown primitive {self.kind!r}") from None
        object.__setattr__(self, "kind", kind)
        needs_r = kind in (Kind.ROT, Kind.OT_STRING)
        needs_p = kind is Kind.OT_NOISY
        if needs_r != (self.r is not None):
            raise InvalidSpec(f"{kind.value}: r is {'required' if needs_r else 'not allowed'}")
        if needs_p != (self.p is not None):
            raise InvalidSpec(f"{kind.value}: p is {'required' if needs_p else 'not allowed'}")
        if needs_r:
            cap = MAX_R_STRING_OT if kind is Kind.OT_STRING else MAX_R
            if int(self.r) != self.r or not 1 <= self.r <= cap:
                raise InvalidSpec(f"{kind.value}: r must be an integer in [1, {cap}]")
        if needs_p and not 0.0 < self.p < 0.5:
            raise InvalidSpec(f"{kind.value}: p must lie in (0, 1/2)")

    @property
    def label(self) -> str:
        if self.r is not None:
            return f"{self.kind.value}(r={self.r})"
        if self.p is not None:
            return f"{self.kind.value}(p={self.p:g})"
        return self.kind.value


def _bits(r: int) -> list[str]:
    return ["".join(b) for b in itertools.product("01", repeat=r)]


def _string_ot(r: int, noise: float = 0.0) -> JointDistribution:
    strings = _bits(r)
    xs = [f"{a},{b}" for a in strings for b in strings]
    ys = [f"{c},{s}" for c in "01" for s in strings]
    n = len(strings)
    probs = np.zeros((len(xs), len(ys)))
    base = 1.0 / (2 * n * n)
    for i0, i1 in itertools.product(range(n), repeat=2):
        row = i0 * n + i1
        for c, chosen in ((0, i0), (1, i1)):
            if noise:
                probs[row, c * n:(c + 1) * n] = noise * base
            probs[row, c * n + chosen] = (1.0 - noise) * base
    return JointDistribution(tuple(xs), tuple(ys), probs)


def build_primitive(spec: PrimitiveSpec) -> JointDistribution:
    kind = spec.kind
    if kind is Kind.ROT:
        strings = _bits(spec.r)
        mass = 2.0 ** (-spec.r - 1)
        probs = np.zeros((len(strings), len(strings) + 1))
        probs[:, :-1] = np.eye(len(strings)) * mass
        probs[:, -1] = mass
        return JointDistribution(tuple(strings), tuple(strings) + (ERASURE,), probs)
    if kind is Kind.OT:
        return _string_ot(1)
    if kind is Kind.OT_STRING:
        return _string_ot(spec.r)
    if kind is Kind.OT_NOISY:
        return _string_ot(1, noise=spec.p)
    if kind is Kind.SAND:
        table = {}
        for x, a, y, b in itertools.product((0, 1), repeat=4):
            if (x & y) == (a ^ b):
                table[(f"{x},{a}", f"{y},{b}")] = 1 / 8
        sym = ["0,0", "0,1", "1,0", "1,1"]
        return JointDistribution.from_dict(table, sym, sym)
    raise InvalidSpec(f"unsupported primitive {kind!r}")


def rot_leakage_gap(r: int) -> float:
    """1 - leakage of string Rabin OT, computed without cancellation.

    With u = 2^-r the reduced state has eigenvalue (1+u)/2 once and u/2 with
    multiplicity 2^r - 1, which gives

        1 - leakage = (1+u) log2(1+u) / 2 + r u / 2.
    """
    if int(r) != r or not 1 <= r <= MAX_R_CLOSED_FORM:
        raise InvalidSpec(f"r must be an integer in [1, {MAX_R_CLOSED_FORM}]")
    u = 2.0 ** (-r)
    return (1.0 + u) * math.log1p(u) / (2.0 * math.log(2.0)) + r * u / 2.0


def rot_closed_form_leakage(r: int) -> float:
    """Leakage of every regular embedding of string Rabin OT of length r."""
    return 1.0 - rot_leakage_gap(r)


def rot_eigenvalues(r: int) -> np.ndarray:
    u = 2.0 ** (-r)
    return np.array([(1.0 + u) / 2.0] + [u / 2.0] * (2 ** r - 1))


def ot_eigenvalues(omega: float) -> np.ndarray:
    q = (float(omega) % (2.0 * math.pi)) / 4.0
    c, s = math.cos(q), math.sin(q)
    return np.array([(1 + c) / 4, (1 - c) / 4, (1 + s) / 4, (1 - s) / 4])


def ot_leakage_curve(omega: float) -> tuple[float, np.ndarray]:
    """Leakage of the OT embedding reduced to the single cycle phase omega.

    Returns the leakage S(A) - 1 and the four eigenvalues of Alice's state.
    """
    q = (float(omega) % (2.0 * math.pi)) / 4.0
    s_alice = 1.0 + (binary_entropy((1 - math.cos(q)) / 2)
                     + binary_entropy((1 - math.sin(q)) / 2)) / 2.0
    return s_alice - 1.0, ot_eigenvalues(omega)


def ot_omega_embedding(omega: float):
    """Regular OT embedding whose only non-zero phase sits on ((1,1),(1,1)).

    Every regular OT embedding is locally equivalent to this one for the
    corresponding cycle phase omega.
    """
    d = build_primitive(PrimitiveSpec(Kind.OT))
    theta = {xy: 0.0 for xy in d.support()}
    theta[(d.x_alphabet.index("1,1"), d.y_alphabet.index("1,1"))] = float(omega)
    return make_regular(d, theta)


def ot_cycle_phase(d: JointDistribution, phases: np.ndarray) -> float:
    """Alternating phase sum around the 8-cycle of the OT support graph, in [0, 2pi).

    The cycle is 11 -(1,1)- 01 -(0,0)- 00 -(1,0)- 10 -(0,1)- 11; the sum is
    invariant under local phase shifts and equals omega for ot_omega_embedding.
    """
    def t(x, y):
        return phases[d.x_alphabet.index(x), d.y_alphabet.index(y)]

    omega = (t("1,1", "1,1") - t("0,1", "1,1") + t("0,1", "0,0") - t("0,0", "0,0")
             + t("0,0", "1,0") - t("1,0", "1,0") + t("1,0", "0,1") - t("1,1", "0,1"))
    return omega % (2.0 * math.pi)


def otp_lower_bound(p: float, proof_constant: bool = False) -> float | None:
    """Lower bound on the leakage of noisy OT, or ``None`` when not applicable.

    The default divisor is 8 ln 2; ``proof_constant=True`` uses 32 ln 2.
    """
    if not 0.0 <= p < 0.5:
        raise InvalidSpec("p must lie in [0, 1/2)")
    if p > OTP_THRESHOLD:
        return None
    gap = 0.5 - p - math.sqrt(p * (1.0 - p))
    divisor = (32.0 if proof_constant else 8.0) * math.log(2.0)
    return max(gap, 0.0) ** 2 / divisor


def simulate_classical_otp_quarter() -> JointDistribution:
    """Enumerate the two-message classical protocol for noisy OT with p = 1/4.

    Alice sends x_a for a uniform a; Bob picks a uniform c and outputs y = x_a.
    """
    table: dict[tuple[str, str], Fraction] = {}
    for x0, x1, a, c in itertools.product((0, 1), repeat=4):
        y = (x0, x1)[a]
        key = (f"{x0},{x1}", f"{c},{y}")
        table[key] = table.get(key, Fraction(0)) + Fraction(1, 16)
    sym = ["0,0", "0,1", "1,0", "1,1"]
    return JointDistribution.from_dict({k: float(v) for k, v in table.items()}, sym, sym)


def success_probability(d: JointDistribution) -> float:
    """Pr[y = x_c] for a distribution over ((x0,x1),(c,y))."""
    total = 0.0
    for i, x in enumerate(d.x_alphabet):
        xs = x.split(",")
        for j, y in enumerate(d.y_alphabet):
            c, val = y.split(",")
            if xs[int(c)] == val:
                total += d.probs[i, j]
    return total
