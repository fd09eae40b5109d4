from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qleak.distributions import JointDistribution
from qleak.primitives import Kind, PrimitiveSpec, build_primitive

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def labels(prefix: str, n: int) -> tuple[str, ...]:
    return tuple(f"{prefix}{i}" for i in range(n))


def dist_from_weights(w: np.ndarray) -> JointDistribution:
    w = np.asarray(w, dtype=float)
    return JointDistribution(labels("x", w.shape[0]), labels("y", w.shape[1]), w / w.sum())


def random_dist(rng: np.random.Generator, nx: int, ny: int, zero_frac: float = 0.0
                ) -> JointDistribution:
    w = rng.random((nx, ny))
    if zero_frac:
        w[rng.random((nx, ny)) < zero_frac] = 0.0
    if w.sum() == 0:
        w[0, 0] = 1.0
    return dist_from_weights(w)


def random_trivial_dist(rng: np.random.Generator, max_blocks: int = 3) -> JointDistribution:
    """Block-diagonal with product blocks: X and Y independent given a shared label."""
    k = int(rng.integers(1, max_blocks + 1))
    sizes_x = rng.integers(1, 3, size=k)
    sizes_y = rng.integers(1, 3, size=k)
    w = np.zeros((sizes_x.sum(), sizes_y.sum()))
    r = c = 0
    for a, b in zip(sizes_x, sizes_y):
        w[r:r + a, c:c + b] = rng.random() * np.outer(rng.random(a) + 0.1, rng.random(b) + 0.1)
        r, c = r + a, c + b
    perm_x = rng.permutation(w.shape[0])
    perm_y = rng.permutation(w.shape[1])
    return dist_from_weights(w[perm_x][:, perm_y])


@st.composite
def distributions(draw, max_x: int = 4, max_y: int = 4, allow_zeros: bool = True):
    nx = draw(st.integers(1, max_x))
    ny = draw(st.integers(1, max_y))
    lo = 0.0 if allow_zeros else 0.05
    w = draw(arrays(np.float64, (nx, ny), elements=st.floats(lo, 1.0, allow_nan=False)))
    if w.sum() < 1e-3:
        w[0, 0] = 1.0
    return dist_from_weights(w)


@pytest.fixture
def perfect_bit() -> JointDistribution:
    return JointDistribution(("0", "1"), ("0", "1"), np.eye(2) / 2)


@pytest.fixture
def independent_bits() -> JointDistribution:
    return JointDistribution(("0", "1"), ("0", "1"), np.full((2, 2), 0.25))


@pytest.fixture
def rot1() -> JointDistribution:
    return build_primitive(PrimitiveSpec(Kind.ROT, r=1))


@pytest.fixture
def ot() -> JointDistribution:
    return build_primitive(PrimitiveSpec(Kind.OT))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
