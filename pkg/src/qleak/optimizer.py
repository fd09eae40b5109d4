"""Minimise the leakage of regular embeddings over phase functions.

Local diagonal unitaries shift theta(x, y) by alpha(x) + beta(y) without
changing the leakage, so the phases on a spanning forest of the bipartite
support graph are pinned to zero and only the remaining ("cycle") phases are
searched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .distributions import JointDistribution, mutual_information
from .embeddings import PhaseFunction, regular_leakage_fast
from .errors import TooManyParameters

TWO_PI = 2.0 * math.pi
MAX_FREE = 64
GRID_POINTS = 4096
LINE_SCAN = 12


class Method(str, Enum):
    COORDINATE_DESCENT = "coordinate-descent"
    SIMPLEX_SEARCH = "simplex-search"


@dataclass(frozen=True)
class OptimizerConfig:
    starts: int = 32
    max_iterations: int = 2000
    convergence_tol: float = 1e-10
    seed: int = 0
    method: Method = Method.COORDINATE_DESCENT

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if self.starts < 1 or self.max_iterations < 1:
            raise ValueError("starts and max_iterations must be positive")
        if not self.convergence_tol > 0:
            raise ValueError("convergence_tol must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass
class OptimizationResult:
    best_theta: PhaseFunction
    best_leakage: float
    trace: list[tuple[int, float]]
    converged: bool
    free_pairs: list[tuple[int, int]] = field(default_factory=list)
    best_free: np.ndarray = field(default_factory=lambda: np.zeros(0))
    best_start: int = 0
    evaluations: int = 0


def gauge_fix(d: JointDistribution) -> list[tuple[int, int]]:
    """Support pairs left free after pinning a spanning forest of the support graph.

    Their number is |support| - |X used| - |Y used| + #components.
    """
    nx, _ = d.shape
    parent: dict[int, int] = {}

    def find(u):
        while parent.setdefault(u, u) != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        return u

    free = []
    for x, y in d.support():
        rx, ry = find(x), find(nx + y)
        if rx == ry:
            free.append((x, y))
        else:
            parent[rx] = ry
    return free


class _Objective:
    def __init__(self, d: JointDistribution, free: list[tuple[int, int]]):
        self.mi = mutual_information(d)
        self.base = np.sqrt(d.probs).astype(complex)
        self.rows = np.array([x for x, _ in free], dtype=int)
        self.cols = np.array([y for _, y in free], dtype=int)
        self.sqrt_p = np.sqrt(d.probs[self.rows, self.cols]) if free else np.zeros(0)
        self.calls = 0

    def amplitudes(self, phi: np.ndarray) -> np.ndarray:
        amps = self.base.copy()
        if len(phi):
            amps[self.rows, self.cols] = self.sqrt_p * np.exp(1j * np.asarray(phi))
        return amps

    def __call__(self, phi: np.ndarray) -> float:
        self.calls += 1
        return regular_leakage_fast(self.amplitudes(phi), self.mi)


def _bracketed_min(f, lo: float, hi: float, xatol: float = 1e-9):
    res = minimize_scalar(f, bounds=(lo, hi), method="bounded",
                          options={"xatol": xatol, "maxiter": 200})
    return float(res.x), float(res.fun)


def _line_search(obj: _Objective, phi: np.ndarray, j: int, current: float):
    def along(t):
        trial = phi.copy()
        trial[j] = t
        return obj(trial)

    step = TWO_PI / LINE_SCAN
    best_t, best_f = phi[j], current
    for n in range(1, LINE_SCAN):
        t = (phi[j] + n * step) % TWO_PI
        ft = along(t)
        if ft < best_f:
            best_t, best_f = t, ft
    t, ft = _bracketed_min(along, best_t - step, best_t + step)
    if ft < best_f:
        best_t, best_f = t % TWO_PI, ft
    return best_t, best_f


def _coordinate_descent(obj: _Objective, phi0: np.ndarray, cfg: OptimizerConfig):
    phi = phi0.copy()
    value = obj(phi)
    trace = [(0, value)]
    converged = False
    for sweep in range(1, cfg.max_iterations + 1):
        before = value
        for j in range(len(phi)):
            phi[j], value = _line_search(obj, phi, j, value)
        trace.append((sweep, value))
        if before - value < cfg.convergence_tol:
            converged = True
            break
    return phi, value, trace, converged


def _simplex_search(obj: _Objective, phi0: np.ndarray, cfg: OptimizerConfig):
    trace = [(0, obj(phi0))]

    def record(xk):
        trace.append((len(trace), obj(xk)))

    res = minimize(obj, phi0, method="Nelder-Mead", callback=record,
                   options={"maxiter": cfg.max_iterations, "fatol": cfg.convergence_tol,
                            "xatol": 1e-8, "initial_simplex": None})
    phi = np.mod(res.x, TWO_PI)
    value = obj(phi)
    if value > trace[0][1]:
        phi, value = phi0.copy(), trace[0][1]
    return phi, value, trace, bool(res.success)


def _grid_then_refine(obj: _Objective):
    grid = np.arange(GRID_POINTS) * (TWO_PI / GRID_POINTS)
    values = np.array([obj(np.array([t])) for t in grid])
    k = int(np.argmin(values))
    step = TWO_PI / GRID_POINTS
    t, ft = _bracketed_min(lambda s: obj(np.array([s])), grid[k] - step, grid[k] + step)
    if ft < values[k]:
        return np.array([t % TWO_PI]), ft
    return np.array([grid[k]]), float(values[k])


def minimize_leakage(d: JointDistribution, cfg: OptimizerConfig | None = None
                     ) -> OptimizationResult:
    """Multi-start search for the regular embedding of least leakage.

    Start 0 is always the canonical embedding; the others are uniform random
    free phases drawn from ``cfg.seed``. With a single free phase a dense grid
    is swept as well. Ties go to the lowest start index.
    """
    cfg = cfg or OptimizerConfig()
    free = gauge_fix(d)
    if len(free) > MAX_FREE:
        raise TooManyParameters(f"{len(free)} free phases exceed the cap of {MAX_FREE}")
    obj = _Objective(d, free)

    def result(phi, value, trace, converged, start):
        phases = np.zeros(d.shape)
        for (x, y), t in zip(free, phi):
            phases[x, y] = t
        return OptimizationResult(
            best_theta=PhaseFunction.from_matrix(d, phases),
            best_leakage=float(value), trace=trace, converged=converged,
            free_pairs=list(free), best_free=np.mod(np.asarray(phi, dtype=float), TWO_PI),
            best_start=start, evaluations=obj.calls,
        )

    if not free:
        value = obj(np.zeros(0))
        return result(np.zeros(0), value, [(0, value)], True, 0)

    rng = np.random.default_rng(cfg.seed)
    local = (_coordinate_descent if cfg.method is Method.COORDINATE_DESCENT
             else _simplex_search)
    best = None
    for start in range(cfg.starts):
        phi0 = np.zeros(len(free)) if start == 0 else rng.uniform(0.0, TWO_PI, len(free))
        phi, value, trace, converged = local(obj, phi0, cfg)
        if best is None or value < best[1]:
            best = (phi, value, trace, converged, start)

    if len(free) == 1:
        phi, value = _grid_then_refine(obj)
        if value < best[1]:
            best = (phi, value, [(0, value)], True, cfg.starts)

    return result(*best)
