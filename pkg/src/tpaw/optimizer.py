"""Multi-start maximization of attack objectives over ``(p1, p2, theta)``.

Finite withholding budgets are searched in ``log10 theta`` on
``[THETA_MIN, THETA_CAP]``; the two ends of the budget axis are handled
exactly: ``theta = 0`` (honest mining) is a fixed candidate and
``theta = inf`` gets its own multi-start over ``(p1, p2)`` on the
unbounded-withholding path.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.stats import qmc

from . import analytics, variants
from .errors import InfeasibleObjective, TPAWError
from .model import EnvironmentParams, Strategy
from .variants import Variant, VariantKind

THETA_CAP = 50.0
THETA_MIN = 1e-6
CORNER_THETAS = (0.1, 1.0, 10.0)
FATOL = 1e-10
XATOL = 1e-7
MAX_ITER = 4000
#: Values within this distance are ties, resolved by the deterministic rule.
TIE_TOL = 1e-12
#: Local optima this close to a box face (relative to the box width) are tried on it.
SNAP_TOL = 1e-6


class ObjectiveKind(str, Enum):
    RHO_A = "rho_a"
    REVENUE_CHANGE_AT_T1 = "revenue_change_at_t1"
    RELATIVE_REVENUE_CHANGE_AT_T1 = "relative_revenue_change_at_t1"


@dataclass(frozen=True)
class Objective:
    kind: ObjectiveKind = ObjectiveKind.RHO_A
    variant: VariantKind = field(default_factory=lambda: VariantKind(Variant.TPAW_EXACT))

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", ObjectiveKind(self.kind))
        if not isinstance(self.variant, VariantKind):
            object.__setattr__(self, "variant", VariantKind(Variant(self.variant)))

    def check(self, env: EnvironmentParams) -> None:
        if self.kind is ObjectiveKind.RHO_A:
            return
        if self.variant.tag.uses_c_model:
            raise InfeasibleObjective(
                f"{self.kind.value} needs the block redundancy ratio, which the "
                f"{self.variant.tag.value} model does not define"
            )
        if self.kind is ObjectiveKind.RELATIVE_REVENUE_CHANGE_AT_T1 and env.alpha == 0:
            raise InfeasibleObjective("relative revenue change is undefined for alpha = 0")

    def evaluate(self, env: EnvironmentParams, s: Strategy, tag: Variant | None = None) -> float:
        """Objective at ``s``; ``tag`` overrides the variant (used for the theta=inf slice)."""
        kind = VariantKind(tag, self.variant.c_override) if tag is not None else self.variant
        report = variants.VariantEvaluator(kind, env, s).report()
        if self.kind is ObjectiveKind.RHO_A:
            return report.rho_a
        change = analytics.revenue_change_at_t1(env, report)
        if self.kind is ObjectiveKind.RELATIVE_REVENUE_CHANGE_AT_T1:
            return change / env.alpha
        return change


@dataclass(frozen=True)
class StartRecord:
    start: Strategy
    optimum: Strategy
    value: float
    iterations: int
    converged: bool


@dataclass(frozen=True)
class OptimizationResult:
    best: Strategy
    best_value: float
    starts: int
    per_start: list
    seed: int

    @property
    def theta_at_cap(self) -> bool:
        return math.isfinite(self.best.theta) and self.best.theta >= THETA_CAP * (1 - 1e-9)


@dataclass(frozen=True)
class _Space:
    """A box in search coordinates and its map to strategies."""

    bounds: tuple
    to_strategy: Callable[[np.ndarray], Strategy]
    tag: Variant

    @property
    def dim(self) -> int:
        return len(self.bounds)

    def scale(self, unit: np.ndarray) -> np.ndarray:
        lo = np.array([b[0] for b in self.bounds])
        hi = np.array([b[1] for b in self.bounds])
        return lo + unit * (hi - lo)


_LOG_BOUNDS = (math.log10(THETA_MIN), math.log10(THETA_CAP))


def _clip01(v: float) -> float:
    return min(max(float(v), 0.0), 1.0)


def _finite_space(tag: Variant) -> _Space:
    def to_strategy(x):
        th = 10.0 ** min(max(float(x[2]), _LOG_BOUNDS[0]), _LOG_BOUNDS[1])
        return Strategy(_clip01(x[0]), _clip01(x[1]), th)

    return _Space(((0.0, 1.0), (0.0, 1.0), _LOG_BOUNDS), to_strategy, tag)


def _infinite_space(tag: Variant, tied: bool) -> _Space:
    if tied:
        return _Space(((0.0, 1.0),), lambda x: Strategy(_clip01(x[0]), _clip01(x[0]), math.inf), tag)
    return _Space(((0.0, 1.0), (0.0, 1.0)), lambda x: Strategy(_clip01(x[0]), _clip01(x[1]), math.inf), tag)


def _spaces(tag: Variant) -> tuple[Optional[_Space], Optional[_Space]]:
    """(finite-theta space, theta=inf space) searched for ``tag``."""
    if tag is Variant.TPAW_EXACT:
        return _finite_space(Variant.TPAW_EXACT), _infinite_space(Variant.PAW_EXACT, False)
    if tag is Variant.TPAW_C:
        return _finite_space(Variant.TPAW_C), _infinite_space(Variant.PAW_C, False)
    if tag in (Variant.PAW_EXACT, Variant.PAW_C):
        return None, _infinite_space(tag, False)
    if tag in (Variant.FAW, Variant.BWH):
        return None, _infinite_space(tag, True)
    return None, None


def _start_points(space: _Space, n: int, seed: int, corners: Sequence[Sequence[float]] = ()) -> np.ndarray:
    corners = [np.asarray(c, dtype=float) for c in corners][:n]
    n_sobol = n - len(corners)
    pts = list(corners)
    if n_sobol > 0:
        sampler = qmc.Sobol(space.dim, scramble=True, seed=seed)
        m = max(0, math.ceil(math.log2(n_sobol)))
        unit = sampler.random_base2(m)[:n_sobol]
        pts.extend(space.scale(unit))
    return np.array(pts)


def _local(objective: Objective, env: EnvironmentParams, space: _Space, x0: np.ndarray) -> StartRecord:
    def f(x):
        return -objective.evaluate(env, space.to_strategy(x), space.tag)

    res = minimize(
        f, x0, method="Nelder-Mead", bounds=space.bounds,
        options={"xatol": XATOL, "fatol": FATOL, "maxiter": MAX_ITER, "maxfev": 2 * MAX_ITER},
    )
    x, value = _snap_to_bounds(objective, env, space, np.asarray(res.x, dtype=float))
    return StartRecord(space.to_strategy(x0), space.to_strategy(x), value, int(res.nit), bool(res.success))


def _snap_to_bounds(objective: Objective, env: EnvironmentParams, space: _Space, x: np.ndarray):
    """Move coordinates within ``SNAP_TOL`` of a bound onto it unless that loses value."""
    value = objective.evaluate(env, space.to_strategy(x), space.tag)
    for i, (lo, hi) in enumerate(space.bounds):
        for edge in (lo, hi):
            if x[i] != edge and abs(x[i] - edge) <= SNAP_TOL * (hi - lo):
                trial = x.copy()
                trial[i] = edge
                v = objective.evaluate(env, space.to_strategy(trial), space.tag)
                if v >= value - TIE_TOL * max(1.0, abs(value)):
                    x, value = trial, v
    return x, value


def _rank_key(rec: StartRecord) -> tuple:
    s = rec.optimum
    theta = math.inf if (math.isfinite(s.theta) and s.theta >= THETA_CAP * (1 - 1e-9)) else s.theta
    return (theta, s.p2 - s.p1)


def _select(records: list) -> StartRecord:
    top = max(r.value for r in records)
    tied = [r for r in records if r.value >= top - TIE_TOL * max(1.0, abs(top))]
    choice = min(tied, key=_rank_key)
    s = choice.optimum
    if math.isfinite(s.theta) and s.theta >= THETA_CAP * (1 - 1e-9):
        # a finite optimum pinned at the cap is the unbounded strategy if that ties
        inf = [r for r in tied if math.isinf(r.optimum.theta)]
        if inf:
            choice = min(inf, key=lambda r: r.optimum.p2 - r.optimum.p1)
    return choice


def maximize(env: EnvironmentParams, objective: Objective, n_starts: int = 100, seed: int = 0) -> OptimizationResult:
    """Best strategy for ``objective`` from ``n_starts`` local searches per region.

    Deterministic in ``seed``. Ties (within ``TIE_TOL``) prefer smaller
    ``theta``, then smaller ``p2 - p1``; a finite optimum pinned at
    ``THETA_CAP`` counts as ``theta = inf``.
    """
    if n_starts < 1:
        raise ValueError("n_starts must be >= 1")
    objective.check(env)
    tag = objective.variant.tag
    records: list[StartRecord] = []

    if tag.fixed_theta != math.inf:
        honest = Strategy(0.0, 0.0, 0.0)
        records.append(StartRecord(honest, honest, objective.evaluate(env, honest), 0, True))

    finite, infinite = _spaces(tag)
    if finite is not None:
        corners = [(0.5, 1.0, math.log10(t)) for t in CORNER_THETAS]
        for x0 in _start_points(finite, n_starts, seed, corners):
            records.append(_local(objective, env, finite, x0))
    if infinite is not None:
        corners = [(0.5,)] if infinite.dim == 1 else [(0.5, 1.0)]
        for x0 in _start_points(infinite, n_starts, seed + 1, corners):
            records.append(_local(objective, env, infinite, x0))

    choice = _select(records)
    return OptimizationResult(choice.optimum, choice.value, n_starts, records, seed)


@dataclass(frozen=True)
class SweepPoint:
    alpha: float
    beta: float
    gamma: float
    result: Optional[OptimizationResult]
    error: Optional[str] = None


def _sweep_task(args) -> SweepPoint:
    alpha, beta, base, objective, n_starts, seed = args
    try:
        env = base.replace(alpha=alpha, beta=beta)
        return SweepPoint(alpha, beta, base.gamma, maximize(env, objective, n_starts, seed))
    except (TPAWError, ValueError, ArithmeticError) as exc:
        return SweepPoint(alpha, beta, base.gamma, None, f"{type(exc).__name__}: {exc}")


def sweep_optimize(grid: Sequence[tuple[float, float]], base: EnvironmentParams, objective: Objective,
                   n_starts: int = 100, seed: int = 0, workers: int | None = None):
    """Optimize at every ``(alpha, beta)`` of ``grid``; yields points in grid order.

    Per-point failures are captured in ``SweepPoint.error`` instead of
    aborting the sweep.
    """
    tasks = [(a, b, base, objective, n_starts, seed) for a, b in grid]
    workers = workers or os.cpu_count() or 1
    if workers <= 1 or len(tasks) <= 1:
        for t in tasks:
            yield _sweep_task(t)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        yield from pool.map(_sweep_task, tasks)


def simplex_grid(step: float, total_below: float = 0.5, start: float | None = None) -> list[tuple[float, float]]:
    """``(alpha, beta)`` multiples of ``step`` with both >= ``start`` and ``alpha + beta < total_below``."""
    start = step if start is None else start
    first = round(start / step)
    n = int(math.floor(total_below / step)) + 1
    pts = []
    for i in range(first, n):
        for j in range(first, n):
            a, b = round(i * step, 12), round(j * step, 12)
            if a + b < total_below - 1e-12:
                pts.append((a, b))
    return pts


def rer_ratio(env: EnvironmentParams, n_starts: int = 100, seed: int = 0) -> tuple[float, OptimizationResult, OptimizationResult]:
    """``RER(T-PAW) / RER(PAW)`` at the respective revenue-ratio optima."""
    tpaw = maximize(env, Objective(ObjectiveKind.RHO_A, VariantKind(Variant.TPAW_EXACT)), n_starts, seed)
    paw = maximize(env, Objective(ObjectiveKind.RHO_A, VariantKind(Variant.PAW_EXACT)), n_starts, seed)
    honest = analytics.honest_ratio(env, analytics.Entity.ADVERSARY)
    return (tpaw.best_value - honest) / (paw.best_value - honest), tpaw, paw
