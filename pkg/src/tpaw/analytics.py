"""Closed-form per-cycle expectations, revenue ratios and temporal metrics.

All expectations are evaluated in units where ``lambda1 = 1``; the withholding
budget enters only through ``theta = lambda1 * T``, so reports do not depend on
the absolute block rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

from . import special
from .errors import DivisionByZero
from .model import EnvironmentParams, Strategy, derive_constants
from .special import ShareTerms


class Entity(str, Enum):
    ADVERSARY = "adversary"
    POOL = "pool"
    REST = "rest"


@dataclass(frozen=True)
class CycleExpectations:
    eb_a: float
    eb_p: float
    eb_r: float
    eb_c: float
    eb_o: float
    shares: ShareTerms


@dataclass(frozen=True)
class RevenueReport:
    rho_a: float
    rho_pool: float
    rho_rest: float
    delta: float

    def rho(self, entity: Entity | str) -> float:
        entity = Entity(entity)
        if entity is Entity.ADVERSARY:
            return self.rho_a
        if entity is Entity.POOL:
            return self.rho_pool
        return self.rho_rest


@dataclass(frozen=True)
class TemporalMetrics:
    rer_a: float
    rer_pool: float
    rer_rest: float
    delta_at: Callable[[float], float]
    profit_lag: float


def _phase_probabilities(env: EnvironmentParams, s: Strategy) -> tuple[float, float]:
    """(P(timed release), P(interrupted)) given that withholding started."""
    if s.theta == 0:
        return 1.0, 0.0
    if math.isinf(s.theta):
        return 0.0, 1.0
    x = (1.0 - env.alpha * s.p2) * s.theta
    return math.exp(-x), -math.expm1(-x)


def cycle_expectations(env: EnvironmentParams, s: Strategy) -> CycleExpectations:
    """Expected per-cycle rewards and block counts under strategy ``s``."""
    alpha, beta = env.alpha, env.beta
    rest = 1.0 - alpha - beta
    c = derive_constants(env, s)
    shares = special.share_terms(c)
    if s.theta == 0:
        # immediate release is honest mining; skip the algebra so the reduction is exact
        return CycleExpectations(eb_a=alpha, eb_p=beta, eb_r=rest, eb_c=1.0, eb_o=1.0, shares=shares)
    r1, rs, ru = shares.r1, shares.rs, shares.ru
    win = env.fork_win_probability
    not_rational = 1.0 - env.rational_manager

    ap1, ap2 = alpha * s.p1, alpha * s.p2
    q = 1.0 - ap2
    released, interrupted = _phase_probabilities(env, s)

    eb_c = 1.0 + ap1 * interrupted * rest / q
    eb_a = alpha * (1.0 - s.p1) + beta * r1 + ap1 * (
        released * rs
        + interrupted * (alpha * (1.0 - s.p2) / q + beta / q * ru + rest / q * (ru * win + alpha))
    )
    eb_p = beta * (1.0 - r1) + ap1 * (
        released * (1.0 - rs)
        + interrupted * (beta / q * (1.0 - ru) + rest / q * ((1.0 - ru) * win + beta))
    )
    eb_r = rest * (1.0 + interrupted * ap1 / q * (rest * (2.0 - env.gamma) + beta * not_rational))

    # adversarial pool fPoWs discarded during withholding (dimensionless time)
    if s.theta == 0:
        orphans = 0.0
    elif math.isinf(s.theta):
        orphans = 1.0 + ap2 / q
    else:
        te = special.truncated_mean_te(q, s.theta)
        orphans = released * ap2 * s.theta + interrupted * (1.0 + ap2 * te)
    eb_o = eb_c + ap1 * orphans
    return CycleExpectations(eb_a=eb_a, eb_p=eb_p, eb_r=eb_r, eb_c=eb_c, eb_o=eb_o, shares=shares)


def report_from_expectations(ce: CycleExpectations) -> RevenueReport:
    return RevenueReport(
        rho_a=ce.eb_a / ce.eb_c,
        rho_pool=ce.eb_p / ce.eb_c,
        rho_rest=ce.eb_r / ce.eb_c,
        delta=ce.eb_o / ce.eb_c,
    )


def revenue_report(env: EnvironmentParams, s: Strategy) -> RevenueReport:
    return report_from_expectations(cycle_expectations(env, s))


def honest_ratio(env: EnvironmentParams, entity: Entity | str) -> float:
    """Revenue ratio under honest mining, i.e. the entity's hashpower share."""
    entity = Entity(entity)
    if entity is Entity.ADVERSARY:
        return env.alpha
    if entity is Entity.POOL:
        return env.beta
    return 1.0 - env.alpha - env.beta


def honest_report(env: EnvironmentParams) -> RevenueReport:
    return RevenueReport(env.alpha, env.beta, 1.0 - env.alpha - env.beta, 1.0)


def rer(report_s: RevenueReport, report_base: RevenueReport, entity: Entity | str) -> float:
    """Relative extra reward of ``report_s`` over ``report_base`` for one entity."""
    base = report_base.rho(entity)
    if base == 0:
        raise DivisionByZero(f"baseline revenue ratio of {Entity(entity).value} is zero")
    return (report_s.rho(entity) - base) / base


def _revenue_change(rho_s: float, rho_h: float, delta: float, tau0: float, t: float) -> float:
    t1 = delta * tau0
    at_t1 = rho_s - rho_h * delta
    if t <= t1:
        return at_t1 * t / t1
    return at_t1 + (rho_s - rho_h) * (t - t1) / tau0


def revenue_change_curve(
    env: EnvironmentParams, report: RevenueReport, entity: Entity | str, relative: bool = False
) -> Callable[[float], float]:
    """``t -> Delta(t)``: piecewise linear, single difficulty adjustment at ``delta * tau0``."""
    rho_s = report.rho(entity)
    rho_h = honest_ratio(env, entity)
    if relative and rho_h == 0:
        raise DivisionByZero(f"honest revenue ratio of {Entity(entity).value} is zero")
    scale = 1.0 / rho_h if relative else 1.0
    delta, tau0 = report.delta, env.tau0

    def curve(t: float) -> float:
        if t < 0:
            raise ValueError(f"time must be >= 0, got {t!r}")
        return scale * _revenue_change(rho_s, rho_h, delta, tau0, t)

    return curve


def revenue_change(
    env: EnvironmentParams, s: Strategy, entity: Entity | str, t: float, relative: bool = False
) -> float:
    return revenue_change_curve(env, revenue_report(env, s), entity, relative)(t)


def revenue_change_at_t1(env: EnvironmentParams, report: RevenueReport, entity: Entity | str = Entity.ADVERSARY) -> float:
    """``Delta(delta * tau0) = rho^S - rho^H * delta``."""
    return report.rho(entity) - honest_ratio(env, entity) * report.delta


def _lag(rho_s: float, rho_h: float, delta: float, tau0: float) -> float:
    at_t1 = rho_s - rho_h * delta
    slope = rho_s - rho_h
    if at_t1 == 0 and slope == 0:
        return 0.0
    if at_t1 > 0 and slope >= 0:
        return 0.0
    if slope <= 0:
        return math.inf
    return delta * tau0 + tau0 * (rho_h * delta - rho_s) / slope


def profit_lag_from_report(env: EnvironmentParams, report: RevenueReport, entity: Entity | str = Entity.ADVERSARY) -> float:
    return _lag(report.rho(entity), honest_ratio(env, entity), report.delta, env.tau0)


def profit_lag(env: EnvironmentParams, s: Strategy, entity: Entity | str = Entity.ADVERSARY) -> float:
    """Earliest time after which the revenue change stays positive.

    0 when it is positive from the start (or identically zero), ``inf`` when
    it never becomes positive for good.
    """
    return profit_lag_from_report(env, revenue_report(env, s), entity)


def temporal_metrics(env: EnvironmentParams, s: Strategy, entity: Entity | str = Entity.ADVERSARY) -> TemporalMetrics:
    report = revenue_report(env, s)
    base = honest_report(env)

    def safe_rer(e: Entity) -> float:
        try:
            return rer(report, base, e)
        except DivisionByZero:
            return math.nan

    return TemporalMetrics(
        rer_a=safe_rer(Entity.ADVERSARY),
        rer_pool=safe_rer(Entity.POOL),
        rer_rest=safe_rer(Entity.REST),
        delta_at=revenue_change_curve(env, report, entity),
        profit_lag=profit_lag_from_report(env, report, entity),
    )
