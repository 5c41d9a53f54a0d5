"""Strategy families: exact PAW, the legacy mean-ratio share, and the
simplified fork-race model covering T-PAW-c, PAW-c, FAW and BWH.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from . import analytics, special
from .analytics import RevenueReport
from .errors import ConstraintViolation
from .model import DerivedConstants, EnvironmentParams, Strategy, derive_constants


class Variant(str, Enum):
    TPAW_EXACT = "tpaw"
    PAW_EXACT = "paw"
    TPAW_C = "tpaw-c"
    PAW_C = "paw-c"
    FAW = "faw"
    BWH = "bwh"
    HONEST = "honest"

    @property
    def uses_c_model(self) -> bool:
        return self in (Variant.TPAW_C, Variant.PAW_C, Variant.FAW, Variant.BWH)

    @property
    def fixed_theta(self) -> Optional[float]:
        if self is Variant.HONEST:
            return 0.0
        if self in (Variant.PAW_EXACT, Variant.PAW_C, Variant.FAW, Variant.BWH):
            return math.inf
        return None

    @property
    def ties_p1_p2(self) -> bool:
        return self in (Variant.FAW, Variant.BWH)


@dataclass(frozen=True)
class VariantKind:
    tag: Variant
    c_override: Optional[float] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "tag", Variant(self.tag))
        if self.c_override is not None:
            if not self.tag.uses_c_model:
                raise ConstraintViolation(f"c_override only applies to c-model variants, not {self.tag.value}")
            if self.tag is Variant.BWH and self.c_override != 0:
                raise ConstraintViolation("BWH pins c = 0")
            if not (0.0 <= self.c_override <= 1.0):
                raise ConstraintViolation(f"c={self.c_override!r} outside [0, 1]")

    def c_for(self, env: EnvironmentParams) -> float:
        if self.tag is Variant.BWH:
            return 0.0
        if self.c_override is not None:
            return self.c_override
        return env.fork_win_probability


@dataclass(frozen=True)
class CModelReport:
    """Revenue ratios of the simplified fork-race model (already per cycle)."""

    rho_a: float
    rho_pool: float
    rho_rest: float
    c: float

    def rho(self, entity: analytics.Entity | str) -> float:
        entity = analytics.Entity(entity)
        if entity is analytics.Entity.ADVERSARY:
            return self.rho_a
        if entity is analytics.Entity.POOL:
            return self.rho_pool
        return self.rho_rest

    @property
    def residual(self) -> float:
        """``rho_a + rho_pool + rho_rest - 1``."""
        return math.fsum((self.rho_a, self.rho_pool, self.rho_rest, -1.0))


def paw_exact_report(env: EnvironmentParams, p1: float, p2: float) -> RevenueReport:
    """Exact PAW (unbounded withholding) from the T -> inf limit formulas."""
    alpha, beta = env.alpha, env.beta
    rest = 1.0 - alpha - beta
    s = Strategy(p1, p2, math.inf)
    c = derive_constants(env, s)
    r1 = special.share_r1(c)
    r_inf = special.share_r_infinity(c)
    win = env.fork_win_probability
    q = 1.0 - alpha * p2
    ap1 = alpha * p1

    lim_c = 1.0 + ap1 * rest / q
    lim_a = alpha * (1.0 - p1) + beta * r1 + ap1 * (
        alpha * (1.0 - p2) / q + beta / q * r_inf + rest / q * (r_inf * win + alpha)
    )
    lim_p = beta * (1.0 - r1) + ap1 * (
        beta / q * (1.0 - r_inf) + rest / q * ((1.0 - r_inf) * win + beta)
    )
    lim_r = rest * (1.0 + ap1 / q * (rest * (2.0 - env.gamma) + beta * (1.0 - env.rational_manager)))
    lim_o = lim_c + ap1 / q
    return RevenueReport(lim_a / lim_c, lim_p / lim_c, lim_r / lim_c, lim_o / lim_c)


def mean_ratio_allocation(alpha: float, p1: float, p2: float) -> float:
    """Time-averaged pool allocation ``(p1 + p2 - alpha p1 p2) / (2 - alpha p2)``."""
    return (p1 + p2 - alpha * p1 * p2) / (2.0 - alpha * p2)


def legacy_share_approximation(c: DerivedConstants) -> float:
    """Share of the withheld fPoW from the ratio of mean mining times.

    Earlier PAW analyses used this in place of the exact expectation; kept
    only to quantify that approximation.
    """
    pbar = mean_ratio_allocation(c.alpha, c.p1, c.p2)
    denom = c.beta + c.alpha * pbar
    return c.alpha * pbar / denom if denom > 0 else 0.0


def legacy_share_error(c: DerivedConstants) -> float:
    """Signed error of the legacy share against the exact ``r_inf``."""
    return legacy_share_approximation(c) - special.share_r_infinity(c)


def simplified_c_report(env: EnvironmentParams, s: Strategy, c: float) -> CModelReport:
    """Ratios when every fork race is won by the adversary with probability ``c``."""
    if not (0.0 <= c <= 1.0) or math.isnan(c):
        raise ConstraintViolation(f"c={c!r} outside [0, 1]")
    alpha, beta = env.alpha, env.beta
    rest = 1.0 - alpha - beta
    k = derive_constants(env, s)
    shares = special.share_terms(k)
    r1, rs, ru = shares.r1, shares.rs, shares.ru
    q = 1.0 - alpha * s.p2
    ap1 = alpha * s.p1
    released, interrupted = analytics._phase_probabilities(env, s)

    rho_a = alpha * (1.0 - s.p1) + beta * r1 + ap1 * (
        released * rs + interrupted * (alpha * (1.0 - s.p2) / q + ru * (beta + c * rest) / q)
    )
    rho_pool = beta * (1.0 - r1) + ap1 * (
        released * (1.0 - rs) + interrupted * ((1.0 - ru) * (beta + c * rest) / q)
    )
    rho_rest = rest * (1.0 + interrupted * (1.0 - c) * ap1 / q)
    return CModelReport(rho_a, rho_pool, rho_rest, c)


@dataclass(frozen=True)
class VariantEvaluator:
    """Evaluates one strategy family at one point; calling it returns ``rho_A``."""

    kind: VariantKind
    env: EnvironmentParams
    strategy: Strategy

    def __call__(self) -> float:
        return self.report().rho_a

    def report(self) -> RevenueReport | CModelReport:
        tag = self.kind.tag
        if tag is Variant.HONEST:
            return analytics.honest_report(self.env)
        if tag is Variant.PAW_EXACT:
            return paw_exact_report(self.env, self.strategy.p1, self.strategy.p2)
        if tag is Variant.TPAW_EXACT:
            return analytics.revenue_report(self.env, self.strategy)
        return simplified_c_report(self.env, self.strategy, self.kind.c_for(self.env))


def check_strategy(kind: VariantKind, s: Strategy) -> None:
    tag = kind.tag
    if tag is Variant.HONEST:
        # honest mining ignores (p1, p2, theta) entirely
        return
    fixed = tag.fixed_theta
    if fixed is not None and s.theta != fixed:
        raise ConstraintViolation(f"{tag.value} requires theta={fixed!r}, got {s.theta!r}")
    if tag.ties_p1_p2 and s.p1 != s.p2:
        raise ConstraintViolation(f"{tag.value} requires p1 == p2, got {s.p1!r} != {s.p2!r}")


def make_variant(kind: VariantKind | Variant | str, env: EnvironmentParams, s: Strategy) -> VariantEvaluator:
    """Evaluator for ``kind`` at ``(env, s)``; rejects strategies outside the family."""
    if not isinstance(kind, VariantKind):
        kind = VariantKind(Variant(kind))
    check_strategy(kind, s)
    return VariantEvaluator(kind, env, s)
