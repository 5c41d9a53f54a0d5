"""Parameter types for the attack model and the derived rate/share constants."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Any, Mapping

from .errors import ConstraintViolation, RateMismatch

#: Bitcoin-like defaults: 2016 blocks per two-week epoch.
DEFAULT_D0 = 2016
DEFAULT_TAU0 = 1209600.0
DEFAULT_LAMBDA1 = DEFAULT_D0 / DEFAULT_TAU0

_RATE_RTOL = 1e-9


def _check_fraction(name: str, value: float, lo: float, hi: float, hi_open: bool = False) -> None:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConstraintViolation(f"{name} must be a real number, got {value!r}")
    if math.isnan(value) or value < lo or value > hi or (hi_open and value == hi):
        bracket = ")" if hi_open else "]"
        raise ConstraintViolation(f"{name}={value!r} outside [{lo}, {hi}{bracket}")


@dataclass(frozen=True)
class EnvironmentParams:
    """Network environment seen by the adversary.

    ``lambda1`` is the honest block rate; when omitted it is set to
    ``d0 / tau0``, otherwise it must agree with that ratio.
    """

    alpha: float
    beta: float
    gamma: float = 0.0
    rational_manager: bool = True
    lambda1: float | None = None
    d0: int = DEFAULT_D0
    tau0: float = DEFAULT_TAU0

    def __post_init__(self) -> None:
        _check_fraction("alpha", self.alpha, 0.0, 1.0, hi_open=True)
        _check_fraction("beta", self.beta, 0.0, 1.0, hi_open=True)
        _check_fraction("gamma", self.gamma, 0.0, 1.0)
        if not self.alpha + self.beta < 0.5:
            raise ConstraintViolation(
                f"alpha+beta={self.alpha + self.beta!r} violates alpha+beta < 0.5"
            )
        if not isinstance(self.rational_manager, bool):
            raise ConstraintViolation("rational_manager must be a bool")
        if isinstance(self.d0, bool) or not isinstance(self.d0, int) or self.d0 < 1:
            raise ConstraintViolation(f"d0={self.d0!r} must be an integer >= 1")
        if not (isinstance(self.tau0, (int, float)) and self.tau0 > 0 and math.isfinite(self.tau0)):
            raise ConstraintViolation(f"tau0={self.tau0!r} must be a finite positive time")
        steady = self.d0 / self.tau0
        if self.lambda1 is None:
            object.__setattr__(self, "lambda1", steady)
            return
        lam = self.lambda1
        if not (isinstance(lam, (int, float)) and lam > 0 and math.isfinite(lam)):
            raise ConstraintViolation(f"lambda1={lam!r} must be a finite positive rate")
        if abs(lam - steady) > _RATE_RTOL * steady:
            raise RateMismatch(f"lambda1={lam!r} differs from d0/tau0={steady!r}")

    @property
    def fork_win_probability(self) -> float:
        """Chance the adversary's fPoW wins a one-block fork race."""
        return self.gamma * (1.0 - self.alpha - self.beta) + self.alpha + self.beta * self.rational_manager

    def replace(self, **changes: Any) -> "EnvironmentParams":
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        if ("d0" in changes or "tau0" in changes) and "lambda1" not in changes:
            values["lambda1"] = None
        values.update(changes)
        return EnvironmentParams(**values)


def validate_environment(raw: Mapping[str, Any] | EnvironmentParams) -> EnvironmentParams:
    """Build validated environment parameters; never clamps."""
    if isinstance(raw, EnvironmentParams):
        return EnvironmentParams(**{f.name: getattr(raw, f.name) for f in fields(raw)})
    known = {f.name for f in fields(EnvironmentParams)}
    unknown = set(raw) - known
    if unknown:
        raise ConstraintViolation(f"unknown environment fields: {sorted(unknown)}")
    return EnvironmentParams(**raw)


@dataclass(frozen=True)
class Strategy:
    """T-PAW strategy ``(p1, p2, theta)`` with ``theta = lambda1 * T``.

    ``theta = 0`` is honest mining and ``theta = inf`` is PAW.
    """

    p1: float
    p2: float
    theta: float

    def __post_init__(self) -> None:
        _check_fraction("p1", self.p1, 0.0, 1.0)
        _check_fraction("p2", self.p2, 0.0, 1.0)
        th = self.theta
        if isinstance(th, bool) or not isinstance(th, (int, float)) or math.isnan(th) or th < 0:
            raise ConstraintViolation(f"theta={th!r} must be >= 0 (inf allowed)")

    @classmethod
    def from_time(cls, p1: float, p2: float, t_cap: float, lambda1: float) -> "Strategy":
        return cls(p1, p2, math.inf if math.isinf(t_cap) else lambda1 * t_cap)

    def withholding_time(self, lambda1: float) -> float:
        return self.theta / lambda1

    @property
    def is_paw(self) -> bool:
        return math.isinf(self.theta)

    @property
    def is_honest(self) -> bool:
        return self.theta == 0


@dataclass(frozen=True)
class DerivedConstants:
    alpha: float
    beta: float
    p1: float
    p2: float
    theta: float
    lambda1: float
    lambda2: float
    a1: float
    a2: float
    a1p: float
    a2p: float
    lambda1p: float
    lambda2p: float
    tprime: float

    @property
    def rate_ratio(self) -> float:
        """``lambda2' / lambda1'``; dimensionless, independent of ``lambda1``."""
        return (1.0 - self.alpha * self.p2) * self.a1 / self.a2

    @property
    def scaled_horizon(self) -> float:
        """``lambda1' T' = theta * a2 / a1``."""
        if self.theta == 0:
            return 0.0
        return self.theta * self.a2 / self.a1


def derive_constants(env: EnvironmentParams, s: Strategy) -> DerivedConstants:
    """Rates and pool-share constants for one (environment, strategy) pair.

    Shares ``a_i'`` are 0 when ``a_i`` is 0; ``lambda_i'`` is then infinite.
    """
    alpha, beta = env.alpha, env.beta
    lam1 = env.lambda1
    ap1, ap2 = alpha * s.p1, alpha * s.p2
    a1, a2 = beta + ap1, beta + ap2
    lam2 = (1.0 - ap2) * lam1
    return DerivedConstants(
        alpha=alpha,
        beta=beta,
        p1=s.p1,
        p2=s.p2,
        theta=s.theta,
        lambda1=lam1,
        lambda2=lam2,
        a1=a1,
        a2=a2,
        a1p=ap1 / a1 if a1 > 0 else 0.0,
        a2p=ap2 / a2 if a2 > 0 else 0.0,
        lambda1p=lam1 / a1 if a1 > 0 else math.inf,
        lambda2p=lam2 / a2 if a2 > 0 else math.inf,
        tprime=a2 * s.theta / lam1 if a2 > 0 else 0.0,
    )
