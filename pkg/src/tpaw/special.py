"""Exponential integral and the fPoW share expectations.

Every share term has the form ``a1' + (a2' - a1') * w`` where the mixing
weight ``w`` in [0, 1] is the expected fraction of the pool's work on the fPoW
that happened after the adversary raised its allocation to ``p2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ._backend import kernels
from .errors import DomainError, NumericalFailure
from .model import DerivedConstants

#: Absolute tolerance on the r_u mixing weight.
QUAD_EPSABS = 1e-11
QUAD_EPSREL = 1e-13

_SYMMETRY_RTOL = 1e-9


@dataclass(frozen=True)
class ShareTerms:
    r1: float
    rs: float
    ru: float


def exp_integral_e1(x: float) -> float:
    """``E1(x) = int_x^inf e^{-t}/t dt`` for ``x > 0``."""
    if not x > 0:
        raise DomainError(f"E1 undefined for x={x!r}")
    return kernels.e1(float(x))


def scaled_e1(x: float) -> float:
    """``e^x E1(x)`` without overflow; tends to ``1/x`` for large ``x``."""
    if not x > 0:
        raise DomainError(f"scaled E1 undefined for x={x!r}")
    return kernels.scaled_e1(float(x))


def _mix(c: DerivedConstants, weight: float) -> float:
    return c.a1p + (c.a2p - c.a1p) * weight


def weight_timed_release(c: DerivedConstants) -> float:
    """``E[T'/(Q1 + T')]`` with ``Q1 ~ Exp(lambda1')``; equals ``x e^x E1(x)``."""
    if c.theta == 0 or c.a2 == 0:
        return 0.0
    if math.isinf(c.theta) or c.a1 == 0:
        return 1.0
    x = c.scaled_horizon
    if x == 0:
        return 0.0
    if math.isinf(x):
        # a1 negligible against a2: the pre-withholding work vanishes
        return 1.0
    return x * scaled_e1(x)


def weight_interrupted(c: DerivedConstants) -> float:
    """``E[Q2/(Q1 + Q2)]`` with ``Q2`` truncated to ``[0, T']``; needs ``theta > 0``."""
    if c.theta == 0:
        raise DomainError("r_u is undefined at theta = 0 (withholding is never interrupted)")
    if c.a2 == 0:
        return 0.0
    if c.a1 == 0:
        return 1.0
    if math.isinf(c.theta):
        return weight_infinite(c)
    if math.isinf(c.scaled_horizon):
        return 1.0
    if c.scaled_horizon == 0 or math.isinf(c.rate_ratio):
        # a2 negligible against a1: the withholding-phase work vanishes
        return 0.0
    w, err = kernels.weight_u(c.scaled_horizon, c.rate_ratio, QUAD_EPSABS, QUAD_EPSREL)
    if not math.isfinite(w) or err > 10 * max(QUAD_EPSABS, QUAD_EPSREL * abs(w)):
        raise NumericalFailure(f"r_u quadrature did not converge (estimate {w!r}, error {err!r})")
    return min(max(w, 0.0), 1.0)


def weight_infinite(c: DerivedConstants) -> float:
    """Untruncated weight ``E[Q2/(Q1 + Q2)]``.

    With ``k = lambda2'/lambda1'`` this is ``(k ln k - k + 1)/(1 - k)^2``,
    exactly 1/2 at ``k = 1``.
    """
    if c.a2 == 0:
        return 0.0
    if c.a1 == 0:
        return 1.0
    k = c.rate_ratio
    if math.isinf(k):
        return 0.0
    if k == 0:
        return 1.0
    h = k - 1.0
    if abs(h) < _SYMMETRY_RTOL:
        return 0.5
    if abs(h) < 0.1:
        # (1+h) ln(1+h) - h = sum_{n>=2} (-1)^n h^n / (n (n-1))
        total = 0.0
        power = 1.0
        for n in range(2, 40):
            total += (-1) ** n * power / (n * (n - 1))
            power *= h
        return total
    return (k * math.log(k) - h) / (h * h)


def share_r1(c: DerivedConstants) -> float:
    return c.a1p


def share_rs(c: DerivedConstants) -> float:
    return _mix(c, weight_timed_release(c))


def share_ru(c: DerivedConstants) -> float:
    return _mix(c, weight_interrupted(c))


def share_r_infinity(c: DerivedConstants) -> float:
    return _mix(c, weight_infinite(c))


def share_terms(c: DerivedConstants) -> ShareTerms:
    """All three shares; at ``theta = 0`` ``ru`` takes its limit ``a1'``."""
    ru = c.a1p if c.theta == 0 else share_ru(c)
    return ShareTerms(r1=share_r1(c), rs=share_rs(c), ru=ru)


def truncated_mean_te(lambda2: float, t_cap: float) -> float:
    """Mean of ``Exp(lambda2)`` truncated to ``[0, t_cap]``."""
    if not lambda2 > 0:
        raise DomainError(f"rate must be positive, got {lambda2!r}")
    if not t_cap > 0:
        raise DomainError(f"truncation time must be positive, got {t_cap!r}")
    if math.isinf(t_cap):
        return 1.0 / lambda2
    x = lambda2 * t_cap
    if x < 1e-3:
        g = 0.5 - x / 12.0 + x**3 / 720.0 - x**5 / 30240.0
    else:
        g = 1.0 / x - math.exp(-x) / -math.expm1(-x)
    return t_cap * g
