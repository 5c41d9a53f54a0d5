"""Monte Carlo oracles for the attack.

``simulate_cycle`` / ``estimate_ratios`` sample the i.i.d. attack cycle event by
event; ``simulate_timeline`` strings cycles into difficulty epochs and applies
the retargeting rule at every boundary.

Randomness is counter-based: cycle ``i`` of seed ``s`` always sees the same
uniforms, whatever the chunking or the order of evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterator

import numpy as np

from . import analytics
from ._backend import kernels
from .analytics import RevenueReport
from .model import EnvironmentParams, Strategy

CHUNK = 1 << 20


class TerminalCase(IntEnum):
    OUTSIDE_WINS_PRE = 0
    ADV_SOLO_PRE = 1
    POOL_WINS_PRE = 2
    TIMED_RELEASE = 3
    ADV_SOLO_WITHHOLD = 4
    POOL_WINS_WITHHOLD = 5
    FORK_ADV_EXTENDS = 6
    FORK_POOL_EXTENDS = 7
    FORK_OUTSIDE_ON_ADV = 8
    FORK_OUTSIDE_ON_HONEST = 9


INTERRUPTED_CASES = tuple(range(TerminalCase.ADV_SOLO_WITHHOLD, TerminalCase.FORK_OUTSIDE_ON_HONEST + 1))


@dataclass(frozen=True)
class CycleStream:
    """Position in the counter-based stream: cycle ``index`` of ``seed``."""

    seed: int
    index: int = 0

    def advance(self, n: int = 1) -> "CycleStream":
        return CycleStream(self.seed, self.index + n)


@dataclass(frozen=True)
class CycleSample:
    b_a: float
    b_p: float
    b_r: float
    b_c: float
    b_o: float
    terminal_case: TerminalCase
    wall_time: float
    share: float


@dataclass(frozen=True)
class CycleBatch:
    b_a: np.ndarray
    b_p: np.ndarray
    b_r: np.ndarray
    b_c: np.ndarray
    b_o: np.ndarray
    wall: np.ndarray
    share: np.ndarray
    case: np.ndarray

    def __len__(self) -> int:
        return len(self.case)


def sample_cycles(env: EnvironmentParams, s: Strategy, seed: int, start: int, n: int,
                  lambda1: float | None = None) -> CycleBatch:
    """Cycles ``start .. start+n-1`` at block rate ``lambda1`` (default ``env.lambda1``)."""
    lam = env.lambda1 if lambda1 is None else lambda1
    t_cap = s.theta / lam
    out = kernels.cycle_batch(
        float(env.alpha), float(env.beta), float(env.gamma), bool(env.rational_manager),
        float(s.p1), float(s.p2), float(lam), float(t_cap), int(seed), int(start), int(n),
    )
    return CycleBatch(*out)


def simulate_cycle(env: EnvironmentParams, s: Strategy, stream: CycleStream) -> CycleSample:
    batch = sample_cycles(env, s, stream.seed, stream.index, 1)
    return CycleSample(
        b_a=float(batch.b_a[0]),
        b_p=float(batch.b_p[0]),
        b_r=float(batch.b_r[0]),
        b_c=float(batch.b_c[0]),
        b_o=float(batch.b_o[0]),
        terminal_case=TerminalCase(int(batch.case[0])),
        wall_time=float(batch.wall[0]),
        share=float(batch.share[0]),
    )


def iter_batches(env: EnvironmentParams, s: Strategy, n_cycles: int, seed: int,
                 chunk: int = CHUNK) -> Iterator[CycleBatch]:
    for start in range(0, n_cycles, chunk):
        yield sample_cycles(env, s, seed, start, min(chunk, n_cycles - start))


@dataclass
class _Moments:
    """Running sums for ratio-of-means estimators."""

    n: int = 0
    sums: dict = field(default_factory=dict)

    def add(self, name: str, values: np.ndarray) -> None:
        self.sums[name] = self.sums.get(name, 0.0) + float(np.sum(values))

    def mean(self, name: str) -> float:
        return self.sums[name] / self.n


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float
    analytic: float | None = None

    @property
    def z(self) -> float:
        if self.analytic is None:
            return math.nan
        if self.stderr == 0:
            # constant sample (e.g. p1 == p2 makes the share deterministic): compare at rounding level
            return 0.0 if math.isclose(self.value, self.analytic, rel_tol=1e-12, abs_tol=1e-15) else math.inf
        return (self.value - self.analytic) / self.stderr


@dataclass(frozen=True)
class RatioEstimates:
    n_cycles: int
    seed: int
    rho_a: Estimate
    rho_pool: Estimate
    rho_rest: Estimate
    delta: Estimate
    rs: Estimate
    ru: Estimate
    case_counts: tuple
    mean_wall_time: float
    cycle_means: dict = field(default_factory=dict)

    @property
    def report(self) -> RevenueReport:
        return RevenueReport(self.rho_a.value, self.rho_pool.value, self.rho_rest.value, self.delta.value)

    def items(self):
        return (("rho_a", self.rho_a), ("rho_pool", self.rho_pool), ("rho_rest", self.rho_rest),
                ("delta", self.delta), ("rs", self.rs), ("ru", self.ru))


def _ratio(m: _Moments, num: str, den: str) -> tuple[float, float]:
    # delta method: Var(X/Y) ~ Var(X - R Y) / (n E[Y]^2)
    n = m.n
    mx, my = m.mean(num), m.mean(den)
    r = mx / my
    sxx, syy, sxy = m.mean(num + "^2"), m.mean(den + "^2"), m.mean(num + "*" + den)
    var = (sxx - 2 * r * sxy + r * r * syy) - (mx - r * my) ** 2
    var *= n / (n - 1) if n > 1 else 0.0
    return r, math.sqrt(max(var, 0.0) / n) / my


def _conditional(total: float, total_sq: float, count: int) -> tuple[float, float]:
    if count == 0:
        return math.nan, math.nan
    mean = total / count
    if count == 1:
        return mean, math.nan
    var = max(total_sq / count - mean * mean, 0.0) * count / (count - 1)
    return mean, math.sqrt(var / count)


def estimate_ratios(env: EnvironmentParams, s: Strategy, n_cycles: int, seed: int,
                    with_analytic: bool = True) -> RatioEstimates:
    """Ratio-of-means estimates of the revenue ratios, redundancy and shares.

    Standard errors use the delta method. Deterministic in ``seed``; the
    reduction order is fixed by the chunk order.
    """
    if n_cycles < 1:
        raise ValueError("n_cycles must be >= 1")
    m = _Moments()
    counts = np.zeros(len(TerminalCase), dtype=np.int64)
    cond = {"rs": [0.0, 0.0, 0], "ru": [0.0, 0.0, 0]}
    wall = 0.0
    for b in iter_batches(env, s, n_cycles, seed):
        m.n += len(b)
        cols = {"a": b.b_a, "p": b.b_p, "r": b.b_r, "c": b.b_c, "o": b.b_o}
        for name, arr in cols.items():
            m.add(name, arr)
            m.add(name + "^2", arr * arr)
            if name != "c":
                m.add(name + "*c", arr * b.b_c)
        counts += np.bincount(b.case, minlength=len(TerminalCase))
        wall += float(np.sum(b.wall))
        timed = b.case == TerminalCase.TIMED_RELEASE
        late = b.case >= TerminalCase.ADV_SOLO_WITHHOLD
        for key, mask in (("rs", timed), ("ru", late)):
            vals = b.share[mask]
            cond[key][0] += float(np.sum(vals))
            cond[key][1] += float(np.sum(vals * vals))
            cond[key][2] += int(vals.size)

    analytic = None
    if with_analytic:
        ce = analytics.cycle_expectations(env, s)
        analytic = analytics.report_from_expectations(ce)

    def est(num: str, attr: str) -> Estimate:
        v, se = _ratio(m, num, "c")
        return Estimate(v, se, getattr(analytic, attr) if analytic else None)

    means = {}
    for name in "apcro":
        total, total_sq = m.sums[name], m.sums[name + "^2"]
        v, se = _conditional(total, total_sq, m.n)
        means["b_" + name] = Estimate(v, se, getattr(ce, "eb_" + name) if with_analytic else None)

    rs_v, rs_se = _conditional(*cond["rs"])
    ru_v, ru_se = _conditional(*cond["ru"])
    return RatioEstimates(
        n_cycles=n_cycles,
        seed=seed,
        rho_a=est("a", "rho_a"),
        rho_pool=est("p", "rho_pool"),
        rho_rest=est("r", "rho_rest"),
        delta=est("o", "delta"),
        rs=Estimate(rs_v, rs_se, ce.shares.rs if with_analytic else None),
        ru=Estimate(ru_v, ru_se, ce.shares.ru if with_analytic else None),
        case_counts=tuple(int(x) for x in counts),
        mean_wall_time=wall / n_cycles,
        cycle_means=means,
    )


POLICIES = ("rescale", "fixed")


@dataclass(frozen=True)
class TimelineResult:
    epoch_durations: list
    difficulty_path: list
    epoch_rates: list
    epoch_end_times: list
    cumulative_reward: dict
    empirical_delta: float
    canonical_per_epoch: list

    def revenue_change_at(self, env: EnvironmentParams, epoch: int = 0,
                          entity: analytics.Entity | str = analytics.Entity.ADVERSARY) -> float:
        """Empirical revenue change at the end of ``epoch``, per ``d0`` blocks.

        The honest counterfactual earns the entity's hashpower share of
        canonical blocks produced at the target rate ``d0 / tau0``.
        """
        entity = analytics.Entity(entity)
        key = {"adversary": "a", "pool": "p", "rest": "r"}[entity.value]
        t = self.epoch_end_times[epoch]
        earned = self.cumulative_reward[key][epoch]
        honest = analytics.honest_ratio(env, entity) * env.d0 * t / env.tau0
        return (earned - honest) / env.d0


def simulate_timeline(env: EnvironmentParams, s: Strategy, n_epochs: int, seed: int,
                      policy: str = "rescale") -> TimelineResult:
    """Run ``n_epochs`` difficulty epochs of back-to-back attack cycles.

    Each epoch ends with its ``d0``-th canonical block (cycles are atomic; a
    surplus canonical block from a fork cycle counts toward the next epoch).
    Difficulty follows ``d_n = d_c tau0 / tau_c``. Under ``rescale`` the
    withholding time tracks the block rate so ``theta`` stays fixed; under
    ``fixed`` the wall-clock ``T`` of the first epoch is kept.
    """
    if n_epochs < 1:
        raise ValueError("n_epochs must be >= 1")
    if policy not in POLICIES:
        raise ValueError(f"policy must be one of {POLICIES}, got {policy!r}")
    d0, tau0 = env.d0, env.tau0
    rate = env.lambda1
    difficulty = 1.0
    t_fixed = s.theta / env.lambda1
    next_index = 0
    carry = 0
    clock = 0.0
    totals = {"a": 0.0, "p": 0.0, "r": 0.0, "c": 0.0, "o": 0.0}
    cum = {k: [] for k in totals}
    durations, diffs, rates, ends, canon = [], [], [], [], []
    first_delta = math.nan

    for epoch in range(n_epochs):
        theta = s.theta if policy == "rescale" else rate * t_fixed
        strat = Strategy(s.p1, s.p2, theta)
        carry_in = carry
        need = d0 - carry_in
        # every cycle yields at least one canonical block
        b = sample_cycles(env, strat, seed, next_index, need, lambda1=rate)
        cs = np.cumsum(b.b_c)
        used = int(np.searchsorted(cs, need)) + 1
        produced = int(cs[used - 1])
        carry = produced - need
        next_index += used
        duration = float(np.sum(b.wall[:used]))
        sums = {"a": b.b_a, "p": b.b_p, "r": b.b_r, "c": b.b_c, "o": b.b_o}
        epoch_sums = {k: float(np.sum(v[:used])) for k, v in sums.items()}
        for k in totals:
            totals[k] += epoch_sums[k]
            cum[k].append(totals[k])
        if epoch == 0:
            first_delta = epoch_sums["o"] / epoch_sums["c"]
        clock += duration
        durations.append(duration)
        diffs.append(difficulty)
        rates.append(rate)
        ends.append(clock)
        canon.append(carry_in + produced - carry)
        difficulty *= tau0 / duration
        rate *= duration / tau0

    return TimelineResult(
        epoch_durations=durations,
        difficulty_path=diffs,
        epoch_rates=rates,
        epoch_end_times=ends,
        cumulative_reward=cum,
        empirical_delta=first_delta,
        canonical_per_epoch=canon,
    )


def timeline_first_epoch_stats(env: EnvironmentParams, s: Strategy, runs: int, seed: int,
                               policy: str = "rescale") -> dict:
    """Mean and standard error of the first-epoch duration and revenue change over seeded runs."""
    durations = np.empty(runs)
    changes = np.empty(runs)
    for i in range(runs):
        tl = simulate_timeline(env, s, 1, seed=_run_seed(seed, i), policy=policy)
        durations[i] = tl.epoch_durations[0]
        changes[i] = tl.revenue_change_at(env, 0)
    sd = lambda x: float(np.std(x, ddof=1) / math.sqrt(len(x))) if len(x) > 1 else math.nan
    return {
        "duration_mean": float(durations.mean()),
        "duration_se": sd(durations),
        "change_mean": float(changes.mean()),
        "change_se": sd(changes),
    }


def _run_seed(seed: int, run: int) -> int:
    return int(kernels.stream_key((int(seed) * 1000003 + run) & ((1 << 64) - 1)))
