import math

import pytest

from tpaw import analytics, optimizer
from tpaw.errors import InfeasibleObjective
from tpaw.model import EnvironmentParams, Strategy
from tpaw.optimizer import Objective, ObjectiveKind, StartRecord
from tpaw.variants import Variant, VariantKind

ENV = EnvironmentParams(0.1, 0.1, 0.0)


def obj(kind=ObjectiveKind.RHO_A, tag=Variant.TPAW_EXACT):
    return Objective(kind, VariantKind(tag))


def test_result_structure_and_invariants():
    res = optimizer.maximize(ENV, obj(), n_starts=12, seed=3)
    assert res.starts == 12
    assert res.best_value == pytest.approx(max(r.value for r in res.per_start), abs=optimizer.TIE_TOL)
    assert 0 <= res.best.p1 <= 1 and 0 <= res.best.p2 <= 1 and res.best.theta >= 0
    assert res.best_value >= ENV.alpha
    assert res.best_value == pytest.approx(analytics.revenue_report(ENV, res.best).rho_a, abs=1e-15)
    # honest candidate + finite starts + theta=inf starts
    assert len(res.per_start) == 1 + 12 + 12
    assert all(isinstance(r, StartRecord) for r in res.per_start)


def test_determinism():
    a = optimizer.maximize(ENV, obj(), n_starts=8, seed=5)
    b = optimizer.maximize(ENV, obj(), n_starts=8, seed=5)
    assert a == b


def test_tpaw_beats_or_matches_paw():
    for env in (ENV, EnvironmentParams(0.2, 0.25, 0.5), EnvironmentParams(0.3, 0.1, 1.0)):
        t = optimizer.maximize(env, obj(), 10, 0).best_value
        p = optimizer.maximize(env, obj(tag=Variant.PAW_EXACT), 10, 0).best_value
        assert t >= p - 1e-12


def test_structure_of_optimum():
    res = optimizer.maximize(EnvironmentParams(0.05, 0.05, 0.0), obj(), 30, 0)
    assert res.best.p2 == 1.0 and res.best.theta < 1


def test_paw_variant_stays_on_infinite_slice():
    res = optimizer.maximize(ENV, obj(tag=Variant.PAW_EXACT), 8, 0)
    assert math.isinf(res.best.theta)
    assert all(math.isinf(r.optimum.theta) for r in res.per_start)


def test_faw_ties_allocations():
    res = optimizer.maximize(ENV, obj(tag=Variant.FAW), 8, 0)
    assert res.best.p1 == res.best.p2 and math.isinf(res.best.theta)


def test_honest_variant():
    res = optimizer.maximize(ENV, obj(tag=Variant.HONEST), 8, 0)
    assert res.best == Strategy(0.0, 0.0, 0.0) and res.best_value == ENV.alpha


def test_unprofitable_environment_picks_honest():
    env = EnvironmentParams(0.2, 0.0, 0.0)   # no victim pool to exploit
    res = optimizer.maximize(env, obj(), 6, 0)
    assert res.best_value == pytest.approx(env.alpha, abs=1e-12)
    assert res.best.theta == 0.0


def test_revenue_change_objective_positive_at_gamma_zero():
    res = optimizer.maximize(ENV, obj(ObjectiveKind.REVENUE_CHANGE_AT_T1), 10, 0)
    rel = optimizer.maximize(ENV, obj(ObjectiveKind.RELATIVE_REVENUE_CHANGE_AT_T1), 10, 0)
    assert res.best_value > 0
    assert rel.best_value == pytest.approx(res.best_value / ENV.alpha, rel=1e-6)


@pytest.mark.parametrize("tag", [Variant.TPAW_C, Variant.PAW_C, Variant.FAW, Variant.BWH])
def test_revenue_change_infeasible_for_c_model(tag):
    with pytest.raises(InfeasibleObjective):
        optimizer.maximize(ENV, obj(ObjectiveKind.REVENUE_CHANGE_AT_T1, tag), 4, 0)


def test_relative_change_infeasible_without_adversary():
    with pytest.raises(InfeasibleObjective):
        optimizer.maximize(EnvironmentParams(0.0, 0.2), obj(ObjectiveKind.RELATIVE_REVENUE_CHANGE_AT_T1), 4, 0)


def test_invalid_starts():
    with pytest.raises(ValueError):
        optimizer.maximize(ENV, obj(), 0, 0)


def test_tie_break_prefers_small_theta_then_small_gap():
    s = lambda p1, p2, t: StartRecord(Strategy(p1, p2, t), Strategy(p1, p2, t), 1.0, 0, True)
    recs = [s(0.1, 0.9, 2.0), s(0.3, 0.6, 2.0), s(0.1, 0.9, 0.5)]
    assert optimizer._select(recs).optimum.theta == 0.5
    assert optimizer._select(recs[:2]).optimum == Strategy(0.3, 0.6, 2.0)


def test_cap_collapses_to_infinity_on_ties():
    s = lambda p1, p2, t, v: StartRecord(Strategy(p1, p2, t), Strategy(p1, p2, t), v, 0, True)
    recs = [s(0.2, 0.9, optimizer.THETA_CAP, 1.0), s(0.2, 0.9, math.inf, 1.0)]
    assert math.isinf(optimizer._select(recs).optimum.theta)
    recs = [s(0.2, 0.9, optimizer.THETA_CAP, 1.0), s(0.2, 0.9, math.inf, 0.5)]
    assert optimizer._select(recs).optimum.theta == optimizer.THETA_CAP


def test_simplex_grid():
    grid = optimizer.simplex_grid(0.05)
    assert (0.05, 0.05) in grid and (0.4, 0.05) in grid
    assert all(a + b < 0.5 for a, b in grid)
    assert len(grid) == 36
    assert (0.25, 0.25) not in grid


def test_sweep_captures_errors_and_keeps_order():
    grid = [(0.05, 0.05), (0.3, 0.3), (0.1, 0.1)]
    out = list(optimizer.sweep_optimize(grid, ENV, obj(), n_starts=4, seed=0, workers=1))
    assert [(p.alpha, p.beta) for p in out] == grid
    assert out[1].result is None and "ConstraintViolation" in out[1].error
    assert out[0].result is not None and out[2].error is None


def test_sweep_parallel_matches_serial():
    grid = [(0.05, 0.1), (0.1, 0.05)]
    serial = [p.result.best for p in optimizer.sweep_optimize(grid, ENV, obj(), 4, 1, workers=1)]
    parallel = [p.result.best for p in optimizer.sweep_optimize(grid, ENV, obj(), 4, 1, workers=2)]
    assert serial == parallel
