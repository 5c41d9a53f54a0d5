import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tpaw import analytics
from tpaw.analytics import Entity
from tpaw.errors import DivisionByZero
from tpaw.model import EnvironmentParams, Strategy
from tpaw.variants import paw_exact_report

ENV = EnvironmentParams(0.2, 0.2, 0.0)
S = Strategy(0.5, 1.0, 1.0)


def test_honest_cycle():
    ce = analytics.cycle_expectations(ENV, Strategy(0.5, 1.0, 0.0))
    assert (ce.eb_c, ce.eb_a, ce.eb_p, ce.eb_o) == (1.0, pytest.approx(0.2, abs=1e-16), pytest.approx(0.2), 1.0)
    assert ce.eb_r == pytest.approx(0.6)


def test_honest_report_exact():
    r = analytics.revenue_report(ENV, Strategy(0.3, 0.9, 0.0))
    assert r.rho_a == 0.2 and r.delta == 1.0


def test_no_adversary():
    r = analytics.revenue_report(EnvironmentParams(0.0, 0.3), Strategy(0.4, 1.0, 2.0))
    assert r.rho_a == 0.0 and r.delta == 1.0


def test_infinite_theta_matches_independent_limit():
    a = analytics.revenue_report(ENV, Strategy(0.5, 1.0, math.inf))
    b = paw_exact_report(ENV, 0.5, 1.0)
    for x, y in zip((a.rho_a, a.rho_pool, a.rho_rest, a.delta), (b.rho_a, b.rho_pool, b.rho_rest, b.delta)):
        assert x == pytest.approx(y, abs=1e-12)


def test_large_theta_approaches_infinite():
    a = analytics.revenue_report(ENV, Strategy(0.5, 1.0, 1e4))
    b = analytics.revenue_report(ENV, Strategy(0.5, 1.0, math.inf))
    assert a.rho_a == pytest.approx(b.rho_a, abs=1e-12)
    assert a.delta == pytest.approx(b.delta, abs=1e-12)


def test_cycle_expectation_bounds():
    ce = analytics.cycle_expectations(ENV, S)
    assert 1 <= ce.eb_c <= 2 and ce.eb_o >= ce.eb_c
    assert ce.eb_a + ce.eb_p + ce.eb_r == pytest.approx(ce.eb_c, abs=1e-15)


def test_rer_examples():
    r = analytics.revenue_report(ENV, S)
    assert analytics.rer(r, r, Entity.ADVERSARY) == 0.0
    a = analytics.RevenueReport(0.055, 0.2, 0.745, 1.0)
    b = analytics.RevenueReport(0.05, 0.2, 0.75, 1.0)
    assert analytics.rer(a, b, "adversary") == pytest.approx(0.1)
    assert analytics.honest_report(ENV).rho(Entity.REST) == pytest.approx(0.6)
    with pytest.raises(DivisionByZero):
        analytics.rer(a, analytics.honest_report(EnvironmentParams(0.0, 0.2)), Entity.ADVERSARY)


def test_revenue_change_honest_is_zero():
    for t in (0.0, 1e5, ENV.tau0, 5 * ENV.tau0):
        for e in Entity:
            assert analytics.revenue_change(ENV, Strategy(0.5, 1.0, 0.0), e, t) == 0.0


def test_revenue_change_continuity_and_linearity():
    r = analytics.revenue_report(ENV, S)
    f = analytics.revenue_change_curve(ENV, r, Entity.ADVERSARY)
    t1 = r.delta * ENV.tau0
    assert f(t1) == pytest.approx(r.rho_a - 0.2 * r.delta, abs=1e-15)
    assert f(t1 * (1 - 1e-12)) == pytest.approx(f(t1 * (1 + 1e-12)), abs=1e-12)
    for lo, hi in ((0.0, t1), (t1, 4 * t1)):
        ts = np.linspace(lo, hi, 7)
        vals = np.array([f(t) for t in ts])
        assert np.max(np.abs(np.diff(vals, 2))) < 1e-14
    assert f(2 * t1) == pytest.approx(f(t1) + (r.rho_a - 0.2) * t1 / ENV.tau0, abs=1e-15)
    with pytest.raises(ValueError):
        f(-1.0)


def test_relative_revenue_change():
    r = analytics.revenue_report(ENV, S)
    t = 3 * ENV.tau0
    assert analytics.revenue_change(ENV, S, "adversary", t, relative=True) == pytest.approx(
        analytics.revenue_change(ENV, S, "adversary", t) / 0.2)
    with pytest.raises(DivisionByZero):
        analytics.revenue_change_curve(EnvironmentParams(0.0, 0.2), r, Entity.ADVERSARY, relative=True)


def _lag(rho_s, rho_h, delta):
    env = EnvironmentParams(rho_h, 0.1)
    return analytics.profit_lag_from_report(env, analytics.RevenueReport(rho_s, 0.1, 0.9 - rho_s, delta)), env.tau0


def test_profit_lag_cases():
    assert analytics.profit_lag(ENV, Strategy(0.5, 1.0, 0.0)) == 0.0
    lag, tau0 = _lag(0.3, 0.25, 1.1)          # rho_s > rho_h * delta
    assert lag == 0.0
    lag, tau0 = _lag(0.24, 0.25, 1.0)         # never profitable
    assert lag == math.inf
    delta, rho_h = 1.05, 0.25
    rho_s = rho_h * delta * 0.99
    lag, tau0 = _lag(rho_s, rho_h, delta)
    expected = delta * tau0 + tau0 * (rho_h * delta - rho_s) / (rho_s - rho_h)
    assert lag == pytest.approx(expected, rel=1e-14)
    curve = analytics.revenue_change_curve(EnvironmentParams(rho_h, 0.1),
                                           analytics.RevenueReport(rho_s, 0.1, 0.9 - rho_s, delta), "adversary")
    assert curve(lag) == pytest.approx(0.0, abs=1e-15)
    assert curve(lag * 1.01) > 0 > curve(lag * 0.99)


def test_temporal_metrics():
    m = analytics.temporal_metrics(ENV, S)
    r = analytics.revenue_report(ENV, S)
    assert m.rer_a == pytest.approx((r.rho_a - 0.2) / 0.2)
    assert m.delta_at(0.0) == 0.0
    assert m.profit_lag == analytics.profit_lag(ENV, S)
    assert math.isnan(analytics.temporal_metrics(EnvironmentParams(0.0, 0.2), S).rer_a)


@settings(max_examples=300, deadline=None)
@given(st.floats(0, 0.49), st.floats(0, 1), st.floats(0, 1), st.booleans(), st.floats(0, 1), st.floats(0, 1),
       st.one_of(st.just(0.0), st.floats(1e-6, 1e4), st.just(math.inf)))
def test_conservation_and_rest_bound(alpha, frac, gamma, rational, p1, p2, theta):
    env = EnvironmentParams(alpha, frac * (0.5 - alpha) * 0.999, gamma, rational)
    r = analytics.revenue_report(env, Strategy(p1, p2, theta))
    assert abs(r.rho_a + r.rho_pool + r.rho_rest - 1) <= 1e-12
    assert r.rho_rest >= 1 - env.alpha - env.beta - 1e-15
    assert r.delta >= 1
    if theta == 0 or alpha * p1 == 0:
        assert r.delta == 1


@pytest.mark.parametrize("k", [0.1, 10.0])
def test_scale_invariance(k):
    env = EnvironmentParams(0.15, 0.25, 0.3)
    scaled = env.replace(tau0=env.tau0 / k)
    t_cap = 700.0
    a = analytics.revenue_report(env, Strategy.from_time(0.4, 0.9, t_cap, env.lambda1))
    b = analytics.revenue_report(scaled, Strategy.from_time(0.4, 0.9, t_cap / k, scaled.lambda1))
    for x, y in zip((a.rho_a, a.rho_pool, a.rho_rest, a.delta), (b.rho_a, b.rho_pool, b.rho_rest, b.delta)):
        assert x == pytest.approx(y, abs=1e-12)
