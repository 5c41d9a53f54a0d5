import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tpaw import analytics, special, variants
from tpaw.errors import ConstraintViolation
from tpaw.model import EnvironmentParams, Strategy, derive_constants
from tpaw.variants import Variant, VariantKind

ENV = EnvironmentParams(0.2, 0.2, 0.0)


def random_points(n, seed):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        alpha = rng.uniform(0, 0.49)
        beta = rng.uniform(0, 0.4999 - alpha)
        yield (EnvironmentParams(alpha, beta, rng.random(), bool(rng.integers(2))), *rng.random(2))


def test_paw_exact_equals_tpaw_at_infinity():
    for env, p1, p2 in random_points(100, 5):
        a = variants.paw_exact_report(env, p1, p2)
        b = analytics.revenue_report(env, Strategy(p1, p2, math.inf))
        assert max(abs(a.rho_a - b.rho_a), abs(a.rho_pool - b.rho_pool),
                   abs(a.rho_rest - b.rho_rest), abs(a.delta - b.delta)) <= 1e-12


def test_paw_without_adjustment_uses_static_share():
    c = derive_constants(ENV, Strategy(0.4, 0.4, math.inf))
    assert special.share_r_infinity(c) == c.a1p
    # exact PAW with p1 = p2 agrees with the c-model at the exact fork-win probability
    exact = variants.paw_exact_report(ENV, 0.4, 0.4)
    approx = variants.simplified_c_report(ENV, Strategy(0.4, 0.4, math.inf), ENV.fork_win_probability)
    assert exact.rho_a == pytest.approx(approx.rho_a, rel=1e-2)


def test_legacy_share_examples():
    c = derive_constants(ENV, Strategy(0.3, 0.3, math.inf))
    assert variants.legacy_share_approximation(c) == pytest.approx(c.a1p, abs=1e-15)
    assert variants.legacy_share_error(c) == pytest.approx(0.0, abs=1e-15)
    c = derive_constants(ENV, Strategy(0.5, 1.0, math.inf))
    pbar = (1.5 - 0.1) / 1.8
    assert variants.mean_ratio_allocation(0.2, 0.5, 1.0) == pytest.approx(7 / 9)
    assert variants.legacy_share_approximation(c) == pytest.approx(0.2 * pbar / (0.2 + 0.2 * pbar))
    assert abs(variants.legacy_share_error(c)) > 1e-3


def test_c_model_honest_collapse():
    r = variants.simplified_c_report(ENV, Strategy(0.5, 1.0, 0.0), 0.4)
    assert r.rho_a == pytest.approx(0.2, abs=1e-16)


def test_c_model_out_of_range():
    with pytest.raises(ConstraintViolation):
        variants.simplified_c_report(ENV, Strategy(0.5, 1.0, 1.0), 1.5)
    with pytest.raises(ConstraintViolation):
        VariantKind(Variant.TPAW_C, c_override=-0.1)
    with pytest.raises(ConstraintViolation):
        VariantKind(Variant.BWH, c_override=0.5)
    with pytest.raises(ConstraintViolation):
        VariantKind(Variant.TPAW_EXACT, c_override=0.5)


def test_c_model_residual_recorded(capsys):
    residuals = []
    for env, p1, p2 in random_points(200, 9):
        for theta in (0.0, 0.5, 3.0, math.inf):
            r = variants.simplified_c_report(env, Strategy(p1, p2, theta), env.fork_win_probability)
            residuals.append(abs(r.residual))
    worst = max(residuals)
    print(f"c-model: max |rho_a + rho_pool + rho_rest - 1| over {len(residuals)} points = {worst:.3e}")
    # the three expressions sum to one algebraically; only rounding remains
    assert worst < 1e-12


def test_c_model_near_exact_paw():
    s = Strategy(0.5, 0.5, math.inf)
    exact = variants.paw_exact_report(ENV, 0.5, 0.5).rho_a
    approx = variants.make_variant(VariantKind(Variant.PAW_C), ENV, s)()
    print(f"exact PAW rho_A = {exact!r}, c-model rho_A = {approx!r}, gap = {approx - exact:.3e}")
    assert approx == pytest.approx(exact, rel=5e-3)


def test_bwh_independent_of_gamma():
    s = Strategy(0.3, 0.3, math.inf)
    values = {variants.make_variant("bwh", ENV.replace(gamma=g), s)() for g in (0.0, 0.3, 1.0)}
    assert len(values) == 1
    assert variants.make_variant("bwh", ENV, s).report().c == 0.0


def test_make_variant_constraints():
    with pytest.raises(ConstraintViolation):
        variants.make_variant("faw", ENV, Strategy(0.3, 0.4, math.inf))
    with pytest.raises(ConstraintViolation):
        variants.make_variant("paw", ENV, Strategy(0.3, 0.4, 1.0))
    with pytest.raises(ConstraintViolation):
        variants.make_variant("bwh", ENV, Strategy(0.3, 0.3, 2.0))
    assert variants.make_variant("honest", ENV, Strategy(0.7, 0.1, 3.0))() == 0.2


def test_variant_metadata():
    assert Variant.PAW_C.uses_c_model and not Variant.TPAW_EXACT.uses_c_model
    assert Variant.FAW.ties_p1_p2 and Variant.FAW.fixed_theta == math.inf
    assert Variant.TPAW_C.fixed_theta is None and Variant.HONEST.fixed_theta == 0.0
    assert VariantKind(Variant.TPAW_C, 0.25).c_for(ENV) == 0.25
    assert VariantKind(Variant.FAW).c_for(ENV) == ENV.fork_win_probability


def test_evaluator_routes():
    s = Strategy(0.5, 1.0, 1.0)
    assert variants.make_variant("tpaw", ENV, s).report() == analytics.revenue_report(ENV, s)
    rc = variants.make_variant("tpaw-c", ENV, s).report()
    assert rc == variants.simplified_c_report(ENV, s, ENV.fork_win_probability)
    assert rc.rho("pool") == rc.rho_pool


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 0.49), st.floats(0, 1), st.floats(0, 1), st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
def test_c_model_ratios_in_unit_interval(alpha, frac, gamma, p1, p2, c):
    env = EnvironmentParams(alpha, frac * (0.5 - alpha) * 0.999, gamma)
    r = variants.simplified_c_report(env, Strategy(p1, p2, 2.0), c)
    for v in (r.rho_a, r.rho_pool, r.rho_rest):
        assert -1e-15 <= v <= 1 + 1e-15
