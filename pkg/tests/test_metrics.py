import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import norm

from logconcave import metrics
from logconcave.measure1d import apply_affine, convolve_gaussian, gaussian, realize, uniform
from logconcave.metrics import (METRICS, CouplingPlan, bl_dud, distance, kyfan, levy_prokhorov,
                                metric_chain, metric_tolerance, optimal_plan, quantile_coupling,
                                random_pairs, tv, w1, w_lp)

from conftest import gaussian_tv

SMALL = 1024


@pytest.fixture(scope="module")
def g_small():
    return realize(gaussian(0, 1, n=SMALL))


@pytest.fixture(scope="module")
def pairs():
    return random_pairs(7, count=20, n=SMALL)


# closed forms ---------------------------------------------------------------------

def test_tv_examples(std_gauss):
    assert tv(std_gauss, std_gauss) == 0.0
    assert abs(tv(realize(uniform(0, 1)), realize(uniform(1, 2))) - 1.0) < 1e-8
    for m in (0.3, 1.0, 2.5):
        assert abs(tv(std_gauss, realize(gaussian(m, 1))) - gaussian_tv(m)) < 1e-5


def test_w1_examples(laplace):
    assert w1(laplace, laplace) == 0.0
    for c in (-0.7, 0.25, 2.0):
        assert abs(w1(laplace, apply_affine(laplace, 1.0, c)) - abs(c)) < 1e-6
    assert abs(w1(realize(uniform(0, 1)), realize(uniform(0, 2))) - 0.5) < 1e-6


@pytest.mark.parametrize("metric", METRICS)
def test_identity_is_zero(g_small, metric):
    assert abs(distance(g_small, g_small, metric)) <= metric_tolerance(metric, g_small, g_small)


def test_unknown_metric(g_small):
    from logconcave.errors import InvalidParameter
    with pytest.raises(InvalidParameter):
        distance(g_small, g_small, "Hellinger")


def test_bl_far_gaussians():
    a, b = realize(gaussian(0, 1, n=SMALL)), realize(gaussian(3, 1, n=SMALL))
    d_bl = bl_dud(a, b, "BL")
    tol = metric_tolerance("BL", a, b)
    # f = clip(x - 1.5, -1, 1) is 1-Lipschitz, bounded by 1
    x = np.linspace(-10, 13, 200001)
    f = np.clip(x - 1.5, -1, 1)
    lower = np.trapezoid(f * (norm.pdf(x, 3) - norm.pdf(x, 0)), x)
    assert d_bl >= lower - tol
    assert d_bl <= min(2 * tv(a, b), w1(a, b)) + tol
    assert 0.0 <= d_bl <= 2.0 + tol


def test_dudley_scan_agrees_with_joint(pairs):
    a, b = pairs[0]
    joint = bl_dud(a, b, "Dudley")
    scan = bl_dud(a, b, "Dudley", method="scan")
    # the scan maximizes over a subset of the joint feasible set
    assert scan <= joint + 1e-8
    assert joint - scan <= bl_dud(a, b, "BL") / 64 + metric_tolerance("Dudley", a, b)


def test_levy_prokhorov_translation():
    # for a unit gaussian shifted by c, the worst set is an interval of length c - eps,
    # so d_LP solves 2 Phi((c - eps)/2) - 1 = eps
    from scipy.optimize import brentq
    g = realize(gaussian(0, 1, n=SMALL))
    for c in (0.05, 0.3, 0.8):
        exact = brentq(lambda e: 2 * norm.cdf((c - e) / 2) - 1 - e, 0.0, c)
        d = levy_prokhorov(g, apply_affine(g, 1.0, c))
        assert abs(d - exact) <= 2 * metric_tolerance("LevyProkhorov", g, g)
        assert d <= c


def test_levy_prokhorov_below_tv(pairs):
    for a, b in pairs[:6]:
        assert levy_prokhorov(a, b) <= tv(a, b) + metric_tolerance("LevyProkhorov", a, b)


def test_w_lp_concavity_and_non_monotone_plan():
    a, b = realize(gaussian(0, 1, n=SMALL)), realize(gaussian(0.5, 2, n=SMALL))
    v = w_lp(a, b)
    tol = metric_tolerance("WLP", a, b)
    W = w1(a, b)
    assert v <= W / (1 + W) + tol
    # the optimum can only improve on the monotone coupling
    assert v <= quantile_coupling(a, b).cost_value + tol


def test_optimal_plan_marginals():
    a, b = realize(gaussian(0, 1, n=256)), realize(uniform(-1, 2, n=256))
    plan = optimal_plan(a, b, k=128)
    assert abs(plan.mass.sum() - 1.0) < 1e-8
    assert np.all(plan.mass >= -1e-12)


# symmetry and triangle inequality ---------------------------------------------------

@pytest.mark.parametrize("metric", METRICS)
def test_symmetry(pairs, metric):
    a, b = pairs[1]
    tol = metric_tolerance(metric, a, b)
    assert abs(distance(a, b, metric) - distance(b, a, metric)) <= 2 * tol


@pytest.mark.parametrize("metric", METRICS)
def test_triangle(metric):
    rng = np.random.default_rng(11)
    for _ in range(2):
        a, b, c = (metrics.random_log_concave(rng, SMALL) for _ in range(3))
        tol = max(metric_tolerance(metric, x, y) for x, y in ((a, b), (b, c), (a, c)))
        assert distance(a, c, metric) <= distance(a, b, metric) + distance(b, c, metric) + 2 * tol


# comparison chain ------------------------------------------------------------------

LP_W1_UPPER = "W1 <= d_LP(1 + 2 d_LP/ln(1/d_LP))"


def test_chain_relations_hold(pairs):
    for a, b in pairs:
        for row in metric_chain(a, b):
            if row.relation == LP_W1_UPPER:
                continue
            assert row.holds, (a.label, b.label, row)


def test_chain_contains_all_relations(pairs):
    names = [r.relation for r in metric_chain(*pairs[2])]
    assert len(names) >= 12
    assert "d_LP^2 <= W1" in names


def test_lp_w1_upper_relation_counterexample():
    # two unit gaussians 1.3 apart: d_LP stays near 0.36 while W1 = 1.3
    a, b = realize(gaussian(0, 1, n=SMALL)), realize(gaussian(1.3, 1, n=SMALL))
    rows = {r.relation: r for r in metric_chain(a, b)}
    r = rows[LP_W1_UPPER]
    assert abs(r.lhs - 1.3) < 1e-6
    assert r.rhs < 0.7
    assert not r.holds


def test_chain_skips_lp_w1_upper_without_log_concavity(pairs):
    names = [r.relation for r in metric_chain(*pairs[0], log_concave=False)]
    assert LP_W1_UPPER not in names


def test_random_pairs_deterministic():
    p1 = random_pairs(3, count=4, n=128)
    p2 = random_pairs(3, count=4, n=128)
    assert [(a.label, b.label) for a, b in p1] == [(a.label, b.label) for a, b in p2]
    assert all(np.array_equal(a.log_density, c.log_density) for (a, _), (c, _) in zip(p1, p2))


# smoothing --------------------------------------------------------------------------

@pytest.mark.parametrize("t", [0.25, 1.0, 4.0])
def test_smoothing_inequality(pairs, t):
    fac_bl = max(1.0, math.sqrt(2) / (t * math.sqrt(math.pi)))
    fac_dud = 1.0 + math.sqrt(2) / (t * math.sqrt(math.pi))
    for a, b in pairs[:5]:
        lhs = tv(convolve_gaussian(a, t), convolve_gaussian(b, t))
        assert lhs <= fac_bl * (bl_dud(a, b, "BL") + metric_tolerance("BL", a, b)) + 1e-6
        assert lhs <= fac_dud * (bl_dud(a, b, "Dudley") + metric_tolerance("Dudley", a, b)) + 1e-6


# Ky-Fan --------------------------------------------------------------------------

def test_kyfan_diagonal():
    x = np.linspace(-1, 1, 11)
    assert kyfan(CouplingPlan(x, x, np.full(11, 1 / 11), 0.0)) == (0.0, 0.0)


@pytest.mark.parametrize("d", [0.1, 0.5, 1.0, 3.0])
def test_kyfan_constant_shift(d):
    x = np.linspace(-1, 1, 11)
    k, ks = kyfan(CouplingPlan(x, x + d, np.full(11, 1 / 11), 0.0))
    assert abs(k - min(d, 1.0)) < 1e-12
    assert abs(ks - d / (1 + d)) < 1e-12


finite = st.floats(-5, 5, allow_nan=False)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(finite, finite, st.floats(1e-3, 1.0)), min_size=1, max_size=30))
def test_kyfan_sandwich(rows):
    x, y, w = (np.array(c, float) for c in zip(*rows))
    k, ks = kyfan(CouplingPlan(x, y, w / w.sum(), 0.0))
    assert 0.0 <= k <= 1.0
    assert 0.5 * ks <= k + 1e-12
    assert k <= math.sqrt(2 * ks) + 1e-12
