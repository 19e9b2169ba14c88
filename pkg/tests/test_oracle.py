import math

import numpy as np
import pytest
from scipy.stats import norm

from logconcave import oracle
from logconcave.errors import InvalidParameter, NotAbsolutelyContinuous, NotLogConcave
from logconcave.measure1d import (apply_affine, exponential_symmetric, gaussian, gaussian_mixture,
                                  potential, realize, truncate, uniform)

PHI0 = 1.0 / math.sqrt(2.0 * math.pi)


# spectral gap ----------------------------------------------------------------

def test_spectral_gaussian(std_gauss):
    r = oracle.spectral_poincare(std_gauss)
    assert abs(r.c_p - 1.0) < 1e-3
    assert abs(r.c_p * r.eigenvalue - 1.0) < 1e-12
    assert r.converged


def test_spectral_exponential(laplace):
    assert abs(oracle.spectral_poincare(laplace).c_p - 4.0) <= 0.02 * 4.0


@pytest.mark.parametrize("R", [0.5, 1.0, 2.0])
def test_spectral_uniform(R):
    c = oracle.spectral_poincare(realize(uniform(-R, R))).c_p
    exact = 4 * R * R / math.pi ** 2
    assert abs(c - exact) <= 1e-3 * exact


def test_spectral_uniform_dense_crosscheck():
    # independent dense eigensolve of the same discretization at N=256
    m = realize(uniform(-1.0, 1.0, n=256))
    A = oracle.generator_matrix(m).toarray()
    lam1 = np.sort(np.linalg.eigvalsh(A))[1]
    assert abs(1.0 / lam1 - 4 / math.pi ** 2) < 2e-3
    assert abs(oracle.spectral_poincare(m).c_p - 4 / math.pi ** 2) < 1e-3 * 4 / math.pi ** 2


def test_spectral_scaling(laplace):
    base = oracle.spectral_poincare(laplace).c_p
    for lam in (0.5, 3.0):
        c = oracle.spectral_poincare(apply_affine(laplace, lam, 0.2)).c_p
        assert abs(c - lam * lam * base) <= 1e-3 * lam * lam * base


def test_variance_below_poincare(family):
    for m in family:
        assert m.variance() <= oracle.spectral_poincare(m).c_p * (1 + 1e-2), m.label


def test_product_tensorization(std_gauss, laplace):
    big, small = oracle.product_gap(realize(gaussian(0, 1, n=64)), realize(exponential_symmetric(1, n=64)))
    assert abs(big - small) <= 1e-8 * max(1.0, small)


# isoperimetric and Cheeger ------------------------------------------------------

def test_isoperimetric_gaussian_half(std_gauss):
    p = oracle.isoperimetric_profile(std_gauss)
    assert abs(float(p(np.array([0.5]))[0]) - PHI0) < 1e-6


def test_isoperimetric_exponential_identity(laplace):
    u = np.linspace(0.01, 0.5, 50)
    assert np.max(np.abs(oracle.isoperimetric_profile(laplace)(u) - u)) < 1e-6


def test_isoperimetric_uniform(box):
    assert abs(float(oracle.isoperimetric_profile(box)(np.array([0.25]))[0]) - 0.5) < 1e-8


def test_isoperimetric_requires_log_concave():
    bimodal = realize(gaussian_mixture([0.5, 0.5], [-3, 3], [1, 1]))
    with pytest.raises(NotLogConcave):
        oracle.isoperimetric_profile(bimodal)


def test_isoperimetric_concavity(family):
    for m in family:
        p = oracle.isoperimetric_profile(m)
        assert oracle.profile_concavity_defect(p) <= 1e-6 * float(np.max(p.values)), m.label


def test_cheeger_values(std_gauss, laplace):
    assert abs(oracle.cheeger_constant(laplace) - 1.0) < 1e-4
    assert abs(oracle.cheeger_constant(std_gauss) - math.sqrt(math.pi / 2)) < 1e-3


def test_cheeger_scaling(laplace):
    base = oracle.cheeger_constant(laplace)
    for lam in (0.4, -2.5):
        c = oracle.cheeger_constant(apply_affine(laplace, lam, 1.0))
        assert abs(c - abs(lam) * base) <= 1e-4 * abs(lam) * base


def test_ledoux_two_sided(family):
    for m in family:
        cp = oracle.spectral_poincare(m).c_p
        cc = oracle.cheeger_constant(m)
        assert cp <= 4 * cc * cc * 1.01, m.label
        assert cc * cc <= 36 * cp * 1.01, m.label
        assert cc <= 16 / math.pi * math.sqrt(cp) * 1.01, m.label


# concentration and weak rates ------------------------------------------------------

def test_concentration_at_zero(family):
    for m in family:
        assert abs(float(oracle.concentration_profile(m)(np.array([0.0]))[0]) - 0.5) < 1e-9


def test_concentration_exponential(laplace):
    r = np.linspace(0.0, 8.0, 41)
    a = oracle.concentration_profile(laplace)(r)
    assert np.max(np.abs(a - 0.5 * np.exp(-r))) < 1e-5


def test_concentration_gaussian(std_gauss):
    r = np.linspace(0.0, 5.0, 41)
    a = oracle.concentration_profile(std_gauss)(r)
    assert np.max(np.abs(a - norm.sf(r))) < 1e-5


def test_concentration_monotone(family):
    for m in family:
        p = oracle.concentration_profile(m)
        assert np.all(np.diff(p.values) <= 1e-15), m.label


def test_weak_beta_exponential(laplace):
    beta = oracle.weak_beta_from_profile(oracle.concentration_profile(laplace), "median")
    assert abs(float(beta(np.array([1 / math.e]))[0]) - 1.0) < 1e-3
    assert np.all(np.diff(beta.values) <= 1e-12)


def test_weak_beta_saturates(laplace):
    beta = oracle.weak_beta_from_profile(oracle.concentration_profile(laplace), "median")
    assert float(beta(np.array([1.0]))[0]) == 0.0


def test_weak_beta_median_mean_sandwich(family):
    s = np.logspace(-6, math.log10(0.45), 40)
    for m in family:
        p = oracle.concentration_profile(m)
        med = oracle.weak_beta_from_profile(p, "median")
        mean = oracle.weak_beta_from_profile(p, "mean")
        assert np.all(med(s) <= mean(s) + 1e-12)
        assert np.all(mean(s) <= 2 * med(s / 2) + 1e-12)


def test_weak_beta_rejects_other_kinds(laplace):
    with pytest.raises(InvalidParameter):
        oracle.weak_beta_from_profile(oracle.isoperimetric_profile(laplace))
    with pytest.raises(InvalidParameter):
        oracle.weak_beta_from_profile(oracle.concentration_profile(laplace), "mode")


# brute force ---------------------------------------------------------------------

@pytest.mark.parametrize("spec", [gaussian(0, 1, n=128), exponential_symmetric(1, n=128),
                                  uniform(-1, 1, n=128), potential("x**4/4", n=128)])
def test_bruteforce_isoperimetric(spec):
    m = realize(spec)
    u = np.linspace(0.02, 0.5, 25)
    bf, hl = oracle.brute_force_isoperimetric(m, u)
    assert np.max(np.abs(hl - bf) / bf) <= 0.02
    cont = oracle.isoperimetric_profile(m)(u)
    assert np.max(np.abs(cont - bf) / bf) <= 0.02


@pytest.mark.parametrize("spec", [gaussian(0, 1, n=128), exponential_symmetric(1, n=128),
                                  uniform(-1, 1, n=128)])
def test_bruteforce_concentration(spec):
    m = realize(spec)
    radii = np.linspace(0.05, 2.0, 20) * math.sqrt(m.variance())
    bf, hl = oracle.brute_force_concentration(m, radii)
    keep = bf > 1e-12
    assert np.max(np.abs(hl[keep] - bf[keep]) / bf[keep]) <= 0.02
    cont = oracle.concentration_profile(m)(radii)
    assert np.max(np.abs(cont[keep] - bf[keep]) / bf[keep]) <= 0.02


def test_bruteforce_size_limit(std_gauss):
    with pytest.raises(InvalidParameter):
        oracle.brute_force_isoperimetric(std_gauss, np.array([0.25]))


# moments ------------------------------------------------------------------------

def test_moments_identical(std_gauss):
    r = oracle.moments(std_gauss, std_gauss, 2.0)
    assert abs(r.m_p_ratio - 1.0) < 1e-6
    assert abs(r.relative_entropy) < 1e-8


def test_moments_first_abs(std_gauss):
    assert abs(oracle.moments(std_gauss).first_abs_moment_about_median - math.sqrt(2 / math.pi)) < 1e-5


def test_moments_narrow_vs_wide_gaussian():
    # int f^2/g for f = N(0,1), g = N(0,4) equals 4/sqrt(7)
    exact = math.sqrt(4.0 / math.sqrt(7.0))
    m2 = oracle.moments(realize(gaussian(0.0, 1.0)), realize(gaussian(0.0, 2.0)), 2.0).m_p_ratio
    fine = oracle.moments(realize(gaussian(0.0, 1.0, n=4 * 4096)),
                          realize(gaussian(0.0, 2.0, n=4 * 4096)), 2.0).m_p_ratio
    assert abs(m2 - exact) <= 1e-6 * exact
    assert abs(m2 - fine) <= 1e-6 * fine


def test_entropy_and_mp_ordering():
    nu = realize(gaussian(0.5, 1.0))
    mu = realize(gaussian(0.0, 1.0))
    r = oracle.moments(nu, mu, 2.0)
    assert abs(r.relative_entropy - 0.125) < 1e-6          # D = d^2 / 2
    assert abs(r.m_p_ratio - math.exp(0.25 / 2)) < 1e-6    # M_2^2 = e^{d^2}
    assert r.m_p_ratio >= 1.0


def test_not_absolutely_continuous(box, std_gauss):
    with pytest.raises(NotAbsolutelyContinuous):
        oracle.moments(std_gauss, box, 2.0)


# tails ---------------------------------------------------------------------------

def test_bobkov_ledoux_tail_values():
    assert oracle.bobkov_ledoux_tail(4.0, 0.0, 1.0) == 3.0
    assert abs(oracle.bobkov_ledoux_tail(1.0, 10.0, 1.0) - 3 * math.exp(-10)) < 1e-18
    with pytest.raises(InvalidParameter):
        oracle.bobkov_ledoux_tail(1.0, 1.0, 0.0)


def test_bobkov_ledoux_tail_dominates_exponential():
    for eps in (0.25, 0.5, 1.0):
        for a in np.linspace(0.0, 20.0, 20):
            assert oracle.bobkov_ledoux_tail(4.0, a, eps) >= 0.5 * math.exp(-a)


def test_fradelizi_tail(family):
    for m in family:
        sd = math.sqrt(m.variance())
        for c, t, lhs, rhs in oracle.fradelizi_rows(m, (0.5 * sd, sd, 2 * sd), (1.0, 1.5, 2.0, 3.0)):
            assert lhs <= rhs + 1e-6, (m.label, c, t)


def test_density_ratio(std_gauss, box):
    assert oracle.density_ratio_sup(std_gauss, std_gauss) == pytest.approx((1.0, 1.0), abs=1e-9)
    r1, r2 = oracle.density_ratio_sup(box, std_gauss)
    assert math.isfinite(r1) and math.isinf(r2)
    narrow, wide = realize(gaussian(0, 1.0)), realize(gaussian(0, 1.2))
    r1, r2 = oracle.density_ratio_sup(wide, narrow)
    assert math.isinf(r1) and abs(r2 - 1.2) < 1e-6


def test_holley_stroock_on_uniform(box):
    beta, s = oracle.holley_stroock_beta(box, 1.0, 0.0)
    assert abs(beta - 4 / math.pi ** 2) < 1e-12 and s == 0.0
