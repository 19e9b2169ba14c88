import math

import numpy as np
import pytest
from scipy.stats import norm

from logconcave.errors import EmptyRestriction, InvalidParameter, NonNormalizable
from logconcave.measure1d import (AffineMap1D, GridMeasure, apply_affine, convolve_gaussian,
                                  convolve_uniform, exponential_symmetric, from_log_density, gaussian,
                                  gaussian_mixture, potential, radial, realize, scale_mix,
                                  second_difference_ok, truncate, uniform)
from logconcave.metrics import tv


def test_realize_gaussian_moments(std_gauss):
    assert abs(std_gauss.mean()) < 1e-8
    assert abs(std_gauss.variance() - 1.0) < 1e-6
    assert std_gauss.is_log_concave


def test_realize_exponential_variance(laplace):
    assert abs(laplace.variance() - 2.0) < 1e-4


def test_realize_uniform_variance(box):
    assert abs(box.variance() - 1.0 / 3.0) < 1e-6
    assert not box.open_left and not box.open_right


def test_domain_policy_tail_mass():
    m = realize(gaussian(0.0, 1.0))
    lo, hi = m.domain
    assert norm.cdf(lo) <= 1.01e-10 and norm.sf(hi) <= 1.01e-10
    assert norm.cdf(lo) > 1e-12


def test_normalization_and_cdf(std_gauss, laplace, box):
    for m in (std_gauss, laplace, box):
        assert abs(m.mass - 1.0) < 1e-9
        assert np.all(np.diff(m.cdf_cache) >= 0)
        h = m.step
        trap = h * (np.sum(m.density_values) - 0.5 * (m.density_values[0] + m.density_values[-1]))
        assert abs(trap - 1.0) < 1e-5


def test_log_concavity_flags():
    for spec in (gaussian(), exponential_symmetric(), uniform(), potential("x**4/4"), radial(3)):
        assert realize(spec).is_log_concave, spec
    bimodal = realize(gaussian_mixture([0.5, 0.5], [-3.0, 3.0], [1.0, 1.0]))
    assert not bimodal.is_log_concave


def test_invalid_parameters():
    with pytest.raises(InvalidParameter):
        realize(gaussian(0.0, -1.0))
    with pytest.raises(InvalidParameter):
        realize(exponential_symmetric(0.0))
    with pytest.raises(InvalidParameter):
        realize(gaussian(0.0, 1.0, n=32))
    with pytest.raises(InvalidParameter):
        AffineMap1D(0.0)


def test_nonnormalizable_potential():
    with pytest.raises((NonNormalizable, InvalidParameter)):
        realize(potential("-x**2"))


def test_affine_scaling_matches_gaussian(std_gauss):
    two = apply_affine(std_gauss, 2.0)
    assert tv(two, realize(gaussian(0.0, 2.0))) <= 1e-6
    assert apply_affine(std_gauss, 1.0, 0.0) is std_gauss


def test_affine_shift_mean(laplace):
    assert abs(apply_affine(laplace, 1.0, 3.0).mean() - 3.0) < 1e-6


@pytest.mark.parametrize("lam, c", [(0.5, 1.0), (-2.0, 0.3), (3.0, -1.0)])
def test_affine_variance_covariance(laplace, lam, c):
    m = apply_affine(laplace, lam, c)
    assert abs(m.variance() - lam * lam * laplace.variance()) <= 1e-6 * lam * lam * laplace.variance()
    assert m.is_log_concave


def test_truncate_full_support_is_identity(std_gauss):
    assert truncate(std_gauss, -math.inf, math.inf) is std_gauss


def test_truncate_nested_uniform(box):
    assert tv(truncate(box, -0.5, 0.5), realize(uniform(-0.5, 0.5))) <= 1e-8


def test_truncate_exponential(laplace):
    assert abs(float(laplace.cdf(3.0) - laplace.cdf(-3.0)) - (1.0 - math.exp(-3.0))) < 1e-8
    t = truncate(laplace, -3.0, 3.0)
    assert abs(t.mass - 1.0) < 1e-9
    assert t.variance() < 2.0
    assert t.is_log_concave


def test_truncate_recenter(laplace):
    t = truncate(laplace, -0.5, 3.0, recenter=True)
    assert abs(t.mean()) < 1e-9


def test_truncate_empty(std_gauss):
    with pytest.raises(EmptyRestriction):
        truncate(std_gauss, 50.0, 60.0)
    with pytest.raises(InvalidParameter):
        truncate(std_gauss, 1.0, 0.0)


def test_convolve_gaussian_closure(std_gauss):
    out = convolve_gaussian(std_gauss, 1.0)
    assert tv(out, realize(gaussian(0.0, math.sqrt(2.0)))) <= 1e-5
    assert convolve_gaussian(std_gauss, 0.0) is std_gauss


def test_convolve_uniform_variance(box):
    out = convolve_gaussian(box, 0.5)
    assert abs(out.variance() - (1.0 / 3.0 + 0.25)) < 1e-4
    assert out.is_log_concave


@pytest.mark.parametrize("beta", [0.2, 1.0, 3.0])
def test_convolution_moment_additivity(laplace, beta):
    out = convolve_gaussian(apply_affine(laplace, 1.0, 0.7), beta)
    assert abs(out.mean() - 0.7) <= 1e-4 * 0.7
    target = laplace.variance() + beta * beta
    assert abs(out.variance() - target) <= 1e-4 * target
    assert abs(out.mass - 1.0) < 1e-8


def test_scale_mix_gaussian_fixed_point(std_gauss, laplace):
    assert tv(scale_mix(std_gauss, 0.5), std_gauss) <= 1e-5
    assert scale_mix(laplace, 1.0) is laplace
    assert abs(scale_mix(laplace, 0.5).variance() - 1.5) < 1e-3
    with pytest.raises(InvalidParameter):
        scale_mix(laplace, 0.0)


def test_convolve_uniform_box(box):
    out = convolve_uniform(box, 1.0)
    assert abs(out.variance() - (1.0 / 3.0 + 1.0 / 12.0)) < 1e-4
    assert out.is_log_concave


def test_radial_one_dim_is_half_gaussian():
    r = realize(radial(1, "r**2/2"))
    assert abs(r.mean() - math.sqrt(2.0 / math.pi)) < 1e-6
    assert abs(r.variance() - (1.0 - 2.0 / math.pi)) < 1e-6


def test_radial_dimension_three_mean():
    # |X| for a standard gaussian in R^3 is chi with 3 degrees of freedom
    r = realize(radial(3))
    assert abs(r.mean() - 2.0 * math.sqrt(2.0 / math.pi)) < 1e-6


def test_second_difference_check():
    h = 0.1
    x = np.arange(10) * h
    assert second_difference_ok(-(x ** 2), h)
    assert not second_difference_ok(x ** 2, h)


def test_grid_measure_rejects_bad_input():
    with pytest.raises(InvalidParameter):
        GridMeasure(np.array([0.0, 1.0, 3.0]), np.zeros(3), True)
    with pytest.raises(InvalidParameter):
        GridMeasure(np.linspace(0, 1, 4), np.array([0.0, np.nan, 0.0, 0.0]), True)


def test_exact_spline_cdf_and_quantile(laplace):
    u = np.array([1e-6, 0.01, 0.3, 0.5, 0.9])
    x = laplace.quantile(u)
    assert np.allclose(laplace.cdf(x), u, rtol=1e-9, atol=1e-14)
    # closed-form quantile of the symmetric exponential
    exact = np.where(u < 0.5, np.log(2 * u), -np.log(2 * (1 - u)))
    assert np.allclose(x, exact, atol=1e-9)


def test_from_log_density_roundtrip():
    x = np.linspace(-1.0, 1.0, 101)
    m = from_log_density(x, -np.abs(x), open_left=False, open_right=False)
    assert abs(m.mass - 1.0) < 1e-12
    assert abs(m.mean()) < 1e-12


def test_measures_are_immutable(std_gauss):
    with pytest.raises((ValueError, AttributeError, TypeError)):
        std_gauss.log_density[0] = 0.0
