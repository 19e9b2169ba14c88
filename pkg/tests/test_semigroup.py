import math

import numpy as np
import pytest

from logconcave import semigroup
from logconcave.errors import InvalidParameter, WitnessNotFound
from logconcave.measure1d import apply_affine, exponential_symmetric, gaussian, realize, uniform
from logconcave.metrics import tv, w1
from logconcave.semigroup import (check_tv_w1_contraction, check_w1_contraction, non_contraction_witness,
                                  ou_evolve, ou_flow, tv_w1_factor, witness_curve)

from conftest import gaussian_tv

N = 2048


def test_time_zero_is_identity(laplace):
    assert ou_evolve(laplace, 0.0) is laplace


@pytest.mark.parametrize("sigma, T", [(0.5, 0.3), (2.0, 1.0), (3.0, 4.0)])
def test_gaussian_closed_form(sigma, T):
    out = ou_evolve(realize(gaussian(0, sigma, n=N)), T)
    s = math.sqrt(sigma ** 2 * math.exp(-T) + 1 - math.exp(-T))
    assert tv(out, realize(gaussian(0, s, n=N))) <= 1e-5


@pytest.mark.parametrize("T", [0.1, 1.0, 5.0])
def test_gaussian_fixed_point(std_gauss, T):
    assert tv(ou_evolve(std_gauss, T), std_gauss) <= 1e-6


def test_long_time_converges(laplace, std_gauss):
    assert tv(ou_evolve(laplace, 20.0), std_gauss) <= 1e-3


def test_flow_record(box):
    f = ou_flow(box, 0.5)
    assert f.input is box and f.time == 0.5
    assert abs(f.output.mass - 1.0) < 1e-10
    assert f.output.is_log_concave


def test_invalid_time(box):
    with pytest.raises(InvalidParameter):
        ou_evolve(box, -1.0)
    with pytest.raises(InvalidParameter):
        check_tv_w1_contraction(box, box, 0.0)
    with pytest.raises(InvalidParameter):
        tv_w1_factor(0.0)


@pytest.mark.parametrize("T", [0.25, 1.0, 4.0])
def test_w1_translation_equality(laplace, T):
    c = 0.7
    lhs, rhs = check_w1_contraction(laplace, apply_affine(laplace, 1.0, c), T)
    assert abs(lhs - math.exp(-T / 2) * c) <= 1e-4
    assert abs(lhs - rhs) <= 1e-3 * rhs


def test_w1_trivial_cases(laplace, box):
    assert check_w1_contraction(laplace, laplace, 1.0) == (0.0, 0.0)
    lhs, rhs = check_w1_contraction(laplace, box, 0.0)
    assert lhs == rhs == pytest.approx(w1(laplace, box))


@pytest.mark.parametrize("T", [0.25, 1.0, 4.0])
def test_w1_contraction_general(laplace, box, T):
    lhs, rhs = check_w1_contraction(laplace, box, T)
    assert lhs <= rhs * (1 + 1e-3)


def test_tv_w1_gaussian_closed_form(std_gauss):
    c = 0.8
    lhs, rhs = check_tv_w1_contraction(std_gauss, realize(gaussian(c, 1, n=4096)), 1.0)
    assert abs(lhs - gaussian_tv(math.exp(-0.5) * c)) <= 1e-5
    assert rhs == pytest.approx(math.exp(-0.5) * c / math.sqrt(2 * math.pi * (1 - math.exp(-1))), rel=1e-6)
    assert lhs <= rhs * (1 + 1e-3)


@pytest.mark.parametrize("T", [0.25, 1.0, 4.0])
def test_tv_w1_holds(laplace, box, T):
    for a, b in ((laplace, box), (laplace, apply_affine(laplace, 1.0, 0.3))):
        lhs, rhs = check_tv_w1_contraction(a, b, T)
        assert lhs <= rhs * (1 + 1e-3)


def test_tv_w1_large_shift():
    g = realize(gaussian(0, 1, n=N))
    lhs, rhs = check_tv_w1_contraction(g, realize(gaussian(10, 1, n=N)), 1.0)
    assert lhs > 0.99 and lhs <= rhs


def test_tv_w1_identical(laplace):
    assert check_tv_w1_contraction(laplace, laplace, 1.0) == (0.0, 0.0)


def test_witness_T1():
    lam, val = non_contraction_witness(1.0, n=1024)
    assert lam <= 2 ** 10 and val >= 0.9


def test_witness_smaller_T_needs_smaller_lambda():
    lam1, _ = non_contraction_witness(1.0, n=1024)
    lam01, _ = non_contraction_witness(0.1, n=1024)
    assert lam01 <= lam1


def test_witness_curve_monotone():
    vals = [v for _, v in witness_curve(1.0, n=1024)]
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))


def test_witness_not_found():
    with pytest.raises(WitnessNotFound):
        non_contraction_witness(1.0, n=256, threshold=1.01)
