"""Ornstein-Uhlenbeck flow on grid measures and contraction experiments.

The flow is applied in closed form: G_T sends the law of Z to the law of
e^{-T/2} Z + sqrt(1 - e^{-T}) G, so evolution is an affine map followed by a
gaussian convolution.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidParameter, WitnessNotFound
from .measure1d import DEFAULT_N, GridMeasure, apply_affine, convolve_gaussian, gaussian, realize
from .metrics import tv, w1

WITNESS_THRESHOLD = 0.9
WITNESS_LAMBDAS = tuple(2.0 ** k for k in range(1, 11))


@dataclass(frozen=True, eq=False)
class OUFlow:
    time: float
    input: GridMeasure
    output: GridMeasure


def ou_flow(m: GridMeasure, T: float) -> OUFlow:
    T = float(T)
    if not (T >= 0.0 and math.isfinite(T)):
        raise InvalidParameter("time must be finite and >= 0")
    if T == 0.0:
        return OUFlow(T, m, m)
    out = convolve_gaussian(apply_affine(m, math.exp(-0.5 * T)), math.sqrt(-math.expm1(-T)))
    return OUFlow(T, m, out.with_label(m.label))


def ou_evolve(m: GridMeasure, T: float) -> GridMeasure:
    """Law at time T of the OU process started from m."""
    return ou_flow(m, T).output


def check_w1_contraction(a: GridMeasure, b: GridMeasure, T: float) -> tuple[float, float]:
    """(W1 of the evolved pair, e^{-T/2} W1 of the initial pair)."""
    lhs = w1(ou_evolve(a, T), ou_evolve(b, T)) if a is not b else 0.0
    rhs = math.exp(-0.5 * T) * (w1(a, b) if a is not b else 0.0)
    return lhs, rhs


def tv_w1_factor(T: float) -> float:
    if not T > 0:
        raise InvalidParameter("the TV/W1 factor needs T > 0")
    return math.exp(-0.5 * T) / math.sqrt(2.0 * math.pi * -math.expm1(-T))


def check_tv_w1_contraction(a: GridMeasure, b: GridMeasure, T: float) -> tuple[float, float]:
    """(TV of the evolved pair, factor(T) * W1 of the initial pair)."""
    factor = tv_w1_factor(T)
    if a is b:
        return 0.0, 0.0
    return tv(ou_evolve(a, T), ou_evolve(b, T)), factor * w1(a, b)


def non_contraction_witness(T: float, n: int = DEFAULT_N,
                            threshold: float = WITNESS_THRESHOLD) -> tuple[float, float]:
    """First lambda in 2, 4, ..., 1024 with TV(G_T(law of lambda*G), gamma) >= threshold."""
    if not T > 0:
        raise InvalidParameter("T must be positive")
    g = realize(gaussian(0.0, 1.0, n=n))
    for lam in WITNESS_LAMBDAS:
        val = tv(ou_evolve(realize(gaussian(0.0, lam, n=n)), T), g)
        if val >= threshold:
            return lam, val
    raise WitnessNotFound(f"no lambda up to {WITNESS_LAMBDAS[-1]:g} reaches TV {threshold} at T={T}")


def witness_curve(T: float, n: int = DEFAULT_N) -> list[tuple[float, float]]:
    """(lambda, TV) over the whole scan, for monotonicity checks and reports."""
    g = realize(gaussian(0.0, 1.0, n=n))
    return [(lam, tv(ou_evolve(realize(gaussian(0.0, lam, n=n)), T), g)) for lam in WITNESS_LAMBDAS]
