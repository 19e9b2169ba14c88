"""Catalog of explicit functional-inequality bounds and their evaluation.

Every formula maps named inputs (reals or profiles) to a number that bounds a
target quantity from above (or, for the few ``sense="lower"`` entries, from
below).  A formula whose precondition fails yields an inert certificate whose
value is +inf, so scanning the catalog never needs exception handling.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import (EmptyRestriction, InvalidParameter, LogConcaveError, MissingInput,
                     NoApplicableFormula, NotAbsolutelyContinuous, PreconditionError,
                     UnknownFormula)
from .measure1d import (GridMeasure, apply_affine, convolve_gaussian, convolve_uniform,
                        gaussian, realize, scale_mix, truncate)
from . import metrics, oracle
from .semigroup import ou_evolve, tv_w1_factor

INF = math.inf
TARGETS = ("C_P", "C'_C", "C_C", "beta_profile", "alpha_profile", "tail", "distance",
           "variance", "expectation")

KAPPA_TV = 192.0 * math.e / math.pi
KLARTAG_C = 40.0 / 9.0
BL_C = 13824.0 * math.e / math.pi
KHINCHINE_KAPPA = 7.0
S_MARGIN = 1e-3


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------

@dataclass
class BoundCertificate:
    formula_id: str
    inputs: dict[str, Any]
    value: float
    target: str
    preconditions_met: bool
    diagnostics: str = ""
    chain: tuple["BoundCertificate", ...] = ()
    sense: str = "upper"
    subject: str = ""
    tightness: float | None = None

    def __post_init__(self):
        if not self.preconditions_met:
            self.value = INF
        elif not (self.value >= 0.0):
            raise InvalidParameter(f"{self.formula_id}: negative or NaN bound {self.value!r}")

    @property
    def inert(self) -> bool:
        return not self.preconditions_met

    def to_dict(self) -> dict:
        ins = {}
        for k, v in self.inputs.items():
            if isinstance(v, (int, float, bool, str)) or v is None:
                ins[k] = v
            else:
                ins[k] = type(v).__name__
        return {
            "formula_id": self.formula_id, "target": self.target, "sense": self.sense,
            "subject": self.subject, "value": self.value, "inputs": ins,
            "preconditions_met": self.preconditions_met, "diagnostics": self.diagnostics,
            "tightness": self.tightness, "chain": [c.to_dict() for c in self.chain],
        }


@dataclass(frozen=True)
class Formula:
    id: str
    entry: int
    target: str
    expression: str
    inputs: tuple[str, ...]
    preconditions: str
    source: str
    evaluator: Callable[[Mapping[str, Any]], tuple[float, bool, str]] = field(repr=False)
    optional: tuple[str, ...] = ()
    sense: str = "upper"


def _val(v, at: float | None = None) -> float:
    """A real input, or a profile / callable evaluated at ``at``."""
    if callable(v):
        if at is None:
            raise InvalidParameter("profile input needs an abscissa")
        return float(np.asarray(v(np.array([at], float))).ravel()[0])
    return float(v)


def _inv(profile, s: float) -> float:
    return float(np.asarray(profile.inverse(np.array([s], float))).ravel()[0])


def _lc(inp, key="log_concave") -> bool:
    return bool(inp.get(key, True))


def _ok(value: float, diag: str = "") -> tuple[float, bool, str]:
    return float(value), True, diag


def _fail(diag: str) -> tuple[float, bool, str]:
    return INF, False, diag


def _finite_pos(*vals) -> bool:
    return all(math.isfinite(v) and v >= 0 for v in vals)


def _w1_from_lp(d: float) -> float:
    return d * (1.0 + 2.0 * d / math.log(1.0 / d)) if d > 0 else 0.0


# ---------------------------------------------------------------------------
# evaluators
# ---------------------------------------------------------------------------

def _e_cheeger_to_poincare(i):
    c = _val(i["cheeger"])
    return _ok(4.0 * c * c) if _finite_pos(c) else _fail("C'_C not finite")


def _e_ledoux_reverse(i):
    c = _val(i["c_p"])
    return _ok(6.0 * math.sqrt(c)) if _finite_pos(c) else _fail("C_P not finite")


def _e_ledoux_improved(i):
    c = _val(i["c_p"])
    if not _lc(i):
        return _fail("needs a log-concave measure")
    return _ok(16.0 / math.pi * math.sqrt(c)) if _finite_pos(c) else _fail("C_P not finite")


def _e_weakmil_osc(i):
    s = float(i["s"])
    if not _lc(i):
        return _fail("needs a log-concave measure")
    if not 0.0 <= s < 0.5:
        return _fail("needs 0 <= s < 1/2")
    b = _val(i["beta"], s)
    if not _finite_pos(b):
        return _fail("beta(s) not finite")
    return _ok(4.0 * b / (math.pi * (0.5 - s) ** 2))


def _e_weakmil_var(i):
    s = float(i["s"])
    if not _lc(i):
        return _fail("needs a log-concave measure")
    if not 0.0 <= s < 1.0:
        return _fail("needs 0 <= s < 1")
    b = _val(i["beta"], s)
    if not _finite_pos(b):
        return _fail("beta(s) not finite")
    return _ok(16.0 * b / (math.pi * (1.0 - s) ** 2))


def _e_weakmil_optimized(i):
    if not _lc(i):
        return _fail("needs a log-concave measure")
    beta = i["beta"]
    g = lambda s: _val(beta, s) - 1.0 / (0.5 - s) ** 2  # noqa: E731
    lo, hi = 0.0, 0.5 - 1e-9
    if g(lo) <= 0:
        s_star = 0.0
    else:
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if g(mid) > 0:
                lo = mid
            else:
                hi = mid
        s_star = hi
    return _ok(4.0 / (math.pi * (0.5 - s_star) ** 4), f"s_nu={s_star:.6g}")


def _e_concentration_to_cheeger(i):
    s = float(i["s"])
    if not _lc(i):
        return _fail("needs a log-concave measure")
    if not 0.0 < s < 0.25:
        return _fail("needs 0 < s < 1/4")
    r = _inv(i["alpha"], s)
    if not _finite_pos(r):
        return _fail("alpha^-1(s) not finite")
    return _ok(16.0 * r / (math.pi * (1.0 - 4.0 * s) ** 2))


def _e_milman_profile(i):
    s = float(i["s"])
    if not _lc(i):
        return _fail("needs a log-concave measure")
    if not 0.0 < s < 0.5:
        return _fail("needs 0 < s < 1/2")
    r = _inv(i["alpha"], s)
    if not _finite_pos(r):
        return _fail("alpha^-1(s) not finite")
    return _ok(r / (1.0 - 2.0 * s))


def _e_first_moment(i):
    if not _lc(i):
        return _fail("needs a log-concave measure")
    return _ok(16.0 / math.pi * _val(i["first_abs_moment"]))


def _e_kls_variance(i):
    if not _lc(i):
        return _fail("needs a log-concave measure")
    return _ok(4.0 * _val(i["variance"]))


def _e_kls_variance_484(i):
    if not _lc(i):
        return _fail("needs a log-concave measure")
    return _ok(484.0 * _val(i["variance"]))


def _e_radial_split(i):
    n = float(i["dim"])
    if n < 1:
        return _fail("dimension must be >= 1")
    cpa = float(i.get("c_p_angle", 1.0 / n))
    beta0 = 2.0 * (_val(i["radial_abs_dev"]) + math.sqrt(n) * math.sqrt(cpa))
    return _ok(16.0 / math.pi * beta0, f"beta(0)={beta0:.6g}")


def _e_weak22(i):
    s = float(i["s"])
    if not _lc(i):
        return _fail("needs a log-concave measure")
    if not 0.0 <= s < 1.0 / 6.0:
        return _fail("needs 0 <= s < 1/6")
    b = _val(i["beta"], s)
    if not _finite_pos(b):
        return _fail("beta(s) not finite")
    return _ok(4.0 * math.sqrt(b * math.log(2.0)) / (1.0 - 6.0 * s))


def _e_restriction(i):
    mA = float(i["mass_A"])
    if not _lc(i):
        return _fail("needs a log-concave measure")
    if not 0.5 < mA <= 1.0:
        return _fail("needs nu(A) > 1/2")
    c = _val(i["cheeger_A"])
    return _ok(mA * c / (2.0 * mA - 1.0)) if _finite_pos(c) else _fail("C'_C(nu_A) not finite")


def _e_restriction_weak(i):
    mA, u = float(i["mass_A"]), float(i["u"])
    if not _lc(i):
        return _fail("needs a log-concave measure")
    gap = (1.0 - u) * mA - 0.5
    if not (0.0 <= u < 1.0 and gap > 0):
        return _fail("needs (1-u) nu(A) > 1/2")
    b = _val(i["beta_A"], u)
    if not _finite_pos(b):
        return _fail("beta_A(u) not finite")
    return _ok(4.0 * mA * b / (math.pi * gap * gap))


def _e_l2_truncation(i):
    a = float(i["a"])
    if not _lc(i):
        return _fail("needs a log-concave measure")
    if not a > math.sqrt(2.0):
        return _fail("needs a > sqrt(2)")
    c = _val(i["cheeger_trunc"])
    return _ok(a * a / (a * a - 2.0) * c) if _finite_pos(c) else _fail("C'_C(Z(a)) not finite")


def _e_l2_truncation_variance(i):
    a = float(i["a"])
    if not _lc(i):
        return _fail("needs a log-concave measure")
    if not a > math.sqrt(2.0):
        return _fail("needs a > sqrt(2)")
    v = _val(i["variance"])
    lower = v * (1.0 - KHINCHINE_KAPPA / a - 1.0 / (a * a))
    return _ok(v, f"lower={lower:.12g}")


def _linf_den(i):
    n, a, eps = float(i["n"]), float(i["a"]), float(i["eps"])
    return n, a, eps, n ** (a - 1.0) - (8.0 - 2.0 * eps) / eps


def _e_linf_truncation(i):
    n, a, eps, den = _linf_den(i)
    if not _lc(i):
        return _fail("needs a log-concave measure")
    if not (n >= 2 and 0.0 < eps <= 1.0):
        return _fail("needs n >= 2 and 0 < eps <= 1")
    if not den > 0:
        return _fail("n^(a-1) must exceed (8-2 eps)/eps")
    c = _val(i["cheeger_trunc"])
    return _ok(n ** (a - 1.0) / den * c) if _finite_pos(c) else _fail("C'_C(nu_Ka) not finite")


def _e_latala_tail(i):
    n, t, eps = float(i["n"]), float(i["t"]), float(i["eps"])
    if not (n >= 2 and 0.0 < eps <= 1.0):
        return _fail("needs n >= 2 and 0 < eps <= 1")
    if t < 2.0 * math.sqrt(3.0) / (2.0 - eps):
        return _fail("needs t >= 2 sqrt(3)/(2 - eps)")
    expo = (2.0 - eps) * t / (2.0 * math.sqrt(3.0)) - 1.0
    return _ok((8.0 - 2.0 * eps) / eps / n ** expo)


def _e_bobkov_1d(i):
    if not _lc(i):
        return _fail("needs a log-concave measure")
    return _ok(12.0 * _val(i["variance"]))


def _ratio_prefactor(i):
    r1, r2 = _val(i["ratio_nu_mu"]), _val(i["ratio_mu_nu"])
    return r1, r2, _finite_pos(r1, r2)


def _e_density_ratio(key):
    def ev(i):
        r1, r2, ok = _ratio_prefactor(i)
        if not ok:
            return _fail("a density ratio is unbounded")
        c = _val(i[key])
        return _ok(r1 * r2 * c) if _finite_pos(c) else _fail("reference constant not finite")
    return ev


def _c_mu(i) -> float:
    """Smallest admissible (1, inf) constant of the reference among those supplied."""
    cands = []
    if i.get("cheeger_mu") is not None:
        cands.append(_val(i["cheeger_mu"]))
    if i.get("c_p_mu") is not None:
        cands.append(math.sqrt(_val(i["c_p_mu"])))
    if i.get("c_c_mu") is not None:
        cands.append(_val(i["c_c_mu"]))
    cands = [c for c in cands if math.isfinite(c)]
    if not cands:
        raise MissingInput("one of cheeger_mu, c_p_mu, c_c_mu is required")
    return min(cands)


def _e_transfer_lp(i):
    p, mp = float(i["p"]), _val(i["m_p"])
    if not _lc(i):
        return _fail("needs a log-concave measure")
    if not p > 1:
        return _fail("needs p > 1")
    if not _finite_pos(mp):
        return _fail("M_p is infinite")
    D = 16.0 * (p + 1.0) ** (1.0 / (p - 1.0)) / (math.pi * (0.5 - 1.0 / (p + 1.0)) ** 2)
    return _ok(D * _c_mu(i) * mp ** (p / (p - 1.0)), f"D={D:.6g}")


def _e_transfer_entropy(i):
    u, ent = float(i["u"]), _val(i["entropy"])
    if not _lc(i):
        return _fail("needs a log-concave measure")
    if not 0.0 < u < 0.5:
        return _fail("needs 0 < u < 1/2")
    if not _finite_pos(ent):
        return _fail("relative entropy is infinite")
    ex = 2.0 * max(1.0, ent) / u
    if ex > 700:
        return _fail("exponent overflows")
    return _ok(4.0 * math.expm1(ex) / (math.pi * (0.5 - u) ** 2) * _c_mu(i))


def _e_transfer_lp_bis(i):
    p, mp, cp = float(i["p"]), _val(i["m_p"]), _val(i["c_p_mu"])
    if not _lc(i):
        return _fail("needs a log-concave measure")
    if not 1.0 < p <= 2.0:
        return _fail("needs 1 < p <= 2")
    if not _finite_pos(mp, cp):
        return _fail("M_p or C_P(mu) infinite")
    pre = 16.0 * math.sqrt(p) / (math.pi * math.sqrt(p - 1.0)) * 8.0 ** (p / (2.0 * (p - 1.0)))
    return _ok(pre * math.sqrt(cp) * mp)


def _e_transfer_entropy_bis(i):
    ent, cp = _val(i["entropy"]), _val(i["c_p_mu"])
    if not _lc(i):
        return _fail("needs a log-concave measure")
    if not _finite_pos(ent, cp):
        return _fail("entropy or C_P(mu) infinite")
    r = math.sqrt(cp)
    return _ok(32.0 / math.pi * r * max(1.0, 3.0 * math.exp(r)) * max(1.0, ent))


def _e_milman_density(i):
    r2 = _val(i["ratio_mu_nu"])
    if not (_lc(i) and _lc(i, "reference_log_concave")):
        return _fail("needs both measures log-concave")
    c = _val(i["cheeger_mu"])
    return _ok(r2 * r2 * c) if _finite_pos(r2, c) else _fail("ratio or C'_C(mu) infinite")


def _e_barthe_milman_profile(i):
    p, mp, r = float(i["p"]), _val(i["m_p"]), float(i["r"])
    if not p > 1:
        return _fail("needs p > 1")
    if not (_finite_pos(mp) and r > 0):
        return _fail("needs finite M_p and r > 0")
    q = p / (p - 1.0)
    a = max(_val(i["alpha_mu"], r / 2.0), 0.0)
    return _ok(2.0 * mp * a ** (1.0 / q))


def _e_barthe_milman_cheeger(i):
    p, mp, s = float(i["p"]), _val(i["m_p"]), float(i["s"])
    if not _lc(i):
        return _fail("needs a log-concave measure")
    if not (p > 1 and 0.0 < s < 0.25):
        return _fail("needs p > 1 and 0 < s < 1/4")
    if not _finite_pos(mp):
        return _fail("M_p is infinite")
    q = p / (p - 1.0)
    lvl = (s / (2.0 * mp)) ** q
    r = _inv(i["alpha_mu"], lvl)
    if not _finite_pos(r):
        return _fail("alpha_mu^-1 not finite")
    return _ok(32.0 * r / (math.pi * (1.0 - 4.0 * s) ** 2))


def _e_tv_transference(i):
    d = _val(i["d_tv"])
    if not (_lc(i) and _lc(i, "reference_log_concave")):
        return _fail("needs both measures log-concave")
    eps = 1.0 - d
    if not eps > 0:
        return _fail("needs d_TV < 1")
    c = _val(i["cheeger_mu"])
    return _ok(KAPPA_TV / eps ** 2 * max(1.0, math.log(1.0 / eps)) * c)


def _e_w1_weak_beta(i):
    s, w = float(i["s"]), _val(i["w1"])
    b = _val(i["beta_mu"], s)
    return _ok(b + 2.0 * w) if _finite_pos(b, w) else _fail("beta_mu(s) or W1 infinite")


def _e_w1_weak(i):
    w = _val(i["w1"])
    if not _lc(i):
        return _fail("needs a log-concave measure")
    c = _val(i["c_c_mu"])
    return _ok(16.0 / math.pi * (c + 2.0 * w)) if _finite_pos(c, w) else _fail("inputs infinite")


def _e_tv_weak_beta(i):
    s, d = float(i["s"]), _val(i["d_tv"])
    if not s - 2.0 * d >= 0:
        return _fail("needs s' >= 2 d_TV")
    b = _val(i["beta_mu"], s - 2.0 * d)
    return _ok(b) if _finite_pos(b) else _fail("beta_mu not finite")


def _e_tv_weak(i):
    s, d = float(i["s"]), _val(i["d_tv"])
    if not _lc(i):
        return _fail("needs a log-concave measure")
    den = 1.0 - 2.0 * s - 4.0 * d
    if not (s >= 0 and den > 0):
        return _fail("needs 1 - 2s - 4 d_TV > 0")
    b = _val(i["c_c_mu"]) if s == 0 and "c_c_mu" in i else _val(i["beta_mu"], s)
    return _ok(16.0 * b / (math.pi * den * den)) if _finite_pos(b) else _fail("beta_mu not finite")


def _e_dud_weak_beta(i):
    s, d = float(i["s"]), _val(i["d_dud"])
    if not s - 2.0 * d >= 0:
        return _fail("needs s' >= 2 d_Dud")
    b = _val(i["beta_mu"], s - 2.0 * d)
    return _ok(b + 2.0 * d) if _finite_pos(b) else _fail("beta_mu not finite")


def _e_dud_weak(i):
    s, d = float(i["s"]), _val(i["d_dud"])
    if not _lc(i):
        return _fail("needs a log-concave measure")
    den = 1.0 - 2.0 * s - 4.0 * d
    if not (s >= 0 and den > 0):
        return _fail("needs 1 - 2s - 4 d_Dud > 0")
    b = _val(i["c_c_mu"]) if s == 0 and "c_c_mu" in i else _val(i["beta_mu"], s)
    return _ok(16.0 * (b + 2.0 * d) / (math.pi * den * den)) if _finite_pos(b) else _fail("beta_mu not finite")


def _e_mollify_mix(i):
    lam = float(i["lam"])
    if not 0.0 <= lam <= 1.0:
        return _fail("needs 0 <= lambda <= 1")
    cz, cx = _val(i["c_p_z"]), _val(i.get("c_p_x", 1.0))
    return _ok(lam * cz + (1.0 - lam) * cx) if _finite_pos(cz, cx) else _fail("inputs infinite")


def _e_mollify_sum(i):
    cz, cx = _val(i["c_p_z"]), _val(i["c_p_x"])
    return _ok(cz + cx) if _finite_pos(cz, cx) else _fail("inputs infinite")


def _e_klartag_cube(i):
    R, th = float(i["R"]), float(i["theta"])
    if not (R >= 1 and th > 0):
        return _fail("needs R >= 1 and theta > 0")
    if not _lc(i):
        return _fail("needs a log-concave measure")
    return _ok(0.5 * KLARTAG_C * R * R * th * th)


def _e_uniform_convolution(i):
    th = float(i["theta"])
    if not th > 1:
        return _fail("needs theta > 1")
    if not _lc(i):
        return _fail("needs a log-concave measure")
    return _ok(0.5 * KLARTAG_C * (th - 1.0) ** 2)


def _e_gaussian_convolution_restricted(i):
    b, th = float(i["beta"]), float(i["theta"])
    if not (b > 0 and th > 0):
        return _fail("needs beta, theta > 0")
    if not _lc(i):
        return _fail("needs a log-concave measure")
    ex = th * th / (8.0 * b * b)
    if ex > 700:
        return _fail("exponent overflows")
    return _ok(0.5 * KLARTAG_C * th * th * math.exp(ex))


def _e_demollification(i):
    lam = float(i["lam"])
    if not _lc(i):
        return _fail("needs a log-concave measure")
    if not 0.0 < lam <= 1.0:
        return _fail("needs 0 < lambda <= 1")
    c = _val(i["c_p_mix"])
    return _ok(c / lam + (1.0 / lam - 1.0)) if _finite_pos(c) else _fail("C_P of the mixture infinite")


def _e_demollification_ab(i):
    a, b = float(i["scale"]), float(i["noise"])
    if not _lc(i):
        return _fail("needs a log-concave measure")
    if a == 0:
        return _fail("needs a nonzero scale")
    c = _val(i["c_p_mix"])
    return _ok((c + b * b) / (a * a)) if _finite_pos(c) else _fail("C_P of the mixture infinite")


def _e_demollification_cheeger(i):
    a, b = float(i["scale"]), float(i["noise"])
    if not _lc(i):
        return _fail("needs a log-concave measure")
    if not a > 0:
        return _fail("needs a positive scale")
    c = _val(i["cheeger_mix"])
    return _ok(12.0 / a * c + 6.0 * abs(b) / a) if _finite_pos(c) else _fail("C'_C of the mixture infinite")


def _e_beta_convolution(i):
    s = float(i["s"])
    if not 0.0 <= s:
        return _fail("needs s >= 0")
    b1, b2 = _val(i["beta_mu"], s / 2.0), _val(i["beta_nu"], s / 2.0)
    return _ok(b1 + b2) if _finite_pos(b1, b2) else _fail("a rate is infinite")


def _e_bl_to_cheeger(i):
    d = _val(i["d_bl_gauss"])
    if not _lc(i):
        return _fail("needs a log-concave measure")
    eps = 1.0 - d
    if not eps > 0:
        return _fail("needs d_BL(nu, gamma) < 1")
    return _ok(BL_C / eps ** 2 * max(1.0, math.log(1.0 / eps)) + 6.0)


def _e_bl_to_cheeger_pair(i):
    d = _val(i["d_bl"])
    if not (_lc(i) and _lc(i, "reference_log_concave")):
        return _fail("needs both measures log-concave")
    eps = 1.0 - d
    if not eps > 0:
        return _fail("needs d_BL(nu, mu) < 1")
    c = _val(i["cheeger_mu"])
    return _ok(6.0 * BL_C / eps ** 2 * max(1.0, math.log(1.0 / eps)) * (2.0 * c + 1.0) + 6.0)


def _e_semigroup_tv(i):
    T = float(i["T"])
    if not T > 0:
        return _fail("needs T > 0")
    return _ok(tv_w1_factor(T) * _val(i["w1"]))


def _e_semigroup_w1(i):
    T = float(i["T"])
    if not T >= 0:
        return _fail("needs T >= 0")
    return _ok(math.exp(-0.5 * T) * _val(i["w1"]))


def _e_lp_to_w1(i):
    d = _val(i["d_lp"])
    if not (_lc(i) and _lc(i, "reference_log_concave")):
        return _fail("needs both measures log-concave")
    if not 0.0 <= d < 1.0:
        return _fail("needs d_LP < 1")
    return _ok(_w1_from_lp(d))


def _e_lp_to_w1_lower(i):
    d = _val(i["d_lp"])
    return _ok(d * d)


def _e_lp_cheeger(i):
    d = _val(i["d_lp"])
    if not (_lc(i) and _lc(i, "reference_log_concave")):
        return _fail("needs both measures log-concave")
    if not 0.0 <= d < 1.0:
        return _fail("needs d_LP < 1")
    c = _val(i["c_c_mu"])
    return _ok(16.0 / math.pi * (c + 2.0 * _w1_from_lp(d)))


def _e_lp_semigroup(i):
    d, T = _val(i["d_lp"]), float(i["T"])
    if not _lc(i):
        return _fail("needs a log-concave measure")
    if not (0.0 <= d < 1.0 and T >= 0):
        return _fail("needs d_LP < 1 and T >= 0")
    return _ok(math.exp(-0.25 * T) * math.sqrt(_w1_from_lp(d)))


def _e_kyfan_expectation(i):
    k = _val(i["kyfan"])
    if not _lc(i):
        return _fail("needs log-concave marginals")
    if not 0.0 <= k < 1.0:
        return _fail("needs K < 1")
    return _ok(_w1_from_lp(k))


# ---------------------------------------------------------------------------
# the catalog
# ---------------------------------------------------------------------------

def _F(id, entry, target, expr, inputs, pre, source, ev, optional=(), sense="upper"):
    return Formula(id, entry, target, expr, tuple(inputs), pre, source, ev, tuple(optional), sense)


_LC = ("log_concave",)
_LC2 = ("log_concave", "reference_log_concave")
_CMU = ("cheeger_mu", "c_p_mu", "c_c_mu")

CATALOG: dict[str, Formula] = {f.id: f for f in [
    _F("cheeger_to_poincare", 1, "C_P", "4 C'_C^2", ["cheeger"], "none", "Cheeger", _e_cheeger_to_poincare),
    _F("ledoux_reverse", 2, "C'_C", "6 sqrt(C_P)", ["c_p"], "none", "Ledoux", _e_ledoux_reverse),
    _F("ledoux_improved", 3, "C'_C", "(16/pi) sqrt(C_P)", ["c_p"], "log-concave", "Ledoux", _e_ledoux_improved, _LC),
    _F("weakmil_osc", 4, "C'_C", "4 beta(s) / (pi (1/2 - s)^2)", ["beta", "s"], "log-concave, 0 <= s < 1/2",
       "E. Milman", _e_weakmil_osc, _LC),
    _F("weakmil_var", 5, "C'_C", "16 beta(s) / (pi (1 - s)^2)", ["beta", "s"], "log-concave, 0 <= s < 1",
       "E. Milman", _e_weakmil_var, _LC),
    _F("weakmil_optimized", 6, "C'_C", "4 / (pi (1/2 - s_nu)^4), beta(s_nu) = (1/2 - s_nu)^-2", ["beta"],
       "log-concave", "E. Milman", _e_weakmil_optimized, _LC),
    _F("concentration_to_cheeger", 7, "C'_C", "16 alpha^-1(s) / (pi (1 - 4s)^2)", ["alpha", "s"],
       "log-concave, 0 < s < 1/4", "E. Milman", _e_concentration_to_cheeger, _LC),
    _F("milman_profile", 8, "C'_C", "alpha^-1(s) / (1 - 2s)", ["alpha", "s"], "log-concave, 0 < s < 1/2",
       "E. Milman", _e_milman_profile, _LC),
    _F("first_moment", 9, "C'_C", "(16/pi) E|X - med|", ["first_abs_moment"], "log-concave",
       "E. Milman", _e_first_moment, _LC),
    _F("kls_variance", 10, "C_P", "4 Var", ["variance"], "log-concave", "Kannan-Lovasz-Simonovits",
       _e_kls_variance, _LC),
    _F("kls_variance_484", 10, "C_P", "484 Var", ["variance"], "log-concave", "Kannan-Lovasz-Simonovits",
       _e_kls_variance_484, _LC),
    _F("radial_split", 11, "C'_C", "(32/pi) (E||X| - sqrt n| + sqrt(n C_P(angle)))", ["radial_abs_dev", "dim"],
       "radial law, angular C_P given", "sphere decomposition", _e_radial_split, ("c_p_angle",)),
    _F("weak22_to_cheeger", 12, "C'_C", "4 sqrt(beta(s) ln 2) / (1 - 6s)", ["beta", "s"],
       "log-concave, 0 <= s < 1/6", "weak (2,2) Poincare", _e_weak22, _LC),
    _F("restriction", 13, "C'_C", "nu(A) C'_C(nu_A) / (2 nu(A) - 1)", ["mass_A", "cheeger_A"],
       "log-concave, nu(A) > 1/2", "restriction", _e_restriction, _LC),
    _F("restriction_weak", 14, "C'_C", "4 nu(A) beta_A(u) / (pi ((1-u) nu(A) - 1/2)^2)", ["mass_A", "beta_A", "u"],
       "log-concave, (1-u) nu(A) > 1/2", "restriction", _e_restriction_weak, _LC),
    _F("l2_truncation", 15, "C'_C", "a^2/(a^2 - 2) C'_C(Z(a))", ["a", "cheeger_trunc"], "log-concave, a > sqrt 2",
       "euclidean truncation", _e_l2_truncation, _LC),
    _F("l2_truncation_variance", 15, "variance", "Var(Z)(1 - kappa/a - 1/a^2) <= Var(Zbar(a)) <= Var(Z)",
       ["a", "variance"], "log-concave, a > sqrt 2, kappa = 7", "Khinchine", _e_l2_truncation_variance, _LC),
    _F("linf_truncation", 16, "C'_C", "n^(a-1) / (n^(a-1) - (8 - 2eps)/eps) C'_C(nu_Ka)",
       ["n", "a", "eps", "cheeger_trunc"], "n >= 2, 0 < eps <= 1, positive denominator", "Latala",
       _e_linf_truncation, _LC),
    _F("latala_tail", 17, "tail", "(8 - 2eps) eps^-1 / n^((2 - eps) t / (2 sqrt 3) - 1)", ["n", "t", "eps"],
       "n >= 2, 0 < eps <= 1, t >= 2 sqrt3 / (2 - eps)", "Latala", _e_latala_tail),
    _F("bobkov_1d", 18, "C_P", "12 Var", ["variance"], "log-concave", "Bobkov", _e_bobkov_1d, _LC),
    _F("density_ratio_classic", 19, "C_P", "||dnu/dmu|| ||dmu/dnu|| C_P(mu)", ["ratio_nu_mu", "ratio_mu_nu", "c_p_mu"],
       "bounded ratios", "classical", _e_density_ratio("c_p_mu")),
    _F("density_ratio_classic_cheeger", 19, "C'_C", "||dnu/dmu|| ||dmu/dnu|| C'_C(mu)",
       ["ratio_nu_mu", "ratio_mu_nu", "cheeger_mu"], "bounded ratios", "classical", _e_density_ratio("cheeger_mu")),
    _F("transfer_lp", 20, "C'_C", "D C(mu) M_p^(p/(p-1)), D = 16 (p+1)^(1/(p-1)) / (pi (1/2 - 1/(p+1))^2)",
       ["m_p", "p"], "nu log-concave, p > 1", "L^p transference", _e_transfer_lp, _LC + _CMU),
    _F("transfer_entropy", 21, "C'_C", "4 (e^(2 max(1, D)/u) - 1) / (pi (1/2 - u)^2) C(mu)", ["entropy", "u"],
       "nu log-concave, 0 < u < 1/2", "entropy transference", _e_transfer_entropy, _LC + _CMU),
    _F("transfer_lp_bis", 22, "C'_C", "(16 sqrt p / (pi sqrt(p-1))) 8^(p/(2(p-1))) sqrt(C_P(mu)) M_p",
       ["m_p", "p", "c_p_mu"], "nu log-concave, 1 < p <= 2", "L^p transference", _e_transfer_lp_bis, _LC),
    _F("transfer_entropy_bis", 23, "C'_C", "(32/pi) sqrt(C_P(mu)) max(1, 3 e^sqrt(C_P(mu))) max(1, D)",
       ["entropy", "c_p_mu"], "nu log-concave", "Bobkov-Ledoux", _e_transfer_entropy_bis, _LC),
    _F("milman_density", 24, "C'_C", "||dmu/dnu||^2 C'_C(mu)", ["ratio_mu_nu", "cheeger_mu"],
       "both log-concave", "E. Milman", _e_milman_density, _LC2),
    _F("barthe_milman_profile", 25, "alpha_profile", "2 M_p alpha_mu(r/2)^(1/q)", ["m_p", "p", "alpha_mu", "r"],
       "p > 1", "Barthe-Milman", _e_barthe_milman_profile),
    _F("barthe_milman_cheeger", 25, "C'_C", "32 alpha_mu^-1((s / 2M_p)^q) / (pi (1 - 4s)^2)",
       ["m_p", "p", "alpha_mu", "s"], "nu log-concave, 0 < s < 1/4", "Barthe-Milman", _e_barthe_milman_cheeger, _LC),
    _F("tv_transference", 26, "C'_C", "(kappa/eps^2)(1 v ln(1/eps)) C'_C(mu), kappa = 192e/pi",
       ["d_tv", "cheeger_mu"], "both log-concave, d_TV < 1", "E. Milman", _e_tv_transference, _LC2),
    _F("w1_weak_beta", 27, "beta_profile", "beta_mu(s) + 2 W1", ["beta_mu", "w1", "s"], "none", "W1 transference",
       _e_w1_weak_beta),
    _F("w1_weak", 27, "C'_C", "(16/pi)(C_C(mu) + 2 W1)", ["c_c_mu", "w1"], "nu log-concave", "W1 transference",
       _e_w1_weak, _LC),
    _F("tv_weak_beta", 28, "beta_profile", "beta_mu(s' - 2 d_TV)", ["beta_mu", "d_tv", "s"], "s' >= 2 d_TV",
       "TV transference", _e_tv_weak_beta),
    _F("tv_weak", 28, "C'_C", "16 beta_mu(s) / (pi (1 - 2s - 4 d_TV)^2)", ["d_tv", "s"],
       "nu log-concave, 1 - 2s - 4 d_TV > 0", "TV transference", _e_tv_weak, _LC + ("beta_mu", "c_c_mu")),
    _F("dud_weak_beta", 29, "beta_profile", "beta_mu(s' - 2 d_Dud) + 2 d_Dud", ["beta_mu", "d_dud", "s"],
       "s' >= 2 d_Dud", "Dudley transference", _e_dud_weak_beta),
    _F("dud_weak", 29, "C'_C", "16 (beta_mu(s) + 2 d_Dud) / (pi (1 - 2s - 4 d_Dud)^2)", ["d_dud", "s"],
       "nu log-concave, 1 - 2s - 4 d_Dud > 0", "Dudley transference", _e_dud_weak, _LC + ("beta_mu", "c_c_mu")),
    _F("mollify_mix", 30, "C_P", "lambda C_P(Z) + (1 - lambda) C_P(X)", ["c_p_z", "lam"], "0 <= lambda <= 1",
       "convolution", _e_mollify_mix, ("c_p_x",)),
    _F("mollify_sum", 30, "C_P", "C_P(Z) + C_P(X)", ["c_p_z", "c_p_x"], "independent summands", "convolution",
       _e_mollify_sum),
    _F("klartag_cube", 30, "C_P", "C R^2 theta^2 / 2, C = 40/9", ["R", "theta"],
       "log-concave on a cube of side theta with R-convexity", "Klartag", _e_klartag_cube, _LC),
    _F("uniform_convolution", 30, "C_P", "C (theta - 1)^2 / 2", ["theta"], "Z log-concave on the unit cube, theta > 1",
       "Klartag", _e_uniform_convolution, _LC),
    _F("gaussian_convolution_restricted", 30, "C_P", "(20/9) theta^2 e^(theta^2 / (8 beta^2))", ["beta", "theta"],
       "Z log-concave", "Klartag", _e_gaussian_convolution_restricted, _LC),
    _F("demollification", 30, "C_P", "C_P(sqrt(l) Z + sqrt(1-l) G) / l + (1/l - 1)", ["c_p_mix", "lam"],
       "Z log-concave, 0 < lambda <= 1", "OU time reversal", _e_demollification, _LC),
    _F("demollification_ab", 30, "C_P", "(C_P(aZ + bG) + b^2) / a^2", ["c_p_mix", "scale", "noise"],
       "Z log-concave", "OU time reversal", _e_demollification_ab, _LC),
    _F("demollification_cheeger", 30, "C'_C", "(12/a) C'_C(aZ + bG) + 6b/a", ["cheeger_mix", "scale", "noise"],
       "Z log-concave, a > 0", "OU time reversal", _e_demollification_cheeger, _LC),
    _F("beta_convolution", 30, "beta_profile", "beta_mu(s/2) + beta_nu(s/2)", ["beta_mu", "beta_nu", "s"],
       "mean centering", "convolution", _e_beta_convolution),
    _F("bl_to_cheeger", 31, "C'_C", "(C/eps^2)(1 v ln(1/eps)) + 6, C = 13824e/pi, eps = 1 - d_BL(nu, gamma)",
       ["d_bl_gauss"], "nu log-concave", "bounded-Lipschitz transference", _e_bl_to_cheeger, _LC),
    _F("bl_to_cheeger_pair", 31, "C'_C", "(6C/eps^2)(1 v ln(1/eps))(2 C'_C(mu) + 1) + 6", ["d_bl", "cheeger_mu"],
       "both log-concave", "bounded-Lipschitz transference", _e_bl_to_cheeger_pair, _LC2),
    _F("semigroup_tv", 32, "distance", "e^(-T/2) / sqrt(2 pi (1 - e^-T)) W1", ["w1", "T"], "T > 0",
       "reflection coupling", _e_semigroup_tv),
    _F("semigroup_w1", 32, "distance", "e^(-T/2) W1", ["w1", "T"], "T >= 0", "synchronous coupling",
       _e_semigroup_w1),
    _F("lp_to_w1", 33, "distance", "d_LP (1 + 2 d_LP / ln(1/d_LP))", ["d_lp"], "both log-concave, d_LP < 1",
       "Fradelizi", _e_lp_to_w1, _LC2),
    _F("lp_to_w1_lower", 33, "distance", "d_LP^2", ["d_lp"], "none", "Levy-Prokhorov", _e_lp_to_w1_lower,
       sense="lower"),
    _F("lp_cheeger", 33, "C'_C", "(16/pi)(C_C(mu) + 2 d_LP (1 + 2 d_LP / ln(1/d_LP)))", ["d_lp", "c_c_mu"],
       "both log-concave, d_LP < 1", "Fradelizi", _e_lp_cheeger, _LC2),
    _F("lp_semigroup", 33, "distance", "e^(-T/4) [d_LP (1 + 2 d_LP / ln(1/d_LP))]^(1/2)", ["d_lp", "T"],
       "nu log-concave, d_LP(gamma, nu) < 1", "Fradelizi", _e_lp_semigroup, _LC),
    _F("kyfan_expectation", 33, "expectation", "K (1 + 2K / ln(1/K))", ["kyfan"],
       "independent log-concave X, Y, K < 1", "Fradelizi", _e_kyfan_expectation, _LC),
]}

def formula(formula_id: str) -> Formula:
    try:
        return CATALOG[formula_id]
    except KeyError:
        raise UnknownFormula(formula_id) from None


def evaluate(formula_id: str, inputs: Mapping[str, Any], subject: str = "") -> BoundCertificate:
    """Evaluate one catalog entry; failed preconditions give an inert +inf certificate."""
    f = formula(formula_id)
    missing = [k for k in f.inputs if k not in inputs or inputs[k] is None]
    if missing:
        raise MissingInput(f"{formula_id} needs {', '.join(missing)}")
    try:
        value, ok, diag = f.evaluator(inputs)
    except (OverflowError, ZeroDivisionError) as exc:
        value, ok, diag = _fail(f"arithmetic failure: {exc}")
    if ok and not math.isfinite(value):
        ok, diag = False, diag or "value is not finite"
    keep = {k: inputs[k] for k in (*f.inputs, *f.optional) if k in inputs}
    return BoundCertificate(f.id, keep, value, f.target, ok, diag, sense=f.sense, subject=subject)


def compose(formula_id: str, child: BoundCertificate, key: str, extra: Mapping[str, Any] | None = None,
            subject: str = "") -> BoundCertificate:
    """Feed a certificate's value into another formula as input ``key``."""
    inputs = dict(extra or {})
    inputs[key] = child.value
    if child.inert:
        f = formula(formula_id)
        return BoundCertificate(f.id, inputs, INF, f.target, False, f"child {child.formula_id} is inert",
                                chain=(child,), sense=f.sense, subject=subject)
    cert = evaluate(formula_id, inputs, subject)
    cert.chain = (child,)
    return cert


def verify_against_oracle(cert: BoundCertificate, oracle_value: float, slack: float, atol: float = 0.0) -> bool:
    """True iff the certificate is on the right side of the oracle, up to relative
    slack and an absolute floor ``atol`` for oracles that are only known to that accuracy."""
    if cert.inert:
        raise PreconditionError(f"{cert.formula_id} is inert: {cert.diagnostics}")
    ov = float(oracle_value)
    cert.tightness = cert.value / ov if ov != 0 else (INF if cert.value > 0 else 1.0)
    if cert.sense == "lower":
        return cert.value <= ov * (1.0 + slack) + atol + 1e-15
    return cert.value >= ov * (1.0 - slack) - atol


# ---------------------------------------------------------------------------
# parameter scans
# ---------------------------------------------------------------------------

def _argmin_scan(fn: Callable[[float], float], lo: float, hi: float, n: int = 96,
                 log: bool = False) -> float:
    """Grid scan followed by a bounded refinement; returns the best parameter found."""
    grid = np.geomspace(lo, hi, n) if log else np.linspace(lo, hi, n)
    vals = np.array([fn(float(t)) for t in grid])
    if not np.any(np.isfinite(vals)):
        return float(grid[0])
    k = int(np.nanargmin(np.where(np.isfinite(vals), vals, np.nan)))
    a, b = grid[max(k - 1, 0)], grid[min(k + 1, n - 1)]
    best_t, best_v = float(grid[k]), float(vals[k])
    if b > a:
        res = minimize_scalar(fn, bounds=(a, b), method="bounded", options={"xatol": 1e-9 * max(1.0, abs(b))})
        if np.isfinite(res.fun) and res.fun < best_v:
            best_t = float(res.x)
    return best_t


def optimize(formula_id: str, inputs: Mapping[str, Any], param: str, lo: float, hi: float,
             n: int = 96, log: bool = False, subject: str = "") -> BoundCertificate:
    """Evaluate ``formula_id`` at the value of ``param`` in [lo, hi] minimizing the bound."""
    def fn(t):
        try:
            return evaluate(formula_id, {**inputs, param: t}).value
        except (LogConcaveError, ValueError, OverflowError):
            return INF
    t = _argmin_scan(fn, lo, hi, n, log)
    cert = evaluate(formula_id, {**inputs, param: t}, subject)
    cert.diagnostics = (cert.diagnostics + f" {param}*={t:.6g}").strip()
    return cert


# ---------------------------------------------------------------------------
# lower bounds for weak Poincare rates (test functions)
# ---------------------------------------------------------------------------

def beta_lower_bound(m: GridMeasure, s: float, n_levels: int = 14) -> float:
    """max over clipped identities f = clip(x, a, b) of nu|f - nu f| - s (b - a).

    Each f is 1-Lipschitz with oscillation b - a, so this is a lower bound for
    the optimal mean-centered weak (1, inf) rate at s."""
    probs = np.concatenate([[0.0], np.geomspace(1e-4, 0.45, n_levels - 1)])
    lo, hi = m.domain
    qa = np.where(probs > 0, m.quantile(np.maximum(probs, 1e-300)), lo)
    qb = np.where(probs > 0, oracle.upper_quantile(m, np.maximum(probs, 1e-300)), hi)
    best = 0.0
    for a in qa:
        for b in qb:
            if not b > a:
                continue
            f = lambda t, a=a, b=b: np.clip(t, a, b)  # noqa: E731
            mean = m.integrate(f, breaks=[a, b])
            dev = m.integrate(lambda t: np.abs(f(t) - mean), breaks=[a, b, min(max(mean, a), b)])
            best = max(best, dev - s * (b - a))
    return best


# ---------------------------------------------------------------------------
# measure-level assembly
# ---------------------------------------------------------------------------

@dataclass
class BoundContext:
    """What best_bound may use besides the measure's own moments.

    ``own_profiles`` unlocks the concentration-profile entries, ``own_oracles``
    the cross-constant entries, ``restrictions`` the truncation entries and
    ``mollify`` the gaussian-mollification entries; each reference measure
    unlocks the transference entries.  ``moments=False`` drops the entries
    that need nothing but the measure's own moments."""
    references: Sequence[GridMeasure] = ()
    own_profiles: bool = False
    own_oracles: bool = False
    restrictions: bool = False
    mollify: bool = False
    moments: bool = True

    @classmethod
    def full(cls, references: Sequence[GridMeasure] = ()) -> "BoundContext":
        return cls(tuple(references), True, True, True, True)


class _Oracles:
    """Lazily computed reference values for one measure."""

    def __init__(self, m: GridMeasure):
        self.m = m
        self._cache: dict[str, Any] = {}

    def get(self, key: str, fn: Callable[[], Any]):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    @property
    def c_p(self) -> float:
        return self.get("c_p", lambda: oracle.spectral_poincare(self.m).c_p)

    @property
    def cheeger(self) -> float:
        return self.get("cheeger", lambda: oracle.cheeger_constant(self.m) if self.m.is_log_concave else INF)

    @property
    def alpha(self):
        return self.get("alpha", lambda: oracle.concentration_profile(self.m))

    @property
    def beta_median(self):
        return self.get("beta_med", lambda: oracle.weak_beta_from_profile(self.alpha, "median"))

    @property
    def beta_mean(self):
        return self.get("beta_mean", lambda: oracle.weak_beta_from_profile(self.alpha, "mean"))

    @property
    def moments(self):
        return self.get("moments", lambda: oracle.moments(self.m))

    @property
    def c_c_upper(self) -> float:
        """An upper bound on the mean-centered (1, inf) constant."""
        def f():
            cands = [math.sqrt(self.moments.variance), math.sqrt(self.c_p)]
            if self.m.is_log_concave:
                cands.append(2.0 * self.cheeger)
            return min(cands)
        return self.get("c_c", f)


def _tail_integrable(nu: GridMeasure, mu: GridMeasure, p: float | None) -> bool:
    """Whether int (dnu/dmu)^p dmu (p None: relative entropy) is finite for the
    log-linear tail continuation of both measures."""
    def rate(m: GridMeasure, side: int) -> float:
        ld = m.log_density
        fin = np.nonzero(np.isfinite(ld))[0]
        if side > 0:
            if not (m.open_right and fin[-1] == m.n - 1):
                return INF
            return -(ld[-1] - ld[-2]) / m.step
        if not (m.open_left and fin[0] == 0):
            return INF
        return (ld[1] - ld[0]) / m.step

    for side in (-1, 1):
        a_nu, a_mu = rate(nu, side), rate(mu, side)
        if math.isinf(a_nu):
            continue
        if math.isinf(a_mu):
            return False
        if a_nu <= 0:
            return False
        if p is not None and not p * a_nu > (p - 1.0) * a_mu:
            return False
    return True


def _mp(nu: GridMeasure, mu: GridMeasure, p: float) -> float:
    if not _tail_integrable(nu, mu, p):
        return INF
    try:
        v = oracle.moments(nu, mu, p).m_p_ratio
    except NotAbsolutelyContinuous:
        return INF
    return v if v is not None and math.isfinite(v) else INF


def _entropy(nu: GridMeasure, mu: GridMeasure) -> float:
    if not _tail_integrable(nu, mu, None):
        return INF
    try:
        return oracle.moments(nu, mu).relative_entropy
    except NotAbsolutelyContinuous:
        return INF


@dataclass
class Candidate:
    cert: BoundCertificate
    oracle: Callable[[], float] | None = None
    atol: float = 0.0


_P_GRID = tuple(float(p) for p in np.geomspace(1.05, 8.0, 12))
_P_BIS = tuple(float(p) for p in np.geomspace(1.0 + 1e-3, 2.0, 32))


def _own_candidates(m: GridMeasure, o: _Oracles, ctx: BoundContext) -> list[Candidate]:
    lab = m.label
    lc = {"log_concave": m.is_log_concave}
    mo = o.moments
    out: list[Candidate] = []
    if ctx.moments:
        out += [
            Candidate(evaluate("first_moment", {**lc, "first_abs_moment": mo.first_abs_moment_about_median}, lab),
                      lambda: o.cheeger),
            Candidate(evaluate("kls_variance", {**lc, "variance": mo.variance}, lab), lambda: o.c_p),
            Candidate(evaluate("kls_variance_484", {**lc, "variance": mo.variance}, lab), lambda: o.c_p),
            Candidate(evaluate("bobkov_1d", {**lc, "variance": mo.variance}, lab), lambda: o.c_p),
        ]
    if ctx.own_oracles:
        out += [
            Candidate(evaluate("cheeger_to_poincare", {"cheeger": o.cheeger}, lab), lambda: o.c_p),
            Candidate(evaluate("ledoux_reverse", {"c_p": o.c_p}, lab), lambda: o.cheeger),
            Candidate(evaluate("ledoux_improved", {**lc, "c_p": o.c_p}, lab), lambda: o.cheeger),
            Candidate(evaluate("weakmil_var", {**lc, "beta": math.sqrt(o.c_p), "s": 0.0}, lab), lambda: o.cheeger),
            Candidate(evaluate("weak22_to_cheeger", {**lc, "beta": o.c_p, "s": 0.0}, lab), lambda: o.cheeger),
        ]
    if ctx.own_profiles and m.is_log_concave:
        hi = 0.5 - S_MARGIN
        bm = o.beta_median
        out += [
            Candidate(optimize("weakmil_osc", {**lc, "beta": bm}, "s", 0.0, hi, subject=lab), lambda: o.cheeger),
            Candidate(evaluate("weakmil_osc", {**lc, "beta": bm, "s": 0.0}, lab), lambda: o.cheeger),
            Candidate(evaluate("weakmil_optimized", {**lc, "beta": bm}, lab), lambda: o.cheeger),
            Candidate(optimize("concentration_to_cheeger", {**lc, "alpha": o.alpha}, "s", S_MARGIN,
                               0.25 - S_MARGIN, subject=lab), lambda: o.cheeger),
            Candidate(optimize("milman_profile", {**lc, "alpha": o.alpha}, "s", S_MARGIN, hi, subject=lab),
                      lambda: o.cheeger),
        ]
        # weak (2,2) rate from an oscillation bound on a centered window
        def hs(R):
            beta, s = oracle.holley_stroock_beta(m, R)
            return evaluate("weak22_to_cheeger", {**lc, "beta": beta, "s": s}).value
        sd = math.sqrt(mo.variance)
        R = _argmin_scan(hs, 0.2 * sd, 8.0 * sd, n=40, log=True)
        beta, s = oracle.holley_stroock_beta(m, R)
        c = evaluate("weak22_to_cheeger", {**lc, "beta": beta, "s": s}, lab)
        c.diagnostics = (c.diagnostics + f" holley-stroock R={R:.6g}").strip()
        out.append(Candidate(c, lambda: o.cheeger))
    if ctx.restrictions and m.is_log_concave:
        out += _restriction_candidates(m, o)
    if ctx.mollify and m.is_log_concave:
        out += _mollify_candidates(m, o)
        if _is_uniform(m):
            side = m.domain[1] - m.domain[0]
            out.append(Candidate(evaluate("klartag_cube", {**lc, "R": 1.0, "theta": side}, lab), lambda: o.c_p))
    return out


def _is_uniform(m: GridMeasure) -> bool:
    ld = m.log_density
    return not (m.open_left or m.open_right) and bool(np.all(np.isfinite(ld))) and float(np.ptp(ld)) < 1e-12


def _restriction_candidates(m: GridMeasure, o: _Oracles) -> list[Candidate]:
    lab = m.label
    out = []
    for delta in (0.01, 0.05, 0.1):
        a, b = float(m.quantile(delta)), float(oracle.upper_quantile(m, delta))
        try:
            sub = truncate(m, a, b)
        except EmptyRestriction:
            continue
        mass = float(m.cdf(b) - m.cdf(a))
        cA = oracle.cheeger_constant(sub)
        out.append(Candidate(evaluate("restriction", {"mass_A": mass, "cheeger_A": cA}, lab), lambda: o.cheeger))
        bA = oracle.weak_beta_from_profile(oracle.concentration_profile(sub), "median")
        umax = 1.0 - 1.0 / (2.0 * mass)
        if umax > 2e-3:
            out.append(Candidate(optimize("restriction_weak", {"mass_A": mass, "beta_A": bA}, "u", 0.0,
                                          umax - 1e-3, subject=lab), lambda: o.cheeger))
    mean, sd = m.mean(), math.sqrt(o.moments.variance)
    for a in (2.0, 3.0, 5.0):
        try:
            sub = truncate(m, mean - a * sd, mean + a * sd)
        except EmptyRestriction:
            continue
        cT = oracle.cheeger_constant(sub)
        out.append(Candidate(evaluate("l2_truncation", {"a": a, "cheeger_trunc": cT}, lab), lambda: o.cheeger))
        vt = sub.variance()
        out.append(Candidate(evaluate("l2_truncation_variance", {"a": a, "variance": o.moments.variance},
                                      f"{lab}|trunc"), lambda vt=vt: vt))
    return out


MOLLIFY_LAMBDAS = (0.25, 0.5, 0.9)
MOLLIFY_BETA = 0.5


def _mollify_candidates(m: GridMeasure, o: _Oracles) -> list[Candidate]:
    lab = m.label
    lc = {"log_concave": True}
    out = []
    for lam in MOLLIFY_LAMBDAS:
        mix = scale_mix(m, lam)
        cmix = oracle.spectral_poincare(mix).c_p
        out.append(Candidate(evaluate("demollification", {**lc, "c_p_mix": cmix, "lam": lam}, lab), lambda: o.c_p))
        out.append(Candidate(evaluate("mollify_mix", {"c_p_z": o.c_p, "c_p_x": 1.0, "lam": lam}, f"{lab}|mix"),
                             lambda cmix=cmix: cmix))
    b = MOLLIFY_BETA
    conv = convolve_gaussian(m, b)
    oc = _Oracles(conv)
    out += [
        Candidate(evaluate("mollify_sum", {"c_p_z": o.c_p, "c_p_x": b * b}, f"{lab}|conv"), lambda: oc.c_p),
        Candidate(evaluate("demollification_ab", {**lc, "c_p_mix": oc.c_p, "scale": 1.0, "noise": b}, lab),
                  lambda: o.c_p),
        Candidate(evaluate("demollification_cheeger", {**lc, "cheeger_mix": oc.cheeger, "scale": 1.0, "noise": b},
                           lab), lambda: o.cheeger),
    ]
    # restricted gaussian convolution on a window of side theta around the median
    theta = 2.0
    med = conv.median()
    win = truncate(conv, med - theta / 2, med + theta / 2)
    out.append(Candidate(evaluate("gaussian_convolution_restricted", {**lc, "beta": b, "theta": theta},
                                  f"{lab}|conv|window"), lambda: oracle.spectral_poincare(win).c_p))
    # uniform convolution of a unit-cube rescaling of the central part of m
    qa, qb = float(m.quantile(0.01)), float(oracle.upper_quantile(m, 0.01))
    z = truncate(m, qa, qb)
    z = apply_affine(z, 1.0 / (qb - qa), -0.5 * (qa + qb) / (qb - qa))
    th = 3.0
    zu = truncate(convolve_uniform(z, th), -(th - 1) / 2, (th - 1) / 2)
    out.append(Candidate(evaluate("uniform_convolution", {**lc, "theta": th}, f"{lab}|unif"),
                         lambda: oracle.spectral_poincare(zu).c_p))
    # mean-centered rates add under convolution
    bg = oracle.weak_beta_from_profile(oracle.concentration_profile(realize(gaussian(0.0, b, n=m.n))), "mean")
    for s in (0.1, 0.3):
        out.append(Candidate(evaluate("beta_convolution", {"beta_mu": o.beta_mean, "beta_nu": bg, "s": s},
                                      f"{lab}|conv"), lambda s=s: beta_lower_bound(conv, s)))
    return out


def _reference_candidates(m: GridMeasure, o: _Oracles,
                          mu: GridMeasure) -> tuple[list[Candidate], dict[str, float]]:
    """Transference entries with mu as the reference measure."""
    lab = m.label
    om = _Oracles(mu)
    mu_lc = mu.is_log_concave
    lc = {"log_concave": m.is_log_concave, "reference_log_concave": mu_lc}
    cmu: dict[str, float] = {"c_p_mu": om.c_p}
    if mu_lc:
        cmu["cheeger_mu"] = om.cheeger
    out: list[Candidate] = []
    cheeger = lambda: o.cheeger  # noqa: E731

    r1, r2 = oracle.density_ratio_sup(m, mu)
    ratios = {"ratio_nu_mu": r1, "ratio_mu_nu": r2}
    out.append(Candidate(evaluate("density_ratio_classic", {**ratios, "c_p_mu": om.c_p}, lab), lambda: o.c_p))
    if mu_lc:
        out.append(Candidate(evaluate("density_ratio_classic_cheeger", {**ratios, "cheeger_mu": om.cheeger}, lab),
                             cheeger))
        out.append(Candidate(evaluate("milman_density", {**lc, **ratios, "cheeger_mu": om.cheeger}, lab), cheeger))

    # L^p and entropy transference
    mps = {p: _mp(m, mu, p) for p in sorted(set(_P_GRID) | set(_P_BIS))}
    best = min((evaluate("transfer_lp", {**lc, **cmu, "m_p": mps[p], "p": p}, lab) for p in _P_GRID),
               key=lambda c: c.value)
    out.append(Candidate(best, cheeger))
    best = min((evaluate("transfer_lp_bis", {**lc, "c_p_mu": om.c_p, "m_p": mps[p], "p": p}, lab) for p in _P_BIS),
               key=lambda c: c.value)
    out.append(Candidate(best, cheeger))
    ent = _entropy(m, mu)
    out.append(Candidate(optimize("transfer_entropy", {**lc, **cmu, "entropy": ent}, "u", S_MARGIN, 0.5 - S_MARGIN,
                                  subject=lab), cheeger))
    out.append(Candidate(evaluate("transfer_entropy_bis", {**lc, "c_p_mu": om.c_p, "entropy": ent}, lab), cheeger))

    if mu_lc:
        alpha_nu = o.alpha if m.is_log_concave else None
        best = min((optimize("barthe_milman_cheeger", {**lc, "m_p": mps[p], "p": p, "alpha_mu": om.alpha}, "s",
                             S_MARGIN, 0.25 - S_MARGIN, n=48, subject=lab) for p in _P_GRID),
                   key=lambda c: c.value)
        out.append(Candidate(best, cheeger))
        if alpha_nu is not None:
            sd = math.sqrt(o.moments.variance)
            for r in (0.5 * sd, sd, 2.0 * sd):
                c = min((evaluate("barthe_milman_profile", {"m_p": mps[p], "p": p, "alpha_mu": om.alpha, "r": r}, lab)
                         for p in _P_GRID), key=lambda c: c.value)
                out.append(Candidate(c, lambda r=r: float(alpha_nu(np.array([r]))[0])))

    # distances
    d_tv = metrics.tv(m, mu)
    d_w1 = metrics.w1(m, mu)
    d_dud = metrics.bl_dud(m, mu, "Dudley")
    d_bl = metrics.bl_dud(m, mu, "BL")
    d_lp = metrics.levy_prokhorov(m, mu)
    dists = {"d_tv": d_tv, "w1": d_w1, "d_dud": d_dud, "d_bl": d_bl, "d_lp": d_lp}

    if mu_lc:
        out.append(Candidate(evaluate("tv_transference", {**lc, "d_tv": d_tv, "cheeger_mu": om.cheeger}, lab), cheeger))
        out.append(Candidate(evaluate("bl_to_cheeger_pair", {**lc, "d_bl": d_bl, "cheeger_mu": om.cheeger}, lab),
                             cheeger))
    ccmu = om.c_c_upper
    out.append(Candidate(evaluate("w1_weak", {**lc, "c_c_mu": ccmu, "w1": d_w1}, lab), cheeger))
    out.append(Candidate(evaluate("tv_weak", {**lc, "c_c_mu": ccmu, "d_tv": d_tv, "s": 0.0}, lab), cheeger))
    out.append(Candidate(evaluate("dud_weak", {**lc, "c_c_mu": ccmu, "d_dud": d_dud, "s": 0.0}, lab), cheeger))
    out.append(Candidate(evaluate("lp_cheeger", {**lc, "c_c_mu": ccmu, "d_lp": d_lp}, lab), cheeger))

    if mu_lc:
        bmu = om.beta_mean
        beta_nu = lambda s: (lambda: beta_lower_bound(m, s))  # noqa: E731
        for s in (0.05, 0.2):
            out.append(Candidate(evaluate("w1_weak_beta", {"beta_mu": bmu, "w1": d_w1, "s": s}, lab), beta_nu(s)))
        for s in (2.0 * d_tv + 0.05, 2.0 * d_tv + 0.2):
            out.append(Candidate(evaluate("tv_weak_beta", {"beta_mu": bmu, "d_tv": d_tv, "s": s}, lab), beta_nu(s)))
        for s in (2.0 * d_dud + 0.05, 2.0 * d_dud + 0.2):
            out.append(Candidate(evaluate("dud_weak_beta", {"beta_mu": bmu, "d_dud": d_dud, "s": s}, lab),
                                 beta_nu(s)))
        # profile-level transfers composed with the weak-rate bound
        if m.is_log_concave:
            def via(fid, key, d):
                shift = 2.0 * d if fid != "w1_weak_beta" else 0.0

                def fn(s):
                    ch = evaluate(fid, {"beta_mu": bmu, key: d, "s": s})
                    return compose("weakmil_osc", ch, "beta", {**lc, "s": s}).value
                lo, hi = shift + S_MARGIN, 0.5 - S_MARGIN
                if not hi > lo:
                    ch = evaluate(fid, {"beta_mu": bmu, key: d, "s": lo})
                    return compose("weakmil_osc", ch, "beta", {**lc, "s": lo}, lab)
                s = _argmin_scan(fn, lo, hi, n=48)
                ch = evaluate(fid, {"beta_mu": bmu, key: d, "s": s}, lab)
                return compose("weakmil_osc", ch, "beta", {**lc, "s": s}, lab)
            out.append(Candidate(via("w1_weak_beta", "w1", d_w1), cheeger))
            out.append(Candidate(via("tv_weak_beta", "d_tv", d_tv), cheeger))
            out.append(Candidate(via("dud_weak_beta", "d_dud", d_dud), cheeger))
            out.append(Candidate(optimize("tv_weak", {**lc, "beta_mu": bmu, "d_tv": d_tv}, "s", 0.0,
                                          max(0.5 - 2.0 * d_tv - S_MARGIN, 1e-6), n=48, subject=lab), cheeger))

    # distance inequalities between the pair
    pair = f"{lab}~{mu.label}"
    out.append(Candidate(evaluate("lp_to_w1", {**lc, "d_lp": d_lp}, pair), lambda: d_w1))
    out.append(Candidate(evaluate("lp_to_w1_lower", {"d_lp": d_lp}, pair), lambda: d_w1))
    return out, dists


def _gaussian_candidates(m: GridMeasure, o: _Oracles) -> list[Candidate]:
    """Entries whose second measure is the standard gaussian."""
    g = realize(gaussian(0.0, 1.0, n=m.n)).with_label("gamma")
    lab = m.label
    lc = {"log_concave": m.is_log_concave}
    out = [Candidate(evaluate("bl_to_cheeger", {**lc, "d_bl_gauss": metrics.bl_dud(m, g, "BL")}, lab),
                     lambda: o.cheeger)]
    T = 1.0
    flow_tol = 1e-6
    d_lp = metrics.levy_prokhorov(g, m)
    ev = ou_evolve(m, T)
    w = metrics.w1(m, g)
    out += [
        Candidate(evaluate("semigroup_w1", {"w1": w, "T": T}, f"{lab}~gamma|T=1"),
                  lambda: metrics.w1(ev, g), flow_tol),
        Candidate(evaluate("semigroup_tv", {"w1": w, "T": T}, f"{lab}~gamma|T=1"),
                  lambda: metrics.tv(ev, g), flow_tol),
        Candidate(evaluate("lp_semigroup", {**lc, "d_lp": d_lp, "T": T}, f"{lab}~gamma|T=1"),
                  lambda: metrics.levy_prokhorov(ev, g), metrics.metric_tolerance("LevyProkhorov", ev, g)),
    ]
    # independent coupling: E|X - Y| against its own Ky Fan distance
    if m.is_log_concave:
        k_ind, e_ind = independent_kyfan(m, g)
        out.append(Candidate(evaluate("kyfan_expectation", {**lc, "kyfan": k_ind}, f"{lab}x gamma"),
                             lambda: e_ind))
    return out


def independent_kyfan(a: GridMeasure, b: GridMeasure, k: int = 2048) -> tuple[float, float]:
    """(Ky Fan distance, E|X - Y|) for independent X ~ a and Y ~ b.

    X is atomized on k nodes and P(|X - Y| > z) is summed exactly over Y."""
    xa = np.linspace(*a.domain, k)
    pa = a.node_masses(xa)[1]
    lo = a.domain[0] - b.domain[1]
    hi = a.domain[1] - b.domain[0]
    z = np.linspace(0.0, max(abs(lo), abs(hi)), 4 * k)
    # P(|X - Y| > z) = sum_i pa_i [ P(Y < x_i - z) + P(Y > x_i + z) ]
    tail = np.array([np.dot(pa, b.cdf(xa - t) + b.sf(xa + t)) for t in z])
    tail = np.minimum(tail, 1.0)
    expect = float(np.trapezoid(tail, z))
    ok = np.nonzero(tail <= z)[0]
    kf = float(z[ok[0]]) if ok.size else 1.0
    return kf, expect


def candidates(m: GridMeasure, context: BoundContext | None = None) -> list[Candidate]:
    ctx = context or BoundContext()
    o = _Oracles(m)
    out = _own_candidates(m, o, ctx)
    if ctx.references:
        out += _gaussian_candidates(m, o)

        def one(mu):
            return _reference_candidates(m, o, mu)[0]
        with ThreadPoolExecutor(max_workers=1) as ex:
            for part in ex.map(one, ctx.references):
                out += part
    return out


def _compose_cross(best: dict[str, BoundCertificate], lab: str, lc: bool) -> list[BoundCertificate]:
    out = []
    if "C'_C" in best:
        out.append(compose("cheeger_to_poincare", best["C'_C"], "cheeger", subject=lab))
    if "C_P" in best:
        out.append(compose("ledoux_improved", best["C_P"], "c_p", {"log_concave": lc}, subject=lab))
    return out


def best_bound(target: str, m: GridMeasure, context: BoundContext | None = None) -> BoundCertificate:
    """Smallest valid certificate for C_P or C'_C of m among all applicable entries."""
    if target not in ("C_P", "C'_C"):
        raise InvalidParameter("best_bound targets C_P or C'_C")
    subj = m.label
    pool = [c.cert for c in candidates(m, context)
            if c.cert.subject == subj and c.cert.sense == "upper" and c.cert.target in ("C_P", "C'_C")]
    best: dict[str, BoundCertificate] = {}
    for c in pool:
        if c.preconditions_met and (c.target not in best or c.value < best[c.target].value):
            best[c.target] = c
    pool += _compose_cross(best, subj, m.is_log_concave)
    live = [c for c in pool if c.target == target and c.preconditions_met]
    if not live:
        raise NoApplicableFormula(f"no catalog entry applies to {target} of {subj or 'measure'}")
    return min(live, key=lambda c: (c.value, c.formula_id))


@dataclass
class ValidityRow:
    measure: str
    cert: BoundCertificate
    oracle: float
    slack: float
    passed: bool

    @property
    def tightness(self) -> float | None:
        return self.cert.tightness


def validity_sweep(m: GridMeasure, context: BoundContext | None = None, slack: float = 0.02) -> list[ValidityRow]:
    """Every live certificate for m checked against its oracle."""
    rows = []
    for c in candidates(m, context):
        if c.cert.inert or c.oracle is None:
            continue
        ov = float(c.oracle())
        if not math.isfinite(ov):
            continue
        ok = verify_against_oracle(c.cert, ov, slack, c.atol)
        rows.append(ValidityRow(m.label, c.cert, ov, slack, ok))
    return rows


def exact_max_tail(n: int, t: float) -> float:
    """P(max_i |G_i| >= t ln n) for n independent standard gaussians."""
    from scipy.stats import norm
    p = 2.0 * norm.sf(t * math.log(n))
    return float(-np.expm1(n * np.log1p(-p)))


def radial_certificate(dim: int, n: int = 4096) -> BoundCertificate:
    """radial_split for the standard gaussian in dimension ``dim`` via the law of |X|."""
    from .measure1d import radial
    r = realize(radial(dim, n=n))
    dev = r.integrate(lambda t: np.abs(t - math.sqrt(dim)), breaks=[math.sqrt(dim)])
    return evaluate("radial_split", {"radial_abs_dev": dev, "dim": dim}, f"gaussian^{dim}")
