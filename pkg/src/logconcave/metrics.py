"""Distances between grid measures.

TV and W1 use the exact one-dimensional formulas on the exponential-spline
model.  Bounded-Lipschitz, Dudley, Levy-Prokhorov and the concave-cost
transport distance work on atoms obtained by integrating the model density
over the cells of a common uniform grid; their reported tolerance is that
grid's spacing, which bounds the atomization error.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import brentq, linprog, minimize_scalar
from scipy import sparse

from . import kernels
from .errors import GridMismatch, InvalidParameter, LPFailure
from .measure1d import GridMeasure, _GL_W, _GL_X

METRICS = ("TV", "W1", "BL", "Dudley", "LevyProkhorov", "WLP")
LP_ATOMS = 2048
LEVY_ATOMS = 8192
WLP_ATOMS = 1024
LP_BISECTION_STEPS = 14
DUDLEY_SCAN = 64


def _check_mass(*ms: GridMeasure):
    for m in ms:
        if abs(m.mass - 1.0) > 1e-6:
            raise GridMismatch(f"measure {m.label!r} has mass {m.mass!r}")


def _breakpoints(a: GridMeasure, b: GridMeasure) -> np.ndarray:
    return np.union1d(a.nodes, b.nodes)


# ---------------------------------------------------------------------------
# exact 1D formulas
# ---------------------------------------------------------------------------

def tv(a: GridMeasure, b: GridMeasure) -> float:
    """Total variation: half the L1 distance of the densities, split at crossings."""
    _check_mass(a, b)
    if a is b:
        return 0.0
    z = _breakpoints(a, b)
    la, lb = a.log_pdf(z), b.log_pdf(z)
    pa, pb = np.exp(la), np.exp(lb)
    g0, g1 = pa[:-1] - pb[:-1], pa[1:] - pb[1:]
    cross = np.nonzero(g0 * g1 < 0)[0]
    extra = []
    if cross.size:
        fa = np.isfinite(la[cross]) & np.isfinite(la[cross + 1]) & np.isfinite(lb[cross]) & np.isfinite(lb[cross + 1])
        d0 = la[cross] - lb[cross]
        d1 = la[cross + 1] - lb[cross + 1]
        with np.errstate(invalid="ignore", divide="ignore"):
            t_log = d0 / (d0 - d1)
            t_lin = g0[cross] / (g0[cross] - g1[cross])
        t = np.where(fa, t_log, t_lin)
        t = np.clip(np.nan_to_num(t, nan=0.5), 0.0, 1.0)
        extra = z[cross] + t * (z[cross + 1] - z[cross])
    pts = np.union1d(z, extra)
    da = np.diff(a.cdf(pts))
    db = np.diff(b.cdf(pts))
    return float(min(0.5 * np.sum(np.abs(da - db)), 1.0))


def w1(a: GridMeasure, b: GridMeasure) -> float:
    """W1 = integral of |F_a - F_b|, with Gauss-Legendre pieces split at sign changes."""
    _check_mass(a, b)
    if a is b:
        return 0.0
    z = _breakpoints(a, b)
    H = a.cdf(z) - b.cdf(z)
    pts = [z]
    flips = np.nonzero(H[:-1] * H[1:] < 0)[0]
    if flips.size:
        f = lambda t: float(a.cdf(np.array([t]))[0] - b.cdf(np.array([t]))[0])  # noqa: E731
        roots = [brentq(f, z[i], z[i + 1], xtol=1e-14) for i in flips]
        pts.append(np.array(roots))
    p = np.unique(np.concatenate(pts))
    lo, ln = p[:-1], np.diff(p)
    x = lo[:, None] + ln[:, None] * _GL_X[None, :]
    h = np.abs(a.cdf(x) - b.cdf(x))
    return float(np.sum(h * ln[:, None] * _GL_W[None, :]))


# ---------------------------------------------------------------------------
# atomization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Atoms:
    x: np.ndarray
    masses: tuple[np.ndarray, ...]
    step: float


def atomize(measures: Sequence[GridMeasure], k: int) -> Atoms:
    """Masses of every measure on the cells of one common uniform k-point grid."""
    lo = min(m.domain[0] for m in measures)
    hi = max(m.domain[1] for m in measures)
    x = np.linspace(lo, hi, k)
    out = []
    for m in measures:
        _, w = m.node_masses(x)
        out.append(w / w.sum())
    return Atoms(x, tuple(out), float(x[1] - x[0]))


# ---------------------------------------------------------------------------
# bounded-Lipschitz and Dudley
# ---------------------------------------------------------------------------

def _lipschitz_lp(c: np.ndarray, h: float, joint: bool, L: float = 1.0, M: float = 1.0) -> float:
    """max sum f_i c_i subject to |f_i| <= M and |f_{i+1} - f_i| <= L h.

    With ``joint`` the budget itself is a variable: L + M = 1, L, M >= 0."""
    n = c.size
    D = sparse.diags([-np.ones(n - 1), np.ones(n - 1)], [0, 1], shape=(n - 1, n), format="csr")
    if not joint:
        A = sparse.vstack([D, -D], format="csr")
        ub = np.full(2 * (n - 1), L * h)
        res = linprog(-c, A_ub=A, b_ub=ub, bounds=[(-M, M)] * n, method="highs",
                      options={"primal_feasibility_tolerance": 1e-9, "dual_feasibility_tolerance": 1e-9})
    else:
        # variables: f (n), L, M
        I = sparse.identity(n, format="csr")
        colL = np.full((n - 1, 1), -h)
        colM = np.full((n, 1), -1.0)
        A = sparse.vstack([
            sparse.hstack([D, colL, np.zeros((n - 1, 1))]),
            sparse.hstack([-D, colL, np.zeros((n - 1, 1))]),
            sparse.hstack([I, np.zeros((n, 1)), colM]),
            sparse.hstack([-I, np.zeros((n, 1)), colM]),
        ], format="csr")
        ub = np.zeros(A.shape[0])
        Aeq = sparse.csr_matrix(np.concatenate([np.zeros(n), [1.0, 1.0]])[None, :])
        bounds = [(None, None)] * n + [(0, 1), (0, 1)]
        res = linprog(-np.concatenate([c, [0.0, 0.0]]), A_ub=A, b_ub=ub, A_eq=Aeq, b_eq=[1.0],
                      bounds=bounds, method="highs",
                      options={"primal_feasibility_tolerance": 1e-9, "dual_feasibility_tolerance": 1e-9})
    if res.status != 0:
        raise LPFailure(f"HiGHS status {res.status}: {res.message}")
    return float(max(-res.fun, 0.0))


def bl_dud(a: GridMeasure, b: GridMeasure, kind: str = "BL", k: int = LP_ATOMS,
           method: str = "joint") -> float:
    """Bounded-Lipschitz (|f| <= 1, Lip <= 1) or Dudley (|f|_inf + Lip <= 1) distance.

    For Dudley, ``method='joint'`` optimizes the Lipschitz budget inside one LP;
    ``method='scan'`` scans 64 budgets and refines around the best one."""
    _check_mass(a, b)
    if a is b:
        return 0.0
    at = atomize([a, b], k)
    c = at.masses[0] - at.masses[1]
    if kind == "BL":
        return _lipschitz_lp(c, at.step, joint=False)
    if kind != "Dudley":
        raise InvalidParameter(f"unknown kind {kind!r}")
    if method == "joint":
        return _lipschitz_lp(c, at.step, joint=True)
    Ls = np.linspace(0.0, 1.0, DUDLEY_SCAN)
    vals = np.array([_lipschitz_lp(c, at.step, False, L, 1.0 - L) for L in Ls])
    j = int(np.argmax(vals))
    lo, hi = Ls[max(j - 1, 0)], Ls[min(j + 1, Ls.size - 1)]
    res = minimize_scalar(lambda L: -_lipschitz_lp(c, at.step, False, L, 1.0 - L),
                          bounds=(lo, hi), method="bounded", options={"xatol": 1e-4})
    return float(max(vals[j], -res.fun))


# ---------------------------------------------------------------------------
# Levy-Prokhorov
# ---------------------------------------------------------------------------

def _lp_from_atoms(x: np.ndarray, pa: np.ndarray, pb: np.ndarray, steps: int = LP_BISECTION_STEPS) -> float:
    lo, hi = 0.0, 1.0
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if kernels.band_matched_mass(x, pa, x, pb, mid) >= 1.0 - mid - 1e-12:
            hi = mid
        else:
            lo = mid
    return hi


def levy_prokhorov(a: GridMeasure, b: GridMeasure, k: int = LEVY_ATOMS) -> float:
    """Smallest eps with a coupling putting at most eps mass off {|x - y| <= eps}."""
    _check_mass(a, b)
    if a is b:
        return 0.0
    at = atomize([a, b], k)
    if np.allclose(at.masses[0], at.masses[1], rtol=0, atol=1e-15):
        return 0.0
    return _lp_from_atoms(at.x, at.masses[0], at.masses[1])


# ---------------------------------------------------------------------------
# concave-cost transport and couplings
# ---------------------------------------------------------------------------

def _ot():
    for name in ("POT_BACKEND_DISABLE_PYTORCH", "POT_BACKEND_DISABLE_TENSORFLOW",
                 "POT_BACKEND_DISABLE_JAX", "POT_BACKEND_DISABLE_CUPY"):
        os.environ.setdefault(name, "1")
    import ot  # heavy import, done lazily

    return ot


def concave_cost(d):
    d = np.abs(d)
    return d / (1.0 + d)


@dataclass(frozen=True, eq=False)
class CouplingPlan:
    """Finite coupling: pairs (x_i, y_i) carrying mass_i."""

    x: np.ndarray
    y: np.ndarray
    mass: np.ndarray
    cost_value: float = float("nan")

    def __post_init__(self):
        m = np.asarray(self.mass, float)
        if np.any(m < -1e-15) or abs(m.sum() - 1.0) > 1e-8:
            raise InvalidParameter("coupling masses must be nonnegative and sum to 1")

    def marginals(self, grid_x: np.ndarray, grid_y: np.ndarray):
        ia = np.searchsorted(grid_x, self.x)
        ib = np.searchsorted(grid_y, self.y)
        return (np.bincount(ia, self.mass, grid_x.size), np.bincount(ib, self.mass, grid_y.size))


def _emd(xa, pa, xb, pb, cost):
    ot = _ot()
    C = cost(xa[:, None] - xb[None, :])
    plan, log = ot.emd(pa, pb, C, numItermax=10_000_000, log=True)
    if log.get("warning"):
        raise LPFailure(f"network simplex: {log['warning']}")
    return plan, float(log["cost"])


def optimal_plan(a: GridMeasure, b: GridMeasure, k: int = WLP_ATOMS) -> CouplingPlan:
    """Coupling minimizing E[|X-Y|/(1+|X-Y|)] between the atomized measures."""
    at = atomize([a, b], k)
    ia = at.masses[0] > 1e-14
    ib = at.masses[1] > 1e-14
    pa = at.masses[0][ia] / at.masses[0][ia].sum()
    pb = at.masses[1][ib] / at.masses[1][ib].sum()
    plan, cost = _emd(at.x[ia], pa, at.x[ib], pb, concave_cost)
    i, j = np.nonzero(plan > 0)
    return CouplingPlan(at.x[ia][i], at.x[ib][j], plan[i, j] / plan[i, j].sum(), cost)


def w_lp(a: GridMeasure, b: GridMeasure, k: int = WLP_ATOMS) -> float:
    _check_mass(a, b)
    if a is b:
        return 0.0
    return max(optimal_plan(a, b, k).cost_value, 0.0)


def quantile_coupling(a: GridMeasure, b: GridMeasure, k: int = 4096) -> CouplingPlan:
    """Monotone (comonotone) coupling sampled at k equal-mass levels."""
    u = (np.arange(k) + 0.5) / k
    x, y = a.quantile(u), b.quantile(u)
    mass = np.full(k, 1.0 / k)
    return CouplingPlan(x, y, mass, float(np.sum(mass * concave_cost(x - y))))


def kyfan(plan: CouplingPlan) -> tuple[float, float]:
    """(K, K*): inf{eps: P(|X-Y| > eps) <= eps} and E[c(|X-Y|)] under the plan."""
    z = np.abs(np.asarray(plan.x, float) - np.asarray(plan.y, float))
    w = np.asarray(plan.mass, float)
    kstar = float(np.sum(w * concave_cost(z)))
    order = np.argsort(z, kind="stable")
    z, w = z[order], w[order]
    zu, idx = np.unique(z, return_index=True)
    wu = np.add.reduceat(w, idx)
    total = wu.sum()
    tail = total - np.cumsum(wu)  # P(Z > zu_k)
    tail = np.maximum(tail, 0.0)
    # below the smallest displacement P(Z > eps) = 1, feasible only from eps = 1 on
    best = 1.0
    for k in range(zu.size):
        cand = max(zu[k], tail[k])
        nxt = zu[k + 1] if k + 1 < zu.size else math.inf
        if cand < nxt:
            best = min(best, cand)
    return float(min(best, 1.0)), kstar


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DistanceReport:
    measures: tuple[str, ...]
    metric: str
    matrix: np.ndarray
    tolerance: np.ndarray = field(repr=False)


def metric_tolerance(metric: str, a: GridMeasure, b: GridMeasure) -> float:
    lo = min(a.domain[0], b.domain[0])
    hi = max(a.domain[1], b.domain[1])
    if metric in ("TV", "W1"):
        return 1e-9
    if metric in ("BL", "Dudley"):
        return 2.0 * (hi - lo) / (LP_ATOMS - 1) + 1e-8
    if metric == "LevyProkhorov":
        return (hi - lo) / (LEVY_ATOMS - 1) + 2.0 ** -LP_BISECTION_STEPS
    if metric == "WLP":
        return (hi - lo) / (WLP_ATOMS - 1) + 1e-9
    raise InvalidParameter(f"unknown metric {metric!r}")


def distance(a: GridMeasure, b: GridMeasure, metric: str) -> float:
    if metric == "TV":
        return tv(a, b)
    if metric == "W1":
        return w1(a, b)
    if metric in ("BL", "Dudley"):
        return bl_dud(a, b, metric)
    if metric == "LevyProkhorov":
        return levy_prokhorov(a, b)
    if metric == "WLP":
        return w_lp(a, b)
    raise InvalidParameter(f"unknown metric {metric!r}; choose from {METRICS}")


def distance_report(measures: Sequence[GridMeasure], names: Sequence[str], metric: str) -> DistanceReport:
    n = len(measures)
    if len(names) != n:
        raise InvalidParameter("one name per measure is required")
    mat = np.zeros((n, n))
    tol = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            mat[i, j] = mat[j, i] = distance(measures[i], measures[j], metric)
            tol[i, j] = tol[j, i] = metric_tolerance(metric, measures[i], measures[j])
    return DistanceReport(tuple(names), metric, mat, tol)


# ---------------------------------------------------------------------------
# comparison chain
# ---------------------------------------------------------------------------

def random_log_concave(rng: np.random.Generator, n: int = 2048) -> GridMeasure:
    """A randomly parameterized member of the gaussian / exponential / uniform families."""
    from .measure1d import exponential_symmetric, gaussian, realize, uniform, apply_affine
    kind = int(rng.integers(3))
    if kind == 0:
        m = realize(gaussian(float(rng.uniform(-1, 1)), float(rng.uniform(0.5, 2.0)), n=n))
    elif kind == 1:
        m = realize(exponential_symmetric(float(rng.uniform(0.4, 1.5)), n=n))
        c = float(rng.uniform(-1, 1))
        m = apply_affine(m, 1.0, c).with_label(f"{m.label}{c:+.6g}")
    else:
        a = float(rng.uniform(-2, 0))
        m = realize(uniform(a, a + float(rng.uniform(0.5, 3.0)), n=n))
    return m


def random_pairs(seed: int, count: int = 20, n: int = 2048) -> list[tuple[GridMeasure, GridMeasure]]:
    rng = np.random.default_rng(seed)
    return [(random_log_concave(rng, n), random_log_concave(rng, n)) for _ in range(count)]


@dataclass(frozen=True)
class ChainRow:
    relation: str
    lhs: float
    rhs: float
    tolerance: float
    holds: bool


def _w1_from_lp(d: float) -> float:
    if d >= 1.0:
        return math.inf
    return d * (1.0 + 2.0 * d / math.log(1.0 / d)) if d > 0 else 0.0


def metric_chain(a: GridMeasure, b: GridMeasure, log_concave: bool = True,
                 values: dict[str, float] | None = None) -> list[ChainRow]:
    """Each comparison inequality between the six distances for one pair.

    A relation lhs <= g(x) holds when lhs - 2 tol(lhs) <= g(x + 2 tol(x)),
    i.e. up to twice the discretization tolerance of every metric involved."""
    d = dict(values) if values else {k: distance(a, b, k) for k in METRICS}
    t = {k: metric_tolerance(k, a, b) for k in METRICS}

    def row(name, lhs_key, lhs_scale, rhs_fn, rhs_keys):
        lhs = lhs_scale * d[lhs_key]
        rhs = rhs_fn(*[d[k] for k in rhs_keys])
        rhs_hi = rhs_fn(*[d[k] + 2.0 * t[k] for k in rhs_keys])
        slack = 2.0 * lhs_scale * t[lhs_key] + (rhs_hi - rhs)
        return ChainRow(name, lhs, rhs, slack, bool(lhs - 2.0 * lhs_scale * t[lhs_key] <= rhs_hi))

    rows = [
        row("d_Dud <= d_BL", "Dudley", 1.0, lambda x: x, ["BL"]),
        row("d_BL <= 2 d_Dud", "BL", 1.0, lambda x: 2.0 * x, ["Dudley"]),
        row("d_BL <= 2 d_TV", "BL", 1.0, lambda x: 2.0 * x, ["TV"]),
        row("d_LP <= d_TV", "LevyProkhorov", 1.0, lambda x: x, ["TV"]),
        row("d_BL/4 <= d_LP", "BL", 0.25, lambda x: x, ["LevyProkhorov"]),
        row("d_Dud/2 <= d_LP", "Dudley", 0.5, lambda x: x, ["LevyProkhorov"]),
        row("d_LP <= sqrt(3/2 d_Dud)", "LevyProkhorov", 1.0, lambda x: math.sqrt(1.5 * x), ["Dudley"]),
        row("d_LP <= sqrt(3/2 d_BL)", "LevyProkhorov", 1.0, lambda x: math.sqrt(1.5 * x), ["BL"]),
        row("d_LP^2 <= W1", "LevyProkhorov", 1.0, lambda x: math.sqrt(x), ["W1"]),
        row("W_LP <= W1/(1+W1)", "WLP", 1.0, lambda x: x / (1.0 + x), ["W1"]),
        row("W_LP/2 <= d_LP", "WLP", 0.5, lambda x: x, ["LevyProkhorov"]),
        row("d_LP <= sqrt(2 W_LP)", "LevyProkhorov", 1.0, lambda x: math.sqrt(2.0 * x), ["WLP"]),
    ]
    if log_concave and d["LevyProkhorov"] < 1.0:
        rows.append(row("W1 <= d_LP(1 + 2 d_LP/ln(1/d_LP))", "W1", 1.0, _w1_from_lp, ["LevyProkhorov"]))
    return rows
