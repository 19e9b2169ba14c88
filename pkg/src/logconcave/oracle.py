"""Reference values for one-dimensional measures.

Spectral gap (Poincare constant), isoperimetric and concentration profiles,
Cheeger constant, weak-Poincare rates, moments and a few tail helpers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import sparse
from scipy.linalg import solve_banded
from scipy.optimize import minimize_scalar
from scipy.sparse.linalg import eigsh

from . import kernels
from .errors import InvalidParameter, NonConverged, NotAbsolutelyContinuous, NotLogConcave
from .measure1d import GridMeasure, apply_affine

RICHARDSON_TOL = 0.05
_TAIL_DROP = 46.0  # extend open tails until the density falls by ~e^-46


# ---------------------------------------------------------------------------
# spectral gap
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralResult:
    c_p: float
    eigenvalue: float
    grid_sizes: tuple[int, int]
    richardson_estimate: float
    residual: float
    fine_value: float
    coarse_value: float
    converged: bool = True


def _extended_profile(m: GridMeasure, extend_tails: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Finite-support nodes and log-density, continued log-linearly past open ends."""
    ld = m.log_density
    fin = np.nonzero(np.isfinite(ld))[0]
    x = m.nodes[fin[0]:fin[-1] + 1]
    v = ld[fin[0]:fin[-1] + 1]
    if not extend_tails or x.size < 3:
        return x, v
    h = m.step
    width = x[-1] - x[0]
    cap = 2 * m.n
    parts_x, parts_v = [x], [v]
    if m.open_left and fin[0] == 0:
        slope = (v[1] - v[0]) / h
        if slope > 1e-12:
            L = min(_TAIL_DROP / slope, 10.0 * width)
            k = min(int(math.ceil(L / h)), cap)
            step = L / k
            t = step * np.arange(k, 0, -1)
            parts_x.insert(0, x[0] - t)
            parts_v.insert(0, v[0] - slope * t)
    if m.open_right and fin[-1] == m.n - 1:
        slope = (v[-2] - v[-1]) / h
        if slope > 1e-12:
            L = min(_TAIL_DROP / slope, 10.0 * width)
            k = min(int(math.ceil(L / h)), cap)
            step = L / k
            t = step * np.arange(1, k + 1)
            parts_x.append(x[-1] + t)
            parts_v.append(v[-1] - slope * t)
    return np.concatenate(parts_x), np.concatenate(parts_v)


def generator_tridiagonal(x: np.ndarray, ld: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Symmetrized Neumann generator M^-1/2 K M^-1/2 as (diagonal, squared off-diagonal).

    Conductances exp(mean log-density)/dx on each edge, lumped masses on nodes;
    everything is formed from log-density differences so tiny tails are harmless.
    """
    dx = np.diff(x)
    w = np.empty_like(x)
    w[0] = 0.5 * dx[0]
    w[-1] = 0.5 * dx[-1]
    w[1:-1] = 0.5 * (dx[:-1] + dx[1:])
    half = 0.5 * np.diff(ld)
    d = np.zeros_like(x)
    # c_j / m_j and c_j / m_{j+1}
    d[:-1] += np.exp(half) / (dx * w[:-1])
    d[1:] += np.exp(-half) / (dx * w[1:])
    e2 = 1.0 / (dx * dx * w[:-1] * w[1:])
    return d, e2


def _gap(x: np.ndarray, ld: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
    d, e2 = generator_tridiagonal(x, ld)
    e = np.sqrt(e2)
    bound = float(np.max(d + np.concatenate([[0.0], e]) + np.concatenate([e, [0.0]])))
    lam = kernels.tridiag_eigenvalue(d, e2, 1, 0.0, bound)
    return float(lam), d, e


def _residual(d: np.ndarray, e: np.ndarray, lam: float) -> float:
    n = d.size
    ab = np.zeros((3, n))
    ab[0, 1:] = -e
    ab[1] = d - lam * (1 + 1e-10)
    ab[2, :-1] = -e
    v = np.ones(n) / math.sqrt(n)
    v[: n // 2] *= -1.0
    for _ in range(3):
        v = solve_banded((1, 1), ab, v)
        v /= np.linalg.norm(v)
    tv = d * v
    tv[:-1] -= e * v[1:]
    tv[1:] -= e * v[:-1]
    return float(np.linalg.norm(tv - lam * v) / max(abs(lam), 1e-300))


def spectral_poincare(m: GridMeasure, extend_tails: bool = True) -> SpectralResult:
    """Poincare constant 1/lambda_1 of the weighted Neumann problem, with Richardson step."""
    x, ld = _extended_profile(m, extend_tails)
    if x.size < 8:
        raise NonConverged("support too small for a spectral solve")
    lam_f, d, e = _gap(x, ld)
    xc = x[::2]
    lc = ld[::2]
    if xc[-1] != x[-1]:
        xc = np.append(xc, x[-1])
        lc = np.append(lc, ld[-1])
    lam_c, _, _ = _gap(xc, lc)
    lam_r = (4.0 * lam_f - lam_c) / 3.0
    cf, cc = 1.0 / lam_f, 1.0 / lam_c
    if not lam_r > 0:
        raise NonConverged(f"Richardson eigenvalue {lam_r!r} is not positive")
    cr = 1.0 / lam_r
    if abs(cr - cf) > RICHARDSON_TOL * cf:
        raise NonConverged(f"two-grid estimates disagree: fine {cf:.6g}, extrapolated {cr:.6g}")
    return SpectralResult(c_p=cr, eigenvalue=lam_r, grid_sizes=(x.size, xc.size),
                          richardson_estimate=cr, residual=_residual(d, e, lam_f),
                          fine_value=cf, coarse_value=cc)


def generator_matrix(m: GridMeasure, n: int | None = None) -> sparse.csr_matrix:
    """Sparse symmetric generator of m (optionally subsampled to about n nodes)."""
    x, ld = _extended_profile(m, extend_tails=False)
    if n is not None and x.size > n:
        idx = np.unique(np.round(np.linspace(0, x.size - 1, n)).astype(int))
        x, ld = x[idx], ld[idx]
    d, e2 = generator_tridiagonal(x, ld)
    e = np.sqrt(e2)
    return sparse.diags([-e, d, -e], [-1, 0, 1], format="csr")


def product_gap(m1: GridMeasure, m2: GridMeasure, n: int = 64) -> tuple[float, float]:
    """(gap of the Kronecker-sum generator, min of the marginal gaps) on n-node grids."""
    a = generator_matrix(m1, n)
    b = generator_matrix(m2, n)
    big = sparse.kron(a, sparse.identity(b.shape[0])) + sparse.kron(sparse.identity(a.shape[0]), b)
    vals = np.sort(eigsh(big.tocsc(), k=3, sigma=-1e-3, which="LM", return_eigenvectors=False))
    la = np.sort(np.linalg.eigvalsh(a.toarray()))[1]
    lb = np.sort(np.linalg.eigvalsh(b.toarray()))[1]
    return float(vals[1]), float(min(la, lb))


# ---------------------------------------------------------------------------
# profiles
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ProfileTable:
    """Sampled monotone curve with optional exact evaluator and generalized inverse."""

    abscissae: np.ndarray
    values: np.ndarray
    kind: str
    evaluator: Callable[[np.ndarray], np.ndarray] | None = None
    inverse_fn: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        if self.kind not in ("isoperimetric", "concentration", "weak_beta"):
            raise InvalidParameter(f"unknown profile kind {self.kind!r}")

    def __call__(self, t):
        t = np.asarray(t, float)
        if self.evaluator is not None:
            return self.evaluator(t)
        return np.interp(t, self.abscissae, self.values)

    def inverse(self, s):
        """Generalized inverse inf{t : value(t) <= s} (for nonincreasing kinds)."""
        s = np.asarray(s, float)
        if self.inverse_fn is not None:
            return self.inverse_fn(s)
        if self.kind == "isoperimetric":
            raise InvalidParameter("isoperimetric profiles are not inverted")
        a, v = self.abscissae, self.values
        ok = v[None, :] <= s.reshape(-1, 1)
        first = np.where(ok.any(axis=1), ok.argmax(axis=1), a.size - 1)
        out = a[first]
        out = np.where(ok.any(axis=1), out, np.inf)
        return out.reshape(s.shape)


def _require_lc(m: GridMeasure):
    if not m.is_log_concave:
        raise NotLogConcave(f"{m.label or 'measure'} is not flagged log-concave")


def upper_quantile(m: GridMeasure, s) -> np.ndarray:
    """x with upper tail mass s, computed from the right end for accuracy at small s."""
    return -apply_affine(m, -1.0).quantile(s)


def isoperimetric_profile(m: GridMeasure, n_points: int = 256, u: np.ndarray | None = None) -> ProfileTable:
    """Is(u) = min(density at the u-quantile, density at the (1-u)-quantile)."""
    _require_lc(m)
    refl = apply_affine(m, -1.0)

    def ev(uu):
        uu = np.asarray(uu, float)
        return np.minimum(m.pdf(m.quantile(uu)), refl.pdf(refl.quantile(uu)))

    grid = 0.5 * np.arange(1, n_points + 1) / n_points if u is None else np.asarray(u, float)
    if np.any(grid <= 0) or np.any(grid > 0.5):
        raise InvalidParameter("isoperimetric abscissae must lie in (0, 1/2]")
    return ProfileTable(grid, ev(grid), "isoperimetric", evaluator=ev)


def profile_concavity_defect(p: ProfileTable) -> float:
    """Largest positive second difference (divided-difference form) of a sampled profile."""
    a, v = p.abscissae, p.values
    slopes = np.diff(v) / np.diff(a)
    jumps = np.diff(slopes) * 0.5 * (a[2:] - a[:-2])
    return float(max(np.max(jumps, initial=0.0), 0.0))


def cheeger_constant(m: GridMeasure) -> float:
    """C'_C = sup over u in (0, 1/2] of u / Is(u)."""
    _require_lc(m)
    prof = isoperimetric_profile(m)
    cand = m.cdf_cache[(m.cdf_cache > 0) & (m.cdf_cache <= 0.5)]
    cand = np.unique(np.concatenate([cand, prof.abscissae]))
    with np.errstate(divide="ignore"):
        ratio = cand / prof(cand)
    k = int(np.nanargmax(ratio))
    best = float(ratio[k])
    lo = cand[max(k - 1, 0)]
    hi = cand[min(k + 1, cand.size - 1)]
    if hi > lo:
        res = minimize_scalar(lambda t: -t / float(prof(np.array([t]))[0]),
                              bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
        if np.isfinite(res.fun):
            best = max(best, -float(res.fun))
    return best


def concentration_profile(m: GridMeasure, radii: Sequence[float] | None = None) -> ProfileTable:
    """alpha(r) from half-lines: max(upper tail beyond med+r, lower tail below med-r)."""
    med = m.median()
    lo, hi = m.domain

    def ev(r):
        r = np.maximum(np.asarray(r, float), 0.0)
        return np.maximum(m.sf(med + r), m.cdf(med - r))

    refl = apply_affine(m, -1.0)

    def inv(s):
        s = np.asarray(s, float)
        out = np.zeros(s.shape)
        small = s < 0.5
        if np.any(small):
            ss = np.clip(s[small], 0.0, 0.5)
            up = -refl.quantile(ss) - med
            down = med - m.quantile(ss)
            out[small] = np.maximum(np.maximum(up, down), 0.0)
        return out

    if radii is None:
        radii = np.linspace(0.0, max(hi - med, med - lo), 513)
    radii = np.asarray(radii, float)
    if np.any(np.diff(radii) <= 0):
        raise InvalidParameter("radii must be increasing")
    return ProfileTable(radii, ev(radii), "concentration", evaluator=ev, inverse_fn=inv)


def weak_beta_from_profile(p: ProfileTable, centering: str = "median",
                           s_grid: np.ndarray | None = None) -> ProfileTable:
    """Weak (1,inf) Poincare rate from a concentration profile.

    median: beta(s) = alpha^-1(s/2); mean: beta(s) = 2 alpha^-1(s/4)."""
    if p.kind != "concentration":
        raise InvalidParameter("weak_beta_from_profile needs a concentration profile")
    if centering == "median":
        f = lambda s: p.inverse(np.asarray(s, float) / 2.0)  # noqa: E731
    elif centering == "mean":
        f = lambda s: 2.0 * p.inverse(np.asarray(s, float) / 4.0)  # noqa: E731
    else:
        raise InvalidParameter("centering must be 'median' or 'mean'")
    s = np.logspace(-8, math.log10(0.5), 200) if s_grid is None else np.asarray(s_grid, float)
    return ProfileTable(s, f(s), "weak_beta", evaluator=f)


# brute-force checks on coarse grids -----------------------------------------

def _augmented_points(m: GridMeasure, cuts: np.ndarray, levels: np.ndarray):
    """Grid nodes plus extra candidate endpoints with their exact CDF levels."""
    x = np.concatenate([m.nodes, cuts])
    F = np.concatenate([m.cdf_cache, levels])
    order = np.argsort(x, kind="stable")
    x, F = x[order], F[order]
    keep = np.concatenate([[True], np.diff(x) > 0])
    x, F = x[keep], np.maximum.accumulate(F[keep])
    F[0], F[-1] = 0.0, 1.0
    return x, F


def brute_force_isoperimetric(m: GridMeasure, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(exhaustive <=2-interval profile, half-line profile) over a finite endpoint set.

    Endpoints are the grid nodes plus the u- and (1-u)-quantiles, so half-lines of
    mass exactly u are candidates; grid ends carry no boundary."""
    if m.n > 256:
        raise InvalidParameter("brute force is limited to N <= 256")
    u = np.sort(np.asarray(u, float))
    refl = apply_affine(m, -1.0)
    cuts = np.concatenate([m.quantile(u), -refl.quantile(u)])
    x, F = _augmented_points(m, cuts, np.concatenate([u, 1.0 - u]))
    q = m.pdf(x)
    q[0] = q[-1] = 0.0
    bf = np.asarray(kernels.bf_isoperimetric(F, q, u))
    bal = np.minimum(F, 1.0 - F)
    hl = np.array([np.min(q[bal >= t], initial=np.inf) for t in u])
    return bf, hl


def brute_force_concentration(m: GridMeasure, radii: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(exhaustive <=2-interval alpha, half-line alpha) with endpoints on the nodes plus the median.

    Adding the median as a candidate endpoint lets half-lines carry mass exactly 1/2,
    so the half-line column coincides with the continuous profile."""
    if m.n > 256:
        raise InvalidParameter("brute force is limited to N <= 256")
    x, F = _augmented_points(m, np.array([m.median()]), np.array([0.5]))
    bf, hl = [], []
    for r in np.asarray(radii, float):
        Fm = m.cdf(x - r)
        Fp = m.cdf(x + r)
        bf.append(kernels.bf_concentration(x, F, Fm, Fp, float(r)))
        left = np.max(1.0 - Fp[F >= 0.5], initial=0.0)      # A = (-inf, x_b]
        right = np.max(Fm[1.0 - F >= 0.5], initial=0.0)     # A = [x_a, inf)
        hl.append(max(left, right))
    return np.array(bf), np.array(hl)


# ---------------------------------------------------------------------------
# moments and tails
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MomentReport:
    mean: float
    variance: float
    first_abs_moment_about_median: float
    median: float
    m_p_ratio: float | None = None
    relative_entropy: float | None = None
    p: float | None = None


_LOG_FLOOR = math.log(1e-300)


def _ratio_integral(nu: GridMeasure, mu: GridMeasure, fn: Callable[[np.ndarray], np.ndarray]) -> float:
    """Integral over nu of fn(log(dnu/dmu)); mu's open tails are continued log-linearly."""
    def g(x):
        lnu = nu.log_pdf(x)
        lmu = mu.log_pdf(x, extrapolate=True)
        tiny = (lnu < _LOG_FLOOR) & (lmu < _LOG_FLOOR)
        bad = np.isneginf(lmu) & ~tiny
        diff = np.where(bad | tiny, 0.0, lnu - np.where(np.isfinite(lmu), lmu, 0.0))
        return np.where(tiny | bad, 0.0, fn(diff))

    def lost(x):
        lnu = nu.log_pdf(x)
        lmu = mu.log_pdf(x, extrapolate=True)
        return (np.isneginf(lmu) & (lnu >= _LOG_FLOOR)).astype(float)

    miss = nu.integrate(lost)
    if miss > 1e-12:
        raise NotAbsolutelyContinuous(f"nu puts mass {miss:.3g} where the reference vanishes")
    return nu.integrate(g)


def moments(m: GridMeasure, reference: GridMeasure | None = None, p: float | None = None) -> MomentReport:
    mean = m.mean()
    var = m.integrate(lambda t: (t - mean) ** 2)
    med = m.median()
    fam = m.integrate(lambda t: np.abs(t - med), breaks=[med])
    mp = ent = None
    if reference is not None:
        ent = max(_ratio_integral(m, reference, lambda d: d), 0.0)
        if p is not None:
            if not p > 1:
                raise InvalidParameter("p must exceed 1")
            with np.errstate(over="ignore"):
                val = _ratio_integral(m, reference, lambda d: np.exp((p - 1.0) * d))
            mp = val ** (1.0 / p)
    return MomentReport(mean, max(var, 0.0), fam, med, mp, ent, p)


def density_ratio_sup(nu: GridMeasure, mu: GridMeasure) -> tuple[float, float]:
    """(sup dnu/dmu, sup dmu/dnu) over the union of the two grids (inf if unbounded).

    Two far points are added so that open tails with different extrapolated
    slopes show up as an unbounded ratio."""
    lo = min(nu.domain[0], mu.domain[0])
    hi = max(nu.domain[1], mu.domain[1])
    far = 1e3 * (hi - lo)
    x = np.union1d(np.union1d(nu.nodes, mu.nodes), [lo - far, hi + far])
    a = nu.log_pdf(x, extrapolate=True)
    b = mu.log_pdf(x, extrapolate=True)
    both_zero = np.isneginf(a) & np.isneginf(b)
    a, b = a[~both_zero], b[~both_zero]
    with np.errstate(invalid="ignore"):
        r1 = np.where(np.isneginf(a), -np.inf, np.where(np.isneginf(b), np.inf, a - b))
        r2 = np.where(np.isneginf(b), -np.inf, np.where(np.isneginf(a), np.inf, b - a))
    with np.errstate(over="ignore"):
        return float(np.exp(np.max(r1))), float(np.exp(np.max(r2)))


def bobkov_ledoux_tail(c_p: float, a: float, epsilon: float) -> float:
    """Upper bound ((4-eps)/eps) exp(-(2-eps) a / sqrt(c_p)) on the tail beyond a."""
    if not (0.0 < epsilon <= 1.0):
        raise InvalidParameter("epsilon must lie in (0, 1]")
    if not c_p > 0 or a < 0:
        raise InvalidParameter("need c_p > 0 and a >= 0")
    return (4.0 - epsilon) / epsilon * math.exp(-(2.0 - epsilon) * a / math.sqrt(c_p))


def abs_deviation_tail(m: GridMeasure, c) -> np.ndarray:
    """Mass of {|x - median| > c}."""
    med = m.median()
    c = np.asarray(c, float)
    return m.cdf(med - c) + m.sf(med + c)


def fradelizi_rows(m: GridMeasure, cs: Sequence[float], ts: Sequence[float]):
    """Rows (c, t, lhs, rhs) for eta(|P| > c t) <= eta(|P| > c)^((1+t)/2), P = x - median."""
    rows = []
    for c in cs:
        base = float(abs_deviation_tail(m, c))
        for t in ts:
            lhs = float(abs_deviation_tail(m, c * t))
            rows.append((float(c), float(t), lhs, base ** ((1.0 + t) / 2.0)))
    return rows


def holley_stroock_beta(m: GridMeasure, R: float, center: float | None = None):
    """(beta, s): weak rate (4R^2/pi^2) e^{Osc_R V} at s = 2 nu(|x - c| > R)."""
    c = m.median() if center is None else center
    lo, hi = c - R, c + R
    xs = np.linspace(max(lo, m.domain[0]), min(hi, m.domain[1]), 2049)
    ld = m.log_pdf(xs)
    if np.any(~np.isfinite(ld)):
        fin = ld[np.isfinite(ld)]
        if fin.size == 0:
            return math.inf, 1.0
    else:
        fin = ld
    osc = float(fin.max() - fin.min())
    s = 2.0 * float(m.cdf(lo) + m.sf(hi))
    return 4.0 * R * R / math.pi ** 2 * math.exp(osc), s
