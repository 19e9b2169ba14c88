"""One-dimensional grid measures: construction, normalization and transforms.

A :class:`GridMeasure` stores the log-density at the nodes of a uniform grid.
Between two nodes the density is taken to be log-linear (an exponential
spline); a cell with one zero end is linear in the density instead.  Every
quadrature, CDF and quantile in the package integrates that model exactly,
which keeps exponential-type families (including the kink of ``e^{-|x|}``)
exact and keeps log-concavity of the interpolant automatic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import logsumexp
from scipy.stats import norm

from . import kernels
from .errors import EmptyRestriction, InvalidParameter, NonNormalizable

DEFAULT_N = 4096
DEFAULT_TAIL = 1e-10
_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)
_GL_X = 0.5 * (_GL_X + 1.0)  # nodes on [0, 1]
_GL_W = 0.5 * _GL_W


# ---------------------------------------------------------------------------
# cell-level helpers for the exponential-spline model
# ---------------------------------------------------------------------------

def _cell_masses(ld: np.ndarray, h: float) -> np.ndarray:
    l0, l1 = ld[:-1], ld[1:]
    f0, f1 = np.isfinite(l0), np.isfinite(l1)
    out = np.zeros(l0.shape)
    both = f0 & f1
    if np.any(both):
        a, b = l0[both], l1[both]
        top = np.maximum(a, b)
        gap = np.abs(b - a)
        with np.errstate(invalid="ignore", divide="ignore"):
            fac = np.where(gap > 1e-12, -np.expm1(-gap) / np.where(gap > 0, gap, 1.0), 1.0 - 0.5 * gap)
        out[both] = h * np.exp(top) * fac
    one = f0 ^ f1
    if np.any(one):
        out[one] = 0.5 * h * np.exp(np.where(f0[one], l0[one], l1[one]))
    return out


def _partial_mass(l0, l1, h, theta):
    """Mass of [x_i, x_i + theta*h] inside cells with end log-densities l0, l1."""
    l0 = np.asarray(l0, float)
    l1 = np.asarray(l1, float)
    theta = np.asarray(theta, float)
    out = np.zeros(np.broadcast(l0, l1, theta).shape)
    l0, l1, theta = np.broadcast_arrays(l0, l1, theta)
    f0, f1 = np.isfinite(l0), np.isfinite(l1)
    both = f0 & f1
    with np.errstate(over="ignore", invalid="ignore", divide="ignore", under="ignore"):
        if np.any(both):
            a, b, t = l0[both], l1[both], theta[both]
            d = b - a
            s = d * t
            small = np.abs(d) < 1e-12
            pos = d > 0
            safe_d = np.where(small, 1.0, d)
            v = np.where(
                pos,
                np.exp(a + s) * (-np.expm1(-s)) / safe_d,
                np.exp(a) * (-np.expm1(s)) / np.where(pos, 1.0, -safe_d),
            )
            v = np.where(small, np.exp(a) * t * (1.0 + 0.5 * s), v)
            out[both] = h * v
        one = f0 ^ f1
        if np.any(one):
            p0 = np.where(f0[one], np.exp(l0[one]), 0.0)
            p1 = np.where(f1[one], np.exp(l1[one]), 0.0)
            t = theta[one]
            out[one] = h * (p0 * t + 0.5 * (p1 - p0) * t * t)
    return out


def _invert_partial(l0, l1, h, target):
    """Fraction theta in [0,1] of a cell holding ``target`` mass from its left end."""
    l0 = np.asarray(l0, float)
    l1 = np.asarray(l1, float)
    target = np.maximum(np.asarray(target, float), 0.0)
    theta = np.zeros(target.shape)
    f0, f1 = np.isfinite(l0), np.isfinite(l1)
    both = f0 & f1
    with np.errstate(over="ignore", invalid="ignore", divide="ignore", under="ignore"):
        if np.any(both):
            a, b, t = l0[both], l1[both], target[both]
            d = b - a
            small = np.abs(d) < 1e-12
            safe_d = np.where(small, 1.0, d)
            arg = t * safe_d * np.exp(-a) / h
            th = np.log1p(np.maximum(arg, -1.0 + 1e-300)) / safe_d
            th = np.where(small, t * np.exp(-a) / h, th)
            theta[both] = th
        one = f0 ^ f1
        if np.any(one):
            t = target[one] / h
            zl = ~f0[one]
            p1 = np.exp(np.where(zl, l1[one], -np.inf))
            p0 = np.exp(np.where(zl, -np.inf, l0[one]))
            th = np.where(
                zl,
                np.sqrt(2.0 * t / np.where(zl, p1, 1.0)),
                1.0 - np.sqrt(np.maximum(1.0 - 2.0 * t / np.where(zl, 1.0, p0), 0.0)),
            )
            theta[one] = th
    return np.clip(np.nan_to_num(theta, nan=1.0), 0.0, 1.0)


def second_difference_ok(ld: np.ndarray, h: float, rtol: float = 1e-8) -> bool:
    """Concavity test: contiguous finite support and second differences <= rtol*(max|ld|+1)."""
    fin = np.isfinite(ld)
    if not np.any(fin):
        return False
    idx = np.nonzero(fin)[0]
    if idx[-1] - idx[0] + 1 != idx.size:
        return False
    v = ld[idx[0]:idx[-1] + 1]
    if v.size < 3:
        return True
    dd = v[2:] - 2.0 * v[1:-1] + v[:-2]
    tol = rtol * (np.max(np.abs(v)) + 1.0)
    return bool(np.all(dd <= tol))


# ---------------------------------------------------------------------------
# GridMeasure
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GridMeasure:
    """Probability measure on a uniform grid with an exponential-spline density.

    ``open_left``/``open_right`` record whether a grid end is a clipped tail
    (the true support continues) or a genuine support boundary.
    """

    nodes: np.ndarray
    log_density: np.ndarray
    is_log_concave: bool
    open_left: bool = True
    open_right: bool = True
    label: str = ""
    cdf_cache: np.ndarray = field(init=False, repr=False)
    _cells: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        x = np.array(self.nodes, dtype=float)
        ld = np.array(self.log_density, dtype=float)
        if x.ndim != 1 or x.shape != ld.shape or x.size < 3:
            raise InvalidParameter("nodes and log_density must be 1D arrays of equal length >= 3")
        h = (x[-1] - x[0]) / (x.size - 1)
        if not (h > 0) or not np.allclose(np.diff(x), h, rtol=1e-7, atol=0.0):
            raise InvalidParameter("nodes must form a strictly increasing uniform grid")
        if np.any(np.isnan(ld)) or np.any(ld == np.inf):
            raise InvalidParameter("log_density must be finite or -inf")
        cells = _cell_masses(ld, h)
        cdf = np.concatenate([[0.0], np.cumsum(cells)])
        x.setflags(write=False)
        ld.setflags(write=False)
        cdf.setflags(write=False)
        cells.setflags(write=False)
        object.__setattr__(self, "nodes", x)
        object.__setattr__(self, "log_density", ld)
        object.__setattr__(self, "cdf_cache", cdf)
        object.__setattr__(self, "_cells", cells)

    # basic geometry -------------------------------------------------------
    @property
    def step(self) -> float:
        return float((self.nodes[-1] - self.nodes[0]) / (self.nodes.size - 1))

    @property
    def n(self) -> int:
        return int(self.nodes.size)

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.nodes[0]), float(self.nodes[-1])

    @property
    def mass(self) -> float:
        return float(self.cdf_cache[-1])

    @property
    def density_values(self) -> np.ndarray:
        with np.errstate(under="ignore"):
            return np.exp(self.log_density)

    @property
    def cell_masses(self) -> np.ndarray:
        return self._cells

    def with_label(self, label: str) -> "GridMeasure":
        return GridMeasure(self.nodes, self.log_density, self.is_log_concave,
                           self.open_left, self.open_right, label)

    # pointwise evaluation --------------------------------------------------
    def _locate(self, x: np.ndarray):
        h = self.step
        pos = (x - self.nodes[0]) / h
        k = np.clip(np.floor(pos).astype(np.int64), 0, self.n - 2)
        theta = np.clip(pos - k, 0.0, 1.0)
        return k, theta

    def log_pdf(self, x, extrapolate: bool = False) -> np.ndarray:
        """Log-density of the model at ``x``; outside the grid it is -inf unless
        ``extrapolate`` continues an open tail log-linearly."""
        x = np.asarray(x, dtype=float)
        out = np.full(x.shape, -np.inf)
        lo, hi = self.domain
        inside = (x >= lo) & (x <= hi)
        if np.any(inside):
            xi = x[inside]
            k, th = self._locate(xi)
            l0 = self.log_density[k]
            l1 = self.log_density[k + 1]
            f0, f1 = np.isfinite(l0), np.isfinite(l1)
            val = np.full(xi.shape, -np.inf)
            both = f0 & f1
            val[both] = l0[both] + (l1[both] - l0[both]) * th[both]
            one = f0 ^ f1
            if np.any(one):
                p = np.where(f0[one], np.exp(np.where(f0[one], l0[one], 0.0)) * (1 - th[one]),
                             np.exp(np.where(f1[one], l1[one], 0.0)) * th[one])
                with np.errstate(divide="ignore"):
                    val[one] = np.log(p)
            out[inside] = val
        if extrapolate:
            h = self.step
            ld = self.log_density
            if self.open_left and np.isfinite(ld[0]) and np.isfinite(ld[1]):
                slope = (ld[1] - ld[0]) / h
                left = x < lo
                if slope > 0 and np.any(left):
                    out[left] = ld[0] - slope * (lo - x[left])
            if self.open_right and np.isfinite(ld[-1]) and np.isfinite(ld[-2]):
                slope = (ld[-2] - ld[-1]) / h
                right = x > hi
                if slope > 0 and np.any(right):
                    out[right] = ld[-1] - slope * (x[right] - hi)
        return out

    def pdf(self, x, extrapolate: bool = False) -> np.ndarray:
        with np.errstate(under="ignore"):
            return np.exp(self.log_pdf(x, extrapolate))

    def cdf(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        lo, hi = self.domain
        k, th = self._locate(np.clip(x, lo, hi))
        part = _partial_mass(self.log_density[k], self.log_density[k + 1], self.step, th)
        out = np.minimum(self.cdf_cache[k] + part, self.cdf_cache[k + 1])
        out = np.where(x <= lo, 0.0, np.where(x >= hi, 1.0, out))
        return out

    def sf(self, x) -> np.ndarray:
        """Upper tail mass, computed from the right to keep small tails accurate."""
        x = np.asarray(x, dtype=float)
        lo, hi = self.domain
        k, th = self._locate(np.clip(x, lo, hi))
        part = _partial_mass(self.log_density[k], self.log_density[k + 1], self.step, th)
        right_of_cell = self.cdf_cache[-1] - self.cdf_cache[k + 1]
        out = np.maximum(right_of_cell + (self._cells[k] - part), 0.0)
        out = np.where(x <= lo, 1.0, np.where(x >= hi, 0.0, out))
        return out

    def quantile(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        cdf = self.cdf_cache
        k = np.clip(np.searchsorted(cdf, u, side="right") - 1, 0, self.n - 2)
        # skip empty cells so the quantile lands inside the support
        th = _invert_partial(self.log_density[k], self.log_density[k + 1], self.step, u - cdf[k])
        out = self.nodes[k] + th * self.step
        lo_sup, hi_sup = self.support
        out = np.where(u <= 0.0, lo_sup, np.where(u >= 1.0, hi_sup, out))
        return np.clip(out, lo_sup, hi_sup)

    @property
    def support(self) -> tuple[float, float]:
        fin = np.nonzero(np.isfinite(self.log_density))[0]
        lo = self.nodes[max(fin[0] - 1, 0)] if fin[0] > 0 else self.nodes[0]
        hi = self.nodes[min(fin[-1] + 1, self.n - 1)] if fin[-1] < self.n - 1 else self.nodes[-1]
        return float(lo), float(hi)

    # integrals --------------------------------------------------------------
    def integrate(self, g: Callable[[np.ndarray], np.ndarray], breaks: Sequence[float] = ()) -> float:
        """Exact-model integral of g against the measure (8-point Gauss per cell).

        Cells containing a point of ``breaks`` are split there, so kinks of g
        (e.g. |x - m|) do not spoil the rule."""
        h = self.step
        x0 = self.nodes[:-1]
        l0 = self.log_density[:-1]
        l1 = self.log_density[1:]
        live = np.isfinite(l0) | np.isfinite(l1)
        starts = [x0[live]]
        lens = [np.full(int(live.sum()), h)]
        a0 = [l0[live]]
        a1 = [l1[live]]
        frac0 = [np.zeros(int(live.sum()))]
        if len(breaks):
            bk = np.asarray(breaks, float)
            lo, hi = self.domain
            bk = bk[(bk > lo) & (bk < hi)]
            if bk.size:
                kk, th = self._locate(bk)
                keep = np.ones(x0.shape, bool)
                keep[kk] = False
                sel = live & keep
                starts = [x0[sel]]
                lens = [np.full(int(sel.sum()), h)]
                a0 = [l0[sel]]
                a1 = [l1[sel]]
                frac0 = [np.zeros(int(sel.sum()))]
                for k in np.unique(kk):
                    cuts = np.unique(np.concatenate([[0.0], th[kk == k], [1.0]]))
                    for c0, c1 in zip(cuts[:-1], cuts[1:]):
                        if c1 <= c0:
                            continue
                        starts.append(np.array([x0[k] + c0 * h]))
                        lens.append(np.array([(c1 - c0) * h]))
                        a0.append(np.array([l0[k]]))
                        a1.append(np.array([l1[k]]))
                        frac0.append(np.array([c0]))
        s = np.concatenate(starts)
        ln = np.concatenate(lens)
        b0 = np.concatenate(a0)
        b1 = np.concatenate(a1)
        f0 = np.concatenate(frac0)
        pts = s[:, None] + ln[:, None] * _GL_X[None, :]
        theta = f0[:, None] + (ln[:, None] / h) * _GL_X[None, :]
        fin0 = np.isfinite(b0)[:, None]
        fin1 = np.isfinite(b1)[:, None]
        c0 = np.where(fin0, b0[:, None], 0.0)
        c1 = np.where(fin1, b1[:, None], 0.0)
        with np.errstate(invalid="ignore", over="ignore", under="ignore"):
            dens = np.where(
                fin0 & fin1,
                np.exp(c0 + (c1 - c0) * theta),
                np.where(fin0, np.exp(c0) * (1 - theta), np.exp(c1) * theta),
            )
        vals = np.asarray(g(pts), dtype=float)
        return float(np.sum(vals * dens * ln[:, None] * _GL_W[None, :]))

    def mean(self) -> float:
        return self.integrate(lambda t: t)

    def variance(self) -> float:
        mu = self.mean()
        return self.integrate(lambda t: (t - mu) ** 2)

    def median(self) -> float:
        return float(self.quantile(0.5))

    def node_masses(self, grid: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Atomize: mass of the half-cell neighbourhood of each node of ``grid``."""
        g = self.nodes if grid is None else np.asarray(grid, float)
        mids = 0.5 * (g[1:] + g[:-1])
        edges = self.cdf(mids)
        w = np.diff(np.concatenate([[0.0], edges, [1.0]]))
        return g, np.maximum(w, 0.0)


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------

def from_log_density(nodes, ld, *, open_left=True, open_right=True, label="",
                     expected_mass: float | None = None, drift_tol: float = 1e-6,
                     log_concave: bool | None = None) -> GridMeasure:
    """Normalize a log-density on a uniform grid into a GridMeasure.

    If ``expected_mass`` is given, the raw mass must match it within
    ``drift_tol`` (relative) before renormalization, else NonNormalizable."""
    x = np.asarray(nodes, float)
    v = np.array(ld, dtype=float)
    fin = np.isfinite(v)
    if not np.any(fin):
        raise NonNormalizable("density vanishes on the whole grid")
    top = np.max(v[fin])
    v = v - top
    h = (x[-1] - x[0]) / (x.size - 1)
    raw = float(np.sum(_cell_masses(v, h)))
    if not np.isfinite(raw) or raw <= 0:
        raise NonNormalizable(f"non-finite or zero mass ({raw})")
    if expected_mass is not None:
        scaled = raw * math.exp(top)
        if abs(scaled / expected_mass - 1.0) > drift_tol:
            raise NonNormalizable(
                f"mass drift {scaled / expected_mass - 1.0:.3g} exceeds {drift_tol:g}")
    v = v - math.log(raw)
    check = float(np.sum(_cell_masses(v, h)))
    if abs(check - 1.0) > 1e-6:
        raise NonNormalizable(f"renormalized mass {check!r} deviates from 1")
    if abs(check - 1.0) > 1e-13:
        v = v - math.log(check)
    lc = second_difference_ok(v, h) if log_concave is None else log_concave
    return GridMeasure(x, v, lc, open_left, open_right, label)


def _uniform_nodes(lo: float, hi: float, n: int, anchor: float | None = None) -> np.ndarray:
    if anchor is None or not (lo < anchor < hi):
        h = (hi - lo) / (n - 1)
        return lo + h * np.arange(n)
    h = (hi - lo) / (n - 2)
    k = math.ceil((anchor - lo) / h - 1e-9)
    start = anchor - k * h
    return start + h * np.arange(n)


_SAFE_FUNCS = {
    "abs": np.abs, "exp": np.exp, "log": np.log, "sqrt": np.sqrt, "cosh": np.cosh,
    "sinh": np.sinh, "tanh": np.tanh, "log1p": np.log1p, "expm1": np.expm1,
    "maximum": np.maximum, "minimum": np.minimum, "where": np.where, "pi": np.pi, "e": np.e,
}


def compile_expression(expr, var: str) -> Callable[[np.ndarray], np.ndarray]:
    """Turn a string like ``"x**4/4"`` into a vectorized function of ``var``."""
    if callable(expr):
        return expr
    code = compile(str(expr), f"<{var}-expression>", "eval")
    for name in code.co_names:
        if name != var and name not in _SAFE_FUNCS:
            raise InvalidParameter(f"unknown name {name!r} in expression {expr!r}")

    def fn(t):
        t = np.asarray(t, float)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            val = eval(code, {"__builtins__": {}}, {**_SAFE_FUNCS, var: t})  # noqa: S307
        return np.broadcast_to(np.asarray(val, float), t.shape).copy()

    return fn


@dataclass(frozen=True)
class MeasureSpec:
    """Symbolic family description; ``realize`` turns it into a GridMeasure."""

    family: str
    params: tuple = ()
    n: int = DEFAULT_N
    tail_mass: float = DEFAULT_TAIL
    label: str = ""

    def with_grid(self, n: int | None = None, tail_mass: float | None = None) -> "MeasureSpec":
        return MeasureSpec(self.family, self.params, n or self.n,
                           tail_mass if tail_mass is not None else self.tail_mass, self.label)

    def describe(self) -> str:
        if self.label:
            return self.label
        args = ",".join(_fmt_param(p) for p in self.params)
        return f"{self.family}({args})"


def _fmt_param(p) -> str:
    if isinstance(p, str):
        return repr(p)
    if isinstance(p, (list, tuple)):
        return "[" + ",".join(_fmt_param(q) for q in p) + "]"
    if p is None:
        return "None"
    return f"{p:g}" if isinstance(p, float) else str(p)


def gaussian(mean: float = 0.0, sd: float = 1.0, n: int = DEFAULT_N) -> MeasureSpec:
    return MeasureSpec("gaussian", (float(mean), float(sd)), n)


def exponential_symmetric(scale: float = 1.0, n: int = DEFAULT_N) -> MeasureSpec:
    return MeasureSpec("exponential_symmetric", (float(scale),), n)


def uniform(a: float = -1.0, b: float = 1.0, n: int = DEFAULT_N) -> MeasureSpec:
    return MeasureSpec("uniform", (float(a), float(b)), n)


def potential(expr: str, lo: float | None = None, hi: float | None = None,
              anchor: float | None = None, n: int = DEFAULT_N) -> MeasureSpec:
    return MeasureSpec("potential", (expr, lo, hi, anchor), n)


def gaussian_mixture(weights, means, sds, n: int = DEFAULT_N) -> MeasureSpec:
    return MeasureSpec("gaussian_mixture",
                       (tuple(map(float, weights)), tuple(map(float, means)), tuple(map(float, sds))), n)


def radial(dim: int, v: str = "r**2/2", n: int = DEFAULT_N) -> MeasureSpec:
    return MeasureSpec("radial", (int(dim), v), n)


def _finite(*vals):
    for v in vals:
        if v is not None and not np.isfinite(v):
            raise InvalidParameter(f"family parameter {v!r} is not finite")


def _auto_extent(logf: Callable, center: float, side: int, drop: float = 60.0,
                 limit: float = 1e6) -> float:
    """Distance from ``center`` at which logf falls ``drop`` below its running max."""
    L = 1.0
    while L < limit:
        t = center + side * np.linspace(0.0, L, 2049)
        v = logf(t)
        top = np.max(v[np.isfinite(v)]) if np.any(np.isfinite(v)) else -np.inf
        if np.isfinite(v[-1]) and v[-1] < top - drop and np.all(np.diff(v[-64:]) * 1 <= 0):
            return L
        if not np.isfinite(v[-1]) and np.isfinite(top):
            return L
        L *= 2.0
    raise NonNormalizable("potential does not confine mass within |x| < 1e6")


def _clip_by_quantiles(logf: Callable, lo: float, hi: float, n: int, tail: float,
                       clip_left: bool, clip_right: bool, anchor=None) -> np.ndarray:
    pre_n = max(4 * n, 20001)
    pre = from_log_density(np.linspace(lo, hi, pre_n), logf(np.linspace(lo, hi, pre_n)),
                           log_concave=False)
    qlo = float(pre.quantile(tail)) if clip_left else lo
    qhi = float(pre.quantile(1.0 - tail)) if clip_right else hi
    # step outward by one preliminary cell so the clipped mass stays <= tail
    qlo = max(lo, qlo - pre.step) if clip_left else lo
    qhi = min(hi, qhi + pre.step) if clip_right else hi
    return _uniform_nodes(qlo, qhi, n, anchor)


def realize(spec: MeasureSpec) -> GridMeasure:
    """Build the normalized grid measure of a family description."""
    n = int(spec.n)
    if n < 64:
        raise InvalidParameter("grid size N must be >= 64")
    tail = float(spec.tail_mass)
    fam = spec.family
    p = spec.params
    label = spec.describe()
    if fam == "gaussian":
        mean, sd = p
        _finite(mean, sd)
        if sd <= 0:
            raise InvalidParameter("gaussian sd must be positive")
        q = float(norm.isf(tail))
        x = _uniform_nodes(mean - q * sd, mean + q * sd, n, anchor=mean)
        ld = -0.5 * ((x - mean) / sd) ** 2
        m = from_log_density(x, ld, label=label)
    elif fam == "exponential_symmetric":
        (scale,) = p
        _finite(scale)
        if scale <= 0:
            raise InvalidParameter("exponential scale must be positive")
        R = scale * math.log(1.0 / (2.0 * tail))
        x = _uniform_nodes(-R, R, n, anchor=0.0)
        m = from_log_density(x, -np.abs(x) / scale, label=label)
    elif fam == "uniform":
        a, b = p
        _finite(a, b)
        if not b > a:
            raise InvalidParameter("uniform requires a < b")
        x = np.linspace(a, b, n)
        m = from_log_density(x, np.zeros(n), open_left=False, open_right=False, label=label)
    elif fam == "potential":
        expr, lo, hi, anchor = (list(p) + [None] * 4)[:4]
        V = compile_expression(expr, "x")
        logf = lambda t: -V(t)  # noqa: E731
        _finite(lo, hi, anchor)
        if lo is not None and hi is not None:
            if not hi > lo:
                raise InvalidParameter("potential domain requires lo < hi")
            x = _uniform_nodes(lo, hi, n, anchor)
            m = from_log_density(x, logf(x), open_left=False, open_right=False, label=label)
        else:
            c = 0.0 if anchor is None else anchor
            left = c - _auto_extent(logf, c, -1) if lo is None else lo
            right = c + _auto_extent(logf, c, +1) if hi is None else hi
            x = _clip_by_quantiles(logf, left, right, n, tail, lo is None, hi is None, anchor)
            m = from_log_density(x, logf(x), open_left=lo is None, open_right=hi is None, label=label)
    elif fam == "gaussian_mixture":
        w, mu, sd = (np.asarray(v, float) for v in p)
        _finite(*w, *mu, *sd)
        if not (w.shape == mu.shape == sd.shape) or w.size == 0:
            raise InvalidParameter("mixture weights, means and sds must have equal length")
        if np.any(sd <= 0) or np.any(w < 0) or w.sum() <= 0:
            raise InvalidParameter("mixture needs positive sds and nonnegative weights")
        w = w / w.sum()
        q = float(norm.isf(tail))
        x = _uniform_nodes(float(np.min(mu - q * sd)), float(np.max(mu + q * sd)), n)
        with np.errstate(divide="ignore"):
            ld = logsumexp(np.log(w)[:, None] + norm.logpdf(x[None, :], mu[:, None], sd[:, None]), axis=0)
        m = from_log_density(x, ld, label=label)
    elif fam == "radial":
        dim, v = p
        if int(dim) < 1:
            raise InvalidParameter("radial dimension must be >= 1")
        vf = compile_expression(v, "r")

        def logf(t):
            t = np.asarray(t, float)
            with np.errstate(divide="ignore", invalid="ignore"):
                out = (dim - 1) * np.log(np.where(t > 0, t, 1.0)) - vf(t)
            if dim > 1:
                out = np.where(t > 0, out, -np.inf)
            return np.where(t >= 0, out, -np.inf)

        right = _auto_extent(logf, 0.0, +1)
        x = _clip_by_quantiles(logf, 0.0, right, n, tail, False, True)
        m = from_log_density(x, logf(x), open_left=False, open_right=True, label=label)
    else:
        raise InvalidParameter(f"unknown family {fam!r}")
    return m


# ---------------------------------------------------------------------------
# transforms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AffineMap1D:
    scale: float
    shift: float = 0.0

    def __post_init__(self):
        if self.scale == 0 or not np.isfinite(self.scale) or not np.isfinite(self.shift):
            raise InvalidParameter("affine map needs a finite nonzero scale and finite shift")


def apply_affine(m: GridMeasure, t: AffineMap1D | float, shift: float = 0.0) -> GridMeasure:
    """Law of scale*X + shift."""
    if not isinstance(t, AffineMap1D):
        t = AffineMap1D(float(t), float(shift))
    lam, c = t.scale, t.shift
    if lam == 1.0 and c == 0.0:
        return m
    h = m.step * abs(lam)
    if lam > 0:
        start = lam * m.nodes[0] + c
        ld = m.log_density - math.log(lam)
        ol, orr = m.open_left, m.open_right
    else:
        start = lam * m.nodes[-1] + c
        ld = m.log_density[::-1] - math.log(-lam)
        ol, orr = m.open_right, m.open_left
    x = start + h * np.arange(m.n)
    return GridMeasure(x, ld, second_difference_ok(ld, h), ol, orr, m.label)


def truncate(m: GridMeasure, a: float, b: float, recenter: bool = False) -> GridMeasure:
    """Normalized restriction of m to [a, b] (optionally shifted to mean zero)."""
    if not a < b:
        raise InvalidParameter("truncation needs a < b")
    lo, hi = m.domain
    a2, b2 = max(a, lo), min(b, hi)
    if not a2 < b2:
        raise EmptyRestriction("interval misses the support")
    kept = float(m.cdf(b2) - m.cdf(a2))
    if kept < 1e-12:
        raise EmptyRestriction(f"restricted mass {kept:.3g} < 1e-12")
    if a2 <= lo and b2 >= hi:
        out = m
    else:
        x = np.linspace(a2, b2, m.n)
        ld = m.log_pdf(x)
        out = from_log_density(x, ld, open_left=m.open_left and a2 <= lo,
                               open_right=m.open_right and b2 >= hi, label=m.label,
                               expected_mass=kept, drift_tol=1e-3)
    if recenter:
        out = apply_affine(out, AffineMap1D(1.0, -out.mean()))
    return out


def convolve_gaussian(m: GridMeasure, beta: float) -> GridMeasure:
    """Law of Z + beta*G with G standard gaussian, on a re-sampled grid of the same size."""
    beta = float(beta)
    if not np.isfinite(beta) or beta < 0:
        raise InvalidParameter("beta must be finite and >= 0")
    if beta == 0.0:
        return m
    tail = DEFAULT_TAIL
    q = float(norm.isf(tail))
    lo, hi = m.support
    # kernel cutoff: cells farther than this cannot beat the nearest support cell by e^-60
    fin = m.log_density[np.isfinite(m.log_density)]
    band = min(40.0, math.sqrt(q * q + 2.0 * (float(fin.max() - fin.min()) + 60.0)) + 1.0)
    pre = np.linspace(lo - q * beta, hi + q * beta, min(m.n, 1025))
    ld_pre = kernels.conv_logdensity(m.nodes, m.log_density, pre, beta, band)
    coarse = from_log_density(pre, ld_pre, log_concave=False)
    qlo = max(float(coarse.quantile(tail)) - coarse.step, pre[0])
    qhi = min(float(coarse.quantile(1.0 - tail)) + coarse.step, pre[-1])
    y = np.linspace(qlo, qhi, m.n)
    ld = kernels.conv_logdensity(m.nodes, m.log_density, y, beta, band)
    expected = float(coarse.cdf(qhi) - coarse.cdf(qlo))
    return from_log_density(y, ld, open_left=True, open_right=True, label=m.label,
                            expected_mass=expected, drift_tol=1e-3)


def scale_mix(m: GridMeasure, lam: float) -> GridMeasure:
    """Law of sqrt(lam)*Z + sqrt(1-lam)*G."""
    lam = float(lam)
    if not (0.0 < lam <= 1.0):
        raise InvalidParameter("lambda must lie in (0, 1]")
    if lam == 1.0:
        return m
    return convolve_gaussian(apply_affine(m, AffineMap1D(math.sqrt(lam), 0.0)), math.sqrt(1.0 - lam))


def convolve_uniform(m: GridMeasure, width: float) -> GridMeasure:
    """Law of Z + U with U uniform on [-width/2, width/2]."""
    if not width > 0:
        raise InvalidParameter("width must be positive")
    lo, hi = m.domain
    y = np.linspace(lo - width / 2, hi + width / 2, m.n)
    dens = (m.cdf(y + width / 2) - m.cdf(y - width / 2)) / width
    with np.errstate(divide="ignore"):
        ld = np.log(np.maximum(dens, 0.0))
    return from_log_density(y, ld, open_left=m.open_left, open_right=m.open_right,
                            label=m.label, expected_mass=1.0, drift_tol=1e-3)


def log_concave_family(n: int = DEFAULT_N) -> list[GridMeasure]:
    """Twelve log-concave test measures: gaussians, exponentials, uniforms and
    smoothed or truncated variants."""
    g = realize(gaussian(0.0, 1.0, n=n))
    e = realize(exponential_symmetric(1.0, n=n))
    u = realize(uniform(-1.0, 1.0, n=n))
    out = [
        g,
        realize(gaussian(1.0, 2.0, n=n)),
        realize(gaussian(0.0, 0.5, n=n)),
        e,
        realize(exponential_symmetric(0.5, n=n)),
        u,
        realize(uniform(-0.5, 0.5, n=n)),
        realize(uniform(-2.0, 2.0, n=n)),
        realize(potential("x**4/4", n=n)).with_label("potential(x**4/4)"),
        convolve_gaussian(u, 0.3).with_label("uniform(-1,1)*gaussian(0.3)"),
        truncate(g, -1.0, 2.0).with_label("gaussian(0,1)|[-1,2]"),
        truncate(e, -0.5, 3.0).with_label("exponential_symmetric(1)|[-0.5,3]"),
    ]
    return out
