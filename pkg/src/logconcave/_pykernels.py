"""Pure numpy implementations of the hot kernels.

These mirror ``_kernels.pyx`` function by function and are used when the
compiled extension is unavailable (or when ``LOGCONCAVE_PURE_PYTHON=1``).
"""
from __future__ import annotations

import numpy as np
from scipy.special import erf, erfc, erfcx

_SQRT2 = np.sqrt(2.0)
_BAND = 40.0  # kernel cutoff in units of beta


def sturm_count(d: np.ndarray, e2: np.ndarray, x: float) -> int:
    """Number of eigenvalues of the symmetric tridiagonal (d, e2) below ``x``."""
    return int(_sturm_counts(np.asarray(d, float), np.asarray(e2, float), np.array([x]))[0])


def _sturm_counts(d: np.ndarray, e2: np.ndarray, xs: np.ndarray) -> np.ndarray:
    tiny = np.finfo(float).tiny * 1e10
    q = d[0] - xs
    q = np.where(q == 0.0, -tiny, q)
    count = (q < 0).astype(np.int64)
    for i in range(1, d.shape[0]):
        q = d[i] - xs - e2[i - 1] / q
        q = np.where(q == 0.0, -tiny, q)
        count += q < 0
    return count


def tridiag_eigenvalue(d, e2, k: int, lo: float, hi: float, rtol: float = 1e-13) -> float:
    """k-th smallest eigenvalue (0-based) by Sturm multisection on [lo, hi]."""
    d = np.ascontiguousarray(d, float)
    e2 = np.ascontiguousarray(e2, float)
    nsec = 15
    while hi - lo > rtol * max(abs(lo), abs(hi), 1e-300):
        xs = lo + (hi - lo) * np.arange(1, nsec + 1) / (nsec + 1)
        counts = _sturm_counts(d, e2, xs)
        above = np.nonzero(counts > k)[0]
        new_hi = xs[above[0]] if above.size else hi
        below = np.nonzero(counts <= k)[0]
        new_lo = xs[below[-1]] if below.size else lo
        if new_hi == hi and new_lo == lo:
            break
        lo, hi = new_lo, new_hi
    return 0.5 * (lo + hi)


def _cell_logint(t0, t1, l0, l1, h, beta):
    """log of the integral of exp(log-linear cell) against the gaussian kernel.

    ``t0``/``t1`` are cell ends relative to the evaluation point; ``l0``/``l1``
    the log-density at the ends (both finite).
    """
    b = (l1 - l0) / h
    bb = b * beta * beta
    A = (t0 - bb) / beta
    B = (t1 - bb) / beta
    out = np.empty(np.broadcast(t0, l0).shape)
    with np.errstate(over="ignore", under="ignore", divide="ignore", invalid="ignore"):
        right = A >= 0
        left = B <= 0
        mid = ~(right | left)
        if np.any(right):
            a_, b_ = A[right], B[right]
            diff = erfcx(a_ / _SQRT2) - erfcx(b_ / _SQRT2) * np.exp(-0.5 * (b_ - a_) * (b_ + a_))
            out[right] = (l0[right] - 0.5 * (t0[right] / beta) ** 2) + np.log(0.5 * np.maximum(diff, 0.0))
        if np.any(left):
            a_, b_ = A[left], B[left]
            diff = erfcx(-b_ / _SQRT2) - erfcx(-a_ / _SQRT2) * np.exp(-0.5 * (a_ - b_) * (a_ + b_))
            out[left] = (l1[left] - 0.5 * (t1[left] / beta) ** 2) + np.log(0.5 * np.maximum(diff, 0.0))
        if np.any(mid):
            a_, b_ = A[mid], B[mid]
            dphi = 0.5 * (erf(b_ / _SQRT2) - erf(a_ / _SQRT2))
            bm = b[mid]
            out[mid] = l0[mid] - bm * t0[mid] + 0.5 * (bm * beta) ** 2 + np.log(dphi)
    return out


def _cell_logint_linear(t0, t1, l0, l1, h, beta):
    """Same integral for a cell whose density is linear and vanishes at one end."""
    with np.errstate(over="ignore", under="ignore", divide="ignore", invalid="ignore"):
        zero_left = ~np.isfinite(l0)
        lfin = np.where(zero_left, l1, l0)
        z = np.where(zero_left, t0, t1)  # position of the zero end
        sgn = np.where(zero_left, 1.0, -1.0)
        A = t0 / beta
        B = t1 / beta
        dphi = 0.5 * (erfc(-B / _SQRT2) - erfc(-A / _SQRT2))
        pdf = lambda s: np.exp(-0.5 * s * s) / np.sqrt(2 * np.pi)
        # integral of (t - z) * phi_beta(t) dt over [t0, t1]
        val = -z * dphi + beta * (pdf(A) - pdf(B))
        val = np.maximum(sgn * val / h, 0.0)
        return lfin + np.log(val)


def conv_logdensity(x: np.ndarray, ld: np.ndarray, y: np.ndarray, beta: float,
                    band: float = _BAND) -> np.ndarray:
    """log of (q * phi_beta)(y) for the piecewise log-linear density q on nodes x."""
    x = np.ascontiguousarray(x, float)
    ld = np.ascontiguousarray(ld, float)
    y = np.ascontiguousarray(y, float)
    h = x[1] - x[0]
    l0_all, l1_all = ld[:-1], ld[1:]
    fin0, fin1 = np.isfinite(l0_all), np.isfinite(l1_all)
    live = fin0 | fin1
    both = fin0 & fin1
    out = np.full(y.shape, -np.inf)
    ncell = x.shape[0] - 1
    width = band * beta
    chunk = max(1, int(2_000_000 // max(ncell, 1)))
    for s in range(0, y.shape[0], chunk):
        yy = y[s:s + chunk]
        i0 = max(int(np.searchsorted(x, yy[0] - width)) - 1, 0)
        i1 = min(int(np.searchsorted(x, yy[-1] + width)) + 1, ncell)
        if i1 <= i0:
            continue
        idx = np.arange(i0, i1)
        idx = idx[live[idx]]
        if idx.size == 0:
            continue
        t0 = x[idx][None, :] - yy[:, None]
        t1 = x[idx + 1][None, :] - yy[:, None]
        l0 = np.broadcast_to(l0_all[idx], t0.shape)
        l1 = np.broadcast_to(l1_all[idx], t0.shape)
        terms = np.full(t0.shape, -np.inf)
        bmask = np.broadcast_to(both[idx], t0.shape)
        near = (np.minimum(np.abs(t0), np.abs(t1)) <= width) | ((t0 <= 0) & (t1 >= 0))
        m = bmask & near
        if np.any(m):
            terms[m] = _cell_logint(t0[m], t1[m], l0[m], l1[m], h, beta)
        m = (~bmask) & near
        if np.any(m):
            terms[m] = _cell_logint_linear(t0[m], t1[m], l0[m], l1[m], h, beta)
        top = terms.max(axis=1)
        safe = np.where(np.isfinite(top), top, 0.0)
        with np.errstate(under="ignore"):
            acc = np.exp(terms - safe[:, None]).sum(axis=1)
        with np.errstate(divide="ignore"):
            out[s:s + chunk] = np.where(np.isfinite(top), safe + np.log(acc), -np.inf)
    return out


def band_matched_mass(xa, a, xb, b, eps: float) -> float:
    """Largest mass a coupling can place on {|x - y| <= eps} (greedy, exact in 1D)."""
    xa = np.asarray(xa, float)
    xb = np.asarray(xb, float)
    rem = np.array(b, dtype=float, copy=True)
    nb = rem.shape[0]
    j = 0
    matched = 0.0
    for i in range(xa.shape[0]):
        need = float(a[i])
        if need <= 0.0:
            continue
        lo = xa[i] - eps
        hi = xa[i] + eps
        while j < nb and (xb[j] < lo or rem[j] <= 0.0):
            j += 1
        k = j
        while need > 0.0 and k < nb and xb[k] <= hi:
            take = rem[k] if rem[k] < need else need
            rem[k] -= take
            need -= take
            matched += take
            if rem[k] <= 0.0:
                k += 1
        while j < nb and rem[j] <= 0.0:
            j += 1
    return matched


def bf_isoperimetric(F, q, u) -> np.ndarray:
    """Smallest boundary among unions of <= 2 node intervals with min(m, 1-m) >= u_k."""
    F = np.asarray(F, float)
    q = np.asarray(q, float)
    u = np.asarray(u, float)
    n = F.shape[0]
    K = u.shape[0]
    best = np.full(K + 1, np.inf)
    ia, ib = np.triu_indices(n, k=1)
    mass = F[ib] - F[ia]
    bnd = q[ia] + q[ib]

    def push(mm, bb):
        t = np.minimum(mm, 1.0 - mm)
        j = np.searchsorted(u, t, side="right")  # number of u_k <= t
        ok = j > 0
        np.minimum.at(best, j[ok] - 1, bb[ok])

    push(mass, bnd)
    order = np.argsort(ia, kind="stable")
    ia_s, ib_s, m_s, b_s = ia[order], ib[order], mass[order], bnd[order]
    starts = np.searchsorted(ia_s, np.arange(n + 1))
    for k in range(ia.shape[0]):
        a0, b0 = ia[k], ib[k]
        s = starts[b0 + 1] if b0 + 1 <= n else ia_s.shape[0]
        if s >= ia_s.shape[0]:
            continue
        push(mass[k] + m_s[s:], bnd[k] + b_s[s:])
    res = np.minimum.accumulate(best[:K][::-1])[::-1]
    return res


def bf_concentration(x, F, Fm, Fp, r: float) -> float:
    """Largest 1 - mass(A_r) over unions A of <= 2 node intervals with mass >= 1/2."""
    x = np.asarray(x, float)
    F = np.asarray(F, float)
    Fm = np.asarray(Fm, float)
    Fp = np.asarray(Fp, float)
    n = F.shape[0]
    ia, ib = np.triu_indices(n, k=1)
    mass = F[ib] - F[ia]
    big = mass[mass >= 0.5]
    best = 0.0
    if big.size:
        sel = mass >= 0.5
        best = max(best, float(np.max(1.0 - (Fp[ib[sel]] - Fm[ia[sel]]))))
    order = np.argsort(ia, kind="stable")
    ia_s, ib_s, m_s = ia[order], ib[order], mass[order]
    starts = np.searchsorted(ia_s, np.arange(n + 1))
    for k in range(ia.shape[0]):
        a0, b0 = ia[k], ib[k]
        s = starts[b0 + 1] if b0 + 1 <= n else ia_s.shape[0]
        if s >= ia_s.shape[0]:
            continue
        c = ia_s[s:]
        d = ib_s[s:]
        tot = mass[k] + m_s[s:]
        ok = tot >= 0.5
        if not np.any(ok):
            continue
        c, d = c[ok], d[ok]
        merged = x[b0] + r >= x[c] - r
        enl = np.where(merged, Fp[d] - Fm[a0], (Fp[b0] - Fm[a0]) + (Fp[d] - Fm[c]))
        best = max(best, float(np.max(1.0 - np.minimum(enl, 1.0))))
    return best
