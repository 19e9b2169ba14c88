# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot loops; see ``_pykernels`` for the reference."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, sqrt, fabs, erf, erfc, INFINITY, isfinite
from scipy.special.cython_special cimport erfcx

cnp.import_array()

cdef double SQRT2 = sqrt(2.0)
cdef double INV_SQRT2PI = 1.0 / sqrt(2.0 * 3.141592653589793)
cdef double BAND = 40.0


cdef inline Py_ssize_t _count(const double[::1] d, const double[::1] e2, double x) nogil:
    cdef Py_ssize_t n = d.shape[0], i, c = 0
    cdef double tiny = 2.2250738585072014e-298
    cdef double q = d[0] - x
    if q == 0.0:
        q = -tiny
    if q < 0.0:
        c += 1
    for i in range(1, n):
        q = d[i] - x - e2[i - 1] / q
        if q == 0.0:
            q = -tiny
        if q < 0.0:
            c += 1
    return c


def sturm_count(d, e2, double x):
    cdef const double[::1] dv = np.ascontiguousarray(d, dtype=np.float64)
    cdef const double[::1] ev = np.ascontiguousarray(e2, dtype=np.float64)
    return int(_count(dv, ev, x))


def tridiag_eigenvalue(d, e2, Py_ssize_t k, double lo, double hi, double rtol=1e-13):
    cdef const double[::1] dv = np.ascontiguousarray(d, dtype=np.float64)
    cdef const double[::1] ev = np.ascontiguousarray(e2, dtype=np.float64)
    cdef double mid, scale
    with nogil:
        while True:
            scale = fabs(lo) if fabs(lo) > fabs(hi) else fabs(hi)
            if scale < 1e-300:
                scale = 1e-300
            if hi - lo <= rtol * scale:
                break
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if _count(dv, ev, mid) > k:
                hi = mid
            else:
                lo = mid
    return 0.5 * (lo + hi)


cdef inline double _logint(double t0, double t1, double l0, double l1, double h, double beta) nogil:
    cdef double b = (l1 - l0) / h
    cdef double bb = b * beta * beta
    cdef double A = (t0 - bb) / beta
    cdef double B = (t1 - bb) / beta
    cdef double diff
    if A >= 0.0:
        diff = erfcx(A / SQRT2) - erfcx(B / SQRT2) * exp(-0.5 * (B - A) * (B + A))
        if diff <= 0.0:
            return -INFINITY
        return l0 - 0.5 * (t0 / beta) * (t0 / beta) + log(0.5 * diff)
    if B <= 0.0:
        diff = erfcx(-B / SQRT2) - erfcx(-A / SQRT2) * exp(-0.5 * (A - B) * (A + B))
        if diff <= 0.0:
            return -INFINITY
        return l1 - 0.5 * (t1 / beta) * (t1 / beta) + log(0.5 * diff)
    diff = 0.5 * (erf(B / SQRT2) - erf(A / SQRT2))
    if diff <= 0.0:
        return -INFINITY
    return l0 - b * t0 + 0.5 * (b * beta) * (b * beta) + log(diff)


cdef inline double _logint_linear(double t0, double t1, double l0, double l1, double h, double beta) nogil:
    cdef double lfin, z, sgn, A, B, dphi, val
    if not isfinite(l0):
        lfin = l1
        z = t0
        sgn = 1.0
    else:
        lfin = l0
        z = t1
        sgn = -1.0
    A = t0 / beta
    B = t1 / beta
    dphi = 0.5 * (erfc(-B / SQRT2) - erfc(-A / SQRT2))
    val = -z * dphi + beta * INV_SQRT2PI * (exp(-0.5 * A * A) - exp(-0.5 * B * B))
    val = sgn * val / h
    if val <= 0.0:
        return -INFINITY
    return lfin + log(val)


def conv_logdensity(x, ld, y, double beta, double band=BAND):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[::1] lv = np.ascontiguousarray(ld, dtype=np.float64)
    cdef const double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], ny = yv.shape[0]
    out_arr = np.empty(ny, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double h = xv[1] - xv[0]
    cdef double width = band * beta
    cdef Py_ssize_t j, i, i0, i1
    cdef double yy, t0, t1, l0, l1, term, m, s
    cdef bint f0, f1
    with nogil:
        for j in range(ny):
            yy = yv[j]
            i0 = <Py_ssize_t>((yy - width - xv[0]) / h) - 1
            if i0 < 0:
                i0 = 0
            i1 = <Py_ssize_t>((yy + width - xv[0]) / h) + 2
            if i1 > n - 1:
                i1 = n - 1
            m = -INFINITY
            s = 0.0
            for i in range(i0, i1):
                l0 = lv[i]
                l1 = lv[i + 1]
                f0 = isfinite(l0)
                f1 = isfinite(l1)
                if not (f0 or f1):
                    continue
                t0 = xv[i] - yy
                t1 = xv[i + 1] - yy
                if f0 and f1:
                    term = _logint(t0, t1, l0, l1, h, beta)
                else:
                    term = _logint_linear(t0, t1, l0, l1, h, beta)
                if not isfinite(term):
                    continue
                if term > m:
                    s = s * exp(m - term) + 1.0
                    m = term
                else:
                    s += exp(term - m)
            if isfinite(m):
                out[j] = m + log(s)
            else:
                out[j] = -INFINITY
    return out_arr


def band_matched_mass(xa, a, xb, b, double eps):
    cdef const double[::1] xav = np.ascontiguousarray(xa, dtype=np.float64)
    cdef const double[::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef const double[::1] xbv = np.ascontiguousarray(xb, dtype=np.float64)
    rem_arr = np.array(b, dtype=np.float64, copy=True)
    cdef double[::1] rem = rem_arr
    cdef Py_ssize_t na = xav.shape[0], nb = xbv.shape[0], i, j = 0, k
    cdef double need, lo, hi, take, matched = 0.0
    with nogil:
        for i in range(na):
            need = av[i]
            if need <= 0.0:
                continue
            lo = xav[i] - eps
            hi = xav[i] + eps
            while j < nb and (xbv[j] < lo or rem[j] <= 0.0):
                j += 1
            k = j
            while need > 0.0 and k < nb and xbv[k] <= hi:
                take = rem[k] if rem[k] < need else need
                rem[k] -= take
                need -= take
                matched += take
                if rem[k] <= 0.0:
                    k += 1
            while j < nb and rem[j] <= 0.0:
                j += 1
    return matched


cdef inline Py_ssize_t _bucket(const double[::1] u, double t) nogil:
    # number of u_k <= t
    cdef Py_ssize_t lo = 0, hi = u.shape[0], mid
    while lo < hi:
        mid = (lo + hi) // 2
        if u[mid] <= t:
            lo = mid + 1
        else:
            hi = mid
    return lo


def bf_isoperimetric(F, q, u):
    cdef const double[::1] Fv = np.ascontiguousarray(F, dtype=np.float64)
    cdef const double[::1] qv = np.ascontiguousarray(q, dtype=np.float64)
    cdef const double[::1] uv = np.ascontiguousarray(u, dtype=np.float64)
    cdef Py_ssize_t n = Fv.shape[0], K = uv.shape[0], a, b, c, d, j
    best_arr = np.full(K, np.inf)
    cdef double[::1] best = best_arr
    cdef double m1, b1, mm, bb, t
    with nogil:
        for a in range(n):
            for b in range(a + 1, n):
                m1 = Fv[b] - Fv[a]
                b1 = qv[a] + qv[b]
                t = m1 if m1 < 1.0 - m1 else 1.0 - m1
                j = _bucket(uv, t)
                if j > 0 and b1 < best[j - 1]:
                    best[j - 1] = b1
                for c in range(b + 1, n):
                    for d in range(c + 1, n):
                        mm = m1 + Fv[d] - Fv[c]
                        bb = b1 + qv[c] + qv[d]
                        t = mm if mm < 1.0 - mm else 1.0 - mm
                        j = _bucket(uv, t)
                        if j > 0 and bb < best[j - 1]:
                            best[j - 1] = bb
    return np.minimum.accumulate(best_arr[::-1])[::-1].copy()


def bf_concentration(x, F, Fm, Fp, double r):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[::1] Fv = np.ascontiguousarray(F, dtype=np.float64)
    cdef const double[::1] Fmv = np.ascontiguousarray(Fm, dtype=np.float64)
    cdef const double[::1] Fpv = np.ascontiguousarray(Fp, dtype=np.float64)
    cdef Py_ssize_t n = Fv.shape[0], a, b, c, d
    cdef double best = 0.0, m1, mm, enl, val
    with nogil:
        for a in range(n):
            for b in range(a + 1, n):
                m1 = Fv[b] - Fv[a]
                if m1 >= 0.5:
                    enl = Fpv[b] - Fmv[a]
                    if enl > 1.0:
                        enl = 1.0
                    val = 1.0 - enl
                    if val > best:
                        best = val
                for c in range(b + 1, n):
                    for d in range(c + 1, n):
                        mm = m1 + Fv[d] - Fv[c]
                        if mm < 0.5:
                            continue
                        if xv[b] + r >= xv[c] - r:
                            enl = Fpv[d] - Fmv[a]
                        else:
                            enl = (Fpv[b] - Fmv[a]) + (Fpv[d] - Fmv[c])
                        if enl > 1.0:
                            enl = 1.0
                        val = 1.0 - enl
                        if val > best:
                            best = val
    return best
