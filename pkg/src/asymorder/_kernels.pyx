# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled special-function kernels.

Mirrors ``_kernels_py`` function for function; see that module for the
reference semantics.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, log1p, lgamma, fabs, sqrt, isinf, INFINITY, NAN, isnan

cnp.import_array()

from ._kernels_py import ConvergenceError

BACKEND = "cython"

cdef double FPMIN = 1e-300
cdef double EPS = 2.220446049250313e-16
cdef double CF_TOL = 1e-16


cpdef double log_beta(double a, double b):
    return lgamma(a) + lgamma(b) - lgamma(a + b)


cdef double _betacf(double x, double a, double b, int max_iter) nogil:
    cdef double qab = a + b, qap = a + 1.0, qam = a - 1.0
    cdef double c = 1.0, d, h, aa, delta
    cdef int m, m2
    d = 1.0 - qab * x / qap
    if fabs(d) < FPMIN:
        d = FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if fabs(d) < FPMIN:
            d = FPMIN
        c = 1.0 + aa / c
        if fabs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if fabs(d) < FPMIN:
            d = FPMIN
        c = 1.0 + aa / c
        if fabs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if fabs(delta - 1.0) < CF_TOL:
            return h
    return NAN


cdef inline double _saturate(double value, double abs_tol) nogil:
    if value < 0.0:
        value = 0.0
    if value > 1.0:
        value = 1.0
    if value < abs_tol:
        return 0.0
    if value > 1.0 - abs_tol:
        return 1.0
    return value


cdef double _betainc(double x, double a, double b, double abs_tol, int max_iter) nogil:
    cdef double lbt, cf
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    lbt = a * log(x) + b * log1p(-x) - (lgamma(a) + lgamma(b) - lgamma(a + b))
    if x < (a + 1.0) / (a + b + 2.0):
        cf = _betacf(x, a, b, max_iter)
        if isnan(cf):
            return NAN
        return _saturate(exp(lbt) * cf / a, abs_tol)
    cf = _betacf(1.0 - x, b, a, max_iter)
    if isnan(cf):
        return NAN
    return _saturate(1.0 - exp(lbt) * cf / b, abs_tol)


cdef double _beta_logpdf(double x, double a, double b) nogil:
    if x <= 0.0 or x >= 1.0:
        return -INFINITY
    return (a - 1.0) * log(x) + (b - 1.0) * log1p(-x) - (lgamma(a) + lgamma(b) - lgamma(a + b))


cdef double _gamma_series(double s, double x, int max_iter) nogil:
    cdef double ap = s, term = 1.0 / s, total
    cdef int i
    total = term
    for i in range(max_iter):
        ap += 1.0
        term *= x / ap
        total += term
        if fabs(term) < fabs(total) * CF_TOL:
            return total * exp(-x + s * log(x) - lgamma(s))
    return NAN


cdef double _gamma_cf(double s, double x, int max_iter) nogil:
    cdef double b = x + 1.0 - s, c = 1.0 / FPMIN, d, h, an, delta
    cdef int i
    d = 1.0 / b
    h = d
    for i in range(1, max_iter + 1):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if fabs(d) < FPMIN:
            d = FPMIN
        c = b + an / c
        if fabs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if fabs(delta - 1.0) < CF_TOL:
            return exp(-x + s * log(x) - lgamma(s)) * h
    return NAN


cdef double _gammainc(double s, double x, double abs_tol, int max_iter) nogil:
    cdef double v
    if x == 0.0:
        return 0.0
    if isinf(x):
        return 1.0
    if x < s + 1.0:
        v = _gamma_series(s, x, max_iter)
        if isnan(v):
            return NAN
        return _saturate(v, abs_tol)
    v = _gamma_cf(s, x, max_iter)
    if isnan(v):
        return NAN
    return _saturate(1.0 - v, abs_tol)


cdef double _gamma_logpdf(double s, double x) nogil:
    if x <= 0.0:
        if x == 0.0 and s == 1.0:
            return 0.0
        if x < 0.0 or s > 1.0:
            return -INFINITY
        return INFINITY
    return (s - 1.0) * log(x) - x - lgamma(s)


# kind 0: beta(a, b); kind 1: gamma(s=a)
cdef inline double _f(int kind, double x, double a, double b, double abs_tol, int max_iter) nogil:
    if kind == 0:
        return _betainc(x, a, b, abs_tol, max_iter)
    return _gammainc(a, x, abs_tol, max_iter)


cdef inline double _logpdf(int kind, double x, double a, double b) nogil:
    if kind == 0:
        return _beta_logpdf(x, a, b)
    return _gamma_logpdf(a, x)


cdef double _bisect_left(int kind, double u, double lo, double hi, double a, double b,
                         double abs_tol, int max_iter) nogil:
    cdef double mid, fm
    cdef int i
    for i in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = _f(kind, mid, a, b, abs_tol, max_iter)
        if isnan(fm):
            return NAN
        if fm >= u:
            hi = mid
        else:
            lo = mid
    return hi


cdef double _polish(int kind, double u, double lo, double hi, double x, double delta,
                    double a, double b, double abs_tol, int max_iter) nogil:
    # Newton can creep toward the root from one side without ever moving hi
    cdef double l = x - delta, r = x + delta
    if lo < l and _f(kind, l, a, b, abs_tol, max_iter) < u:
        lo = l
    if r < hi and _f(kind, r, a, b, abs_tol, max_iter) >= u:
        hi = r
    return _bisect_left(kind, u, lo, hi, a, b, abs_tol, max_iter)


cdef double _newton_bracketed(int kind, double u, double lo, double hi, double x,
                              double a, double b, double abs_tol, int max_iter) nogil:
    cdef double fx, lp, cand
    cdef int it, step_ok
    for it in range(200):
        fx = _f(kind, x, a, b, abs_tol, max_iter)
        if isnan(fx):
            return NAN
        if fx == u:
            return x
        if fx > u:
            hi = x
        else:
            lo = x
        if hi - lo <= 4.0 * EPS * (hi if hi > 1e-300 else 1e-300) or hi - lo < 1e-300:
            return hi
        lp = _logpdf(kind, x, a, b)
        step_ok = 0
        if lp > -700.0:
            cand = x - (fx - u) / exp(lp)
            if lo < cand < hi:
                if fabs(cand - x) <= 1e-13 * fabs(cand):
                    return _polish(kind, u, lo, hi, cand,
                                   4.0 * fabs(cand - x) + 16.0 * EPS * fabs(cand),
                                   a, b, abs_tol, max_iter)
                x = cand
                step_ok = 1
        if not step_ok:
            x = 0.5 * (lo + hi)
    return _bisect_left(kind, u, lo, hi, a, b, abs_tol, max_iter)


cdef double _betainc_inv(double u, double a, double b, double abs_tol, int max_iter) nogil:
    if u == 0.0:
        return 0.0
    if u > 1.0 - abs_tol:
        return _bisect_left(0, u, 0.0, 1.0, a, b, abs_tol, max_iter)
    return _newton_bracketed(0, u, 0.0, 1.0, a / (a + b), a, b, abs_tol, max_iter)


cdef double _gammainc_inv(double s, double u, double abs_tol, int max_iter) nogil:
    cdef double hi, fh
    if u == 0.0:
        return 0.0
    if u == 1.0:
        return INFINITY
    hi = s + 10.0 * sqrt(s) + 10.0
    while True:
        fh = _gammainc(s, hi, abs_tol, max_iter)
        if isnan(fh):
            return NAN
        if fh >= u:
            break
        hi *= 2.0
    return _newton_bracketed(1, u, 0.0, hi, (s if s < 0.5 * hi else 0.5 * hi), s, 0.0,
                             abs_tol, max_iter)


def _check_beta(double a, double b):
    if not (a > 0.0 and b > 0.0):
        raise ValueError(f"betainc requires a > 0 and b > 0, got a={a}, b={b}")


def _check_gamma(double s):
    if not s > 0.0:
        raise ValueError(f"gammainc requires s > 0, got s={s}")


def betainc(double x, double a, double b, double abs_tol=1e-12, int max_iter=500):
    """Regularized incomplete beta I_x(a, b)."""
    _check_beta(a, b)
    if not (0.0 <= x <= 1.0):
        raise ValueError(f"betainc requires 0 <= x <= 1, got x={x}")
    cdef double v = _betainc(x, a, b, abs_tol, max_iter)
    if isnan(v):
        raise ConvergenceError(
            f"incomplete beta continued fraction did not converge (x={x}, a={a}, b={b})")
    return v


def beta_log_density(double x, double a, double b):
    return _beta_logpdf(x, a, b)


def gammainc(double s, double x, double abs_tol=1e-12, int max_iter=500):
    """Regularized lower incomplete gamma P(s, x)."""
    _check_gamma(s)
    if not x >= 0.0:
        raise ValueError(f"gammainc requires x >= 0, got x={x}")
    cdef double v = _gammainc(s, x, abs_tol, max_iter)
    if isnan(v):
        raise ConvergenceError(f"incomplete gamma did not converge (s={s}, x={x})")
    return v


def gamma_log_density(double s, double x):
    return _gamma_logpdf(s, x)


def betainc_inv(double u, double a, double b, double abs_tol=1e-12, int max_iter=500):
    _check_beta(a, b)
    if not (0.0 <= u <= 1.0):
        raise ValueError(f"betainc_inv requires 0 <= u <= 1, got u={u}")
    cdef double v = _betainc_inv(u, a, b, abs_tol, max_iter)
    if isnan(v):
        raise ConvergenceError("incomplete beta inversion did not converge")
    return v


def gammainc_inv(double s, double u, double abs_tol=1e-12, int max_iter=500):
    _check_gamma(s)
    if not (0.0 <= u <= 1.0):
        raise ValueError(f"gammainc_inv requires 0 <= u <= 1, got u={u}")
    cdef double v = _gammainc_inv(s, u, abs_tol, max_iter)
    if isnan(v):
        raise ConvergenceError("incomplete gamma inversion did not converge")
    return v


cdef _as_contiguous(x):
    return np.ascontiguousarray(x, dtype=np.float64)


def _finish(out, shape, bint failed, str what):
    if failed:
        raise ConvergenceError(f"{what} did not converge for at least one element")
    return out.reshape(shape)


def betainc_array(x, double a, double b, double abs_tol=1e-12, int max_iter=500):
    _check_beta(a, b)
    arr = _as_contiguous(x)
    shape = arr.shape
    cdef double[::1] xv = arr.reshape(-1)
    out = np.empty(xv.shape[0], dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i, n = xv.shape[0]
    cdef bint failed = 0, bad = 0
    with nogil:
        for i in range(n):
            if not (0.0 <= xv[i] <= 1.0):
                bad = 1
                break
            ov[i] = _betainc(xv[i], a, b, abs_tol, max_iter)
            if isnan(ov[i]):
                failed = 1
    if bad:
        raise ValueError("betainc requires 0 <= x <= 1 for every element")
    return _finish(out, shape, failed, "incomplete beta")


def gammainc_array(double s, x, double abs_tol=1e-12, int max_iter=500):
    _check_gamma(s)
    arr = _as_contiguous(x)
    shape = arr.shape
    cdef double[::1] xv = arr.reshape(-1)
    out = np.empty(xv.shape[0], dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i, n = xv.shape[0]
    cdef bint failed = 0, bad = 0
    with nogil:
        for i in range(n):
            if not xv[i] >= 0.0:
                bad = 1
                break
            ov[i] = _gammainc(s, xv[i], abs_tol, max_iter)
            if isnan(ov[i]):
                failed = 1
    if bad:
        raise ValueError("gammainc requires x >= 0 for every element")
    return _finish(out, shape, failed, "incomplete gamma")


def betainc_inv_array(u, double a, double b, double abs_tol=1e-12, int max_iter=500):
    _check_beta(a, b)
    arr = _as_contiguous(u)
    shape = arr.shape
    cdef double[::1] uv = arr.reshape(-1)
    out = np.empty(uv.shape[0], dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i, n = uv.shape[0]
    cdef bint failed = 0, bad = 0
    with nogil:
        for i in range(n):
            if not (0.0 <= uv[i] <= 1.0):
                bad = 1
                break
            ov[i] = _betainc_inv(uv[i], a, b, abs_tol, max_iter)
            if isnan(ov[i]):
                failed = 1
    if bad:
        raise ValueError("betainc_inv requires 0 <= u <= 1 for every element")
    return _finish(out, shape, failed, "incomplete beta inversion")


def gammainc_inv_array(double s, u, double abs_tol=1e-12, int max_iter=500):
    _check_gamma(s)
    arr = _as_contiguous(u)
    shape = arr.shape
    cdef double[::1] uv = arr.reshape(-1)
    out = np.empty(uv.shape[0], dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i, n = uv.shape[0]
    cdef bint failed = 0, bad = 0
    with nogil:
        for i in range(n):
            if not (0.0 <= uv[i] <= 1.0):
                bad = 1
                break
            ov[i] = _gammainc_inv(s, uv[i], abs_tol, max_iter)
            if isnan(ov[i]):
                failed = 1
    if bad:
        raise ValueError("gammainc_inv requires 0 <= u <= 1 for every element")
    return _finish(out, shape, failed, "incomplete gamma inversion")
