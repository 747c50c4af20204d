"""Pure-Python special-function kernels.

Reference implementation of the compiled ``_kernels`` extension. Both modules
expose the same functions with the same signatures and semantics; the
package picks the compiled one at import when it is available.
"""
from __future__ import annotations

import math

import numpy as np

FPMIN = 1e-300
EPS = 2.220446049250313e-16
CF_TOL = 1e-16
BACKEND = "python"


class ConvergenceError(ArithmeticError):
    pass


def log_beta(a, b):
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def _betacf(x, a, b, max_iter):
    # modified Lentz evaluation of the incomplete beta continued fraction
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < FPMIN:
        d = FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < FPMIN:
            d = FPMIN
        c = 1.0 + aa / c
        if abs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < FPMIN:
            d = FPMIN
        c = 1.0 + aa / c
        if abs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < CF_TOL:
            return h
    raise ConvergenceError(
        f"incomplete beta continued fraction did not converge (x={x}, a={a}, b={b})"
    )


def _saturate(value, abs_tol):
    if value < abs_tol:
        return 0.0
    if value > 1.0 - abs_tol:
        return 1.0
    return value


def betainc(x, a, b, abs_tol=1e-12, max_iter=500):
    """Regularized incomplete beta I_x(a, b)."""
    if not (a > 0.0 and b > 0.0):
        raise ValueError(f"betainc requires a > 0 and b > 0, got a={a}, b={b}")
    if not (0.0 <= x <= 1.0):
        raise ValueError(f"betainc requires 0 <= x <= 1, got x={x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    lbt = a * math.log(x) + b * math.log1p(-x) - log_beta(a, b)
    if x < (a + 1.0) / (a + b + 2.0):
        value = math.exp(lbt) * _betacf(x, a, b, max_iter) / a
    else:
        value = 1.0 - math.exp(lbt) * _betacf(1.0 - x, b, a, max_iter) / b
    return _saturate(min(max(value, 0.0), 1.0), abs_tol)


def beta_log_density(x, a, b):
    if x <= 0.0 or x >= 1.0:
        return -math.inf
    return (a - 1.0) * math.log(x) + (b - 1.0) * math.log1p(-x) - log_beta(a, b)


def _gamma_series(s, x, max_iter):
    ap = s
    term = 1.0 / s
    total = term
    for _ in range(max_iter):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * CF_TOL:
            return total * math.exp(-x + s * math.log(x) - math.lgamma(s))
    raise ConvergenceError(f"incomplete gamma series did not converge (s={s}, x={x})")


def _gamma_cf(s, x, max_iter):
    # upper tail Q(s, x) by Lentz's method
    b = x + 1.0 - s
    c = 1.0 / FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, max_iter + 1):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < FPMIN:
            d = FPMIN
        c = b + an / c
        if abs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < CF_TOL:
            return math.exp(-x + s * math.log(x) - math.lgamma(s)) * h
    raise ConvergenceError(
        f"incomplete gamma continued fraction did not converge (s={s}, x={x})"
    )


def gammainc(s, x, abs_tol=1e-12, max_iter=500):
    """Regularized lower incomplete gamma P(s, x)."""
    if not s > 0.0:
        raise ValueError(f"gammainc requires s > 0, got s={s}")
    if not x >= 0.0:
        raise ValueError(f"gammainc requires x >= 0, got x={x}")
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return 1.0
    if x < s + 1.0:
        value = _gamma_series(s, x, max_iter)
    else:
        value = 1.0 - _gamma_cf(s, x, max_iter)
    return _saturate(min(max(value, 0.0), 1.0), abs_tol)


def gamma_log_density(s, x):
    if x <= 0.0:
        if x == 0.0 and s == 1.0:
            return 0.0
        return -math.inf if (x < 0.0 or s > 1.0) else math.inf
    return (s - 1.0) * math.log(x) - x - math.lgamma(s)


def _polish(f, u, lo, hi, x, delta):
    # Newton can creep toward the root from one side without ever moving hi
    a, b = x - delta, x + delta
    if lo < a and f(a) < u:
        lo = a
    if b < hi and f(b) >= u:
        hi = b
    return _bisect_left_scalar(f, u, lo, hi)


def _newton_bracketed(f, logpdf, u, lo, hi, x, max_iter):
    """Left inverse inf{x : f(x) >= u} on a bracket [lo, hi] with f(lo) < u <= f(hi)."""
    for _ in range(max_iter):
        fx = f(x)
        if fx == u:
            return x
        if fx > u:
            hi = x
        else:
            lo = x
        if hi - lo <= 4.0 * EPS * max(abs(hi), 1e-300) or hi - lo < 1e-300:
            return hi
        lp = logpdf(x)
        step_ok = False
        if lp > -700.0:
            cand = x - (fx - u) / math.exp(lp)
            if lo < cand < hi:
                if abs(cand - x) <= 1e-13 * abs(cand):
                    return _polish(f, u, lo, hi, cand, 4.0 * abs(cand - x) + 16.0 * EPS * abs(cand))
                x = cand
                step_ok = True
        if not step_ok:
            x = 0.5 * (lo + hi)
    return _bisect_left_scalar(f, u, lo, hi)


def betainc_inv(u, a, b, abs_tol=1e-12, max_iter=500):
    """Left inverse of x -> I_x(a, b) on [0, 1]."""
    if not (0.0 <= u <= 1.0):
        raise ValueError(f"betainc_inv requires 0 <= u <= 1, got u={u}")
    if u == 0.0:
        return 0.0
    f = lambda v: betainc(v, a, b, abs_tol, max_iter)  # noqa: E731
    if u > 1.0 - abs_tol:
        return _bisect_left_scalar(f, u, 0.0, 1.0)
    lp = lambda v: beta_log_density(v, a, b)  # noqa: E731
    return _newton_bracketed(f, lp, u, 0.0, 1.0, a / (a + b), 200)


def gammainc_inv(s, u, abs_tol=1e-12, max_iter=500):
    """Left inverse of x -> P(s, x) on [0, inf]."""
    if not (0.0 <= u <= 1.0):
        raise ValueError(f"gammainc_inv requires 0 <= u <= 1, got u={u}")
    if u == 0.0:
        return 0.0
    if u == 1.0:
        return math.inf
    f = lambda v: gammainc(s, v, abs_tol, max_iter)  # noqa: E731
    hi = s + 10.0 * math.sqrt(s) + 10.0
    while f(hi) < u:
        hi *= 2.0
    lp = lambda v: gamma_log_density(s, v)  # noqa: E731
    return _newton_bracketed(f, lp, u, 0.0, hi, min(s, 0.5 * hi), 200)


def _bisect_left_scalar(f, u, lo, hi):
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if f(mid) >= u:
            hi = mid
        else:
            lo = mid
    return hi


def betainc_array(x, a, b, abs_tol=1e-12, max_iter=500):
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    flat_in, flat_out = x.ravel(), out.ravel()
    for i in range(flat_in.size):
        flat_out[i] = betainc(float(flat_in[i]), a, b, abs_tol, max_iter)
    return out


def gammainc_array(s, x, abs_tol=1e-12, max_iter=500):
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    flat_in, flat_out = x.ravel(), out.ravel()
    for i in range(flat_in.size):
        flat_out[i] = gammainc(s, float(flat_in[i]), abs_tol, max_iter)
    return out


def betainc_inv_array(u, a, b, abs_tol=1e-12, max_iter=500):
    u = np.asarray(u, dtype=float)
    out = np.empty_like(u)
    flat_in, flat_out = u.ravel(), out.ravel()
    for i in range(flat_in.size):
        flat_out[i] = betainc_inv(float(flat_in[i]), a, b, abs_tol, max_iter)
    return out


def gammainc_inv_array(s, u, abs_tol=1e-12, max_iter=500):
    u = np.asarray(u, dtype=float)
    out = np.empty_like(u)
    flat_in, flat_out = u.ravel(), out.ravel()
    for i in range(flat_in.size):
        flat_out[i] = gammainc_inv(s, float(flat_in[i]), abs_tol, max_iter)
    return out
