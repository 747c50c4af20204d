"""Scalar special functions: standard normal cdf, regularized incomplete beta
and lower incomplete gamma.

The incomplete beta/gamma kernels come from the compiled ``_kernels``
extension when it was built, otherwise from the pure-Python ``_kernels_py``.
Set ``ASYMORDER_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np
from scipy import special as _sp

from . import _kernels_py

if os.environ.get("ASYMORDER_PURE_PYTHON"):
    _kernels = _kernels_py
else:
    try:
        from . import _kernels  # type: ignore[attr-defined]
    except ImportError:  # pragma: no cover - depends on build
        _kernels = _kernels_py

BACKEND: str = _kernels.BACKEND
ConvergenceError = _kernels_py.ConvergenceError

__all__ = [
    "Accuracy",
    "BACKEND",
    "ConvergenceError",
    "DomainError",
    "std_normal_cdf",
    "std_normal_ppf",
    "reg_inc_beta",
    "reg_inc_gamma_lower",
    "log_beta",
]


class DomainError(ValueError):
    """Argument outside the mathematical domain of a special function."""


@dataclass(frozen=True)
class Accuracy:
    abs_tol: float = 1e-12
    max_iter: int = 500

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


DEFAULT_ACCURACY = Accuracy()


def use_backend(name: str) -> None:
    """Switch kernels at runtime ("cython" or "python"); used by tests and benchmarks."""
    global _kernels, BACKEND
    if name == "python":
        _kernels = _kernels_py
    elif name == "cython":
        from . import _kernels as compiled  # type: ignore[attr-defined]

        _kernels = compiled
    else:
        raise ValueError(f"unknown backend {name!r}")
    BACKEND = _kernels.BACKEND


def compiled_available() -> bool:
    try:
        from . import _kernels as _  # type: ignore[attr-defined]  # noqa: F401
    except ImportError:
        return False
    return True


_TAIL = -5.0


def _phi_tail(x):
    """Phi(x) for x < _TAIL as erfcx(-x/sqrt 2) exp(-x^2/2) / 2 with x^2 split into
    hi + lo (Dekker), so the large exponent is not rounded."""
    x = np.maximum(x, -40.0)  # Phi(-40) underflows to 0 anyway
    c = 134217729.0 * x
    xh = c - (c - x)
    xl = x - xh
    hi = x * x
    lo = ((xh * xh - hi) + 2.0 * xh * xl) + xl * xl
    # hi/2 is exact, so exp sees an unrounded argument
    return 0.5 * _sp.erfcx(-x / math.sqrt(2.0)) * np.exp(-0.5 * hi) * (1.0 - 0.5 * lo)


def std_normal_cdf(x):
    """Phi(x); ``scipy.special.ndtr`` except in the far left tail."""
    if np.ndim(x) == 0:
        x = float(x)
        return float(_phi_tail(x)) if x < _TAIL else float(_sp.ndtr(x))
    x = np.asarray(x, dtype=float)
    out = _sp.ndtr(x)
    tail = x < _TAIL
    if tail.any():
        out[tail] = _phi_tail(x[tail])
    return out


def std_normal_ppf(u):
    if np.ndim(u) == 0:
        u = float(u)
        if u <= 0.0:
            return -math.inf
        if u >= 1.0:
            return math.inf
        return float(_sp.ndtri(u))
    return _sp.ndtri(np.asarray(u, dtype=float))


def log_beta(a: float, b: float) -> float:
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def _check_beta_params(a, b):
    if not (a > 0 and b > 0) or not (math.isfinite(a) and math.isfinite(b)):
        raise DomainError(f"incomplete beta needs a, b > 0 (got a={a}, b={b})")


def reg_inc_beta(u, a: float, b: float, acc: Accuracy = DEFAULT_ACCURACY):
    """I_u(a, b) = B(a, b)^-1 * int_0^u v^(a-1) (1-v)^(b-1) dv.

    Accepts a scalar or an array of ``u``. Values within ``acc.abs_tol`` of
    0 or 1 are returned as exactly 0 or 1.
    """
    _check_beta_params(a, b)
    if np.ndim(u) == 0:
        u = float(u)
        if not 0.0 <= u <= 1.0:
            raise DomainError(f"incomplete beta needs u in [0, 1] (got {u})")
        return _kernels.betainc(u, float(a), float(b), acc.abs_tol, acc.max_iter)
    arr = np.asarray(u, dtype=float)
    if np.any(~((arr >= 0.0) & (arr <= 1.0))):
        raise DomainError("incomplete beta needs every u in [0, 1]")
    return _kernels.betainc_array(arr, float(a), float(b), acc.abs_tol, acc.max_iter)


def reg_inc_gamma_lower(s: float, x, acc: Accuracy = DEFAULT_ACCURACY):
    """P(s, x) = Gamma(s)^-1 * int_0^x y^(s-1) e^-y dy, scalar or array ``x``."""
    if not (s > 0 and math.isfinite(s)):
        raise DomainError(f"incomplete gamma needs s > 0 (got {s})")
    if np.ndim(x) == 0:
        x = float(x)
        if not x >= 0.0:
            raise DomainError(f"incomplete gamma needs x >= 0 (got {x})")
        return _kernels.gammainc(float(s), x, acc.abs_tol, acc.max_iter)
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr >= 0.0)):
        raise DomainError("incomplete gamma needs every x >= 0")
    return _kernels.gammainc_array(float(s), arr, acc.abs_tol, acc.max_iter)


def reg_inc_beta_inv(u, a: float, b: float, acc: Accuracy = DEFAULT_ACCURACY):
    """Left inverse inf{v : I_v(a, b) >= u}."""
    _check_beta_params(a, b)
    if np.ndim(u) == 0:
        return _kernels.betainc_inv(float(u), float(a), float(b), acc.abs_tol, acc.max_iter)
    return _kernels.betainc_inv_array(
        np.asarray(u, dtype=float), float(a), float(b), acc.abs_tol, acc.max_iter
    )


def reg_inc_gamma_lower_inv(s: float, u, acc: Accuracy = DEFAULT_ACCURACY):
    """Left inverse inf{x : P(s, x) >= u}; +inf at u = 1."""
    if not s > 0:
        raise DomainError(f"incomplete gamma needs s > 0 (got {s})")
    if np.ndim(u) == 0:
        return _kernels.gammainc_inv(float(s), float(u), acc.abs_tol, acc.max_iter)
    return _kernels.gammainc_inv_array(
        float(s), np.asarray(u, dtype=float), acc.abs_tol, acc.max_iter
    )
