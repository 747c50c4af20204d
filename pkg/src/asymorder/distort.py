"""Distortion functions phi: [0, 1] -> [0, 1] and the checks built on them.

A distortion is nondecreasing with phi(0) = 0 and phi(1) = 1, so phi(F) is a
cdf whenever F is. The kinds provided here are fractional order statistics
(regularized incomplete beta), mixtures of order statistics sharing one
sample size, k-th upper record values (regularized lower incomplete gamma)
and user expressions.

Parameters may be expressions in ``t``; a ``DistortionFamily`` resolves them
to a concrete ``Distortion`` with ``at(t)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import specfun
from .expr import Coef, EvalError, evaluate_array, parse

__all__ = [
    "Distortion",
    "OrderStatDistortion",
    "MixtureDistortion",
    "RecordDistortion",
    "CustomDistortion",
    "IdentityDistortion",
    "DistortionFamily",
    "LimitProfile",
    "DistortionError",
    "make_order_stat",
    "make_mixture",
    "make_record",
    "make_custom",
    "distortion_from_spec",
    "apply",
    "sufficient_ast",
    "sufficient_l1w2",
    "mixture_precedence_bounds",
    "separation",
    "image_measure",
    "sup_derivative",
]

GRID_CHECK = 1024
MONOTONE_TOL = 1e-9


class DistortionError(ValueError):
    """Invalid distortion parameters or a map that is not a distortion."""


@dataclass(frozen=True)
class LimitProfile:
    """Pointwise limit of a distortion family: a step function on [0, 1].

    ``plateaus[i]`` is the limit on the open stretch between consecutive
    thresholds (with 0 and 1 as outer ends). The value at a threshold is not
    defined and ``value`` returns NaN there.
    """

    thresholds: tuple
    plateaus: tuple

    def __post_init__(self):
        if len(self.plateaus) != len(self.thresholds) + 1:
            raise DistortionError("need one more plateau than thresholds")
        if any(b < a for a, b in zip(self.plateaus, self.plateaus[1:])):
            raise DistortionError("plateaus must be nondecreasing")
        if any(b <= a for a, b in zip(self.thresholds, self.thresholds[1:])):
            raise DistortionError("thresholds must be strictly increasing")

    def value(self, u: float) -> float:
        if u in self.thresholds:
            return math.nan
        idx = int(np.searchsorted(np.asarray(self.thresholds), u, side="right"))
        return self.plateaus[idx]

    @property
    def undefined_at(self) -> tuple:
        return self.thresholds


def _as_array(u):
    return np.asarray(u, dtype=float)


def _restore(shape_source, out):
    if np.ndim(shape_source) == 0:
        return float(np.asarray(out).reshape(()))
    return out


def _bisect_inverse(fn, u: np.ndarray, side: str, iterations: int = 64) -> np.ndarray:
    """Generalized inverse of a nondecreasing fn on [0, 1], vectorized over u."""
    lo = np.zeros_like(u)
    hi = np.ones_like(u)
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        val = fn(mid)
        if side == "left":
            go_left = val >= u
        else:
            go_left = val > u
        hi = np.where(go_left, mid, hi)
        lo = np.where(go_left, lo, mid)
    return hi if side == "left" else lo


class Distortion:
    """Concrete distortion (all parameters resolved)."""

    kind = "abstract"

    def eval(self, u):
        raise NotImplementedError

    def derivative(self, u):
        raise NotImplementedError

    def inverse_left(self, v):
        """inf{u : phi(u) >= v}."""
        arr = _as_array(v)
        out = _bisect_inverse(lambda w: _as_array(self.eval(w)), arr, "left")
        return _restore(v, out)

    def inverse_right(self, v):
        """sup{u : phi(u) <= v}."""
        arr = _as_array(v)
        out = _bisect_inverse(lambda w: _as_array(self.eval(w)), arr, "right")
        return _restore(v, out)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Draws of a variable on [0, 1] whose cdf is phi."""
        u = rng.random(n)
        return _as_array(self.inverse_left(u))

    def limit_profile(self) -> LimitProfile:
        raise DistortionError(f"{self.kind} distortion has no limit profile")

    def at(self, t: float) -> "Distortion":
        return self

    def to_spec(self) -> dict:
        raise NotImplementedError

    def check(self, grid: int = GRID_CHECK) -> None:
        """Raise DistortionError unless phi is a distortion on a ``grid``-point mesh."""
        u = np.linspace(0.0, 1.0, grid)
        try:
            v = _as_array(self.eval(u))
        except EvalError as exc:
            raise DistortionError(f"distortion could not be evaluated: {exc}") from exc
        if abs(v[0]) > MONOTONE_TOL or abs(v[-1] - 1.0) > MONOTONE_TOL:
            raise DistortionError(f"need phi(0)=0 and phi(1)=1, got {v[0]}, {v[-1]}")
        if np.any(np.diff(v) < -MONOTONE_TOL):
            raise DistortionError("distortion decreases on the check grid")
        if np.any((v < -MONOTONE_TOL) | (v > 1 + MONOTONE_TOL)):
            raise DistortionError("distortion leaves [0, 1]")


def _beta_pdf(u, a: float, b: float):
    u = _as_array(u)
    with np.errstate(divide="ignore", invalid="ignore"):
        logp = np.full(u.shape, -specfun.log_beta(a, b))
        if a != 1.0:
            logp = logp + (a - 1.0) * np.log(u)
        if b != 1.0:
            logp = logp + (b - 1.0) * np.log1p(-u)
        out = np.exp(logp)
    return np.where((u < 0) | (u > 1), 0.0, out)


@dataclass(frozen=True)
class OrderStatDistortion(Distortion):
    """cdf transform of the r-th order statistic from a sample of size alpha:
    I_u(r, alpha - r + 1). Both may be non-integers."""

    r: float
    alpha: float
    kind = "order_stat"

    def __post_init__(self):
        if not (self.alpha > 0 and 0 < self.r < self.alpha + 1):
            raise DistortionError(
                f"order statistic needs alpha > 0 and 0 < r < alpha+1 (r={self.r}, alpha={self.alpha})"
            )

    @property
    def a(self) -> float:
        return float(self.r)

    @property
    def b(self) -> float:
        return float(self.alpha - self.r + 1.0)

    def eval(self, u):
        return specfun.reg_inc_beta(np.clip(u, 0.0, 1.0), self.a, self.b)

    def derivative(self, u):
        return _restore(u, _beta_pdf(u, self.a, self.b))

    def inverse_left(self, v):
        arr = np.clip(_as_array(v), 0.0, 1.0)
        if self.b == 1.0:
            out = arr ** (1.0 / self.a)
        elif self.a == 1.0:
            out = -np.expm1(np.log1p(-arr) / self.b)
        else:
            out = _as_array(specfun.reg_inc_beta_inv(arr, self.a, self.b))
        return _restore(v, out)

    inverse_right = inverse_left

    def sample(self, rng, n):
        return rng.beta(self.a, self.b, size=n)

    def mode(self) -> float | None:
        a, b = self.a, self.b
        if a > 1 and b > 1:
            return (a - 1.0) / (a + b - 2.0)
        return None

    def limit_profile(self) -> LimitProfile:
        return LimitProfile((self.r / (self.alpha + 1.0),), (0.0, 1.0))

    def to_spec(self):
        return {"kind": "order_stat", "r": self.r, "alpha": self.alpha}


def _check_weights(w) -> tuple:
    w = tuple(float(x) for x in w)
    if not w:
        raise DistortionError("need at least one weight")
    if any(not x > 0 for x in w):
        raise DistortionError("weights must be positive")
    if abs(math.fsum(w) - 1.0) > 1e-12:
        raise DistortionError(f"weights must sum to 1 (sum {math.fsum(w)})")
    return w


@dataclass(frozen=True)
class MixtureDistortion(Distortion):
    """sum_i w_i I_u(r_i, alpha - r_i + 1) with r_1 < ... < r_s."""

    w: tuple
    r: tuple
    alpha: float
    kind = "mixture"
    components: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        w = _check_weights(self.w)
        r = tuple(float(x) for x in self.r)
        if len(r) != len(w):
            raise DistortionError("w and r must have the same length")
        if any(b <= a for a, b in zip(r, r[1:])):
            raise DistortionError("mixture ranks must be strictly increasing")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "r", r)
        object.__setattr__(
            self, "components", tuple(OrderStatDistortion(ri, self.alpha) for ri in r)
        )

    def eval(self, u):
        total = sum(wi * _as_array(c.eval(u)) for wi, c in zip(self.w, self.components))
        return _restore(u, np.clip(total, 0.0, 1.0))

    def derivative(self, u):
        total = sum(wi * _as_array(c.derivative(u)) for wi, c in zip(self.w, self.components))
        return _restore(u, total)

    def sample(self, rng, n):
        pick = rng.choice(len(self.w), size=n, p=np.asarray(self.w))
        a = np.asarray([c.a for c in self.components])[pick]
        b = np.asarray([c.b for c in self.components])[pick]
        return rng.beta(a, b)

    def limit_profile(self) -> LimitProfile:
        lam = tuple(ri / (self.alpha + 1.0) for ri in self.r)
        return LimitProfile(lam, (0.0, *np.cumsum(self.w)[:-1].tolist(), 1.0))

    def to_spec(self):
        return {"kind": "mixture", "w": list(self.w), "r": list(self.r), "alpha": self.alpha}


@dataclass(frozen=True)
class RecordDistortion(Distortion):
    """cdf transform of the n-th upper k-record: P(n, -k ln(1 - u))."""

    n: int
    k: int
    kind = "record"

    def __post_init__(self):
        for name in ("n", "k"):
            val = getattr(self, name)
            if isinstance(val, bool) or not float(val).is_integer() or val < 1:
                raise DistortionError(f"record distortion needs integer {name} >= 1 (got {val})")
            object.__setattr__(self, name, int(val))

    def eval(self, u):
        arr = np.clip(_as_array(u), 0.0, 1.0)
        with np.errstate(divide="ignore"):
            y = -self.k * np.log1p(-arr)
        out = _as_array(specfun.reg_inc_gamma_lower(float(self.n), y))
        return _restore(u, out)

    def derivative(self, u):
        arr = _as_array(u)
        n, k = self.n, self.k
        with np.errstate(divide="ignore", invalid="ignore"):
            y = -k * np.log1p(-arr)
            logd = math.log(k) - math.lgamma(n)
            if k != 1:
                logd = logd + (k - 1) * np.log1p(-arr)
            if n != 1:
                logd = logd + (n - 1) * np.log(y)
            out = np.exp(logd)
        return _restore(u, out)

    def inverse_left(self, v):
        arr = np.clip(_as_array(v), 0.0, 1.0)
        y = _as_array(specfun.reg_inc_gamma_lower_inv(float(self.n), arr))
        out = -np.expm1(-y / self.k)
        return _restore(v, out)

    inverse_right = inverse_left

    def sample(self, rng, n):
        return -np.expm1(-rng.gamma(self.n, 1.0, size=n) / self.k)

    def mode(self) -> float | None:
        if self.n > 1 and self.k > 1:
            y = (self.n - 1) * self.k / (self.k - 1)
            return -math.expm1(-y / self.k)
        return None

    def limit_profile(self) -> LimitProfile:
        # for fixed u < 1, P(n, -k ln(1-u)) -> 0 as n grows
        return LimitProfile((1.0,), (0.0, 1.0))

    def to_spec(self):
        return {"kind": "record", "n": self.n, "k": self.k}


@dataclass(frozen=True)
class IdentityDistortion(Distortion):
    kind = "identity"

    def eval(self, u):
        return _restore(u, np.clip(_as_array(u), 0.0, 1.0))

    def derivative(self, u):
        return _restore(u, np.ones_like(_as_array(u)))

    def inverse_left(self, v):
        return _restore(v, np.clip(_as_array(v), 0.0, 1.0))

    inverse_right = inverse_left

    def sample(self, rng, n):
        return rng.random(n)

    def to_spec(self):
        return {"kind": "identity"}


@dataclass(frozen=True)
class CustomDistortion(Distortion):
    """phi given as an expression; ``x`` plays the role of u."""

    text: str
    t: float = 0.0
    kind = "custom"

    def __post_init__(self):
        object.__setattr__(self, "_expr", parse(self.text))
        self.check()

    def eval(self, u):
        arr = np.clip(_as_array(u), 0.0, 1.0)
        return _restore(u, np.clip(evaluate_array(self._expr, arr, self.t), 0.0, 1.0))

    def derivative(self, u):
        arr = _as_array(u)
        h = 1e-6
        lo = np.clip(arr - h, 0.0, 1.0)
        hi = np.clip(arr + h, 0.0, 1.0)
        out = (_as_array(self.eval(hi)) - _as_array(self.eval(lo))) / (hi - lo)
        return _restore(u, out)

    def to_spec(self):
        return {"kind": "custom", "expr": self.text}


def make_order_stat(r: float, alpha: float) -> OrderStatDistortion:
    return OrderStatDistortion(float(r), float(alpha))


def make_mixture(w, r, alpha: float) -> MixtureDistortion:
    return MixtureDistortion(tuple(w), tuple(r), float(alpha))


def make_record(n: int, k: int) -> RecordDistortion:
    return RecordDistortion(n, k)


def make_custom(text: str, t: float = 0.0) -> CustomDistortion:
    return CustomDistortion(text, t)


# -- t-dependent families -------------------------------------------------

_FAMILY_KEYS = {
    "order_stat": ("r", "alpha"),
    "mixture": ("w", "alpha"),
    "record": ("n", "k"),
    "custom": ("expr",),
    "identity": (),
}


@dataclass(frozen=True)
class DistortionFamily:
    """Distortion whose parameters are coefficients in ``t``.

    For mixtures the ranks come either from ``r`` (one coefficient per
    component) or from ``lambda``, with r_i = lambda_i (alpha + 1).
    """

    spec: dict = field(hash=False)
    kind: str = field(init=False)
    coefs: dict = field(init=False, hash=False, repr=False)

    def __post_init__(self):
        spec = self.spec
        kind = spec.get("kind")
        if kind not in _FAMILY_KEYS:
            raise DistortionError(f"unknown distortion kind {kind!r}")
        for key in _FAMILY_KEYS[kind]:
            if key not in spec:
                raise DistortionError(f"{kind} distortion needs {key!r}")
        coefs = {}
        if kind == "order_stat":
            coefs = {"r": Coef.of(spec["r"]), "alpha": Coef.of(spec["alpha"])}
        elif kind == "record":
            coefs = {"n": Coef.of(spec["n"]), "k": Coef.of(spec["k"])}
        elif kind == "mixture":
            coefs["alpha"] = Coef.of(spec["alpha"])
            coefs["w"] = tuple(Coef.of(x) for x in spec["w"])
            if ("r" in spec) == ("lambda" in spec):
                raise DistortionError("mixture needs exactly one of 'r' or 'lambda'")
            if "r" in spec:
                coefs["r"] = tuple(Coef.of(x) for x in spec["r"])
            else:
                lam = tuple(float(x) for x in spec["lambda"])
                if any(b <= a for a, b in zip(lam, lam[1:])):
                    raise DistortionError("mixture thresholds lambda must be strictly increasing")
                if any(not 0.0 < x < 1.0 for x in lam):
                    raise DistortionError("mixture thresholds lambda must lie in (0, 1)")
                coefs["lambda"] = lam
        elif kind == "custom":
            parse(spec["expr"])
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "coefs", coefs)

    def at(self, t: float) -> Distortion:
        c = self.coefs
        if self.kind == "order_stat":
            return OrderStatDistortion(c["r"].at(t), c["alpha"].at(t))
        if self.kind == "record":
            n, k = c["n"].at(t), c["k"].at(t)
            return RecordDistortion(int(round(n)) if abs(n - round(n)) < 1e-9 else n,
                                    int(round(k)) if abs(k - round(k)) < 1e-9 else k)
        if self.kind == "mixture":
            alpha = c["alpha"].at(t)
            w = tuple(x.at(t) for x in c["w"])
            if "r" in c:
                r = tuple(x.at(t) for x in c["r"])
            else:
                r = tuple(lam * (alpha + 1.0) for lam in c["lambda"])
            return MixtureDistortion(w, r, alpha)
        if self.kind == "custom":
            return CustomDistortion(self.spec["expr"], t)
        return IdentityDistortion()

    def limit_profile(self) -> LimitProfile:
        if self.kind == "mixture" and "lambda" in self.coefs:
            w = [x.at(0.0) for x in self.coefs["w"]]
            return LimitProfile(self.coefs["lambda"], (0.0, *np.cumsum(w)[:-1].tolist(), 1.0))
        if self.kind == "record":
            return LimitProfile((1.0,), (0.0, 1.0))
        raise DistortionError("limit profile needs a mixture with lambda or a record family")

    def to_spec(self) -> dict:
        return dict(self.spec)


def distortion_from_spec(spec: dict):
    """Concrete Distortion when every parameter is a number, else a DistortionFamily."""
    fam = DistortionFamily(dict(spec))
    flat = []
    for c in fam.coefs.values():
        flat.extend(c if isinstance(c, tuple) else (c,))
    constant = all(c.constant for c in flat if isinstance(c, Coef))
    if constant and fam.kind != "custom":
        return fam.at(0.0)
    return fam


def _distortion_at(phi, t: float) -> Distortion:
    if callable(phi) and not isinstance(phi, (Distortion, DistortionFamily)):
        return phi(t)
    return phi.at(t)


def apply(F, phi):
    """The cdf phi(F(x)); its quantile is F^<-(phi^<-(u))."""
    from .dist import DistortedCdf

    return DistortedCdf(F, phi)


# -- sufficient conditions -----------------------------------------------

def _intervals(A0) -> list:
    ivs = A0.intervals if hasattr(A0, "intervals") else A0
    return [(float(lo), float(hi)) for lo, hi in ivs]


def image_measure(phi: Distortion, A0) -> float:
    """Lebesgue measure of phi(A0); phi maps intervals to intervals."""
    images = sorted(
        (float(phi.eval(lo)), float(phi.eval(hi))) for lo, hi in _intervals(A0)
    )
    total = 0.0
    cur_lo = cur_hi = None
    for lo, hi in images:
        if cur_hi is None or lo > cur_hi:
            if cur_hi is not None:
                total += cur_hi - cur_lo
            cur_lo, cur_hi = lo, hi
        else:
            cur_hi = max(cur_hi, hi)
    if cur_hi is not None:
        total += cur_hi - cur_lo
    return total


def sup_derivative(phi: Distortion, A0, grid: int = 2048) -> float:
    """sup of phi' over A0.

    For order statistics and records phi' is unimodal, monotone or U-shaped,
    so the sup over an interval sits at an endpoint or at the mode. Other
    kinds use a grid plus the modes of any order-statistic components.
    """
    best = 0.0
    for lo, hi in _intervals(A0):
        if hi <= lo:
            continue
        if isinstance(phi, (OrderStatDistortion, RecordDistortion)):
            cand = [lo, hi]
            m = phi.mode()
            if m is not None and lo < m < hi:
                cand.append(m)
        else:
            cand = list(np.linspace(lo, hi, grid))
            if isinstance(phi, MixtureDistortion):
                cand += [m for c in phi.components
                         if (m := c.mode()) is not None and lo < m < hi]
        vals = _as_array(phi.derivative(np.asarray(cand)))
        vals = np.where(np.isnan(vals), 0.0, vals)
        best = max(best, float(np.max(vals)))
    return best


def sufficient_ast(phi_family, A0, t_grid) -> list:
    """Per-t measure of phi_t(A0); tends to 0 when the distorted pair is ast ordered."""
    return [image_measure(_distortion_at(phi_family, t), A0) for t in t_grid]


def sufficient_l1w2(phi_family, A0, t_grid) -> list:
    """Per-t sup of phi_t' over A0."""
    return [sup_derivative(_distortion_at(phi_family, t), A0) for t in t_grid]


def mixture_precedence_bounds(w) -> tuple:
    """Three nested lower bounds on the limiting precedence probability of a mixture:
    max_i w_i sum_{j<=i} w_j >= max_i w_i^2 >= 1/s^2."""
    w = _check_weights(w)
    cum = np.cumsum(w)
    b1 = max(wi * ci for wi, ci in zip(w, cum))
    b2 = max(wi * wi for wi in w)
    b3 = 1.0 / len(w) ** 2
    return float(b1), float(b2), float(b3)


def separation(lambdas, A0) -> float:
    """min_i dist(lambda_i, A0) with A0 a union of intervals; inf for empty A0."""
    ivs = _intervals(A0)
    if not ivs:
        return math.inf
    return min(
        max(lo - lam, lam - hi, 0.0) for lam in lambdas for lo, hi in ivs
    )

