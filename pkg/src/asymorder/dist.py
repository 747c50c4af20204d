"""Cumulative distribution functions indexed by t, their generalized inverses,
expectations and samplers.

Every Cdf is evaluated at an explicit index ``t``; cdfs that do not depend on
t simply ignore it. Evaluation and both quantile forms are vectorized over
numpy arrays.

The left-continuous inverse is F^<-(u) = inf{x : F(x) >= u} and the
right-continuous inverse is F^->(u) = sup{x : F(x) <= u}.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sp

from . import specfun
from .distort import Distortion, DistortionFamily, distortion_from_spec
from .expr import (
    Coef,
    EvalError,
    affine_in_x,
    evaluate,
    evaluate_array,
    parse,
)
from .quad import DIVERGENT, integrate_improper, is_divergent

__all__ = [
    "Cdf",
    "PiecewiseCdf",
    "BuiltinCdf",
    "EmpiricalCdf",
    "DistortedCdf",
    "MixtureCdf",
    "QuantilePair",
    "CdfValidationError",
    "SpecError",
    "cdf_eval",
    "quantile",
    "expectation",
    "sample",
    "draw",
    "validate",
    "load_spec",
    "dump_spec",
    "loads",
    "dumps",
    "builtin",
]

MONOTONE_TOL = 1e-9
VALIDATION_POINTS = 4096
BISECT_CAP = 200
JUMP_TOL = 1e-12


class SpecError(ValueError):
    """Malformed distribution spec."""


class CdfValidationError(ValueError):
    """The spec parses but does not describe a cdf at the requested t."""


@dataclass(frozen=True)
class QuantilePair:
    left: float
    right: float


def _arr(x):
    return np.asarray(x, dtype=float)


def _restore(src, out):
    if np.ndim(src) == 0:
        return float(np.asarray(out).reshape(()))
    return out


def _bisect(pred, lo: np.ndarray, hi: np.ndarray, keep: str) -> np.ndarray:
    """Shrink finite brackets [lo, hi] where ``pred`` is false at lo-side and true
    at hi-side. Returns ``hi`` (keep="hi") or ``lo``."""
    lo = lo.copy()
    hi = hi.copy()
    for _ in range(BISECT_CAP):
        width = hi - lo
        active = width > np.maximum(1e-12, 4 * np.finfo(float).eps * np.maximum(np.abs(lo), np.abs(hi)))
        if not active.any():
            break
        mid = np.where(active, 0.5 * (lo + hi), lo)
        ok = pred(mid)
        hi = np.where(active & ok, mid, hi)
        lo = np.where(active & ~ok, mid, lo)
    return hi if keep == "hi" else lo


def _expand(fn, start: np.ndarray, direction: float, target_ok) -> np.ndarray:
    """Step away from ``start`` with doubling strides until ``target_ok(fn(x))``.
    Entries that never satisfy it end at +-inf."""
    x = start.copy()
    step = np.maximum(1.0, np.abs(start))
    done = target_ok(fn(x))
    for _ in range(1100):
        if done.all():
            break
        x = np.where(done, x, x + direction * step)
        x = np.where(np.isfinite(x), x, direction * np.inf)
        finite = np.isfinite(x)
        vals = np.where(finite, fn(np.where(finite, x, 0.0)), np.nan)
        done = done | ~finite | target_ok(vals)
        step = step * 2.0
    return x


class Cdf:
    """Base class. Subclasses provide ``_cdf`` for finite x and ``_quantile``."""

    kind = "abstract"

    # -- evaluation ---------------------------------------------------------
    def cdf(self, x, t: float = 0.0):
        xa = _arr(x)
        out = np.empty(xa.shape)
        fin = np.isfinite(xa)
        out[xa == -np.inf] = 0.0
        out[xa == np.inf] = 1.0
        if np.isnan(xa).any():
            raise ValueError("cdf argument is NaN")
        if fin.any():
            out[fin] = np.clip(self._cdf(xa[fin], t), 0.0, 1.0)
        return _restore(x, out)

    def _cdf(self, x: np.ndarray, t: float) -> np.ndarray:
        raise NotImplementedError

    def quantile_left(self, u, t: float = 0.0):
        """inf{x : F(x) >= u}; -inf at u = 0."""
        ua = _arr(u)
        out = np.full(ua.shape, -np.inf)
        pos = ua > 0
        if pos.any():
            out[pos] = self._quantile(np.minimum(ua[pos], 1.0), t, "left")
        return _restore(u, out)

    def quantile_right(self, u, t: float = 0.0):
        """sup{x : F(x) <= u}; +inf at u = 1."""
        ua = _arr(u)
        out = np.full(ua.shape, np.inf)
        below = ua < 1
        if below.any():
            out[below] = self._quantile(np.maximum(ua[below], 0.0), t, "right")
        return _restore(u, out)

    def _quantile(self, u: np.ndarray, t: float, side: str) -> np.ndarray:
        raise NotImplementedError

    def quantile_upper(self, s, t: float = 0.0, side: str = "left"):
        """Quantile at level 1 - s. Accurate for tiny s where 1 - s would round to 1."""
        sa = _arr(s)
        out = np.empty(sa.shape)
        pos = sa > 0
        if pos.any():
            out[pos] = self._quantile_upper(np.minimum(sa[pos], 1.0), t, side)
        if (~pos).any():
            edge = self.quantile_left if side == "left" else self.quantile_right
            out[~pos] = edge(1.0, t)
        return _restore(s, out)

    def _quantile_upper(self, s: np.ndarray, t: float, side: str) -> np.ndarray:
        """Quantile at level 1 - s for s in (0, 1]. Families with closed-form
        tails override this to keep precision when s is tiny."""
        return self._quantile(1.0 - s, t, side)

    # -- structure ---------------------------------------------------------
    def breakpoints(self, t: float = 0.0) -> np.ndarray:
        """x-locations of kinks and jumps."""
        return np.empty(0)

    def jumps(self, t: float = 0.0) -> list:
        """(location, mass) of every atom."""
        return []

    def critical_u(self, t: float = 0.0) -> np.ndarray:
        """u-levels where a quantile may kink or jump (F values at breakpoints,
        both one-sided)."""
        return np.empty(0)

    def has_jumps(self, t: float = 0.0) -> bool:
        return bool(self.jumps(t))

    def validate(self, t: float = 0.0) -> None:
        _generic_validate(self, t)

    def to_spec(self) -> dict:
        raise NotImplementedError

    def __neg__(self) -> "Cdf":
        return NegatedCdf(self)


def _generic_validate(F: Cdf, t: float) -> None:
    """Monotonicity and limits on a probe grid spread over the quantile range."""
    u = np.concatenate([np.logspace(-12, -1, 64), np.linspace(0.01, 0.99, VALIDATION_POINTS),
                        1 - np.logspace(-12, -1, 64)])
    try:
        xs = np.unique(np.concatenate([F.quantile_left(u, t), F.breakpoints(t)]))
        xs = xs[np.isfinite(xs)]
        vals = _arr(F.cdf(xs, t))
    except EvalError as exc:
        raise CdfValidationError(f"evaluation failed at t={t}: {exc}") from exc
    if np.any(np.diff(vals) < -MONOTONE_TOL):
        raise CdfValidationError(f"cdf decreases at t={t}")


# -- piecewise expression cdfs ---------------------------------------------

_NEG_INF_TEXT = ("-inf", "-infinity")
_POS_INF_TEXT = ("inf", "+inf", "infinity")


def _break_coef(raw, which: str):
    if isinstance(raw, str) and raw.strip().lower() in (_NEG_INF_TEXT if which == "from" else _POS_INF_TEXT):
        return None
    return Coef.of(raw)


@dataclass(frozen=True)
class Segment:
    lower: object  # Coef or None for -inf
    upper: object  # Coef or None for +inf
    body_text: str
    body: object
    affine: object  # (intercept, slope) or None


class PiecewiseCdf(Cdf):
    """Right-continuous cdf given segment by segment.

    Segment i covers [b_i, b_{i+1}); the first starts at -inf and the last ends
    at +inf. A segment may be empty (b_i = b_{i+1}) at some t. Bodies are expressions in x and t; breakpoints are expressions in
    t. A jump appears wherever a body's value at its left end exceeds the
    left limit of the previous body.
    """

    kind = "piecewise"

    def __init__(self, segments, name: str = ""):
        if not segments:
            raise SpecError("piecewise cdf needs at least one segment")
        segs = []
        for i, seg in enumerate(segments):
            try:
                lower = _break_coef(seg["from"], "from")
                upper = _break_coef(seg["to"], "to")
                body = parse(seg["cdf"])
            except KeyError as exc:
                raise SpecError(f"segment {i} lacks {exc.args[0]!r}") from exc
            segs.append(Segment(lower, upper, seg["cdf"], body, affine_in_x(body)))
        if segs[0].lower is not None:
            raise SpecError("first segment must start at -inf")
        if segs[-1].upper is not None:
            raise SpecError("last segment must end at inf")
        for i, (a, b) in enumerate(zip(segs, segs[1:])):
            if a.upper is None or b.lower is None or a.upper.expr != b.lower.expr:
                raise SpecError(f"segments {i} and {i + 1} are not contiguous")
        self.segments = tuple(segs)
        self._raw = [dict(s) for s in segments]
        self.name = name
        self._cache = {}

    # structure at t
    def _layout(self, t: float):
        key = float(t)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        m = len(self.segments)
        b = np.empty(m + 1)
        b[0], b[m] = -np.inf, np.inf
        for i in range(1, m):
            b[i] = self.segments[i].lower.at(t)
        if np.any(np.diff(b) < 0):
            raise CdfValidationError(f"breakpoints decrease at t={t}: {b[1:-1]}")
        L = np.empty(m)
        R = np.empty(m)
        L[0] = 0.0
        R[m - 1] = 1.0
        for i, seg in enumerate(self.segments):
            if b[i] == b[i + 1]:
                # empty at this t: carry the previous left limit through
                L[i] = R[i] = R[i - 1]
                continue
            if i > 0:
                L[i] = self._body_at(seg, b[i], t, inward=1.0)
            if i < m - 1:
                R[i] = self._body_at(seg, b[i + 1], t, inward=-1.0)
        L = np.clip(L, 0.0, 1.0)
        R = np.clip(R, 0.0, 1.0)
        out = (b, L, R)
        if len(self._cache) > 256:
            self._cache.clear()
        self._cache[key] = out
        return out

    @staticmethod
    def _body_at(seg, x, t, inward):
        try:
            return evaluate(seg.body, x, t)
        except EvalError:
            nudged = x + inward * max(1e-12, 1e-12 * abs(x))
            return evaluate(seg.body, nudged, t)

    def breaks(self, t: float = 0.0) -> np.ndarray:
        return self._layout(t)[0][1:-1].copy()

    def breakpoints(self, t: float = 0.0) -> np.ndarray:
        return self.breaks(t)

    def _cdf(self, x, t):
        b, _, _ = self._layout(t)
        idx = np.searchsorted(b, x, side="right") - 1
        out = np.empty(x.shape)
        for i in np.unique(idx):
            sel = idx == i
            out[sel] = evaluate_array(self.segments[i].body, x[sel], t)
        return out

    def jumps(self, t: float = 0.0) -> list:
        b, L, R = self._layout(t)
        out = []
        for i in range(1, len(self.segments)):
            mass = L[i] - R[i - 1]
            if mass > JUMP_TOL:
                out.append((float(b[i]), float(mass)))
        return out

    def critical_u(self, t: float = 0.0) -> np.ndarray:
        _, L, R = self._layout(t)
        vals = np.concatenate([L[1:], R[:-1]])
        return np.unique(vals[(vals > 0) & (vals < 1)])

    def _solve_segment(self, i, u, t, side):
        b, _, _ = self._layout(t)
        seg = self.segments[i]
        lo_b, hi_b = b[i], b[i + 1]
        if seg.affine is not None:
            a0 = evaluate(seg.affine[0], 0.0, t)
            s = evaluate(seg.affine[1], 0.0, t)
            if s > 0:
                return np.clip((u - a0) / s, lo_b, hi_b)
        fn = lambda x: evaluate_array(seg.body, x, t)  # noqa: E731
        if side == "left":
            below, above = (lambda v: v < u), (lambda v: v >= u)
        else:
            below, above = (lambda v: v <= u), (lambda v: v > u)
        lo = np.full(u.shape, lo_b)
        hi = np.full(u.shape, hi_b)
        if not np.isfinite(lo_b):
            anchor = hi_b - 1.0 if np.isfinite(hi_b) else 0.0
            lo = _expand(fn, np.full(u.shape, anchor), -1.0, below)
        if not np.isfinite(hi_b):
            anchor = lo_b + 1.0 if np.isfinite(lo_b) else 0.0
            hi = _expand(fn, np.full(u.shape, anchor), 1.0, above)
        result = np.where(np.isfinite(hi), -np.inf, np.inf)
        ok = np.isfinite(lo) & np.isfinite(hi)
        if ok.any():
            level = u[ok]
            if side == "left":
                pred = lambda x: fn(x) >= level  # noqa: E731
            else:
                pred = lambda x: fn(x) > level  # noqa: E731
            result[ok] = _bisect(pred, lo[ok], hi[ok], "hi" if side == "left" else "lo")
        return result

    def _quantile(self, u, t, side):
        b, L, R = self._layout(t)
        m = len(self.segments)
        out = np.empty(u.shape)
        if side == "left":
            seg_idx = np.minimum(np.searchsorted(R, u, side="left"), m - 1)
            at_left_edge = L[seg_idx] >= u
            out[at_left_edge] = b[seg_idx[at_left_edge]]
        else:
            seg_idx = np.maximum(np.searchsorted(L, u, side="right") - 1, 0)
            at_right_edge = R[seg_idx] <= u
            out[at_right_edge] = b[seg_idx[at_right_edge] + 1]
            at_left_edge = at_right_edge
        todo = ~at_left_edge
        for i in np.unique(seg_idx[todo]):
            sel = todo & (seg_idx == i)
            out[sel] = self._solve_segment(int(i), u[sel], t, side)
        return out

    def validate(self, t: float = 0.0) -> None:
        b, L, R = self._layout(t)
        seq = []
        for i, seg in enumerate(self.segments):
            lo, hi = b[i], b[i + 1]
            if lo == hi:
                continue
            if np.isfinite(lo) and np.isfinite(hi):
                xs = np.linspace(lo, hi, VALIDATION_POINTS + 1)[:-1]
            elif np.isfinite(hi):
                xs = hi - np.logspace(-6, 12, VALIDATION_POINTS)[::-1]
            elif np.isfinite(lo):
                xs = lo + np.logspace(-6, 12, VALIDATION_POINTS)
            else:
                xs = np.concatenate([-np.logspace(12, -6, VALIDATION_POINTS // 2),
                                     np.logspace(-6, 12, VALIDATION_POINTS // 2)])
            try:
                vals = evaluate_array(seg.body, xs, t)
            except EvalError:
                # tolerate bodies that overflow only in the far tails
                vals = np.array([self._safe_eval(seg, x, t) for x in xs])
            seq.append(vals)
            if i < len(self.segments) - 1:
                seq.append(np.array([R[i]]))
        allv = np.concatenate(seq)
        fin = allv[np.isfinite(allv)]
        if np.any((fin < -MONOTONE_TOL) | (fin > 1 + MONOTONE_TOL)):
            raise CdfValidationError(f"cdf leaves [0, 1] at t={t}")
        if np.any(np.diff(fin) < -MONOTONE_TOL):
            raise CdfValidationError(f"cdf decreases at t={t}")
        if fin[0] > 1e-6:
            raise CdfValidationError(f"cdf does not tend to 0 on the left at t={t}")
        if fin[-1] < 1 - 1e-6:
            raise CdfValidationError(f"cdf does not tend to 1 on the right at t={t}")

    @staticmethod
    def _safe_eval(seg, x, t):
        try:
            return evaluate(seg.body, x, t)
        except EvalError:
            return math.nan

    def to_spec(self) -> dict:
        spec = {"kind": "piecewise", "segments": [dict(s) for s in self._raw]}
        if self.name:
            spec["name"] = self.name
        return spec


# -- builtin families ------------------------------------------------------

_BUILTIN_PARAMS = {
    "normal": ("mu", "sigma"),
    "cauchy": ("x0", "gamma"),
    "uniform": ("a", "b"),
    "exponential": ("rate",),
    "degenerate": ("c",),
    "logistic": ("mu", "s"),
}


def _std_cauchy_ppf(u):
    # cotangent forms keep relative precision in both tails
    lower = u < 0.5
    out = np.empty(u.shape)
    with np.errstate(divide="ignore"):
        out[lower] = -1.0 / np.tan(np.pi * u[lower])
        out[~lower] = 1.0 / np.tan(np.pi * (1.0 - u[~lower]))
    out[u == 0.5] = 0.0
    return out


class BuiltinCdf(Cdf):
    """Closed-form families whose parameters may be coefficients in t."""

    kind = "builtin"

    def __init__(self, family: str, **params):
        if family not in _BUILTIN_PARAMS:
            raise SpecError(f"unknown builtin family {family!r}; known: {sorted(_BUILTIN_PARAMS)}")
        names = _BUILTIN_PARAMS[family]
        if set(params) != set(names):
            raise SpecError(f"{family} needs parameters {names}, got {sorted(params)}")
        self.family = family
        self._raw = {k: params[k] for k in names}
        self.coefs = {k: Coef.of(v) for k, v in self._raw.items()}

    def params(self, t: float) -> dict:
        p = {k: c.at(t) for k, c in self.coefs.items()}
        fam = self.family
        if fam in ("normal", "cauchy", "logistic"):
            scale = p["sigma" if fam == "normal" else "gamma" if fam == "cauchy" else "s"]
            if not scale > 0:
                raise CdfValidationError(f"{fam} scale must be positive at t={t} (got {scale})")
        elif fam == "uniform" and not p["a"] < p["b"]:
            raise CdfValidationError(f"uniform needs a < b at t={t}")
        elif fam == "exponential" and not p["rate"] > 0:
            raise CdfValidationError(f"exponential rate must be positive at t={t}")
        return p

    def _cdf(self, x, t):
        p = self.params(t)
        fam = self.family
        if fam == "normal":
            return sp.ndtr((x - p["mu"]) / p["sigma"])
        if fam == "cauchy":
            z = (x - p["x0"]) / p["gamma"]
            with np.errstate(divide="ignore"):
                left = np.arctan(-1.0 / z) / np.pi
                right = 1.0 - np.arctan(1.0 / z) / np.pi
            return np.where(z < 0, left, np.where(z > 0, right, 0.5))
        if fam == "uniform":
            return np.clip((x - p["a"]) / (p["b"] - p["a"]), 0.0, 1.0)
        if fam == "exponential":
            return np.where(x < 0, 0.0, -np.expm1(-p["rate"] * np.maximum(x, 0.0)))
        if fam == "degenerate":
            return np.where(x < p["c"], 0.0, 1.0)
        if fam == "logistic":
            return sp.expit((x - p["mu"]) / p["s"])
        raise AssertionError(fam)

    def _quantile(self, u, t, side):
        p = self.params(t)
        fam = self.family
        with np.errstate(divide="ignore"):
            if fam == "normal":
                return p["mu"] + p["sigma"] * sp.ndtri(u)
            if fam == "cauchy":
                return p["x0"] + p["gamma"] * _std_cauchy_ppf(u)
            if fam == "uniform":
                return p["a"] + (p["b"] - p["a"]) * u
            if fam == "exponential":
                return -np.log1p(-u) / p["rate"]
            if fam == "degenerate":
                return np.full(u.shape, p["c"])
            if fam == "logistic":
                return p["mu"] + p["s"] * sp.logit(u)
        raise AssertionError(fam)

    def _quantile_upper(self, s, t, side):
        p = self.params(t)
        fam = self.family
        with np.errstate(divide="ignore"):
            if fam == "normal":
                return p["mu"] - p["sigma"] * sp.ndtri(s)
            if fam == "cauchy":
                return p["x0"] - p["gamma"] * _std_cauchy_ppf(s)
            if fam == "uniform":
                return p["b"] - (p["b"] - p["a"]) * s
            if fam == "exponential":
                return -np.log(s) / p["rate"]
            if fam == "degenerate":
                return np.full(s.shape, p["c"])
            if fam == "logistic":
                return p["mu"] - p["s"] * sp.logit(s)
        raise AssertionError(fam)

    def breakpoints(self, t=0.0):
        p = self.params(t)
        if self.family == "uniform":
            return np.array([p["a"], p["b"]])
        if self.family == "exponential":
            return np.array([0.0])
        if self.family == "degenerate":
            return np.array([p["c"]])
        return np.empty(0)

    def jumps(self, t=0.0):
        if self.family == "degenerate":
            return [(self.params(t)["c"], 1.0)]
        return []

    def validate(self, t=0.0):
        self.params(t)

    def to_spec(self):
        return {"kind": "builtin", "family": self.family, **self._raw}

    def __repr__(self):
        inner = ", ".join(f"{k}={v!r}" for k, v in self._raw.items())
        return f"{self.family}({inner})"


def builtin(family: str, *args, **kwargs) -> BuiltinCdf:
    """``builtin("normal", 0, 1)`` or with keyword parameters."""
    names = _BUILTIN_PARAMS.get(family)
    if names is None:
        raise SpecError(f"unknown builtin family {family!r}")
    params = dict(zip(names, args))
    params.update(kwargs)
    return BuiltinCdf(family, **params)


# -- empirical step cdfs ---------------------------------------------------

class EmpiricalCdf(Cdf):
    kind = "empirical"

    def __init__(self, sample):
        s = np.sort(_arr(sample).ravel())
        if s.size == 0 or not np.all(np.isfinite(s)):
            raise SpecError("empirical cdf needs a nonempty finite sample")
        self.sample_values = s
        self._raw = list(map(float, np.asarray(sample, dtype=float).ravel()))

    def _cdf(self, x, t):
        return np.searchsorted(self.sample_values, x, side="right") / self.sample_values.size

    def _quantile(self, u, t, side):
        s = self.sample_values
        n = s.size
        if side == "left":
            k = np.clip(np.ceil(u * n - 1e-9), 1, n).astype(int)
            return s[k - 1]
        k = np.floor(u * n + 1e-9).astype(int)
        return np.where(k < n, s[np.minimum(k, n - 1)], np.inf)

    def breakpoints(self, t=0.0):
        return np.unique(self.sample_values)

    def jumps(self, t=0.0):
        vals, counts = np.unique(self.sample_values, return_counts=True)
        n = self.sample_values.size
        return [(float(v), c / n) for v, c in zip(vals, counts)]

    def critical_u(self, t=0.0):
        _, counts = np.unique(self.sample_values, return_counts=True)
        cum = np.cumsum(counts)[:-1] / self.sample_values.size
        return cum

    def validate(self, t=0.0):
        pass

    def to_spec(self):
        return {"kind": "empirical", "sample": list(self._raw)}


# -- compositions ----------------------------------------------------------

class DistortedCdf(Cdf):
    """phi(F(x)); quantiles route through F^<-(phi^<-(u))."""

    kind = "distorted"

    def __init__(self, base: Cdf, phi):
        if not isinstance(phi, (Distortion, DistortionFamily)):
            raise SpecError("distortion must be a Distortion or DistortionFamily")
        self.base = base
        self.phi = phi

    def distortion(self, t: float):
        return self.phi.at(t)

    def _cdf(self, x, t):
        return _arr(self.distortion(t).eval(_arr(self.base.cdf(x, t))))

    def _quantile(self, u, t, side):
        phi = self.distortion(t)
        if side == "left":
            return _arr(self.base.quantile_left(_arr(phi.inverse_left(u)), t))
        return _arr(self.base.quantile_right(_arr(phi.inverse_right(u)), t))

    def breakpoints(self, t=0.0):
        return self.base.breakpoints(t)

    def jumps(self, t=0.0):
        phi = self.distortion(t)
        out = []
        for loc, mass in self.base.jumps(t):
            top = float(self.base.cdf(loc, t))
            m = float(phi.eval(top)) - float(phi.eval(max(top - mass, 0.0)))
            if m > JUMP_TOL:
                out.append((loc, m))
        return out

    def critical_u(self, t=0.0):
        cu = self.base.critical_u(t)
        if cu.size == 0:
            return cu
        return np.unique(_arr(self.distortion(t).eval(cu)))

    def validate(self, t=0.0):
        self.base.validate(t)
        phi = self.distortion(t)
        phi.check()

    def to_spec(self):
        return {"kind": "distorted", "base": self.base.to_spec(), "distortion": self.phi.to_spec()}


class MixtureCdf(Cdf):
    """sum_i w_i F_i."""

    kind = "mixture"

    def __init__(self, weights, components):
        w = tuple(float(x) for x in weights)
        if len(w) != len(components) or not w:
            raise SpecError("mixture needs one weight per component")
        if any(not x > 0 for x in w):
            raise SpecError("mixture weights must be positive")
        if abs(math.fsum(w) - 1.0) > 1e-12:
            raise SpecError(f"mixture weights must sum to 1 (sum {math.fsum(w)})")
        self.weights = w
        self.components = tuple(components)
        self._raw_weights = list(weights)

    def _cdf(self, x, t):
        return sum(w * _arr(F.cdf(x, t)) for w, F in zip(self.weights, self.components))

    def _quantile(self, u, t, side):
        qs = np.stack([
            _arr(F.quantile_left(u, t) if side == "left" else F.quantile_right(u, t))
            for F in self.components
        ])
        lo = qs.min(axis=0)
        hi = qs.max(axis=0)
        fn = lambda x: _arr(self.cdf(x, t))  # noqa: E731
        if side == "left":
            lo = np.where(np.isfinite(lo), lo, _expand(fn, np.zeros(u.shape), -1.0, lambda v: v < u))
            hi = np.where(np.isfinite(hi), hi, _expand(fn, np.zeros(u.shape), 1.0, lambda v: v >= u))
        else:
            lo = np.where(np.isfinite(lo), lo, _expand(fn, np.zeros(u.shape), -1.0, lambda v: v <= u))
            hi = np.where(np.isfinite(hi), hi, _expand(fn, np.zeros(u.shape), 1.0, lambda v: v > u))
        out = np.empty(u.shape)
        ok = np.isfinite(lo) & np.isfinite(hi)
        out[~ok] = np.where(np.isfinite(lo[~ok]), hi[~ok], lo[~ok])
        if ok.any():
            uu = u[ok]
            if side == "left":
                exact = _arr(self.cdf(lo[ok], t)) >= uu
                res = self._bisect_levels(lo[ok], hi[ok], uu, t, "left")
                out[ok] = np.where(exact, lo[ok], res)
            else:
                exact = _arr(self.cdf(hi[ok], t)) <= uu
                res = self._bisect_levels(lo[ok], hi[ok], uu, t, "right")
                out[ok] = np.where(exact, hi[ok], res)
        return out

    def _bisect_levels(self, lo, hi, u, t, side):
        lo = lo.copy()
        hi = hi.copy()
        for _ in range(BISECT_CAP):
            width = hi - lo
            active = width > np.maximum(1e-12, 4 * np.finfo(float).eps * np.maximum(np.abs(lo), np.abs(hi)))
            if not active.any():
                break
            mid = np.where(active, 0.5 * (lo + hi), lo)
            val = _arr(self.cdf(mid, t))
            ok = val >= u if side == "left" else val > u
            hi = np.where(active & ok, mid, hi)
            lo = np.where(active & ~ok, mid, lo)
        return hi if side == "left" else lo

    def breakpoints(self, t=0.0):
        parts = [F.breakpoints(t) for F in self.components]
        return np.unique(np.concatenate(parts)) if parts else np.empty(0)

    def jumps(self, t=0.0):
        acc = {}
        for w, F in zip(self.weights, self.components):
            for loc, mass in F.jumps(t):
                acc[loc] = acc.get(loc, 0.0) + w * mass
        return sorted((k, v) for k, v in acc.items() if v > JUMP_TOL)

    def critical_u(self, t=0.0):
        bp = self.breakpoints(t)
        if bp.size == 0:
            return np.empty(0)
        vals = _arr(self.cdf(bp, t))
        jump = dict(self.jumps(t))
        left = np.array([v - jump.get(float(b), 0.0) for b, v in zip(bp, vals)])
        cu = np.concatenate([vals, left])
        return np.unique(cu[(cu > 0) & (cu < 1)])

    def validate(self, t=0.0):
        for F in self.components:
            F.validate(t)

    def to_spec(self):
        return {"kind": "mixture", "weights": list(self._raw_weights),
                "components": [F.to_spec() for F in self.components]}


class NegatedCdf(Cdf):
    """Law of -X: F_{-X}(x) = 1 - F_X((-x)-)."""

    kind = "negated"

    def __init__(self, base: Cdf):
        self.base = base

    def _cdf(self, x, t):
        # P(-X <= x) = P(X >= -x) = 1 - F(-x) + P(X = -x)
        out = 1.0 - _arr(self.base.cdf(-x, t))
        for loc, mass in self.base.jumps(t):
            out = out + np.where(-x == loc, mass, 0.0)
        return out

    def _quantile(self, u, t, side):
        # F_{-X}^<-(u) = -F_X^->(1 - u) and F_{-X}^->(u) = -F_X^<-(1 - u)
        other = "right" if side == "left" else "left"
        out = np.empty(u.shape)
        top = u == 0.0
        out[top] = np.inf if side == "right" else -np.inf
        if (~top).any():
            out[~top] = -_arr(self.base._quantile_upper(u[~top], t, other))
        return out

    def _quantile_upper(self, s, t, side):
        other = "right" if side == "left" else "left"
        return -_arr(self.base._quantile(s, t, other))

    def breakpoints(self, t=0.0):
        return np.sort(-self.base.breakpoints(t))

    def jumps(self, t=0.0):
        return sorted((-loc, m) for loc, m in self.base.jumps(t))

    def critical_u(self, t=0.0):
        return np.unique(1.0 - self.base.critical_u(t))

    def validate(self, t=0.0):
        self.base.validate(t)

    def to_spec(self):
        return {"kind": "negated", "base": self.base.to_spec()}


# -- operations ------------------------------------------------------------

def cdf_eval(F: Cdf, x, t: float = 0.0):
    return F.cdf(x, t)


def quantile(F: Cdf, u: float, t: float = 0.0) -> QuantilePair:
    if not 0.0 < u < 1.0:
        raise specfun.DomainError(f"quantile needs u in (0, 1) (got {u})")
    return QuantilePair(float(F.quantile_left(u, t)), float(F.quantile_right(u, t)))


def validate(F: Cdf, t: float = 0.0) -> None:
    F.validate(t)


def expectation(F: Cdf, t: float = 0.0):
    """E X as the integral of F^<-(u) over (0, 1); DIVERGENT when either tail
    is not integrable."""
    fn = lambda u: _arr(F.quantile_left(u, t))  # noqa: E731
    pts = [p for p in F.critical_u(t) if 0 < p < 1]
    lower = integrate_improper(fn, 0.0, 0.5, singular_a=True, singular_b=False, points=pts)
    upper = integrate_improper(fn, 0.5, 1.0, singular_a=False, singular_b=True, points=pts)
    if is_divergent(lower.value) or is_divergent(upper.value):
        return DIVERGENT
    return float(lower.value + upper.value)


def sample(F: Cdf, seed: int, n: int, t: float = 0.0) -> np.ndarray:
    """n draws of F from a seeded generator.

    Inverse transform F^<-(U). For distorted cdfs the uniform is replaced by a
    draw from phi itself (beta, beta mixture, gamma transform), which has the
    same law as phi^<-(U) and avoids inverting phi per draw.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    return draw(F, rng, n, t)


_TINY = 2.0 ** -54


def draw(F: Cdf, rng: np.random.Generator, n: int, t: float = 0.0) -> np.ndarray:
    """n draws of F from an existing generator (see ``sample``)."""
    if isinstance(F, DistortedCdf):
        v = np.clip(F.distortion(t).sample(rng, n), _TINY, 1.0 - _TINY)
        return _arr(F.base.quantile_left(v, t))
    if isinstance(F, MixtureCdf):
        pick = rng.choice(len(F.weights), size=n, p=np.asarray(F.weights))
        out = np.empty(n)
        for i, comp in enumerate(F.components):
            sel = pick == i
            if sel.any():
                out[sel] = draw(comp, rng, int(sel.sum()), t)
        return out
    u = np.clip(rng.random(n), _TINY, 1.0 - _TINY)
    return _arr(F.quantile_left(u, t))


# -- spec JSON -------------------------------------------------------------

def load_spec(spec: dict) -> Cdf:
    """Build a Cdf from its JSON-compatible dict."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise SpecError("distribution spec must be an object with a 'kind'")
    kind = spec["kind"]
    if kind == "piecewise":
        return PiecewiseCdf(spec.get("segments", []), name=spec.get("name", ""))
    if kind == "builtin":
        params = {k: v for k, v in spec.items() if k not in ("kind", "family")}
        return BuiltinCdf(spec.get("family"), **params)
    if kind == "empirical":
        return EmpiricalCdf(spec.get("sample", []))
    if kind == "distorted":
        return DistortedCdf(load_spec(spec["base"]), distortion_from_spec(spec["distortion"]))
    if kind == "mixture":
        return MixtureCdf(spec["weights"], [load_spec(c) for c in spec["components"]])
    if kind == "negated":
        return NegatedCdf(load_spec(spec["base"]))
    raise SpecError(f"unknown distribution kind {kind!r}")


def dump_spec(F: Cdf) -> dict:
    return F.to_spec()


def loads(text: str) -> Cdf:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"invalid JSON: {exc}") from exc
    return load_spec(data)


def dumps(F: Cdf) -> str:
    return json.dumps(F.to_spec(), indent=2, sort_keys=True)
