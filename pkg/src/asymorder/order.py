"""Order diagnostics for a pair of cdfs at a fixed index t.

* violation set A0 = {u in (0,1) : F_X^<-(u) > F_Y^<-(u)} and its measure
* partial L1 and W_p distances, integrals of |F_X^<- - F_Y^<-| (to the p-th
  power) over A0
* precedence probability P(X <= Y) for independent X and Y

Everything is computed in quantile space; the x-space form of the partial L1
distance is kept as a cross-check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dist import Cdf, draw
from .quad import DIVERGENT, integrate, integrate_improper, is_divergent

__all__ = [
    "ViolationSet",
    "PartialDistances",
    "PreconditionError",
    "MODES",
    "violation_set",
    "violation_mass",
    "partial_distances",
    "l1_partial_xspace",
    "precedence_prob",
    "precedence_prob_coupled",
    "independent_sampler",
]

TIE_TOL = 1e-9
GRID_SIZE = 4096
REFINE_TOL = 1e-11
XSPACE_AGREEMENT = 1e-5

MODES = {
    "left/left": ("left", "left"),
    "left/right": ("left", "right"),
    "right/right": ("right", "right"),
    "right/left": ("right", "left"),
    "←/←": ("left", "left"),
    "←/→": ("left", "right"),
    "→/→": ("right", "right"),
    "→/←": ("right", "left"),
}


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class ViolationSet:
    intervals: tuple
    measure: float
    mode: str = "left/left"

    @classmethod
    def from_intervals(cls, intervals, mode: str = "left/left") -> "ViolationSet":
        ivs = tuple((float(a), float(b)) for a, b in intervals)
        return cls(ivs, math.fsum(b - a for a, b in ivs), mode)

    @property
    def empty(self) -> bool:
        return not self.intervals


@dataclass(frozen=True)
class PartialDistances:
    l1_partial: object
    wp_partial: object
    p: float = 2.0
    l1_xspace: object = None
    flags: tuple = field(default=())


def _q(F: Cdf, side: str, t: float):
    if side == "left":
        return lambda u: np.asarray(F.quantile_left(u, t), dtype=float)
    return lambda u: np.asarray(F.quantile_right(u, t), dtype=float)


def _difference(F_X, F_Y, t, mode):
    sx, sy = MODES[mode]
    qx, qy = _q(F_X, sx, t), _q(F_Y, sy, t)

    def d(u):
        a, b = qx(u), qy(u)
        with np.errstate(invalid="ignore"):
            out = a - b
        # equal infinities count as a tie
        return np.where(np.isnan(out), 0.0, out)

    return d


def scan_grid(F_X: Cdf, F_Y: Cdf, t: float, grid_size: int = GRID_SIZE,
              extra=()) -> np.ndarray:
    """u-points for crossing detection: a uniform mesh, decades toward both
    ends, the levels where either quantile kinks or jumps, and midpoints."""
    uniform = (np.arange(grid_size) + 0.5) / grid_size
    decades = 10.0 ** -np.arange(4, 13)
    crit = np.concatenate([F_X.critical_u(t), F_Y.critical_u(t), np.asarray(extra, float)])
    crit = crit[(crit > 0) & (crit < 1)]
    pts = np.unique(np.concatenate([uniform, decades, 1 - decades, crit]))
    mids = 0.5 * (pts[:-1] + pts[1:])
    return np.unique(np.concatenate([pts, mids]))


def _refine(inside, out_pts, in_pts):
    """Bisect between an outside and an inside point toward the boundary."""
    a = np.asarray(out_pts, float).copy()
    b = np.asarray(in_pts, float).copy()
    for _ in range(60):
        if np.all(np.abs(b - a) <= REFINE_TOL):
            break
        mid = 0.5 * (a + b)
        ins = inside(mid)
        b = np.where(ins, mid, b)
        a = np.where(ins, a, mid)
    return 0.5 * (a + b)


def violation_set(F_X: Cdf, F_Y: Cdf, t: float = 0.0, mode: str = "left/left",
                  grid_size: int = GRID_SIZE, tie_tol: float = TIE_TOL) -> ViolationSet:
    """Intervals of u where the chosen X quantile exceeds the Y quantile by more
    than ``tie_tol``. Crossings narrower than the scan spacing can be missed."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; use one of {sorted(MODES)}")
    d = _difference(F_X, F_Y, t, mode)
    inside = lambda u: d(u) > tie_tol  # noqa: E731
    u = scan_grid(F_X, F_Y, t, grid_size)
    ins = inside(u)
    if not ins.any():
        return ViolationSet((), 0.0, mode)
    edges = np.diff(ins.astype(np.int8))
    starts = list(np.flatnonzero(edges == 1) + 1)
    ends = list(np.flatnonzero(edges == -1))
    if ins[0]:
        starts.insert(0, 0)
    if ins[-1]:
        ends.append(len(u) - 1)
    starts = np.asarray(starts)
    ends = np.asarray(ends)

    lo = np.zeros(len(starts))
    inner = starts > 0
    if inner.any():
        lo[inner] = _refine(inside, u[starts[inner] - 1], u[starts[inner]])
    hi = np.ones(len(ends))
    inner = ends < len(u) - 1
    if inner.any():
        hi[inner] = _refine(inside, u[ends[inner] + 1], u[ends[inner]])

    intervals = []
    for a, b in zip(lo, hi):
        if b <= a:
            continue
        if intervals and a <= intervals[-1][1]:
            intervals[-1] = (intervals[-1][0], max(b, intervals[-1][1]))
        else:
            intervals.append((float(a), float(b)))
    return ViolationSet.from_intervals(intervals, mode)


def violation_mass(F_X: Cdf, F_Y: Cdf, t: float = 0.0, tol: float = 1e-12) -> tuple:
    """(P_X(S), P_Y(S)) for S = {x : F_X(x) < F_Y(x)}; continuous cdfs only."""
    if F_X.has_jumps(t) or F_Y.has_jumps(t):
        raise PreconditionError("violation_mass needs continuous cdfs (no jumps)")
    u = scan_grid(F_X, F_Y, t, 2048)
    xs = np.concatenate([F_X.quantile_left(u, t), F_Y.quantile_left(u, t),
                         F_X.breakpoints(t), F_Y.breakpoints(t)])
    xs = np.unique(xs[np.isfinite(xs)])
    D = lambda x: np.asarray(F_Y.cdf(x, t)) - np.asarray(F_X.cdf(x, t))  # noqa: E731
    inside = lambda x: D(x) > tol  # noqa: E731
    ins = inside(xs)
    if not ins.any():
        return 0.0, 0.0
    edges = np.diff(ins.astype(np.int8))
    starts = list(np.flatnonzero(edges == 1) + 1)
    ends = list(np.flatnonzero(edges == -1))
    if ins[0]:
        starts.insert(0, 0)
    if ins[-1]:
        ends.append(len(xs) - 1)
    mass_x = mass_y = 0.0
    for s, e in zip(starts, ends):
        lo = -np.inf if s == 0 else float(_refine_x(inside, xs[s - 1], xs[s]))
        hi = np.inf if e == len(xs) - 1 else float(_refine_x(inside, xs[e + 1], xs[e]))
        mass_x += float(F_X.cdf(hi, t)) - float(F_X.cdf(lo, t))
        mass_y += float(F_Y.cdf(hi, t)) - float(F_Y.cdf(lo, t))
    return mass_x, mass_y


def _refine_x(inside, out_pt, in_pt):
    a, b = float(out_pt), float(in_pt)
    for _ in range(200):
        mid = 0.5 * (a + b)
        if mid in (a, b):
            break
        if inside(np.array([mid]))[0]:
            b = mid
        else:
            a = mid
    return 0.5 * (a + b)


def _difference_upper(F_X, F_Y, t):
    """s -> F_X^<-(1 - s) - F_Y^<-(1 - s), evaluated without forming 1 - s."""
    def d(s):
        a = np.asarray(F_X.quantile_upper(s, t, "left"), dtype=float)
        b = np.asarray(F_Y.quantile_upper(s, t, "left"), dtype=float)
        with np.errstate(invalid="ignore"):
            out = a - b
        return np.where(np.isnan(out), 0.0, out)

    return d


def _interval_integral(fn, lo, hi, pts, abs_tol, rel_tol, upper_fn=None):
    """Integral of fn over (lo, hi). Stretches ending at u = 1 are integrated in
    s = 1 - u through ``upper_fn`` so the ladder can approach the end."""
    if upper_fn is not None and hi == 1.0:
        if lo == 0.0:
            a = _interval_integral(fn, 0.0, 0.5, pts, 0.5 * abs_tol, rel_tol)
            b = _interval_integral(fn, 0.5, 1.0, pts, 0.5 * abs_tol, rel_tol, upper_fn)
            return DIVERGENT if (is_divergent(a) or is_divergent(b)) else a + b
        spts = [1.0 - p for p in pts if lo < p < 1.0]
        return integrate_improper(upper_fn, 0.0, 1.0 - lo, singular_a=True, singular_b=False,
                                  abs_tol=abs_tol, rel_tol=rel_tol, points=spts).value
    pts = [p for p in pts if lo < p < hi]
    res = integrate_improper(fn, lo, hi, singular_a=(lo == 0.0), singular_b=(hi == 1.0),
                             abs_tol=abs_tol, rel_tol=rel_tol, points=pts)
    return res.value


def partial_distances(F_X: Cdf, F_Y: Cdf, t: float = 0.0, p: float = 2.0,
                      vs: ViolationSet | None = None, cross_check: bool = False,
                      abs_tol: float = 1e-8, rel_tol: float = 1e-6) -> PartialDistances:
    """Partial L1 and W_p distances over the violation set.

    With ``cross_check`` the L1 value is recomputed in x-space on a truncated
    domain and the flag ``xspace-mismatch`` is raised when the two disagree
    by more than 1e-5.
    """
    if not p >= 1:
        raise ValueError("p must be at least 1")
    if vs is None:
        vs = violation_set(F_X, F_Y, t)
    d = _difference(F_X, F_Y, t, "left/left")
    gap = lambda u: np.maximum(d(u), 0.0)  # noqa: E731
    gap_p = lambda u: np.maximum(d(u), 0.0) ** p  # noqa: E731
    du = _difference_upper(F_X, F_Y, t)
    gap_up = lambda s: np.maximum(du(s), 0.0)  # noqa: E731
    gap_p_up = lambda s: np.maximum(du(s), 0.0) ** p  # noqa: E731
    pts = np.concatenate([F_X.critical_u(t), F_Y.critical_u(t)])
    l1 = 0.0
    wp = 0.0
    flags = []
    for lo, hi in vs.intervals:
        try:
            a = _interval_integral(gap, lo, hi, pts, abs_tol, rel_tol, gap_up)
        except FloatingPointError:
            a = DIVERGENT
        try:
            b = _interval_integral(gap_p, lo, hi, pts, abs_tol, rel_tol, gap_p_up)
        except FloatingPointError:
            b = DIVERGENT
        l1 = DIVERGENT if (is_divergent(l1) or is_divergent(a)) else l1 + a
        wp = DIVERGENT if (is_divergent(wp) or is_divergent(b)) else wp + b
    if is_divergent(l1):
        flags.append("l1-divergent")
    if is_divergent(wp):
        flags.append("wp-divergent")
    xs_val = None
    if cross_check and not is_divergent(l1):
        xs_val = l1_partial_xspace(F_X, F_Y, t)
        if abs(xs_val - l1) > XSPACE_AGREEMENT:
            flags.append("xspace-mismatch")
    return PartialDistances(l1, wp, float(p), xs_val, tuple(flags))


def l1_partial_xspace(F_X: Cdf, F_Y: Cdf, t: float = 0.0, eps: float = 1e-9) -> float:
    """Integral of (F_Y - F_X)^+ over x in [q(eps), q(1 - eps)]."""
    lo = float(min(F_X.quantile_left(eps, t), F_Y.quantile_left(eps, t)))
    hi = float(max(F_X.quantile_right(1 - eps, t), F_Y.quantile_right(1 - eps, t)))
    u = np.linspace(0.0, 1.0, 129)[1:-1]
    marks = np.concatenate([F_X.quantile_left(u, t), F_Y.quantile_left(u, t),
                            F_X.breakpoints(t), F_Y.breakpoints(t)])
    marks = marks[np.isfinite(marks)]
    f = lambda x: np.maximum(np.asarray(F_Y.cdf(x, t)) - np.asarray(F_X.cdf(x, t)), 0.0)  # noqa: E731
    return integrate(f, lo, hi, abs_tol=1e-9, rel_tol=1e-8, points=marks,
                     max_intervals=20000).value


def precedence_prob(F_X: Cdf, F_Y: Cdf, t: float = 0.0) -> float:
    """P(X <= Y) for independent X, Y as the integral of F_X(F_Y^<-(v)) over (0, 1).

    Atoms of F_Y show up as flat stretches of F_Y^<- and are covered by the
    integral without special treatment.
    """
    qy = _q(F_Y, "left", t)
    f = lambda v: np.asarray(F_X.cdf(qy(v), t), dtype=float)  # noqa: E731
    pts = list(F_Y.critical_u(t))
    # Subdivide so the adaptive rule sees features near both ends
    pts += list(10.0 ** -np.arange(1, 13)) + list(1 - 10.0 ** -np.arange(1, 13))
    res = integrate(f, 0.0, 1.0, abs_tol=1e-10, rel_tol=1e-9, points=pts, max_intervals=20000)
    return float(min(max(res.value, 0.0), 1.0))


def precedence_prob_coupled(joint_sampler, n: int, seed: int = 42) -> tuple:
    """Monte Carlo P(X <= Y) from ``joint_sampler(rng, n) -> (xs, ys)``.

    Returns (estimate, half-width of the normal-approximation 95% interval).
    """
    if n < 1000:
        raise ValueError("need at least 1000 draws")
    rng = np.random.default_rng(seed)
    xs, ys = joint_sampler(rng, n)
    hits = np.asarray(xs) <= np.asarray(ys)
    est = float(hits.mean())
    ci = 1.959963984540054 * math.sqrt(max(est * (1 - est), 0.0) / n)
    return est, ci


def independent_sampler(F_X: Cdf, F_Y: Cdf, t: float = 0.0):
    """Joint sampler for independent X ~ F_X and Y ~ F_Y."""
    def sampler(rng, n):
        return draw(F_X, rng, n, t), draw(F_Y, rng, n, t)

    return sampler
