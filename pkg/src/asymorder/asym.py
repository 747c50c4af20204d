"""t-indexed families of cdf pairs, sweeps over t-grids and verdict rules.

A finite sweep cannot decide a limit. ``judge`` applies an explicit,
configurable rule to the tail of a series and reports the rule with the
verdict.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

from .dist import BuiltinCdf, Cdf
from .order import partial_distances, precedence_prob, violation_set
from .quad import is_divergent

__all__ = [
    "IndexSet",
    "GridPolicy",
    "ProcessFamily",
    "OrderReport",
    "Rule",
    "OrderVerdict",
    "ORDERS",
    "sweep",
    "judge",
    "judge_all",
    "check_transitivity",
    "convergence_pair",
    "series_for",
]

ORDERS = ("ast", "asp", "l1", "wp")
SERIES_KEY = {"ast": "measure", "asp": "precedence", "l1": "l1_partial", "wp": "wp_partial"}


@dataclass(frozen=True)
class IndexSet:
    kind: str = "continuous"  # or "integer"
    start: float = 0.0

    def __post_init__(self):
        if self.kind not in ("continuous", "integer"):
            raise ValueError(f"index kind must be continuous or integer, got {self.kind!r}")

    def contains(self, t: float) -> bool:
        if t < self.start:
            return False
        return self.kind == "continuous" or float(t).is_integer()


@dataclass(frozen=True)
class GridPolicy:
    """Geometric grid t_k = t0 * factor^k, k = 0..count-1, unless ``points`` is given."""

    t0: float = 1.0
    factor: float = 2.0
    count: int = 13
    points: tuple | None = None

    def grid(self) -> list:
        if self.points is not None:
            return [float(x) for x in self.points]
        return [self.t0 * self.factor ** k for k in range(self.count)]

    @classmethod
    def parse(cls, text: str) -> "GridPolicy":
        """``"t0:factor:count"`` or a comma-separated list of points."""
        text = text.strip()
        if not text:
            raise ValueError("empty grid")
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise ValueError("grid must be t0:factor:count")
            t0, factor, count = float(parts[0]), float(parts[1]), int(parts[2])
            if count < 1 or not factor > 1:
                raise ValueError("grid needs count >= 1 and factor > 1")
            return cls(t0, factor, count)
        return cls(points=tuple(float(x) for x in text.split(",")))


@dataclass
class ProcessFamily:
    """A pair of cdfs whose laws depend on the index t."""

    x: Cdf
    y: Cdf
    index: IndexSet = field(default_factory=IndexSet)
    grid_policy: GridPolicy = field(default_factory=GridPolicy)
    name: str = ""

    def pair(self, t: float) -> tuple:
        return self.x, self.y

    def validate(self, t: float) -> None:
        if not self.index.contains(t):
            raise ValueError(f"t={t} outside the index set {self.index}")
        self.x.validate(t)
        self.y.validate(t)

    def default_grid(self) -> list:
        return self.grid_policy.grid()


@dataclass(frozen=True)
class OrderReport:
    t: float
    measure: float
    l1_partial: object
    wp_partial: object
    p: float
    precedence: float
    flags: tuple = ()
    intervals: tuple = ()

    def record(self) -> dict:
        """Flat JSON-compatible record; divergent values become the string 'divergent'."""
        def enc(v):
            return "divergent" if is_divergent(v) else v

        return {
            "t": self.t,
            "measure": self.measure,
            "l1_partial": enc(self.l1_partial),
            "wp_partial": enc(self.wp_partial),
            "p": self.p,
            "precedence": self.precedence,
            "flags": list(self.flags),
        }


def report_at(F_X: Cdf, F_Y: Cdf, t: float, p: float = 2.0, orders=ORDERS,
              cross_check: bool = False) -> OrderReport:
    vs = violation_set(F_X, F_Y, t)
    l1 = wp = math.nan
    flags = []
    if "l1" in orders or "wp" in orders:
        pdist = partial_distances(F_X, F_Y, t, p=p, vs=vs, cross_check=cross_check)
        l1, wp = pdist.l1_partial, pdist.wp_partial
        flags.extend(pdist.flags)
    prec = precedence_prob(F_X, F_Y, t) if "asp" in orders else math.nan
    return OrderReport(float(t), vs.measure, l1, wp, float(p), prec, tuple(flags), vs.intervals)


def _sweep_one(args):
    fam, t, p, orders = args
    fam.validate(t)
    F_X, F_Y = fam.pair(t)
    return report_at(F_X, F_Y, t, p, orders)


def sweep(fam: ProcessFamily, grid=None, p: float = 2.0, orders=ORDERS,
          workers: int = 1) -> list:
    """One OrderReport per grid point. ``workers > 1`` evaluates grid points in
    separate processes; results are identical either way."""
    grid = fam.default_grid() if grid is None else [float(t) for t in grid]
    if not grid:
        raise ValueError("empty grid")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("grid must be strictly increasing")
    jobs = [(fam, t, p, tuple(orders)) for t in grid]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_sweep_one, jobs))
    return [_sweep_one(j) for j in jobs]


def series_for(order: str, reports) -> list:
    key = SERIES_KEY[order]
    return [getattr(r, key) for r in reports]


@dataclass(frozen=True)
class Rule:
    """Finite-resolution reading of "tends to 0".

    holds: the last ``window`` values are nonincreasing and the final value is
    below ``theta_hold``. fails: the final value exceeds ``theta_fail`` and
    the window shows no decreasing trend (nonincreasing and final at most
    half of the window's first value). Anything else is inconclusive. For asp
    the series is the shortfall max(0, 1/2 - P(X <= Y)).
    """

    theta_hold: float = 1e-3
    theta_fail: float = 1e-2
    window: int = 5
    slack_abs: float = 1e-9
    slack_rel: float = 1e-6

    def __post_init__(self):
        if not (0 < self.theta_hold <= self.theta_fail):
            raise ValueError("need 0 < theta_hold <= theta_fail")
        if self.window < 2:
            raise ValueError("window must be at least 2")


@dataclass(frozen=True)
class OrderVerdict:
    order: str
    verdict: str
    rule: Rule
    series: tuple

    def to_json(self) -> dict:
        return {
            "order": self.order,
            "verdict": self.verdict,
            "rule": asdict(self.rule),
            "series": ["divergent" if is_divergent(v) else v for v in self.series],
        }


def _nonincreasing(vals, rule: Rule) -> bool:
    return all(b <= a + rule.slack_abs + rule.slack_rel * abs(a) for a, b in zip(vals, vals[1:]))


def judge(order: str, series, rule: Rule = Rule()) -> OrderVerdict:
    if order not in ORDERS:
        raise ValueError(f"unknown order {order!r}")
    series = tuple(series)
    if not series:
        return OrderVerdict(order, "inconclusive", rule, series)
    tail = series[-rule.window:]
    if any(is_divergent(v) for v in tail):
        verdict = "fails" if order in ("l1", "wp") else "inconclusive"
        return OrderVerdict(order, verdict, rule, series)
    vals = [float(v) for v in tail]
    if order == "asp":
        vals = [max(0.0, 0.5 - v) for v in vals]
    if any(math.isnan(v) for v in vals):
        return OrderVerdict(order, "inconclusive", rule, series)
    mono = _nonincreasing(vals, rule)
    final = vals[-1]
    if mono and final < rule.theta_hold:
        verdict = "holds"
    elif final > rule.theta_fail and not (mono and final <= 0.5 * vals[0]):
        verdict = "fails"
    else:
        verdict = "inconclusive"
    return OrderVerdict(order, verdict, rule, series)


def judge_all(reports, orders=ORDERS, rule: Rule = Rule()) -> dict:
    return {o: judge(o, series_for(o, reports), rule) for o in orders}


@dataclass(frozen=True)
class InequalityCheck:
    name: str
    lhs: float
    rhs: float
    passed: bool


def check_transitivity(Fx: Cdf, Fy: Cdf, Fz: Cdf, t: float = 0.0) -> list:
    """Triangle-type inequalities behind transitivity of the three metric orders:
    mu(C0) <= mu(A0) + mu(B0), l1(X,Z) <= 2[l1(X,Y) + l1(Y,Z)],
    w2(X,Z) <= 3[w2(X,Y) + w2(Y,Z)]."""
    ab = [(Fx, Fy), (Fy, Fz), (Fx, Fz)]
    vsets = [violation_set(a, b, t) for a, b in ab]
    dists = [partial_distances(a, b, t, p=2.0, vs=v) for (a, b), v in zip(ab, vsets)]
    out = []
    m = [v.measure for v in vsets]
    out.append(InequalityCheck("measure", m[2], m[0] + m[1], m[2] <= m[0] + m[1] + 1e-7))
    for name, attr, const in (("l1", "l1_partial", 2.0), ("w2", "wp_partial", 3.0)):
        vals = [getattr(d, attr) for d in dists]
        if is_divergent(vals[0]) or is_divergent(vals[1]):
            out.append(InequalityCheck(name, math.nan, math.inf, True))
            continue
        lhs = math.inf if is_divergent(vals[2]) else vals[2]
        rhs = const * (vals[0] + vals[1])
        out.append(InequalityCheck(name, lhs, rhs, lhs <= rhs + 1e-6))
    return out


def convergence_pair(a_target: float, b_target: float, shrink_rate: float) -> ProcessFamily:
    """Normal laws concentrating at a_target < b_target with scale 1/(1 + rate t)."""
    if not a_target < b_target:
        raise ValueError("need a_target < b_target")
    if not shrink_rate > 0:
        raise ValueError("shrink_rate must be positive")
    sigma = f"1/(1+t*{float(shrink_rate)!r})"
    x = BuiltinCdf("normal", mu=float(a_target), sigma=sigma)
    y = BuiltinCdf("normal", mu=float(b_target), sigma=sigma)
    return ProcessFamily(x, y, IndexSet("continuous", 0.0), GridPolicy(1.0, 2.0, 11),
                         name=f"convergence-pair({a_target}, {b_target}, {shrink_rate})")

