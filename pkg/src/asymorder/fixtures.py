"""Named families of cdf pairs bundled with the quantities they should produce.

Names follow the numbering used for the worked examples (``example-5.1``
and so on) so they can be looked up from the command line.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import distort as _distort
from .asym import GridPolicy, IndexSet, ProcessFamily, Rule, judge, series_for, sweep
from .dist import BuiltinCdf, DistortedCdf, PiecewiseCdf
from .distort import DistortionFamily
from .order import (
    independent_sampler,
    partial_distances,
    precedence_prob,
    precedence_prob_coupled,
    violation_set,
)
from .quad import is_divergent
from .specfun import std_normal_cdf, std_normal_ppf

__all__ = ["Fixture", "Expectation", "CheckResult", "get", "names", "UnknownFixtureError",
           "five_sixths_sum"]

PHI1_HALF = std_normal_cdf(1.0) - 0.5


class UnknownFixtureError(KeyError):
    def __init__(self, name):
        super().__init__(name)
        self.name = name

    def __str__(self):
        return f"unknown fixture {self.name!r}; registered: {', '.join(names())}"


@dataclass(frozen=True)
class Expectation:
    """``quantity`` at index ``t`` compared with ``value``.

    relation is one of "==" (within tol), ">=" / "<=" (with tol slack),
    "divergent" and "verdict" (value is the expected verdict string).
    """

    quantity: str
    t: float | None
    value: object
    tol: float
    provenance: str
    relation: str = "=="


@dataclass(frozen=True)
class CheckResult:
    expectation: Expectation
    observed: object
    passed: bool


@dataclass
class Fixture:
    name: str
    description: str
    family: ProcessFamily
    expected: list = field(default_factory=list)
    baseline: tuple | None = None  # (F_X, F_Y) before distortion, if any
    distortion: object = None

    def check(self, rule: Rule = Rule(), seed: int = 42) -> list:
        results = []
        reports = None
        for e in self.expected:
            if e.relation == "verdict":
                if reports is None:
                    reports = sweep(self.family)
                order = e.quantity.split(":", 1)[1]
                observed = judge(order, series_for(order, reports), rule).verdict
                results.append(CheckResult(e, observed, observed == e.value))
                continue
            observed = self.measure(e.quantity, e.t, seed)
            results.append(CheckResult(e, observed, _compare(e, observed)))
        return results

    def measure(self, quantity: str, t: float, seed: int = 42):
        fam = self.family
        fam.validate(t)
        F_X, F_Y = fam.pair(t)
        if quantity == "measure":
            return violation_set(F_X, F_Y, t).measure
        if quantity in ("l1_partial", "wp_partial"):
            return getattr(partial_distances(F_X, F_Y, t), quantity)
        if quantity == "precedence":
            return precedence_prob(F_X, F_Y, t)
        if quantity == "precedence_mc":
            est, ci = precedence_prob_coupled(independent_sampler(F_X, F_Y, t), 10**6, seed=seed)
            return (est, ci)
        if quantity in ("sufficient_ast", "sufficient_l1w2"):
            bx, by = self.baseline
            a0 = violation_set(bx, by, t)
            fn = _distort.sufficient_ast if quantity == "sufficient_ast" else _distort.sufficient_l1w2
            return fn(self.distortion, a0, [t])[0]
        raise ValueError(f"unknown quantity {quantity!r}")


def _compare(e: Expectation, observed) -> bool:
    if e.relation == "divergent":
        return is_divergent(observed)
    if isinstance(observed, tuple):  # Monte Carlo (estimate, ci95)
        est, ci = observed
        if e.relation == ">=":
            return est >= e.value - 3 * ci
        if e.relation == "<=":
            return est <= e.value + 3 * ci
        return abs(est - e.value) <= 3 * ci
    if is_divergent(observed):
        return False
    if e.relation == "==":
        return abs(observed - e.value) <= e.tol
    if e.relation == ">=":
        return observed >= e.value - e.tol
    if e.relation == "<=":
        return observed <= e.value + e.tol
    raise ValueError(f"unknown relation {e.relation!r}")


def _seg(lo, hi, body):
    return {"from": lo, "to": hi, "cdf": body}


def _example_4_1() -> Fixture:
    x = PiecewiseCdf([
        _seg("-inf", "0", "phi(x)"),
        _seg("0", "1", "0.5 + (phi(1) - 0.5 - 1/(t+4)) * x"),
        _seg("1", "inf", "1 - exp(1-x) * (1 - phi(x))"),
    ], name="example-4.1 X")
    y = PiecewiseCdf([
        _seg("-inf", "0", "exp(x) * phi(x)"),
        _seg("0", "1", "0.5 + (phi(1) - 0.5) * x"),
        _seg("1", "inf", "phi(x)"),
    ], name="example-4.1 Y")
    fam = ProcessFamily(x, y, IndexSet("continuous", 0.0), GridPolicy(1.0, 2.0, 13), "example-4.1")
    exp = []
    for t in (0.0, 10.0, 100.0):
        exp.append(Expectation("measure", t, PHI1_HALF, 1e-4, "reference: limit of the measure"))
        exp.append(Expectation("l1_partial", t, 1 / (2 * (t + 4)), 1e-5,
                               "derived: F_Y - F_X = x/(t+4) on [0,1)"))
    exp.append(Expectation("verdict:ast", None, "fails", 0, "reference", "verdict"))
    exp.append(Expectation("verdict:l1", None, "holds", 0, "derived", "verdict"))
    return Fixture("example-4.1", "Measure of the violation set stays at Phi(1)-1/2 while "
                   "the quantile gap on it vanishes.", fam, exp)


def _example_5_1() -> Fixture:
    x = PiecewiseCdf([
        _seg("-inf", "0", "phi(x)"),
        _seg("0", "1", "0.5"),
        _seg("1", "inf", "1 - exp(1-x) * (1 - phi(x))"),
    ], name="example-5.1 X")
    y = PiecewiseCdf([
        _seg("-inf", "0", "exp(x) * phi(x)"),
        _seg("0", "1 - 1/(t+1)", "0.5"),
        _seg("1 - 1/(t+1)", "1", "0.5 + (phi(1) - 0.5) * (1 + (t+1)*(x-1))"),
        _seg("1", "inf", "phi(x)"),
    ], name="example-5.1 Y")
    fam = ProcessFamily(x, y, IndexSet("continuous", 0.0), GridPolicy(1.0, 2.0, 13), "example-5.1")
    exp = []
    for t in (0.0, 9.0, 99.0):
        exp.append(Expectation("measure", t, PHI1_HALF, 1e-4, "reference"))
        exp.append(Expectation("l1_partial", t, PHI1_HALF / (2 * t + 2), 1e-5, "reference"))
    exp.append(Expectation("verdict:ast", None, "fails", 0, "reference", "verdict"))
    exp.append(Expectation("verdict:l1", None, "holds", 0, "reference", "verdict"))
    return Fixture("example-5.1", "ast fails but the L1 order holds.", fam, exp)


def _example_5_2() -> Fixture:
    x = PiecewiseCdf([
        _seg("-inf", "-t", "phi(x+t)"),
        _seg("-t", "1", "0.5"),
        _seg("1", "inf", "1 - exp(1-x) * (1 - phi(x))"),
    ], name="example-5.2 X")
    y = PiecewiseCdf([
        _seg("-inf", "-t", "exp(x+t) * phi(x+t)"),
        _seg("-t", "1", "0.5 + ((phi(1) - 0.5)/(t+1)^2) * (x+t)"),
        _seg("1", "inf", "phi(x)"),
    ], name="example-5.2 Y")
    fam = ProcessFamily(x, y, IndexSet("continuous", 0.0), GridPolicy(1.0, 2.0, 13), "example-5.2")
    exp = []
    for t in (1.0, 15.0):
        exp.append(Expectation("measure", t, PHI1_HALF / (t + 1), 1e-6,
                               "derived: violation on (1/2, 1/2 + (Phi(1)-1/2)/(t+1))"))
        exp.append(Expectation("l1_partial", t, PHI1_HALF / 2, 1e-5,
                               "derived: triangle of height (Phi(1)-1/2)/(t+1) and width t+1"))
    exp.append(Expectation("verdict:ast", None, "holds", 0, "reference", "verdict"))
    exp.append(Expectation("verdict:l1", None, "fails", 0, "reference", "verdict"))
    return Fixture("example-5.2", "ast holds but the L1 order fails.", fam, exp)


def _counterexample_5_3() -> Fixture:
    h = "(t+1)/2"
    e = "1/(2*(t+1))"
    x = PiecewiseCdf([
        _seg("-inf", f"-{h}", f"{e} * exp(x + {h})"),
        _seg(f"-{h}", f"-{h} + {e}", f"x + {h} + {e}"),
        _seg(f"-{h} + {e}", "1", f"(1/(1 + {h} - {e})) * ((x-1)/(t+1)) + 2/(t+1)"),
        _seg("1", "1 + 1/(t+1)", "(t-2)*(x-1) + 2/(t+1)"),
        _seg("1 + 1/(t+1)", "inf", "1 - (1/(t+1)) * exp(-(x - 1 - 1/(t+1)))"),
    ], name="counterexample-5.3 X")
    y = PiecewiseCdf([
        _seg("-inf", "-(t+1)", f"{e} * exp(x + t + 1)"),
        _seg("-(t+1)", f"-(t+1) + {e}", f"x + {e} + t + 1"),
        _seg(f"-(t+1) + {e}", "5", f"(1/(t + 6 - {e})) * ((x-5)/(t+1)) + 2/(t+1)"),
        _seg("5", "5 + 1/(t+1)", "(t-2)*(x-5) + 2/(t+1)"),
        _seg("5 + 1/(t+1)", "inf", "1 - (1/(t+1)) * exp(-(x - 5 - 1/(t+1)))"),
    ], name="counterexample-5.3 Y")
    # the fourth segment has slope t-2, so these are cdfs only for t >= 2
    fam = ProcessFamily(x, y, IndexSet("continuous", 2.0), GridPolicy(2.0, 2.0, 13),
                        "counterexample-5.3")
    exp = [Expectation("l1_partial", t, 0.25 - 1 / (4 * (t + 1) ** 2), 1e-4, "reference", ">=")
           for t in (3.0, 10.0)]
    exp.append(Expectation("verdict:l1", None, "fails", 0, "reference", "verdict"))
    exp.append(Expectation("verdict:wp", None, "fails", 0, "derived", "verdict"))
    return Fixture("counterexample-5.3", "Both laws concentrate at 1 < 5, yet the partial L1 "
                   "distance stays near 1/4.", fam, exp)


def _normal_vs_cauchy_max() -> Fixture:
    n_max = DistortionFamily({"kind": "order_stat", "r": "t", "alpha": "t"})
    bx, by = BuiltinCdf("normal", mu=0, sigma=1), BuiltinCdf("cauchy", x0=0, gamma=1)
    fam = ProcessFamily(DistortedCdf(bx, n_max), DistortedCdf(by, n_max),
                        IndexSet("integer", 1), GridPolicy(points=tuple(range(1, 13))),
                        "normal-vs-cauchy-max")
    exp = [Expectation("measure", float(n), 2.0 ** -n, 1e-6,
                       "derived: single crossing at u = 1/2, so A0 = (0, 2^-n)")
           for n in range(1, 13)]
    exp.append(Expectation("l1_partial", 1.0, None, 0, "derived: Cauchy quantile ~ -1/(pi u)",
                           "divergent"))
    exp.append(Expectation("verdict:ast", None, "holds", 0, "derived", "verdict"))
    return Fixture("normal-vs-cauchy-max", "Maxima of n normal versus n Cauchy draws.", fam,
                   exp, (bx, by), n_max)


def five_sixths_sum(n: int, q: float = 0.2) -> float:
    """(n/2^n) sum_i C(n,i) (1 - q^(n+i)) / (n+i)."""
    total = math.fsum(math.comb(n, i) * (1 - q ** (n + i)) / (n + i) for i in range(n + 1))
    return n * total / 2.0 ** n


def _five_sixths_max() -> Fixture:
    c = "ln(0.25)"  # logistic cdf equals 0.2 here
    n_max = DistortionFamily({"kind": "order_stat", "r": "t", "alpha": "t"})
    bx = PiecewiseCdf([
        _seg("-inf", c, "3/(1 + exp(-x))"),
        _seg(c, "inf", "(1 + 1/(1 + exp(-x)))/2"),
    ], name="five-sixths X")
    by = BuiltinCdf("logistic", mu=0, s=1)
    fam = ProcessFamily(DistortedCdf(bx, n_max), DistortedCdf(by, n_max),
                        IndexSet("integer", 1), GridPolicy(points=(50, 100, 200, 400)),
                        "five-sixths-max")
    exp = []
    for n in (50, 200, 400):
        exp.append(Expectation("precedence", float(n), five_sixths_sum(n), 1e-6,
                               "reference: binomial sum"))
        exp.append(Expectation("precedence", float(n), 5 / 6, 0.0, "reference: bound", "<="))
    return Fixture("five-sixths-max", "Maxima where F_X > F_Y beyond c, yet P(X <= Y) "
                   "stays below 5/6.", fam, exp, (bx, by), n_max)


RECORD_D = float(std_normal_ppf(0.8))


def _record_values() -> Fixture:
    d = repr(RECORD_D)
    bx = PiecewiseCdf([
        _seg("-inf", d, f"0.8 * phi(x - 0.5) / phi({d} - 0.5)"),
        _seg(d, "inf", "phi(x)"),
    ], name="record X")
    by = BuiltinCdf("normal", mu=0, sigma=1)
    rec = DistortionFamily({"kind": "record", "n": "t", "k": 2})
    fam = ProcessFamily(DistortedCdf(bx, rec), DistortedCdf(by, rec), IndexSet("integer", 1),
                        GridPolicy(points=(1, 2, 4, 8, 16, 32)), "record-values")
    exp = [
        Expectation("sufficient_ast", 100.0, 0.0, 1e-10, "derived: gamma cdf P(100, 2 ln 5)", "<="),
        Expectation("sufficient_l1w2", 32.0, 0.0, 1e-3, "derived: sup of phi' on (0, 0.8]", "<="),
        Expectation("verdict:ast", None, "holds", 0, "reference", "verdict"),
        Expectation("verdict:l1", None, "holds", 0, "reference", "verdict"),
        Expectation("verdict:wp", None, "holds", 0, "reference", "verdict"),
    ]
    return Fixture("record-values", "2-records of baselines that agree beyond F_Y = 0.8.",
                   fam, exp, (bx, by), rec)


def _mixture_central() -> Fixture:
    mix = DistortionFamily({"kind": "mixture", "w": [0.25, 0.75], "lambda": [0.3, 0.7],
                            "alpha": "t"})
    bx = BuiltinCdf("normal", mu=0, sigma=1)
    by = BuiltinCdf("normal", mu=1.5, sigma=1)
    fam = ProcessFamily(DistortedCdf(bx, mix), DistortedCdf(by, mix), IndexSet("continuous", 1),
                        GridPolicy(25.0, 2.0, 5), "mixture-central")
    exp = [
        Expectation("precedence_mc", 400.0, 0.75, 0.0, "reference: first lower bound", ">="),
        Expectation("verdict:ast", None, "holds", 0, "derived: baselines are ordered", "verdict"),
    ]
    return Fixture("mixture-central", "Mixture of central order statistics, weights (1/4, 3/4).",
                   fam, exp, (bx, by), mix)


_REGISTRY = {
    "example-4.1": _example_4_1,
    "example-5.1": _example_5_1,
    "example-5.2": _example_5_2,
    "counterexample-5.3": _counterexample_5_3,
    "normal-vs-cauchy-max": _normal_vs_cauchy_max,
    "five-sixths-max": _five_sixths_max,
    "record-values": _record_values,
    "mixture-central": _mixture_central,
}


def names() -> list:
    return sorted(_REGISTRY)


def get(name: str) -> Fixture:
    try:
        return _REGISTRY[name]()
    except KeyError:
        raise UnknownFixtureError(name) from None
