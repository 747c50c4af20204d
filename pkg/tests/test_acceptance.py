"""One test per acceptance criterion; each records a PASS/FAIL line that is
printed in the terminal summary."""
import math

import mpmath
import numpy as np
import pytest
from helpers import TRANSFORMS, random_any, random_continuous, random_piecewise, transformed

from asymorder import fixtures, specfun
from asymorder.asym import check_transitivity, convergence_pair, judge, judge_all, series_for, sweep
from asymorder.dist import builtin, expectation
from asymorder.distort import make_record, mixture_precedence_bounds
from asymorder.fixtures import five_sixths_sum
from asymorder.order import (
    partial_distances,
    precedence_prob,
    violation_mass,
    violation_set,
)
from asymorder.quad import is_divergent

PHI1 = 0.5 * math.erfc(-1 / math.sqrt(2)) - 0.5
N_PROP = 100


def _verdicts(fam, orders=("ast", "asp", "l1", "wp")):
    reps = sweep(fam, orders=orders)
    return {o: v.verdict for o, v in judge_all(reps, orders).items()}


def _measure(fx, quantity, t):
    """Fixture quantity at t, or the exception text when t is not admissible."""
    try:
        return fx.measure(quantity, t)
    except ValueError as exc:
        return f"error: {exc}"


def test_criterion_1_example_5_1(criterion):
    fx = fixtures.get("example-5.1")
    bad = []
    for t in (0.0, 9.0, 99.0):
        mu = fx.measure("measure", t)
        l1 = fx.measure("l1_partial", t)
        if abs(mu - PHI1) > 1e-4:
            bad.append(f"measure t={t:g} {mu}")
        if is_divergent(l1) or abs(l1 - PHI1 / (2 * t + 2)) > 1e-5:
            bad.append(f"l1 t={t:g} {l1}")
    v = _verdicts(fx.family, ("ast", "l1"))
    if v != {"ast": "fails", "l1": "holds"}:
        bad.append(f"verdicts {v}")
    ok = criterion(1, not bad, "example 5.1 measure, l1 and verdicts" + (f" [{'; '.join(bad)}]" if bad else ""))
    assert ok, bad


def test_criterion_2_example_5_2(criterion):
    v = _verdicts(fixtures.get("example-5.2").family, ("ast", "l1"))
    ok = criterion(2, v == {"ast": "holds", "l1": "fails"}, f"example 5.2 verdicts {v}")
    assert ok, v


def test_criterion_3_counterexample(criterion):
    fx = fixtures.get("counterexample-5.3")
    bad = []
    for t in (1.0, 3.0, 10.0):
        l1 = _measure(fx, "l1_partial", t)
        floor = 0.25 - 1 / (4 * (t + 1) ** 2) - 1e-4
        if isinstance(l1, str):
            bad.append(f"t={t:g} {l1}")
        elif is_divergent(l1) or l1 < floor:
            bad.append(f"l1 t={t:g} {l1} < {floor}")
    v = _verdicts(fx.family, ("l1", "wp"))
    if v != {"l1": "fails", "wp": "fails"}:
        bad.append(f"verdicts {v}")
    reps = sweep(convergence_pair(1, 5, 1), [2.0 ** k for k in range(11)])
    ast = judge("ast", series_for("ast", reps)).verdict
    if ast != "holds" or not reps[-1].precedence > 0.999:
        bad.append(f"convergence pair ast={ast} precedence={reps[-1].precedence}")
    ok = criterion(3, not bad, "counterexample l1 floor, verdicts, convergence pair"
                   + (f" [{'; '.join(bad)}]" if bad else ""))
    assert ok, bad


def test_criterion_4_normal_vs_cauchy_maxima(criterion):
    fx = fixtures.get("normal-vs-cauchy-max")
    fam = fx.family
    bad = []
    reps = sweep(fam, [float(n) for n in range(1, 13)])
    for r in reps:
        if abs(r.measure - 2.0 ** -r.t) > 1e-6:
            bad.append(f"measure n={r.t:g} {r.measure}")
    ast = judge("ast", series_for("ast", reps)).verdict
    if ast != "holds":
        bad.append(f"ast verdict {ast}")
    finite = [int(r.t) for r in reps if not is_divergent(r.l1_partial)]
    if finite:
        bad.append(f"l1 finite at n={finite}")
    ok = criterion(4, not bad, "maxima measure 2^-n, ast holds, l1 divergent at every n"
                   + (f" [{'; '.join(bad)}]" if bad else ""))
    assert ok, bad


def test_criterion_5_mixture_bounds(criterion):
    bounds = mixture_precedence_bounds([0.25, 0.75])
    est, ci = fixtures.get("mixture-central").measure("precedence_mc", 400.0, seed=42)
    ok = bounds == (0.75, 0.5625, 0.25) and est >= 0.75 - 3 * ci
    ok = criterion(5, ok, f"bounds {bounds}, Monte Carlo precedence {est:.6f} (ci95 {ci:.2g})")
    assert ok


def test_criterion_6_five_sixths(criterion):
    fx = fixtures.get("five-sixths-max")
    vals = {n: fx.measure("precedence", float(n)) for n in (50, 200, 400)}
    bad = [f"n={n} {v} vs {five_sixths_sum(n)}" for n, v in vals.items()
           if abs(v - five_sixths_sum(n)) > 1e-6]
    bad += [f"n={n} {v} > 5/6" for n, v in vals.items() if v > 5 / 6]
    if not 0.60 <= vals[400] <= 0.70:
        bad.append(f"n=400 value {vals[400]} outside [0.60, 0.70]")
    ok = criterion(6, not bad, "five-sixths precedence "
                   + ", ".join(f"{v:.7f}" for v in vals.values()) + (f" [{'; '.join(bad)}]" if bad else ""))
    assert ok, bad


def test_criterion_7_record_values(criterion):
    fx = fixtures.get("record-values")
    bad = []
    s_ast = fx.measure("sufficient_ast", 100.0)
    mpmath.mp.dps = 30
    oracle = float(mpmath.gammainc(100, 0, -2 * mpmath.log(mpmath.mpf("0.2")), regularized=True))
    if not (s_ast < 1e-10 and oracle < 1e-10 and abs(s_ast - oracle) < 1e-12):
        bad.append(f"sufficient_ast {s_ast} (oracle {oracle})")
    if make_record(100, 2).eval(0.8) != s_ast:
        bad.append("image measure is not phi(0.8)")
    grid = fx.family.default_grid()
    l1w2 = [fx.measure("sufficient_l1w2", t) for t in grid]
    if not (l1w2[-1] < 1e-3 and all(b <= a for a, b in zip(l1w2[-4:], l1w2[-3:]))):
        bad.append(f"sufficient_l1w2 {l1w2}")
    v = _verdicts(fx.family, ("ast", "l1", "wp"))
    if set(v.values()) != {"holds"}:
        bad.append(f"verdicts {v}")
    ok = criterion(7, not bad, f"records: sufficient_ast {s_ast:.3g}, sup phi' at n={grid[-1]:g} "
                   f"{l1w2[-1]:.3g}, verdicts {v}" + (f" [{'; '.join(bad)}]" if bad else ""))
    assert ok, bad


def _property_failures():
    rng = np.random.default_rng(20240101)
    out = {}

    def run(name, make, check):
        fails = 0
        for _ in range(N_PROP):
            if not check(*make()):
                fails += 1
        out[name] = fails

    modes = ("left/left", "left/right", "right/right", "right/left")

    def four_way(X, Y):
        ms = [violation_set(X, Y, 0.0, m).measure for m in modes]
        return max(ms) - min(ms) <= 1e-7

    def mass(X, Y):
        mu = violation_set(X, Y).measure
        mx, my = violation_mass(X, Y)
        return abs(mx - mu) <= 1e-7 and abs(my - mu) <= 1e-7

    def asp(X, Y):
        return precedence_prob(X, Y) >= 0.5 - violation_set(X, Y).measure - 1e-6

    def holder(X, Y):
        vs = violation_set(X, Y)
        d = partial_distances(X, Y, vs=vs)
        return d.l1_partial <= math.sqrt(d.wp_partial * vs.measure) + 1e-7

    def w1_l1(X, Y):
        d = partial_distances(X, Y, cross_check=True)
        return abs(d.l1_partial - d.l1_xspace) <= 1e-5

    def transitive(X, Y, Z):
        return all(c.passed for c in check_transitivity(X, Y, Z))

    def negation(X, Y):
        d, n = partial_distances(X, Y), partial_distances(-Y, -X)
        return n.l1_partial <= d.l1_partial + 1e-7 and n.wp_partial <= d.wp_partial + 1e-7

    pair_any = lambda: (random_any(rng), random_any(rng))  # noqa: E731
    pair_cont = lambda: (random_continuous(rng), random_continuous(rng))  # noqa: E731
    run("four-way equality", pair_any, four_way)
    run("violation mass", pair_cont, mass)
    run("ast => asp bound", pair_cont, asp)
    run("Holder chain", pair_any, holder)
    run("u/x-space L1 identity", pair_cont, w1_l1)
    run("transitivity", lambda: (random_piecewise(rng, True), random_any(rng),
                                 random_piecewise(rng)), transitive)
    run("negation reversal", pair_any, negation)
    out["monotone transforms"] = _transform_failures(rng)
    out["expectation means"] = _expectation_failures(rng)
    return out


def _transform_failures(rng):
    fails = 0
    for i in range(N_PROP):
        X, Y = random_any(rng), random_any(rng)
        tr = TRANSFORMS[i % len(TRANSFORMS)]
        TX, TY = transformed(X, tr), transformed(Y, tr)
        K = tr[1]
        ok = violation_set(TX, TY).measure <= violation_set(X, Y).measure + 1e-7
        ok &= partial_distances(TX, TY).wp_partial <= K * K * partial_distances(X, Y).wp_partial + 1e-6
        fails += not ok
    return fails


def _expectation_failures(rng):
    fails = 0
    for _ in range(N_PROP):
        kind = rng.integers(3)
        if kind == 0:
            a = float(rng.uniform(-5, 5))
            b = a + float(rng.uniform(0.1, 5))
            F, mean = builtin("uniform", a, b), 0.5 * (a + b)
        elif kind == 1:
            rate = float(rng.uniform(0.2, 5))
            F, mean = builtin("exponential", rate), 1 / rate
        else:
            c = float(rng.uniform(-10, 10))
            F, mean = builtin("degenerate", c), c
        fails += not abs(expectation(F) - mean) <= 1e-6
    return fails


def test_criterion_8_property_suites(criterion):
    fails = _property_failures()
    bad = {k: v for k, v in fails.items() if v}
    detail = f"{len(fails)} property suites x {N_PROP} instances"
    ok = criterion(8, not bad, detail + (f" [failures {bad}]" if bad else ""))
    assert ok, bad


def test_criterion_9_specfun_oracles(criterion):
    from test_specfun import beta_oracle, beta_points, gamma_oracle, gamma_points

    wb = max(abs(specfun.reg_inc_beta(u, a, b) - beta_oracle(u, a, b)) for u, a, b in beta_points())
    wg = max(abs(specfun.reg_inc_gamma_lower(s, x) - gamma_oracle(s, x)) for s, x in gamma_points())
    ok = criterion(9, wb < 1e-10 and wg < 1e-10,
                   f"200-point quadrature oracles: beta max err {wb:.2g}, gamma max err {wg:.2g} "
                   f"(backend {specfun.BACKEND})")
    assert ok


@pytest.mark.parametrize("n", [1, 2])
def test_maxima_l1_detail(n):
    """Pins the observed l1 behaviour behind criterion 4: divergent at n=1 only."""
    fx = fixtures.get("normal-vs-cauchy-max")
    l1 = fx.measure("l1_partial", float(n))
    assert is_divergent(l1) == (n == 1)
