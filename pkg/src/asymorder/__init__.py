"""Numerical diagnostics for asymptotic stochastic orders between t-indexed
families of distributions."""
from .asym import (
    ORDERS,
    GridPolicy,
    IndexSet,
    OrderReport,
    OrderVerdict,
    ProcessFamily,
    Rule,
    check_transitivity,
    convergence_pair,
    judge,
    judge_all,
    sweep,
)
from .dist import (
    BuiltinCdf,
    Cdf,
    CdfValidationError,
    DistortedCdf,
    EmpiricalCdf,
    MixtureCdf,
    NegatedCdf,
    PiecewiseCdf,
    SpecError,
    builtin,
    expectation,
    load_spec,
    dump_spec,
    quantile,
    sample,
)
from .distort import (
    DistortionError,
    DistortionFamily,
    make_custom,
    make_mixture,
    make_order_stat,
    make_record,
)
from .expr import ExprSyntaxError, parse
from .order import (
    partial_distances,
    precedence_prob,
    precedence_prob_coupled,
    violation_mass,
    violation_set,
)
from .quad import DIVERGENT, is_divergent
from .specfun import BACKEND

__version__ = "0.1.0"

__all__ = [
    "ORDERS", "GridPolicy", "IndexSet", "OrderReport", "OrderVerdict", "ProcessFamily", "Rule",
    "check_transitivity", "convergence_pair", "judge", "judge_all", "sweep",
    "BuiltinCdf", "Cdf", "CdfValidationError", "DistortedCdf", "EmpiricalCdf", "MixtureCdf",
    "NegatedCdf", "PiecewiseCdf", "SpecError", "builtin", "expectation", "load_spec",
    "dump_spec", "quantile", "sample",
    "DistortionError", "DistortionFamily", "make_custom", "make_mixture", "make_order_stat",
    "make_record",
    "ExprSyntaxError", "parse",
    "partial_distances", "precedence_prob", "precedence_prob_coupled", "violation_mass",
    "violation_set",
    "DIVERGENT", "is_divergent", "BACKEND",
]
