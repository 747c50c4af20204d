import math
import pickle

import numpy as np
import pytest

from asymorder.quad import DIVERGENT, integrate, integrate_improper, is_divergent


@pytest.mark.parametrize("f,a,b,ref", [
    (np.sin, 0.0, math.pi, 2.0),
    (np.exp, -1.0, 2.0, math.e ** 2 - math.exp(-1)),
    (lambda x: 1 / (1 + x * x), -5.0, 5.0, 2 * math.atan(5.0)),
    (np.abs, -1.0, 3.0, 5.0),
])
def test_smooth_integrals(f, a, b, ref):
    res = integrate(f, a, b, abs_tol=1e-12, rel_tol=1e-12)
    assert res.converged
    assert res.value == pytest.approx(ref, abs=1e-11)


def test_reversed_and_empty_limits():
    assert integrate(np.sin, math.pi, 0.0).value == pytest.approx(-2.0, abs=1e-10)
    assert integrate(np.sin, 1.0, 1.0).value == 0.0
    with pytest.raises(ValueError):
        integrate(np.sin, 0.0, math.inf)


def test_break_points_help_steps():
    step = lambda x: np.where(x < 1 / 3, 0.0, 1.0)  # noqa: E731
    res = integrate(step, 0.0, 1.0, abs_tol=1e-13, rel_tol=1e-13, points=[1 / 3])
    assert res.value == pytest.approx(2 / 3, abs=1e-14)


def test_non_finite_integrand_raises():
    with pytest.raises(FloatingPointError):
        integrate(lambda x: 1 / (x - 0.5) if np.ndim(x) == 0 else np.where(x == x, np.inf, 0), 0, 1)


def test_integrable_singularities():
    r = integrate_improper(lambda u: u ** -0.5, 0.0, 1.0, singular_a=True, singular_b=False)
    assert r.value == pytest.approx(2.0, abs=1e-6)
    r = integrate_improper(lambda u: -np.log(u), 0.0, 1.0, singular_a=True, singular_b=False)
    assert r.value == pytest.approx(1.0, abs=1e-7)
    r = integrate_improper(lambda u: (1 - u) ** -0.5, 0.0, 1.0, singular_a=False, singular_b=True)
    assert r.value == pytest.approx(2.0, abs=1e-6)


def test_both_ends_singular():
    f = lambda u: 1 / np.sqrt(u * (1 - u))  # noqa: E731
    r = integrate_improper(f, 0.0, 1.0, singular_a=True, singular_b=True)
    assert r.value == pytest.approx(math.pi, abs=1e-5)


@pytest.mark.parametrize("f", [lambda u: 1 / u, lambda u: 1 / u ** 1.5])
def test_divergent_integrals(f):
    r = integrate_improper(f, 0.0, 1.0, singular_a=True, singular_b=False)
    assert is_divergent(r.value) and not r.converged


def test_short_interval_near_end():
    # a stretch a few ulps wide at u = 1 must not step onto the end point
    f = lambda u: (1 - u) ** -0.25  # noqa: E731
    lo = 1 - 2e-11
    r = integrate_improper(f, lo, 1.0, singular_a=False, singular_b=True)
    assert r.value == pytest.approx((4 / 3) * (1 - lo) ** 0.75, rel=1e-3)


def test_divergent_is_a_singleton():
    assert pickle.loads(pickle.dumps(DIVERGENT)) is DIVERGENT
    assert str(DIVERGENT) == "divergent"
    assert not is_divergent(math.inf)
