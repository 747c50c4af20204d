"""Random cdf generators shared by the property tests."""
import math

import numpy as np
from hypothesis import strategies as st

from asymorder.dist import BuiltinCdf, Cdf, PiecewiseCdf


def piecewise_linear(breaks, masses, jumps=None) -> PiecewiseCdf:
    """Cdf rising linearly between sorted ``breaks``; ``masses[i]`` is spread
    over (breaks[i], breaks[i+1]) and ``jumps[i]`` sits at breaks[i]."""
    k = len(breaks)
    jumps = [0.0] * k if jumps is None else list(jumps)
    total = math.fsum(masses) + math.fsum(jumps)
    masses = [float(m) / total for m in masses]
    jumps = [float(j) / total for j in jumps]
    segs = [{"from": "-inf", "to": repr(breaks[0]), "cdf": "0"}]
    level = 0.0
    for i in range(k - 1):
        lo = level + jumps[i]
        hi = lo + masses[i]
        a, b = breaks[i], breaks[i + 1]
        body = f"{lo!r} + {(hi - lo) / (b - a)!r}*(x - {a!r})"
        segs.append({"from": repr(a), "to": repr(b), "cdf": body})
        level = hi
    segs.append({"from": repr(breaks[-1]), "to": "inf", "cdf": "1"})
    return PiecewiseCdf(segs)


def _spread(raw, lo=-3.0, gap=0.05):
    pts = np.cumsum(np.asarray(raw) + gap) + lo
    return [float(v) for v in pts]


def random_piecewise(rng: np.random.Generator, jumps: bool = False) -> PiecewiseCdf:
    k = int(rng.integers(2, 6))
    breaks = _spread(rng.uniform(0, 1.5, k), lo=rng.uniform(-3, 1))
    masses = list(rng.uniform(0.05, 1, k - 1))
    jm = None
    if jumps:
        jm = [float(rng.uniform(0.05, 0.5)) if rng.random() < 0.5 else 0.0 for _ in range(k)]
    return piecewise_linear(breaks, masses, jm)


def random_builtin(rng: np.random.Generator) -> BuiltinCdf:
    fam = rng.choice(["normal", "logistic", "uniform", "exponential"])
    if fam == "normal":
        return BuiltinCdf("normal", mu=float(rng.uniform(-2, 2)), sigma=float(rng.uniform(0.3, 3)))
    if fam == "logistic":
        return BuiltinCdf("logistic", mu=float(rng.uniform(-2, 2)), s=float(rng.uniform(0.3, 2)))
    if fam == "uniform":
        a = float(rng.uniform(-2, 2))
        return BuiltinCdf("uniform", a=a, b=a + float(rng.uniform(0.2, 3)))
    return BuiltinCdf("exponential", rate=float(rng.uniform(0.3, 3)))


def random_continuous(rng: np.random.Generator) -> Cdf:
    return random_piecewise(rng) if rng.random() < 0.6 else random_builtin(rng)


def random_any(rng: np.random.Generator) -> Cdf:
    r = rng.random()
    if r < 0.4:
        return random_piecewise(rng, jumps=True)
    return random_continuous(rng)


@st.composite
def piecewise_cdfs(draw, jumps=False):
    k = draw(st.integers(2, 5))
    raw = draw(st.lists(st.floats(0, 1.5), min_size=k, max_size=k))
    lo = draw(st.floats(-3, 1))
    masses = draw(st.lists(st.floats(0.05, 1), min_size=k - 1, max_size=k - 1))
    jm = None
    if jumps:
        jm = draw(st.lists(st.one_of(st.just(0.0), st.floats(0.05, 0.5)), min_size=k, max_size=k))
    return piecewise_linear(_spread(raw, lo), masses, jm)


class TransformedCdf(Cdf):
    """Law of psi(X) for nondecreasing continuous psi: quantiles are psi of the
    base quantiles. ``psi_cdf`` maps (base, y, t) to P(psi(X) <= y)."""

    kind = "transformed"

    def __init__(self, base: Cdf, psi, psi_cdf):
        self.base, self.psi, self.psi_cdf = base, psi, psi_cdf

    def _cdf(self, x, t):
        return self.psi_cdf(self.base, x, t)

    def _quantile(self, u, t, side):
        q = self.base.quantile_left(u, t) if side == "left" else self.base.quantile_right(u, t)
        return self.psi(np.asarray(q, dtype=float))


def _affine(a, b):
    return (f"{a}*x+{b}", a,
            lambda x: a * x + b,
            lambda F, y, t: np.asarray(F.cdf((y - b) / a, t), dtype=float))


def _relu():
    def cdf(F, y, t):
        return np.where(y < 0, 0.0, np.asarray(F.cdf(np.maximum(y, 0.0), t), dtype=float))
    return ("max(x,0)", 1.0, lambda x: np.maximum(x, 0.0), cdf)


def _soft():
    # x / (1 + |x|) is 1-Lipschitz and strictly increasing onto (-1, 1)
    def inv(y):
        return y / (1.0 - np.abs(y))

    def cdf(F, y, t):
        out = np.where(y <= -1, 0.0, 1.0)
        mid = (y > -1) & (y < 1)
        if np.any(mid):
            out = out.astype(float)
            out[mid] = np.asarray(F.cdf(inv(y[mid]), t), dtype=float)
        return out
    return ("x/(1+|x|)", 1.0, lambda x: x / (1.0 + np.abs(x)), cdf)


# (name, Lipschitz constant K, psi, cdf of psi(X))
TRANSFORMS = [_affine(2.0, 1.0), _affine(0.5, -3.0), _relu(), _soft()]


def transformed(F: Cdf, transform) -> TransformedCdf:
    _, _, psi, psi_cdf = transform
    return TransformedCdf(F, psi, psi_cdf)


def builtin_laws():
    loc = st.floats(-2, 2)
    scale = st.floats(0.3, 3)
    return st.one_of(
        st.builds(lambda m, s: BuiltinCdf("normal", mu=m, sigma=s), loc, scale),
        st.builds(lambda m, s: BuiltinCdf("logistic", mu=m, s=s), loc, scale),
        st.builds(lambda a, w: BuiltinCdf("uniform", a=a, b=a + w), loc, scale),
        st.builds(lambda r: BuiltinCdf("exponential", rate=r), scale),
    )


def continuous_laws():
    return st.one_of(piecewise_cdfs(), builtin_laws())


def any_laws():
    return st.one_of(piecewise_cdfs(jumps=True), continuous_laws())
