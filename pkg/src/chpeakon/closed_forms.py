"""Exact peakon solutions: traveling and non-traveling single peakons and the two-peakon family.

The two-peakon family solves

    u_t + u^2/2 + u u_x + G*(u^2/2 + u_x^2) + d/dx G*(u^2/2 + u_x^2) = 0

(the ``xia-qiao`` preset) and is written in the shifted time s = (C1+C2) t + C3:

    p1(s) = (C1+C2) D2(s)/D1(s),      q1(s) = ln(alpha D1(s)/D2(s)),
    p2(s) = C2/s,                      q2(s) = ln s,

    D1(s) = mu1 s^alpha + mu2 s^beta,  D2(s) = mu1 alpha s^-beta + mu2 beta s^-alpha,

with alpha = C1/(C1+C2), beta = C2/(C1+C2). From these formulas
p1 exp(q1) = C1 and p2 exp(q2) = C2, which is what makes fitting to initial
data a closed-form computation.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .model import LambdaParams
from .state import PeakonState


class DegenerateConstantsError(ValueError):
    pass


@dataclass(frozen=True)
class NonTravelingConstants:
    A: float
    B: float


@dataclass(frozen=True)
class TwoPeakonConstants:
    C1: float
    C2: float
    C3: float
    mu1: float
    mu2: float
    alpha: float
    beta: float

    def __post_init__(self):
        total = self.C1 + self.C2
        if total == 0.0:
            raise DegenerateConstantsError("C1 + C2 must be nonzero")
        if self.mu1 == 0.0 and self.mu2 == 0.0:
            raise DegenerateConstantsError("mu1 and mu2 cannot both vanish")
        if not (math.isclose(self.alpha, self.C1 / total, rel_tol=1e-12, abs_tol=1e-15)
                and math.isclose(self.beta, self.C2 / total, rel_tol=1e-12, abs_tol=1e-15)):
            raise DegenerateConstantsError("alpha, beta must equal C1/(C1+C2), C2/(C1+C2)")

    @classmethod
    def build(cls, C1: float, C2: float, C3: float, mu1: float, mu2: float) -> "TwoPeakonConstants":
        total = C1 + C2
        if total == 0.0:
            raise DegenerateConstantsError("C1 + C2 must be nonzero")
        return cls(C1, C2, C3, mu1, mu2, C1 / total, C2 / total)

    @property
    def total(self) -> float:
        return self.C1 + self.C2

    def time_of(self, s: float) -> float:
        return (s - self.C3) / self.total

    def s_of(self, t: float) -> float:
        return self.total * t + self.C3

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TwoPeakonConstants":
        return cls(*(float(d[k]) for k in ("C1", "C2", "C3", "mu1", "mu2", "alpha", "beta")))


# single peakons

def single_peakon_traveling(c: float, lambda2: float, x, t):
    return c * np.exp(-np.abs(np.asarray(x) - lambda2 * c * t))


def _nontraveling_denominator(consts: NonTravelingConstants, params: LambdaParams, t: float) -> float:
    if params.lambda1 == 0.0:
        raise ValueError("non-traveling peakons need lambda1 != 0")
    d = 2.0 * params.lambda1 * t - consts.A
    if d == 0.0:
        raise ZeroDivisionError(f"singular time: 2*lambda1*t = A at t={t}")
    return d


def nontraveling_state(consts: NonTravelingConstants, params: LambdaParams, t: float) -> PeakonState:
    d = _nontraveling_denominator(consts, params, t)
    crest = params.lambda2 / (2.0 * params.lambda1) * math.log(abs(d)) + consts.B
    return PeakonState([1.0 / d], [crest], t)


def single_peakon_nontraveling(consts: NonTravelingConstants, params: LambdaParams, x, t: float):
    st = nontraveling_state(consts, params, t)
    return st.p[0] * np.exp(-np.abs(np.asarray(x) - st.q[0]))


def fit_nontraveling(p0: float, q0: float, t0: float, params: LambdaParams) -> NonTravelingConstants:
    if params.lambda1 == 0.0:
        raise ValueError("non-traveling peakons need lambda1 != 0")
    if p0 == 0.0:
        raise ValueError("amplitude p0 must be nonzero")
    A = 2.0 * params.lambda1 * t0 - 1.0 / p0
    B = q0 - params.lambda2 / (2.0 * params.lambda1) * math.log(abs(1.0 / p0))
    return NonTravelingConstants(A, B)


# two-peakon family

def _denominators(c: TwoPeakonConstants, s: float) -> tuple[float, float]:
    d1 = c.mu1 * s ** c.alpha + c.mu2 * s ** c.beta
    d2 = c.mu1 * c.alpha * s ** (-c.beta) + c.mu2 * c.beta * s ** (-c.alpha)
    return d1, d2


def two_peakon_state(consts: TwoPeakonConstants, s: float) -> PeakonState:
    if not s > 0.0:
        raise ValueError(f"shifted time s must be positive, got {s}")
    d1, d2 = _denominators(consts, s)
    if d1 == 0.0:
        raise ZeroDivisionError(f"mu1 s^alpha + mu2 s^beta vanishes at s={s}")
    if d2 == 0.0:
        raise ZeroDivisionError(f"mu1 alpha s^-beta + mu2 beta s^-alpha vanishes at s={s}")
    ratio = consts.alpha * d1 / d2
    if ratio <= 0.0:
        raise ValueError(f"crest position undefined at s={s}: log argument {ratio} is not positive")
    p = [consts.total * d2 / d1, consts.C2 / s]
    q = [math.log(ratio), math.log(s)]
    return PeakonState(p, q, consts.time_of(s))


def two_peakon_separation(consts: TwoPeakonConstants, s: float) -> float:
    """q1 - q2 = ln(alpha (mu1 s^a + mu2 s^b) / (mu1 a s^a + mu2 b s^b))."""
    if not s > 0.0:
        raise ValueError(f"shifted time s must be positive, got {s}")
    a, b = consts.alpha, consts.beta
    num = consts.mu1 * s ** a + consts.mu2 * s ** b
    den = consts.mu1 * a * s ** a + consts.mu2 * b * s ** b
    if num == 0.0:
        raise ZeroDivisionError(f"mu1 s^alpha + mu2 s^beta vanishes at s={s}")
    if den == 0.0:
        raise ZeroDivisionError(f"mu1 alpha s^-beta + mu2 beta s^-alpha vanishes at s={s}")
    ratio = a * num / den
    if ratio <= 0.0:
        raise ValueError(f"separation undefined at s={s}: log argument {ratio} is not positive")
    return math.log(ratio)


def fit_two_peakon(xi1: float, xi2: float, eta1: float, eta2: float, t0: float) -> TwoPeakonConstants:
    """Constants of the two-peakon solution with u(x, t0) = xi1 e^-|x-eta1| + xi2 e^-|x-eta2|."""
    if not eta1 < eta2:
        raise DegenerateConstantsError(f"need eta1 < eta2, got {eta1} >= {eta2}")
    if xi2 == 0.0:
        raise DegenerateConstantsError("xi2 must be nonzero")
    if xi1 == 0.0:
        raise DegenerateConstantsError("xi1 = 0 is single-peakon data; use fit_nontraveling")
    C1 = xi1 * math.exp(eta1)
    C2 = xi2 * math.exp(eta2)
    total = C1 + C2
    if total == 0.0:
        raise DegenerateConstantsError("xi1 e^eta1 + xi2 e^eta2 must be nonzero")
    alpha, beta = C1 / total, C2 / total
    s0 = math.exp(eta2)
    C3 = s0 - total * t0
    # alpha D1/D2 = e^eta1 at s0, i.e. D1 = K D2 with K = e^eta1/alpha
    K = math.exp(eta1) * total / C1
    coef1 = s0 ** alpha - K * alpha * s0 ** (-beta)
    coef2 = s0 ** beta - K * beta * s0 ** (-alpha)
    if coef2 != 0.0:
        mu1, mu2 = 1.0, -coef1 / coef2
    elif coef1 != 0.0:
        mu1, mu2 = 0.0, 1.0
    else:
        mu1, mu2 = 1.0, 0.0
    return TwoPeakonConstants(C1, C2, C3, mu1, mu2, alpha, beta)


def _bisect(fn, lo: float, hi: float, tol: float) -> float:
    flo = fn(lo)
    while hi - lo > tol * max(1.0, abs(lo)):
        mid = 0.5 * (lo + hi)
        fm = fn(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def singular_time(consts: TwoPeakonConstants, s0: float = 1.0, tol: float = 1e-12,
                  s_floor: float = 1e-14, s_ceiling: float = 1e14, samples_per_decade: int = 200) -> float | None:
    """First forward time at which s reaches 0 or a denominator of the solution vanishes.

    Forward time moves s down toward 0 when C1+C2 < 0 and up when C1+C2 > 0.
    Denominators are bracketed on a logarithmic grid and refined by bisection.
    """
    def d1(s):
        return _denominators(consts, s)[0]

    def d2(s):
        return _denominators(consts, s)[1]

    forward_down = consts.total < 0.0
    end = s_floor * s0 if forward_down else s_ceiling * s0
    decades = abs(math.log10(end / s0))
    grid = s0 * np.logspace(0.0, math.log10(end / s0), int(decades * samples_per_decade) + 1)
    root = None
    for fn in (d1, d2):
        vals = np.array([fn(s) for s in grid])
        hits = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) <= 0)[0]
        if hits.size:
            k = hits[0]
            lo, hi = sorted((grid[k], grid[k + 1]))
            r = _bisect(fn, lo, hi, tol) if vals[k] != 0.0 else grid[k]
            if root is None or (r > root if forward_down else r < root):
                root = r
    if root is not None:
        return consts.time_of(root)
    if forward_down:
        return consts.time_of(0.0)
    return None
