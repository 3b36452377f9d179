"""Blow-up time bounds, the B^{3/2}_{2,inf} norm of peakon superpositions, and norm-inflation pairs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.integrate import quad

from .model import LambdaParams, h1_conservation_violations
from .state import GridField, PeakonState


class BoundSource(str, Enum):
    RICCATI_LOWER = "riccati_lower"
    RICCATI_UPPER = "riccati_upper"
    WAVE_BREAKING_T1 = "wave_breaking_T1"
    WAVE_BREAKING_T2 = "wave_breaking_T2"


@dataclass(frozen=True)
class BlowupCertificate:
    source: BoundSource
    bound: float
    constants: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (self.bound > 0.0 and math.isfinite(self.bound)):
            raise ValueError(f"certificate bound must be positive and finite, got {self.bound}")

    def to_dict(self) -> dict:
        key = {BoundSource.WAVE_BREAKING_T1: "T1", BoundSource.WAVE_BREAKING_T2: "T2"}.get(self.source, "T")
        return {"source": self.source.value, key: self.bound, **self.constants}


def riccati_blowup_time(C: float, K: float, y0: float, branch: str = "lower") -> float | None:
    """Time by which y escapes to +inf (lower: y' >= C y^2 - K) or -inf (upper: y' <= -C y^2 + K).

    Returns None when y0 does not exceed the threshold sqrt(K/C) in the
    relevant direction.
    """
    if not C > 0.0:
        raise ValueError(f"C must be positive, got {C}")
    if K < 0.0:
        raise ValueError(f"K must be non-negative, got {K}")
    if branch not in ("lower", "upper"):
        raise ValueError(f"branch must be 'lower' or 'upper', got {branch!r}")
    r = math.sqrt(K / C)
    if branch == "lower":
        if not y0 > r:
            return None
        if r == 0.0:
            return 1.0 / (C * y0)
        # atanh form keeps precision when r << y0; sqrt(C K) = C r
        return math.atanh(r / y0) / (C * r)
    if not y0 < -r:
        return None
    if r == 0.0:
        return -1.0 / (C * y0)
    return math.atanh(-r / y0) / (C * r)


def breaking_constants(params: LambdaParams, u0_h1: float) -> dict:
    """K0, C1, C2 of the wave-breaking estimate."""
    l1, l2, l3, l4, l5, l6 = params.as_tuple()
    d = l6 - l2
    C1 = 0.5 * (abs(l3) + abs(l5) + abs(l1 * l3 / d) + abs(l1 * l5 / d))
    C2 = 0.5 * (abs(l4) + abs(l6) + abs(l1 * l4 / d) + abs(l1 * l6 / d))
    K0 = (abs(l5) / 2.0 + max(C1, C2)) * u0_h1 ** 2
    return {"K0": K0, "C1": C1, "C2": C2}


def _check_breaking_params(params: LambdaParams) -> None:
    if params.lambda2 == params.lambda6:
        raise ValueError("wave-breaking bound excluded for lambda2 = lambda6 (the local form degenerates)")
    bad = h1_conservation_violations(params)
    if bad:
        raise ValueError("wave-breaking bound needs the H^1-conserving relations: " + "; ".join(bad))


def wave_breaking_bound(params: LambdaParams, u0_h1: float, slope_functional_min: float,
                        slope_functional_max: float) -> BlowupCertificate | None:
    """Upper bound on the breaking time, or None when the initial slope condition fails.

    ``slope_functional_min/max`` are the extrema over x of
    u0_x - l1/(l6 - l2) * u0.
    """
    _check_breaking_params(params)
    consts = breaking_constants(params, u0_h1)
    K0 = consts["K0"]
    gap = params.lambda2 - params.lambda6
    if gap > 0.0:
        threshold = math.sqrt(K0 / gap)
        consts.update(branch="lambda6<lambda2", threshold=-threshold, slope_value=slope_functional_min)
        if slope_functional_min > -threshold:
            return None
        T = riccati_blowup_time(gap, K0, slope_functional_min, "upper")
        source = BoundSource.WAVE_BREAKING_T1
    else:
        threshold = math.sqrt(K0 / -gap)
        consts.update(branch="lambda6>lambda2", threshold=threshold, slope_value=slope_functional_max)
        if slope_functional_max < threshold:
            return None
        T = riccati_blowup_time(-gap, K0, slope_functional_max, "lower")
        source = BoundSource.WAVE_BREAKING_T2
    if T is None or not math.isfinite(T):
        # boundary case: the threshold is met with equality, no finite bound
        return None
    return BlowupCertificate(source, T, consts)


def slope_functional_grid(params: LambdaParams, field: GridField) -> np.ndarray:
    from .pde_solver import spectral_derivative

    coef = params.lambda1 / (params.lambda6 - params.lambda2)
    return spectral_derivative(field).values - coef * field.values


def slope_functional_peakon(params: LambdaParams, state: PeakonState, x) -> np.ndarray:
    """u_x - l1/(l6 - l2) u for a superposition; pass x = q_i -/+ eps for one-sided crest values."""
    from .peakon_dynamics import peakon_field_eval, peakon_slope_eval

    coef = params.lambda1 / (params.lambda6 - params.lambda2)
    x = np.asarray(x, dtype=float)
    return peakon_slope_eval(state, x) - coef * peakon_field_eval(state, x)


# Besov norm

@dataclass(frozen=True)
class BesovResult:
    norm: float
    low_block: float
    blocks: np.ndarray
    tail_bound: float

    @property
    def squared(self) -> float:
        return self.norm ** 2

    @property
    def tail_may_dominate(self) -> bool:
        return self.tail_bound > self.squared


def _cos_integral(delta: float, a: float, b: float, rtol: float) -> float:
    """int_a^b cos(delta xi)/sqrt(1+xi^2) d xi."""
    g = lambda xi: 1.0 / math.sqrt(1.0 + xi * xi)  # noqa: E731
    if delta == 0.0:
        val, _ = quad(g, a, b, epsabs=0.0, epsrel=rtol, limit=200)
    else:
        # absolute target scaled to the non-oscillating integral over the same block
        scale = math.asinh(b) - math.asinh(a)
        val, _ = quad(g, a, b, weight="cos", wvar=abs(delta), epsabs=rtol * scale, epsrel=rtol, limit=400)
    return val


def _merged(state: PeakonState) -> tuple[np.ndarray, np.ndarray]:
    pos, inv = np.unique(state.q, return_inverse=True)
    amp = np.zeros(pos.shape[0])
    np.add.at(amp, inv, state.p)
    keep = amp != 0.0
    return amp[keep], pos[keep]


def besov_32_blocks(state: PeakonState, q_max: int = 16, rtol: float = 1e-10) -> BesovResult:
    """Low-frequency block, dyadic blocks q = 0..q_max, and a bound on every block beyond q_max.

    Uses the Fourier transform u^(xi) = sum_i 2 p_i e^{-i xi q_i}/(1+xi^2), so
    (1+xi^2)^{3/2}|u^|^2 = 4 sum_ij p_i p_j cos(xi (q_i-q_j)) / sqrt(1+xi^2).
    """
    if q_max < 8:
        raise ValueError(f"q_max must be at least 8, got {q_max}")
    amp, pos = _merged(state)
    if amp.size == 0:
        return BesovResult(0.0, 0.0, np.zeros(q_max + 1), 0.0)
    pairs = []
    for k in range(amp.size):
        pairs.append((amp[k] * amp[k], 0.0))
        for l in range(k + 1, amp.size):
            pairs.append((2.0 * amp[k] * amp[l], pos[k] - pos[l]))

    def block(a: float, b: float) -> float:
        # both half-lines, factor 4 from |2 p|^2
        return 8.0 * sum(w * _cos_integral(d, a, b, rtol) for w, d in pairs)

    low = block(0.0, 1.0)
    blocks = np.array([block(2.0 ** q, 2.0 ** (q + 1)) for q in range(q_max + 1)])
    a = 2.0 ** (q_max + 1)
    tail = 8.0 * math.log(2.0) * float(np.sum(amp ** 2))
    for k in range(amp.size):
        for l in range(amp.size):
            if k != l:
                tail += 16.0 * abs(amp[k] * amp[l]) / (abs(pos[k] - pos[l]) * a)
    norm = math.sqrt(max(low, float(blocks.max()), 0.0))
    return BesovResult(norm, low, blocks, tail)


def besov_32_norm(state: PeakonState, q_max: int = 16) -> float:
    """max(low block, dyadic blocks q <= q_max)^(1/2) of the B^{3/2}_{2,inf} norm."""
    return besov_32_blocks(state, q_max).norm


# norm inflation

@dataclass(frozen=True)
class IllposedPair:
    lambda1: float
    lambda2: float
    T: float
    q: int
    c1: float
    c2: float
    initial_distance: float
    final_separation_lower_bound: float
    state1_T: PeakonState
    state2_T: PeakonState

    @property
    def initial_difference(self) -> PeakonState:
        # u_c(x, 0) = -c e^{-|x|}
        return PeakonState([-(self.c2 - self.c1)], [0.0], 0.0)

    @property
    def difference_T(self) -> PeakonState:
        return PeakonState(np.concatenate([self.state2_T.p, -self.state1_T.p]),
                           np.concatenate([self.state2_T.q, self.state1_T.q]), self.T)

    def to_dict(self) -> dict:
        return {"lambda1": self.lambda1, "lambda2": self.lambda2, "T": self.T, "q": self.q,
                "c1": self.c1, "c2": self.c2, "initial_distance": self.initial_distance,
                "final_separation_lower_bound": self.final_separation_lower_bound}


def _nontraveling_at(c: float, lambda1: float, lambda2: float, t: float) -> PeakonState:
    d = 2.0 * lambda1 * c * t - 1.0
    return PeakonState([c / d], [lambda2 / (2.0 * lambda1) * math.log(abs(d))], t)


def illposed_pair(lambda1: float, lambda2: float, T: float, q: int) -> IllposedPair:
    """Two non-traveling peakons that start close in B^{3/2}_{2,inf} yet stay apart at time T."""
    if lambda1 == 0.0 or lambda2 == 0.0:
        raise ValueError("need lambda1 != 0 and lambda2 != 0")
    if not T > 0.0:
        raise ValueError(f"T must be positive, got {T}")
    phase = math.exp(2.0 ** (1 - q) * abs(lambda1 / lambda2) * math.pi)
    if not 1.0 + T - phase > 0.0:
        raise ValueError(f"q={q} too small: need 1 + T > exp(2^(1-q) |lambda1/lambda2| pi)")
    c1 = 1.0 / (2.0 * lambda1 * (1.0 + T))
    c2 = (1.0 + T - phase) / (2.0 * lambda1 * (1.0 + T) * T)
    initial = abs(c2 - c1) * math.sqrt(8.0 * math.log(1.0 + math.sqrt(2.0)))
    return IllposedPair(lambda1, lambda2, T, q, c1, c2, initial, 1.0 / (2.0 * lambda1 ** 2),
                        _nontraveling_at(c1, lambda1, lambda2, T), _nontraveling_at(c2, lambda1, lambda2, T))
