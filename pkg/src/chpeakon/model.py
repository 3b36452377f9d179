"""Coefficients of the quadratic Camassa-Holm-type family and their admissibility predicates.

The family is

    u_t + l1 u^2 + l2 u u_x + G*(l3 u^2 + l4 u_x^2) + d/dx G*(l5 u^2 + l6 u_x^2) = 0

with G(x) = exp(-|x|)/2 the Helmholtz kernel.
"""

from __future__ import annotations

import math
from dataclasses import astuple, dataclass
from enum import Enum

COEFF_ATOL = 1e-12


def _eq(a: float, b: float) -> bool:
    return abs(a - b) <= COEFF_ATOL


@dataclass(frozen=True)
class LambdaParams:
    lambda1: float
    lambda2: float
    lambda3: float
    lambda4: float
    lambda5: float
    lambda6: float

    def __post_init__(self):
        for name, value in zip(("lambda1", "lambda2", "lambda3", "lambda4", "lambda5", "lambda6"), astuple(self)):
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))

    @classmethod
    def from_sequence(cls, values) -> "LambdaParams":
        values = [float(v) for v in values]
        if len(values) != 6:
            raise ValueError(f"expected 6 coefficients, got {len(values)}")
        return cls(*values)

    def as_tuple(self) -> tuple[float, ...]:
        return astuple(self)

    # composites that recur across the dynamics and the bounds
    @property
    def amplitude_coupling(self) -> float:
        """(2 l5 - l6)/3, the sign-weighted amplitude coefficient of the peakon ODE."""
        return (2.0 * self.lambda5 - self.lambda6) / 3.0

    @property
    def speed_coupling(self) -> float:
        """(l5 + l6)/3, the velocity coefficient of the peakon ODE."""
        return (self.lambda5 + self.lambda6) / 3.0

    @property
    def momentum_stretch(self) -> float:
        return 3.0 * self.lambda2 - 2.0 * self.lambda6

    @property
    def slope_weight(self) -> float:
        """5/2 l2 - 2 l6, the u_x weight of the blow-up functional."""
        return 2.5 * self.lambda2 - 2.0 * self.lambda6


class MomentumSign(str, Enum):
    NONNEGATIVE = "nonnegative"
    NONPOSITIVE = "nonpositive"
    MIXED = "mixed"
    UNKNOWN = "unknown"


class GlobalExistence(str, Enum):
    GLOBAL_BY_GE = "global_by_GE"
    GLOBAL_BY_GE1 = "global_by_GE1"
    NO_GUARANTEE = "no_guarantee"


PRESET_NAMES = ("camassa-holm", "degasperis-procesi", "xia-qiao", "b-family:<b>")


def b_family(b: float) -> LambdaParams:
    return LambdaParams(0.0, 1.0, 0.0, 0.0, b / 2.0, (3.0 - b) / 2.0)


def preset(name: str) -> LambdaParams:
    """Coefficients of a named equation, e.g. ``"camassa-holm"`` or ``"b-family:2.5"``."""
    key = name.strip().lower().replace("_", "-")
    if key == "camassa-holm":
        return LambdaParams(0.0, 1.0, 0.0, 0.0, 1.0, 0.5)
    if key == "degasperis-procesi":
        return LambdaParams(0.0, 1.0, 0.0, 0.0, 1.5, 0.0)
    if key == "xia-qiao":
        return LambdaParams(0.5, 1.0, 0.5, 1.0, 0.5, 1.0)
    if key.startswith("b-family:"):
        try:
            b = float(key.split(":", 1)[1])
        except ValueError:
            raise ValueError(f"bad b-family parameter in {name!r}") from None
        return b_family(b)
    raise ValueError(f"unknown preset {name!r}; expected one of {', '.join(PRESET_NAMES)}")


def peakon_admissibility_violations(params: LambdaParams) -> list[str]:
    """Human-readable list of failed N-peakon coefficient conditions (empty when admissible)."""
    l1, l2, l3, l4, l5, l6 = params.as_tuple()
    out = []
    if not _eq(l3, l1):
        out.append(f"lambda3 = lambda1 violated ({l3!r} != {l1!r})")
    if not _eq(l4, 2.0 * l1):
        out.append(f"lambda4 = 2*lambda1 violated ({l4!r} != {2.0 * l1!r})")
    if not _eq(l5, 1.5 * l2 - l6):
        out.append(f"lambda5 = 3/2*lambda2 - lambda6 violated ({l5!r} != {1.5 * l2 - l6!r})")
    return out


def check_peakon_admissible(params: LambdaParams) -> bool:
    return not peakon_admissibility_violations(params)


def check_single_peakon_traveling(params: LambdaParams) -> bool:
    l1, l2, l3, l4, l5, l6 = params.as_tuple()
    return (_eq(l1, 0.0) and _eq(l3, 0.0) and _eq(l4, 0.0)
            and _eq(l2 - 2.0 * l5 / 3.0 - 2.0 * l6 / 3.0, 0.0))


def h1_conservation_violations(params: LambdaParams) -> list[str]:
    l1, l2, l3, l4, _, l6 = params.as_tuple()
    out = []
    if not _eq(l1 + l3, 0.0):
        out.append(f"lambda1 + lambda3 = 0 violated ({l1 + l3!r})")
    if not _eq(2.0 * l1 + l4, 0.0):
        out.append(f"2*lambda1 + lambda4 = 0 violated ({2.0 * l1 + l4!r})")
    if not _eq(l2, 2.0 * l6):
        out.append(f"lambda2 = 2*lambda6 violated ({l2!r} != {2.0 * l6!r})")
    return out


def check_h1_conservative(params: LambdaParams) -> bool:
    return not h1_conservation_violations(params)


def check_global_existence(params: LambdaParams, m0_sign: MomentumSign | str) -> GlobalExistence:
    """Which global-existence result (if any) covers these coefficients and momentum sign."""
    m0_sign = MomentumSign(m0_sign)
    l1, l2, l3, l4, _, l6 = params.as_tuple()
    if _eq(l1 + l3, 0.0) and _eq(2.0 * l1 + l4, 0.0) and _eq(l2, 0.0) and _eq(l6, 0.0):
        return GlobalExistence.GLOBAL_BY_GE
    if check_peakon_admissible(params) and not _eq(l2, 0.0):
        threshold = abs(0.5 * params.slope_weight)
        if m0_sign is MomentumSign.NONNEGATIVE and l1 >= threshold:
            return GlobalExistence.GLOBAL_BY_GE1
        if m0_sign is MomentumSign.NONPOSITIVE and l1 <= -threshold:
            return GlobalExistence.GLOBAL_BY_GE1
    return GlobalExistence.NO_GUARANTEE
