"""Helmholtz-kernel convolution, exactly on peakon superpositions and spectrally on grids.

With E_l = exp(-|x - q_l|), s_l = sgn(x - q_l), E_ij = exp(-|q_i - q_j|) and
s_ij = sgn(q_i - q_j), convolution with G(x) = exp(-|x|)/2 maps products
E_i E_j and s_i s_j E_i E_j to finite combinations of

    E_i E_j,  s_i E_i E_j,  s_j E_i E_j,  E_l,  s_l E_l

with scalar weights built from E_ij and s_ij. ``PeakonTermBasis`` holds such a
combination and can differentiate it away from the crests.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import LambdaParams
from .state import GridField, PeakonState

PEAK_GUARD = 1e-14


@dataclass(frozen=True)
class Term:
    """coef * s_i^a * s_j^b * E_i * E_j, or coef * s_i^a * E_i when ``j`` is None."""

    coef: float
    i: int
    j: int | None
    a: int = 0
    b: int = 0


@dataclass
class PeakonTermBasis:
    q: np.ndarray
    terms: list[Term] = field(default_factory=list)

    def __add__(self, other: "PeakonTermBasis") -> "PeakonTermBasis":
        return PeakonTermBasis(self.q, self.terms + other.terms)

    def scaled(self, c: float) -> "PeakonTermBasis":
        return PeakonTermBasis(self.q, [Term(c * t.coef, t.i, t.j, t.a, t.b) for t in self.terms])

    def derivative(self) -> "PeakonTermBasis":
        """x-derivative, valid away from the crests (where s_l^2 = 1)."""
        out = []
        for t in self.terms:
            if t.j is None:
                # d/dx s^a E = -s^(a+1) E
                out.append(Term(-t.coef, t.i, None, (t.a + 1) % 2))
            else:
                # d/dx E_i E_j = -(s_i + s_j) E_i E_j
                out.append(Term(-t.coef, t.i, t.j, (t.a + 1) % 2, t.b))
                out.append(Term(-t.coef, t.i, t.j, t.a, (t.b + 1) % 2))
        return PeakonTermBasis(self.q, out)

    def kinds(self) -> set[tuple[bool, int, int]]:
        """Distinct (pair?, a, b) shapes present; used to check closure."""
        return {(t.j is not None, t.a, t.b) for t in self.terms}

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        xs = np.atleast_1d(x)
        d = xs[:, None] - self.q[None, :]
        e = np.exp(-np.abs(d))
        s = np.sign(d)
        out = np.zeros(xs.shape[0])
        for t in self.terms:
            v = t.coef * e[:, t.i]
            if t.a:
                v = v * s[:, t.i]
            if t.j is not None:
                v = v * e[:, t.j]
                if t.b:
                    v = v * s[:, t.j]
            out += v
        return out if x.ndim else float(out[0])


def convolve_peakon_product(i: int, j: int, state: PeakonState, with_sign_pair: bool) -> PeakonTermBasis:
    """G * (E_i E_j), or G * (s_i s_j E_i E_j) when ``with_sign_pair``, as an exact expansion."""
    n = state.n
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"peakon indices ({i}, {j}) out of range for N={n}")
    q = state.q
    eij = float(np.exp(-abs(q[i] - q[j])))
    sij = float(np.sign(q[i] - q[j]))
    even = [Term(-1.0 / 3.0, i, j), Term(eij / 3.0, i, None), Term(eij / 3.0, j, None)]
    w = -sij / 3.0 if with_sign_pair else 2.0 * sij / 3.0
    if w == 0.0:
        return PeakonTermBasis(q, even)
    odd = [
        Term(w, i, j, 0, 1),          # s_j E_i E_j
        Term(-w, i, j, 1, 0),         # -s_i E_i E_j
        Term(w * eij, i, None, 1),    # E_ij s_i E_i
        Term(-w * eij, j, None, 1),   # -E_ij s_j E_j
    ]
    return PeakonTermBasis(q, even + odd)


def nonlocal_expansions(params: LambdaParams, state: PeakonState) -> tuple[PeakonTermBasis, PeakonTermBasis]:
    """(G*(l3 u^2 + l4 u_x^2), d/dx G*(l5 u^2 + l6 u_x^2)) for the superposition."""
    l3, l4, l5, l6 = params.lambda3, params.lambda4, params.lambda5, params.lambda6
    local = PeakonTermBasis(state.q)
    flux = PeakonTermBasis(state.q)
    p = state.p
    for i in range(state.n):
        for j in range(state.n):
            w = p[i] * p[j]
            plain = convolve_peakon_product(i, j, state, False)
            signed = convolve_peakon_product(i, j, state, True)
            local = local + plain.scaled(w * l3) + signed.scaled(w * l4)
            flux = flux + plain.scaled(w * l5) + signed.scaled(w * l6)
    return local, flux.derivative()


def _guard_off_peak(state: PeakonState, x) -> None:
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if state.n and np.any(np.abs(xs[:, None] - state.q[None, :]) <= PEAK_GUARD):
        raise ValueError("evaluation at a peakon crest: the ansatz derivative is undefined there")


def eval_nonlocal_terms(params: LambdaParams, state: PeakonState, x):
    """G*(l3 u^2 + l4 u_x^2) + d/dx G*(l5 u^2 + l6 u_x^2) at off-crest point(s) x."""
    _guard_off_peak(state, x)
    local, flux = nonlocal_expansions(params, state)
    return (local + flux)(x)


# spectral side

def wavenumbers(n: int, L: float) -> np.ndarray:
    """Non-negative rfft wavenumbers xi_k = k*pi/L, k = 0..n/2."""
    return np.pi * np.arange(n // 2 + 1) / L


def derivative_multiplier(n: int, L: float) -> np.ndarray:
    """i*xi with the Nyquist mode zeroed, so the discrete d/dx stays skew-symmetric."""
    ik = 1j * wavenumbers(n, L)
    ik[-1] = 0.0
    return ik


def helmholtz_multiplier(n: int, L: float) -> np.ndarray:
    return 1.0 / (1.0 + wavenumbers(n, L) ** 2)


def helmholtz_convolve_grid(field: GridField) -> GridField:
    """(1 - d^2/dx^2)^{-1} applied spectrally on the periodic grid."""
    uh = np.fft.rfft(field.values)
    return field.with_values(np.fft.irfft(uh * helmholtz_multiplier(field.n, field.L), field.n))
