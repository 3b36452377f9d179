"""N-peakon reduction: right-hand side, adaptive integration, evaluation and residual checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import _kernels
from .kernel import PEAK_GUARD, eval_nonlocal_terms
from .model import LambdaParams, peakon_admissibility_violations
from .state import PeakonState

OVERFLOW_THRESHOLD = 1e12
COLLISION_TOL = 1e-10


class NonAdmissibleError(ValueError):
    pass


class Status(str, Enum):
    REACHED_T_END = "reached_t_end"
    BLOW_UP_DETECTED = "blow_up_detected"
    COLLISION_DETECTED = "collision_detected"
    STEP_UNDERFLOW = "step_underflow"


@dataclass
class Trajectory:
    times: list[float] = field(default_factory=list)
    states: list[PeakonState] = field(default_factory=list)
    status: Status = Status.REACHED_T_END
    events: list[dict] = field(default_factory=list)

    def append(self, state: PeakonState) -> None:
        if self.times and state.t <= self.times[-1]:
            raise ValueError("snapshot times must be strictly increasing")
        self.times.append(state.t)
        self.states.append(state)

    @property
    def final(self) -> PeakonState:
        return self.states[-1]

    @property
    def p(self) -> np.ndarray:
        return np.array([s.p for s in self.states])

    @property
    def q(self) -> np.ndarray:
        return np.array([s.q for s in self.states])


def _require_admissible(params: LambdaParams) -> None:
    bad = peakon_admissibility_violations(params)
    if bad:
        raise NonAdmissibleError("coefficients do not admit N-peakon solutions: " + "; ".join(bad))


def rhs(params: LambdaParams, state: PeakonState, check: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """(dp/dt, dq/dt) of the peakon ODE.

    ``check=False`` skips the admissibility test; the formula is then only a
    probe (used to show that non-admissible coefficients leave a residual).
    """
    if check:
        _require_admissible(params)
    if state.n == 0:
        return np.zeros(0), np.zeros(0)
    return _kernels.peakon_rhs(params.amplitude_coupling, params.lambda1, params.speed_coupling,
                               np.ascontiguousarray(state.p), np.ascontiguousarray(state.q))


def peakon_field_eval(state: PeakonState, x):
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if state.n == 0:
        out = np.zeros(xs.shape[0])
    else:
        out = _kernels.peakon_field(np.ascontiguousarray(state.p), np.ascontiguousarray(state.q), xs)
    return out if np.ndim(x) else float(out[0])


def peakon_slope_eval(state: PeakonState, x):
    """u_x of the superposition (one-sided values undefined exactly at a crest; 0 is returned there)."""
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if state.n == 0:
        out = np.zeros(xs.shape[0])
    else:
        out = _kernels.peakon_slope(np.ascontiguousarray(state.p), np.ascontiguousarray(state.q), xs)
    return out if np.ndim(x) else float(out[0])


def h1_norm_peakon(state: PeakonState) -> float:
    """||u||_{H^1} = sqrt(2 sum_ij p_i p_j E_ij)."""
    if state.n == 0:
        return 0.0
    return math.sqrt(max(_kernels.h1_squared(np.ascontiguousarray(state.p), np.ascontiguousarray(state.q)), 0.0))


def peakon_residual(params: LambdaParams, state: PeakonState, rates, x):
    """Pointwise residual of the nonlocal PDE for the ansatz moving with the given rates."""
    dp, dq = (np.asarray(r, dtype=float) for r in rates)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if state.n and np.any(np.abs(xs[:, None] - state.q[None, :]) <= PEAK_GUARD):
        raise ValueError("residual requested at a peakon crest")
    d = xs[:, None] - state.q[None, :]
    e = np.exp(-np.abs(d))
    s = np.sign(d)
    u = e @ state.p
    ux = -(s * e) @ state.p
    ut = e @ dp + (s * e) @ (state.p * dq)
    res = ut + params.lambda1 * u * u + params.lambda2 * u * ux + eval_nonlocal_terms(params, state, xs)
    return res if np.ndim(x) else float(res[0])


# Dormand-Prince 5(4)
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4

# PI step control exponents (Gustafsson-style, as in Hairer's DOPRI5)
_BETA = 0.04
_EXPO = 0.2 - 0.75 * _BETA


def integrate(params: LambdaParams, state0: PeakonState, t_end: float, rel_tol: float = 1e-10,
              abs_tol: float = 1e-12, output_times=None, max_steps: int = 2_000_000) -> Trajectory:
    """Adaptive Dormand-Prince 5(4) integration of the peakon ODE.

    Snapshots are stored at ``output_times`` (hit exactly) or, when omitted,
    after every accepted step. The run halts early on amplitude overflow,
    on positions crossing, or on step-size underflow.
    """
    _require_admissible(params)
    if not t_end > state0.t:
        raise ValueError(f"t_end={t_end} must exceed the initial time {state0.t}")
    for name, tol in (("rel_tol", rel_tol), ("abs_tol", abs_tol)):
        if not 0.0 < tol < 1.0:
            raise ValueError(f"{name} must lie in (0, 1), got {tol}")

    n = state0.n
    traj = Trajectory()
    traj.append(state0)
    if n == 0:
        traj.append(PeakonState.empty(t_end))
        return traj

    a_c, l1, s_c = params.amplitude_coupling, params.lambda1, params.speed_coupling
    kern = _kernels.peakon_rhs

    def f(y):
        dp, dq = kern(a_c, l1, s_c, y[:n], y[n:])
        return np.concatenate((dp, dq))

    if output_times is None:
        targets = [float(t_end)]
        every_step = True
    else:
        targets = sorted(float(t) for t in output_times if state0.t < t <= t_end)
        if not targets or targets[-1] < t_end:
            targets.append(float(t_end))
        every_step = False

    t = state0.t
    y = np.concatenate((state0.p, state0.q))
    p0max = float(np.max(np.abs(state0.p)))
    k1 = f(y)
    # initial step from the usual derivative-scale heuristic
    scale = abs_tol + rel_tol * np.abs(y)
    d0 = np.sqrt(np.mean((y / scale) ** 2))
    d1 = np.sqrt(np.mean((k1 / scale) ** 2))
    h = 0.01 * d0 / d1 if d0 > 1e-5 and d1 > 1e-5 else 1e-6
    h = min(h, t_end - t)
    err_old = 1e-4
    order0 = np.sign(y[n:, None] - y[None, n:])
    near_logged = set()
    ti = 0
    steps = 0

    def halt(status: Status, **info):
        traj.status = status
        traj.events.append({"kind": status.value, "t": t, "indices": info.pop("indices", []), **info})

    while ti < len(targets):
        target = targets[ti]
        steps += 1
        if steps > max_steps:
            halt(Status.STEP_UNDERFLOW, reason="max_steps exceeded")
            break
        h_try = min(h, target - t)
        last = h_try >= target - t
        ks = [k1]
        for s in range(1, 7):
            ys = y + h_try * sum(_A[s][r] * ks[r] for r in range(s))
            ks.append(f(ys))
        # last stage is evaluated at the 5th-order solution (FSAL)
        y_new = y + h_try * sum(_B5[r] * ks[r] for r in range(6))
        err_vec = h_try * sum(_E[r] * ks[r] for r in range(7))
        sc = abs_tol + rel_tol * np.maximum(np.abs(y), np.abs(y_new))
        err = float(np.sqrt(np.mean((err_vec / sc) ** 2))) if np.all(np.isfinite(err_vec)) else math.inf

        if err <= 1.0:
            t = target if last else t + h_try
            y = y_new
            k1 = ks[6]
            fac = 0.9 * err ** (-_EXPO) * err_old ** _BETA if err > 0 else 5.0
            h = h_try * min(5.0, max(0.2, fac))
            err_old = max(err, 1e-4)
            p_now = y[:n]
            pmax = float(np.max(np.abs(p_now)))
            if pmax > OVERFLOW_THRESHOLD:
                traj.append(PeakonState(y[:n], y[n:], t))
                halt(Status.BLOW_UP_DETECTED, max_abs_p=pmax)
                break
            order = np.sign(y[n:, None] - y[None, n:])
            crossed = np.argwhere((order0 * order) < 0)
            if crossed.size:
                i, j = (int(v) for v in crossed[0])
                halt(Status.COLLISION_DETECTED, indices=[i, j], separation=float(y[n + i] - y[n + j]))
                traj.append(PeakonState(y[:n], y[n:], t))
                break
            order0 = np.where(order != 0, order, order0)
            close = np.argwhere(np.triu(np.abs(y[n:, None] - y[None, n:]) < COLLISION_TOL, 1))
            for i, j in close:
                key = (int(i), int(j))
                if key not in near_logged:
                    near_logged.add(key)
                    traj.events.append({"kind": "near_collision", "t": t, "indices": list(key),
                                        "amplitude_sum": float(abs(p_now[i]) + abs(p_now[j]))})
            if last:
                ti += 1
                traj.append(PeakonState(y[:n], y[n:], t))
            elif every_step:
                traj.append(PeakonState(y[:n], y[n:], t))
        else:
            h = h_try * max(0.2, 0.9 * err ** (-_EXPO)) if math.isfinite(err) else 0.1 * h_try
            if h < 16 * np.finfo(float).eps * max(1.0, abs(t)):
                pmax = float(np.max(np.abs(y[:n])))
                if traj.times[-1] < t:
                    traj.append(PeakonState(y[:n], y[n:], t))
                if pmax > 1e3 * max(p0max, 1.0):
                    halt(Status.BLOW_UP_DETECTED, max_abs_p=pmax, reason="step underflow")
                else:
                    halt(Status.STEP_UNDERFLOW, max_abs_p=pmax)
                break

    if traj.status is Status.REACHED_T_END:
        traj.events.append({"kind": Status.REACHED_T_END.value, "t": t, "indices": []})
    return traj
