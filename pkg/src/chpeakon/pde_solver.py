"""Pseudospectral evolution of the nonlocal equation on a periodic box [-L, L).

Quadratic products are formed in physical space from the 2/3-truncated field
and truncated again, so the scheme is a Galerkin truncation: quadratic
invariants of the continuous equation survive up to time-stepping error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import erfc, erfcx

from .kernel import derivative_multiplier, helmholtz_multiplier, wavenumbers
from .model import LambdaParams, peakon_admissibility_violations
from .state import GridField, grid_points

UX_BLOWUP = 1e8
TAIL_TOL = 1e-4
TAIL_GROWTH = 10.0
MONITOR_COLUMNS = ("t", "h1_norm", "linf_u", "linf_ux", "blowup_functional", "momentum_min", "momentum_max")


class EvolveStatus(str, Enum):
    REACHED_T_END = "reached_t_end"
    BLOW_UP = "blow_up"
    CFL_VIOLATION = "cfl_violation"


class CFLError(ValueError):
    pass


@dataclass
class MonitorSeries:
    rows: list[tuple[float, ...]] = field(default_factory=list)

    def append(self, row) -> None:
        if self.rows and row[0] <= self.rows[-1][0]:
            raise ValueError("monitor times must increase")
        self.rows.append(tuple(float(v) for v in row))

    def column(self, name: str) -> np.ndarray:
        k = MONITOR_COLUMNS.index(name)
        return np.array([r[k] for r in self.rows])

    def __len__(self) -> int:
        return len(self.rows)


class EvolveResult(NamedTuple):
    field: GridField
    monitors: MonitorSeries
    status: EvolveStatus
    snapshots: list
    message: str = ""


class _Spectral:
    """Cached multipliers for one (n, L)."""

    def __init__(self, n: int, L: float):
        self.n, self.L = n, L
        self.xi = wavenumbers(n, L)
        self.ik = derivative_multiplier(n, L)
        self.helm = helmholtz_multiplier(n, L)
        self.dealias = (np.arange(n // 2 + 1) <= n // 3).astype(float)

    def dx(self, u):
        return np.fft.irfft(self.ik * np.fft.rfft(u), self.n)

    def tail_fraction(self, u) -> float:
        """Share of the H^1 spectral energy in the top half of the retained band (n/6, n/3]."""
        e = (1.0 + self.xi ** 2) * np.abs(np.fft.rfft(u)) ** 2
        total = float(e.sum())
        if total == 0.0:
            return 0.0
        k = np.arange(e.shape[0])
        return float(e[(k > self.n // 6) & (k <= self.n // 3)].sum()) / total

    def momentum(self, u):
        return np.fft.irfft((1.0 + self.xi ** 2) * np.fft.rfft(u), self.n)

    def tendency(self, params: LambdaParams, u):
        n = self.n
        uh = np.fft.rfft(u) * self.dealias
        ud = np.fft.irfft(uh, n)
        uxd = np.fft.irfft(self.ik * uh, n)
        sq = np.fft.rfft(ud * ud)
        sx = np.fft.rfft(uxd * uxd)
        cr = np.fft.rfft(ud * uxd)
        l1, l2, l3, l4, l5, l6 = params.as_tuple()
        flux = self.ik * self.helm
        total = ((l1 + l3 * self.helm + l5 * flux) * sq
                 + l2 * cr
                 + (l4 * self.helm + l6 * flux) * sx)
        return -np.fft.irfft(self.dealias * total, n)


_CACHE: dict[tuple[int, float], _Spectral] = {}


def _spectral(n: int, L: float) -> _Spectral:
    key = (n, L)
    if key not in _CACHE:
        _CACHE[key] = _Spectral(n, L)
    return _CACHE[key]


def spectral_rhs(params: LambdaParams, field: GridField) -> GridField:
    """du/dt of the nonlocal equation, as a grid field."""
    return field.with_values(_spectral(field.n, field.L).tendency(params, field.values))


def compute_momentum(field: GridField) -> GridField:
    """m = u - u_xx."""
    return field.with_values(_spectral(field.n, field.L).momentum(field.values))


def spectral_derivative(field: GridField) -> GridField:
    return field.with_values(_spectral(field.n, field.L).dx(field.values))


def h1_norm_grid(field: GridField) -> float:
    sp = _spectral(field.n, field.L)
    u = field.values
    ux = sp.dx(u)
    return math.sqrt(field.dx * float(np.sum(u * u + ux * ux)))


def _functional(params: LambdaParams, u, ux):
    return 2.0 * params.lambda1 * u + params.slope_weight * ux


def blowup_functional(params: LambdaParams, field: GridField) -> float:
    """Grid minimum of 2 l1 u + (5/2 l2 - 2 l6) u_x."""
    ux = _spectral(field.n, field.L).dx(field.values)
    return float(np.min(_functional(params, field.values, ux)))


def _monitor_row(params, sp, u, t, dx):
    ux = sp.dx(u)
    m = sp.momentum(u)
    return (t, math.sqrt(dx * float(np.sum(u * u + ux * ux))), float(np.max(np.abs(u))),
            float(np.max(np.abs(ux))), float(np.min(_functional(params, u, ux))),
            float(np.min(m)), float(np.max(m)))


def cfl_limit(params: LambdaParams, field_dx: float, linf_u: float) -> float:
    return 0.5 * field_dx / max(1.0, abs(params.lambda2) * linf_u)


def evolve(params: LambdaParams, field0: GridField, t_end: float, dt: float,
           snapshot_times=None, keep_history: bool = False,
           ux_limit: float = UX_BLOWUP, tail_tol: float | None = TAIL_TOL,
           tail_growth: float = TAIL_GROWTH) -> EvolveResult:
    """Fixed-step RK4 from field0.t to t_end.

    Halts with ``blow_up`` when max|u_x| exceeds ``ux_limit``, when the field
    turns non-finite, or (unless ``tail_tol`` is None) when the share of
    H^1 energy in the upper half of the retained spectrum exceeds
    max(tail_tol, tail_growth * initial share): a steepening front has then
    reached the grid scale and the run can no longer follow it. Steps are
    shortened to land exactly on ``snapshot_times``; ``keep_history`` keeps
    every step instead.
    """
    if not dt > 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    sp = _spectral(field0.n, field0.L)
    dx = field0.dx
    u = np.array(field0.values)
    t0 = field0.t
    limit = cfl_limit(params, dx, float(np.max(np.abs(u))))
    if dt > limit:
        raise CFLError(f"dt={dt} violates the advective CFL bound {limit:.6g} at launch")

    if not t_end > t0:
        raise ValueError(f"t_end={t_end} must exceed the initial time {t0}")
    stops = sorted({float(ts) for ts in (snapshot_times or []) if t0 < ts < t_end} | {float(t_end)})
    want = set(stops[:-1]) | ({t_end} if snapshot_times is not None and any(
        math.isclose(ts, t_end) for ts in snapshot_times) else set())

    tail_limit = None
    if tail_tol is not None:
        tail_limit = max(tail_tol, tail_growth * sp.tail_fraction(u))
    monitors = MonitorSeries()
    monitors.append(_monitor_row(params, sp, u, t0, dx))
    keep_start = keep_history or (snapshot_times is not None and any(math.isclose(ts, t0) for ts in snapshot_times))
    snapshots = [field0] if keep_start else []
    status, message = EvolveStatus.REACHED_T_END, ""
    t = t0
    for stop in stops:
        while t < stop:
            # shorten the step to land on the stop; absorb slivers into the last full step
            landing = stop - t <= dt * (1.0 + 1e-9)
            h = stop - t if landing else dt
            k1 = sp.tendency(params, u)
            k2 = sp.tendency(params, u + 0.5 * h * k1)
            k3 = sp.tendency(params, u + 0.5 * h * k2)
            k4 = sp.tendency(params, u + h * k3)
            u_new = u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t_new = stop if landing else t + dt
            if not np.all(np.isfinite(u_new)):
                status, message = EvolveStatus.BLOW_UP, f"non-finite values at t={t_new:.17g}"
                break
            u, t = u_new, t_new
            row = _monitor_row(params, sp, u, t, dx)
            monitors.append(row)
            if keep_history or (t == stop and stop in want):
                snapshots.append(GridField(field0.L, field0.n, u, t))
            linf_u, linf_ux = row[2], row[3]
            if linf_ux > ux_limit:
                status = EvolveStatus.BLOW_UP
                message = f"max|u_x| = {linf_ux:.6g} exceeded {ux_limit:.3g} at t={t:.17g}"
                break
            if tail_limit is not None:
                tail = sp.tail_fraction(u)
                if tail > tail_limit:
                    status = EvolveStatus.BLOW_UP
                    message = (f"front reached the grid scale (spectral tail {tail:.3g} > {tail_limit:.3g}, "
                               f"max|u_x| = {linf_ux:.6g}) at t={t:.17g}")
                    break
            if t < t_end and dt > cfl_limit(params, dx, linf_u):
                status = EvolveStatus.CFL_VIOLATION
                message = f"dt={dt} exceeds the CFL bound {cfl_limit(params, dx, linf_u):.6g} at t={t:.17g}"
                break
        if status is not EvolveStatus.REACHED_T_END:
            break
    final = GridField(field0.L, field0.n, u, t)
    if snapshots and snapshots[-1].t != final.t and snapshot_times is None:
        snapshots.append(final)
    return EvolveResult(final, monitors, status, snapshots, message)


# initial data

def mollified_peakon_profile(x, p: float, q: float, width: float):
    """p e^{-|x-q|} convolved with a unit-mass Gaussian of standard deviation ``width``."""
    y = np.asarray(x, dtype=float) - q
    if width <= 0.0:
        return p * np.exp(-np.abs(y))
    w = width
    gauss = np.exp(-y * y / (2.0 * w * w))
    return p * 0.5 * (_one_sided(y, w, gauss) + _one_sided(-y, w, gauss))


def _one_sided(y, w, gauss):
    """e^{w^2/2 - y} erfc((w^2 - y)/(sqrt2 w)), evaluated without overflow."""
    z = (w * w - y) / (math.sqrt(2.0) * w)
    with np.errstate(over="ignore", invalid="ignore"):
        return np.where(z >= 0.0, erfcx(np.maximum(z, 0.0)) * gauss,
                        erfc(np.minimum(z, 0.0)) * np.exp(np.minimum(w * w / 2.0 - y, 700.0)))


def peakon_field(L: float, n: int, p, q, mollify: float | None = None, t: float = 0.0) -> GridField:
    x = grid_points(L, n)
    u = np.zeros(n)
    for pi, qi in zip(np.atleast_1d(p), np.atleast_1d(q)):
        u += mollified_peakon_profile(x, float(pi), float(qi), mollify or 0.0)
    return GridField(L, n, u, t)


def gaussian_field(L: float, n: int, a: float, w: float, x0: float = 0.0) -> GridField:
    x = grid_points(L, n)
    return GridField(L, n, a * np.exp(-((x - x0) / w) ** 2))


def neg_slope_field(L: float, n: int, a: float, w: float) -> GridField:
    """u0 = -a (x/w) exp(-(x/w)^2): an odd bump whose steepest slope is -a/w at x = 0."""
    x = grid_points(L, n)
    return GridField(L, n, -a * (x / w) * np.exp(-(x / w) ** 2))


def positive_momentum_field(L: float, n: int, a: float, w: float, x0: float = 0.0) -> GridField:
    """u = G * m with m a Gaussian bump, so the momentum is smooth and positive."""
    m = gaussian_field(L, n, a, w, x0)
    return m.with_values(np.fft.irfft(np.fft.rfft(m.values) * helmholtz_multiplier(n, L), n))


# characteristics

@dataclass
class CharacteristicTrace:
    x0: float
    times: np.ndarray
    q: np.ndarray
    qx: np.ndarray
    m: np.ndarray
    invariant: np.ndarray

    @property
    def relative_drift(self) -> float:
        i0 = self.invariant[0]
        return float(np.max(np.abs(self.invariant - i0)) / abs(i0))


class _SnapshotInterp:
    """Periodic cubic splines of u, u_x and m for one snapshot, built on demand."""

    def __init__(self, snap: GridField):
        self.snap = snap
        self._splines = None

    def splines(self):
        if self._splines is None:
            sp = _spectral(self.snap.n, self.snap.L)
            xs = np.append(self.snap.x, self.snap.L)
            u = self.snap.values
            data = np.column_stack([u, sp.dx(u), sp.momentum(u)])
            data = np.vstack([data, data[:1]])
            self._splines = CubicSpline(xs, data, bc_type="periodic", axis=0)
        return self._splines

    def __call__(self, x):
        L = self.snap.L
        xw = (x + L) % (2.0 * L) - L
        return self.splines()(xw)


def trace_characteristic(params: LambdaParams, snapshots, x0: float, core_margin: float = 2.0) -> CharacteristicTrace:
    """Follow dq/dt = l2 u(q, t), d(q_x)/dt = l2 u_x(q, t) q_x through stored snapshots.

    Fields are interpolated with periodic cubic splines in x and linearly in
    time; the characteristic ODE is advanced by RK4 with one step per
    snapshot interval.
    """
    l2 = params.lambda2
    if l2 == 0.0:
        raise ValueError("characteristics need lambda2 != 0")
    bad = peakon_admissibility_violations(params)
    if bad:
        raise ValueError("characteristic invariant needs the N-peakon coefficient relations: " + "; ".join(bad))
    if len(snapshots) < 2:
        raise ValueError("need at least two snapshots")
    interps = [_SnapshotInterp(s) for s in snapshots]
    L = snapshots[0].L
    times = np.array([s.t for s in snapshots])

    def sample(k, theta, x):
        a = interps[k](x)
        if theta == 0.0:
            return a
        return (1.0 - theta) * a + theta * interps[k + 1](x)

    def vel(k, theta, y):
        vals = sample(k, theta, y[0])
        return np.array([l2 * vals[0], l2 * vals[1]]), vals

    expo_q = 2.0 * params.lambda1 / l2
    expo_qx = params.momentum_stretch / l2

    # y = (q, log q_x)
    y = np.array([x0, 0.0])
    qs, lqs, ms = [x0], [0.0], [float(sample(0, 0.0, x0)[2])]
    for k in range(len(snapshots) - 1):
        h = times[k + 1] - times[k]
        k1, _ = vel(k, 0.0, y)
        k2, _ = vel(k, 0.5, y + 0.5 * h * k1)
        k3, _ = vel(k, 0.5, y + 0.5 * h * k2)
        k4, _ = vel(k + 1, 0.0, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if abs(y[0]) > L - core_margin:
            raise ValueError(f"characteristic from x0={x0} left the domain core at t={times[k + 1]}")
        qs.append(float(y[0]))
        lqs.append(float(y[1]))
        ms.append(float(interps[k + 1](y[0])[2]))
    q = np.array(qs)
    lqx = np.array(lqs)
    m = np.array(ms)
    invariant = np.exp(expo_q * q + expo_qx * lqx) * m
    return CharacteristicTrace(float(x0), times, q, np.exp(lqx), m, invariant)


def characteristics_invariant_drift(params: LambdaParams, snapshots, x0) -> float:
    """Largest relative drift of exp(2 l1 q/l2) m(q,t) q_x^((3 l2 - 2 l6)/l2) over the given starting points."""
    starts = np.atleast_1d(np.asarray(x0, dtype=float))
    return max(trace_characteristic(params, snapshots, float(s)).relative_drift for s in starts)
