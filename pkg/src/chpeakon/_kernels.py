"""Hot inner loops for the peakon ODE and superposition evaluation.

Every kernel has a pure-numpy version and a numba ``@njit`` version. The
numba path is used when numba imports and ``CHPEAKON_DISABLE_NUMBA`` is not
set to a truthy value. Both paths sum in the same index order, so results
agree to roundoff (not bit-for-bit: numba may fuse multiply-adds).
"""

from __future__ import annotations

import os

import numpy as np

_DISABLE = os.environ.get("CHPEAKON_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

try:
    if _DISABLE:
        raise ImportError("disabled by CHPEAKON_DISABLE_NUMBA")
    from numba import njit
    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False


# numpy path

def peakon_rhs_numpy(amp_coef, lam1, speed_coef, p, q):
    """dp_i = 2 sum_j (amp_coef*sgn(q_i-q_j) - lam1) p_i p_j E_ij, dq_i = 2 speed_coef sum_j p_j E_ij."""
    dq_mat = q[:, None] - q[None, :]
    e = np.exp(-np.abs(dq_mat))
    s = np.sign(dq_mat)
    dp = 2.0 * p * (((amp_coef * s - lam1) * e) @ p)
    dq = 2.0 * speed_coef * (e @ p)
    return dp, dq


def peakon_field_numpy(p, q, x):
    return np.exp(-np.abs(x[:, None] - q[None, :])) @ p


def peakon_slope_numpy(p, q, x):
    d = x[:, None] - q[None, :]
    return -(np.sign(d) * np.exp(-np.abs(d))) @ p


def h1_squared_numpy(p, q):
    e = np.exp(-np.abs(q[:, None] - q[None, :]))
    return 2.0 * p @ e @ p


# numba path

if HAS_NUMBA:

    @njit(cache=True)
    def peakon_rhs_numba(amp_coef, lam1, speed_coef, p, q):
        n = p.shape[0]
        dp = np.zeros(n)
        dq = np.zeros(n)
        for i in range(n):
            acc_p = 0.0
            acc_q = 0.0
            for j in range(n):
                d = q[i] - q[j]
                e = np.exp(-abs(d))
                s = 0.0
                if d > 0.0:
                    s = 1.0
                elif d < 0.0:
                    s = -1.0
                acc_p += (amp_coef * s - lam1) * e * p[j]
                acc_q += e * p[j]
            dp[i] = 2.0 * p[i] * acc_p
            dq[i] = 2.0 * speed_coef * acc_q
        return dp, dq

    @njit(cache=True)
    def peakon_field_numba(p, q, x):
        m = x.shape[0]
        out = np.zeros(m)
        for k in range(m):
            acc = 0.0
            for i in range(p.shape[0]):
                acc += p[i] * np.exp(-abs(x[k] - q[i]))
            out[k] = acc
        return out

    @njit(cache=True)
    def peakon_slope_numba(p, q, x):
        m = x.shape[0]
        out = np.zeros(m)
        for k in range(m):
            acc = 0.0
            for i in range(p.shape[0]):
                d = x[k] - q[i]
                if d > 0.0:
                    acc -= p[i] * np.exp(-d)
                elif d < 0.0:
                    acc += p[i] * np.exp(d)
            out[k] = acc
        return out

    @njit(cache=True)
    def h1_squared_numba(p, q):
        acc = 0.0
        for i in range(p.shape[0]):
            for j in range(p.shape[0]):
                acc += p[i] * p[j] * np.exp(-abs(q[i] - q[j]))
        return 2.0 * acc

    peakon_rhs = peakon_rhs_numba
    peakon_field = peakon_field_numba
    peakon_slope = peakon_slope_numba
    h1_squared = h1_squared_numba
else:
    peakon_rhs = peakon_rhs_numpy
    peakon_field = peakon_field_numpy
    peakon_slope = peakon_slope_numpy
    h1_squared = h1_squared_numpy

BACKEND = "numba" if HAS_NUMBA else "numpy"
