"""Time the numba and numpy peakon kernels side by side.

    python3 benchmarks/bench_kernels.py [--sizes 8,64,512] [--repeat 20]

Numba timings exclude the first (compiling) call. Also times a full
integration of a random N-peakon train under each backend by swapping the
module-level kernel.
"""

import argparse
import time

import numpy as np

from chpeakon import _kernels, preset
from chpeakon.peakon_dynamics import integrate
from chpeakon.state import PeakonState


def best_of(fn, args, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="8,64,512")
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    if not _kernels.HAS_NUMBA:
        print("numba unavailable (or disabled); only numpy timings are shown")

    rng = np.random.default_rng(0)
    params = preset("camassa-holm")
    a_c, l1, s_c = params.amplitude_coupling, params.lambda1, params.speed_coupling
    print(f"{'kernel':<14}{'N':>6}{'numpy [us]':>14}{'numba [us]':>14}{'speedup':>10}")
    for n in (int(v) for v in args.sizes.split(",")):
        p = rng.uniform(0.5, 1.5, n)
        q = np.sort(rng.uniform(-n, n, n))
        x = np.linspace(-n - 5, n + 5, 2000)
        cases = [
            ("rhs", "peakon_rhs", (a_c, l1, s_c, p, q)),
            ("field", "peakon_field", (p, q, x)),
            ("h1_squared", "h1_squared", (p, q)),
        ]
        for label, name, fargs in cases:
            t_np = best_of(getattr(_kernels, name + "_numpy"), fargs, args.repeat)
            if _kernels.HAS_NUMBA:
                fn = getattr(_kernels, name + "_numba")
                fn(*fargs)
                t_nb = best_of(fn, fargs, args.repeat)
                print(f"{label:<14}{n:>6}{t_np * 1e6:>14.1f}{t_nb * 1e6:>14.1f}{t_np / t_nb:>10.2f}")
            else:
                print(f"{label:<14}{n:>6}{t_np * 1e6:>14.1f}{'-':>14}{'-':>10}")

    # whole-integration timing
    n = 16
    st = PeakonState(rng.uniform(0.5, 1.5, n), np.sort(rng.uniform(-20, 20, n)))
    saved = _kernels.peakon_rhs
    rows = [("numpy", _kernels.peakon_rhs_numpy)]
    if _kernels.HAS_NUMBA:
        rows.append(("numba", _kernels.peakon_rhs_numba))
    try:
        for label, kern in rows:
            _kernels.peakon_rhs = kern
            integrate(params, st, 0.1)
            t0 = time.perf_counter()
            traj = integrate(params, st, 20.0)
            print(f"integrate N={n} t=20 [{label}]: {time.perf_counter() - t0:.3f} s, {len(traj.times)} steps")
    finally:
        _kernels.peakon_rhs = saved


if __name__ == "__main__":
    main()
