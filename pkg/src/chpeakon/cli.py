"""Command-line interface: simulate, fit, verify, bound and besov."""

from __future__ import annotations

import argparse
import configparser
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from . import serialization as io
from .analysis import besov_32_blocks, illposed_pair, slope_functional_grid, wave_breaking_bound
from .closed_forms import DegenerateConstantsError, fit_two_peakon, two_peakon_separation, two_peakon_state
from .model import LambdaParams, preset
from .pde_solver import (CFLError, EvolveStatus, cfl_limit, evolve, gaussian_field, h1_norm_grid,
                         neg_slope_field, peakon_field)
from .peakon_dynamics import NonAdmissibleError, Status, integrate, peakon_field_eval
from .state import GridField, PeakonState
from .verification import SUITES, run_suite

EXIT_OK, EXIT_CONFIG, EXIT_HALT = 0, 2, 3


class ConfigError(ValueError):
    pass


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in str(text).replace(" ", "").split(",") if v != ""]
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from exc


def _float(text) -> float:
    try:
        return float(text)
    except ValueError as exc:
        raise ConfigError(f"expected a number, got {text!r}") from exc


def _int(text) -> int:
    try:
        return int(text)
    except ValueError as exc:
        raise ConfigError(f"expected an integer, got {text!r}") from exc


def _flag(text) -> bool:
    if isinstance(text, bool):
        return text
    v = str(text).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def _str(text) -> str:
    return str(text)


@dataclass(frozen=True)
class Option:
    section: str
    convert: Callable
    default: object
    help: str


OPTIONS: dict[str, Option] = {
    "preset": Option("model", _str, None, "camassa-holm, degasperis-procesi, xia-qiao or b-family:<b>"),
    "lambda": Option("model", _floats, None, "explicit lambda1..lambda6, comma-separated"),
    "p": Option("ode", _floats, None, "peakon amplitudes"),
    "q": Option("ode", _floats, None, "peakon positions"),
    "t0": Option("ode", _float, 0.0, "initial time"),
    "t_end": Option("ode", _float, None, "final time"),
    "rel_tol": Option("ode", _float, 1e-10, "relative tolerance"),
    "abs_tol": Option("ode", _float, 1e-12, "absolute tolerance"),
    "n_out": Option("ode", _int, 100, "number of evenly spaced output times"),
    "profile_times": Option("ode", _floats, None, "times at which to write u(x) profiles"),
    "x_grid": Option("ode", _floats, "-10,10,401", "profile grid as start,stop,count"),
    "L": Option("pde", _float, 40.0, "half-length of the periodic box"),
    "n": Option("pde", _int, 4096, "grid points (power of two)"),
    "dt": Option("pde", _float, None, "time step (default: cfl_factor times the launch CFL bound)"),
    "cfl_factor": Option("pde", _float, 0.5, "fraction of the CFL bound used when dt is not given"),
    "init": Option("pde", _str, "peakon", "peakon, mollified, gaussian, neg_slope or zero"),
    "width": Option("pde", _float, 0.1, "mollifier width for init=mollified"),
    "a": Option("pde", _float, 1.0, "amplitude for gaussian / neg_slope"),
    "w": Option("pde", _float, 1.0, "width for gaussian / neg_slope"),
    "x0": Option("pde", _float, 0.0, "centre for gaussian"),
    "snapshot_times": Option("pde", _floats, None, "times at which to write snapshots"),
    "tail_tol": Option("pde", _float, 1e-4, "spectral-tail share that halts a steepening run (<= 0 disables)"),
    "binary": Option("pde", _flag, False, "also write snapshots in the binary field format"),
    "suite": Option("analysis", _str, None, "verification suite name or 'all'"),
    "xi1": Option("analysis", _float, None, "first amplitude"),
    "xi2": Option("analysis", _float, None, "second amplitude"),
    "eta1": Option("analysis", _float, None, "first position"),
    "eta2": Option("analysis", _float, None, "second position"),
    "emit_trajectory": Option("analysis", _flag, False, "write the closed-form trajectory CSV"),
    "s_range": Option("analysis", _floats, "1,3,201", "shifted-time grid as start,stop,count"),
    "u0_h1": Option("analysis", _float, None, "H^1 norm of u0 (skips the grid computation)"),
    "slope_min": Option("analysis", _float, None, "minimum of the slope functional"),
    "slope_max": Option("analysis", _float, None, "maximum of the slope functional"),
    "q_max": Option("analysis", _int, 16, "highest dyadic block evaluated"),
    "illposed": Option("analysis", _flag, False, "build the norm-inflation pair instead"),
    "lambda1": Option("analysis", _float, 0.5, "lambda1 of the norm-inflation pair"),
    "lambda2": Option("analysis", _float, 1.0, "lambda2 of the norm-inflation pair"),
    "T": Option("analysis", _float, 1.0, "time horizon of the norm-inflation pair"),
    "level": Option("analysis", _int, 12, "dyadic level q of the norm-inflation pair"),
    "out": Option("output", _str, "out", "output directory"),
}

_MODEL = ["preset", "lambda"]
_PDE_INIT = ["L", "n", "init", "p", "q", "width", "a", "w", "x0"]
COMMAND_OPTIONS = {
    "simulate-ode": _MODEL + ["p", "q", "t0", "t_end", "rel_tol", "abs_tol", "n_out", "profile_times", "x_grid", "out"],
    "simulate-pde": _MODEL + _PDE_INIT + ["t_end", "dt", "cfl_factor", "snapshot_times", "tail_tol", "binary", "out"],
    "fit-two-peakon": ["xi1", "xi2", "eta1", "eta2", "t0", "emit_trajectory", "s_range", "out"],
    "verify": ["suite", "out"],
    "bound": _MODEL + _PDE_INIT + ["u0_h1", "slope_min", "slope_max", "out"],
    "besov": ["p", "q", "q_max", "illposed", "lambda1", "lambda2", "T", "level", "out"],
}


def _flag_name(key: str) -> str:
    return "--" + key.replace("_", "-")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chpeakon", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd, keys in COMMAND_OPTIONS.items():
        sp = sub.add_parser(cmd)
        sp.add_argument("--config", help="INI file with [model] [ode] [pde] [analysis] [output] sections")
        for key in keys:
            opt = OPTIONS[key]
            if opt.convert is _flag:
                sp.add_argument(_flag_name(key), dest=key, action="store_const", const=True, default=None,
                                help=opt.help)
            else:
                sp.add_argument(_flag_name(key), dest=key, default=None, help=opt.help)
    return parser


def read_config_file(path) -> dict[str, object]:
    cp = configparser.ConfigParser()
    cp.optionxform = str
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    values = {}
    for section in cp.sections():
        if section not in {o.section for o in OPTIONS.values()}:
            raise ConfigError(f"unknown config section [{section}]")
        for key, raw in cp.items(section):
            opt = OPTIONS.get(key)
            if opt is None or opt.section != section:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            values[key] = raw
    return values


def resolve(command: str, args: argparse.Namespace) -> dict[str, object]:
    """Defaults, then the config file, then flags."""
    keys = COMMAND_OPTIONS[command]
    raw = {k: OPTIONS[k].default for k in keys}
    if args.config:
        file_values = read_config_file(args.config)
        raw.update({k: v for k, v in file_values.items() if k in raw})
    for k in keys:
        v = getattr(args, k, None)
        if v is not None:
            raw[k] = v
    return {k: (None if v is None else OPTIONS[k].convert(v)) for k, v in raw.items()}


def _echo_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, list):
        return ",".join(repr(x) for x in v)
    return repr(v) if isinstance(v, float) else str(v)


def echo_config(cfg: dict, out: Path) -> None:
    cp = configparser.ConfigParser()
    cp.optionxform = str
    for k, v in cfg.items():
        if v is None:
            continue
        sec = OPTIONS[k].section
        if not cp.has_section(sec):
            cp.add_section(sec)
        cp.set(sec, k, _echo_value(v))
    with open(out / "config.echo", "w") as fh:
        cp.write(fh)


def _require(cfg: dict, *keys: str) -> None:
    missing = [_flag_name(k) for k in keys if cfg.get(k) is None]
    if missing:
        raise ConfigError("missing required option(s): " + ", ".join(missing))


def model_params(cfg: dict) -> LambdaParams:
    if cfg.get("lambda") is not None:
        if cfg.get("preset") is not None:
            raise ConfigError("give either --preset or --lambda, not both")
        if len(cfg["lambda"]) != 6:
            raise ConfigError(f"--lambda needs six values, got {len(cfg['lambda'])}")
        return LambdaParams.from_sequence(cfg["lambda"])
    if cfg.get("preset") is None:
        raise ConfigError("a model is required: --preset or --lambda")
    try:
        return preset(cfg["preset"])
    except (KeyError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _peakon_lists(cfg: dict) -> tuple[list[float], list[float]]:
    _require(cfg, "p", "q")
    if len(cfg["p"]) != len(cfg["q"]):
        raise ConfigError(f"--p and --q lengths differ ({len(cfg['p'])} vs {len(cfg['q'])})")
    return cfg["p"], cfg["q"]


def _grid_spec(spec, name: str) -> np.ndarray:
    if len(spec) != 3 or spec[2] < 2 or spec[2] != int(spec[2]):
        raise ConfigError(f"{name} must be start,stop,count with count >= 2")
    return np.linspace(spec[0], spec[1], int(spec[2]))


def _out_dir(cfg: dict) -> Path:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


# commands

def cmd_simulate_ode(cfg: dict) -> int:
    params = model_params(cfg)
    p, q = _peakon_lists(cfg)
    _require(cfg, "t_end")
    t0, t_end = cfg["t0"], cfg["t_end"]
    if not t_end > t0:
        raise ConfigError("--t-end must exceed --t0")
    if cfg["n_out"] < 1:
        raise ConfigError("--n-out must be positive")
    xs = _grid_spec(cfg["x_grid"], "--x-grid")
    profile_times = sorted(t for t in (cfg["profile_times"] or []) if t0 <= t <= t_end)
    out_times = set(np.linspace(t0, t_end, cfg["n_out"] + 1)[1:].tolist()) | {t for t in profile_times if t > t0}
    try:
        traj = integrate(params, PeakonState(p, q, t0), t_end, rel_tol=cfg["rel_tol"], abs_tol=cfg["abs_tol"],
                         output_times=sorted(out_times))
    except NonAdmissibleError as exc:
        raise ConfigError(str(exc)) from exc
    out = _out_dir(cfg)
    io.write_trajectory(out / "trajectory.csv", traj, with_h1=True)
    io.write_events(out / "events.json", traj)
    by_time = {st.t: st for st in traj.states}
    for t in profile_times:
        if t in by_time:
            io.write_csv(out / f"profile_t{io.fmt(t)}.csv", ["x", "u"], zip(xs, peakon_field_eval(by_time[t], xs)))
    n = len(p)
    io.write_gnuplot(out / "plots" / "trajectory.gp", "../trajectory.csv", "peakon positions", 1,
                     {f"q_{i + 1}": 2 + n + i for i in range(n)}, ylabel="q")
    final = traj.final
    print(f"status: {traj.status.value}  t = {final.t:.10g}")
    print("p = " + ", ".join(f"{v:.10g}" for v in final.p))
    print("q = " + ", ".join(f"{v:.10g}" for v in final.q))
    return EXIT_OK if traj.status is Status.REACHED_T_END else EXIT_HALT


def initial_field(cfg: dict) -> GridField:
    L, n, kind = cfg["L"], cfg["n"], cfg["init"]
    try:
        if kind == "peakon":
            return peakon_field(L, n, *_peakon_lists(cfg))
        if kind == "mollified":
            return peakon_field(L, n, *_peakon_lists(cfg), mollify=cfg["width"])
        if kind == "gaussian":
            return gaussian_field(L, n, cfg["a"], cfg["w"], cfg["x0"])
        if kind == "neg_slope":
            return neg_slope_field(L, n, cfg["a"], cfg["w"])
        if kind == "zero":
            return GridField(L, n, np.zeros(n))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unknown --init {kind!r}; choose peakon, mollified, gaussian, neg_slope or zero")


def cmd_simulate_pde(cfg: dict) -> int:
    params = model_params(cfg)
    _require(cfg, "t_end")
    f0 = initial_field(cfg)
    if not cfg["t_end"] > f0.t:
        raise ConfigError("--t-end must be positive")
    dt = cfg["dt"]
    if dt is None:
        if not 0.0 < cfg["cfl_factor"] <= 1.0:
            raise ConfigError("--cfl-factor must lie in (0, 1]")
        dt = cfg["cfl_factor"] * cfl_limit(params, f0.dx, float(np.max(np.abs(f0.values))))
    tail_tol = cfg["tail_tol"] if cfg["tail_tol"] and cfg["tail_tol"] > 0 else None
    snaps = cfg["snapshot_times"] or [cfg["t_end"]]
    try:
        res = evolve(params, f0, cfg["t_end"], dt, snapshot_times=snaps, tail_tol=tail_tol)
    except (CFLError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    out = _out_dir(cfg)
    for snap in res.snapshots:
        stem = f"snapshot_t{io.fmt(snap.t)}"
        io.write_field_csv(out / f"{stem}.csv", snap)
        if cfg["binary"]:
            io.write_field_binary(out / f"{stem}.bin", snap)
    io.write_field_csv(out / "final.csv", res.field)
    io.write_monitors(out / "monitors.csv", res.monitors)
    io.write_json(out / "status.json", {"status": res.status.value, "t": res.field.t, "dt": dt,
                                        "message": res.message})
    io.write_gnuplot(out / "plots" / "monitors.gp", "../monitors.csv", "monitors", 1,
                     {"linf_u": 3, "linf_ux": 4, "h1_norm": 2})
    print(f"status: {res.status.value}  t = {res.field.t:.10g}  dt = {dt:.6g}")
    if res.message:
        print(res.message)
    if res.status is EvolveStatus.REACHED_T_END:
        return EXIT_OK
    if res.status is EvolveStatus.BLOW_UP:
        return EXIT_HALT
    print("time step too large for the evolving solution; lower --dt or --cfl-factor", file=sys.stderr)
    return EXIT_CONFIG


def cmd_fit_two_peakon(cfg: dict) -> int:
    _require(cfg, "xi1", "xi2", "eta1", "eta2")
    try:
        consts = fit_two_peakon(cfg["xi1"], cfg["xi2"], cfg["eta1"], cfg["eta2"], cfg["t0"])
    except DegenerateConstantsError as exc:
        raise ConfigError(str(exc)) from exc
    out = _out_dir(cfg)
    d = consts.to_dict()
    io.write_json(out / "constants.json", d)
    print(json.dumps(d, indent=2, sort_keys=True))
    if cfg["emit_trajectory"]:
        s_grid = _grid_spec(cfg["s_range"], "--s-range")
        if s_grid.min() <= 0:
            raise ConfigError("--s-range must stay positive")
        rows, skipped = [], []
        for s in s_grid:
            try:
                st = two_peakon_state(consts, s)
                rows.append((s, consts.time_of(s), st.p[0], st.p[1], st.q[0], st.q[1],
                             two_peakon_separation(consts, s)))
            except (ValueError, ZeroDivisionError):
                skipped.append(float(s))
        io.write_csv(out / "two_peakon.csv", ["s", "t", "p1", "p2", "q1", "q2", "separation"], rows)
        io.write_gnuplot(out / "plots" / "two_peakon.gp", "../two_peakon.csv", "two-peakon solution", 2,
                         {"p1": 3, "p2": 4, "q1": 5, "q2": 6})
        if skipped:
            print(f"{len(skipped)} s values skipped where the closed form is undefined "
                  f"(first {skipped[0]:.6g})", file=sys.stderr)
    return EXIT_OK


def cmd_verify(cfg: dict) -> int:
    _require(cfg, "suite")
    names = list(SUITES) if cfg["suite"] == "all" else [cfg["suite"]]
    if any(n not in SUITES for n in names):
        raise ConfigError(f"unknown suite {cfg['suite']!r}; choose from {', '.join(SUITES)} or all")
    out = _out_dir(cfg)
    report, ok = {}, True
    for name in names:
        print(f"suite {name}")
        checks = run_suite(name)
        for c in checks:
            print("  " + c.line())
            ok &= c.passed
        report[name] = [{"name": c.name, "value": c.value, "threshold": c.threshold,
                         "relation": c.relation, "passed": c.passed} for c in checks]
    io.write_json(out / "verify.json", report)
    return EXIT_OK if ok else 1


def cmd_bound(cfg: dict) -> int:
    params = model_params(cfg)
    if params.lambda2 == params.lambda6:
        raise ConfigError("the wave-breaking bound excludes lambda2 = lambda6")
    if cfg["u0_h1"] is not None:
        _require(cfg, "slope_min", "slope_max")
        h1, smin, smax = cfg["u0_h1"], cfg["slope_min"], cfg["slope_max"]
    else:
        f0 = initial_field(cfg)
        y = slope_functional_grid(params, f0)
        h1, smin, smax = h1_norm_grid(f0), float(y.min()), float(y.max())
    try:
        cert = wave_breaking_bound(params, h1, smin, smax)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    out = _out_dir(cfg)
    if cert is None:
        io.write_json(out / "bound.json", {"certificate": None, "u0_h1": h1, "slope_min": smin, "slope_max": smax})
        print("no bound applies")
        return EXIT_OK
    d = {**cert.to_dict(), "u0_h1": h1}
    io.write_json(out / "bound.json", d)
    print(json.dumps(d, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_besov(cfg: dict) -> int:
    out = _out_dir(cfg)
    try:
        if cfg["illposed"]:
            pair = illposed_pair(cfg["lambda1"], cfg["lambda2"], cfg["T"], cfg["level"])
            # the crests sit ~2^-level apart at time T; resolve blocks past that scale
            q_max = max(cfg["q_max"], cfg["level"] + 6)
            res = besov_32_blocks(pair.difference_T, q_max)
            d = {**pair.to_dict(), "difference_norm_T": res.norm, "difference_tail_bound_T": res.tail_bound,
                 "q_max": q_max}
        else:
            p, q = _peakon_lists(cfg)
            res = besov_32_blocks(PeakonState(p, q), cfg["q_max"])
            d = {"norm": res.norm, "norm_squared": res.squared, "low_block": res.low_block,
                 "max_dyadic_block": float(res.blocks.max()), "tail_bound": res.tail_bound, "q_max": cfg["q_max"]}
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    io.write_json(out / "besov.json", d)
    print(json.dumps(d, indent=2, sort_keys=True))
    if not cfg["illposed"] and res.tail_may_dominate:
        print("warning: the bound on blocks beyond q_max exceeds the computed maximum", file=sys.stderr)
    return EXIT_OK


COMMANDS = {
    "simulate-ode": cmd_simulate_ode,
    "simulate-pde": cmd_simulate_pde,
    "fit-two-peakon": cmd_fit_two_peakon,
    "verify": cmd_verify,
    "bound": cmd_bound,
    "besov": cmd_besov,
}


def _glue_negative_values(argv: list[str]) -> list[str]:
    """Turn '--p -1,2' into '--p=-1,2' so argparse does not read the value as a flag."""
    out: list[str] = []
    for tok in argv:
        if (out and out[-1].startswith("--") and "=" not in out[-1] and len(tok) > 1
                and tok[0] == "-" and (tok[1].isdigit() or tok[1] == ".")):
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = _glue_negative_values(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = resolve(args.command, args)
        code = COMMANDS[args.command](cfg)
        echo_config(cfg, Path(cfg["out"]))
        return code
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
