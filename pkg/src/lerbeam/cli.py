"""Command line entry point.

::

    lerbeam run      --config FILE --method dosp --out DIR
    lerbeam sweep    --config FILE --method dosp,socp --t-list -70,-80,-90
    lerbeam spectrum --config FILE
    lerbeam map      --config FILE --window x0,x1,y0,y1 --step 10
    lerbeam timing   --config FILE --method mrt,dosp,ridge

Without ``--config`` the shipped default scenario is used.  Exit codes:
0 success, 2 configuration or usage error, 3 precoder failure, 130
interrupted.  Errors are printed to stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import kernels
from ._version import __version__
from .config import ConfigError, Scenario, load_config, default_config
from .evaluation import (
    SWEEP_COLUMNS,
    achievable_power_map,
    evaluate,
    hardware_info,
    run_method,
    threshold_sweep,
    timing_benchmark,
)
from .field import pattern_power_grid, to_db
from .output import CsvWriter, write_json
from .precoder import Method, PrecoderError
from .region import axis_samples
from .socp import SocpError
from .subspace import DegenerateProjectionError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PRECODER = 3
EXIT_INTERRUPTED = 130


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _floats(text: str, n: int | None = None) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"not a comma separated list of numbers: {text!r}") from None
    if n is not None and len(vals) != n:
        raise UsageError(f"expected {n} comma separated values, got {text!r}")
    return vals


def _methods(text: str) -> list[Method]:
    try:
        return [Method(m.strip().lower()) for m in text.split(",") if m.strip()]
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="scenario file (default: shipped reference scenario)")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--threads", type=int, default=None, help="threads for the field kernels")

    p = _Parser(prog="lerbeam", description="Near-field beam design with a low exposure region.")
    p.add_argument("--version", action="version", version=f"lerbeam {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", parents=[common], help="one precoder: report.json and pattern.csv")
    run.add_argument("--method", default="dosp")
    run.add_argument("--window", help="pattern window x0,x1,y0,y1 (default: LER and user)")
    run.add_argument("--step", type=float, help="pattern grid step (default: LER step)")
    run.add_argument("--time-budget", type=float, help="SOCP wall-clock budget in seconds")
    run.add_argument("--warm-start", action="store_true", help="start SOCP from the DoSP weights")
    run.add_argument("--no-fine", action="store_true", help="skip the fine-grid LER check")

    sw = sub.add_parser("sweep", parents=[common], help="fine-grid LER maximum versus threshold")
    sw.add_argument("--method", default="dosp", help="comma separated methods")
    sw.add_argument("--t-list", required=True, help="thresholds in dB, comma separated")
    sw.add_argument("--time-budget", type=float, help="SOCP wall-clock budget per cell")

    sub.add_parser("spectrum", parents=[common], help="normalized singular values of A")

    mp = sub.add_parser("map", parents=[common], help="achievable user power over candidate positions")
    mp.add_argument("--window", help="x0,x1,y0,y1 (default: LER and user)")
    mp.add_argument("--step", type=float, help="candidate spacing (default: 4 LER steps)")

    tm = sub.add_parser("timing", parents=[common], help="precompute and real-time seconds")
    tm.add_argument("--method", default="mrt,dosp,ridge")
    tm.add_argument("--repetitions", type=int, default=3)
    tm.add_argument("--time-budget", type=float, help="SOCP wall-clock budget")
    return p


def default_window(scenario: Scenario) -> list[float]:
    c = scenario.config
    x0, x1 = min(c.ler.x_min, c.user[0]), max(c.ler.x_max, c.user[0])
    y0, y1 = min(c.ler.y_min, c.user[1]), max(c.ler.y_max, c.user[1])
    mx, my = 0.1 * (x1 - x0), 0.1 * (y1 - y0)
    return [x0 - mx, x1 + mx, y0 - my, y1 + my]


def _window_axes(window, step):
    x0, x1, y0, y1 = window
    if not (x0 <= x1 and y0 <= y1):
        raise UsageError(f"window must satisfy x0 <= x1 and y0 <= y1, got {window}")
    if not step > 0:
        raise UsageError(f"step must be positive, got {step}")
    return axis_samples(x0, x1, step), axis_samples(y0, y1, step)


def _socp_opts(args) -> dict:
    opts = {}
    if getattr(args, "time_budget", None):
        opts["time_budget"] = args.time_budget
    if getattr(args, "warm_start", False):
        opts["warm_start"] = "dosp"
    return opts


def cmd_run(args, scenario: Scenario) -> int:
    method = Method(args.method.lower())
    res, pre, real = run_method(scenario, method, socp_opts=_socp_opts(args))
    report = evaluate(res, scenario, precompute_seconds=pre, realtime_seconds=real,
                      fine=not args.no_fine)
    h = scenario.config.config_hash()
    write_json(os.path.join(args.out, "report.json"), {
        "config": scenario.config.to_dict(),
        "report": report.to_dict(),
        "kernel_backend": kernels.BACKEND,
        "hardware": hardware_info(),
    }, h)
    window = _floats(args.window, 4) if args.window else default_window(scenario)
    xs, ys = _window_axes(window, args.step or scenario.config.delta)
    power = to_db(pattern_power_grid(res.weights, scenario.geometry, xs, ys))
    with CsvWriter(os.path.join(args.out, "pattern.csv"), ["x_lambda", "y_lambda", "power_db"], h,
                   {"method": method.value}) as out:
        for i, x in enumerate(xs):
            for j, y in enumerate(ys):
                out.row(float(x), float(y), float(power[i, j]))
    print(json.dumps({"method": method.value, "p_us_rel_mrt": report.p_us_rel_mrt,
                      "grid_max_power_db": report.grid_max_power_db,
                      "fine_grid_max_power_db": report.fine_grid_max_power_db,
                      "k_used": report.k_used}))
    return EXIT_OK


def cmd_sweep(args, scenario: Scenario) -> int:
    t_list = _floats(args.t_list)
    if not t_list:
        raise UsageError("--t-list must contain at least one threshold")
    methods = _methods(args.method)
    if not methods:
        raise UsageError("--method must name at least one method")
    h = scenario.config.config_hash()
    with CsvWriter(os.path.join(args.out, "sweep.csv"), SWEEP_COLUMNS, h) as out:
        threshold_sweep(scenario, methods, t_list, socp_opts=_socp_opts(args),
                        on_row=lambda r: out.row(*r.values()))
    return EXIT_OK


def cmd_spectrum(args, scenario: Scenario) -> int:
    sigma = scenario.basis.spectrum()
    h = scenario.config.config_hash()
    with CsvWriter(os.path.join(args.out, "spectrum.csv"), ["j", "sigma_rel"], h,
                   {"k_init": scenario.basis.k_init}) as out:
        for j, s in enumerate(sigma, start=1):
            out.row(j, float(s))
    return EXIT_OK


def cmd_map(args, scenario: Scenario) -> int:
    window = _floats(args.window, 4) if args.window else default_window(scenario)
    xs, ys = _window_axes(window, args.step or 4 * scenario.config.delta)
    pts = np.array([(x, y) for x in xs for y in ys], dtype=float)
    h = scenario.config.config_hash()
    with CsvWriter(os.path.join(args.out, "map.csv"), ["x_lambda", "y_lambda", "p_us_db"], h) as out:
        achievable_power_map(scenario, pts,
                             on_cell=lambda i, r, v: out.row(float(r[0]), float(r[1]), float(v)))
    return EXIT_OK


def cmd_timing(args, scenario: Scenario) -> int:
    rows = timing_benchmark(scenario, _methods(args.method), args.repetitions,
                            socp_opts=_socp_opts(args))
    write_json(os.path.join(args.out, "timing.json"),
               {"hardware": hardware_info(), "kernel_backend": kernels.BACKEND, "rows": rows},
               scenario.config.config_hash())
    print(json.dumps(rows))
    return EXIT_OK


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "spectrum": cmd_spectrum, "map": cmd_map,
            "timing": cmd_timing}


def _fail(code: int, kind: str, exc: BaseException) -> int:
    print(json.dumps({"error": kind, "type": type(exc).__name__, "message": str(exc),
                      "exit_code": code}), file=sys.stderr)
    return code


_LIST_FLAGS = ("--t-list", "--window")


def _join_list_values(argv):
    """Turn ``--t-list -70,-80`` into ``--t-list=-70,-80`` (argparse sees an option otherwise)."""
    out, it = [], iter(argv)
    for tok in it:
        if tok in _LIST_FLAGS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(_join_list_values(argv))
        if args.threads is not None:
            if args.threads < 1:
                raise UsageError("--threads must be >= 1")
            kernels.set_num_threads(args.threads)
        if getattr(args, "method", None) and args.command == "run":
            _methods(args.method)
        config = load_config(args.config) if args.config else default_config()
        try:
            scenario = Scenario(config)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        os.makedirs(args.out, exist_ok=True)
        return COMMANDS[args.command](args, scenario)
    except (UsageError, ConfigError) as exc:
        return _fail(EXIT_CONFIG, "usage" if isinstance(exc, UsageError) else "config", exc)
    except (PrecoderError, SocpError, DegenerateProjectionError) as exc:
        return _fail(EXIT_PRECODER, "precoder", exc)
    except KeyboardInterrupt as exc:
        return _fail(EXIT_INTERRUPTED, "interrupted", exc)


if __name__ == "__main__":
    sys.exit(main())
