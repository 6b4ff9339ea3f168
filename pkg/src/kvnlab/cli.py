"""Command-line front end.

Every subcommand writes its outputs plus a ``manifest.json`` into ``--out-dir``.
Exit codes: 0 success, 2 config error, 3 numerical-guard violation,
4 a check or the acceptance suite failed.
"""

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .acceptance import TINY, TINY_FREE, criterion_1, run_suite
from .action import stationarity_certificate
from .characteristics import (classical_trajectory, extended_trajectory, free_heisenberg_closed_form,
                              heisenberg_dense_check, strip_private)
from .config import ConfigError, GuardError, from_dict, parse_config, shipped_config
from .phase_space import gaussian_packet
from .propagator import build_plan, evolve

EXIT_CONFIG, EXIT_GUARD, EXIT_FAILED = 2, 3, 4
HEISENBERG_TIMES = (0.25, 0.5, 1.0)


def write_json(path: Path, obj):
    path.write_text(json.dumps(obj, sort_keys=True, indent=2, default=_jsonable) + "\n")


def _jsonable(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def load_config(args):
    cfg = parse_config(args.config) if args.config else shipped_config("harmonic")
    overrides = {"seed": args.seed, "dt": args.dt, "steps": args.steps}
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if overrides:
        cfg = from_dict({**cfg.raw, **overrides})
    return cfg


def cmd_evolve(cfg, out: Path):
    psi0 = gaussian_packet(cfg.grid, cfg.x0, cfg.v0, cfg.sigma_x, cfg.sigma_v)
    plan = build_plan(cfg.grid, cfg.potential, cfg.mass, cfg.dt)
    _, series = evolve(psi0, plan, cfg.steps, cfg.record_every)
    if not np.all(np.isfinite(series.norm)):
        raise FloatingPointError("non-finite norm during propagation")
    series.to_csv(out / "observables.csv")
    return ["observables.csv"], True


def cmd_trajectory(cfg, out: Path):
    a = cfg.action
    n = int(round(a["T"] / a["h"]))
    classical_trajectory(cfg.x0, cfg.v0, cfg.potential, cfg.mass, a["h"], n).to_csv(out / "classical_path.csv")
    extended_trajectory(cfg.x0, cfg.v0, cfg.lambda_x0, cfg.lambda_v0, cfg.potential, cfg.mass,
                        a["h"], n).to_csv(out / "extended_path.csv")
    return ["classical_path.csv", "extended_path.csv"], True


def cmd_action_check(cfg, out: Path):
    cert = stationarity_certificate(cfg.action_scenario())
    write_json(out / "action_report.json", cert)
    return ["action_report.json"], cert["passed"]


def cmd_commutator_check(cfg, out: Path):
    rep = criterion_1(cfg.seed)
    rep["grid"] = repr(TINY)
    write_json(out / "commutator_report.json", rep)
    return ["commutator_report.json"], rep["passed"]


def cmd_heisenberg_check(cfg, out: Path):
    # free streaming reaches x + v t, so a narrow velocity range keeps it off the periodic seam
    grid = TINY_FREE if cfg.potential.kind == "free" else TINY
    rows = [strip_private(heisenberg_dense_check(grid, cfg.potential, cfg.mass, t)) for t in HEISENBERG_TIMES]
    ok = all(r["unitarity_error"] < 1e-10 and r["commutator_x_lambda_x_error"] < 1e-5
             and r["commutator_v_lambda_v_error"] < 1e-5 for r in rows)
    rep = {"grid": repr(grid), "potential": cfg.potential.to_dict(), "mass": cfg.mass,
           "times": list(HEISENBERG_TIMES), "dense": rows}
    if cfg.potential.kind == "free":
        rep["free_closed_form"] = [free_heisenberg_closed_form(TINY_FREE, t) for t in HEISENBERG_TIMES]
        ok = ok and all(f["max_interior_element"] < 1e-8 for f in rep["free_closed_form"])
    rep["passed"] = ok
    write_json(out / "heisenberg_report.json", rep)
    return ["heisenberg_report.json"], ok


def cmd_accept(cfg, out: Path, only=None):
    report, timings = run_suite(cfg.seed, only)
    ok = report["all_passed"] and all(t["within_limit"] for t in timings["criteria"].values())
    ok = ok and timings["within_limit"]
    verdict = "PASS" if ok else "FAIL"
    print(f"[{verdict}] acceptance suite ({timings['total_seconds']:.1f}s, limit 120s)")
    write_json(out / "acceptance_report.json", report)
    write_json(out / "acceptance_timings.json", timings)
    return ["acceptance_report.json", "acceptance_timings.json"], ok


COMMANDS = {
    "evolve": (cmd_evolve, "propagate the wavefunction and write the observable series"),
    "trajectory": (cmd_trajectory, "integrate classical and extended characteristics"),
    "action-check": (cmd_action_check, "stationarity certificate for both action principles"),
    "commutator-check": (cmd_commutator_check, "dense commutator report on a 16x16 grid"),
    "heisenberg-check": (cmd_heisenberg_check, "dense Heisenberg-picture report on a 16x16 grid"),
    "accept": (cmd_accept, "run the full acceptance suite"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="scenario JSON (default: shipped harmonic scenario)")
    common.add_argument("--out-dir", type=Path, default=Path("out"), help="output directory (default: ./out)")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--dt", type=float, help="override the time step")
    common.add_argument("--steps", type=int, help="override the number of steps")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    parser = argparse.ArgumentParser(prog="kvnlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_text)
        if name == "accept":
            p.add_argument("--only", nargs="+", metavar="ID", help="run only these criteria (1-9)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    start = time.perf_counter()
    try:
        cfg = load_config(args)
    except GuardError as exc:
        print(f"guard violation: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out = args.out_dir
    out.mkdir(parents=True, exist_ok=True)
    fn = COMMANDS[args.command][0]
    try:
        if args.command == "accept":
            outputs, ok = fn(cfg, out, args.only)
        else:
            outputs, ok = fn(cfg, out)
    except (FloatingPointError, ValueError) as exc:
        print(f"numerical guard: {exc}", file=sys.stderr)
        return EXIT_GUARD

    manifest = {
        "command": args.command,
        "scenario_hash": cfg.hash(),
        "config": cfg.snapshot(),
        "version": __version__,
        "seed": cfg.seed,
        "wall_clock_seconds": time.perf_counter() - start,
        "outputs": sorted(outputs),
        "passed": bool(ok),
    }
    write_json(out / "manifest.json", manifest)
    if not ok:
        print(f"{args.command}: checks failed, see {out}", file=sys.stderr)
        return EXIT_FAILED
    return 0


if __name__ == "__main__":
    sys.exit(main())
