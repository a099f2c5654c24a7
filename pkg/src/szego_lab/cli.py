"""Command-line entry point.

Exit codes: 0 success, 1 a verification verdict failed (or an unexpected
error), 2 invalid input or configuration, 3 numerical failure.

Fields of the JSON spec can be overridden with dotted flags, for example
``--sim.dt 5e-4 --preset.eps 0.25``.
"""
import argparse
import json
import logging
import math
import os
from pathlib import Path
import sys

from szego_lab import kernels
from szego_lab.dynamics import hamiltonian, simulate
from szego_lab.errors import NumericalFailure, SzegoLabError, ValidationError
from szego_lab.experiments import (
    ExperimentSpec,
    apply_overrides,
    epsilon_sweep,
    persist_result,
    run_experiment,
)
from szego_lab.hankel import hankel_report
from szego_lab.hardy import (
    GevreyOrder,
    classical_gevrey_norm,
    gevrey_wiener_norm,
    hs_norm,
    l2_norm,
    momentum,
    wiener_norm,
)
from szego_lab.io import write_csv, write_json
from szego_lab.verify import TOLERANCES, run_verification

log = logging.getLogger("szego_lab")

EXIT_OK, EXIT_FAILED, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2, 3
LOG_LEVELS = {"quiet": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}

DEFAULT_SPEC = {
    "name": "default",
    "preset": {"kind": "single_mode", "k": 1, "c": [1.0, 0.0]},
    "sim": {"t_end": 1.0, "degree": 8, "dt": 1e-3, "sample_every": 10},
}

DEFAULT_SWEEP = {
    "name": "eps_sweep",
    "preset": {"kind": "eps_plus_wave", "eps": 0.2},
    "sim": {"t_end": 1.0, "degree": 256, "dt": 2.5e-3, "sample_every": 1},
}


def _parse_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def parse_overrides(extra):
    """``["--sim.dt", "0.01", "--name=x"]`` -> ``{"sim.dt": 0.01, "name": "x"}``."""
    out = {}
    i = 0
    while i < len(extra):
        tok = extra[i]
        if not tok.startswith("--"):
            raise ValidationError(f"unexpected argument {tok!r}", "argv")
        key = tok[2:]
        if "=" in key:
            key, val = key.split("=", 1)
            i += 1
        else:
            if i + 1 >= len(extra):
                raise ValidationError("missing value", key)
            val = extra[i + 1]
            i += 2
        out[key] = _parse_value(val)
    return out


def load_spec(path, overrides, default=DEFAULT_SPEC):
    if path is None:
        obj = json.loads(json.dumps(default))
    else:
        try:
            obj = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ValidationError(f"cannot read config: {exc}", "config") from exc
        except json.JSONDecodeError as exc:
            raise ValidationError(f"invalid JSON: {exc}", "config") from exc
    return ExperimentSpec.from_json(apply_overrides(obj, overrides))


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON experiment spec")
    common.add_argument("--out", default=os.environ.get("SZEGO_LAB_OUT", "szego_out"),
                        help="output directory (default $SZEGO_LAB_OUT or ./szego_out)")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
    common.add_argument("--log", choices=sorted(LOG_LEVELS), default="info")

    parser = argparse.ArgumentParser(
        prog="szego-lab",
        description="Simulate the truncated cubic Szego equation and check its analyticity bounds.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="integrate and write the trajectory")
    p = sub.add_parser("norms", parents=[common], help="norms of the initial datum")
    p.add_argument("--sigma", type=float, help="Gevrey radius (default analysis.sigma; 0 allowed)")
    p.add_argument("--gamma", type=float, default=1.0, help="Gevrey exponent in (0, 1]")
    sub.add_parser("hankel", parents=[common], help="Hankel report of the initial datum")
    sub.add_parser("persistence", parents=[common], help="full experiment with radius bounds")
    p = sub.add_parser("sweep-epsilon", parents=[common], help="radius at t=pi/eps for e^{i theta}+eps")
    p.add_argument("--eps", type=float, nargs="+", default=[0.4, 0.3, 0.2])
    p.add_argument("--time-factor", type=float, default=1.0,
                   help="evaluate at time_factor * pi/eps (default 1)")
    p = sub.add_parser("verify", parents=[common], help="run the invariant suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--break", dest="broken", action="append", default=[],
                   choices=sorted(TOLERANCES), help=argparse.SUPPRESS)
    return parser


def cmd_simulate(args, overrides):
    spec = load_spec(args.config, overrides)
    traj, report = simulate(spec.sim_config())
    out = Path(args.out) / spec.name
    traj.write(out)
    write_json(out / "conservation.json", report.to_json())
    write_json(out / "spec.json", spec.to_json())
    log.info("wrote %d samples to %s; drift %s", len(traj), out, report.to_json())
    return EXIT_OK


def cmd_norms(args, overrides):
    spec = load_spec(args.config, overrides)
    u = spec.sim_config().initial
    sigma = spec.analysis.sigma if args.sigma is None else args.sigma
    order = GevreyOrder(sigma, args.gamma)
    rows = [
        ("l2", l2_norm(u)),
        ("momentum", momentum(u)),
        ("hamiltonian", hamiltonian(u)),
        ("wiener", wiener_norm(u)),
        ("gevrey", gevrey_wiener_norm(u, order)),
    ]
    for s in spec.analysis.s_list:
        rows.append((f"hs[s={s!r}]", hs_norm(u, s)))
        rows.append((f"classical_gevrey[s={s!r}]", classical_gevrey_norm(u, s, sigma)))
    out = Path(args.out) / spec.name
    write_csv(out / "norms.csv", ["name", "value"], rows)
    write_json(out / "norms.json", {"sigma": sigma, "gamma": args.gamma, "norms": dict(rows)})
    for name, val in rows:
        print(f"{name:>28s} {val:.17g}")
    return EXIT_OK


def cmd_hankel(args, overrides):
    spec = load_spec(args.config, overrides)
    rep = hankel_report(spec.sim_config().initial, spec.analysis.s_list)
    out = Path(args.out) / spec.name
    rep.write(out)
    print(f"trace_norm {rep.trace_norm:.17g}")
    print(f"wiener_half {rep.wiener_half:.17g}")
    print(f"column_energy {rep.column_energy:.17g}")
    return EXIT_OK if rep.passed else EXIT_FAILED


def cmd_persistence(args, overrides):
    spec = load_spec(args.config, overrides)
    res = run_experiment(spec)
    persist_result(res, args.out)
    sim = res.verdicts.get("simulation")
    if sim is not None and not sim.passed and "non-finite" in sim.detail:
        log.error("%s", sim.detail)
        return EXIT_NUMERICAL
    for name, v in res.verdicts.items():
        log.info("%-24s %s %s", name, "PASS" if v.passed else "FAIL", v.detail)
    return EXIT_OK if res.passed else EXIT_FAILED


def cmd_sweep(args, overrides):
    default = json.loads(json.dumps(DEFAULT_SWEEP))
    default["sim"]["t_end"] = math.pi / min(args.eps) if args.eps else 1.0
    spec = load_spec(args.config, overrides, default)
    res = epsilon_sweep(args.eps, spec, jobs=args.jobs, time_factor=args.time_factor)
    out = Path(args.out) / spec.name
    res.write(out)
    for e, t, r, ok in res.rows():
        print(f"eps={e:.17g} t={t:.17g} rho_hat={r}")
    if res.exponent is None:
        log.error("%s", res.fit_error)
        return EXIT_INVALID
    print(f"exponent {res.exponent:.17g}")
    return EXIT_OK


def cmd_verify(args, overrides):
    if overrides:
        raise ValidationError(f"verify takes no overrides, got {sorted(overrides)}", "argv")
    verdicts = run_verification(seed=args.seed, broken=args.broken)
    out = Path(args.out)
    write_json(out / "verdicts.json", {
        "seed": args.seed,
        "backend": kernels.BACKEND,
        "verdicts": {k: v.to_json() for k, v in verdicts.items()},
        "passed": all(v.passed for v in verdicts.values()),
    })
    failed = [k for k, v in verdicts.items() if not v.passed]
    for name in failed:
        print(f"FAILED: {name}: {verdicts[name].detail}", file=sys.stderr)
    return EXIT_FAILED if failed else EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "norms": cmd_norms,
    "hankel": cmd_hankel,
    "persistence": cmd_persistence,
    "sweep-epsilon": cmd_sweep,
    "verify": cmd_verify,
}


def main(argv=None):
    parser = build_parser()
    try:
        args, extra = parser.parse_known_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    logging.basicConfig(level=LOG_LEVELS[args.log], format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args, parse_overrides(extra))
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except SzegoLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except Exception as exc:  # every path maps to a documented exit code
        log.exception("unexpected error")
        print(f"unexpected error: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
