"""Deterministic command-line front end.

Subcommands: gen (ground truth), sense (measurements), recover (solve),
phase / specnorm / smallball (experiment grids written as CSV plus a JSON
sidecar), and verify (invariant suite).  All randomness flows from explicit
seeds (default 20240); no command reads the clock, so identical argument
vectors produce identical output bytes.

Exit codes: 0 success, 1 usage error, 2 solver non-convergence,
3 invariant-suite failure.  Errors go to stderr prefixed with "ERROR:".
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .experiments import (
    GridSpec,
    invariant_suite,
    phase_grid,
    small_ball_estimate,
    specnorm_deviation,
)
from .sensing import (
    MeasurementSet,
    SubgaussianLaw,
    builtin_law,
    p_to_string,
    sense,
)
from .solver import RecoveryReport, SolverConfig, certify, recover_measurements
from .toeplitz import SpikeModel, ToeplitzVector, spike_toeplitz, weighted_norm

DEFAULT_SEED = 20240

USAGE_ERROR, SOLVER_ERROR, VERIFY_ERROR = 1, 2, 3


class CliError(Exception):
    def __init__(self, message: str, code: int = USAGE_ERROR):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def _parse_spike(text: str) -> tuple[float, float]:
    try:
        f, _, d = text.partition(":")
        return float(f), float(d)
    except ValueError:
        raise CliError(f"bad spike {text!r}; expected f:d") from None


def _parse_law(name: str) -> SubgaussianLaw:
    try:
        return builtin_law(name)
    except ValueError as exc:
        raise CliError(str(exc)) from None


def _write(path: str, text: str):
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _write_csv(path: str, header: list[str], rows: list[list]):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_csv_cell(v) for v in row))
    _write(path, "\n".join(lines) + "\n")


def _csv_cell(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _sidecar(prefix: str, command: str, params: dict):
    doc = {"command": command, "version": __version__, "params": params}
    _write(prefix + ".json", json.dumps(doc, indent=2) + "\n")


def build_parser() -> _Parser:
    parser = _Parser(prog="toeprec", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"toeprec {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a low-rank Toeplitz ground truth as JSON")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--spike", action="append", default=None, metavar="F:D",
                   help="spike frequency:amplitude; repeatable")
    g.add_argument("--rank", type=int, default=None,
                   help="draw a random spike model of this rank instead of --spike")
    g.add_argument("--normalize", action="store_true",
                   help="scale to unit Frobenius norm")
    g.add_argument("--seed", type=int, default=DEFAULT_SEED)
    g.add_argument("--out", required=True)

    s = sub.add_parser("sense", help="draw sensing vectors and observations")
    s.add_argument("--truth", required=True, help="ground-truth JSON from gen")
    s.add_argument("--law", default="gaussian", choices=["gaussian", "rademacher", "uniform"])
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--eta", type=float, default=0.0)
    s.add_argument("--p", default="2", choices=["1", "2", "inf"])
    s.add_argument("--noise-scale", type=float, default=1.0)
    s.add_argument("--seed", type=int, default=DEFAULT_SEED)
    s.add_argument("--no-materialize", action="store_true",
                   help="store only (seed, law, shape) and b; regenerate xi on load")
    s.add_argument("--out", required=True)

    r = sub.add_parser("recover", help="solve the nuclear-norm program")
    r.add_argument("--measurements", required=True)
    r.add_argument("--truth", default=None, help="optional truth JSON for error reporting")
    r.add_argument("--solver-config", default=None, help="JSON or key=value config file")
    r.add_argument("--out", required=True)

    ph = sub.add_parser("phase", help="success-rate grid over (n, r, m, law)")
    ph.add_argument("--n", type=int, action="append", required=True)
    ph.add_argument("--r", type=int, action="append", required=True)
    ph.add_argument("--m", type=int, action="append", required=True)
    ph.add_argument("--law", action="append", default=None,
                    choices=["gaussian", "rademacher", "uniform"])
    ph.add_argument("--trials", type=int, default=20)
    ph.add_argument("--eta", type=float, default=0.0)
    ph.add_argument("--p", default="2", choices=["1", "2", "inf"])
    ph.add_argument("--success-tol", type=float, default=1e-3)
    ph.add_argument("--seed", type=int, default=DEFAULT_SEED)
    ph.add_argument("--threads", type=int, default=1)
    ph.add_argument("--out", required=True, help="output prefix; writes .csv and .json")

    sn = sub.add_parser("specnorm", help="spectral-norm deviation grid over (n, m)")
    sn.add_argument("--n", type=int, action="append", required=True)
    sn.add_argument("--m", type=int, action="append", required=True)
    sn.add_argument("--law", default="gaussian", choices=["gaussian", "rademacher", "uniform"])
    sn.add_argument("--trials", type=int, default=50)
    sn.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sn.add_argument("--out", required=True)

    sb = sub.add_parser("smallball", help="small-ball probability curve over z0")
    sb.add_argument("--law", default="gaussian", choices=["gaussian", "rademacher", "uniform"])
    sb.add_argument("--alpha", type=float, default=0.25)
    sb.add_argument("--n", type=int, required=True)
    sb.add_argument("--z0-points", type=int, default=9)
    sb.add_argument("--directions", type=int, default=4)
    sb.add_argument("--trials", type=int, default=100_000)
    sb.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sb.add_argument("--out", required=True)

    v = sub.add_parser("verify", help="run the invariant suite")
    v.add_argument("--quick", action="store_true")
    v.add_argument("--seed", type=int, default=DEFAULT_SEED)
    return parser


def _cmd_gen(args) -> int:
    if args.spike:
        model = SpikeModel(spikes=tuple(_parse_spike(s) for s in args.spike))
    elif args.rank is not None:
        from .experiments import random_spike_model
        from .sensing import rng_from

        model = random_spike_model(args.rank, args.n, rng_from(args.seed, 2))
    else:
        raise CliError("provide --spike f:d (repeatable) or --rank")
    t = spike_toeplitz(model, args.n)
    if args.normalize:
        t = ToeplitzVector(n=t.n, z=t.z / weighted_norm(t))
    _write(args.out, t.to_json() + "\n")
    return 0


def _cmd_sense(args) -> int:
    truth = ToeplitzVector.from_json(open(args.truth).read())
    mset = sense(truth, _parse_law(args.law), args.m, args.eta, args.p, args.seed,
                 noise_scale=args.noise_scale, materialized=not args.no_materialize)
    _write(args.out, mset.to_json() + "\n")
    return 0


def _cmd_recover(args) -> int:
    mset = MeasurementSet.from_json(open(args.measurements).read())
    cfg = SolverConfig.from_file(args.solver_config) if args.solver_config else None
    z_hat, report = recover_measurements(mset, cfg)
    doc = json.loads(report.to_json())
    if args.truth:
        truth = ToeplitzVector.from_json(open(args.truth).read())
        doc["certificate"] = certify(z_hat, mset.xi, mset.b, mset.eta, mset.p, truth)
    _write(args.out, json.dumps(doc) + "\n")
    if not report.converged:
        print(f"ERROR: solver did not converge in {report.iterations} iterations",
              file=sys.stderr)
        return SOLVER_ERROR
    return 0


def _cmd_phase(args) -> int:
    laws = tuple(_parse_law(k) for k in (args.law or ["gaussian"]))
    grid = GridSpec(n_list=tuple(args.n), r_list=tuple(args.r), m_list=tuple(args.m),
                    laws=laws, trials=args.trials, base_seed=args.seed,
                    eta=args.eta, p=args.p, success_tol=args.success_tol)
    result = phase_grid(grid, threads=args.threads)
    rows = [[o.n, o.r, o.m, o.law_id, o.trial, o.seed, o.success, o.rel_error, o.iterations]
            for o in result.outcomes]
    _write_csv(args.out + ".csv",
               ["n", "r", "m", "law", "trial", "seed", "success", "rel_error", "iterations"],
               rows)
    summary = [{"n": s.n, "r": s.r, "m": s.m, "law": s.law_id,
                "trials": s.trials, "successes": s.successes, "rate": s.rate}
               for s in result.summary()]
    _sidecar(args.out, "phase", {
        "n_list": list(grid.n_list), "r_list": list(grid.r_list),
        "m_list": list(grid.m_list), "laws": [l.id for l in laws],
        "trials": grid.trials, "base_seed": grid.base_seed, "eta": grid.eta,
        "p": p_to_string(grid.p), "success_tol": grid.success_tol,
        "threads": args.threads, "summary": summary,
    })
    return 0


def _cmd_specnorm(args) -> int:
    law = _parse_law(args.law)
    rows = []
    for n in args.n:
        for m in args.m:
            est = specnorm_deviation(law, n, m, args.trials, args.seed)
            rows.append([est.n, est.m, est.law_id, est.trials, est.mean_dev,
                         est.std_err, est.mean_upper, est.upper_std_err, est.k_bound])
    _write_csv(args.out + ".csv",
               ["n", "m", "law", "trials", "mean_dev", "std_err",
                "mean_upper", "upper_std_err", "k_bound"],
               rows)
    _sidecar(args.out, "specnorm", {
        "n_list": args.n, "m_list": args.m, "law": law.id,
        "trials": args.trials, "base_seed": args.seed,
    })
    return 0


def _cmd_smallball(args) -> int:
    law = _parse_law(args.law)
    bound = 1.0 / math.sqrt(args.n)
    grid = np.linspace(-bound, bound, args.z0_points)
    curve = small_ball_estimate(law, args.alpha, args.n, grid,
                                args.directions, args.trials, args.seed)
    rows = [[curve.law_id, curve.n, curve.alpha, pt.z0, pt.min_prob, pt.mean_prob,
             curve.bound_shape, curve.directions, curve.trials]
            for pt in curve.points]
    _write_csv(args.out + ".csv",
               ["law", "n", "alpha", "z0", "min_prob", "mean_prob",
                "bound_shape", "directions", "trials"],
               rows)
    _sidecar(args.out, "smallball", {
        "law": law.id, "alpha": args.alpha, "n": args.n,
        "z0_points": args.z0_points, "directions": args.directions,
        "trials": args.trials, "base_seed": args.seed,
        "bound_shape": curve.bound_shape, "fitted_constant": curve.fitted_constant,
    })
    return 0


def _cmd_verify(args) -> int:
    results = invariant_suite(quick=args.quick, base_seed=args.seed)
    failed = 0
    for res in results:
        tag = "PASS" if res.ok else "FAIL"
        print(f"{tag} {res.name}: {res.detail}")
        failed += not res.ok
    if failed:
        print(f"ERROR: {failed} invariant check(s) failed", file=sys.stderr)
        return VERIFY_ERROR
    print(f"all {len(results)} checks passed")
    return 0


_COMMANDS = {
    "gen": _cmd_gen,
    "sense": _cmd_sense,
    "recover": _cmd_recover,
    "phase": _cmd_phase,
    "specnorm": _cmd_specnorm,
    "smallball": _cmd_smallball,
    "verify": _cmd_verify,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except CliError as exc:
        print(f"ERROR: {exc}", file=sys.stderr)
        return exc.code
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"ERROR: {exc}", file=sys.stderr)
        return USAGE_ERROR


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
