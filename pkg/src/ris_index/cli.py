"""``ris-index`` command line: gen | loss | solve | eval | synth | bench.

Exit codes: 0 success, 2 invalid arguments, 3 degenerate instance, 4 I/O error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import replace
from pathlib import Path

from . import bench, io
from .assignment import assign_from_path
from .codebook import DEFAULT_NOISE_POWER, build_codebook, generate_channels
from .errors import DegenerateInstanceError, InvalidArgumentError
from .heuristic import SolverParams, SolverReport, numba_threads, solve
from .loss import DISTRIBUTIONS, ber_from_snr_db, build_loss_matrix, expected_loss, path_cost, \
    synth_matrix

log = logging.getLogger("ris_index")

EXIT_INVALID, EXIT_DEGENERATE, EXIT_IO = 2, 3, 4
GLOBAL_DEFAULTS = {"seed": None, "out": None, "threads": None, "quiet": False}


def _sibling(path, suffix: str) -> Path:
    path = Path(path)
    return path.with_name(path.stem + suffix)


def cmd_gen(args):
    channels = generate_channels(args.K, args.N, args.M, args.seed, P=args.P, sigma2=args.sigma2)
    codebook = build_codebook(channels, args.b, args.seed)
    io.save_instance(args.out, channels, codebook)
    log.info("wrote instance K=%d N=%d M=%d b=%d to %s", args.K, args.N, args.M, args.b, args.out)


def cmd_loss(args):
    channels, codebook = io.load_instance(args.instance)
    if codebook is None:
        raise InvalidArgumentError(f"{args.instance} has no codewords")
    io.save_loss(args.out, build_loss_matrix(channels, codebook, symmetrize=args.symmetrize))
    log.info("wrote %dx%d loss matrix to %s", channels.K, channels.K, args.out)


def cmd_solve(args):
    loss = io.load_loss(args.matrix)
    K = loss.K
    if args.solver == "tsp":
        params = io.load_params(args.params, K=K) if args.params else SolverParams.defaults(K)
        if args.seed is not None:
            params = replace(params, seed=args.seed)
        report = solve(loss, params, threads=args.threads)
    else:
        seed = 0 if args.seed is None else args.seed
        t0 = time.perf_counter()
        with numba_threads(args.threads):
            pi, _ = bench.run_solver(args.solver, loss, seed)
        cost = path_cost(loss, pi)
        report = SolverReport(best_pi=pi, best_cost=cost, cost_trace=[cost],
                              wall_time=time.perf_counter() - t0)
    io.save_report(args.out, report)
    io.save_permutation(_sibling(args.out, ".perm.json"), report.best_pi)
    if K & (K - 1) == 0:
        io.save_assignment(_sibling(args.out, ".assignment.json"), assign_from_path(report.best_pi))
    log.info("%s: path cost %.6g", args.solver, report.best_cost)


def cmd_eval(args):
    loss = io.load_loss(args.matrix)
    assignment = io.load_assignment(args.assignment)
    if args.q is not None:
        if args.bsc_snr_db is not None:
            log.warning("both --q and --bsc-snr-db given; using q=%g", args.q)
        q, snr_db = args.q, None
    elif args.bsc_snr_db is not None:
        q, snr_db = ber_from_snr_db(args.bsc_snr_db), args.bsc_snr_db
    else:
        raise InvalidArgumentError("give --q or --bsc-snr-db")
    result = {"expected_loss": expected_loss(loss, assignment, q), "q": q,
              "bsc_snr_db": snr_db, "labels": assignment.as_binary()}
    text = json.dumps(result) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_synth(args):
    io.save_loss(args.out, synth_matrix(args.dist, args.K, args.seed))


def cmd_bench(args):
    if args.config:
        config = bench.CampaignConfig.from_json(args.config)
    else:
        config = bench.preset(args.experiment, "full" if args.full_scale else "desk")
    overrides = {k: v for k, v in (("runs", args.runs), ("seed", args.seed)) if v is not None}
    if overrides:
        config = bench.CampaignConfig.from_dict({**config.to_dict(), **overrides})
    out = Path(args.out) if args.out else Path(config.out_dir) / f"experiment_{config.experiment}.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    rows = bench.run_campaign(config, threads=args.threads)
    bench.write_csv(out, rows)
    log.info("wrote %d rows to %s", len(rows), out)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    # SUPPRESS so a subcommand's defaults never clobber flags given before it
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--out", default=argparse.SUPPRESS)
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS)
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="ris-index", description=__doc__.splitlines()[0],
                                     parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="generate a MISO-RIS instance")
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--b", type=int, required=True)
    p.add_argument("--P", type=float, default=1.0)
    p.add_argument("--sigma2", type=float, default=DEFAULT_NOISE_POWER)
    p.set_defaults(func=cmd_gen, needs_out=True)

    p = sub.add_parser("loss", parents=[common], help="loss matrix CSV from an instance")
    p.add_argument("instance")
    p.add_argument("--symmetrize", action="store_true")
    p.set_defaults(func=cmd_loss, needs_out=True)

    p = sub.add_parser("solve", parents=[common], help="order codewords with a solver")
    p.add_argument("matrix")
    p.add_argument("--solver", choices=bench.SOLVERS, default="tsp")
    p.add_argument("--params", help="SolverParams JSON")
    p.set_defaults(func=cmd_solve, needs_out=True)

    p = sub.add_parser("eval", parents=[common], help="expected loss of an assignment")
    p.add_argument("matrix")
    p.add_argument("assignment")
    p.add_argument("--bsc-snr-db", type=float, default=None)
    p.add_argument("--q", type=float, default=None)
    p.set_defaults(func=cmd_eval, needs_out=False)

    p = sub.add_parser("synth", parents=[common], help="synthetic loss matrix")
    p.add_argument("--dist", choices=DISTRIBUTIONS, required=True)
    p.add_argument("--K", type=int, required=True)
    p.set_defaults(func=cmd_synth, needs_out=True)

    p = sub.add_parser("bench", parents=[common], help="run a Monte Carlo campaign")
    p.add_argument("config", nargs="?", help="CampaignConfig JSON")
    p.add_argument("--experiment", default="I", choices=sorted(bench.EXPERIMENTS))
    p.add_argument("--full-scale", action="store_true")
    p.add_argument("--runs", type=int, default=None)
    p.set_defaults(func=cmd_bench, needs_out=False)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name, default in GLOBAL_DEFAULTS.items():
        if not hasattr(args, name):
            setattr(args, name, default)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(message)s")
    if args.needs_out and not args.out:
        parser.error(f"{args.command} requires --out")
    if args.command in ("gen", "synth") and args.seed is None:
        args.seed = 0
    try:
        args.func(args)
    except InvalidArgumentError as exc:
        log.error("%s", exc)
        return EXIT_INVALID
    except DegenerateInstanceError as exc:
        log.error("%s", exc)
        return EXIT_DEGENERATE
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
