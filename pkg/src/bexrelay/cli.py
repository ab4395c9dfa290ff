"""Command-line entry point: ``bexrelay <command> [options]``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import harness, matching, netmodel
from .pairsolver import BACKEND, PairProblem, PreconditionError, solve
from .utility import MAXMIN

log = logging.getLogger("bexrelay")


def _alpha(text: str):
    return MAXMIN if text == MAXMIN else float(text)


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="key=value experiment config file")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--trials", type=int, help="number of Monte-Carlo trials")
    p.add_argument("--out", help="output directory for CSV files")
    p.add_argument("--mode", help="comma-separated modes: direct,centralized,distributed")
    p.add_argument("--workers", type=int, default=1, help="worker processes")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    ap = argparse.ArgumentParser(prog="bexrelay",
                                 description="Bandwidth-exchange relaying experiments.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("three-node", parents=[common], help="rate sweep vs sender distance")
    p.add_argument("--forwarder-distance", type=float, default=150.0)
    p.add_argument("--d-min", type=float, default=200.0)
    p.add_argument("--d-max", type=float, default=800.0)
    p.add_argument("--d-step", type=float, default=10.0)

    for name, help_ in (("spectral", "spectral-efficiency gain vs N"),
                        ("outage", "outage probability vs N")):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("--n-nodes", type=_int_list,
                       help="comma-separated N values (default 4,8,12,16,20)")
        p.add_argument("--alpha", type=_alpha)
        p.add_argument("--timing", action="store_true", help="add wall_time_ms to trials.csv")
        if name == "outage":
            p.add_argument("--r-min", type=float, help="rate threshold in Mbps (default: calibrate)")
            p.add_argument("--r-min-quantile", type=float, default=harness.R_MIN_QUANTILE)

    p = sub.add_parser("solve-pair", parents=[common], help="solve one sender-forwarder pair")
    p.add_argument("--ws", type=float, required=True, help="sender bandwidth (MHz)")
    p.add_argument("--wf", type=float, required=True, help="forwarder bandwidth (MHz)")
    p.add_argument("--power-dbm", type=float, default=20.0)
    p.add_argument("--rho-s0", type=float, required=True)
    p.add_argument("--rho-f0", type=float, required=True)
    p.add_argument("--rho-sf", type=float, required=True)
    p.add_argument("--alpha", type=_alpha, default=0.0)
    p.add_argument("--objective", choices=["alpha_fair", "maxmin", "sum_with_minrate"],
                   default="alpha_fair")
    p.add_argument("--r-min", type=float)

    p = sub.add_parser("match", parents=[common], help="matching on an edge-list file")
    p.add_argument("edges", help="file of 'u v weight' lines")
    p.add_argument("--trace", help="write the distributed message trace here")
    return ap


def _config(args, experiment: str) -> harness.ExperimentConfig:
    over = {}
    if args.seed is not None:
        over["master_seed"] = args.seed
    if args.trials is not None:
        over["trials"] = args.trials
    if args.mode:
        over["modes"] = tuple(m.strip() for m in args.mode.split(","))
    if getattr(args, "alpha", None) is not None:
        over["alpha"] = args.alpha
    if getattr(args, "r_min", None) is not None:
        over["r_min_mbps"] = args.r_min
    if args.config:
        return harness.load_config(args.config, experiment=experiment, **over)
    return harness.ExperimentConfig.for_experiment(experiment, **over)


def _print_summary(result: harness.ExperimentResult) -> None:
    if result.r_min is not None:
        print(f"r_min = {result.r_min:.6g} Mbps")
    for n, mode, metric, mean, se, count in result.summary:
        if metric in ("spectral_efficiency", "outage_probability", "se_gain_pct",
                      "outage_reduction_pct"):
            print(f"N={n:<3d} {mode:<12s} {metric:<22s} {mean:10.4f}")


def cmd_experiment(args, experiment: str) -> int:
    cfg = _config(args, experiment)
    n_sweep = args.n_nodes
    if n_sweep is None and not (args.config and "n_nodes" in _config_keys(args.config)):
        n_sweep = list(harness.DEFAULT_N_SWEEP)
    result = harness.run_experiment(cfg, args.out, args.workers, n_sweep, args.timing,
                                    getattr(args, "r_min_quantile", harness.R_MIN_QUANTILE))
    _print_summary(result)
    return 0


def _config_keys(path: str) -> set:
    with open(path, encoding="utf-8") as fh:
        return set(harness.parse_config_text(fh.read()))


def cmd_three_node(args) -> int:
    cfg = _config(args, "three_node_sweep")
    ds = np.arange(args.d_min, args.d_max + 0.5 * args.d_step, args.d_step)
    rows = harness.sweep_three_node(cfg, args.forwarder_distance, ds, args.out)
    print(",".join(harness.SWEEP_COLUMNS))
    for row in rows:
        print(",".join(harness._fmt(x) for x in row))
    return 0


def cmd_solve_pair(args) -> int:
    prob = PairProblem(args.ws, args.wf, netmodel.dbm_to_mw(args.power_dbm), args.rho_s0,
                       args.rho_f0, args.rho_sf,
                       MAXMIN if args.objective == "maxmin" else args.alpha)
    alloc = solve(prob, args.objective, args.r_min)
    out = {"backend": BACKEND, "r_s_in": prob.r_s_in, "r_f_in": prob.r_f_in}
    if alloc is None:
        out["feasible"] = False
    else:
        out.update(feasible=True, w_s_be=alloc.w_s_be, w_f_be=alloc.w_f_be,
                   r_s_be=alloc.r_s_be, r_f_be=alloc.r_f_be, r_c=alloc.r_c, gain=alloc.gain)
    print(json.dumps(out, indent=2))
    return 0


def cmd_match(args) -> int:
    with open(args.edges, encoding="utf-8") as fh:
        graph = matching.read_edges(fh)
    mode = (args.mode or "centralized").split(",")[0]
    if mode == "centralized":
        m = matching.blossom_mwm(graph)
    elif mode == "distributed":
        m, trace = matching.greedy_local_mwm(graph)
        if args.trace:
            with open(args.trace, "w", encoding="utf-8") as fh:
                matching.write_trace(trace, fh)
        print(f"# messages {len(trace)}")
    else:
        raise ValueError("match --mode must be centralized or distributed")
    for u, v, w in m.edges:
        print(f"{u} {v} {w!r}")
    print(f"# total {m.total_weight!r}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "three-node":
            return cmd_three_node(args)
        if args.command == "spectral":
            return cmd_experiment(args, "n_node_spectral")
        if args.command == "outage":
            return cmd_experiment(args, "n_node_outage")
        if args.command == "solve-pair":
            return cmd_solve_pair(args)
        return cmd_match(args)
    except (harness.ConfigError, PreconditionError, ValueError, OSError) as exc:
        print(f"bexrelay: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
