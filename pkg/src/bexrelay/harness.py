"""Seeded Monte-Carlo experiments with CSV output.

Every trial draws from its own stream, derived from ``(master_seed,
trial_index, n_nodes)``, so results do not depend on execution order or on
how many worker processes run the trials.
"""

from __future__ import annotations

import csv
import dataclasses
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import netmodel, protocol
from .pairsolver import PairProblem, solve_alpha_fair, solve_maxmin
from .utility import MAXMIN, alpha_utility

log = logging.getLogger(__name__)

EXPERIMENTS = ("three_node_sweep", "n_node_spectral", "n_node_outage")
MODES = (protocol.DIRECT, protocol.CENTRALIZED, protocol.DISTRIBUTED)
DEFAULT_N_SWEEP = (4, 8, 12, 16, 20)
R_MIN_QUANTILE = 0.3
PILOT_TRIALS = 100

TRIAL_COLUMNS = ["n_nodes", "trial", "seed", "mode", "sum_rate_mbps", "sum_utility",
                 "spectral_efficiency", "outage_probability", "pair_count", "message_count"]
RATE_COLUMNS = ["n_nodes", "trial", "mode", "node", "w_in_mhz", "r_in_mbps",
                "w_be_mhz", "r_be_mbps"]
SUMMARY_COLUMNS = ["n_nodes", "mode", "metric", "mean", "stderr", "count"]
METRICS = ["sum_rate_mbps", "sum_utility", "spectral_efficiency", "outage_probability",
           "pair_count", "message_count"]
SWEEP_COLUMNS = ["sender_distance_m", "scheme", "sender_rate_mbps", "forwarder_rate_mbps",
                 "sum_rate_mbps", "min_rate_mbps"]


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str = "n_node_spectral"
    n_nodes: int = 20
    cell_radius_m: float = 800.0
    power_dbm: float = 20.0
    bandwidth_per_node_mhz: float = 1.0
    alpha: float | str = 0.0
    k_const: float = netmodel.K_CONST
    pathloss_exp: float = netmodel.PATHLOSS_EXP
    fading: str = "rayleigh"
    neighbor_radius_m: float = 500.0
    modes: tuple = MODES
    r_min_mbps: float | str | None = None
    trials: int = 500
    master_seed: int = 1
    solver_tol: float = 1e-6
    initial_allocation_mode: str = "equal"

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.n_nodes < 1 and self.experiment != "three_node_sweep":
            raise ConfigError("n_nodes must be at least 1")
        for name in ("cell_radius_m", "bandwidth_per_node_mhz", "k_const", "pathloss_exp",
                     "neighbor_radius_m", "solver_tol"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.fading not in ("deterministic", "rayleigh"):
            raise ConfigError(f"fading must be deterministic or rayleigh, got {self.fading!r}")
        if not self.modes or any(m not in MODES for m in self.modes):
            raise ConfigError(f"modes must be a nonempty subset of {MODES}")
        if self.initial_allocation_mode not in ("equal", "direct_optimal"):
            raise ConfigError("initial_allocation_mode must be equal or direct_optimal")
        if self.alpha == MAXMIN and self.experiment != "three_node_sweep":
            raise ConfigError("max-min is only available in the three-node sweep")
        if self.alpha != MAXMIN and not float(self.alpha) >= 0:
            raise ConfigError("alpha must be nonnegative")
        r = self.r_min_mbps
        if r not in (None, "auto") and not float(r) >= 0:
            raise ConfigError("r_min_mbps must be nonnegative or 'auto'")

    @property
    def power_mw(self) -> float:
        return netmodel.dbm_to_mw(self.power_dbm)

    @classmethod
    def for_experiment(cls, experiment: str, **overrides) -> "ExperimentConfig":
        """Defaults matching the published setup of each experiment."""
        base: dict = {"experiment": experiment}
        if experiment == "three_node_sweep":
            base.update(bandwidth_per_node_mhz=10.0, fading="deterministic", n_nodes=2,
                        modes=(protocol.DIRECT, protocol.CENTRALIZED))
        elif experiment == "n_node_outage":
            base.update(alpha=0.0, r_min_mbps="auto")
        base.update(overrides)
        return cls(**base)

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(ExperimentConfig)}


def _coerce(key: str, raw: str):
    raw = raw.strip()
    if key in ("experiment", "fading", "initial_allocation_mode"):
        return raw
    if key == "modes":
        return tuple(m.strip() for m in raw.split(",") if m.strip())
    if key == "alpha":
        return MAXMIN if raw == MAXMIN else float(raw)
    if key == "r_min_mbps":
        return None if raw in ("", "none") else ("auto" if raw == "auto" else float(raw))
    if key in ("n_nodes", "trials", "master_seed"):
        return int(raw)
    return float(raw)


def parse_config_text(text: str) -> dict:
    """``key = value`` lines; ``#`` starts a comment. Unknown keys are errors."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in _FIELD_TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = _coerce(key, raw)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {raw!r}") from exc
    return values


def load_config(path: str, **overrides) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        values = parse_config_text(fh.read())
    experiment = overrides.pop("experiment", None) or values.pop("experiment", "n_node_spectral")
    values.pop("experiment", None)
    values.update(overrides)
    return ExperimentConfig.for_experiment(experiment, **values)


# ---------------------------------------------------------------------------

@dataclass
class ModeMetrics:
    sum_rate_mbps: float
    sum_utility: float
    spectral_efficiency: float
    outage_probability: float | None
    pair_count: int
    message_count: int
    wall_time_ms: float
    w_be: dict = field(default_factory=dict)
    r_be: dict = field(default_factory=dict)


@dataclass
class TrialReport:
    trial: int
    seed: int
    n_nodes: int
    nodes: list
    modes: dict  # mode -> ModeMetrics


def trial_rng(config: ExperimentConfig, trial_index: int, n_nodes: int | None = None):
    n = config.n_nodes if n_nodes is None else n_nodes
    ss = np.random.SeedSequence([config.master_seed, trial_index, n])
    return np.random.default_rng(ss), int(ss.generate_state(1)[0])


def draw_network(config: ExperimentConfig, rng: np.random.Generator):
    """Positions, channel and initialized nodes for one trial."""
    n = config.n_nodes
    pos = netmodel.place_nodes(n, config.cell_radius_m, rng)
    mean_m, mean_ap = netmodel.mean_gains_for(pos, config.k_const, config.pathloss_exp)
    if config.fading == "rayleigh":
        channel = netmodel.sample_rayleigh_gains(mean_m, mean_ap, rng)
    else:
        channel = netmodel.ChannelRealization(mean_m, mean_ap)
    p = config.power_mw
    total = n * config.bandwidth_per_node_mhz
    alpha = 0.0 if config.alpha == MAXMIN else float(config.alpha)
    ws = netmodel.initial_allocation(channel.ap_gains, p, total,
                                     config.initial_allocation_mode, alpha)
    return pos, channel, netmodel.build_nodes(pos, channel, ws, p)


def run_trial(config: ExperimentConfig, trial_index: int, r_min: float | None = None) -> TrialReport:
    """One Monte-Carlo realization of an N-node experiment, all requested modes."""
    if config.experiment == "three_node_sweep":
        raise ConfigError("run_trial covers the N-node experiments; use sweep_three_node")
    if r_min is None and config.r_min_mbps not in (None, "auto"):
        r_min = float(config.r_min_mbps)
    if config.experiment == "n_node_outage" and r_min is None:
        raise ConfigError("the outage experiment needs r_min (use calibrate_r_min)")
    rng, seed = trial_rng(config, trial_index)
    _, channel, nodes = draw_network(config, rng)
    alpha = float(config.alpha)
    total_bw = config.n_nodes * config.bandwidth_per_node_mhz
    out = {}
    for mode in config.modes:
        t0 = time.perf_counter()
        if config.experiment == "n_node_outage":
            outcome, rates = protocol.outage_pairing(channel, nodes, r_min,
                                                     config.neighbor_radius_m, mode,
                                                     config.solver_tol)
            w_be = {n.id: n.w_in for n in nodes}
            for (s, f), a in outcome.allocations.items():
                w_be[s], w_be[f] = a.w_s_be, a.w_f_be
            util = math.fsum(alpha_utility(r, alpha) for r in rates.values())
            msgs = 0
        else:
            alloc, outcome = protocol.run_be_allocation(channel, nodes, alpha, mode,
                                                        config.neighbor_radius_m,
                                                        config.solver_tol)
            rates, w_be, util = alloc.r_be, alloc.w_be, alloc.total_utility
            msgs = len(outcome.trace) if outcome.trace is not None else 0
        elapsed = (time.perf_counter() - t0) * 1e3
        sum_rate = math.fsum(rates.values())
        out[mode] = ModeMetrics(
            sum_rate_mbps=sum_rate, sum_utility=util,
            spectral_efficiency=sum_rate / total_bw,
            outage_probability=None if r_min is None else protocol.outage_probability(rates, r_min),
            pair_count=len(outcome.sf_pairs), message_count=msgs, wall_time_ms=elapsed,
            w_be=dict(w_be), r_be=dict(rates))
    return TrialReport(trial_index, seed, config.n_nodes, nodes, out)


def calibrate_r_min(config: ExperimentConfig, quantile: float = R_MIN_QUANTILE,
                    pilot_trials: int = PILOT_TRIALS) -> float:
    """Empirical ``quantile`` of direct rates over a pilot run.

    The pilot uses its own seed family so it never overlaps the trials.
    """
    pilot = config.replace(master_seed=config.master_seed + 0x5EED)
    rates = []
    for t in range(pilot_trials):
        rng, _ = trial_rng(pilot, t)
        _, _, nodes = draw_network(pilot, rng)
        rates.extend(n.r_in for n in nodes)
    return float(np.quantile(rates, quantile))


def _run_trial_star(args):
    return run_trial(*args)


def run_trials(config: ExperimentConfig, r_min: float | None = None,
               workers: int = 1) -> list[TrialReport]:
    jobs = [(config, t, r_min) for t in range(config.trials)]
    if workers <= 1:
        return [run_trial(*j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_trial_star, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        if math.isnan(x):
            return ""
        return repr(x)
    return str(x)


def emit_csv(path: str, columns: Sequence[str], rows: Iterable[Sequence]) -> None:
    """Header line, then one comma-separated record per row, '\\n' terminated."""
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for row in rows:
                w.writerow([_fmt(x) for x in row])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def read_csv(path: str) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def trial_rows(reports: Sequence[TrialReport], timing: bool = False) -> list[list]:
    rows = []
    for rep in reports:
        for mode, m in rep.modes.items():
            row = [rep.n_nodes, rep.trial, rep.seed, mode, m.sum_rate_mbps, m.sum_utility,
                   m.spectral_efficiency, m.outage_probability, m.pair_count, m.message_count]
            if timing:
                row.append(m.wall_time_ms)
            rows.append(row)
    return rows


def rate_rows(reports: Sequence[TrialReport]) -> list[list]:
    rows = []
    for rep in reports:
        for mode, m in rep.modes.items():
            for n in rep.nodes:
                rows.append([rep.n_nodes, rep.trial, mode, n.id, n.w_in, n.r_in,
                             m.w_be[n.id], m.r_be[n.id]])
    return rows


def _mean_se(values: list[float]) -> tuple[float, float]:
    n = len(values)
    mean = math.fsum(values) / n
    if n < 2:
        return mean, math.nan
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var / n)


def summarize(reports: Sequence[TrialReport]) -> list[list]:
    """Mean and standard error per (N, mode, metric), plus gains over direct.

    ``se_gain_pct`` is the percentage gain of the mean spectral efficiency over
    direct; ``outage_reduction_pct`` is ``(P_direct - P_mode) / P_direct``.
    """
    rows = []
    by_n: dict[int, list[TrialReport]] = {}
    for r in reports:
        by_n.setdefault(r.n_nodes, []).append(r)
    for n, reps in sorted(by_n.items()):
        means: dict = {}
        for mode in reps[0].modes:
            for metric in METRICS:
                vals = [getattr(r.modes[mode], metric) for r in reps]
                if any(v is None for v in vals):
                    continue
                mean, se = _mean_se([float(v) for v in vals])
                means[(mode, metric)] = mean
                rows.append([n, mode, metric, mean, se, len(vals)])
        if protocol.DIRECT in reps[0].modes:
            se_d = means[(protocol.DIRECT, "spectral_efficiency")]
            p_d = means.get((protocol.DIRECT, "outage_probability"))
            for mode in reps[0].modes:
                if mode == protocol.DIRECT:
                    continue
                gain = 100.0 * (means[(mode, "spectral_efficiency")] / se_d - 1.0)
                rows.append([n, mode, "se_gain_pct", gain, math.nan, len(reps)])
                if p_d is not None:
                    red = (100.0 * (p_d - means[(mode, "outage_probability")]) / p_d
                           if p_d > 0 else math.nan)
                    rows.append([n, mode, "outage_reduction_pct", red, math.nan, len(reps)])
    return rows


@dataclass
class ExperimentResult:
    reports: list
    summary: list
    r_min: float | None
    paths: dict

    def metric(self, mode: str, metric: str, n_nodes: int | None = None) -> float:
        for n, m, name, mean, _, _ in self.summary:
            if m == mode and name == metric and (n_nodes is None or n == n_nodes):
                return mean
        raise KeyError((mode, metric, n_nodes))


def run_experiment(config: ExperimentConfig, out_dir: str | None = None, workers: int = 1,
                   n_sweep: Sequence[int] | None = None, timing: bool = False,
                   r_min_quantile: float = R_MIN_QUANTILE) -> ExperimentResult:
    """Run all trials (optionally for several N), aggregate, write CSVs.

    Files written to ``out_dir``: ``trials.csv``, ``rates.csv``,
    ``summary.csv``.
    """
    ns = list(n_sweep) if n_sweep else [config.n_nodes]
    r_min = None
    if config.r_min_mbps == "auto":
        r_min = calibrate_r_min(config.replace(n_nodes=max(ns)), r_min_quantile)
        log.info("calibrated r_min = %.6g Mbps", r_min)
    elif config.r_min_mbps is not None:
        r_min = float(config.r_min_mbps)
    reports = []
    for n in ns:
        log.info("running %d trials at N=%d", config.trials, n)
        reports.extend(run_trials(config.replace(n_nodes=n), r_min, workers))
    summary = summarize(reports)
    paths = {}
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        paths = {k: os.path.join(out_dir, f"{k}.csv") for k in ("trials", "rates", "summary")}
        cols = TRIAL_COLUMNS + (["wall_time_ms"] if timing else [])
        emit_csv(paths["trials"], cols, trial_rows(reports, timing))
        emit_csv(paths["rates"], RATE_COLUMNS, rate_rows(reports))
        emit_csv(paths["summary"], SUMMARY_COLUMNS, summary)
    return ExperimentResult(reports, summary, r_min, paths)


# ---------------------------------------------------------------------------

def sweep_three_node(config: ExperimentConfig, forwarder_ap_distance_m: float = 150.0,
                     sender_distances: Sequence[float] | None = None,
                     out_dir: str | None = None) -> list[list]:
    """Direct vs exchange rates as the sender moves away along the AP-forwarder line.

    Uses deterministic gains ``k d^-exponent``. Schemes: ``direct``,
    ``be_sum`` (alpha = 0) and ``be_maxmin``.
    """
    if sender_distances is None:
        sender_distances = np.arange(200.0, 801.0, 10.0)
    p = config.power_mw
    w = config.bandwidth_per_node_mhz
    k, e = config.k_const, config.pathloss_exp
    rho_f0 = netmodel.mean_gain(forwarder_ap_distance_m, k, e)
    rows = []
    for d in sender_distances:
        d = float(d)
        if d <= forwarder_ap_distance_m:
            raise ValueError("the sender must be farther from the AP than the forwarder")
        rho_s0 = netmodel.mean_gain(d, k, e)
        rho_sf = netmodel.mean_gain(d - forwarder_ap_distance_m, k, e)
        base = PairProblem(w, w, p, rho_s0, rho_f0, rho_sf, 0.0)
        schemes = [("direct", base.r_s_in, base.r_f_in),
                   ("be_sum", *solve_alpha_fair(base, config.solver_tol).rates()),
                   ("be_maxmin", *solve_maxmin(dataclasses.replace(base, alpha=MAXMIN),
                                               config.solver_tol).rates())]
        for name, rs, rf in schemes:
            rows.append([d, name, rs, rf, rs + rf, min(rs, rf)])
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        emit_csv(os.path.join(out_dir, "three_node.csv"), SWEEP_COLUMNS, rows)
    return rows
