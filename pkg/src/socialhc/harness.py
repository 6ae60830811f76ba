"""Parameter sweeps, seeded trials, slope fits and table output.

Trial seeds pack ``(base_seed, point, trial)`` into one 64-bit integer as
``base << 32 | point << 16 | trial``. Result tables keep a fixed column
order; every row carries the full parameter tuple.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigurationError, DomainError, SocialHCError
from .geometry import NetworkConfig, deploy
from .hc import decompose, decompose_by_count, side_length, simulate_hc
from .mh import simulate_mh
from .scaling import hc_tradeoff_dense, hc_tradeoff_extended
from .social import SocialParams, assign_social, pair_distances

SWEEP_VARIABLES = ("n", "gamma", "q", "alpha", "cell_area", "epsilon")
PROTOCOLS = ("mh", "hc", "social")

SWEEP_COLUMNS = (
    "point", "trial", "seed", "variable", "value", "protocol", "n", "mode", "side_length",
    "gamma", "q", "alpha", "power", "cell_area", "epsilon", "subnets",
    "throughput", "delay", "max_load", "fallback_fraction", "mean_sd_distance",
    "status", "message",
)
HC_COLUMNS = ("seed", "n", "gamma", "alpha", "epsilon_or_subnet_count", "slot",
              "throughput", "fallback_fraction")
FIG8_COLUMNS = ("alpha", "gamma", "subnets", "throughput_mean", "throughput_stderr",
                "deployments", "phase_trials", "analytic_delay_exponent")

# the 256-node reproduction grid: gamma -> subnetwork count
FIG8_SUBNETS = {2.0: 1, 2.25: 4, 2 + math.log2(3) / 4: 9, 2.5: 16}


def trial_seed(base_seed: int, point: int, trial: int) -> int:
    if not 0 <= base_seed < 1 << 32:
        raise ConfigurationError(f"base seed must be in [0, 2^32), got {base_seed}")
    if not (0 <= point < 1 << 16 and 0 <= trial < 1 << 16):
        raise ConfigurationError(f"point and trial must be in [0, 65536), got {point}, {trial}")
    return (int(base_seed) << 32) | (int(point) << 16) | int(trial)


@dataclass(frozen=True)
class SlopeEstimate:
    slope: float
    intercept: float
    r_squared: float
    n_points: int


def estimate_slope(xs, ys) -> SlopeEstimate:
    """Least-squares line through ``(log x, log y)``."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ConfigurationError("xs and ys must be 1-d and of equal length")
    if x.size < 3:
        raise ConfigurationError(f"need at least 3 points, got {x.size}")
    if not (np.all(x > 0) and np.all(y > 0)):
        raise DomainError("slope fit needs strictly positive xs and ys")
    lx, ly = np.log(x), np.log(y)
    A = np.stack([lx, np.ones_like(lx)], axis=1)
    (slope, intercept), *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else max(0.0, 1.0 - float(np.sum(resid ** 2)) / ss_tot)
    return SlopeEstimate(float(slope), float(intercept), min(1.0, r2), int(x.size))


@dataclass(frozen=True)
class SweepSpec:
    """One swept variable over explicit values, ``trials_per_point`` runs each.

    ``cell_area`` of ``None`` means ``cell_area_factor * L**2 * log(n) / n``.
    For the HC protocol ``subnets`` fixes the base subnetwork count,
    otherwise the side comes from the sample mean pair distance and
    ``epsilon``.
    """

    variable: str
    values: tuple
    trials_per_point: int = 1
    network: NetworkConfig = field(default_factory=lambda: NetworkConfig(256))
    social: SocialParams = field(default_factory=lambda: SocialParams(0.0))
    protocol: str = "mh"
    cell_area: float | None = None
    cell_area_factor: float = 2.0
    tdma_t: int = 9
    epsilon: float = 0.05
    subnets: int | None = None
    cluster_fraction: float = 0.5
    hc_trials: int = 20
    b: float = 0.25

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            raise ConfigurationError(f"variable must be one of {SWEEP_VARIABLES}, got {self.variable!r}")
        if self.protocol not in PROTOCOLS:
            raise ConfigurationError(f"protocol must be one of {PROTOCOLS}, got {self.protocol!r}")
        if len(self.values) == 0:
            raise ConfigurationError("sweep needs at least one value")
        if self.trials_per_point < 1:
            raise ConfigurationError(f"trials must be >= 1, got {self.trials_per_point}")
        object.__setattr__(self, "values", tuple(self.values))


def _point_setup(spec: SweepSpec, value, seed: int):
    net, soc = spec.network, spec.social
    cell_area, epsilon = spec.cell_area, spec.epsilon
    var = spec.variable
    if var == "n":
        # a dense side stays fixed; an extended side follows sqrt(n)
        keep = {"side_length": net.side_length} if net.mode == "dense" else {}
        net = net.replace(n=int(value), seed=seed, **keep)
    else:
        net = net.replace(seed=seed)
    if var == "alpha":
        net = net.replace(path_loss_alpha=float(value))
    elif var == "gamma":
        soc = replace(soc, gamma=float(value))
    elif var == "q":
        soc = replace(soc, q=int(value))
    elif var == "cell_area":
        cell_area = float(value)
    elif var == "epsilon":
        epsilon = float(value)
    if cell_area is None:
        L = net.side_length
        cell_area = min(L * L, spec.cell_area_factor * L * L * math.log(net.n) / net.n)
    return net, soc, cell_area, epsilon


def _analytic_delay(mode: str, gamma: float, q_growth: str, alpha: float, b: float) -> float:
    if mode == "dense":
        return hc_tradeoff_dense(gamma, q_growth, b).delay_exponent
    return hc_tradeoff_extended(gamma, q_growth, alpha, b).delay_exponent


def _run_one(job) -> dict:
    spec, point, trial, value = job
    seed = trial_seed(spec.network.seed, point, trial)
    row = dict.fromkeys(SWEEP_COLUMNS, "")
    row.update(point=point, trial=trial, seed=seed, variable=spec.variable, value=value,
               protocol=spec.protocol)
    try:
        net, soc, cell_area, epsilon = _point_setup(spec, value, seed)
        row.update(n=net.n, mode=net.mode, side_length=net.side_length, gamma=soc.gamma, q=soc.q,
                   alpha=net.path_loss_alpha, power=net.power)
        d = deploy(net)
        social = assign_social(d, soc)
        row["mean_sd_distance"] = float(pair_distances(d, social).mean())
        if spec.protocol == "mh":
            res = simulate_mh(d, social, cell_area, spec.tdma_t)
            row.update(cell_area=cell_area, throughput=res.aggregate_throughput,
                       delay=res.mean_delay_hops, max_load=res.max_cell_load)
        elif spec.protocol == "hc":
            if spec.subnets is not None:
                plan = decompose_by_count(d, spec.subnets)
            else:
                plan = decompose(d, side_length(row["mean_sd_distance"], net.n, epsilon,
                                                net.side_length))
            res = simulate_hc(d, social, plan, spec.cluster_fraction, spec.hc_trials,
                              _analytic_delay(net.mode, soc.gamma, soc.q_growth,
                                              net.path_loss_alpha, spec.b))
            row.update(epsilon=epsilon if spec.subnets is None else "",
                       subnets=plan.base_subnets, throughput=res.total_throughput,
                       delay=res.analytic_delay_exponent, fallback_fraction=res.fallback_fraction)
        row["status"] = "ok"
    except (SocialHCError, ValueError, ArithmeticError) as exc:
        row["status"] = f"error:{type(exc).__name__}"
        row["message"] = str(exc)
    return row


def run_sweep(spec: SweepSpec, workers: int = 1) -> list[dict]:
    """One row per (value, trial), sorted by (point, trial); errors stay in their row."""
    jobs = [(spec, i, t, v) for i, v in enumerate(spec.values) for t in range(spec.trials_per_point)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_one, jobs))
    else:
        rows = [_run_one(j) for j in jobs]
    rows.sort(key=lambda r: (r["point"], r["trial"]))
    return rows


def hc_slot_rows(result, seed: int, n: int, gamma: float, alpha: float,
                 epsilon_or_subnets) -> list[dict]:
    """Per-slot HC rows plus a ``total`` row."""
    rows = [dict(seed=seed, n=n, gamma=gamma, alpha=alpha, epsilon_or_subnet_count=epsilon_or_subnets,
                 slot=k, throughput=t, fallback_fraction=result.fallback_fraction)
            for k, t in enumerate(result.slot_throughputs)]
    rows.append(dict(rows[0], slot="total", throughput=result.total_throughput))
    return rows


def fig8_subnets(gamma: float) -> int | None:
    for g, k in FIG8_SUBNETS.items():
        if abs(g - gamma) < 1e-9:
            return k
    return None


def fig8_experiment(alphas, gammas, seeds=range(20), trials: int = 20, n: int = 256,
                    side: float = 100.0, power: float = 1.0, q: int = 1,
                    cluster_fraction: float = 0.5, epsilon: float | None = None,
                    b_base: float = 0.25) -> list[dict]:
    """Mean HC throughput per ``(alpha, gamma)`` over deployments and phase trials.

    Gammas from the reproduction grid use its fixed subnetwork counts;
    others need ``epsilon`` and take the side from the sample mean pair
    distance. The same seed gives the same deployment and phases for
    every alpha. ``throughput_stderr`` is over per-deployment means, or
    over phase trials for a single deployment.
    """
    seeds = list(seeds)
    if not seeds:
        raise ConfigurationError("fig8 needs at least one seed")
    rows = []
    for alpha in alphas:
        for gamma in gammas:
            count = fig8_subnets(gamma)
            if count is None and epsilon is None:
                raise ConfigurationError(
                    f"gamma={gamma} has no fixed subnetwork count; give epsilon")
            # b chosen so that the delay exponent (3 - gamma) b stays at b_base
            b = b_base / (3 - gamma) if gamma < 3 else b_base
            delay = hc_tradeoff_dense(gamma, "constant", min(b, 1 - 1e-12)).delay_exponent
            per_seed, pooled, used = [], [], set()
            for seed in seeds:
                cfg = NetworkConfig(n, side_length=side, seed=seed, path_loss_alpha=alpha, power=power)
                d = deploy(cfg)
                social = assign_social(d, SocialParams(gamma, q))
                if count is not None:
                    plan = decompose_by_count(d, count)
                else:
                    plan = decompose(d, side_length(float(pair_distances(d, social).mean()),
                                                    n, epsilon, side))
                used.add(plan.base_subnets)
                res = simulate_hc(d, social, plan, cluster_fraction, trials)
                per_seed.append(res.total_throughput)
                pooled.append(res.trial_throughputs)
            spread = np.asarray(per_seed) if len(seeds) > 1 else pooled[0]
            stderr = float(np.std(spread, ddof=1) / math.sqrt(len(spread))) if len(spread) > 1 else 0.0
            rows.append(dict(alpha=alpha, gamma=gamma,
                             subnets=count if count is not None else ";".join(map(str, sorted(used))),
                             throughput_mean=float(np.mean(per_seed)), throughput_stderr=stderr,
                             deployments=len(seeds), phase_trials=trials,
                             analytic_delay_exponent=delay))
    return rows


def _cell(v, as_text: bool = True):
    if isinstance(v, (float, np.floating)):
        return repr(float(v)) if as_text else float(v)
    if isinstance(v, np.integer):
        return int(v)
    return v


def format_table(rows, columns, fmt: str = "csv") -> str:
    """Render rows in a fixed column order as CSV or a JSON array."""
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_cell(r.get(c, "")) for c in columns])
        return buf.getvalue()
    if fmt == "json":
        out = [{c: _cell(r.get(c, ""), as_text=False) for c in columns} for r in rows]
        return json.dumps(out, indent=2) + "\n"
    raise ConfigurationError(f"format must be csv or json, got {fmt!r}")


def write_table(rows, columns, path, fmt: str = "csv") -> None:
    with open(path, "w", newline="") as fh:
        fh.write(format_table(rows, columns, fmt))
