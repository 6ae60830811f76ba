"""Command-line entry point: ``socialhc <command> [flags]``."""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import harness, scaling
from .config import load_config, merge, parse_values
from .errors import SocialHCError
from .geometry import NetworkConfig, deploy
from .hc import decompose, decompose_by_count, side_length, simulate_hc
from .mh import simulate_mh
from .social import SocialParams, assign_social, pair_distances

MH_COLUMNS = ("seed", "n", "gamma", "q", "alpha", "cell_area", "throughput", "delay_hops",
              "max_load", "mode", "tdma_t", "cell_rate", "n_pairs")
GENERATE_COLUMNS = ("node_id", "x", "y", "contacts", "destination_id")
ANALYTIC_COLUMNS = ("regime", "protocol", "mode", "gamma", "alpha", "parameter", "value",
                    "throughput_exponent", "throughput_log_power", "throughput_epsilon",
                    "delay_exponent", "delay_log_power", "delay_epsilon")


def _common(p: argparse.ArgumentParser):
    # defaults of None let config-file values through
    p.add_argument("--config", help="INI file with [network]/[social]/[mh]/[hc]/[sweep] sections")
    p.add_argument("--n", type=int)
    p.add_argument("--mode", choices=("dense", "extended"))
    p.add_argument("--side-length", dest="side_length", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--q", type=int)
    p.add_argument("--q-growth", dest="q_growth", choices=("constant", "growing"))
    p.add_argument("--alpha", type=float)
    p.add_argument("--power", type=float)
    p.add_argument("--cell-area", dest="cell_area", type=float)
    p.add_argument("--cell-area-factor", dest="cell_area_factor", type=float)
    p.add_argument("--tdma-t", dest="tdma_t", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--subnets", type=int)
    p.add_argument("--cluster-fraction", dest="cluster_fraction", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--out", help="output path (stdout when omitted)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="socialhc",
                                     description="Throughput-delay simulator for socially paired ad hoc networks")
    sub = parser.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("generate", help="deployment and social pairing; --out is a file prefix"))
    _common(sub.add_parser("simulate-mh", help="multihop throughput and delay"))
    _common(sub.add_parser("simulate-hc", help="HC throughput per slot"))
    a = sub.add_parser("analytic", help="exponent table, or the frontier with --frontier")
    _common(a)
    a.add_argument("--cell-area-exponent", dest="cell_area_exponent", type=float)
    a.add_argument("--frontier", action="store_true", help="sample the full frontier")
    a.add_argument("--grid", type=int, default=20, help="frontier samples per protocol")
    s = sub.add_parser("sweep", help="parameter sweep, one row per value and trial")
    _common(s)
    s.add_argument("--variable", choices=harness.SWEEP_VARIABLES)
    s.add_argument("--values", help="comma-separated values")
    s.add_argument("--protocol", choices=harness.PROTOCOLS)
    s.add_argument("--workers", type=int)
    f = sub.add_parser("fig8", help="HC throughput against gamma for several alphas")
    _common(f)
    f.add_argument("--alphas", default="2,2.5,3")
    f.add_argument("--gammas", default=None, help="default: the four reproduction values")
    f.add_argument("--seeds", type=int, default=20, help="number of deployments")
    return parser


def _settings(args) -> dict:
    return merge(load_config(args.config), vars(args))


def _network(cfg) -> NetworkConfig:
    return NetworkConfig(cfg["n"], cfg["mode"], cfg["side_length"], cfg["seed"], cfg["alpha"], cfg["power"])


def _social(cfg) -> SocialParams:
    return SocialParams(cfg["gamma"], cfg["q"], cfg["q_growth"])


def _cell_area(cfg, net: NetworkConfig) -> float:
    if cfg["cell_area"] is not None:
        return cfg["cell_area"]
    L = net.side_length
    return min(L * L, cfg["cell_area_factor"] * L * L * math.log(net.n) / net.n)


def _emit(text: str, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_generate(cfg, args):
    net = _network(cfg)
    d = deploy(net)
    social = assign_social(d, _social(cfg))
    if args.out:
        # --out is a file prefix here
        d.save(args.out)
        social.save(Path(args.out).with_name(Path(args.out).name + ".social.csv"))
        print(f"wrote {args.out}.nodes.csv, {args.out}.json, {args.out}.social.csv", file=sys.stderr)
        return
    contacts = {int(s): g for s, g in zip(social.sources, social.groups)}
    dest = {int(s): int(v) for s, v in zip(social.sources, social.destinations)}
    rows = [dict(node_id=k, x=float(x), y=float(y),
                 contacts=";".join(map(str, contacts.get(k, ()))), destination_id=dest.get(k, ""))
            for k, (x, y) in enumerate(d.positions)]
    _emit(harness.format_table(rows, GENERATE_COLUMNS, args.format), None)


def cmd_simulate_mh(cfg, args):
    net = _network(cfg)
    d = deploy(net)
    social = assign_social(d, _social(cfg))
    area = _cell_area(cfg, net)
    res = simulate_mh(d, social, area, cfg["tdma_t"])
    row = dict(seed=net.seed, n=net.n, mode=net.mode, gamma=cfg["gamma"], q=cfg["q"],
               alpha=net.path_loss_alpha, cell_area=area, tdma_t=cfg["tdma_t"],
               throughput=res.aggregate_throughput, delay_hops=res.mean_delay_hops,
               max_load=res.max_cell_load, cell_rate=res.cell_rate, n_pairs=res.n_pairs)
    _emit(harness.format_table([row], MH_COLUMNS, args.format), args.out)


def cmd_simulate_hc(cfg, args):
    net = _network(cfg)
    d = deploy(net)
    social = assign_social(d, _social(cfg))
    if cfg["subnets"] is not None:
        plan = decompose_by_count(d, cfg["subnets"])
        tag = cfg["subnets"]
    else:
        mean_sd = float(pair_distances(d, social).mean())
        plan = decompose(d, side_length(mean_sd, net.n, cfg["epsilon"], net.side_length))
        tag = cfg["epsilon"]
    delay = harness._analytic_delay(net.mode, cfg["gamma"], cfg["q_growth"], net.path_loss_alpha,
                                    cfg["b"])
    res = simulate_hc(d, social, plan, cfg["cluster_fraction"], cfg["trials"], delay,
                      _cell_area(cfg, net) if cfg["cell_area"] is not None else None)
    rows = harness.hc_slot_rows(res, net.seed, net.n, cfg["gamma"], net.path_loss_alpha, tag)
    _emit(harness.format_table(rows, harness.HC_COLUMNS, args.format), args.out)


def _analytic_row(p: scaling.TradeoffPoint, parameter: str, value, alpha):
    return dict(regime=p.regime, protocol=p.protocol, mode=p.mode, gamma=p.params["gamma"],
                alpha=alpha if p.mode == "extended" else "", parameter=parameter, value=value,
                throughput_exponent=p.throughput_exponent, throughput_log_power=p.throughput_log_power,
                throughput_epsilon=p.throughput_epsilon, delay_exponent=p.delay_exponent,
                delay_log_power=p.delay_log_power, delay_epsilon=p.delay_epsilon)


def _mh_point(mode, gamma, q_growth, alpha, x):
    if mode == "dense":
        return scaling.mh_tradeoff_dense(gamma, q_growth, x)
    return scaling.mh_tradeoff_extended(gamma, q_growth, alpha, x)


def _hc_point(mode, gamma, q_growth, alpha, b):
    if mode == "dense":
        return scaling.hc_tradeoff_dense(gamma, q_growth, b)
    return scaling.hc_tradeoff_extended(gamma, q_growth, alpha, b)


def cmd_analytic(cfg, args):
    gamma, alpha, qg, b = cfg["gamma"], cfg["alpha"], cfg["q_growth"], cfg["b"]
    modes = (cfg["mode"],) if args.mode else ("dense", "extended")
    rows = []
    for mode in modes:
        lo = -1.0 if mode == "dense" else 0.0
        if args.frontier:
            hi = scaling._largest_cell_exponent(gamma, qg, mode, alpha)
            for x in np.linspace(lo, hi, args.grid):
                rows.append(_analytic_row(_mh_point(mode, gamma, qg, alpha, float(x)),
                                          "cell_area_exponent", float(x), alpha))
            for bb in np.arange(args.grid) / args.grid:
                rows.append(_analytic_row(_hc_point(mode, gamma, qg, alpha, float(bb)), "b",
                                          float(bb), alpha))
        else:
            x = args.cell_area_exponent if args.cell_area_exponent is not None else lo
            rows.append(_analytic_row(_mh_point(mode, gamma, qg, alpha, x), "cell_area_exponent", x, alpha))
            rows.append(_analytic_row(_hc_point(mode, gamma, qg, alpha, b), "b", b, alpha))
    text = harness.format_table(rows, ANALYTIC_COLUMNS, args.format)
    if not args.frontier and args.format == "csv":
        dom = [scaling.dominant_protocol(gamma, qg, alpha, m) for m in modes]
        text += "".join(f"# {m}: {d.winner} ({d.description})\n" for m, d in zip(modes, dom))
    _emit(text, args.out)


def cmd_sweep(cfg, args):
    if cfg["values"] is None:
        raise SocialHCError("sweep needs --values (or [sweep] values)")
    values = parse_values(cfg["values"]) if isinstance(cfg["values"], str) else cfg["values"]
    spec = harness.SweepSpec(
        variable=cfg["variable"], values=values, trials_per_point=cfg["trials"],
        network=_network(cfg), social=_social(cfg), protocol=cfg["protocol"],
        cell_area=cfg["cell_area"], cell_area_factor=cfg["cell_area_factor"], tdma_t=cfg["tdma_t"],
        epsilon=cfg["epsilon"], subnets=cfg["subnets"], cluster_fraction=cfg["cluster_fraction"],
        b=cfg["b"])
    rows = harness.run_sweep(spec, workers=cfg["workers"])
    _emit(harness.format_table(rows, harness.SWEEP_COLUMNS, args.format), args.out)


def cmd_fig8(cfg, args):
    alphas = parse_values(args.alphas)
    gammas = parse_values(args.gammas) if args.gammas else tuple(harness.FIG8_SUBNETS)
    rows = harness.fig8_experiment(
        alphas, gammas, seeds=range(cfg["seed"], cfg["seed"] + args.seeds), trials=cfg["trials"],
        n=args.n or 256, side=args.side_length or 100.0, power=cfg["power"], q=cfg["q"],
        cluster_fraction=cfg["cluster_fraction"], epsilon=args.epsilon, b_base=cfg["b"])
    _emit(harness.format_table(rows, harness.FIG8_COLUMNS, args.format), args.out)


COMMANDS = {
    "generate": cmd_generate, "simulate-mh": cmd_simulate_mh, "simulate-hc": cmd_simulate_hc,
    "analytic": cmd_analytic, "sweep": cmd_sweep, "fig8": cmd_fig8,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _settings(args)
        COMMANDS[args.command](cfg, args)
    except (SocialHCError, ValueError, ArithmeticError, OSError) as exc:
        print(f"socialhc {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
