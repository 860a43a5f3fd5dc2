"""Command-line runner: figure/table sweeps as CSV and the validation report as JSON.

Usage::

    lteu-coexist fig2|fig3|fig4|table3|validate [--config PATH] [--seed N] [--samples N] [--out PATH]
    lteu-coexist config init [--out PATH]

Sweep subcommands exit with status 1 when the trend they reproduce does not
hold (the CSV is still written); ``validate`` exits 1 when any acceptance
check fails. Invalid configuration exits with status 2 before any work.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import logging
import sys
from typing import Optional, Sequence

import numpy as np

from . import checks
from .config import ConfigError, ScenarioConfig
from .dcf import slot_level_simulate, wifi_throughput
from .montecarlo import empirical_throughput, simulate_sinr_samples
from .optimizer import Scenario

log = logging.getLogger("lteu_coexist")

SCHEMA = {
    "small_cell.n_antennas": "SBS antennas N_T",
    "small_cell.tx_power": "SBS transmit power, W",
    "small_cell.noise_power": "noise power over the band, W",
    "small_cell.feedback_bits": "CSI feedback bits B per SUE",
    "small_cell.quant_error": "quantization error b; null -> 2^(-B/(N_T-1))",
    "small_cell.wifi_csi_corr": "correlation eps between estimated and true Wi-Fi channels",
    "small_cell.bandwidth_hz": "channel bandwidth, Hz",
    "mac.*": "802.11 DCF: window W, max stage L, slot/SIFS/DIFS in s, frame sizes in bits, rate in bit/s",
    "geometry.*": "cell radius (m), path-loss exponent, reference distance (m)",
    "reqs.*": "minimum per-user rates, bit/s",
    "weights.*": "e_s and e_w, summing to 1",
    "n_wifi": "Wi-Fi users in the snapshot",
    "threshold": "access threshold, W; null -> 10 x noise_power",
    "dist_mode": "interference-sum model: matched | erlang | paper",
    "seed": "master seed",
    "samples": "Monte Carlo samples per point",
    "slots": "virtual slots per DCF simulation",
}


def config_template(cfg: Optional[ScenarioConfig] = None) -> str:
    cfg = cfg or ScenarioConfig()
    width = max(len(k) for k in SCHEMA)
    lines = ["# lteu-coexist scenario configuration (flat YAML, dotted keys)", "#"]
    lines += [f"# {k.ljust(width)}  {v}" for k, v in SCHEMA.items()]
    return "\n".join(lines) + "\n\n" + cfg.dumps()


# -- CSV helpers ---------------------------------------------------------------

def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return x


def _csv_text(header: Sequence[str], rows, cfg: ScenarioConfig) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(header) + ["config_hash", "seed"])
    tag = [cfg.digest(), cfg.seed]
    for row in rows:
        w.writerow([_fmt(x) for x in row] + tag)
    return buf.getvalue()


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _report(results: Sequence[checks.Check]) -> bool:
    ok = all(c.passed is not False for c in results)
    for c in results:
        flag = {True: "PASS", False: "FAIL", None: "INFO"}[c.passed]
        print(f"[{flag}] {c.name}: {c.statistic:.6g} (threshold {c.threshold:g}) {c.detail}", file=sys.stderr)
    return ok


# -- subcommands ---------------------------------------------------------------

def run_fig2(cfg: ScenarioConfig, out_path: Optional[str] = None) -> bool:
    """Small-cell throughput versus served SUEs, closed form and Monte Carlo (N = K)."""
    rows = []
    for bits in (4, 8):
        sc = dataclasses.replace(cfg.small_cell, feedback_bits=bits, quant_error=None)
        closed = checks.fig2_curve(cfg, bits)
        for k, r in zip(range(2, 8), closed):
            samples = simulate_sinr_samples(sc, k, n_samples=cfg.samples, seed=cfg.seed)
            mc = empirical_throughput(samples, k, sc.bandwidth_hz)
            rows.append([k, bits, r, mc, (r - mc) / mc, r / 1e6])
    _emit(_csv_text(["K", "B", "rs_closed_bps", "rs_mc_bps", "rel_gap", "rs_closed_mbps"], rows, cfg), out_path)
    return _report(checks.check_fig2(cfg))


def run_fig3(cfg: ScenarioConfig, out_path: Optional[str] = None) -> bool:
    """Wi-Fi saturation throughput versus contenders, analytic and slot-simulated."""
    rows = []
    for m in range(1, 16):
        model = wifi_throughput(m, cfg.mac)
        sim = slot_level_simulate(m, cfg.mac, cfg.slots, seed=cfg.seed)
        rows.append([m, model.throughput_bps, sim.throughput_bps, sim.throughput_ci,
                     (model.throughput_bps - sim.throughput_bps) / sim.throughput_bps, model.throughput_bps / 1e6])
    header = ["M", "rw_model_bps", "rw_sim_bps", "rw_sim_ci95_bps", "rel_gap", "rw_model_mbps"]
    _emit(_csv_text(header, rows, cfg), out_path)
    return _report(checks.check_fig3(cfg))


def run_fig4(cfg: ScenarioConfig, out_path: Optional[str] = None) -> bool:
    """Both throughputs versus the SUE DoF N for one snapshot."""
    scenario = Scenario.from_config(cfg)
    rows = [[a.sue_dof, a.wifi_dof, a.k_served, a.r_small, a.r_wifi, a.m_bar, a.r_small / 1e6, a.r_wifi / 1e6]
            for a in checks.fig4_rows(scenario)]
    header = ["N", "wifi_dof", "K", "rs_bps", "rw_bps", "m_bar", "rs_mbps", "rw_mbps"]
    _emit(_csv_text(header, rows, cfg), out_path)
    results = [c for c in checks.check_fig4_table3(cfg) if c.name.startswith("fig4")]
    above = all(r[3] > r[4] for r in rows)
    results.append(checks.Check("fig4_rs_above_rw", float(above), 1.0, above, "R_s > R_w at every N"))
    return _report(results)


def run_table3(cfg: ScenarioConfig, out_path: Optional[str] = None) -> bool:
    """DoF allocation for the nine weight pairs."""
    scenario = Scenario.from_config(cfg)
    rows = []
    for (es, ew), a in zip(checks.TABLE3_WEIGHTS, checks.table3_rows(scenario)):
        rows.append([es, ew, a.r_small, a.r_wifi, a.sue_dof, a.wifi_dof, a.k_served, a.feasible,
                     a.r_small / 1e6, a.r_wifi / 1e6])
    header = ["e_s", "e_w", "rs_bps", "rw_bps", "N", "wifi_dof", "K", "feasible", "rs_mbps", "rw_mbps"]
    _emit(_csv_text(header, rows, cfg), out_path)
    return _report([c for c in checks.check_fig4_table3(cfg) if c.name.startswith("table3")])


def run_validate(cfg: ScenarioConfig) -> tuple[dict, bool]:
    """Run every acceptance check; returns (report, all_passed)."""
    results = checks.run_all(cfg)
    report = {c.name: c.as_dict() for c in results}
    return report, _report(results)


def _interference_sum_table_text(report: dict) -> str:
    lines = ["interference-sum model   KS distance"]
    for key in sorted(k for k in report if k.startswith("interference_ks_")):
        lines.append(f"  {key[len('interference_ks_'):]:<22} {report[key]['statistic']:.5f}")
    return "\n".join(lines)


# -- entry point ---------------------------------------------------------------

def _load_config(args) -> ScenarioConfig:
    cfg = ScenarioConfig.load(args.config) if args.config else ScenarioConfig()
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.samples is not None:
        overrides["samples"] = args.samples
    return cfg.replace(**overrides) if overrides else cfg


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="flat YAML scenario file (see `config init`)")
    common.add_argument("--seed", type=int, help="override the master seed")
    common.add_argument("--samples", type=int, help="override the Monte Carlo sample count")
    common.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="lteu-coexist", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("fig2", "fig3", "fig4", "table3", "validate"):
        sub.add_parser(name, parents=[common])
    cfg_parser = sub.add_parser("config", help="configuration utilities")
    cfg_sub = cfg_parser.add_subparsers(dest="action", required=True)
    cfg_sub.add_parser("init", parents=[common], help="print the default configuration template")
    return parser


RUNNERS = {"fig2": run_fig2, "fig3": run_fig3, "fig4": run_fig4, "table3": run_table3}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        cfg = _load_config(args)
    except (ConfigError, OSError) as exc:
        print(f"lteu-coexist: invalid configuration: {exc}", file=sys.stderr)
        return 2

    if args.command == "config":
        _emit(config_template(cfg), args.out)
        return 0
    if args.command == "validate":
        report, ok = run_validate(cfg)
        _emit(json.dumps(report, indent=2, sort_keys=True) + "\n", args.out)
        print(_interference_sum_table_text(report), file=sys.stderr)
        failed = sorted(k for k, v in report.items() if v["pass"] is False)
        print(f"{len(report) - len(failed)} of {len(report)} checks without failure; failed: {', '.join(failed) or 'none'}",
              file=sys.stderr)
        return 0 if ok else 1
    ok = RUNNERS[args.command](cfg, args.out)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
