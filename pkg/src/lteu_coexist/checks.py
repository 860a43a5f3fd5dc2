"""Acceptance checks shared by ``lteu-coexist validate`` and the test suite.

Each check returns one or more :class:`Check` records. ``passed`` is
``None`` for purely informational rows (e.g. the rejected interference-sum
candidate distributions), which never fail a validation run.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate

from .analytics import (
    SinrModel, exp_integral_e1, i2, psi, psi_quadrature,
    small_cell_throughput, small_cell_throughput_quadrature, sinr_cdf,
)
from .channel import build_precoders, generate_channels, quantize_channel
from .config import TABLE3_WEIGHTS, ScenarioConfig, Weights
from .dcf import fixed_point_residual, slot_level_simulate, solve_tau, wifi_throughput
from .interference import DIST_MODES, WifiInterference, gamma_cdf, sum_distribution
from .montecarlo import fit_sigma_scale, ks_distance, simulate_interference_samples, simulate_sinr_samples
from .optimizer import Scenario, allocate_dof, evaluate_allocation, select_wifi_users
from .rng import stream


@dataclass(frozen=True)
class Check:
    name: str
    statistic: float
    threshold: float
    passed: Optional[bool]
    detail: str = ""

    def as_dict(self) -> dict:
        passed = None if self.passed is None else bool(self.passed)
        out = {"statistic": _clean(self.statistic), "threshold": _clean(self.threshold), "pass": passed}
        if self.detail:
            out["detail"] = self.detail
        return out


def _clean(x):
    x = float(x)
    # JSON has no inf/nan
    if not math.isfinite(x):
        return str(x)
    return x


def _rel(a: float, b: float) -> float:
    return abs(a - b) / abs(b)


# -- DCF ---------------------------------------------------------------------

def check_dcf_fixed_point(cfg: ScenarioConfig) -> list[Check]:
    tau1, p1 = solve_tau(1, cfg.mac)
    expected = 2.0 / (cfg.mac.min_window + 1)
    out = [Check("dcf_tau_single_user", abs(tau1 - expected), 1e-12, abs(tau1 - expected) < 1e-12,
                 f"tau(M=1) = {tau1!r}")]
    worst = 0.0
    for m in (2, 5, 10, 20):
        tau, p = solve_tau(m, cfg.mac)
        worst = max(worst, fixed_point_residual(tau, p, m, cfg.mac))
    out.append(Check("dcf_fixed_point_residual", worst, 1e-12, worst < 1e-12, "M in {2, 5, 10, 20}"))
    return out


def check_dcf_simulation(cfg: ScenarioConfig, users=(2, 5, 10)) -> list[Check]:
    out = []
    for m in users:
        model = wifi_throughput(m, cfg.mac)
        sim = slot_level_simulate(m, cfg.mac, cfg.slots, seed=cfg.seed)
        e_p = _rel(sim.collision_rate, model.p_collision)
        e_r = _rel(sim.throughput_bps, model.throughput_bps)
        out.append(Check(f"dcf_sim_collision_M{m}", e_p, 0.05, e_p < 0.05,
                         f"model {model.p_collision:.6f}, simulated {sim.collision_rate:.6f}"))
        out.append(Check(f"dcf_sim_throughput_M{m}", e_r, 0.05, e_r < 0.05,
                         f"model {model.throughput_bps:.6e}, simulated {sim.throughput_bps:.6e}"))
    return out


def fig3_curve(cfg: ScenarioConfig, users=range(1, 16)) -> list[float]:
    return [wifi_throughput(m, cfg.mac).throughput_bps for m in users]


def unimodal_peak(values) -> Optional[int]:
    """Index of the peak if ``values`` rise strictly then fall strictly, else None."""
    v = list(values)
    peak = int(np.argmax(v))
    rising = all(a < b for a, b in zip(v[:peak], v[1:peak + 1]))
    falling = all(a > b for a, b in zip(v[peak:], v[peak + 1:]))
    return peak if rising and falling else None


def check_fig3(cfg: ScenarioConfig) -> list[Check]:
    users = list(range(1, 16))
    curve = fig3_curve(cfg, users)
    peak = unimodal_peak(curve)
    interior = peak is not None and 0 < peak < len(users) - 1
    peak_m = users[int(np.argmax(curve))]
    return [
        Check("fig3_unimodal", float(interior), 1.0, interior, "interior peak over M = 1..15"),
        Check("fig3_peak_offset", float(abs(peak_m - 5)), 1.0, abs(peak_m - 5) <= 1,
              f"peak at M = {peak_m} ({max(curve) / 1e6:.3f} Mbps)"),
    ]


# -- special functions and throughput -----------------------------------------

def _quad_e1(x):
    v, _ = integrate.quad(lambda t: math.exp(-t) / t, x, np.inf, epsabs=0.0, epsrel=1e-13, limit=200)
    return v


def _quad_i2(x, y, z):
    f = lambda t: math.exp(-x * t) / (t + y) ** z
    v1, _ = integrate.quad(f, 0.0, 1.0, epsabs=0.0, epsrel=1e-13, limit=200)
    v2, _ = integrate.quad(f, 1.0, np.inf, epsabs=0.0, epsrel=1e-13, limit=200)
    return v1 + v2


def special_function_grid(seed: int, n_points: int = 50):
    rng = stream(seed, "special-grid")
    x = rng.uniform(0.01, 10.0, n_points)
    y = rng.uniform(0.1, 10.0, n_points)
    y[np.abs(y - 1.0) < 1e-3] += 0.01
    z = rng.integers(1, 8, n_points)
    return list(zip(x.tolist(), y.tolist(), z.tolist()))


def check_special_functions(cfg: ScenarioConfig, n_points: int = 50) -> list[Check]:
    err = {"e1": 0.0, "i2": 0.0, "psi": 0.0}
    for x, y, z in special_function_grid(cfg.seed, n_points):
        err["e1"] = max(err["e1"], _rel(exp_integral_e1(x), _quad_e1(x)))
        err["i2"] = max(err["i2"], _rel(i2(x, y, z), _quad_i2(x, y, z)))
        err["psi"] = max(err["psi"], _rel(psi(x, y, z), psi_quadrature(x, y, z)))
    return [Check(f"special_{k}_vs_quadrature", v, 1e-7, v < 1e-7, f"{n_points} random points")
            for k, v in err.items()]


def check_throughput_quadrature(cfg: ScenarioConfig) -> list[Check]:
    sc = cfg.small_cell
    worst = 0.0
    for k in (2, 4, 6):
        for sigma in (0.01, 0.1, 0.45):
            m = SinrModel(k, sigma, sc.tx_power, sc.noise_power)
            worst = max(worst, _rel(small_cell_throughput(m, sc.bandwidth_hz),
                                    small_cell_throughput_quadrature(m, sc.bandwidth_hz)))
    return [Check("throughput_closed_form_vs_quadrature", worst, 1e-6, worst < 1e-6,
                  "K in {2, 4, 6}, sigma in {0.01, 0.1, 0.45}")]


# -- SINR distribution and interference sum -----------------------------------

ADJUDICATION_K = 4


def check_sinr_cdf(cfg: ScenarioConfig) -> list[Check]:
    sc = cfg.small_cell
    k = ADJUDICATION_K
    perfect = simulate_sinr_samples(sc, k, n_samples=cfg.samples, seed=cfg.seed, quant_error=0.0)
    ks0 = ks_distance(perfect, lambda x: sinr_cdf(x, SinrModel(k, 0.0, sc.tx_power, sc.noise_power)))
    b = 2.0 ** (-8.0 / 7.0)
    quant_cfg = dataclasses.replace(sc, quant_error=b)
    samples = simulate_sinr_samples(quant_cfg, k, n_samples=cfg.samples, seed=cfg.seed)
    ks_b = ks_distance(samples, lambda x: sinr_cdf(x, SinrModel.from_config(quant_cfg, k)))
    c, ks_fit = fit_sigma_scale(samples, quant_cfg, k)
    return [
        Check("sinr_cdf_perfect_csi_ks", ks0, 0.02, ks0 < 0.02, f"K = {k}, {perfect.n} samples"),
        Check("sinr_cdf_quantized_ks", ks_b, 0.05, ks_b < 0.05 or ks_fit < 0.05,
              f"sigma = b = {b:.6f}: KS {ks_b:.5f}; fitted sigma = {c:.4f} b: KS {ks_fit:.5f}"),
    ]


def interference_sum_table(cfg: ScenarioConfig, k: int = ADJUDICATION_K) -> dict[str, float]:
    """KS distance of each interference-sum model against Monte Carlo (all DoF used, N = K)."""
    sc = cfg.small_cell
    nulled = sc.n_antennas - 1 - k
    samples = simulate_interference_samples(sc, k, n_samples=cfg.samples, seed=cfg.seed, n_wifi_nulled=nulled)
    table = {}
    for mode in DIST_MODES:
        shape, scale = sum_distribution(k, mode, sc.n_antennas, k)
        table[mode] = ks_distance(samples, lambda x, a=shape, s=scale: gamma_cdf(x, a, s))
    return table


def check_interference_sum(cfg: ScenarioConfig) -> list[Check]:
    table = interference_sum_table(cfg)
    out = [Check(f"interference_ks_{mode}", ks, 0.02, None, "comparison only") for mode, ks in table.items()]
    ks = table[cfg.dist_mode]
    out.append(Check("interference_default_mode_ks", ks, 0.02, ks < 0.02, f"default mode {cfg.dist_mode!r}"))
    return out


# -- Fig. 2, Fig. 4, Table III ------------------------------------------------

def fig2_curve(cfg: ScenarioConfig, feedback_bits: int, ks=range(2, 8)) -> list[float]:
    sc = dataclasses.replace(cfg.small_cell, feedback_bits=feedback_bits, quant_error=None)
    return [small_cell_throughput(SinrModel.from_config(sc, k), sc.bandwidth_hz) for k in ks]


def check_fig2(cfg: ScenarioConfig) -> list[Check]:
    ks = list(range(2, 8))
    r4 = fig2_curve(cfg, 4, ks)
    r8 = fig2_curve(cfg, 8, ks)
    k4 = ks[int(np.argmax(r4))]
    drop = max(max((a - b) / a for a, b in zip(r8, r8[1:])), 0.0)
    return [
        Check("fig2_b4_argmax", float(k4), 2.0, k4 == 2, "argmax over K = 2..7"),
        Check("fig2_b8_max_relative_drop", drop, 0.0, drop <= 0.0,
              "R_s(K) for B = 8: " + ", ".join(f"{r / 1e6:.2f}" for r in r8) + " Mbps"),
    ]


def fig4_rows(scenario: Scenario):
    n_t = scenario.n_antennas
    rows = []
    for n in range(2, n_t - 1):
        rows.append(evaluate_allocation(n_t - 1 - n, scenario))
    return rows


def table3_rows(scenario: Scenario):
    return [allocate_dof(scenario, Weights(es, ew)) for es, ew in TABLE3_WEIGHTS]


def check_fig4_table3(cfg: ScenarioConfig) -> list[Check]:
    scenario = Scenario.from_config(cfg)
    rows = fig4_rows(scenario)
    rs = [a.r_small for a in rows]
    rw = [a.r_wifi for a in rows]
    rs_drop = max(max((a - b) / a for a, b in zip(rs, rs[1:])), 0.0)
    rw_rise = max(max((b - a) / a for a, b in zip(rw, rw[1:])), 0.0)
    tol = 1e-12
    table = table3_rows(scenario)
    dofs = [(a.sue_dof, a.wifi_dof) for a in table]
    increases = sum(1 for a, b in zip(dofs, dofs[1:]) if b[0] > a[0])
    first_ok = dofs[0] == (6, 1)
    last_ok = dofs[-1] == (2, 5)
    return [
        Check("fig4_rs_nondecreasing", rs_drop, tol, rs_drop <= tol, "max relative drop over N = 2..N_T-2"),
        Check("fig4_rw_nonincreasing", rw_rise, tol, rw_rise <= tol, "max relative rise over N = 2..N_T-2"),
        Check("table3_sue_dof_nonincreasing", float(increases), 0.0, increases == 0,
              "allocations " + " ".join(f"({n},{d})" for n, d in dofs)),
        Check("table3_first_row", float(dofs[0][0]), 6.0, first_ok, f"(0.1, 0.9) -> {dofs[0]}"),
        Check("table3_last_row", float(dofs[-1][0]), 2.0, last_ok, f"(0.5, 0.5) -> {dofs[-1]}"),
    ]


# -- ZF orthogonality and optimizer properties --------------------------------

def zf_max_leakage(cfg: ScenarioConfig, n_scenarios: int = 100) -> float:
    sc = cfg.small_cell
    n_t = sc.n_antennas
    rng = stream(cfg.seed, "zf-scenarios")
    worst = 0.0
    for s in range(n_scenarios):
        n = int(rng.integers(1, n_t))  # SUE DoF, 1..N_T-1
        k = int(rng.integers(1, n + 1))
        nulled = n_t - n - 1
        ch = generate_channels(sc, k, nulled, cfg.geometry, seed=cfg.seed * 1000 + s)
        quant = [quantize_channel(ch.sue_channels[i], sc.b, seed=cfg.seed * 1000 + s, rng=rng) for i in range(k)]
        pre = build_precoders(quant, ch, nulled_wifi=range(nulled))
        for row, kk in enumerate(pre.served_sues):
            v = pre.vectors[row]
            dirs = [ch.wifi_channels_est[m] for m in range(nulled)] + [ch.ap_channel]
            dirs += [quant[i].direction_est for i in range(k) if i != kk]
            for d in dirs:
                worst = max(worst, abs(np.vdot(d / np.linalg.norm(d), v)))
    return worst


def check_zf(cfg: ScenarioConfig) -> list[Check]:
    worst = zf_max_leakage(cfg)
    return [Check("zf_nulled_leakage", worst, 1e-8, worst < 1e-8, "100 random scenarios, N_T = 8")]


def exhaustive_wifi_selection(d: int, users: WifiInterference, threshold: float) -> float:
    """Largest expected contender count over all size-``d`` nulled sets."""
    base = [users.access(m, False, threshold) for m in range(users.n_users)]
    sel = [users.access(m, True, threshold) for m in range(users.n_users)]
    best = -math.inf
    for subset in itertools.combinations(range(users.n_users), d):
        chosen = set(subset)
        best = max(best, sum(sel[m] if m in chosen else base[m] for m in range(users.n_users)))
    return best


def check_optimizer(cfg: ScenarioConfig, n_scenarios: int = 50) -> list[Check]:
    n_t = cfg.small_cell.n_antennas
    budget = math.ceil(math.log2(n_t)) + 1
    max_evals = 0
    dominated = 0
    for seed in range(10):
        scenario = Scenario.from_config(cfg.replace(seed=cfg.seed + seed))
        for es, ew in TABLE3_WEIGHTS:
            w = Weights(es, ew)
            best = allocate_dof(scenario, w)
            max_evals = max(max_evals, best.iterations)
            for d in best.visited:
                other = evaluate_allocation(d, scenario, weights=w)
                if best.feasible and other.feasible and other.objective > best.objective:
                    dominated += 1
    rng = stream(cfg.seed, "selection-scenarios")
    mismatches = 0
    threshold = cfg.access_threshold
    for _ in range(n_scenarios):
        m = int(rng.integers(1, 9))
        dist = cfg.geometry.cell_radius * np.sqrt(rng.uniform(size=m))
        pl = tuple(float(cfg.geometry.path_loss(x)) for x in dist)
        k = int(rng.integers(2, 5))
        for d in range(0, min(m, n_t - 3) + 1):
            n = n_t - 1 - d
            users = WifiInterference(pl, min(k, n), cfg.small_cell.wifi_csi_corr, cfg.small_cell.tx_power,
                                     cfg.dist_mode, n_t, n)
            chosen = set(select_wifi_users(d, users.gains(threshold)))
            greedy = sum(users.access(i, i in chosen, threshold) for i in range(m))
            if abs(greedy - exhaustive_wifi_selection(d, users, threshold)) > 1e-12:
                mismatches += 1
    return [
        Check("optimizer_evaluations", float(max_evals), float(budget), max_evals <= budget,
              "ceil(log2 N_T) + 1 over 10 snapshots x 9 weight rows"),
        Check("optimizer_best_of_visited", float(dominated), 0.0, dominated == 0,
              "visited feasible allocations beating the returned one"),
        Check("greedy_selection_vs_exhaustive", float(mismatches), 0.0, mismatches == 0,
              f"{n_scenarios} scenarios, M <= 8, every d"),
    ]


ALL_CHECKS = (
    check_dcf_fixed_point, check_dcf_simulation, check_fig3, check_special_functions,
    check_throughput_quadrature, check_sinr_cdf, check_interference_sum, check_fig2, check_fig4_table3,
    check_zf, check_optimizer,
)


def run_all(cfg: ScenarioConfig) -> list[Check]:
    out = []
    for fn in ALL_CHECKS:
        out.extend(fn(cfg))
    return out
