"""Spatial DoF split between serving SUEs and nulling Wi-Fi users.

Maximizes ``min(e_s R_s, e_w R_w)`` subject to per-user rate requirements,
``2 <= K <= N`` and ``N + |M_s| = N_T - 1``. The outer loop bisects on the
number ``d`` of Wi-Fi users nulled; for each ``d`` the nulled set is chosen
greedily by access-probability gain and K by exhaustive search.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .analytics import optimal_sue_count
from .channel import generate_channels
from .config import RateRequirements, ScenarioConfig, Weights
from .dcf import wifi_throughput
from .interference import WifiInterference, expected_active_users

log = logging.getLogger(__name__)


@dataclass
class DofAllocation:
    wifi_dof: int
    sue_dof: int
    k_served: int
    selected_wifi: tuple
    r_small: float
    r_wifi: float
    m_bar: float
    objective: float = math.nan
    feasible: bool = True
    constraints: dict = field(default_factory=dict)
    clamped: bool = False  # mean contender count was raised to 1 for the DCF model
    iterations: int = 0
    visited: tuple = ()
    diagnostic: str = ""


@dataclass
class Scenario:
    """One network snapshot: configuration plus the Wi-Fi users' path losses."""

    config: ScenarioConfig
    path_loss: np.ndarray

    @classmethod
    def from_config(cls, config: ScenarioConfig) -> "Scenario":
        sc = config.small_cell
        ch = generate_channels(sc, sc.n_antennas - 1, config.n_wifi, config.geometry, config.seed)
        return cls(config, ch.path_loss)

    @property
    def n_antennas(self) -> int:
        return self.config.small_cell.n_antennas

    def interference(self, k_sues: int, sue_dof: int) -> WifiInterference:
        sc = self.config.small_cell
        return WifiInterference(
            tuple(float(a) for a in self.path_loss), k_sues, sc.wifi_csi_corr, sc.tx_power,
            self.config.dist_mode, sc.n_antennas, sue_dof,
        )


def select_wifi_users(d: int, per_user_gain: Sequence[float]) -> tuple:
    """Indices of the ``d`` largest gains, ties to the smaller index; returned sorted."""
    gains = list(per_user_gain)
    if not 0 <= d <= len(gains):
        raise ValueError(f"cannot select {d} of {len(gains)} users")
    order = sorted(range(len(gains)), key=lambda m: (-gains[m], m))
    return tuple(sorted(order[:d]))


def check_constraints(alloc: DofAllocation, reqs: RateRequirements, m_bar: float, n_antennas: int) -> dict:
    """Per-constraint pass/fail: SUE rate, Wi-Fi rate, SUE count, DoF budget."""
    k = alloc.k_served
    per_sue = alloc.r_small / k if k > 0 else 0.0
    per_wifi = alloc.r_wifi / m_bar if m_bar > 0 else math.inf
    return {
        "sue_rate": bool(per_sue >= reqs.min_sue_rate),
        "wifi_rate": bool(per_wifi >= reqs.min_wifi_rate),
        "sue_count": bool(2 <= k <= alloc.sue_dof),
        "dof_budget": bool(alloc.sue_dof + len(alloc.selected_wifi) == n_antennas - 1),
    }


def evaluate_allocation(
    d: int,
    scenario: Scenario,
    reqs: Optional[RateRequirements] = None,
    weights: Optional[Weights] = None,
) -> DofAllocation:
    """Throughput pair and feasibility when ``d`` Wi-Fi users are nulled."""
    cfg = scenario.config
    reqs = reqs or cfg.reqs
    n_t = scenario.n_antennas
    if not 0 <= d <= n_t - 3:
        raise ValueError(f"d must lie in [0, {n_t - 3}]")
    if d > cfg.n_wifi:
        raise ValueError(f"only {cfg.n_wifi} Wi-Fi users to null")
    n = n_t - d - 1
    k, r_s = optimal_sue_count(n, cfg.small_cell)
    users = scenario.interference(k, n)
    threshold = cfg.access_threshold
    selected = select_wifi_users(d, users.gains(threshold))
    profile = expected_active_users(selected, users, threshold)
    m_bar = profile.expected_active
    clamped = m_bar < 1.0
    r_w = wifi_throughput(max(m_bar, 1.0), cfg.mac).throughput_bps
    alloc = DofAllocation(d, n, k, selected, r_s, r_w, m_bar, clamped=clamped)
    alloc.constraints = check_constraints(alloc, reqs, m_bar, n_t)
    alloc.feasible = all(alloc.constraints.values())
    if weights is not None:
        alloc.objective = min(weights.e_s * r_s, weights.e_w * r_w)
    return alloc


def _rank_key(alloc: DofAllocation, weights: Weights):
    gap = abs(weights.e_s * alloc.r_small - weights.e_w * alloc.r_wifi)
    # best objective; equal objectives resolved by the smaller weighted gap
    return (alloc.feasible, alloc.objective, -gap, -alloc.wifi_dof)


def allocate_dof(
    scenario: Scenario,
    weights: Optional[Weights] = None,
    reqs: Optional[RateRequirements] = None,
) -> DofAllocation:
    """Bisection over the number of nulled Wi-Fi users.

    If the small cell's weighted throughput exceeds Wi-Fi's at the midpoint,
    Wi-Fi gets more DoF (the lower bound moves up), otherwise fewer. Once
    the bracket has collapsed its unvisited end is evaluated too, and the
    best visited allocation is returned.
    """
    cfg = scenario.config
    weights = weights or cfg.weights
    reqs = reqs or cfg.reqs
    n_t = scenario.n_antennas
    if n_t < 4:
        raise ValueError("need N_T >= 4")
    lo, hi = 1, min(n_t - 3, cfg.n_wifi)
    if hi < lo:
        lo = hi = 0
    visited: dict[int, DofAllocation] = {}

    def visit(d):
        if d not in visited:
            visited[d] = evaluate_allocation(d, scenario, reqs, weights)
            log.debug("d=%d R_s=%.4g R_w=%.4g", d, visited[d].r_small, visited[d].r_wifi)
        return visited[d]

    while hi - lo > 1:
        mid = (lo + hi) // 2
        a = visit(mid)
        if weights.e_s * a.r_small > weights.e_w * a.r_wifi:
            lo = mid
        else:
            hi = mid
    visit(lo)
    visit(hi)

    best = max(visited.values(), key=lambda a: _rank_key(a, weights))
    best.iterations = len(visited)
    best.visited = tuple(visited)
    if not best.feasible:
        failed = [name for name, ok in best.constraints.items() if not ok]
        best.diagnostic = "no feasible allocation among visited points; violated: " + ", ".join(failed)
    return best
