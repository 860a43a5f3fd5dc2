"""Saturated 802.11 DCF: Bianchi fixed point, throughput, and a slot-level simulator.

All analytic functions accept a real-valued number of contenders ``m >= 1``
(the mean number of active Wi-Fi users is generally not an integer).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import WifiMacConfig
from .rng import stream

FIXED_POINT_TOL = 1e-12
MAX_BISECTION_ITER = 200


class ConvergenceError(ArithmeticError):
    pass


@dataclass(frozen=True)
class DcfSolution:
    tau: float
    p_collision: float
    p_busy: float
    p_success: float
    throughput_bps: float
    m_users: float


def tau_from_collision(p: float, mac: WifiMacConfig) -> float:
    """Per-slot attempt probability given the conditional collision probability."""
    w, stages = mac.min_window, mac.max_stage
    if abs(1.0 - 2.0 * p) < 1e-9:
        # removable singularity at p = 1/2: with u = 1 - 2p, 1 - (2p)^L ~ L u,
        # so tau -> 2 / (W + 1 + W L / 2)
        return 2.0 / (w + 1.0 + 0.5 * w * stages)
    num = 2.0 * (1.0 - 2.0 * p)
    den = (1.0 - 2.0 * p) * (w + 1) + p * w * (1.0 - (2.0 * p) ** stages)
    return num / den


def collision_from_tau(tau: float, m_users: float) -> float:
    return 1.0 - (1.0 - tau) ** (m_users - 1.0)


def fixed_point_residual(tau: float, p: float, m_users: float, mac: WifiMacConfig) -> float:
    """max(|tau - T(p)|, |p - P(tau)|); zero at the exact fixed point."""
    return max(abs(tau - tau_from_collision(p, mac)), abs(p - collision_from_tau(tau, m_users)))


def solve_tau(m_users: float, mac: WifiMacConfig) -> tuple[float, float]:
    """Solve the coupled (tau, p_F) equations by bisection on tau.

    ``g(tau) = tau - T(P(tau))`` is increasing in tau (P is increasing, T is
    decreasing), negative near 0 and positive at 1, so it has one root.
    """
    if m_users < 1:
        raise ValueError("m_users must be >= 1")
    if m_users == 1:
        return tau_from_collision(0.0, mac), 0.0

    def g(t):
        return t - tau_from_collision(collision_from_tau(t, m_users), mac)

    lo, hi = 0.0, 1.0
    for _ in range(MAX_BISECTION_ITER):
        tau = 0.5 * (lo + hi)
        if tau in (lo, hi):
            break
        if g(tau) > 0:
            hi = tau
        else:
            lo = tau
    tau = lo if abs(g(lo)) <= abs(g(hi)) else hi
    p = collision_from_tau(tau, m_users)
    if fixed_point_residual(tau, p, m_users, mac) >= FIXED_POINT_TOL:
        raise ConvergenceError(f"fixed point not reached for M = {m_users}")
    return tau, p


def success_probability(tau: float, m_users: float) -> float:
    """P(exactly one transmits | at least one transmits)."""
    if not 0.0 < tau < 1.0:
        raise ValueError("tau must lie in (0, 1)")
    if m_users < 1:
        raise ValueError("m_users must be >= 1")
    busy = -math.expm1(m_users * math.log1p(-tau))
    return m_users * tau * (1.0 - tau) ** (m_users - 1.0) / busy


def busy_probability(tau: float, m_users: float) -> float:
    """Probability that at least one of ``m_users`` transmits in a slot."""
    if tau <= 0.0:
        return 0.0
    return -math.expm1(m_users * math.log1p(-tau))


def ack_time(mac: WifiMacConfig) -> float:
    if mac.ack_time is not None:
        return mac.ack_time
    return (mac.phy_header_bits + mac.ack_bits) / mac.bit_rate


def occupancy_durations(mac: WifiMacConfig) -> tuple[float, float]:
    """Basic-access busy times: (success, collision) in seconds.

    Q_s = H + payload + SIFS + ACK + DIFS,  Q_c = H + payload + DIFS,
    with H the MAC+PHY header time at the channel bit rate.
    """
    header = (mac.mac_header_bits + mac.phy_header_bits) / mac.bit_rate
    payload = mac.payload_bits / mac.bit_rate
    q_s = header + payload + mac.sifs + ack_time(mac) + mac.difs
    q_c = header + payload + mac.difs
    return q_s, q_c


def wifi_throughput(m_users: float, mac: WifiMacConfig) -> DcfSolution:
    """Saturation throughput in bits/s for ``m_users`` contending stations."""
    tau, p = solve_tau(m_users, mac)
    p_tr = busy_probability(tau, m_users)
    p_s = success_probability(tau, m_users)
    q_s, q_c = occupancy_durations(mac)
    slot = (1.0 - p_tr) * mac.slot_time + p_tr * p_s * q_s + p_tr * (1.0 - p_s) * q_c
    rate = p_tr * p_s * mac.payload_bits / slot
    return DcfSolution(tau, p, p_tr, p_s, rate, float(m_users))


@dataclass(frozen=True)
class SlotSimResult:
    throughput_bps: float
    collision_rate: float  # collided attempts / attempts
    busy_fraction: float  # busy virtual slots / all virtual slots
    attempt_rate: float  # attempts per station per virtual slot (tau estimate)
    n_slots: int
    throughput_ci: float  # 95% half-width from batch means


def slot_level_simulate(
    m_users: int,
    mac: WifiMacConfig,
    n_slots: int = 1_000_000,
    seed: int = 0,
    n_batches: int = 20,
) -> SlotSimResult:
    """Simulate binary exponential backoff over ``n_slots`` virtual slots.

    A virtual slot is either idle (``slot_time``) or busy (one success or one
    collision). Every station whose counter is zero transmits; the others
    decrement by one per virtual slot. Transmitters redraw uniformly from
    ``[0, 2^j W - 1]`` where the stage j resets to 0 after a success and
    increments (capped at L) after a collision. Runs of idle slots are
    skipped in one step.
    """
    if m_users < 1 or int(m_users) != m_users:
        raise ValueError("m_users must be a positive integer")
    m_users = int(m_users)
    rng = stream(seed, "slot-sim", m_users)
    w, cap = mac.min_window, mac.max_stage
    q_s, q_c = occupancy_durations(mac)

    stage = np.zeros(m_users, dtype=np.int64)
    counter = rng.integers(0, w, size=m_users)

    batch_len = max(n_slots // n_batches, 1)
    batch_bits = np.zeros(n_batches)
    batch_time = np.zeros(n_batches)

    slots = 0
    busy = successes = collisions_slots = attempts = collided = 0
    idle_total = 0
    while slots < n_slots:
        gap = int(counter.min())
        if gap > 0:
            gap = min(gap, n_slots - slots)
            counter -= gap
            # attribute idle time to batches slot by slot range
            _spread(batch_time, slots, gap, mac.slot_time, batch_len)
            slots += gap
            idle_total += gap
            if slots >= n_slots:
                break
        tx = np.flatnonzero(counter == 0)
        n_tx = tx.size
        attempts += n_tx
        bidx = min(slots // batch_len, n_batches - 1)
        busy += 1
        if n_tx == 1:
            successes += 1
            stage[tx] = 0
            batch_bits[bidx] += mac.payload_bits
            batch_time[bidx] += q_s
        else:
            collisions_slots += 1
            collided += n_tx
            stage[tx] = np.minimum(stage[tx] + 1, cap)
            batch_time[bidx] += q_c
        # a busy virtual slot counts as one backoff step for the others
        counter -= 1
        counter[tx] = rng.integers(0, w * (2 ** stage[tx]))
        slots += 1

    total_time = idle_total * mac.slot_time + successes * q_s + collisions_slots * q_c
    thr = successes * mac.payload_bits / total_time if total_time > 0 else 0.0
    with np.errstate(invalid="ignore", divide="ignore"):
        per_batch = batch_bits / batch_time
    per_batch = per_batch[np.isfinite(per_batch)]
    ci = 1.96 * per_batch.std(ddof=1) / np.sqrt(per_batch.size) if per_batch.size > 1 else float("nan")
    return SlotSimResult(
        throughput_bps=thr,
        collision_rate=collided / attempts if attempts else 0.0,
        busy_fraction=busy / slots,
        attempt_rate=attempts / (slots * m_users),
        n_slots=slots,
        throughput_ci=float(ci),
    )


def _spread(batch_time: np.ndarray, start: int, count: int, dt: float, batch_len: int) -> None:
    n_batches = batch_time.size
    pos = start
    end = start + count
    while pos < end:
        b = min(pos // batch_len, n_batches - 1)
        stop = end if b == n_batches - 1 else min(end, (b + 1) * batch_len)
        batch_time[b] += (stop - pos) * dt
        pos = stop
