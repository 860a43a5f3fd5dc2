"""Monte Carlo oracles for the closed forms.

Samples are produced in fixed-size chunks, each with its own sub-stream
``(seed, label, chunk)``, and concatenated in chunk order, so results depend
only on the seed and the sample count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import optimize

from .analytics import SinrModel, sinr_cdf
from .channel import batch_precoders, batch_quantize
from .config import SmallCellConfig
from .rng import complex_normal, stream

CHUNK = 4096


@dataclass
class SampleBatch:
    values: np.ndarray
    seed: int
    label: str

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1 or self.values.size < 1:
            raise ValueError("a sample batch needs at least one value")

    @property
    def n(self) -> int:
        return int(self.values.size)


def _chunks(n_samples: int):
    done = 0
    idx = 0
    while done < n_samples:
        size = min(CHUNK, n_samples - done)
        yield idx, size
        done += size
        idx += 1


def _default_nulled(n_antennas: int, k_sues: int, n_wifi_nulled: Optional[int]) -> int:
    nulled = n_antennas - 1 - k_sues if n_wifi_nulled is None else n_wifi_nulled
    if nulled < 0 or k_sues > n_antennas - nulled - 1:
        raise ValueError(f"K={k_sues} with {nulled} nulled Wi-Fi users exceeds the {n_antennas - 1} spatial DoF")
    return nulled


def simulate_sinr_samples(
    config: SmallCellConfig,
    k_sues: int,
    n_wifi_nulled: Optional[int] = None,
    n_samples: int = 100_000,
    seed: int = 0,
    quant_error: Optional[float] = None,
) -> SampleBatch:
    """SINR of served user 0 over independent ZFBF scenarios.

    Each sample draws SUE, Wi-Fi and AP channels, quantizes the SUE channels
    with a fixed error ``b``, builds the precoders from the estimated
    directions and evaluates ``|h^H v|^2 / (K N0/P_T + b |h|^2 sum |c^H v_i|^2)``.

    ``n_wifi_nulled`` defaults to ``N_T - 1 - K`` so that every spatial DoF
    is spent (K = N), the setting in which the SINR CDF closed form applies.
    """
    if k_sues < 1:
        raise ValueError("k_sues must be >= 1")
    n_t = config.n_antennas
    nulled = _default_nulled(n_t, k_sues, n_wifi_nulled)
    b = config.b if quant_error is None else quant_error
    noise = k_sues / config.tx_power * config.noise_power
    out = np.empty(n_samples)
    pos = 0
    for idx, size in _chunks(n_samples):
        rng = stream(seed, "sinr-samples", idx)
        h = complex_normal(rng, (size, k_sues, n_t))
        fixed = complex_normal(rng, (size, nulled + 1, n_t))  # Wi-Fi estimates + AP
        h_hat, c, norm = batch_quantize(h, b, rng)
        v = batch_precoders(h_hat, fixed)
        signal = np.abs(np.einsum("sn,sn->s", h[:, 0].conj(), v[:, 0])) ** 2
        if k_sues > 1:
            cg = np.abs(np.einsum("sn,skn->sk", c[:, 0].conj(), v[:, 1:])) ** 2
            interf = b * norm[:, 0] ** 2 * cg.sum(axis=1)
        else:
            interf = 0.0
        out[pos:pos + size] = signal / (noise + interf)
        pos += size
    return SampleBatch(out, seed, f"sinr K={k_sues} b={b:.6g} nulled={nulled}")


def simulate_interference_samples(
    config: SmallCellConfig,
    k_sues: int,
    epsilon: Optional[float] = None,
    n_samples: int = 100_000,
    seed: int = 0,
    n_wifi_nulled: int = 1,
) -> SampleBatch:
    """Normalized residual interference ``sum_k |f^H v_k|^2 / (1 - eps)`` at a nulled Wi-Fi user.

    The precoders null the user's estimated channel, so the sum reduces to
    ``sum_k |phi^H v_k|^2`` with ``phi`` the CSI error. With
    ``n_wifi_nulled = 0`` the measured user is not nulled and the plain
    ``sum_k |f^H v_k|^2`` is returned.
    """
    n_t = config.n_antennas
    eps = config.wifi_csi_corr if epsilon is None else epsilon
    if not 0.0 <= eps < 1.0 and n_wifi_nulled > 0:
        raise ValueError("epsilon must be < 1 for a residual to exist")
    if k_sues < 1 or k_sues > n_t - 1 - n_wifi_nulled:
        raise ValueError("K exceeds the available spatial DoF")
    out = np.empty(n_samples)
    pos = 0
    for idx, size in _chunks(n_samples):
        rng = stream(seed, "interference-samples", idx)
        h = complex_normal(rng, (size, k_sues, n_t))
        h /= np.linalg.norm(h, axis=-1, keepdims=True)
        f_est = complex_normal(rng, (size, max(n_wifi_nulled, 1), n_t))
        ap = complex_normal(rng, (size, 1, n_t))
        fixed = np.concatenate([f_est[:, :n_wifi_nulled], ap], axis=1)
        v = batch_precoders(h, fixed)
        phi = complex_normal(rng, (size, n_t))
        if n_wifi_nulled > 0:
            f = np.sqrt(eps) * f_est[:, 0] + np.sqrt(1.0 - eps) * phi
            scale = 1.0 - eps
        else:
            f = f_est[:, 0]
            scale = 1.0
        proj = np.abs(np.einsum("sn,skn->sk", f.conj(), v)) ** 2
        out[pos:pos + size] = proj.sum(axis=1) / scale
        pos += size
    return SampleBatch(out, seed, f"interference K={k_sues} nulled={n_wifi_nulled}")


def ks_distance(samples, cdf: Callable) -> float:
    """Sup-norm distance between the empirical CDF of ``samples`` and ``cdf``."""
    values = samples.values if isinstance(samples, SampleBatch) else np.asarray(samples, dtype=float)
    if values.size == 0:
        raise ValueError("empty sample")
    x = np.sort(values)
    n = x.size
    f = np.asarray(cdf(x), dtype=float)
    upper = np.arange(1, n + 1) / n - f
    lower = f - np.arange(0, n) / n
    return float(max(upper.max(), lower.max()))


def empirical_throughput(samples: SampleBatch, k_sues: int, bandwidth_hz: float) -> float:
    """``K * B * mean(log2(1 + SINR))`` in bits/s."""
    return k_sues * bandwidth_hz * float(np.mean(np.log1p(samples.values))) / math.log(2.0)


def fit_sigma_scale(samples: SampleBatch, config: SmallCellConfig, k_sues: int, bounds=(0.05, 5.0)) -> tuple[float, float]:
    """Best ``c`` in ``sigma = c * b`` by KS distance; returns (c, ks)."""
    b = config.b

    def ks(c):
        model = SinrModel(k_sues, c * b, config.tx_power, config.noise_power)
        return ks_distance(samples, lambda x: sinr_cdf(x, model))

    res = optimize.minimize_scalar(ks, bounds=bounds, method="bounded", options={"xatol": 1e-4})
    return float(res.x), float(res.fun)
