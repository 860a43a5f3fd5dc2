"""Inter-RAT interference at Wi-Fi users and the resulting channel-access statistics.

The interference a Wi-Fi user sees from the SBS is
``coefficient * X`` with ``X = sum_k |phi^H v_k|^2`` and

* ``coefficient = (P_T/K) A_m (1 - eps)`` for users nulled by the precoders
  (only the CSI error leaks through),
* ``coefficient = (P_T/K) A_n`` for users that are not nulled.

Three distribution models for X are available:

``"paper"``   Gamma(shape=2K, scale=K).
``"erlang"``  Gamma(K, 1): K independent unit-mean exponentials.
``"matched"`` Gamma with the exact first two moments of X. Each term is a
              unit-mean exponential, but ZF precoders are not mutually
              orthogonal, so ``Var X = E||V^H V||_F^2 >= K``.

Which one is used by default is settled by the Monte Carlo comparison in
:mod:`lteu_coexist.montecarlo`; see the README for the outcome.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy import special

from .channel import batch_precoders
from .rng import complex_normal, stream

DIST_MODES = ("paper", "erlang", "matched")


def gamma_cdf(x, shape: float, scale: float):
    """P(X <= x) for X ~ Gamma(shape, scale) (regularized lower incomplete gamma)."""
    if not shape > 0 or not scale > 0:
        raise ValueError("shape and scale must be positive")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("x must be non-negative")
    out = special.gammainc(shape, x / scale)
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=256)
def precoder_gram_moment(n_antennas: int, sue_dof: int, k_sues: int, n_draws: int = 4000, seed: int = 0) -> float:
    """Monte Carlo estimate of ``E ||V^H V||_F^2`` for ZF precoders.

    ``V`` holds the K unit precoders of a scenario with ``sue_dof`` spatial
    DoF for the small cell, i.e. ``n_antennas - sue_dof - 1`` nulled Wi-Fi
    users plus the AP. Estimated directions are isotropic whatever the
    quantization error, so the moment depends on the geometry only.
    """
    if k_sues == 1:
        return 1.0
    if not 1 <= k_sues <= sue_dof <= n_antennas - 1:
        raise ValueError("need 1 <= K <= N <= N_T - 1")
    rng = stream(seed, "gram-moment", n_antennas, sue_dof, k_sues)
    n_fixed = n_antennas - sue_dof
    h = complex_normal(rng, (n_draws, k_sues, n_antennas))
    h /= np.linalg.norm(h, axis=-1, keepdims=True)
    fixed = complex_normal(rng, (n_draws, n_fixed, n_antennas))
    v = batch_precoders(h, fixed)
    gram = v.conj() @ np.swapaxes(v, 1, 2)
    return float(np.mean(np.sum(np.abs(gram) ** 2, axis=(1, 2))))


def sum_distribution(k_sues: int, dist_mode: str, n_antennas: int = 8, sue_dof: Optional[int] = None) -> tuple[float, float]:
    """(shape, scale) of ``sum_k |phi^H v_k|^2`` under the chosen model."""
    if k_sues < 1:
        raise ValueError("k_sues must be >= 1")
    if dist_mode == "paper":
        return 2.0 * k_sues, float(k_sues)
    if dist_mode == "erlang":
        return float(k_sues), 1.0
    if dist_mode == "matched":
        m2 = precoder_gram_moment(n_antennas, sue_dof if sue_dof is not None else k_sues, k_sues)
        return k_sues ** 2 / m2, m2 / k_sues
    raise ValueError(f"unknown dist_mode {dist_mode!r}")


@dataclass(frozen=True)
class InterferenceModel:
    shape: float
    scale: float
    coefficient: float

    def __post_init__(self):
        if not self.shape > 0 or not self.scale > 0:
            raise ValueError("shape and scale must be positive")
        if self.coefficient < 0:
            raise ValueError("coefficient must be non-negative")

    @property
    def mean(self) -> float:
        return self.coefficient * self.shape * self.scale

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        return self.coefficient * rng.gamma(self.shape, self.scale, size)


def interference_model(
    selected: bool,
    k_sues: int,
    path_loss: float,
    epsilon: float,
    tx_power: float,
    dist_mode: str = "matched",
    n_antennas: int = 8,
    sue_dof: Optional[int] = None,
) -> InterferenceModel:
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    coefficient = tx_power / k_sues * path_loss
    if selected:
        coefficient *= 1.0 - epsilon
    shape, scale = sum_distribution(k_sues, dist_mode, n_antennas, sue_dof)
    return InterferenceModel(shape, scale, coefficient)


def access_probability(model: InterferenceModel, threshold: float) -> float:
    """P(interference <= threshold)."""
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    if model.coefficient == 0.0:
        return 1.0
    if np.isinf(threshold):
        return 1.0
    return gamma_cdf(threshold / model.coefficient, model.shape, model.scale)


@dataclass(frozen=True)
class AccessProfile:
    per_user_access: tuple
    expected_active: float


@dataclass(frozen=True)
class WifiInterference:
    """Per-user interference parameters for one small-cell configuration."""

    path_loss: tuple
    k_sues: int
    epsilon: float
    tx_power: float
    dist_mode: str = "matched"
    n_antennas: int = 8
    sue_dof: Optional[int] = None

    @property
    def n_users(self) -> int:
        return len(self.path_loss)

    def model(self, m: int, selected: bool) -> InterferenceModel:
        return interference_model(
            selected, self.k_sues, self.path_loss[m], self.epsilon, self.tx_power,
            self.dist_mode, self.n_antennas, self.sue_dof,
        )

    def access(self, m: int, selected: bool, threshold: float) -> float:
        return access_probability(self.model(m, selected), threshold)

    def gains(self, threshold: float) -> np.ndarray:
        """Increase of each user's access probability when it is nulled."""
        return np.array([
            self.access(m, True, threshold) - self.access(m, False, threshold)
            for m in range(self.n_users)
        ])


def expected_active_users(selected_set: Sequence[int], users: WifiInterference, threshold: float) -> AccessProfile:
    """Per-user access probabilities and their sum (the mean number of contenders)."""
    chosen = set(selected_set)
    if not chosen <= set(range(users.n_users)):
        raise ValueError("selected users must be valid indices")
    probs = tuple(users.access(m, m in chosen, threshold) for m in range(users.n_users))
    return AccessProfile(probs, float(sum(probs)))
