"""Channel realizations, limited-feedback CSI and zero-forcing precoders.

Single-instance functions (``quantize_channel``, ``zf_precoder``, ...) follow
the per-user formulation directly. ``batch_precoders`` computes the same
precoders for a stack of scenarios at once and is what the Monte Carlo code
uses.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .config import GeometryConfig, SmallCellConfig
from .rng import complex_normal, stream

DEGENERATE_TOL = 1e-12


class DegenerateChannelError(ArithmeticError):
    """The channel direction lies (numerically) inside the space to be nulled."""


@dataclass
class ChannelSet:
    sue_channels: np.ndarray  # (K, N_T), row k is h_k
    wifi_channels: np.ndarray  # (M, N_T), true f_m
    wifi_channels_est: np.ndarray  # (M, N_T), f_{m,0}
    ap_channel: np.ndarray  # (N_T,)
    path_loss: np.ndarray  # (M,)
    wifi_distances: np.ndarray  # (M,) metres

    @property
    def n_antennas(self) -> int:
        return self.ap_channel.shape[0]


@dataclass
class QuantizedChannel:
    direction_est: np.ndarray  # unit h_hat
    error_dir: np.ndarray  # unit c, orthogonal to h_hat
    norm: float
    quant_error: float

    def reconstruct(self) -> np.ndarray:
        """Unit direction ``sqrt(1-b) h_hat + sqrt(b) c``."""
        b = self.quant_error
        return np.sqrt(1.0 - b) * self.direction_est + np.sqrt(b) * self.error_dir


@dataclass
class Precoders:
    vectors: np.ndarray  # (K, N_T), row k is v_k
    served_sues: tuple
    nulled_wifi: tuple


def _check_vector(h) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    if h.ndim != 1:
        raise ValueError("channel must be a 1-D vector")
    if not np.linalg.norm(h) > 0:
        raise ValueError("zero channel vector")
    return h


def _orthogonal_unit(rng, direction: np.ndarray) -> np.ndarray:
    """Isotropic unit vector in the orthogonal complement of a unit ``direction``."""
    while True:
        u = complex_normal(rng, direction.shape)
        u -= direction * np.vdot(direction, u)
        n = np.linalg.norm(u)
        if n > 1e-8:
            return u / n


def generate_channels(
    config: SmallCellConfig,
    n_sues: int,
    n_wifi: int,
    geometry: Optional[GeometryConfig] = None,
    seed: int = 0,
) -> ChannelSet:
    """Draw one scenario: CN(0,1) fading for every link, Wi-Fi users uniform in the disk.

    Estimated Wi-Fi channels are the fading draws; the true channels add the
    CSI error of ``apply_wifi_csi_error`` with ``config.wifi_csi_corr``.
    """
    if n_sues < 1:
        raise ValueError("n_sues must be >= 1")
    if n_wifi < 0:
        raise ValueError("n_wifi must be >= 0")
    geometry = geometry or GeometryConfig()
    n_t = config.n_antennas
    rng = stream(seed, "channels")
    h = complex_normal(rng, (n_sues, n_t))
    f_est = complex_normal(rng, (n_wifi, n_t))
    ap = complex_normal(rng, (n_t,))
    # uniform in the disk: r = R sqrt(U)
    dist = geometry.cell_radius * np.sqrt(rng.uniform(size=n_wifi))
    path_loss = np.array([geometry.path_loss(d) for d in dist], dtype=float)
    f_true = np.empty_like(f_est)
    for m in range(n_wifi):
        f_true[m] = apply_wifi_csi_error(f_est[m], config.wifi_csi_corr, seed=seed, index=m)
    return ChannelSet(h, f_true, f_est, ap, path_loss, dist)


def quantize_channel(h, b: float, seed: int = 0, rng: Optional[np.random.Generator] = None) -> QuantizedChannel:
    """Fixed-error decomposition of ``h/|h|`` into an estimate and an error direction.

    With ``u`` isotropic and orthogonal to the true direction ``t``, the
    estimate is ``sqrt(1-b) t - sqrt(b) u`` and the error direction is
    ``sqrt(b) t + sqrt(1-b) u``. Both are unit-norm, mutually orthogonal and
    recombine to ``t`` exactly.
    """
    h = _check_vector(h)
    if not 0.0 <= b <= 1.0:
        raise ValueError("quantization error must lie in [0, 1]")
    norm = float(np.linalg.norm(h))
    t = h / norm
    rng = rng if rng is not None else stream(seed, "quantize")
    u = _orthogonal_unit(rng, t)
    sb, sc = np.sqrt(b), np.sqrt(1.0 - b)
    return QuantizedChannel(sc * t - sb * u, sb * t + sc * u, norm, float(b))


def rvq_codebook(n_antennas: int, feedback_bits: int, seed: int = 0) -> np.ndarray:
    """``2^B`` isotropic unit codewords as rows."""
    if not 1 <= feedback_bits <= 16:
        raise ValueError("feedback_bits must be in 1..16")
    rng = stream(seed, "rvq-codebook", n_antennas, feedback_bits)
    w = complex_normal(rng, (2 ** feedback_bits, n_antennas))
    return w / np.linalg.norm(w, axis=1, keepdims=True)


def rvq_quantize(h, feedback_bits: int, seed: int = 0, codebook: Optional[np.ndarray] = None) -> QuantizedChannel:
    """Random vector quantization: feed back the codeword closest in angle to ``h``.

    The realized error is ``b = 1 - |<t, w>|^2``; the error direction is the
    normalized component of ``t`` orthogonal to the chosen codeword.
    """
    h = _check_vector(h)
    if codebook is None:
        codebook = rvq_codebook(h.shape[0], feedback_bits, seed)
    norm = float(np.linalg.norm(h))
    t = h / norm
    corr = codebook.conj() @ t
    best = int(np.argmax(np.abs(corr)))
    w = codebook[best]
    # align the codeword phase with t so that sqrt(1-b) multiplies a real projection
    inner = np.vdot(w, t)
    b = float(min(max(1.0 - abs(inner) ** 2, 0.0), 1.0))
    w_hat = w * (inner / abs(inner)) if abs(inner) > 0 else w
    resid = t - np.sqrt(1.0 - b) * w_hat
    rn = np.linalg.norm(resid)
    if rn > 1e-14:
        c = resid / rn
    else:
        c = _orthogonal_unit(stream(seed, "rvq-null"), w_hat)
    return QuantizedChannel(w_hat, c, norm, b)


def apply_wifi_csi_error(f_est, epsilon: float, seed: int = 0, index: int = 0) -> np.ndarray:
    """True Wi-Fi channel ``sqrt(eps) f_est + sqrt(1-eps) phi`` with phi ~ CN(0, I)."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    f_est = np.asarray(f_est, dtype=complex)
    if epsilon == 1.0:
        return f_est.copy()
    phi = complex_normal(stream(seed, "wifi-csi-error", index), f_est.shape)
    return np.sqrt(epsilon) * f_est + np.sqrt(1.0 - epsilon) * phi


def complementary_matrix(
    k: int,
    served: Sequence[int],
    nulled_wifi: Sequence[int],
    sue_est: np.ndarray,
    wifi_est: np.ndarray,
    ap_channel: np.ndarray,
) -> np.ndarray:
    """Columns ``[f_1.., D, h_1..h_{k-1}, h_{k+1}..h_K]`` for served user ``k``.

    ``sue_est`` rows are estimated SUE directions, ``wifi_est`` rows estimated
    Wi-Fi channels; the AP channel is known exactly.
    """
    sue_est = np.atleast_2d(np.asarray(sue_est, dtype=complex))
    n_t = ap_channel.shape[0]
    if k not in served:
        raise ValueError(f"user {k} is not in the served set")
    cols = [np.asarray(wifi_est[m], dtype=complex) for m in nulled_wifi]
    cols.append(np.asarray(ap_channel, dtype=complex))
    cols.extend(sue_est[i] for i in served if i != k)
    if any(c.shape != (n_t,) for c in cols):
        raise ValueError("channel vectors must all have length N_T")
    if len(cols) > n_t - 1:
        raise ValueError(f"{len(cols)} constraints leave no freedom with N_T = {n_t}")
    return np.stack(cols, axis=1)


def zf_precoder(h_hat, comp: Optional[np.ndarray]) -> np.ndarray:
    """Unit-norm projection of ``h_hat`` onto the orthogonal complement of ``comp``'s columns.

    The column space basis comes from the SVD of ``comp``.
    """
    h_hat = np.asarray(h_hat, dtype=complex)
    if comp is None or comp.size == 0:
        v = h_hat
    else:
        if comp.shape[0] != h_hat.shape[0]:
            raise ValueError("dimension mismatch between h_hat and comp")
        if comp.shape[1] >= comp.shape[0]:
            raise ValueError("comp must have fewer than N_T columns")
        u, s, _ = np.linalg.svd(comp, full_matrices=False)
        rank = int(np.sum(s > s[0] * 1e-12)) if s.size and s[0] > 0 else 0
        basis = u[:, :rank]
        v = h_hat - basis @ (basis.conj().T @ h_hat)
    n = np.linalg.norm(v)
    if n < DEGENERATE_TOL:
        raise DegenerateChannelError("channel lies in the nulled subspace")
    return v / n


def build_precoders(
    quantized: Sequence[QuantizedChannel],
    channels: ChannelSet,
    nulled_wifi: Sequence[int] = (),
    served: Optional[Sequence[int]] = None,
) -> Precoders:
    served = tuple(range(len(quantized))) if served is None else tuple(served)
    sue_est = np.stack([q.direction_est for q in quantized])
    vectors = np.empty((len(served), channels.n_antennas), dtype=complex)
    for row, k in enumerate(served):
        comp = complementary_matrix(k, served, nulled_wifi, sue_est, channels.wifi_channels_est, channels.ap_channel)
        vectors[row] = zf_precoder(sue_est[k], comp)
    return Precoders(vectors, served, tuple(nulled_wifi))


def sue_sinr(
    channels: ChannelSet,
    quantized: Sequence[QuantizedChannel],
    precoders: Precoders,
    config: SmallCellConfig,
    form: str = "model",
) -> np.ndarray:
    """Per-served-user SINR.

    ``form="model"`` uses the decomposed interference ``b |h|^2 sum |c^H v_i|^2``;
    ``form="direct"`` uses ``sum |h^H v_i|^2`` with the true channel. The two
    coincide whenever the precoders null the estimated directions.
    """
    served = precoders.served_sues
    k_count = len(served)
    noise = k_count / config.tx_power * config.noise_power
    v = precoders.vectors
    out = np.empty(k_count)
    for row, k in enumerate(served):
        h = channels.sue_channels[k]
        gains = np.abs(h.conj() @ v.T) ** 2
        signal = gains[row]
        if form == "direct":
            interf = gains.sum() - signal
        elif form == "model":
            q = quantized[k]
            cg = np.abs(q.error_dir.conj() @ v.T) ** 2
            interf = q.quant_error * q.norm ** 2 * (cg.sum() - cg[row])
        else:
            raise ValueError(f"unknown form {form!r}")
        out[row] = signal / (noise + interf)
    return out


# -- batched helpers -------------------------------------------------------

def batch_quantize(h: np.ndarray, b: float, rng: np.random.Generator):
    """Vectorized ``quantize_channel`` over the leading axes of ``h`` (last axis N_T)."""
    norm = np.linalg.norm(h, axis=-1, keepdims=True)
    t = h / norm
    u = complex_normal(rng, h.shape)
    u -= t * np.sum(t.conj() * u, axis=-1, keepdims=True)
    u /= np.linalg.norm(u, axis=-1, keepdims=True)
    sb, sc = np.sqrt(b), np.sqrt(1.0 - b)
    return sc * t - sb * u, sb * t + sc * u, norm[..., 0]


def batch_precoders(sue_est: np.ndarray, fixed: np.ndarray) -> np.ndarray:
    """ZF precoders for a stack of scenarios.

    sue_est : (S, K, N_T) estimated SUE directions.
    fixed : (S, C, N_T) directions nulled by every precoder (selected Wi-Fi
        estimates and the AP channel).
    Returns (S, K, N_T) unit precoders.
    """
    s_count, k_count, n_t = sue_est.shape
    out = np.empty_like(sue_est)
    for k in range(k_count):
        others = np.delete(sue_est, k, axis=1)
        cols = np.concatenate([fixed, others], axis=1)  # (S, c, N_T)
        if cols.shape[1] >= n_t:
            raise ValueError("too many nulling constraints for N_T antennas")
        if cols.shape[1] == 0:
            v = sue_est[:, k, :]
        else:
            q, _ = np.linalg.qr(np.swapaxes(cols, 1, 2))  # (S, N_T, c)
            h = sue_est[:, k, :, None]
            v = (h - q @ (np.swapaxes(q.conj(), 1, 2) @ h))[..., 0]
        n = np.linalg.norm(v, axis=-1, keepdims=True)
        if np.any(n < DEGENERATE_TOL):
            raise DegenerateChannelError("degenerate projection in batch")
        out[:, k, :] = v / n
    return out
