"""Scenario configuration: small cell, Wi-Fi MAC, geometry, weights and requirements.

Defaults reproduce the simulation parameters of the reference setup (8 SBS
antennas, 12000-bit Wi-Fi payload, W = 16, L = 6, 20 MHz, 23 mW, -174 dBm/Hz,
10 Mbps rate requirements).

Config files are flat ``key: value`` YAML documents; nested sections are
flattened with dotted keys (``mac.min_window: 16``) so a diff shows one
changed parameter per line.
"""

from __future__ import annotations

import dataclasses
import hashlib
import math
from dataclasses import dataclass, field
from typing import Any, Optional

import yaml


class ConfigError(ValueError):
    """Raised when a configuration violates its invariants."""


def dbm_per_hz_to_watts(dbm_per_hz: float, bandwidth_hz: float) -> float:
    return 10.0 ** (dbm_per_hz / 10.0) * 1e-3 * bandwidth_hz


@dataclass(frozen=True)
class SmallCellConfig:
    n_antennas: int = 8
    tx_power: float = 0.023
    noise_power: float = dbm_per_hz_to_watts(-174.0, 20e6)
    feedback_bits: int = 8
    # None -> derived from feedback_bits as 2^(-B/(N_T-1))
    quant_error: Optional[float] = None
    wifi_csi_corr: float = 0.999
    bandwidth_hz: float = 20e6

    def __post_init__(self):
        if self.n_antennas < 2:
            raise ConfigError("n_antennas must be >= 2")
        if not self.tx_power > 0 or not self.noise_power > 0:
            raise ConfigError("tx_power and noise_power must be positive")
        if self.feedback_bits < 0:
            raise ConfigError("feedback_bits must be non-negative")
        if self.quant_error is not None and not 0.0 <= self.quant_error <= 1.0:
            raise ConfigError("quant_error must lie in [0, 1]")
        if not 0.0 <= self.wifi_csi_corr <= 1.0:
            raise ConfigError("wifi_csi_corr must lie in [0, 1]")
        if not self.bandwidth_hz > 0:
            raise ConfigError("bandwidth_hz must be positive")

    @property
    def b(self) -> float:
        """Quantization error actually used (explicit value or the RVQ bound)."""
        if self.quant_error is not None:
            return self.quant_error
        return quant_error_bound(self.feedback_bits, self.n_antennas)

    @property
    def snr(self) -> float:
        return self.tx_power / self.noise_power


def quant_error_bound(feedback_bits: int, n_antennas: int) -> float:
    """RVQ quantization-error bound ``2^(-B/(N_T-1))``."""
    return 2.0 ** (-feedback_bits / (n_antennas - 1))


@dataclass(frozen=True)
class WifiMacConfig:
    min_window: int = 16
    max_stage: int = 6
    slot_time: float = 20e-6
    sifs: float = 16e-6
    difs: float = 34e-6
    payload_bits: float = 12000.0
    mac_header_bits: float = 192.0
    phy_header_bits: float = 224.0
    bit_rate: float = 300e6
    ack_bits: float = 112.0
    # None -> phy_header_bits/bit_rate + ack_bits/bit_rate
    ack_time: Optional[float] = None

    def __post_init__(self):
        if self.min_window < 2:
            raise ConfigError("min_window must be >= 2")
        if self.max_stage < 1:
            raise ConfigError("max_stage must be >= 1")
        for name in ("slot_time", "sifs", "difs", "bit_rate"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        for name in ("payload_bits", "mac_header_bits", "phy_header_bits", "ack_bits"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")
        if self.ack_time is not None and self.ack_time < 0:
            raise ConfigError("ack_time must be non-negative")


@dataclass(frozen=True)
class GeometryConfig:
    """Log-distance path loss ``A = (d/d0)^-alpha`` with users uniform in a disk."""

    cell_radius: float = 200.0
    pathloss_exponent: float = 3.5
    reference_distance: float = 1.0

    def __post_init__(self):
        if not self.cell_radius > 0:
            raise ConfigError("cell_radius must be positive")
        if not self.reference_distance > 0:
            raise ConfigError("reference_distance must be positive")
        if self.reference_distance >= self.cell_radius:
            raise ConfigError("reference_distance must be smaller than cell_radius")
        if self.pathloss_exponent < 0:
            raise ConfigError("pathloss_exponent must be non-negative")

    def path_loss(self, distance):
        d = max(distance, self.reference_distance)
        return (d / self.reference_distance) ** (-self.pathloss_exponent)


@dataclass(frozen=True)
class RateRequirements:
    min_sue_rate: float = 10e6
    min_wifi_rate: float = 10e6

    def __post_init__(self):
        if self.min_sue_rate < 0 or self.min_wifi_rate < 0:
            raise ConfigError("rate requirements must be non-negative")


@dataclass(frozen=True)
class Weights:
    e_s: float = 0.5
    e_w: float = 0.5

    def __post_init__(self):
        if self.e_s < 0 or self.e_w < 0:
            raise ConfigError("weights must be non-negative")
        if not math.isclose(self.e_s + self.e_w, 1.0, abs_tol=1e-9):
            raise ConfigError("weights must sum to 1")


TABLE3_WEIGHTS = [
    (0.1, 0.9), (0.15, 0.85), (0.2, 0.8), (0.25, 0.75), (0.3, 0.7),
    (0.35, 0.65), (0.4, 0.6), (0.45, 0.55), (0.5, 0.5),
]


@dataclass(frozen=True)
class ScenarioConfig:
    small_cell: SmallCellConfig = field(default_factory=SmallCellConfig)
    mac: WifiMacConfig = field(default_factory=WifiMacConfig)
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    reqs: RateRequirements = field(default_factory=RateRequirements)
    weights: Weights = field(default_factory=Weights)
    n_wifi: int = 5
    # access threshold in watts; None -> 10 dB above noise_power
    threshold: Optional[float] = None
    # interference distribution mode: "paper", "erlang" or "matched"
    dist_mode: str = "matched"
    seed: int = 2024
    samples: int = 100_000
    slots: int = 1_000_000

    def __post_init__(self):
        if self.n_wifi < 0:
            raise ConfigError("n_wifi must be non-negative")
        if self.threshold is not None and self.threshold < 0:
            raise ConfigError("threshold must be non-negative")
        if self.dist_mode not in ("paper", "erlang", "matched"):
            raise ConfigError(f"unknown dist_mode {self.dist_mode!r}")
        if self.samples < 1 or self.slots < 1:
            raise ConfigError("samples and slots must be positive")

    @property
    def access_threshold(self) -> float:
        if self.threshold is not None:
            return self.threshold
        return 10.0 * self.small_cell.noise_power

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    # -- flat serialization -------------------------------------------------

    def to_flat(self) -> dict[str, Any]:
        flat: dict[str, Any] = {}
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if dataclasses.is_dataclass(value):
                for sub in dataclasses.fields(value):
                    flat[f"{f.name}.{sub.name}"] = getattr(value, sub.name)
            else:
                flat[f.name] = value
        return flat

    @classmethod
    def from_flat(cls, flat: dict[str, Any]) -> "ScenarioConfig":
        sections = {f.name: f for f in dataclasses.fields(cls)}
        nested: dict[str, dict[str, Any]] = {}
        top: dict[str, Any] = {}
        for key, value in flat.items():
            head, _, tail = key.partition(".")
            if head not in sections:
                raise ConfigError(f"unknown config key {key!r}")
            if tail:
                nested.setdefault(head, {})[tail] = value
            else:
                top[head] = value
        kwargs: dict[str, Any] = dict(top)
        defaults = cls()
        for head, values in nested.items():
            sub_cls = type(getattr(defaults, head))
            known = {f.name for f in dataclasses.fields(sub_cls)}
            unknown = set(values) - known
            if unknown:
                raise ConfigError(f"unknown keys in {head}: {sorted(unknown)}")
            try:
                kwargs[head] = sub_cls(**values)
            except TypeError as exc:
                raise ConfigError(str(exc)) from exc
        return cls(**kwargs)

    def dumps(self) -> str:
        return yaml.safe_dump(self.to_flat(), sort_keys=False, default_flow_style=False)

    @classmethod
    def loads(cls, text: str) -> "ScenarioConfig":
        data = yaml.safe_load(text) or {}
        if not isinstance(data, dict):
            raise ConfigError("config document must be a key-value mapping")
        return cls.from_flat(data)

    @classmethod
    def load(cls, path) -> "ScenarioConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.loads(fh.read())

    def digest(self) -> str:
        """Short stable hash of the full configuration."""
        return hashlib.sha256(self.dumps().encode("utf-8")).hexdigest()[:12]
