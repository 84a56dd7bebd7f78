"""Scenario configuration: JSON with explicit-unit field names.

Unknown fields are rejected and all validation failures are reported
together through :class:`ConfigError`.
"""

from __future__ import annotations

import dataclasses
import json
import typing
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import ConfigError, DomainError
from .geometry import BeamSpec, GroundPosition, OrbitKind, OrbitSpec

_MISSING = dataclasses.MISSING


def _coerce(tp, value, path, errors):
    origin = typing.get_origin(tp)
    if origin is typing.Union:
        args = [a for a in typing.get_args(tp) if a is not type(None)]
        if value is None:
            return None
        return _coerce(args[0], value, path, errors)
    if origin in (list, tuple):
        if not isinstance(value, list):
            errors.append(f"{path}: expected a list")
            return []
        inner = typing.get_args(tp)[0]
        items = [
            _coerce(inner, v, f"{path}[{i}]", errors) for i, v in enumerate(value)
        ]
        return tuple(items) if origin is tuple else items
    if dataclasses.is_dataclass(tp):
        return _build(tp, value, path, errors)
    if tp is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            errors.append(f"{path}: expected a number")
            return 0.0
        return float(value)
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            errors.append(f"{path}: expected an integer")
            return 0
        return value
    if tp is bool:
        if not isinstance(value, bool):
            errors.append(f"{path}: expected a boolean")
            return False
        return value
    if tp is str:
        if not isinstance(value, str):
            errors.append(f"{path}: expected a string")
            return ""
        return value
    errors.append(f"{path}: unsupported field type {tp!r}")
    return None


def _build(cls, data, path, errors):
    if not isinstance(data, dict):
        errors.append(f"{path}: expected an object")
        return None
    hints = typing.get_type_hints(cls)
    known = {f.name: f for f in dataclasses.fields(cls)}
    for key in sorted(set(data) - set(known)):
        errors.append(f"{path}.{key}: unknown field")
    kwargs = {}
    complete = True
    for name, f in known.items():
        if name in data:
            kwargs[name] = _coerce(hints[name], data[name], f"{path}.{name}", errors)
        elif f.default is _MISSING and f.default_factory is _MISSING:
            errors.append(f"{path}.{name}: missing required field")
            complete = False
    if not complete:
        return None
    try:
        return cls(**kwargs)
    except (DomainError, ValueError) as exc:
        errors.append(f"{path}: {exc}")
        return None


@dataclass(frozen=True)
class OrbitCfg:
    kind: str
    altitude_km: float
    inclination_deg: float = 0.0
    raan_deg: float = 0.0
    phase_deg: float = 0.0
    epoch_s: float = 0.0

    def __post_init__(self):
        if self.kind not in ("geosynchronous", "leo_circular"):
            raise DomainError(f"unknown orbit kind {self.kind!r}")
        self.to_orbit_spec()  # surface altitude/inclination errors at load time

    def to_orbit_spec(self) -> OrbitSpec:
        return OrbitSpec(
            kind=OrbitKind(self.kind),
            altitude_km=self.altitude_km,
            inclination_deg=self.inclination_deg,
            raan_deg=self.raan_deg,
            phase_deg=self.phase_deg,
            epoch_s=self.epoch_s,
        )


@dataclass(frozen=True)
class ObserverCfg:
    latitude_deg: float
    longitude_deg: float
    altitude_m: float = 0.0

    def to_ground(self) -> GroundPosition:
        return GroundPosition(self.latitude_deg, self.longitude_deg, self.altitude_m)


@dataclass(frozen=True)
class BeamCfg:
    center_latitude_deg: float
    center_longitude_deg: float
    diameter_km: float

    def to_beam(self) -> BeamSpec:
        return BeamSpec(
            center=GroundPosition(self.center_latitude_deg, self.center_longitude_deg),
            diameter_km=self.diameter_km,
        )


@dataclass(frozen=True)
class CellCfg:
    cell_id: str
    center_latitude_deg: float
    center_longitude_deg: float
    max_rtt_ms: float

    def center(self) -> GroundPosition:
        return GroundPosition(self.center_latitude_deg, self.center_longitude_deg)


@dataclass(frozen=True)
class LinkCfg:
    name: str
    orbit_index: int
    direction: str
    eirp_dbw: float
    g_over_t_db_k: float
    bandwidth_hz: float
    shadow_fading_db: float = 3.0
    scintillation_db: float = 2.2
    atmospheric_db_min: float = 0.03
    atmospheric_db_max: float = 0.2

    def __post_init__(self):
        if self.direction not in ("downlink", "uplink"):
            raise DomainError(f"unknown link direction {self.direction!r}")
        if self.atmospheric_db_min > self.atmospheric_db_max:
            raise DomainError("atmospheric loss bounds out of order")


@dataclass(frozen=True)
class TimerCfg:
    contention_resolution_ms: float = 10240.0
    harq_rtt_ms: float = 0.0
    t_reordering_ms: float = 1600.0
    ntn_start_offset_ms: float = 0.0
    t_reordering_extension_ms: Optional[float] = None


@dataclass(frozen=True)
class HarqCfg:
    n_processes: int = 2
    enabled: bool = True
    target_bler: float = 0.1


@dataclass(frozen=True)
class TransferCfg:
    tbs_bits: float = 1000.0
    tti_ms: float = 4.0
    ack_processing_ms: float = 0.0
    rlc_window_pdus: int = 16
    rlc_pdu_bits: float = 1000.0

    def __post_init__(self):
        if self.tti_ms <= 0:
            raise DomainError("TTI must be positive")
        if self.rlc_window_pdus < 1:
            raise DomainError("RLC window must be at least one PDU")


@dataclass(frozen=True)
class TrafficCfg:
    message_size_bits: float
    inter_arrival_ms: float
    n_messages: int

    def __post_init__(self):
        if self.message_size_bits <= 0 or self.inter_arrival_ms <= 0:
            raise DomainError("traffic sizes and spacing must be positive")
        if self.n_messages < 1:
            raise DomainError("need at least one message")


@dataclass(frozen=True)
class AccessCfg:
    max_rtt_ms: float
    service_elevation_deg: float = 10.0
    feeder_elevation_deg: float = 10.0
    bs_processing_ms: float = 4.0
    device_processing_ms: float = 8.0
    rar_window_length_ms: float = 10240.0
    gnss_error_m: float = 0.0

    def __post_init__(self):
        if self.max_rtt_ms <= 0:
            raise DomainError("max RTT must be positive")


@dataclass(frozen=True)
class ChannelCfg:
    snr_threshold_dl_db: float = -14.5
    snr_threshold_ul_db: float = -13.8
    repetitions: int = 1
    fading_sigma_db: float = 0.0
    drop_kinds: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.repetitions < 1:
            raise DomainError("repetitions must be >= 1")
        if self.fading_sigma_db < 0:
            raise DomainError("fading sigma must be non-negative")


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    constellation: list[OrbitCfg]
    carrier_frequency_hz: float
    seed: int = 0
    min_elevation_deg: float = 10.0
    max_elevation_deg: float = 90.0
    observer: Optional[ObserverCfg] = None
    beams: list[BeamCfg] = field(default_factory=list)
    cells: list[CellCfg] = field(default_factory=list)
    links: list[LinkCfg] = field(default_factory=list)
    timers: TimerCfg = field(default_factory=TimerCfg)
    harq: HarqCfg = field(default_factory=HarqCfg)
    transfer: TransferCfg = field(default_factory=TransferCfg)
    traffic: Optional[TrafficCfg] = None
    access: Optional[AccessCfg] = None
    channel: ChannelCfg = field(default_factory=ChannelCfg)

    def __post_init__(self):
        if not self.constellation:
            raise DomainError("constellation must contain at least one orbit")
        if self.carrier_frequency_hz <= 0:
            raise DomainError("carrier frequency must be positive")


def load_config_dict(data: dict) -> ScenarioConfig:
    errors: list[str] = []
    cfg = _build(ScenarioConfig, data, "config", errors)
    if errors:
        raise ConfigError(errors)
    return cfg


def load_config(path: str | Path) -> ScenarioConfig:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError([f"config: {exc}"])
    return load_config_dict(data)
