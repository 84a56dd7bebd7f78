"""Deterministic scenario engine binding geometry, link budget and the
access/data procedures.

Reception is a hard SNR threshold with a 10*log10(N) repetition gain; an
optional seeded log-normal shadow-fading term (off by default) is the
only source of randomness.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .config import ScenarioConfig
from .constants import SPEED_OF_LIGHT_KM_S, SPEED_OF_LIGHT_M_S
from .errors import ConfigError, DomainError
from .events import EventKind, SimEvent, Simulator, ms_to_us, us_to_ms
from .geometry import (
    GroundPosition,
    OrbitKind,
    OrbitSpec,
    geometry_sample,
    propagate,
    slant_range,
)
from .linkbudget import LinkBudgetParams, fspl, snr
from .protocol import (
    AccessOutcome,
    AccessTiming,
    DeviceContext,
    Ephemeris,
    FailureCause,
    MessageKind,
    SystemInformation,
    TimerConfig,
    run_random_access,
)


def repetition_gain_db(repetitions: int) -> float:
    if repetitions < 1:
        raise DomainError("repetitions must be >= 1")
    return 10.0 * math.log10(repetitions)


def reception_ok(snr_db: float, repetitions: int, threshold_db: float) -> bool:
    """Hard-threshold reception model (boundary inclusive)."""
    return snr_db + repetition_gain_db(repetitions) >= threshold_db


def channel_apply(
    sim: Simulator,
    detail: str,
    tx_time_us: int,
    one_way_delay_ms: float,
    snr_db: float,
    repetitions: int,
    threshold_db: float,
    tx_entity: str = "device",
    rx_entity: str = "bs",
) -> tuple[SimEvent, bool]:
    """Schedule a transmission and its (possibly failed) arrival."""
    sim.schedule(tx_time_us, EventKind.TX_START, tx_entity, detail)
    ok = reception_ok(snr_db, repetitions, threshold_db)
    arrival = sim.schedule(
        tx_time_us + ms_to_us(one_way_delay_ms),
        EventKind.RX_ARRIVAL,
        rx_entity,
        f"{detail} success={ok}",
    )
    return arrival, ok


_DL_KINDS = frozenset({MessageKind.MSG2_RAR, MessageKind.MSG4_CONTENTION_RESOLUTION})


@dataclass
class BentPipeChannel:
    """True link state seen by the access procedure."""

    service_delay_ms: float
    feeder_delay_ms: float
    snr_dl_db: float = 100.0
    snr_ul_db: float = 100.0
    snr_threshold_dl_db: float = -14.5
    snr_threshold_ul_db: float = -13.8
    repetitions: int = 1
    drop_kinds: frozenset = frozenset()

    @property
    def rtt_ms(self) -> float:
        return 2.0 * (self.service_delay_ms + self.feeder_delay_ms)

    def delivers(self, kind: MessageKind) -> bool:
        if kind in self.drop_kinds:
            return False
        if kind in _DL_KINDS:
            return reception_ok(self.snr_dl_db, self.repetitions, self.snr_threshold_dl_db)
        return reception_ok(self.snr_ul_db, self.repetitions, self.snr_threshold_ul_db)


def harq_transfer(
    sim: Simulator,
    start_us: int,
    n_blocks: int,
    n_processes: int,
    tti_ms: float,
    rtt_ms: float,
    ack_processing_ms: float = 0.0,
) -> int:
    """Stop-and-wait transfer with at most ``n_processes`` outstanding
    blocks; returns the time the last acknowledgment arrives."""
    if n_blocks < 1 or n_processes < 1:
        raise DomainError("need at least one block and one process")
    tti = ms_to_us(tti_ms)
    one_way = ms_to_us(rtt_ms) // 2
    ack_proc = ms_to_us(ack_processing_ms)
    proc_free = [start_us] * n_processes
    tx_free = start_us
    last_ack = start_us
    for block in range(n_blocks):
        p = min(range(n_processes), key=lambda i: proc_free[i])
        t_tx = max(tx_free, proc_free[p])
        sim.schedule(t_tx, EventKind.TX_START, "device", f"harq_data block={block} proc={p}")
        tx_end = t_tx + tti
        tx_free = tx_end
        data_arr = tx_end + one_way
        sim.schedule(data_arr, EventKind.RX_ARRIVAL, "bs", f"harq_data block={block} proc={p}")
        ack_tx = data_arr + ack_proc
        sim.schedule(ack_tx, EventKind.TX_START, "bs", f"harq_ack block={block} proc={p}")
        ack_arr = ack_tx + one_way
        sim.schedule(ack_arr, EventKind.RX_ARRIVAL, "device", f"harq_ack block={block} proc={p}")
        proc_free[p] = ack_arr
        last_ack = max(last_ack, ack_arr)
    return last_ack


def rlc_transfer(
    sim: Simulator,
    start_us: int,
    n_pdus: int,
    window_pdus: int,
    tti_ms: float,
    rtt_ms: float,
) -> int:
    """Windowed transfer with a status poll on the last PDU of each
    window; returns the arrival time of the final status report."""
    if n_pdus < 1:
        raise DomainError("need at least one PDU")
    tti = ms_to_us(tti_ms)
    one_way = ms_to_us(rtt_ms) // 2
    t = start_us
    sent = 0
    while sent < n_pdus:
        batch = min(window_pdus, n_pdus - sent)
        for j in range(batch):
            tx = t + j * tti
            sim.schedule(tx, EventKind.TX_START, "device", f"rlc_pdu sn={sent + j}")
            sim.schedule(tx + tti + one_way, EventKind.RX_ARRIVAL, "bs", f"rlc_pdu sn={sent + j}")
        last_arr = t + batch * tti + one_way
        sim.schedule(last_arr, EventKind.TX_START, "bs", f"rlc_status upto={sent + batch}")
        status_arr = last_arr + one_way
        sim.schedule(status_arr, EventKind.RX_ARRIVAL, "device", f"rlc_status upto={sent + batch}")
        sent += batch
        t = status_arr
    return t


@dataclass(frozen=True)
class ServiceInterval:
    start_s: float
    end_s: float
    satellite_index: int


def earth_fixed_beam_schedule(
    orbits: list[OrbitSpec] | OrbitSpec,
    cell_center: GroundPosition,
    min_elevation_deg: float,
    horizon_s: float | None = None,
    step_s: float = 1.0,
) -> list[ServiceInterval]:
    """Intervals during which each satellite serves an earth-fixed cell.

    The serving satellite is the one with the highest cell-center
    elevation above the threshold; a change of serving satellite starts a
    new interval (a service-link switch).
    """
    if isinstance(orbits, OrbitSpec):
        orbits = [orbits]
    if not orbits:
        return []
    static = all(
        o.kind is OrbitKind.GEOSYNCHRONOUS and o.inclination_deg == 0.0 for o in orbits
    )
    epoch = max(o.epoch_s for o in orbits)
    if static:
        best_idx, best_elev = None, min_elevation_deg
        for idx, orbit in enumerate(orbits):
            sample = geometry_sample(propagate(orbit, epoch), cell_center, 1e9)
            if sample.elevation_deg >= best_elev:
                best_idx, best_elev = idx, sample.elevation_deg
        if best_idx is None:
            return []
        return [ServiceInterval(epoch, math.inf, best_idx)]

    if horizon_s is None:
        horizon_s = max(o.period_s() for o in orbits)
    intervals: list[ServiceInterval] = []
    current: tuple[float, int] | None = None  # (start, sat index)
    n_steps = int(math.ceil(horizon_s / step_s))
    t = epoch
    for i in range(n_steps + 1):
        t = epoch + i * step_s
        serving = None
        best_elev = min_elevation_deg
        for idx, orbit in enumerate(orbits):
            sample = geometry_sample(propagate(orbit, t), cell_center, 1e9)
            if sample.elevation_deg >= best_elev:
                serving, best_elev = idx, sample.elevation_deg
        if serving is None:
            if current is not None:
                intervals.append(ServiceInterval(current[0], t, current[1]))
                current = None
        elif current is None:
            current = (t, serving)
        elif current[1] != serving:
            intervals.append(ServiceInterval(current[0], t, current[1]))
            current = (t, serving)
    if current is not None:
        intervals.append(ServiceInterval(current[0], t, current[1]))
    return intervals


@dataclass
class MetricsReport:
    scenario: str
    seed: int
    access_attempts: int = 0
    access_successes: int = 0
    failure_causes: dict = field(default_factory=dict)
    access_latency_p50_ms: float = 0.0
    access_latency_p95_ms: float = 0.0
    access_latency_max_ms: float = 0.0
    monitoring_time_ms: float = 0.0
    transferred_bits: float = 0.0
    transfer_time_ms: float = 0.0
    goodput_bps: float = 0.0

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "seed": self.seed,
            "access_attempts": self.access_attempts,
            "access_successes": self.access_successes,
            "failure_causes": dict(sorted(self.failure_causes.items())),
            "access_latency_p50_ms": round(self.access_latency_p50_ms, 6),
            "access_latency_p95_ms": round(self.access_latency_p95_ms, 6),
            "access_latency_max_ms": round(self.access_latency_max_ms, 6),
            "monitoring_time_ms": round(self.monitoring_time_ms, 6),
            "transferred_bits": round(self.transferred_bits, 6),
            "transfer_time_ms": round(self.transfer_time_ms, 6),
            "goodput_bps": round(self.goodput_bps, 6),
        }


@dataclass
class ScenarioResult:
    report: MetricsReport
    trace_rows: list[tuple]
    outcomes: list[AccessOutcome]


def _percentile(sorted_values: list[float], q: float) -> float:
    if not sorted_values:
        return 0.0
    rank = max(0, math.ceil(q * len(sorted_values)) - 1)
    return sorted_values[rank]


def _link_snrs(config: ScenarioConfig, elevation_deg: float) -> tuple[float, float]:
    """(downlink, uplink) SNR at the service elevation, worst-case
    atmospheric loss; defaults to a link that always closes."""
    orbit = config.constellation[0]
    distance = slant_range(elevation_deg, orbit.altitude_km)
    dl, ul = 100.0, 100.0
    for link in config.links:
        if link.orbit_index != 0:
            continue
        params = LinkBudgetParams(
            eirp_dbw=link.eirp_dbw,
            g_over_t_db_k=link.g_over_t_db_k,
            bandwidth_hz=link.bandwidth_hz,
            fspl_db=fspl(distance, config.carrier_frequency_hz / 1e9),
            shadow_fading_db=link.shadow_fading_db,
            scintillation_db=link.scintillation_db,
            atmospheric_db=link.atmospheric_db_max,
        )
        if link.direction == "downlink":
            dl = snr(params)
        else:
            ul = snr(params)
    return dl, ul


def run_scenario(config: ScenarioConfig, seed: int | None = None) -> ScenarioResult:
    """Run the access + data-transfer scenario; deterministic per seed."""
    if config.access is None:
        raise ConfigError(["config.access: required to run a scenario"])
    if config.traffic is None:
        raise ConfigError(["config.traffic: required to run a scenario"])
    if seed is None:
        seed = config.seed
    rng = random.Random(seed)
    access = config.access
    traffic = config.traffic
    orbit_cfg = config.constellation[0]
    orbit = orbit_cfg.to_orbit_spec()

    service_delay = (
        slant_range(access.service_elevation_deg, orbit_cfg.altitude_km)
        / SPEED_OF_LIGHT_KM_S
        * 1000.0
    )
    feeder_delay = (
        slant_range(access.feeder_elevation_deg, orbit_cfg.altitude_km)
        / SPEED_OF_LIGHT_KM_S
        * 1000.0
    )
    rtt_true = 2.0 * (service_delay + feeder_delay)
    snr_dl, snr_ul = _link_snrs(config, access.service_elevation_deg)
    drop_kinds = frozenset(MessageKind(k) for k in config.channel.drop_kinds)

    observer = (
        config.observer.to_ground() if config.observer else GroundPosition(0.0, 0.0)
    )
    timers = TimerConfig(
        contention_resolution_ms=config.timers.contention_resolution_ms,
        harq_rtt_ms=config.timers.harq_rtt_ms,
        t_reordering_ms=config.timers.t_reordering_ms,
        ntn_start_offset_ms=config.timers.ntn_start_offset_ms,
        t_reordering_extension_ms=config.timers.t_reordering_extension_ms,
    )
    timing = AccessTiming(
        bs_processing_ms=access.bs_processing_ms,
        device_processing_ms=access.device_processing_ms,
        rar_window_length_ms=access.rar_window_length_ms,
    )
    si = SystemInformation(
        ephemeris=Ephemeris(orbits=(orbit,)),
        max_rtt_ms=access.max_rtt_ms,
        cell_center=observer,
        carrier_frequency_hz=config.carrier_frequency_hz,
    )

    sim = Simulator()
    report = MetricsReport(scenario=config.name, seed=seed)
    outcomes: list[AccessOutcome] = []
    latencies: list[float] = []

    for i in range(traffic.n_messages):
        start_ms = i * traffic.inter_arrival_ms
        gnss_err_m = (
            rng.gauss(0.0, access.gnss_error_m) if access.gnss_error_m > 0 else 0.0
        )
        fade_db = (
            rng.gauss(0.0, config.channel.fading_sigma_db)
            if config.channel.fading_sigma_db > 0
            else 0.0
        )
        delay_est = service_delay - gnss_err_m / SPEED_OF_LIGHT_M_S * 1000.0
        channel = BentPipeChannel(
            service_delay_ms=service_delay,
            feeder_delay_ms=feeder_delay,
            snr_dl_db=snr_dl - fade_db,
            snr_ul_db=snr_ul - fade_db,
            snr_threshold_dl_db=config.channel.snr_threshold_dl_db,
            snr_threshold_ul_db=config.channel.snr_threshold_ul_db,
            repetitions=config.channel.repetitions,
            drop_kinds=drop_kinds,
        )
        device = DeviceContext(gnss_position=observer, gnss_error_radial_m=gnss_err_m)
        outcome = run_random_access(
            device,
            si,
            channel,
            timers=timers,
            timing=timing,
            sim=sim,
            start_ms=start_ms,
            delay_est_ms=delay_est,
        )
        outcomes.append(outcome)
        report.access_attempts += 1
        report.monitoring_time_ms += outcome.monitoring_ms
        if not outcome.success:
            cause = outcome.cause.value
            report.failure_causes[cause] = report.failure_causes.get(cause, 0) + 1
            continue
        report.access_successes += 1
        latencies.append(outcome.latency_ms)

        if not reception_ok(
            channel.snr_ul_db, channel.repetitions, channel.snr_threshold_ul_db
        ):
            report.failure_causes["data_snr"] = (
                report.failure_causes.get("data_snr", 0) + 1
            )
            continue
        transfer_start = ms_to_us(
            outcome.times_ms["msg4_arrival"] + access.device_processing_ms
        )
        if config.harq.enabled:
            n_blocks = int(math.ceil(traffic.message_size_bits / config.transfer.tbs_bits))
            end_us = harq_transfer(
                sim,
                transfer_start,
                n_blocks,
                config.harq.n_processes,
                config.transfer.tti_ms,
                rtt_true,
                config.transfer.ack_processing_ms,
            )
        else:
            n_pdus = int(
                math.ceil(traffic.message_size_bits / config.transfer.rlc_pdu_bits)
            )
            end_us = rlc_transfer(
                sim,
                transfer_start,
                n_pdus,
                config.transfer.rlc_window_pdus,
                config.transfer.tti_ms,
                rtt_true,
            )
        sim.run()
        report.transferred_bits += traffic.message_size_bits
        report.transfer_time_ms += us_to_ms(end_us - transfer_start)

    latencies.sort()
    report.access_latency_p50_ms = _percentile(latencies, 0.50)
    report.access_latency_p95_ms = _percentile(latencies, 0.95)
    report.access_latency_max_ms = latencies[-1] if latencies else 0.0
    if report.transfer_time_ms > 0:
        report.goodput_bps = report.transferred_bits / (report.transfer_time_ms / 1000.0)
    return ScenarioResult(report=report, trace_rows=sim.trace_rows(), outcomes=outcomes)
