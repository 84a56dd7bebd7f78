import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ntnsim.config import load_config, load_config_dict
from ntnsim.engine import (
    BentPipeChannel,
    MetricsReport,
    ServiceInterval,
    earth_fixed_beam_schedule,
    harq_transfer,
    reception_ok,
    repetition_gain_db,
    rlc_transfer,
    run_scenario,
)
from ntnsim.errors import ConfigError, DomainError
from ntnsim.events import EventKind, Simulator, ms_to_us, us_to_ms
from ntnsim.geometry import GroundPosition, OrbitKind, OrbitSpec, overhead_pass_orbit
from ntnsim.protocol import HarqConfig, harq_throughput, rlc_arq_throughput


def test_event_queue_fifo_at_equal_times():
    sim = Simulator()
    order = []
    sim.schedule(100, EventKind.TIMER_FIRE, "a", callback=lambda s, e: order.append("a"))
    sim.schedule(100, EventKind.TIMER_FIRE, "b", callback=lambda s, e: order.append("b"))
    sim.schedule(50, EventKind.TIMER_FIRE, "c", callback=lambda s, e: order.append("c"))
    sim.run()
    assert order == ["c", "a", "b"]


def test_event_queue_rejects_past():
    sim = Simulator()
    sim.schedule(10, EventKind.TIMER_FIRE, "x")
    sim.run()
    with pytest.raises(ValueError):
        sim.schedule(5, EventKind.TIMER_FIRE, "y")


def test_repetition_gain():
    assert repetition_gain_db(1) == 0.0
    assert repetition_gain_db(4) == pytest.approx(10.0 * math.log10(4.0))
    with pytest.raises(DomainError):
        repetition_gain_db(0)


def test_reception_threshold_inclusive():
    assert reception_ok(-14.5, 1, -14.5)
    assert not reception_ok(-14.51, 1, -14.5)
    assert reception_ok(-20.0, 4, -14.5) == (-20.0 + 10 * math.log10(4) >= -14.5)


def test_harq_transfer_matches_throughput_formula():
    # Long-RTT regime: both processes ping-pong and the formula rate is
    # n * tbs / (rtt + tti + ack_proc) once the pipe is full.
    rtt, tti, tbs, n_blocks = 541.0, 4.0, 1000.0, 40
    sim = Simulator()
    end = harq_transfer(sim, 0, n_blocks, 2, tti, rtt, ack_processing_ms=0.0)
    sim.run()
    simulated = n_blocks * tbs / (us_to_ms(end) / 1000.0)
    formula = harq_throughput(rtt, tbs, HarqConfig(n_processes=2), proc_delay_ms=tti)
    assert simulated == pytest.approx(formula, rel=0.02)


def test_harq_outstanding_bound_never_exceeded():
    rtt, tti = 100.0, 4.0
    for n_proc in (1, 2):
        sim = Simulator()
        harq_transfer(sim, 0, 25, n_proc, tti, rtt)
        sim.run()
        outstanding = 0
        peak = 0
        for ev in sim.trace:
            if ev.kind is EventKind.TX_START and ev.detail.startswith("harq_data"):
                outstanding += 1
                peak = max(peak, outstanding)
            elif ev.kind is EventKind.RX_ARRIVAL and ev.detail.startswith("harq_ack"):
                outstanding -= 1
        assert peak <= n_proc


def test_rlc_transfer_matches_throughput_formula():
    rtt, tti, pdu, window = 541.0, 4.0, 1000.0, 16
    n_pdus = window * 10
    sim = Simulator()
    end = rlc_transfer(sim, 0, n_pdus, window, tti, rtt)
    sim.run()
    simulated = n_pdus * pdu / (us_to_ms(end) / 1000.0)
    formula = rlc_arq_throughput(rtt, window, pdu, tti)
    assert simulated == pytest.approx(formula, rel=1e-9)


@given(
    st.integers(min_value=1, max_value=60),
    st.integers(min_value=1, max_value=16),
    st.floats(min_value=10.0, max_value=600.0),
)
@settings(max_examples=30, deadline=None)
def test_rlc_transfer_monotone_in_rtt(n_pdus, window, rtt):
    sim1, sim2 = Simulator(), Simulator()
    end1 = rlc_transfer(sim1, 0, n_pdus, window, 4.0, rtt)
    end2 = rlc_transfer(sim2, 0, n_pdus, window, 4.0, rtt + 50.0)
    assert end2 >= end1


def test_beam_schedule_static_geo():
    geo = OrbitSpec(kind=OrbitKind.GEOSYNCHRONOUS)
    intervals = earth_fixed_beam_schedule(geo, GroundPosition(30.0, 0.0), 10.0)
    assert intervals == [ServiceInterval(0.0, math.inf, 0)]
    # A cell the satellite cannot see gets no service.
    assert earth_fixed_beam_schedule(geo, GroundPosition(85.0, 0.0), 10.0) == []


def test_beam_schedule_leo_switch():
    obs = GroundPosition(0.0, 0.0)
    first = overhead_pass_orbit(OrbitKind.LEO_CIRCULAR, 600.0, 90.0, obs, overhead_at_s=1500.0)
    second = overhead_pass_orbit(OrbitKind.LEO_CIRCULAR, 600.0, 90.0, obs, overhead_at_s=2100.0)
    intervals = earth_fixed_beam_schedule(
        [first, second], obs, 10.0, horizon_s=3000.0, step_s=5.0
    )
    assert len(intervals) >= 2
    served_by = [iv.satellite_index for iv in intervals]
    assert 0 in served_by and 1 in served_by
    for a, b in zip(intervals, intervals[1:]):
        assert a.end_s <= b.start_s + 1e-9


MINIMAL = {
    "name": "unit",
    "constellation": [{"kind": "leo_circular", "altitude_km": 600.0}],
    "carrier_frequency_hz": 2.0e9,
    "traffic": {"message_size_bits": 2000.0, "inter_arrival_ms": 3000.0, "n_messages": 3},
    "access": {"max_rtt_ms": 26.0},
    "timers": {"ntn_start_offset_ms": 26.0},
}


def test_run_scenario_deterministic_per_seed():
    cfg = load_config_dict(json.loads(json.dumps(MINIMAL)))
    r1 = run_scenario(cfg, seed=7)
    r2 = run_scenario(cfg, seed=7)
    assert r1.report.to_dict() == r2.report.to_dict()
    assert r1.trace_rows == r2.trace_rows


def test_run_scenario_requires_access_and_traffic():
    bare = {k: v for k, v in MINIMAL.items() if k not in ("access", "traffic")}
    cfg = load_config_dict(bare)
    with pytest.raises(ConfigError):
        run_scenario(cfg)


def test_run_scenario_all_messages_succeed_on_clean_channel():
    cfg = load_config_dict(json.loads(json.dumps(MINIMAL)))
    result = run_scenario(cfg, seed=3)
    assert result.report.access_attempts == 3
    assert result.report.access_successes == 3
    assert result.report.goodput_bps > 0
    assert result.report.failure_causes == {}


def test_run_scenario_dropped_preamble_counts_rar_timeouts():
    data = json.loads(json.dumps(MINIMAL))
    data["channel"] = {"drop_kinds": ["msg1_preamble"]}
    data["access"]["rar_window_length_ms"] = 100.0
    cfg = load_config_dict(data)
    result = run_scenario(cfg, seed=3)
    assert result.report.access_successes == 0
    assert result.report.failure_causes == {"rar_timeout": 3}


def test_config_unknown_field_and_type_errors_collected():
    bad = json.loads(json.dumps(MINIMAL))
    bad["bogus"] = 1
    bad["traffic"]["n_messages"] = "three"
    with pytest.raises(ConfigError) as exc:
        load_config_dict(bad)
    joined = " ".join(exc.value.fields)
    assert "bogus" in joined and "n_messages" in joined


def test_config_rejects_out_of_range_values():
    bad = json.loads(json.dumps(MINIMAL))
    bad["constellation"][0]["altitude_km"] = 100.0
    with pytest.raises(ConfigError):
        load_config_dict(bad)


def test_load_config_missing_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/path.json")


def test_bundled_configs_load(config_dir):
    for name in (
        "geo_sband.json",
        "leo600_sband.json",
        "inclined_geo.json",
        "beam_profile.json",
    ):
        cfg = load_config(config_dir / name)
        assert cfg.constellation
