"""Command-line front end.

Subcommands: linkbudget, geometry, doppler-trace, simulate, rank-cells.
Exit codes: 0 success, 2 config validation failure, 3 runtime failure.
CSV output uses fixed formatting so re-running any command is byte-stable.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from .config import ScenarioConfig, load_config
from .constants import SIDEREAL_DAY_S, SPEED_OF_LIGHT_KM_S
from .engine import run_scenario
from .errors import ConfigError, DomainError, NoCellError, NotReachableError
from .geometry import (
    GroundPosition,
    OrbitKind,
    beam_doppler_profile,
    differential_delay,
    geometry_sample,
    overhead_pass_orbit,
    propagate,
    satellite_state_over,
    slant_range,
    visibility_duration,
)
from .linkbudget import LinkBudgetParams, fspl, snr
from .mobility import CellCandidate, cell_suitability, rank_cells

log = logging.getLogger("ntnsim")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _fmt(value: float) -> str:
    return f"{value:.6f}"


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) if isinstance(v, float) else str(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _emit(args, name: str, header: list[str], rows: list[list]) -> Path:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{name}.csv"
    _write_csv(path, header, rows)
    if args.format == "csv":
        sys.stdout.write(path.read_text())
    else:
        widths = [
            max(len(str(h)), *(len(_fmt(r[i]) if isinstance(r[i], float) else str(r[i])) for r in rows))
            if rows
            else len(str(h))
            for i, h in enumerate(header)
        ]
        print("  ".join(h.ljust(w) for h, w in zip(header, widths)))
        for row in rows:
            print(
                "  ".join(
                    (_fmt(v) if isinstance(v, float) else str(v)).ljust(w)
                    for v, w in zip(row, widths)
                )
            )
    return path


def _observer(config: ScenarioConfig) -> GroundPosition:
    if config.observer is not None:
        return config.observer.to_ground()
    return GroundPosition(0.0, 0.0)


def cmd_linkbudget(config: ScenarioConfig, args) -> int:
    if not config.links:
        raise ConfigError(["config.links: required for the linkbudget command"])
    rows = []
    fc_ghz = config.carrier_frequency_hz / 1e9
    for link in config.links:
        orbit = config.constellation[link.orbit_index]
        d_best = slant_range(config.max_elevation_deg, orbit.altitude_km)
        d_worst = slant_range(config.min_elevation_deg, orbit.altitude_km)

        def budget(distance_km, atmospheric_db):
            return snr(
                LinkBudgetParams(
                    eirp_dbw=link.eirp_dbw,
                    g_over_t_db_k=link.g_over_t_db_k,
                    bandwidth_hz=link.bandwidth_hz,
                    fspl_db=fspl(distance_km, fc_ghz),
                    shadow_fading_db=link.shadow_fading_db,
                    scintillation_db=link.scintillation_db,
                    atmospheric_db=atmospheric_db,
                )
            )

        rows.append(
            [
                link.name,
                link.direction,
                fspl(d_worst, fc_ghz),
                fspl(d_best, fc_ghz),
                budget(d_worst, link.atmospheric_db_max),
                budget(d_best, link.atmospheric_db_min),
            ]
        )
    _emit(
        args,
        "linkbudget",
        ["link", "direction", "fspl_worst_db", "fspl_best_db", "snr_worst_db", "snr_best_db"],
        rows,
    )
    return EXIT_OK


def cmd_geometry(config: ScenarioConfig, args) -> int:
    rows = []
    fc = config.carrier_frequency_hz
    min_el = config.min_elevation_deg
    max_el = config.max_elevation_deg
    for idx, orbit_cfg in enumerate(config.constellation):
        orbit = orbit_cfg.to_orbit_spec()
        alt = orbit_cfg.altitude_km
        delay = lambda el: slant_range(el, alt) / SPEED_OF_LIGHT_KM_S * 1000.0
        rtt_min = 4.0 * delay(max_el)
        rtt_max = 4.0 * delay(min_el)
        rows.append([idx, orbit_cfg.kind, "rtt_min_ms", rtt_min])
        rows.append([idx, orbit_cfg.kind, "rtt_max_ms", rtt_max])

        max_rr = 0.0
        if orbit.kind is OrbitKind.GEOSYNCHRONOUS:
            obs = _observer(config)
            for t in np.arange(orbit.epoch_s, orbit.epoch_s + SIDEREAL_DAY_S, 60.0):
                sample = geometry_sample(propagate(orbit, t), obs, fc)
                max_rr = max(max_rr, abs(sample.range_rate_km_s))
            visibility = math.inf
        else:
            equator = GroundPosition(0.0, 0.0)
            pass_orbit = overhead_pass_orbit(
                orbit.kind, alt, orbit_cfg.inclination_deg, equator, overhead_at_s=3000.0
            )
            for t in np.arange(2000.0, 4000.0, 1.0):
                sample = geometry_sample(propagate(pass_orbit, t), equator, fc)
                if sample.elevation_deg >= min_el:
                    max_rr = max(max_rr, abs(sample.range_rate_km_s))
            visibility = visibility_duration(pass_orbit, equator, min_el)
        ppm = max_rr / SPEED_OF_LIGHT_KM_S * 1e6
        rows.append([idx, orbit_cfg.kind, "max_doppler_ppm", ppm])
        rows.append([idx, orbit_cfg.kind, "max_doppler_hz", ppm * 1e-6 * fc])
        rows.append([idx, orbit_cfg.kind, "max_delay_drift_us_s", ppm])
        rows.append([idx, orbit_cfg.kind, "visibility_s", visibility])

        if config.beams:
            beam = max(config.beams, key=lambda b: b.diameter_km).to_beam()
            if orbit.kind is OrbitKind.GEOSYNCHRONOUS:
                sat = propagate(orbit, orbit.epoch_s)
            else:
                sat = satellite_state_over(beam.center, alt)
            try:
                dd = differential_delay(sat, beam)
                rows.append([idx, orbit_cfg.kind, "differential_delay_ms", dd])
            except DomainError as exc:
                log.warning("differential delay skipped for orbit %d: %s", idx, exc)
    _emit(args, "geometry", ["orbit", "kind", "metric", "value"], rows)
    return EXIT_OK


def cmd_doppler_trace(config: ScenarioConfig, args) -> int:
    fc = config.carrier_frequency_hz
    if args.mode == "inclined_geo":
        orbit = config.constellation[0].to_orbit_spec()
        if orbit.kind is not OrbitKind.GEOSYNCHRONOUS:
            raise ConfigError(["config.constellation[0]: inclined_geo mode needs a geosynchronous orbit"])
        obs = _observer(config)
        rows = []
        for t in np.arange(0.0, SIDEREAL_DAY_S + 1.0, 60.0):
            sample = geometry_sample(propagate(orbit, orbit.epoch_s + t), obs, fc)
            rows.append([float(t), sample.doppler_hz])
        _emit(args, "doppler_trace_inclined_geo", ["time_of_day_s", "doppler_hz"], rows)
    else:
        if not config.beams:
            raise ConfigError(["config.beams: required for beam_profile mode"])
        beam = config.beams[0].to_beam()
        orbit_cfg = config.constellation[0]
        sat = satellite_state_over(beam.center, orbit_cfg.altitude_km)
        profile = beam_doppler_profile(sat, beam, fc, n=101)
        rows = [[offset, doppler] for offset, doppler in profile]
        _emit(args, "doppler_trace_beam_profile", ["offset_km", "doppler_hz"], rows)
    return EXIT_OK


def cmd_simulate(config: ScenarioConfig, args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    base_seed = config.seed if args.seed is None else args.seed
    seeds = [base_seed + i for i in range(args.jobs)]

    def one(seed: int):
        result = run_scenario(config, seed=seed)
        report_path = out_dir / f"report_seed{seed}.json"
        report_path.write_text(
            json.dumps(result.report.to_dict(), sort_keys=True, indent=2) + "\n"
        )
        trace_path = out_dir / f"trace_seed{seed}.csv"
        _write_csv(
            trace_path,
            ["time_ms", "seq", "entity", "kind", "detail"],
            [list(row) for row in result.trace_rows],
        )
        return result.report

    if len(seeds) == 1:
        reports = [one(seeds[0])]
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=len(seeds)) as pool:
            reports = list(pool.map(one, seeds))
    header = ["seed", "attempts", "successes", "latency_p50_ms", "goodput_bps"]
    rows = [
        [r.seed, r.access_attempts, r.access_successes, r.access_latency_p50_ms, r.goodput_bps]
        for r in reports
    ]
    _emit(args, "simulate_summary", header, rows)
    return EXIT_OK


def cmd_rank_cells(config: ScenarioConfig, args) -> int:
    if not config.cells:
        raise ConfigError(["config.cells: required for the rank-cells command"])
    device = _observer(config)
    orbit = config.constellation[0].to_orbit_spec()
    sat = propagate(orbit, orbit.epoch_s)
    candidates = []
    for cell in config.cells:
        sample = geometry_sample(sat, device, config.carrier_frequency_hz)
        est_rtt = 4.0 * sample.one_way_delay_ms
        candidates.append(
            CellCandidate(
                cell_id=cell.cell_id,
                cell_center=cell.center(),
                max_rtt_ms=cell.max_rtt_ms,
                estimated_rtt_ms=est_rtt,
            )
        )
    suitable = [c for c in candidates if cell_suitability(c)]
    if not suitable:
        raise NoCellError("no suitable cells")
    ranked = rank_cells(device, suitable)
    rows = [
        [rank + 1, c.cell_id, c.center_distance_km, c.estimated_rtt_ms, c.max_rtt_ms]
        for rank, c in enumerate(ranked)
    ]
    _emit(
        args,
        "rank_cells",
        ["rank", "cell_id", "center_distance_km", "estimated_rtt_ms", "max_rtt_ms"],
        rows,
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ntnsim",
        description="Narrowband IoT over bent-pipe GEO/LEO satellite links.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("linkbudget", "geometry", "doppler-trace", "simulate", "rank-cells"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="scenario config JSON")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="seed override")
        p.add_argument("--format", choices=("csv", "text"), default="text")
        p.add_argument("--jobs", type=int, default=1, help="concurrent seeds (simulate)")
        if name == "doppler-trace":
            p.add_argument(
                "--mode", choices=("inclined_geo", "beam_profile"), default="inclined_geo"
            )
    return parser


_COMMANDS = {
    "linkbudget": cmd_linkbudget,
    "geometry": cmd_geometry,
    "doppler-trace": cmd_doppler_trace,
    "simulate": cmd_simulate,
    "rank-cells": cmd_rank_cells,
}


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("NTNSIM_LOG", "WARNING").upper())
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG
    try:
        return _COMMANDS[args.command](config, args)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG
    except (DomainError, NotReachableError, NoCellError, OSError) as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
