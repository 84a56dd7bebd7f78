"""Circular-orbit geometry for bent-pipe satellite links.

Spherical earth, circular Kepler orbits, propagated into an earth-fixed
frame so that range rates (and hence Doppler and delay drift) include the
earth-rotation contribution.  All positions are km, velocities km/s,
delays ms, Doppler Hz, delay drift microseconds per second.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .constants import (
    EARTH_RADIUS_KM,
    MU_EARTH_KM3_S2,
    OMEGA_EARTH_RAD_S,
    SIDEREAL_DAY_S,
    SPEED_OF_LIGHT_KM_S,
)
from .errors import DomainError

GEO_ALTITUDE_KM = 35786.0
LEO_ALTITUDE_MIN_KM = 500.0
LEO_ALTITUDE_MAX_KM = 2000.0


def normalize_longitude(lon_deg: float) -> float:
    """Map a longitude to (-180, 180]."""
    lon = math.fmod(lon_deg, 360.0)
    if lon > 180.0:
        lon -= 360.0
    elif lon <= -180.0:
        lon += 360.0
    return lon


@dataclass(frozen=True)
class GroundPosition:
    """A point on (or just above) the reference sphere."""

    latitude_deg: float
    longitude_deg: float
    altitude_m: float = 0.0

    def __post_init__(self):
        if not -90.0 <= self.latitude_deg <= 90.0:
            raise DomainError(f"latitude {self.latitude_deg} outside [-90, 90]")
        object.__setattr__(
            self, "longitude_deg", normalize_longitude(self.longitude_deg)
        )

    def unit_vector(self) -> np.ndarray:
        lat = math.radians(self.latitude_deg)
        lon = math.radians(self.longitude_deg)
        return np.array(
            [
                math.cos(lat) * math.cos(lon),
                math.cos(lat) * math.sin(lon),
                math.sin(lat),
            ]
        )

    def ecef_km(self) -> np.ndarray:
        """Earth-fixed cartesian position."""
        r = EARTH_RADIUS_KM + self.altitude_m / 1000.0
        return r * self.unit_vector()


class OrbitKind(Enum):
    GEOSYNCHRONOUS = "geosynchronous"
    LEO_CIRCULAR = "leo_circular"


@dataclass(frozen=True)
class OrbitSpec:
    """A circular orbit: altitude, inclination, node, and phase at epoch.

    ``raan_deg`` is the earth-fixed longitude of the ascending node at
    epoch; ``phase_deg`` is the argument of latitude at epoch.
    """

    kind: OrbitKind
    altitude_km: float = GEO_ALTITUDE_KM
    inclination_deg: float = 0.0
    raan_deg: float = 0.0
    phase_deg: float = 0.0
    epoch_s: float = 0.0

    def __post_init__(self):
        if self.altitude_km <= 0:
            raise DomainError("altitude must be positive")
        if self.kind is OrbitKind.GEOSYNCHRONOUS:
            if abs(self.altitude_km - GEO_ALTITUDE_KM) > 1e-6:
                raise DomainError(
                    f"geosynchronous altitude is fixed at {GEO_ALTITUDE_KM} km"
                )
        else:
            if not LEO_ALTITUDE_MIN_KM <= self.altitude_km <= LEO_ALTITUDE_MAX_KM:
                raise DomainError(
                    "LEO altitude must lie in "
                    f"[{LEO_ALTITUDE_MIN_KM}, {LEO_ALTITUDE_MAX_KM}] km"
                )
        if not 0.0 <= self.inclination_deg < 180.0:
            raise DomainError("inclination must lie in [0, 180)")

    @property
    def semi_major_axis_km(self) -> float:
        return EARTH_RADIUS_KM + self.altitude_km

    def mean_motion_rad_s(self) -> float:
        if self.kind is OrbitKind.GEOSYNCHRONOUS:
            return 2.0 * math.pi / SIDEREAL_DAY_S
        a = self.semi_major_axis_km
        return math.sqrt(MU_EARTH_KM3_S2 / a**3)

    def period_s(self) -> float:
        return 2.0 * math.pi / self.mean_motion_rad_s()

    def inertial_speed_km_s(self) -> float:
        return self.mean_motion_rad_s() * self.semi_major_axis_km


@dataclass(frozen=True)
class SatelliteState:
    """Earth-fixed position/velocity at an instant."""

    t_s: float
    position_km: np.ndarray
    velocity_km_s: np.ndarray


@dataclass(frozen=True)
class GeometrySample:
    elevation_deg: float
    slant_range_km: float
    one_way_delay_ms: float
    range_rate_km_s: float  # positive = receding
    doppler_hz: float
    delay_drift_us_s: float


@dataclass(frozen=True)
class BeamSpec:
    center: GroundPosition
    diameter_km: float

    def __post_init__(self):
        if self.diameter_km < 0:
            raise DomainError("beam diameter must be non-negative")


def _rot_z(angle_rad: float) -> np.ndarray:
    c, s = math.cos(angle_rad), math.sin(angle_rad)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _rot_x(angle_rad: float) -> np.ndarray:
    c, s = math.cos(angle_rad), math.sin(angle_rad)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def slant_range(elevation_deg: float, altitude_km: float) -> float:
    """Line-of-sight distance to a satellite seen at a given elevation."""
    if not 0.0 <= elevation_deg <= 90.0:
        raise DomainError("elevation must lie in [0, 90] degrees")
    if altitude_km <= 0:
        raise DomainError("altitude must be positive")
    re = EARTH_RADIUS_KM
    r = re + altitude_km
    eps = math.radians(elevation_deg)
    return math.sqrt(r * r - (re * math.cos(eps)) ** 2) - re * math.sin(eps)


def propagate(orbit: OrbitSpec, t_s: float) -> SatelliteState:
    """Earth-fixed state of a circular orbit at time t."""
    if t_s < orbit.epoch_s:
        raise DomainError("t must not precede the orbit epoch")
    a = orbit.semi_major_axis_km
    n = orbit.mean_motion_rad_s()
    dt = t_s - orbit.epoch_s
    u = math.radians(orbit.phase_deg) + n * dt

    pos_plane = np.array([a * math.cos(u), a * math.sin(u), 0.0])
    vel_plane = np.array([-a * n * math.sin(u), a * n * math.cos(u), 0.0])
    to_inertial = _rot_z(math.radians(orbit.raan_deg)) @ _rot_x(
        math.radians(orbit.inclination_deg)
    )
    r_in = to_inertial @ pos_plane
    v_in = to_inertial @ vel_plane

    rot = _rot_z(-OMEGA_EARTH_RAD_S * dt)
    r_ef = rot @ r_in
    omega_vec = np.array([0.0, 0.0, OMEGA_EARTH_RAD_S])
    v_ef = rot @ v_in - np.cross(omega_vec, r_ef)
    return SatelliteState(t_s=t_s, position_km=r_ef, velocity_km_s=v_ef)


def subsatellite_point(state: SatelliteState) -> tuple[float, float]:
    """(latitude, longitude) of the sub-satellite point in degrees."""
    x, y, z = state.position_km
    r = float(np.linalg.norm(state.position_km))
    lat = math.degrees(math.asin(z / r))
    lon = normalize_longitude(math.degrees(math.atan2(y, x)))
    return lat, lon


def ground_track(
    orbit: OrbitSpec, duration_s: float, step_s: float
) -> list[tuple[float, float, float]]:
    """Sub-satellite (t, lat, lon) series from the orbit epoch."""
    if duration_s <= 0 or step_s <= 0:
        raise DomainError("duration and step must be positive")
    out = []
    t = orbit.epoch_s
    end = orbit.epoch_s + duration_s
    while t <= end + 1e-9:
        lat, lon = subsatellite_point(propagate(orbit, t))
        out.append((t, lat, lon))
        t += step_s
    return out


def geometry_sample(
    sat: SatelliteState, ground: GroundPosition, fc_hz: float
) -> GeometrySample:
    """Elevation, slant range, delay, range rate, Doppler, delay drift.

    Ground stations are fixed in the earth-fixed frame, so the satellite's
    earth-fixed velocity is the full relative velocity.
    """
    if fc_hz <= 0:
        raise DomainError("carrier frequency must be positive")
    r_gnd = ground.ecef_km()
    los = sat.position_km - r_gnd
    d = float(np.linalg.norm(los))
    if d < 1e-9:
        raise DomainError("ground position coincides with the satellite")
    up = ground.unit_vector()
    elevation = math.degrees(math.asin(float(np.dot(los, up)) / d))
    range_rate = float(np.dot(los, sat.velocity_km_s)) / d  # km/s
    one_way_delay_ms = d / SPEED_OF_LIGHT_KM_S * 1000.0
    doppler_hz = -range_rate / SPEED_OF_LIGHT_KM_S * fc_hz
    delay_drift_us_s = range_rate / SPEED_OF_LIGHT_KM_S * 1e6
    return GeometrySample(
        elevation_deg=elevation,
        slant_range_km=d,
        one_way_delay_ms=one_way_delay_ms,
        range_rate_km_s=range_rate,
        doppler_hz=doppler_hz,
        delay_drift_us_s=delay_drift_us_s,
    )


def bent_pipe_rtt(service: GeometrySample, feeder: GeometrySample) -> float:
    """Round-trip time (ms) gateway -> satellite -> device and back."""
    if service.elevation_deg < 0 or feeder.elevation_deg < 0:
        raise DomainError("both links must be above the horizon")
    return 2.0 * (service.one_way_delay_ms + feeder.one_way_delay_ms)


def visibility_duration(
    orbit: OrbitSpec,
    ground: GroundPosition,
    min_elevation_deg: float,
    step_s: float = 1.0,
) -> float:
    """Longest contiguous above-threshold interval over one orbital period.

    Fixed-step numeric sweep; returns 0 if the satellite never rises above
    the threshold.
    """
    if not 0.0 < min_elevation_deg <= 90.0:
        raise DomainError("min_elevation must lie in (0, 90]")
    period = orbit.period_s()
    n_steps = int(math.ceil(period / step_s))
    best = 0
    run = 0
    for i in range(n_steps + 1):
        t = orbit.epoch_s + i * step_s
        sample = geometry_sample(propagate(orbit, t), ground, 1e9)
        if sample.elevation_deg >= min_elevation_deg:
            run += 1
            best = max(best, run)
        else:
            run = 0
    return best * step_s


def satellite_state_over(
    ground: GroundPosition,
    altitude_km: float,
    azimuth_deg: float = 0.0,
    t_s: float = 0.0,
    speed_km_s: float | None = None,
) -> SatelliteState:
    """Earth-fixed state of a satellite at the zenith of a ground point.

    The inertial velocity is horizontal with the given azimuth (0 = north,
    90 = east) and circular-orbit magnitude unless overridden; the returned
    velocity is earth-fixed.
    """
    r = EARTH_RADIUS_KM + altitude_km
    up = ground.unit_vector()
    pos = r * up
    if speed_km_s is None:
        speed_km_s = math.sqrt(MU_EARTH_KM3_S2 / r)
    north = np.array([0.0, 0.0, 1.0]) - up * up[2]
    nn = float(np.linalg.norm(north))
    if nn < 1e-12:
        north = np.array([1.0, 0.0, 0.0])  # pole: pick an arbitrary horizontal
        nn = 1.0
    north /= nn
    east = np.cross(np.array([0.0, 0.0, 1.0]), up)
    east /= float(np.linalg.norm(east)) or 1.0
    az = math.radians(azimuth_deg)
    v_in = speed_km_s * (math.cos(az) * north + math.sin(az) * east)
    omega_vec = np.array([0.0, 0.0, OMEGA_EARTH_RAD_S])
    v_ef = v_in - np.cross(omega_vec, pos)
    return SatelliteState(t_s=t_s, position_km=pos, velocity_km_s=v_ef)


def overhead_pass_orbit(
    kind: OrbitKind,
    altitude_km: float,
    inclination_deg: float,
    ground: GroundPosition,
    overhead_at_s: float,
    epoch_s: float = 0.0,
) -> OrbitSpec:
    """An orbit whose sub-satellite point crosses a near-equatorial ground
    point (peak elevation 90 degrees) at the requested time."""
    if abs(ground.latitude_deg) > 1e-6:
        raise DomainError("overhead pass construction requires an equatorial point")
    dt = overhead_at_s - epoch_s
    if dt < 0:
        raise DomainError("overhead time must not precede the epoch")
    probe = OrbitSpec(
        kind=kind,
        altitude_km=altitude_km,
        inclination_deg=inclination_deg,
        epoch_s=epoch_s,
    )
    n = probe.mean_motion_rad_s()
    # Put the ascending node over the ground point at overhead_at_s.
    raan = ground.longitude_deg + math.degrees(OMEGA_EARTH_RAD_S * dt)
    phase = -math.degrees(n * dt)
    return OrbitSpec(
        kind=kind,
        altitude_km=altitude_km,
        inclination_deg=inclination_deg,
        raan_deg=normalize_longitude(raan),
        phase_deg=phase % 360.0,
        epoch_s=epoch_s,
    )


def _tangent_basis(center: GroundPosition, along: np.ndarray | None) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal tangent basis at a ground point; first axis follows
    ``along`` projected into the tangent plane (east if degenerate)."""
    u0 = center.unit_vector()
    e1 = None
    if along is not None:
        horiz = along - u0 * float(np.dot(along, u0))
        norm = float(np.linalg.norm(horiz))
        if norm > 1e-9:
            e1 = horiz / norm
    if e1 is None:
        e1 = np.cross(np.array([0.0, 0.0, 1.0]), u0)
        norm = float(np.linalg.norm(e1))
        if norm < 1e-12:
            e1 = np.array([1.0, 0.0, 0.0])
        else:
            e1 /= norm
    e2 = np.cross(u0, e1)
    return e1, e2


def _ground_point_at(u: np.ndarray) -> GroundPosition:
    lat = math.degrees(math.asin(max(-1.0, min(1.0, float(u[2])))))
    lon = math.degrees(math.atan2(float(u[1]), float(u[0])))
    return GroundPosition(lat, lon)


def beam_doppler_profile(
    sat: SatelliteState, beam: BeamSpec, fc_hz: float, n: int
) -> list[tuple[float, float]]:
    """Doppler sampled along the ground-track direction across the beam."""
    if n < 3:
        raise DomainError("need at least three samples")
    u0 = beam.center.unit_vector()
    e1, _ = _tangent_basis(beam.center, sat.velocity_km_s)
    out = []
    for offset in np.linspace(-beam.diameter_km / 2.0, beam.diameter_km / 2.0, n):
        angle = offset / EARTH_RADIUS_KM
        u = u0 * math.cos(angle) + e1 * math.sin(angle)
        sample = geometry_sample(sat, _ground_point_at(u), fc_hz)
        out.append((float(offset), sample.doppler_hz))
    return out


def differential_delay(
    sat: SatelliteState, beam: BeamSpec, grid_n: int = 64
) -> float:
    """Max minus min one-way delay (ms) over the beam footprint.

    The footprint is a geodesic disc; raises if any point of it is below
    the horizon as seen from the satellite.
    """
    if grid_n < 2:
        raise DomainError("grid must be at least 2x2")
    radius = beam.diameter_km / 2.0
    if radius == 0.0:
        sample = geometry_sample(sat, beam.center, 1e9)
        if sample.elevation_deg < 0:
            raise DomainError("beam center below the horizon")
        return 0.0
    u0 = beam.center.unit_vector()
    e1, e2 = _tangent_basis(beam.center, sat.velocity_km_s)
    xs = np.linspace(-radius, radius, grid_n)
    delays = []
    for x in xs:
        for y in xs:
            if x * x + y * y > radius * radius:
                continue
            s = math.hypot(x, y)
            angle = s / EARTH_RADIUS_KM
            if s > 0:
                direction = (e1 * x + e2 * y) / s
            else:
                direction = e1
            u = u0 * math.cos(angle) + direction * math.sin(angle)
            sample = geometry_sample(sat, _ground_point_at(u), 1e9)
            if sample.elevation_deg < 0:
                raise DomainError("beam footprint extends below the horizon")
            delays.append(sample.one_way_delay_ms)
    return max(delays) - min(delays)
