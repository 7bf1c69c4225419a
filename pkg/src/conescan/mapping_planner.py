"""Cylinder fit and stacked-circle scan planning for close-range mapping.

The converged cloud is wrapped in a vertical cylinder; orbit circles are
stacked so the vertical scan band (the cone between the steep and shallow
scanning rays) tiles the cylinder wall from bottom to top. A frustum-coverage
check over the planned waypoints stands in for the downstream dense mapper.
"""

import math
from dataclasses import dataclass

import numpy as np

from .geometry import CameraRig, bearing
from .localizer import ParticleSet
from .view_planner import Waypoint

MIN_CYLINDER_RADIUS = 0.1


@dataclass(frozen=True)
class Cylinder:
    axis_xy: np.ndarray
    z_bottom: float
    z_top: float
    radius: float
    degenerate: bool = False  # zero vertical extent

    def __post_init__(self):
        object.__setattr__(
            self, "axis_xy", np.asarray(self.axis_xy, dtype=float).reshape(2)
        )
        if self.z_bottom > self.z_top:
            raise ValueError("z_bottom must not exceed z_top")
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    @property
    def height(self) -> float:
        return self.z_top - self.z_bottom


@dataclass(frozen=True)
class ScanCircle:
    center: np.ndarray  # on the cylinder axis, z = orbit altitude
    radius: float

    def __post_init__(self):
        object.__setattr__(
            self, "center", np.asarray(self.center, dtype=float).reshape(3)
        )

    @property
    def altitude(self) -> float:
        return float(self.center[2])


@dataclass(frozen=True)
class ScanPlan:
    circles: list
    waypoints: list  # one waypoint list per circle
    gamma_low: float  # steep ray, covers the bottom edge of each band
    gamma_high: float  # shallow ray, covers the top edge

    def all_waypoints(self):
        return [wp for circle_wps in self.waypoints for wp in circle_wps]


def fit_cylinder(ps: ParticleSet) -> Cylinder:
    """Smallest vertical cylinder containing the cloud, axis through the mean."""
    pts = ps.points
    if len(pts) < 2:
        raise ValueError("need at least 2 points")
    axis = pts[:, :2].mean(axis=0)
    radial = np.linalg.norm(pts[:, :2] - axis, axis=1)
    z_bottom, z_top = float(pts[:, 2].min()), float(pts[:, 2].max())
    spread = float(radial.max()) + (z_top - z_bottom)
    if spread < 1e-12:
        raise ValueError("points are all coincident")
    return Cylinder(
        axis_xy=axis,
        z_bottom=z_bottom,
        z_top=z_top,
        radius=max(float(radial.max()), MIN_CYLINDER_RADIUS),
        degenerate=(z_top - z_bottom) < 1e-12,
    )


def scan_band(altitude: float, horizontal_dist: float, gamma: float, beta: float):
    """Vertical wall interval covered from one altitude at one horizontal distance."""
    return (
        altitude - horizontal_dist * math.tan(gamma + beta / 2.0),
        altitude - horizontal_dist * math.tan(gamma - beta / 2.0),
    )


def scan_circles(
    cyl: Cylinder, cam: CameraRig, standoff: float, n_per_circle: int = 36
) -> ScanPlan:
    """Stack orbit circles so the scan bands tile the cylinder wall.

    Band geometry is evaluated at the near surface (horizontal distance =
    standoff), which is conservative. The first circle's band bottom sits
    exactly at the cylinder bottom; circles step up by the band height until
    the top is reached.
    """
    if standoff <= 0:
        raise ValueError("standoff must be positive")
    gamma, beta = cam.gamma, cam.beta
    if gamma - beta / 2.0 <= 0:
        raise ValueError(
            "mapping geometry requires gamma > beta/2 so the shallow ray still "
            "points downward"
        )
    tan_steep = math.tan(gamma + beta / 2.0)
    tan_shallow = math.tan(gamma - beta / 2.0)
    band_height = standoff * (tan_steep - tan_shallow)
    height = cyl.height
    n_circles = max(1, math.ceil(height / band_height - 1e-9))

    orbit_radius = cyl.radius + standoff
    first_altitude = cyl.z_bottom + standoff * tan_steep
    circles = []
    waypoint_lists = []
    for k in range(n_circles):
        altitude = first_altitude + k * band_height
        circle = ScanCircle(
            center=np.array([cyl.axis_xy[0], cyl.axis_xy[1], altitude]),
            radius=orbit_radius,
        )
        circles.append(circle)
        waypoint_lists.append(circle_waypoints(circle, n_per_circle, cyl.axis_xy))
    return ScanPlan(
        circles=circles,
        waypoints=waypoint_lists,
        gamma_low=gamma + beta / 2.0,
        gamma_high=gamma - beta / 2.0,
    )


def circle_waypoints(circle: ScanCircle, n_per_circle: int, axis_xy) -> list:
    """Equally spaced orbit waypoints, yaw locked on the cylinder axis.

    All circles start at azimuth zero so consecutive circles join at a matching
    azimuth with a straight vertical transit.
    """
    if n_per_circle < 4:
        raise ValueError("need at least 4 waypoints per circle")
    axis = np.asarray(axis_xy, dtype=float).reshape(2)
    wps = []
    for i in range(n_per_circle):
        az = 2.0 * math.pi * i / n_per_circle
        pos = circle.center + circle.radius * np.array(
            [math.cos(az), math.sin(az), 0.0]
        )
        wps.append(Waypoint(pos, bearing(pos[:2], axis)))
    return wps


def coverage_samples(
    plan: ScanPlan, cam: CameraRig, cyl: Cylinder, n_surface_samples: int
):
    """Uniform wall samples plus a per-sample covered mask for the plan.

    A wall sample counts as covered when some waypoint sees it inside the
    vertical scan band and the horizontal field of view, with the cylinder not
    occluding it (outward wall normal facing the waypoint).
    """
    if n_surface_samples < 1:
        raise ValueError("need at least one surface sample")
    height = max(cyl.height, 1e-6)
    circumference = 2.0 * math.pi * cyl.radius
    n_az = int(np.clip(round(math.sqrt(n_surface_samples * circumference / height)),
                       8, n_surface_samples))
    n_z = max(1, round(n_surface_samples / n_az))
    az = 2.0 * math.pi * (np.arange(n_az) + 0.5) / n_az
    zs = cyl.z_bottom + height * (np.arange(n_z) + 0.5) / n_z
    az_grid, z_grid = np.meshgrid(az, zs, indexing="ij")
    sx = cyl.axis_xy[0] + cyl.radius * np.cos(az_grid).ravel()
    sy = cyl.axis_xy[1] + cyl.radius * np.sin(az_grid).ravel()
    sz = z_grid.ravel()
    samples = np.column_stack([sx, sy, sz])

    waypoints = plan.all_waypoints() if plan is not None else []
    covered = np.zeros(sx.shape, dtype=bool)
    half_hfov = cam.hfov / 2.0
    for wp in waypoints:
        qx, qy, qz = wp.position
        dx, dy = sx - qx, sy - qy
        dist_h = np.hypot(dx, dy)
        depression = np.arctan2(qz - sz, dist_h)
        in_band = (depression >= plan.gamma_high) & (depression <= plan.gamma_low)
        rel_bearing = np.arctan2(dy, dx) - wp.yaw
        rel_bearing = (rel_bearing + math.pi) % (2.0 * math.pi) - math.pi
        in_fov = np.abs(rel_bearing) <= half_hfov
        normal_x, normal_y = sx - cyl.axis_xy[0], sy - cyl.axis_xy[1]
        facing = normal_x * (qx - sx) + normal_y * (qy - sy) > 0
        covered |= in_band & in_fov & facing
        if covered.all():
            break
    return samples, covered


def coverage_check(
    plan: ScanPlan, cam: CameraRig, cyl: Cylinder, n_surface_samples: int
) -> float:
    """Fraction of the cylinder wall seen by at least one planned waypoint."""
    if plan is None or not plan.all_waypoints():
        return 0.0
    _, covered = coverage_samples(plan, cam, cyl, n_surface_samples)
    return float(covered.mean())


def mapping_path(plan: ScanPlan, start_position) -> list:
    """Flyable waypoint sequence: descend onto the first circle, orbit, step up.

    Each circle is closed back to its entry azimuth; circles are joined by a
    vertical transit at the shared azimuth. The approach inserts a waypoint
    above the first orbit point at the start altitude.
    """
    if not plan.circles:
        return []
    first = plan.waypoints[0][0]
    start = np.asarray(start_position, dtype=float)
    path = []
    if start[2] > first.position[2]:
        above = np.array([first.position[0], first.position[1], start[2]])
        path.append(Waypoint(above, first.yaw))
    for wps in plan.waypoints:
        path.extend(wps)
        path.append(wps[0])  # close the orbit before transiting upward
    return path
