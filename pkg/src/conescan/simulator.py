"""Deterministic synthetic world: UAV kinematics, noisy detector, feature tracker.

Everything the estimation stack would get from real hardware is generated
here from ground truth plus explicit, seeded noise. Targets are axis-aligned
boxes carrying surface feature points so the detector sees an exact projected
bounding box and the feature tracker sees real correspondences.
"""

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .geometry import (
    BBox,
    CameraRig,
    PoseSE3,
    camera_to_world_pose,
    project_points,
    wrap_angle,
)

REACHED_POSITION_TOL = 0.2  # m
REACHED_YAW_TOL = 0.05  # rad


def substream(seed: int, *key) -> np.random.Generator:
    """Named, order-independent RNG substream of one scenario seed."""
    parts = [int(seed) & 0xFFFFFFFF]
    for item in key:
        if isinstance(item, str):
            digest = hashlib.sha256(item.encode()).digest()
            parts.append(int.from_bytes(digest[:8], "little"))
        else:
            parts.append(int(item) & 0xFFFFFFFFFFFFFFFF)
    return np.random.default_rng(np.random.SeedSequence(parts))


@dataclass(frozen=True)
class TargetTruth:
    id: int
    center: np.ndarray
    half_extents: np.ndarray
    features: np.ndarray  # (k, 3) surface points

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        object.__setattr__(
            self, "half_extents", np.asarray(self.half_extents, dtype=float)
        )
        object.__setattr__(self, "features", np.asarray(self.features, dtype=float))
        if np.any(self.half_extents <= 0):
            raise ValueError("half_extents must be positive")

    def corners(self) -> np.ndarray:
        signs = np.array(
            [[sx, sy, sz] for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)],
            dtype=float,
        )
        return self.center + signs * self.half_extents


def make_target(
    target_id: int, center, half_extents, n_features: int, rng: np.random.Generator
) -> TargetTruth:
    """Target box with feature points scattered over its surface."""
    center = np.asarray(center, dtype=float)
    half = np.asarray(half_extents, dtype=float)
    areas = np.array([half[1] * half[2], half[0] * half[2], half[0] * half[1]])
    probs = np.repeat(areas / areas.sum() / 2.0, 2)
    faces = rng.choice(6, size=n_features, p=probs)
    pts = rng.uniform(-1.0, 1.0, size=(n_features, 3))
    for i, f in enumerate(faces):
        pts[i, f // 2] = 1.0 if f % 2 else -1.0
    return TargetTruth(target_id, center, half, center + pts * half)


@dataclass
class NoiseModel:
    pose_sigma_xyz: float = 0.2
    yaw_sigma: float = 0.01
    detector_pixel_sigma: float = 2.0
    detect_prob: float = 0.95
    false_positive_rate: float = 0.05  # expected spurious boxes per frame
    detection_latency_frames: int = 0  # frames between capture and delivery
    klt_pixel_sigma: float = 1.0
    seed: int = 0

    def __post_init__(self):
        for name in ("pose_sigma_xyz", "yaw_sigma", "detector_pixel_sigma",
                     "klt_pixel_sigma", "false_positive_rate"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if not 0 <= self.detect_prob <= 1:
            raise ValueError("detect_prob must lie in [0, 1]")
        if self.detection_latency_frames < 0:
            raise ValueError("detection_latency_frames must be non-negative")


class DetectionDelay:
    """FIFO that delivers each frame's detections a fixed number of frames late.

    Zero latency passes frames straight through. Late frames come out in
    capture order; the first `latency` frames deliver empty lists.
    """

    def __init__(self, latency_frames: int):
        if latency_frames < 0:
            raise ValueError("latency must be non-negative")
        self.latency = int(latency_frames)
        self._queue = []

    def push(self, detections):
        if self.latency == 0:
            return list(detections)
        self._queue.append(list(detections))
        if len(self._queue) > self.latency:
            return self._queue.pop(0)
        return []


@dataclass
class UavState:
    position: np.ndarray
    yaw: float
    velocity: np.ndarray
    est_position: np.ndarray = None
    est_yaw: float = None

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float)
        self.velocity = np.asarray(self.velocity, dtype=float)
        if self.est_position is None:
            self.est_position = self.position.copy()
        if self.est_yaw is None:
            self.est_yaw = self.yaw

    def camera_to_world(self, cam: CameraRig) -> PoseSE3:
        return camera_to_world_pose(self.position, self.yaw, cam.gamma)

    def est_camera_to_world(self, cam: CameraRig) -> PoseSE3:
        return camera_to_world_pose(self.est_position, self.est_yaw, cam.gamma)


class _Leg:
    """Analytic trapezoidal move between two poses, yaw slewed at bounded rate."""

    def __init__(self, p0, yaw0, p1, yaw1, v0, v_max, a_max, yaw_rate):
        self.p0 = np.asarray(p0, dtype=float)
        self.p1 = np.asarray(p1, dtype=float)
        self.yaw0 = yaw0
        self.dyaw = wrap_angle(yaw1 - yaw0)
        self.length = float(np.linalg.norm(self.p1 - self.p0))
        self.direction = (
            (self.p1 - self.p0) / self.length if self.length > 0 else np.zeros(3)
        )
        self.a = a_max
        self.v0 = min(v0, v_max)
        if self.length > 0:
            # accelerate from v0, cruise at v_peak, decelerate to rest
            v_peak = min(v_max, math.sqrt(self.a * self.length + 0.5 * self.v0**2))
            v_peak = max(v_peak, self.v0)
            self.t_acc = (v_peak - self.v0) / self.a
            d_acc = self.v0 * self.t_acc + 0.5 * self.a * self.t_acc**2
            self.t_dec = v_peak / self.a
            d_dec = 0.5 * self.a * self.t_dec**2
            d_cruise = max(0.0, self.length - d_acc - d_dec)
            self.t_cruise = d_cruise / v_peak
            self.v_peak = v_peak
            self.t_move = self.t_acc + self.t_cruise + self.t_dec
        else:
            self.v_peak = 0.0
            self.t_acc = self.t_cruise = self.t_dec = self.t_move = 0.0
        self.t_yaw = abs(self.dyaw) / yaw_rate if yaw_rate > 0 else 0.0
        self.duration = max(self.t_move, self.t_yaw)
        self.yaw_rate = yaw_rate

    def sample(self, t: float):
        """Position, yaw and speed at leg time t (clamped to the duration)."""
        t = min(max(t, 0.0), self.duration)
        tm = min(t, self.t_move)
        if self.length == 0:
            dist, speed = 0.0, 0.0
        elif tm < self.t_acc:
            dist = self.v0 * tm + 0.5 * self.a * tm**2
            speed = self.v0 + self.a * tm
        elif tm < self.t_acc + self.t_cruise:
            dt = tm - self.t_acc
            dist = self.v0 * self.t_acc + 0.5 * self.a * self.t_acc**2 + self.v_peak * dt
            speed = self.v_peak
        else:
            remaining = self.t_move - tm
            dist = self.length - 0.5 * self.a * remaining**2
            speed = self.a * remaining
        if tm >= self.t_move:
            dist, speed = self.length, 0.0
        ty = min(t, self.t_yaw)
        yaw = self.yaw0 + math.copysign(self.yaw_rate * ty, self.dyaw)
        if ty >= self.t_yaw:
            yaw = self.yaw0 + self.dyaw
        return self.p0 + dist * self.direction, wrap_angle(yaw), speed


class WaypointFollower:
    """Deterministic waypoint playback under velocity/acceleration limits."""

    def __init__(self, position, yaw, v_max: float, a_max: float, yaw_rate: float = 1.5):
        if v_max <= 0 or a_max <= 0 or yaw_rate <= 0:
            raise ValueError("kinematic limits must be positive")
        self.position = np.asarray(position, dtype=float)
        self.yaw = wrap_angle(yaw)
        self.velocity = np.zeros(3)
        self.v_max = v_max
        self.a_max = a_max
        self.yaw_rate = yaw_rate
        self._legs = []
        self._leg_t = 0.0
        self._reached = 0  # waypoints of the current path fully reached

    @property
    def done(self) -> bool:
        return not self._legs

    @property
    def waypoints_reached(self) -> int:
        return self._reached

    def set_path(self, waypoints):
        """Replace the goal queue; a moving vehicle first brakes to rest."""
        self._legs = []
        self._leg_t = 0.0
        self._reached = 0
        pos, yaw = self.position.copy(), self.yaw
        speed = float(np.linalg.norm(self.velocity))
        if speed > 1e-9:
            heading = self.velocity / speed
            brake = pos + heading * speed**2 / (2.0 * self.a_max)
            leg = _Leg(pos, yaw, brake, yaw, speed, self.v_max, self.a_max, self.yaw_rate)
            leg.counts_waypoint = False
            self._legs.append(leg)
            pos = brake
        for wp in waypoints:
            leg = _Leg(pos, yaw, wp.position, wp.yaw, 0.0, self.v_max, self.a_max,
                       self.yaw_rate)
            leg.counts_waypoint = True
            self._legs.append(leg)
            pos, yaw = wp.position, wp.yaw
        # drop zero-duration legs so `done` flips promptly
        kept = []
        for leg in self._legs:
            if leg.duration > 0:
                kept.append(leg)
            elif getattr(leg, "counts_waypoint", False):
                self._reached += 1
        self._legs = kept

    def step(self, dt: float):
        """Advance sim time by dt; returns (position, yaw, velocity)."""
        remaining = dt
        while self._legs and remaining > 0:
            leg = self._legs[0]
            advance = min(remaining, leg.duration - self._leg_t)
            self._leg_t += advance
            remaining -= advance
            pos, yaw, speed = leg.sample(self._leg_t)
            self.position, self.yaw = pos, yaw
            self.velocity = speed * leg.direction
            if leg.duration - self._leg_t <= 1e-12:
                self._legs.pop(0)
                self._leg_t = 0.0
                if getattr(leg, "counts_waypoint", False):
                    self._reached += 1
                self.velocity = np.zeros(3)
        return self.position.copy(), self.yaw, self.velocity.copy()


def follow_waypoints(state: UavState, waypoints, v_max, a_max, dt, yaw_rate=1.5):
    """Yield one UavState per tick until the final waypoint is reached."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    follower = WaypointFollower(state.position, state.yaw, v_max, a_max, yaw_rate)
    follower.set_path(waypoints)
    while not follower.done:
        pos, yaw, vel = follower.step(dt)
        yield UavState(position=pos, yaw=yaw, velocity=vel)


def reached(state: UavState, wp) -> bool:
    return (
        np.linalg.norm(state.position - wp.position) < REACHED_POSITION_TOL
        and abs(wrap_angle(state.yaw - wp.yaw)) < REACHED_YAW_TOL
    )


def simulate_detector(targets, world_to_cam: PoseSE3, cam: CameraRig,
                      noise: NoiseModel, rng: np.random.Generator):
    """Noisy detections: perturbed true boxes plus Poisson false positives."""
    detections = []
    for tg in targets:
        center_pix, center_depth = project_points(tg.center, world_to_cam, cam)
        if center_depth[0] <= 0:
            continue
        u, v = center_pix[0]
        if not (0 <= u < cam.width and 0 <= v < cam.height):
            continue
        if rng.uniform() >= noise.detect_prob:
            continue
        pix, depth = project_points(tg.corners(), world_to_cam, cam)
        if np.any(depth <= 0):
            continue
        coords = np.array(
            [pix[:, 0].min(), pix[:, 1].min(), pix[:, 0].max(), pix[:, 1].max()]
        )
        coords += noise.detector_pixel_sigma * rng.standard_normal(4)
        u_min = float(np.clip(coords[0], 0, cam.width))
        v_min = float(np.clip(coords[1], 0, cam.height))
        u_max = float(np.clip(coords[2], 0, cam.width))
        v_max = float(np.clip(coords[3], 0, cam.height))
        if u_min < u_max and v_min < v_max:
            detections.append(BBox(u_min, v_min, u_max, v_max))

    for _ in range(rng.poisson(noise.false_positive_rate)):
        cu = rng.uniform(0, cam.width)
        cv = rng.uniform(0, cam.height)
        w = rng.uniform(10, 60)
        h = rng.uniform(10, 60)
        u_min = float(np.clip(cu - w / 2, 0, cam.width))
        v_min = float(np.clip(cv - h / 2, 0, cam.height))
        u_max = float(np.clip(cu + w / 2, 0, cam.width))
        v_max = float(np.clip(cv + h / 2, 0, cam.height))
        if u_min < u_max and v_min < v_max:
            detections.append(BBox(u_min, v_min, u_max, v_max))
    return detections


def simulate_klt(target: TargetTruth, world_to_cam_prev: PoseSE3,
                 world_to_cam_curr: PoseSE3, cam: CameraRig,
                 noise: NoiseModel, rng: np.random.Generator):
    """Noisy pixel correspondences of the target's surface features.

    Returns (prev_pixels, curr_pixels) for features visible at both poses, or
    None when fewer than 4 are covisible.
    """
    prev_pix, prev_depth = project_points(target.features, world_to_cam_prev, cam)
    curr_pix, curr_depth = project_points(target.features, world_to_cam_curr, cam)

    def visible(pix, depth):
        return (
            (depth > 0)
            & (pix[:, 0] >= 0) & (pix[:, 0] < cam.width)
            & (pix[:, 1] >= 0) & (pix[:, 1] < cam.height)
        )

    keep = visible(prev_pix, prev_depth) & visible(curr_pix, curr_depth)
    if keep.sum() < 4:
        return None
    prev = prev_pix[keep] + noise.klt_pixel_sigma * rng.standard_normal((keep.sum(), 2))
    curr = curr_pix[keep] + noise.klt_pixel_sigma * rng.standard_normal((keep.sum(), 2))
    return prev, curr


def perturb_pose(pose: PoseSE3, noise: NoiseModel, rng: np.random.Generator) -> PoseSE3:
    """Noisy state-estimator stand-in: jitter translation and world yaw only."""
    t = pose.translation + noise.pose_sigma_xyz * rng.standard_normal(3)
    dyaw = noise.yaw_sigma * rng.standard_normal()
    c, s = math.cos(dyaw), math.sin(dyaw)
    rz = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    return PoseSE3(rz @ pose.rotation, t)
