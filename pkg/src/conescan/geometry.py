"""Pinhole camera model, SE(3) poses, bounding boxes and back-projected cones.

Conventions: camera frame is z forward, x right (image u), y down (image v);
world frame is z up. Pixels are continuous reals, never quantized here.
"""

import math
from dataclasses import dataclass

import numpy as np


class BehindCameraError(ValueError):
    """A point with non-positive camera-frame depth was projected."""


class DegenerateConeError(ValueError):
    """Bounding-box corners do not span a proper four-face cone."""


def wrap_angle(a: float) -> float:
    """Normalize an angle to (-pi, pi]."""
    w = (a + math.pi) % (2.0 * math.pi) - math.pi
    return math.pi if w == -math.pi else w


@dataclass(frozen=True)
class PoseSE3:
    """Rigid transform x_out = rotation @ x_in + translation."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        rot = np.asarray(self.rotation, dtype=float)
        tra = np.asarray(self.translation, dtype=float).reshape(3)
        if rot.shape != (3, 3):
            raise ValueError("rotation must be a 3x3 matrix")
        if not np.allclose(rot @ rot.T, np.eye(3), atol=1e-9):
            raise ValueError("rotation must be orthonormal")
        if abs(np.linalg.det(rot) - 1.0) > 1e-9:
            raise ValueError("rotation must have determinant +1")
        object.__setattr__(self, "rotation", rot)
        object.__setattr__(self, "translation", tra)

    @staticmethod
    def identity() -> "PoseSE3":
        return PoseSE3(np.eye(3), np.zeros(3))

    def compose(self, other: "PoseSE3") -> "PoseSE3":
        """self after other: (self.compose(other)).apply(x) == self.apply(other.apply(x))."""
        return PoseSE3(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def inverse(self) -> "PoseSE3":
        return PoseSE3(self.rotation.T, -self.rotation.T @ self.translation)

    def apply(self, points):
        """Transform a (3,) point or an (n, 3) array of points."""
        pts = np.asarray(points, dtype=float)
        return pts @ self.rotation.T + self.translation

    def matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m


@dataclass(frozen=True)
class CameraRig:
    """Pinhole intrinsics plus mount depression and vertical scan angles.

    gamma is the depression of the optical axis below horizontal; beta is the
    vertical scanning angle used by the mapping planner and must fit strictly
    inside the vertical field of view.
    """

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int
    gamma: float
    beta: float

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if not 0 < self.gamma < math.pi / 2:
            raise ValueError("gamma must lie in (0, pi/2)")
        if not 0 < self.beta < math.pi:
            raise ValueError("beta must lie in (0, pi)")
        if self.beta >= self.vfov:
            raise ValueError("beta must be strictly smaller than the vertical FOV")

    @property
    def vfov(self) -> float:
        return 2.0 * math.atan(self.height / (2.0 * self.fy))

    @property
    def hfov(self) -> float:
        return 2.0 * math.atan(self.width / (2.0 * self.fx))

    @property
    def K(self) -> np.ndarray:
        return np.array(
            [[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]]
        )

    @property
    def K_inv(self) -> np.ndarray:
        return np.array(
            [
                [1.0 / self.fx, 0.0, -self.cx / self.fx],
                [0.0, 1.0 / self.fy, -self.cy / self.fy],
                [0.0, 0.0, 1.0],
            ]
        )


@dataclass(frozen=True)
class BBox:
    """Axis-aligned pixel bounding box, corners as Euclidean coordinates."""

    u_min: float
    v_min: float
    u_max: float
    v_max: float

    def __post_init__(self):
        if not (self.u_min < self.u_max and self.v_min < self.v_max):
            raise ValueError("box must satisfy u_min < u_max and v_min < v_max")

    @property
    def center(self) -> np.ndarray:
        return np.array(
            [(self.u_min + self.u_max) / 2.0, (self.v_min + self.v_max) / 2.0]
        )

    @property
    def width(self) -> float:
        return self.u_max - self.u_min

    @property
    def height(self) -> float:
        return self.v_max - self.v_min

    @property
    def area(self) -> float:
        return self.width * self.height

    def corners_clockwise(self) -> np.ndarray:
        """Corners in clockwise image order (v down): TL, TR, BR, BL."""
        return np.array(
            [
                [self.u_min, self.v_min],
                [self.u_max, self.v_min],
                [self.u_max, self.v_max],
                [self.u_min, self.v_max],
            ]
        )

    def as_array(self) -> np.ndarray:
        return np.array([self.u_min, self.v_min, self.u_max, self.v_max])


def to_homogeneous(box: BBox) -> np.ndarray:
    """Lift box corners to the stacked homogeneous 6-vector."""
    return np.array([box.u_min, box.v_min, 1.0, box.u_max, box.v_max, 1.0])


def to_euclidean(x) -> BBox:
    """Drop the homogeneous entries of a stacked 6-vector back to a box."""
    x = np.asarray(x, dtype=float).reshape(6)
    if abs(x[2] - 1.0) > 1e-6 or abs(x[5] - 1.0) > 1e-6:
        raise ValueError("homogeneous entries must equal 1")
    return BBox(x[0], x[1], x[3], x[4])


def project(point, world_to_cam: PoseSE3, cam: CameraRig):
    """Project a world point; returns (pixel, depth). Raises behind the camera."""
    p_cam = world_to_cam.apply(np.asarray(point, dtype=float))
    z = p_cam[2]
    if z <= 0:
        raise BehindCameraError(f"point has camera-frame depth {z:.6g} <= 0")
    pix = np.array([cam.fx * p_cam[0] / z + cam.cx, cam.fy * p_cam[1] / z + cam.cy])
    return pix, z


def project_points(points, world_to_cam: PoseSE3, cam: CameraRig):
    """Vectorized projection of (n, 3) world points.

    Returns (pixels (n, 2), depths (n,)). Rows with depth <= 0 carry meaningless
    pixels; callers must mask on depth.
    """
    p_cam = world_to_cam.apply(np.atleast_2d(points))
    z = p_cam[:, 2]
    safe_z = np.where(np.abs(z) < 1e-300, 1e-300, z)
    pix = np.column_stack(
        [cam.fx * p_cam[:, 0] / safe_z + cam.cx, cam.fy * p_cam[:, 1] / safe_z + cam.cy]
    )
    return pix, z


def back_project_direction(pixel, cam: CameraRig) -> np.ndarray:
    """Camera-frame ray direction K^-1 (u, v, 1); unit depth component."""
    u, v = float(pixel[0]), float(pixel[1])
    return np.array([(u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy, 1.0])


def cone_normals(corners, cam: CameraRig) -> np.ndarray:
    """Inward normals of the four cone faces back-projected from box corners.

    Corners must be in clockwise image order; each face passes through the
    camera origin so membership reduces to sign tests.
    """
    corners = np.asarray(corners, dtype=float)
    if corners.shape != (4, 2):
        raise ValueError("expected 4 pixel corners")
    dirs = np.column_stack(
        [back_project_direction(corners[i], cam) for i in range(4)]
    )  # 3x4
    normals = np.empty((4, 3))
    for i in range(4):
        normals[i] = np.cross(dirs[:, i], dirs[:, (i + 1) % 4])
    if np.any(np.linalg.norm(normals, axis=1) < 1e-12):
        raise DegenerateConeError("zero-area bounding box")
    return normals


def in_cone(normals: np.ndarray, point) -> bool:
    """Strict four-face membership test for one camera-frame point."""
    return bool(np.all(normals @ np.asarray(point, dtype=float) > 0.0))


def cone_contains(normals: np.ndarray, points) -> np.ndarray:
    """Strict membership mask for (n, 3) camera-frame points."""
    pts = np.atleast_2d(points)
    return np.all(pts @ normals.T > 0.0, axis=1)


def camera_to_world_pose(position, yaw: float, depression: float) -> PoseSE3:
    """Camera pose from a hovering body: heading yaw, optical axis depressed.

    Returns the camera->world transform; the rotation columns are the camera
    x (image right), y (image down) and z (optical axis) axes in world frame.
    """
    cy, sy = math.cos(yaw), math.sin(yaw)
    cg, sg = math.cos(depression), math.sin(depression)
    x_axis = np.array([sy, -cy, 0.0])
    z_axis = np.array([cg * cy, cg * sy, -sg])
    y_axis = np.cross(z_axis, x_axis)
    rot = np.column_stack([x_axis, y_axis, z_axis])
    return PoseSE3(rot, np.asarray(position, dtype=float))


def bearing(from_xy, to_xy) -> float:
    """Horizontal bearing angle from one point to another."""
    return math.atan2(to_xy[1] - from_xy[1], to_xy[0] - from_xy[0])
