"""Kalman bounding-box tracking fusing similarity-transform prediction with detections.

The filter state is the four box coordinates; prediction happens in stacked
2D-homogeneous coordinates so a single image similarity moves both corners,
while updates happen in Euclidean coordinates where the covariance is
invertible.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import BBox, to_euclidean

ACTIVE = "active"
DEREGISTERED = "deregistered"

# Lift u -> (u_min, v_min, 1, u_max, v_max, 1) and drop back.
_HOM_LIFT = np.array(
    [
        [1, 0, 0, 0],
        [0, 1, 0, 0],
        [0, 0, 0, 0],
        [0, 0, 1, 0],
        [0, 0, 0, 1],
        [0, 0, 0, 0],
    ],
    dtype=float,
)
_HOM_OFFSET = np.array([0, 0, 1, 0, 0, 1], dtype=float)
_HOM_DROP = np.array(
    [
        [1, 0, 0, 0, 0, 0],
        [0, 1, 0, 0, 0, 0],
        [0, 0, 0, 1, 0, 0],
        [0, 0, 0, 0, 1, 0],
    ],
    dtype=float,
)


class SimilarityEstimationError(ValueError):
    """Too few or degenerate correspondences for a similarity fit."""


@dataclass(frozen=True)
class SimilarityTransform2D:
    """Uniform scale + rotation + translation in 2D homogeneous form."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (3, 3):
            raise ValueError("similarity matrix must be 3x3")
        if not np.all(np.isfinite(m)):
            raise ValueError("similarity matrix must be finite")
        if not np.allclose(m[2], [0.0, 0.0, 1.0], atol=1e-9):
            raise ValueError("bottom row must be (0, 0, 1)")
        block = m[:2, :2]
        if np.linalg.det(block) <= 0:
            raise ValueError("linear block must preserve orientation")
        gram = block.T @ block
        s2 = gram[0, 0]
        if not np.allclose(gram, s2 * np.eye(2), atol=1e-9 * max(1.0, s2)):
            raise ValueError("linear block must be a uniform scale times a rotation")
        object.__setattr__(self, "matrix", m)

    @staticmethod
    def identity() -> "SimilarityTransform2D":
        return SimilarityTransform2D(np.eye(3))

    @staticmethod
    def from_params(scale: float, theta: float, tx: float, ty: float):
        if scale <= 0:
            raise ValueError("scale must be positive")
        c, s = math.cos(theta), math.sin(theta)
        m = np.array(
            [[scale * c, -scale * s, tx], [scale * s, scale * c, ty], [0, 0, 1.0]]
        )
        return SimilarityTransform2D(m)

    @property
    def scale(self) -> float:
        return float(np.linalg.norm(self.matrix[:2, 0]))

    @property
    def theta(self) -> float:
        return float(math.atan2(self.matrix[1, 0], self.matrix[0, 0]))

    @property
    def translation(self) -> np.ndarray:
        return self.matrix[:2, 2].copy()


@dataclass(frozen=True)
class TrackerConfig:
    predict_noise_px: float = 2.0
    measure_noise_px: float = 4.0
    iou_register_threshold: float = 0.3
    entropy_dereg_threshold: float = 19.0
    initial_sigma: np.ndarray = None

    def __post_init__(self):
        if self.predict_noise_px <= 0 or self.measure_noise_px <= 0:
            raise ValueError("noise stds must be positive")
        if not 0 < self.iou_register_threshold < 1:
            raise ValueError("iou_register_threshold must lie in (0, 1)")
        if self.initial_sigma is None:
            sig = self.measure_noise_px**2 * np.eye(4)
        else:
            sig = np.asarray(self.initial_sigma, dtype=float)
            if sig.shape != (4, 4):
                raise ValueError("initial_sigma must be 4x4")
        object.__setattr__(self, "initial_sigma", sig)


@dataclass(frozen=True)
class BoxTrack:
    id: int
    u: BBox
    sigma: np.ndarray
    last_update_frame: int = 0
    status: str = ACTIVE
    spawn_frame: int = 0
    hits: int = 0
    dereg_reason: str = ""
    dereg_frame: int = None


def predict(
    track: BoxTrack,
    sim: SimilarityTransform2D,
    cfg: TrackerConfig,
    noise_scale: float = 1.0,
) -> BoxTrack:
    """Propagate state and covariance through the per-frame image similarity.

    State moves through homogeneous coordinates; the covariance is propagated
    by congruence (lift, motion, drop) plus the process noise, which keeps it
    symmetric PSD. noise_scale inflates the process noise when the similarity
    is a fallback identity.
    """
    motion = np.zeros((6, 6))
    motion[:3, :3] = sim.matrix
    motion[3:, 3:] = sim.matrix
    e2 = cfg.predict_noise_px**2 * noise_scale
    process_cov = np.diag([e2, e2, 0.0, e2, e2, 0.0])

    x = _HOM_LIFT @ track.u.as_array() + _HOM_OFFSET
    omega = _HOM_LIFT @ track.sigma @ _HOM_LIFT.T
    x_pred = motion @ x
    omega_pred = motion @ omega @ motion.T + process_cov
    u_pred = to_euclidean(x_pred)
    sigma_pred = _HOM_DROP @ omega_pred @ _HOM_DROP.T
    sigma_pred = 0.5 * (sigma_pred + sigma_pred.T)
    return replace(track, u=u_pred, sigma=sigma_pred)


def update(track: BoxTrack, z: BBox, cfg: TrackerConfig) -> BoxTrack:
    """Kalman measurement update with an identity observation model."""
    meas = z.as_array()
    if not np.all(np.isfinite(meas)):
        raise ValueError("measurement must be finite")
    measure_cov = cfg.measure_noise_px**2 * np.eye(4)
    gain = track.sigma @ np.linalg.inv(track.sigma + measure_cov)
    u_new = track.u.as_array() + gain @ (meas - track.u.as_array())
    sigma_new = (np.eye(4) - gain) @ track.sigma
    sigma_new = 0.5 * (sigma_new + sigma_new.T)
    return replace(track, u=BBox(*u_new), sigma=sigma_new)


def iou(a: BBox, b: BBox) -> float:
    """Intersection-over-union of two boxes."""
    iw = min(a.u_max, b.u_max) - max(a.u_min, b.u_min)
    ih = min(a.v_max, b.v_max) - max(a.v_min, b.v_min)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    return inter / (a.area + b.area - inter)


def associate_and_register(
    tracks,
    detections,
    cfg: TrackerConfig,
    frame: int = 0,
    next_id: int = 0,
):
    """Greedy IoU association plus registration of unmatched detections.

    Returns (assignments, new_tracks) where assignments maps track id to
    detection index. A detection overlapping some active track above the
    registration threshold but losing the greedy competition is dropped for
    this frame. Registration is sequential, so a detection is also checked
    against tracks registered earlier in the same frame.
    """
    active = [t for t in tracks if t.status == ACTIVE]
    pairs = []
    for t in active:
        for j, det in enumerate(detections):
            score = iou(t.u, det)
            if score >= cfg.iou_register_threshold:
                pairs.append((score, t.id, j))
    pairs.sort(key=lambda p: (-p[0], p[1], p[2]))

    assignments = {}
    taken_dets = set()
    for score, tid, j in pairs:
        if tid in assignments or j in taken_dets:
            continue
        assignments[tid] = j
        taken_dets.add(j)

    new_tracks = []
    boxes = [t.u for t in active]
    for j, det in enumerate(detections):
        if j in taken_dets:
            continue
        if any(iou(det, b) >= cfg.iou_register_threshold for b in boxes):
            continue  # overlapped an existing track but lost the competition
        new_tracks.append(
            BoxTrack(
                id=next_id + len(new_tracks),
                u=det,
                sigma=cfg.initial_sigma.copy(),
                last_update_frame=frame,
                spawn_frame=frame,
                hits=1,
            )
        )
        boxes.append(det)
    return assignments, new_tracks


def bbox_entropy(sigma) -> float:
    """Differential entropy of the 4D box-state Gaussian, in nats.

    Singular covariances return -inf as the distinguished minimal value.
    """
    sig = np.asarray(sigma, dtype=float)
    if sig.shape != (4, 4):
        raise ValueError("sigma must be 4x4")
    if not np.allclose(sig, sig.T, atol=1e-9 * max(1.0, float(np.abs(sig).max()))):
        raise ValueError("sigma must be symmetric")
    sign, logdet = np.linalg.slogdet(sig)
    if sign <= 0 or not np.isfinite(logdet):
        return -math.inf
    return 2.0 + 2.0 * math.log(2.0 * math.pi) + 0.5 * logdet


def prune(tracks, image_size, cfg: TrackerConfig, frame: int = None):
    """Deregister tracks fully outside the image or grown past the entropy gate."""
    width, height = image_size
    out = []
    for t in tracks:
        if t.status != ACTIVE:
            out.append(t)
            continue
        b = t.u
        outside = b.u_max <= 0 or b.v_max <= 0 or b.u_min >= width or b.v_min >= height
        if outside:
            out.append(replace(t, status=DEREGISTERED, dereg_reason="bounds",
                               dereg_frame=frame))
        elif bbox_entropy(t.sigma) > cfg.entropy_dereg_threshold:
            out.append(replace(t, status=DEREGISTERED, dereg_reason="entropy",
                               dereg_frame=frame))
        else:
            out.append(t)
    return out


def estimate_similarity(prev_points, curr_points) -> SimilarityTransform2D:
    """Least-squares similarity (scale, rotation, translation) between point sets."""
    p = np.atleast_2d(np.asarray(prev_points, dtype=float))
    q = np.atleast_2d(np.asarray(curr_points, dtype=float))
    if p.shape != q.shape or p.shape[1] != 2:
        raise SimilarityEstimationError("correspondence lists must be equal (n, 2)")
    if len(p) < 2:
        raise SimilarityEstimationError("need at least 2 correspondences")
    p_mean, q_mean = p.mean(axis=0), q.mean(axis=0)
    pc, qc = p - p_mean, q - q_mean
    spread = float(np.sum(pc**2))
    if spread < 1e-12:
        raise SimilarityEstimationError("previous points are coincident")
    dot = float(np.sum(pc * qc))
    cross = float(np.sum(pc[:, 0] * qc[:, 1] - pc[:, 1] * qc[:, 0]))
    scale = math.hypot(dot, cross) / spread
    if scale < 1e-12:
        raise SimilarityEstimationError("degenerate fit with zero scale")
    theta = math.atan2(cross, dot)
    c, s = math.cos(theta), math.sin(theta)
    rot = np.array([[c, -s], [s, c]])
    t = q_mean - scale * rot @ p_mean
    return SimilarityTransform2D.from_params(scale, theta, t[0], t[1])


@dataclass
class TrackerState:
    """Per-run track bank; `step` runs one predict/associate/update/prune frame."""

    cfg: TrackerConfig
    image_size: tuple
    tracks: list = field(default_factory=list)
    next_id: int = 0

    def step(self, detections, similarity_by_track, frame: int):
        """Returns the ids of tracks that received a detector update this frame."""
        FALLBACK_NOISE_SCALE = 4.0
        predicted = []
        for t in self.tracks:
            if t.status != ACTIVE:
                predicted.append(t)
                continue
            sim = similarity_by_track.get(t.id)
            if sim is not None:
                try:
                    predicted.append(predict(t, sim, self.cfg))
                    continue
                except ValueError:
                    pass  # motion too violent for the box model; discard it
            predicted.append(
                predict(t, SimilarityTransform2D.identity(), self.cfg,
                        noise_scale=FALLBACK_NOISE_SCALE)
            )

        assignments, new_tracks = associate_and_register(
            predicted, detections, self.cfg, frame=frame, next_id=self.next_id
        )
        self.next_id += len(new_tracks)
        updated = []
        for t in predicted:
            if t.id in assignments:
                t2 = update(t, detections[assignments[t.id]], self.cfg)
                t2 = replace(t2, last_update_frame=frame, hits=t.hits + 1)
                updated.append(t2)
            else:
                updated.append(t)
        self.tracks = prune(updated + new_tracks, self.image_size, self.cfg,
                            frame=frame)
        return set(assignments)

    def active(self):
        return [t for t in self.tracks if t.status == ACTIVE]
