"""Particle-based target localization from tracked bounding boxes.

A target hypothesis is a fixed-size cloud of world points seeded inside the
cone back-projected from an enlarged box, then sharpened by perturb / project /
weight / resample rounds against boxes from other viewpoints. PCA, KL
divergence and differential entropy of the cloud drive mission transitions.
"""

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .geometry import (
    BBox,
    CameraRig,
    PoseSE3,
    back_project_direction,
    cone_contains,
    cone_normals,
    project_points,
)

# Weight assigned in place of exact zeros so a bad box cannot silently
# collapse the cloud; an all-floor frame is skipped instead of resampled.
WEIGHT_FLOOR = 1e-12

STATUS_ROUGH = "rough"
STATUS_FINE_REQUESTED = "fine_requested"
STATUS_CONVERGED = "converged"
_STATUS_ORDER = {STATUS_ROUGH: 0, STATUS_FINE_REQUESTED: 1, STATUS_CONVERGED: 2}


def status_rank(status: str) -> int:
    """Rough < FineRequested < Converged."""
    return _STATUS_ORDER[status]


def gaussian_entropy_for_eigenvalue(lam: float) -> float:
    """Entropy of an isotropic 3D Gaussian whose variances all equal lam."""
    return 1.5 * (1.0 + math.log(2.0 * math.pi)) + 1.5 * math.log(lam)


@dataclass(frozen=True)
class LocalizerConfig:
    n_particles: int = 1000
    max_depth: float = 24.0
    enlarge_factor: float = 1.5
    update_noise_var: float = 0.04
    gauss_weight: float = 0.9
    uniform_weight: float = 0.1
    lambda_rough: float = 4.0
    lambda_fine: float = 0.25
    kl_converged: float = 0.01
    entropy_rough: float = None
    entropy_converged: float = None

    def __post_init__(self):
        if self.n_particles < 100:
            raise ValueError("n_particles must be at least 100")
        if self.max_depth <= 0:
            raise ValueError("max_depth must be positive")
        if self.enlarge_factor < 1:
            raise ValueError("enlarge_factor must be >= 1")
        if self.gauss_weight < 0 or self.uniform_weight < 0:
            raise ValueError("mixture weights must be non-negative")
        if abs(self.gauss_weight + self.uniform_weight - 1.0) > 1e-9:
            raise ValueError("mixture weights must sum to 1")
        if self.entropy_rough is None:
            object.__setattr__(
                self, "entropy_rough", gaussian_entropy_for_eigenvalue(self.lambda_rough)
            )
        if self.entropy_converged is None:
            object.__setattr__(
                self,
                "entropy_converged",
                gaussian_entropy_for_eigenvalue(self.lambda_fine),
            )


@dataclass(frozen=True)
class ParticleSet:
    target_id: int
    points: np.ndarray  # (n_particles, 3) world frame
    generation_frame: int

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError("points must be (m, 3)")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        object.__setattr__(self, "points", pts)


@dataclass(frozen=True)
class GaussianSummary:
    mean: np.ndarray
    cov: np.ndarray


@dataclass(frozen=True)
class PcaSummary:
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # columns match eigenvalues
    mean: np.ndarray

    @property
    def smallest_eigenvector(self) -> np.ndarray:
        return self.eigenvectors[:, 2]

    @property
    def ellipsoid_semi_axes(self) -> np.ndarray:
        """Visualization semi-axes, two standard deviations per principal axis."""
        return 2.0 * np.sqrt(np.maximum(self.eigenvalues, 0.0))


def enlarge(box: BBox, factor: float) -> BBox:
    """Scale a box about its center; corners may leave the image."""
    if factor < 1:
        raise ValueError("factor must be >= 1")
    cu, cv = box.center
    hw, hh = factor * box.width / 2.0, factor * box.height / 2.0
    return BBox(cu - hw, cv - hh, cu + hw, cv + hh)


def generate_particles(
    corners,
    cam_to_world: PoseSE3,
    cam: CameraRig,
    cfg: LocalizerConfig,
    rng: np.random.Generator,
    target_id: int = 0,
    frame: int = 0,
) -> ParticleSet:
    """Seed a cloud inside the cone spanned by four enlarged box corners.

    Directions are convex combinations of the corner rays with strictly
    positive coefficients (columns normalized by their Manhattan norm), depths
    uniform in (0, max_depth], so every point strictly satisfies the cone
    membership inequalities of its own generating cone.
    """
    cone_normals(corners, cam)  # rejects degenerate corner sets
    dirs = np.column_stack([back_project_direction(c, cam) for c in corners])  # 3x4
    m = cfg.n_particles
    coeffs = 1.0 - rng.uniform(size=(4, m))  # in (0, 1]
    coeffs /= coeffs.sum(axis=0)
    depths = cfg.max_depth * (1.0 - rng.uniform(size=m))  # in (0, max_depth]
    pts_cam = (dirs @ coeffs) * depths
    pts_world = cam_to_world.apply(pts_cam.T)
    return ParticleSet(target_id=target_id, points=pts_world, generation_frame=frame)


def needs_new_particle_set(existing_sets, normals: np.ndarray, world_to_cam: PoseSE3):
    """Sets with at least one point inside the cone; empty means register fresh."""
    matched = []
    for ps in existing_sets:
        pts_cam = world_to_cam.apply(ps.points)
        if bool(cone_contains(normals, pts_cam).any()):
            matched.append(ps)
    return matched


def weight_density(pixels, box: BBox, cfg: LocalizerConfig):
    """Gaussian-plus-uniform box likelihood for projected pixels.

    The Gaussian sits at the box center with per-axis std of half the box
    extent; the uniform term is supported on the enlarged box. Values are
    floored at WEIGHT_FLOOR. Accepts one (2,) pixel or an (n, 2) array.
    """
    pix = np.asarray(pixels, dtype=float)
    single = pix.ndim == 1
    pix = np.atleast_2d(pix)
    cu, cv = box.center
    su, sv = box.width / 2.0, box.height / 2.0
    norm = 1.0 / (2.0 * math.pi * su * sv)
    quad = ((pix[:, 0] - cu) / su) ** 2 + ((pix[:, 1] - cv) / sv) ** 2
    gauss = norm * np.exp(-0.5 * quad)

    support = enlarge(box, cfg.enlarge_factor)
    inside = (
        (pix[:, 0] >= support.u_min)
        & (pix[:, 0] <= support.u_max)
        & (pix[:, 1] >= support.v_min)
        & (pix[:, 1] <= support.v_max)
    )
    uniform = np.where(inside, 1.0 / support.area, 0.0)

    f = np.maximum(cfg.gauss_weight * gauss + cfg.uniform_weight * uniform, WEIGHT_FLOOR)
    return float(f[0]) if single else f


def systematic_resample(weights, rng: np.random.Generator) -> np.ndarray:
    """Low-variance systematic resampling; returns chosen indices."""
    w = np.asarray(weights, dtype=float)
    w = w / w.sum()
    n = len(w)
    positions = (np.arange(n) + rng.uniform()) / n
    idx = np.searchsorted(np.cumsum(w), positions, side="right")
    return np.minimum(idx, n - 1)


@dataclass(frozen=True)
class UpdateResult:
    particles: ParticleSet
    starved: bool


def update_particles(
    ps: ParticleSet,
    box: BBox,
    world_to_cam: PoseSE3,
    cam: CameraRig,
    cfg: LocalizerConfig,
    rng: np.random.Generator,
) -> UpdateResult:
    """One perturb / project / weight / resample round against a tracked box.

    Points projecting behind the camera get the floor weight. If every weight
    sits at the floor the box carries no information about this cloud: the
    update is skipped and the starved flag raised.
    """
    noise = math.sqrt(cfg.update_noise_var) * rng.standard_normal(ps.points.shape)
    perturbed = ps.points + noise
    pix, depth = project_points(perturbed, world_to_cam, cam)
    weights = weight_density(pix, box, cfg)
    weights = np.where(depth > 0, weights, WEIGHT_FLOOR)
    if np.all(weights <= WEIGHT_FLOOR):
        return UpdateResult(ps, starved=True)
    idx = systematic_resample(weights, rng)
    return UpdateResult(replace(ps, points=perturbed[idx]), starved=False)


def gaussian_summary(ps: ParticleSet) -> GaussianSummary:
    """Mean and sample covariance of the cloud as a 3D Gaussian."""
    mean = ps.points.mean(axis=0)
    cov = np.cov(ps.points.T, ddof=1)
    return GaussianSummary(mean=mean, cov=cov)


def pca_summary(ps: ParticleSet) -> PcaSummary:
    """Eigen-decomposition of the sample covariance, eigenvalues descending.

    The smallest-eigenvalue eigenvector is sign-normalized to a non-negative
    world-z component (ties broken on x, then y) so planners get a stable
    direction.
    """
    if len(ps.points) < 2:
        raise ValueError("need at least 2 points")
    cov = np.cov(ps.points.T, ddof=1)
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals)[::-1]
    evals = evals[order]
    evecs = evecs[:, order]
    v = evecs[:, 2]
    if v[2] < 0 or (v[2] == 0 and (v[0] < 0 or (v[0] == 0 and v[1] < 0))):
        evecs[:, 2] = -v
    return PcaSummary(eigenvalues=evals, eigenvectors=evecs, mean=ps.points.mean(axis=0))


def kl_divergence(n0: GaussianSummary, n1: GaussianSummary) -> float:
    """Closed-form KL divergence D(n0 || n1) between 3D Gaussians, in nats."""
    p0, p1 = np.asarray(n0.cov, dtype=float), np.asarray(n1.cov, dtype=float)
    try:
        np.linalg.cholesky(p1)
    except np.linalg.LinAlgError:
        raise ValueError("second covariance must be nonsingular") from None
    diff = np.asarray(n1.mean, dtype=float) - np.asarray(n0.mean, dtype=float)
    trace_term = float(np.trace(np.linalg.solve(p1, p0)))
    quad_term = float(diff @ np.linalg.solve(p1, diff))
    _, logdet1 = np.linalg.slogdet(p1)
    sign0, logdet0 = np.linalg.slogdet(p0)
    if sign0 <= 0:
        return math.inf
    return 0.5 * (trace_term + quad_term - 3.0 + logdet1 - logdet0)


def points_entropy(ps: ParticleSet) -> float:
    """Differential entropy of the cloud's Gaussian approximation, in nats."""
    if len(ps.points) < 4:
        raise ValueError("need at least 4 points")
    cov = np.cov(ps.points.T, ddof=1)
    sign, logdet = np.linalg.slogdet(cov)
    if sign <= 0 or not np.isfinite(logdet):
        return -math.inf
    return 1.5 + 1.5 * math.log(2.0 * math.pi) + 0.5 * logdet


@dataclass(frozen=True)
class ConvergenceRecord:
    lambda_max: float
    entropy: float
    kl: Optional[float] = None  # None before the second update


def localization_status(history, cfg: LocalizerConfig) -> str:
    """Joint eigenvalue / entropy / KL gate; monotone across the history."""
    if not history:
        raise ValueError("need at least one convergence record")
    best = STATUS_ROUGH
    for rec in history:
        if (
            rec.lambda_max < cfg.lambda_fine
            and rec.entropy < cfg.entropy_converged
            and rec.kl is not None
            and rec.kl < cfg.kl_converged
        ):
            status = STATUS_CONVERGED
        elif rec.lambda_max < cfg.lambda_rough and rec.entropy < cfg.entropy_rough:
            status = STATUS_FINE_REQUESTED
        else:
            status = STATUS_ROUGH
        if _STATUS_ORDER[status] > _STATUS_ORDER[best]:
            best = status
    return best


@dataclass
class TargetHypothesis:
    """A particle set plus the bookkeeping the mission needs around it."""

    particles: ParticleSet
    rng: np.random.Generator
    history: list = field(default_factory=list)
    status: str = STATUS_ROUGH
    failed: bool = False
    updates: int = 0
    starved_updates: int = 0
    last_update_camera: np.ndarray = None  # where the last accepted view was taken
    coverage: float = None
    arc_fraction: float = None

    @property
    def target_id(self) -> int:
        return self.particles.target_id

    @property
    def center(self) -> np.ndarray:
        return self.particles.points.mean(axis=0)

    @property
    def lambda_max(self) -> float:
        return self.history[-1].lambda_max if self.history else math.inf

    def record(self, cfg: LocalizerConfig, kl: Optional[float]):
        pca = pca_summary(self.particles)
        rec = ConvergenceRecord(
            lambda_max=float(pca.eigenvalues[0]),
            entropy=points_entropy(self.particles),
            kl=kl,
        )
        self.history.append(rec)
        self.status = localization_status(self.history, cfg)
        return rec


def drop_duplicates(hypotheses, radius: float = 1.0):
    """Discard hypotheses whose centers sit within radius of a more-converged one.

    "More converged" means strictly higher status, or equal status with a
    smaller largest eigenvalue. Returns (kept, dropped).
    """
    ranked = sorted(
        hypotheses,
        key=lambda h: (-_STATUS_ORDER[h.status], h.lambda_max, h.target_id),
    )
    kept, dropped = [], []
    for h in ranked:
        if any(np.linalg.norm(h.center - k.center) < radius for k in kept):
            dropped.append(h)
        else:
            kept.append(h)
    kept.sort(key=lambda h: h.target_id)
    dropped.sort(key=lambda h: h.target_id)
    return kept, dropped
