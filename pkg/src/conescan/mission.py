"""Mission workflow tying tracking, localization and planning together.

One mission is a deterministic loop: fly the search rows while tracking and
opportunistically localizing everything detected; break off to a fine
localization circle when a cloud is promising; orbit-map it once converged;
then resume the search where it was interrupted.
"""

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import localizer as loc
from .bbox_tracker import (
    SimilarityEstimationError,
    TrackerState,
    bbox_entropy,
    estimate_similarity,
    iou,
)
from .config import ScenarioConfig, to_dict, validate
from .geometry import (
    BBox,
    DegenerateConeError,
    bearing,
    camera_to_world_pose,
    cone_normals,
    project_points,
    wrap_angle,
)
from .localizer import (
    STATUS_CONVERGED,
    STATUS_FINE_REQUESTED,
    TargetHypothesis,
    drop_duplicates,
    enlarge,
    gaussian_summary,
    generate_particles,
    kl_divergence,
    needs_new_particle_set,
    pca_summary,
    update_particles,
)
from .mapping_planner import (
    coverage_samples,
    fit_cylinder,
    mapping_path,
    scan_circles,
)
from .simulator import (
    DetectionDelay,
    UavState,
    WaypointFollower,
    make_target,
    perturb_pose,
    simulate_detector,
    simulate_klt,
    substream,
)
from .view_planner import (
    Waypoint,
    arc_path,
    fine_localization_circle,
    lawnmower_path,
    next_best_view,
)

SEARCH = "search"
FINE_LOCALIZE = "fine_localize"
MAP = "map"

def _fmt(value) -> str:
    """Shortest round-trip decimal form; numpy scalars print as plain floats."""
    return repr(float(value))


EXIT_OK = 0
EXIT_INVALID = 1
EXIT_UNCONVERGED = 2


@dataclass
class MissionState:
    mode: str = SEARCH
    active_target: int = None
    resume_waypoint_index: int = 0


@dataclass
class TargetReport:
    target_id: int
    status: str
    center: list
    eigenvalues: list
    updates: int
    localization_error: float = None
    coverage: float = None
    arc_fraction: float = None


@dataclass
class RunReport:
    targets: list
    duration_s: float
    distance_m: float
    targets_found: int
    targets_total: int
    transitions: list
    seed: int

    @property
    def exit_code(self) -> int:
        return EXIT_OK if self.targets_found >= self.targets_total else EXIT_UNCONVERGED

    def to_dict(self) -> dict:
        return {
            "targets": [vars(t).copy() for t in self.targets],
            "duration_s": self.duration_s,
            "distance_m": self.distance_m,
            "targets_found": self.targets_found,
            "targets_total": self.targets_total,
            "transitions": self.transitions,
            "seed": self.seed,
        }


class _RunLog:
    """Streaming CSV/JSON writers for one run directory (no-ops when disabled)."""

    def __init__(self, out_dir):
        self.dir = Path(out_dir) if out_dir else None
        self._files = []
        self.tracks = self._csv(
            "tracks.csv",
            ["frame", "track_id", "u_min", "v_min", "u_max", "v_max",
             "trace_sigma", "entropy", "status"],
        )
        self.path = self._csv("path.csv", ["t", "x", "y", "z", "yaw", "mode"])
        self.planned = self._csv("planned_path.csv", ["phase", "seq", "x", "y", "z", "yaw"])
        self.metrics = self._csv(
            "metrics.csv",
            ["frame", "target_id", "lambda1", "lambda2", "lambda3",
             "entropy", "kl", "status"],
        )
        if self.dir:
            (self.dir / "particles").mkdir(parents=True, exist_ok=True)

    def _csv(self, name, header):
        if not self.dir:
            return None
        self.dir.mkdir(parents=True, exist_ok=True)
        fh = open(self.dir / name, "w", newline="")
        self._files.append(fh)
        writer = csv.writer(fh)
        writer.writerow(header)
        return writer

    def row(self, writer, values):
        if writer is not None:
            writer.writerow(values)

    def snapshot(self, hyp: TargetHypothesis, frame: int, tag: str = ""):
        if not self.dir:
            return
        rec = hyp.history[-1] if hyp.history else None
        data = {
            "target_id": hyp.target_id,
            "frame": frame,
            "points": hyp.particles.points.tolist(),
            "eigenvalues": pca_summary(hyp.particles).eigenvalues.tolist(),
            "entropy": rec.entropy if rec else None,
            "kl": rec.kl if rec else None,
            "status": "failed" if hyp.failed else hyp.status,
        }
        suffix = f"_{tag}" if tag else ""
        name = f"target{hyp.target_id:03d}_frame{frame:06d}{suffix}.json"
        with open(self.dir / "particles" / name, "w") as fh:
            json.dump(data, fh, sort_keys=True)

    def write_json(self, name, payload):
        if not self.dir:
            return
        with open(self.dir / name, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)

    def close(self):
        for fh in self._files:
            fh.close()
        self._files = []


class MissionRunner:
    """Deterministic single-mission executor."""

    def __init__(self, cfg: ScenarioConfig, out_dir=None, dump_particles=False):
        validate(cfg)
        self.cfg = cfg
        self.cam = cfg.camera
        self.noise = cfg.noise
        self.dump_particles = dump_particles
        seed = cfg.seed

        self.targets = [
            make_target(i, t.center, t.half_extents, t.n_features,
                        substream(seed, "target_features", i))
            for i, t in enumerate(cfg.targets)
        ]
        self.det_rng = substream(seed, "detector")
        self.klt_rng = substream(seed, "klt")
        self.pose_rng = substream(seed, "pose")

        self.search_path = lawnmower_path(
            cfg.region, cfg.search_altitude, self.cam, cfg.planner.overlap
        )
        start = self.search_path[0]
        self.follower = WaypointFollower(
            start.position, start.yaw, cfg.uav.v_max, cfg.uav.a_max, cfg.uav.yaw_rate
        )
        self.follower.set_path(self.search_path)
        self._search_base = 0

        self.tracker = TrackerState(cfg.tracker, (self.cam.width, self.cam.height))
        self.state = MissionState()
        self.hypotheses = []
        self.next_hypothesis_id = 0
        self.suppression = []  # (center, radius) of finished targets
        self.done = []  # (hypothesis, coverage_payload)

        self.frame = 0
        self.t = 0.0
        self.distance = 0.0
        self.transitions = []
        self.uav = UavState(start.position.copy(), start.yaw, np.zeros(3))
        self._prev_true_w2c = None
        self._prev_target_boxes = {}
        self._fine = None  # per fine-phase bookkeeping

        self.log = _RunLog(out_dir)
        self._log_plan(SEARCH, self.search_path)

    # ------------------------------------------------------------------ utils

    def _log_plan(self, phase, waypoints):
        for seq, wp in enumerate(waypoints):
            self.log.row(
                self.log.planned,
                [phase, seq, _fmt(wp.position[0]), _fmt(wp.position[1]),
                 _fmt(wp.position[2]), _fmt(wp.yaw)],
            )

    def _transition(self, new_mode, target_id=None, **extra):
        entry = {
            "frame": self.frame,
            "t": round(self.t, 6),
            "from": self.state.mode,
            "to": new_mode,
            "target": target_id,
        }
        entry.update(extra)
        self.transitions.append(entry)
        self.state.mode = new_mode
        self.state.active_target = target_id

    def _current_waypoint(self) -> Waypoint:
        return Waypoint(self.uav.position.copy(), self.uav.yaw)

    def _live_hypotheses(self):
        return [h for h in self.hypotheses if not h.failed]

    # ------------------------------------------------------------- perception

    def _true_target_boxes(self, world_to_cam):
        """Exact projected AABB per fully-in-front target (for the KLT matcher)."""
        boxes = {}
        for tg in self.targets:
            pix, depth = project_points(tg.corners(), world_to_cam, self.cam)
            if np.any(depth <= 0):
                continue
            u0, v0 = pix[:, 0].min(), pix[:, 1].min()
            u1, v1 = pix[:, 0].max(), pix[:, 1].max()
            if u1 <= 0 or v1 <= 0 or u0 >= self.cam.width or v0 >= self.cam.height:
                continue
            if u0 < u1 and v0 < v1:
                boxes[tg.id] = BBox(u0, v0, u1, v1)
        return boxes

    def _similarities(self, true_w2c):
        """Per-track image similarity from simulated feature correspondences."""
        sims = {}
        if self._prev_true_w2c is None:
            return sims
        for track in sorted(self.tracker.active(), key=lambda t: t.id):
            best_id, best_iou = None, 0.1
            for tid, box in self._prev_target_boxes.items():
                score = iou(track.u, box)
                if score > best_iou:
                    best_id, best_iou = tid, score
            if best_id is None:
                continue
            pair = simulate_klt(
                self.targets[best_id], self._prev_true_w2c, true_w2c,
                self.cam, self.noise, self.klt_rng,
            )
            if pair is None:
                continue
            try:
                sims[track.id] = estimate_similarity(pair[0], pair[1])
            except SimilarityEstimationError:
                continue
        return sims

    # ------------------------------------------------------------ localization

    def _suppressed(self, normals, world_to_cam) -> bool:
        """Cone points at a finished target (within its suppression radius)."""
        unit = normals / np.linalg.norm(normals, axis=1, keepdims=True)
        for center, radius in self.suppression:
            c_cam = world_to_cam.apply(center)
            if c_cam[2] > -radius and np.all(unit @ c_cam > -radius):
                return True
        return False

    def _near_done_target(self, center) -> bool:
        return any(
            np.linalg.norm(center - done_center) <= radius
            for done_center, radius in self.suppression
        )

    def _localize_from_track(self, track, est_c2w, est_w2c):
        lcfg = self.cfg.localizer
        corners = enlarge(track.u, lcfg.enlarge_factor).corners_clockwise()
        try:
            normals = cone_normals(corners, self.cam)
        except DegenerateConeError:
            return
        live = self._live_hypotheses()
        matched_sets = needs_new_particle_set([h.particles for h in live], normals, est_w2c)
        matched_ids = {ps.target_id for ps in matched_sets}
        matched = [h for h in live if h.target_id in matched_ids]

        if matched:
            cam_pos = est_c2w.translation
            for hyp in matched:
                if self.state.mode == FINE_LOCALIZE and hyp.target_id != self.state.active_target:
                    continue  # only the active target updates off-search
                if (hyp.last_update_camera is not None
                        and np.linalg.norm(cam_pos - hyp.last_update_camera)
                        < self.cfg.mission.min_update_baseline):
                    continue  # no parallax since the last accepted view
                self._update_hypothesis(hyp, track.u, est_w2c, cam_pos)
            return

        if self.state.mode == FINE_LOCALIZE:
            return  # no fresh registrations while circling one target
        if self._suppressed(normals, est_w2c):
            return
        hyp_id = self.next_hypothesis_id
        self.next_hypothesis_id += 1
        rng = substream(self.cfg.seed, "particles", hyp_id)
        particles = generate_particles(
            corners, est_c2w, self.cam, lcfg, rng, target_id=hyp_id, frame=self.frame
        )
        hyp = TargetHypothesis(particles=particles, rng=rng,
                               last_update_camera=est_c2w.translation.copy())
        hyp.record(lcfg, kl=None)
        self.hypotheses.append(hyp)
        self._metrics_row(hyp)
        self.log.snapshot(hyp, self.frame, "registered")

    def _update_hypothesis(self, hyp, box, est_w2c, cam_pos):
        lcfg = self.cfg.localizer
        pre = gaussian_summary(hyp.particles)
        result = update_particles(hyp.particles, box, est_w2c, self.cam, lcfg, hyp.rng)
        if result.starved:
            hyp.starved_updates += 1
            return
        hyp.particles = result.particles
        hyp.updates += 1
        hyp.last_update_camera = cam_pos.copy()
        try:
            kl = kl_divergence(gaussian_summary(hyp.particles), pre)
        except ValueError:
            kl = None
        before = hyp.status
        hyp.record(lcfg, kl)
        self._metrics_row(hyp)
        if hyp.status != before:
            self.log.snapshot(hyp, self.frame, hyp.status)

    def _metrics_row(self, hyp):
        rec = hyp.history[-1]
        pca = pca_summary(hyp.particles)
        self.log.row(
            self.log.metrics,
            [self.frame, hyp.target_id, _fmt(pca.eigenvalues[0]),
             _fmt(pca.eigenvalues[1]), _fmt(pca.eigenvalues[2]),
             _fmt(rec.entropy), "" if rec.kl is None else _fmt(rec.kl), hyp.status],
        )

    # ------------------------------------------------------------- mode logic

    def _plan_fine_arc(self, hyp):
        """Arc toward the next-best view; a full lap when already there."""
        lcfg = self.cfg.localizer
        pca = pca_summary(hyp.particles)
        center = pca.mean
        circle = fine_localization_circle(center, self.cfg.search_altitude, self.cam.gamma)
        current = self._current_waypoint()
        nbv = next_best_view(circle, pca.smallest_eigenvector, current, center)
        path = arc_path(current, nbv, circle, center, self.cfg.planner.angular_step)
        sweep = abs(wrap_angle(circle.azimuth_of(nbv.position)
                               - circle.azimuth_of(current.position)))
        on_circle = abs(np.linalg.norm(current.position[:2] - circle.center[:2])
                        - circle.radius) < 1e-6
        if on_circle and sweep < self.cfg.planner.angular_step:
            # already at the best view: sweep a full lap for azimuth diversity
            step = self.cfg.planner.angular_step
            n = max(4, int(round(2.0 * math.pi / step)))
            az0 = circle.azimuth_of(current.position)
            path = [current]
            for k in range(1, n + 1):
                pos = circle.point_at(az0 + 2.0 * math.pi * k / n)
                path.append(Waypoint(pos, bearing(pos, center)))
            sweep = 2.0 * math.pi
        self._fine = {
            "hyp": hyp,
            "center": center.copy(),
            "path_len": max(len(path) - 1, 1),
            "planned_angle": sweep,
        }
        self.follower.set_path(path[1:])
        self._log_plan(FINE_LOCALIZE, path)

    def _fine_progress_angle(self) -> float:
        frac = min(self.follower.waypoints_reached / self._fine["path_len"], 1.0)
        return frac * self._fine["planned_angle"]

    def _enter_fine(self, hyp):
        self.state.resume_waypoint_index = min(
            self._search_base + self.follower.waypoints_reached,
            len(self.search_path) - 1,
        )
        self._transition(FINE_LOCALIZE, hyp.target_id,
                         resume_index=self.state.resume_waypoint_index)
        self._lap_angle = 0.0
        self._plan_fine_arc(hyp)

    def _enter_map(self, hyp):
        arc_fraction = None
        if self._fine is not None and self._fine["planned_angle"] > 0:
            arc_fraction = self._fine_progress_angle() / self._fine["planned_angle"]
        pcfg = self.cfg.planner
        cylinder = fit_cylinder(hyp.particles)
        plan = scan_circles(cylinder, self.cam, pcfg.standoff, pcfg.n_per_circle)
        samples, covered = coverage_samples(plan, self.cam, cylinder,
                                            pcfg.n_surface_samples)
        coverage = float(covered.mean())
        uncovered = samples[~covered][:200].tolist()
        path = mapping_path(plan, self.uav.position)
        self._map_result = {
            "hyp": hyp,
            "payload": {
                "target_id": hyp.target_id,
                "circle_altitudes": [c.altitude for c in plan.circles],
                "orbit_radius": plan.circles[0].radius,
                "covered_fraction": coverage,
                "uncovered_samples": uncovered,
            },
            "coverage": coverage,
            "cylinder": cylinder,
            "arc_fraction": arc_fraction,
        }
        self._fine = None
        self._transition(MAP, hyp.target_id, arc_fraction=arc_fraction)
        self.follower.set_path(path)
        self._log_plan(MAP, [self._current_waypoint()] + path)

    def _finish_map(self):
        res = self._map_result
        hyp, cyl = res["hyp"], res["cylinder"]
        hyp.coverage = res["coverage"]
        hyp.arc_fraction = res["arc_fraction"]
        self.done.append((hyp, res["payload"]))
        self.hypotheses.remove(hyp)
        center = hyp.particles.points.mean(axis=0)
        self.suppression.append(
            (center, self.cfg.mission.suppression_scale * cyl.radius)
        )
        self.log.snapshot(hyp, self.frame, "done")
        self._map_result = None
        self._resume_search()

    def _resume_search(self):
        idx = self.state.resume_waypoint_index
        self._transition(SEARCH, None, resume_index=idx)
        self._search_base = idx
        remaining = self.search_path[idx:]
        self.follower.set_path(remaining)
        self._log_plan(SEARCH, [self._current_waypoint()] + list(remaining))

    def _step_modes(self):
        mode = self.state.mode
        if mode == SEARCH:
            candidates = [
                h for h in self._live_hypotheses()
                if loc.status_rank(h.status) >= loc.status_rank(STATUS_FINE_REQUESTED)
            ]
            if candidates:
                self._enter_fine(min(candidates, key=lambda h: h.target_id))
                return False
            return self.follower.done
        if mode == FINE_LOCALIZE:
            hyp = self._fine["hyp"]
            if hyp.status == STATUS_CONVERGED:
                self._enter_map(hyp)
                return False
            drifted = (
                np.linalg.norm(hyp.center - self._fine["center"])
                > self.cfg.mission.fine_replan_distance
            )
            if self.follower.done or drifted:
                self._lap_angle += (
                    self._fine["planned_angle"] if self.follower.done
                    else self._fine_progress_angle()
                )
                if self._lap_angle >= self.cfg.mission.fine_max_laps * 2.0 * math.pi:
                    hyp.failed = True
                    self.log.snapshot(hyp, self.frame, "failed")
                    self._fine = None
                    self._resume_search()
                else:
                    self._plan_fine_arc(hyp)
            return False
        if mode == MAP:
            if self.follower.done:
                self._finish_map()
            return False
        raise RuntimeError(f"unknown mode {mode}")

    # ------------------------------------------------------------------- loop

    def _tick(self):
        dt = self.cfg.mission.dt
        prev_pos = self.uav.position.copy()
        pos, yaw, vel = self.follower.step(dt)
        self.t += dt
        self.frame += 1
        self.distance += float(np.linalg.norm(pos - prev_pos))

        true_c2w = camera_to_world_pose(pos, yaw, self.cam.gamma)
        est_c2w = perturb_pose(true_c2w, self.noise, self.pose_rng)
        self.uav = UavState(
            position=pos, yaw=yaw, velocity=vel,
            est_position=est_c2w.translation.copy(),
            est_yaw=math.atan2(est_c2w.rotation[1, 2], est_c2w.rotation[0, 2]),
        )
        true_w2c = true_c2w.inverse()
        est_w2c = est_c2w.inverse()

        detections = simulate_detector(self.targets, true_w2c, self.cam,
                                       self.noise, self.det_rng)
        sims = self._similarities(true_w2c)
        updated = self.tracker.step(detections, sims, self.frame)
        for track in self.tracker.tracks:
            self.log.row(
                self.log.tracks,
                [self.frame, track.id, _fmt(track.u.u_min), _fmt(track.u.v_min),
                 _fmt(track.u.u_max), _fmt(track.u.v_max),
                 _fmt(np.trace(track.sigma)),
                 _fmt(bbox_entropy(track.sigma)), track.status],
            )

        if self.state.mode != MAP:
            for track in sorted(self.tracker.active(), key=lambda t: t.id):
                if track.id not in updated or track.hits < self.cfg.mission.confirm_hits:
                    continue
                self._localize_from_track(track, est_c2w, est_w2c)
            kept, _ = drop_duplicates(self._live_hypotheses())
            # a live hypothesis converging into a finished target's zone is a
            # duplicate of that target, not a new one
            kept = [
                h for h in kept
                if h.target_id == self.state.active_target
                or not self._near_done_target(h.center)
            ]
            self.hypotheses = kept + [h for h in self.hypotheses if h.failed]

        finished = self._step_modes()

        self._prev_true_w2c = true_w2c
        self._prev_target_boxes = self._true_target_boxes(true_w2c)
        self.log.row(
            self.log.path,
            [_fmt(self.t), _fmt(pos[0]), _fmt(pos[1]), _fmt(pos[2]), _fmt(yaw),
             self.state.mode],
        )
        return finished

    def run(self) -> RunReport:
        try:
            while self.t < self.cfg.mission.max_sim_time:
                if self._tick():
                    break
            report = self._report()
            if self.dump_particles:
                for hyp in self.hypotheses:
                    self.log.snapshot(hyp, self.frame, "final")
            self.log.write_json(
                "coverage.json", [payload for _, payload in self.done]
            )
            self.log.write_json("report.json", report.to_dict())
            self.log.write_json("config.json", to_dict(self.cfg))
            return report
        finally:
            self.log.close()

    # ----------------------------------------------------------------- report

    def _report(self) -> RunReport:
        true_centers = [tg.center for tg in self.targets]

        def nearest_error(center):
            if not true_centers:
                return None
            return float(min(np.linalg.norm(center - c) for c in true_centers))

        entries = []
        for hyp, payload in self.done:
            center = hyp.particles.points.mean(axis=0)
            entries.append(TargetReport(
                target_id=hyp.target_id,
                status="done",
                center=[float(v) for v in center],
                eigenvalues=[float(v) for v in
                             pca_summary(hyp.particles).eigenvalues],
                updates=hyp.updates,
                localization_error=nearest_error(center),
                coverage=payload["covered_fraction"],
                arc_fraction=hyp.arc_fraction,
            ))
        for hyp in self.hypotheses:
            center = hyp.particles.points.mean(axis=0)
            entries.append(TargetReport(
                target_id=hyp.target_id,
                status="failed" if hyp.failed else hyp.status,
                center=[float(v) for v in center],
                eigenvalues=[float(v) for v in
                             pca_summary(hyp.particles).eigenvalues],
                updates=hyp.updates,
                localization_error=nearest_error(center),
            ))
        entries.sort(key=lambda e: e.target_id)

        found = 0
        for tg in self.targets:
            for hyp, _ in self.done:
                err = np.linalg.norm(hyp.particles.points.mean(axis=0) - tg.center)
                if err <= self.cfg.mission.found_radius:
                    found += 1
                    break
        return RunReport(
            targets=entries,
            duration_s=round(self.t, 9),
            distance_m=round(self.distance, 9),
            targets_found=found,
            targets_total=len(self.targets),
            transitions=self.transitions,
            seed=self.cfg.seed,
        )


def run_scenario(cfg: ScenarioConfig, seed=None, out_dir=None,
                 dump_particles=False) -> RunReport:
    """Run one mission; returns the report (exit code via report.exit_code)."""
    if seed is not None:
        cfg = ScenarioConfig(**{**vars(cfg), "seed": int(seed)})
    runner = MissionRunner(cfg, out_dir=out_dir, dump_particles=dump_particles)
    return runner.run()


def emit_plot_data(run_dir) -> list:
    """Derive plot-ready CSV series from a completed run directory."""
    run_dir = Path(run_dir)
    plots = run_dir / "plots"
    plots.mkdir(exist_ok=True)
    written = []

    path_file = run_dir / "path.csv"
    if path_file.exists():
        with open(path_file) as fh:
            rows = list(csv.DictReader(fh))
        out = plots / "uav_path.csv"
        with open(out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "x", "y", "z"])
            for r in rows:
                w.writerow([r["t"], r["x"], r["y"], r["z"]])
        written.append(out)

    metrics_file = run_dir / "metrics.csv"
    if metrics_file.exists():
        with open(metrics_file) as fh:
            rows = list(csv.DictReader(fh))
        by_target = {}
        for r in rows:
            by_target.setdefault(r["target_id"], []).append(r)
        for tid, series in sorted(by_target.items()):
            out = plots / f"convergence_target{int(tid):03d}.csv"
            with open(out, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["frame", "lambda_max", "entropy", "kl"])
                for r in series:
                    w.writerow([r["frame"], r["lambda1"], r["entropy"], r["kl"]])
            written.append(out)

    planned_file = run_dir / "planned_path.csv"
    if planned_file.exists() and path_file.exists():
        out = plots / "planned_vs_flown.csv"
        with open(out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["source", "phase_or_t", "x", "y", "z"])
            with open(planned_file) as src:
                for r in csv.DictReader(src):
                    w.writerow(["planned", r["phase"], r["x"], r["y"], r["z"]])
            with open(path_file) as src:
                for r in csv.DictReader(src):
                    w.writerow(["flown", r["t"], r["x"], r["y"], r["z"]])
        written.append(out)

    for snap in sorted((run_dir / "particles").glob("*.json")):
        with open(snap) as fh:
            data = json.load(fh)
        out = plots / (snap.stem + ".csv")
        with open(out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "y", "z"])
            for p in data["points"]:
                w.writerow(p)
        written.append(out)
    return written
