"""Online tracking-by-detection with identity embeddings and a recovery buffer.

Per frame the tracker runs four phases:

1. Active trajectories vs detections: Hungarian assignment on the blended
   overlap/identity affinity. Matched trajectories take the detection as
   their new head.
2. Buffer recovery: still-unassigned detections are compared, identity-only
   (overlap weight 0, identity weight 1), against paused trajectories level
   by level, most recently seen first, each level with its own Hungarian
   solve. This is what survives full occlusions.
3. Leftover detections found nobody: they start new trajectories with fresh
   ids.
4. Unmatched trajectories get a head for the current frame anyway — the
   external prediction when one was supplied, otherwise a linear-motion
   guess — and keep competing in phase 1 for up to
   ``motion_propagate_frames`` consecutive misses. After that they are
   paused into the buffer, where only phase 2 can bring them back. Once a
   trajectory has been unseen for more than ``buffer_size`` frames its id is
   retired for good.

Identity-only recovery needs embeddings, so with ``weights.identity == 0``
phase 2 is skipped entirely and the tracker degrades to a plain IoU
Hungarian tracker.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .affinity import AffinityWeights, combined_affinity, nms
from .assignment import solve_max
from .geometry import BBox, Detection

__all__ = [
    "Trajectory",
    "TrackerConfig",
    "TrackOutput",
    "Tracker",
    "propagate_linear",
    "update_trajectory",
    "track_stream",
    "DEFAULT_NMS_IOU",
]

DEFAULT_NMS_IOU = 0.3


@dataclass(frozen=True)
class Trajectory:
    """State of one tracked object.

    ``head_box`` is the most recent position estimate; it comes from a
    detection after a match and from propagation/prediction otherwise, in
    which case ``head_frame`` runs ahead of ``last_seen``.
    """

    track_id: int
    head_box: BBox
    head_embedding: np.ndarray | None
    avg_velocity: tuple[float, float]
    last_seen: int
    age: int = 1
    paused_for: int = 0
    head_frame: int = -1  # frame of head_box; defaults to last_seen
    first_frame: int = -1  # birth frame; defaults to last_seen
    last_confidence: float = 1.0
    last_det_index: int | None = None

    def __post_init__(self):
        if self.track_id < 1:
            raise ValueError(f"track ids are 1-based, got {self.track_id}")
        if self.paused_for < 0:
            raise ValueError("paused_for must be >= 0")
        if self.head_frame < 0:
            object.__setattr__(self, "head_frame", self.last_seen)
        if self.first_frame < 0:
            object.__setattr__(self, "first_frame", self.last_seen)


@dataclass(frozen=True)
class TrackerConfig:
    weights: AffinityWeights = field(default_factory=AffinityWeights)
    buffer_size: int = 10
    min_affinity: float = 0.2
    det_threshold: float = 0.5
    motion_propagate_frames: int = 5
    embedding_momentum: float = 0.5
    frame_gap: int = 1

    def __post_init__(self):
        if self.buffer_size < 1:
            raise ValueError("buffer_size must be >= 1")
        if self.motion_propagate_frames < 0:
            raise ValueError("motion_propagate_frames must be >= 0")
        if not 0.0 <= self.embedding_momentum <= 1.0:
            raise ValueError("embedding_momentum must lie in [0, 1]")
        if not 0.0 <= self.det_threshold <= 1.0:
            raise ValueError("det_threshold must lie in [0, 1]")
        if self.frame_gap < 1:
            raise ValueError("frame_gap must be >= 1")


@dataclass(frozen=True)
class TrackOutput:
    """One emitted box. ``interpolated`` marks propagation output, not a detection."""

    frame: int
    track_id: int
    box: BBox
    confidence: float
    interpolated: bool = False


def propagate_linear(traj: Trajectory, steps: int = 1) -> BBox:
    """Head box translated by the trajectory's average velocity; size kept."""
    vx, vy = traj.avg_velocity
    return BBox(traj.head_box.cx + steps * vx, traj.head_box.cy + steps * vy, traj.head_box.w, traj.head_box.h)


def update_trajectory(traj: Trajectory, det: Detection, momentum: float) -> Trajectory:
    """Absorb a matched detection into the trajectory.

    The detection box becomes the head. The embedding moves toward the
    detection's by ``1 - momentum`` and is re-normalized; the velocity is an
    exponential average (same momentum) of the per-frame center displacement
    since the current head.
    """
    if det.frame < traj.head_frame:
        raise ValueError(f"detection frame {det.frame} is behind trajectory head frame {traj.head_frame}")
    gap = max(det.frame - traj.head_frame, 1)
    disp = ((det.box.cx - traj.head_box.cx) / gap, (det.box.cy - traj.head_box.cy) / gap)
    velocity = (
        momentum * traj.avg_velocity[0] + (1.0 - momentum) * disp[0],
        momentum * traj.avg_velocity[1] + (1.0 - momentum) * disp[1],
    )

    embedding = traj.head_embedding
    if det.embedding is not None:
        if embedding is None:
            embedding = det.embedding
        else:
            mixed = momentum * embedding + (1.0 - momentum) * det.embedding
            norm = float(np.linalg.norm(mixed))
            # Opposite embeddings can cancel at momentum 0.5; trust the fresh one.
            embedding = det.embedding if norm < 1e-12 else mixed / norm

    return replace(
        traj,
        head_box=det.box,
        head_embedding=embedding,
        avg_velocity=velocity,
        last_seen=det.frame,
        head_frame=det.frame,
        age=det.frame - traj.first_frame + 1,
        paused_for=0,
        last_confidence=det.confidence,
    )


class Tracker:
    """Stateful per-sequence tracker. Not safe to share across sequences."""

    def __init__(self, config: TrackerConfig | None = None):
        self.config = config or TrackerConfig()
        self.active: list[Trajectory] = []
        self.paused: list[Trajectory] = []
        self.next_id = 1
        self.current_frame = 0

    def step(
        self,
        detections: list[Detection],
        frame: int | None = None,
        predictions: list[BBox | None] | None = None,
    ) -> list[TrackOutput]:
        """Advance one frame.

        Args:
            detections: detections of the new frame, already confidence
                filtered and NMS'd. All must carry the same frame index.
            frame: frame being processed; defaults to the detections' frame
                (or current + ``frame_gap`` when there are none).
            predictions: optional externally predicted boxes, aligned
                index-wise with ``self.active`` as it stands at call time.
                ``None`` entries fall back to linear propagation.

        Returns:
            One output per surviving trajectory that has a box this frame;
            entries from propagation are flagged ``interpolated``.
        """
        cfg = self.config
        if frame is None:
            frame = detections[0].frame if detections else self.current_frame + cfg.frame_gap
        if frame <= self.current_frame:
            raise ValueError(f"frame {frame} does not advance past {self.current_frame}")
        for d in detections:
            if d.frame != frame:
                raise ValueError(f"detection frame {d.frame} does not match step frame {frame}")
        if predictions is not None and len(predictions) != len(self.active):
            raise ValueError(
                f"got {len(predictions)} predictions for {len(self.active)} active trajectories"
            )

        # Trajectories unseen longer than the buffer allows are gone for good.
        self.active = [t for t in self.active if frame - t.last_seen <= cfg.buffer_size]
        self.paused = [t for t in self.paused if frame - t.last_seen <= cfg.buffer_size]
        pred_by_id: dict[int, BBox] = {}
        if predictions is not None:
            pred_by_id = {t.track_id: p for t, p in zip(self.active, predictions) if p is not None}

        outputs: list[TrackOutput] = []
        det_taken = [False] * len(detections)

        # Phase 1: active set vs detections, blended affinity.
        new_active: list[Trajectory] = []
        unmatched_active: list[Trajectory] = []
        if self.active and detections:
            matrix = combined_affinity(self.active, detections, cfg.weights)
            result = solve_max(matrix, cfg.min_affinity)
            matched = {i: j for i, j in result.pairs}
        else:
            matched = {}
        for i, traj in enumerate(self.active):
            j = matched.get(i)
            if j is None:
                unmatched_active.append(traj)
                continue
            det_taken[j] = True
            updated = replace(update_trajectory(traj, detections[j], cfg.embedding_momentum), last_det_index=j)
            new_active.append(updated)
            outputs.append(TrackOutput(frame, updated.track_id, updated.head_box, updated.last_confidence))

        # Phase 2: identity-only recovery from the paused buffer, one
        # Hungarian solve per level, most recent level first.
        still_paused = list(self.paused)
        if cfg.weights.identity > 0.0 and still_paused:
            id_only = AffinityWeights(0.0, 1.0)
            for level in range(2, cfg.buffer_size + 1):
                cand = [t for t in still_paused if frame - t.last_seen == level]
                free = [j for j, taken in enumerate(det_taken) if not taken and detections[j].embedding is not None]
                if not cand or not free:
                    continue
                matrix = combined_affinity(cand, [detections[j] for j in free], id_only)
                result = solve_max(matrix, cfg.min_affinity)
                recovered_ids = set()
                for ci, fj in result.pairs:
                    j = free[fj]
                    det_taken[j] = True
                    updated = replace(
                        update_trajectory(cand[ci], detections[j], cfg.embedding_momentum),
                        last_det_index=j,
                    )
                    new_active.append(updated)
                    recovered_ids.add(cand[ci].track_id)
                    outputs.append(TrackOutput(frame, updated.track_id, updated.head_box, updated.last_confidence))
                if recovered_ids:
                    still_paused = [t for t in still_paused if t.track_id not in recovered_ids]

        # Phase 3: leftovers become new trajectories.
        for j, det in enumerate(detections):
            if det_taken[j]:
                continue
            traj = Trajectory(
                track_id=self.next_id,
                head_box=det.box,
                head_embedding=det.embedding,
                avg_velocity=(0.0, 0.0),
                last_seen=frame,
                last_confidence=det.confidence,
                last_det_index=j,
            )
            self.next_id += 1
            new_active.append(traj)
            outputs.append(TrackOutput(frame, traj.track_id, traj.head_box, det.confidence))

        # Phase 4: unmatched trajectories either coast on a predicted/linear
        # head (and stay in the active set) or fall into the paused buffer.
        new_paused: list[Trajectory] = still_paused
        for traj in unmatched_active:
            missed = frame - traj.last_seen
            if missed <= cfg.motion_propagate_frames:
                head = pred_by_id.get(traj.track_id)
                if head is None:
                    head = propagate_linear(traj, steps=frame - traj.head_frame)
                coasting = replace(
                    traj,
                    head_box=head,
                    head_frame=frame,
                    paused_for=missed,
                    age=frame - traj.first_frame + 1,
                    last_det_index=None,
                )
                new_active.append(coasting)
                outputs.append(
                    TrackOutput(frame, coasting.track_id, head, coasting.last_confidence, interpolated=True)
                )
            else:
                new_paused.append(replace(traj, paused_for=missed, last_det_index=None))

        self.active = new_active
        self.paused = new_paused
        self.current_frame = frame
        return outputs


def track_stream(
    dets,
    config: TrackerConfig | None = None,
    predictions=None,
    nms_iou: float = DEFAULT_NMS_IOU,
) -> list[TrackOutput]:
    """Run a fresh tracker over a whole detection stream.

    Args:
        dets: mapping frame -> list of Detection; frames 1..max are stepped,
            missing ones as empty.
        config: tracker configuration (defaults apply when omitted).
        predictions: optional mapping (frame, det_index) -> BBox giving the
            predicted next-frame box for a detection, indexed by the
            detection's position in the frame's raw list (before confidence
            filtering and NMS).
        nms_iou: suppression threshold applied after confidence filtering.

    Detections below ``config.det_threshold`` are dropped, then NMS runs,
    then the tracker steps every frame in order.
    """
    config = config or TrackerConfig()
    tracker = Tracker(config)
    outputs: list[TrackOutput] = []
    if not dets:
        return outputs

    prev_orig_index: list[int] = []
    for frame in range(1, max(dets) + 1):
        raw = dets.get(frame, [])
        indexed = [(i, d) for i, d in enumerate(raw) if d.confidence >= config.det_threshold]
        kept = nms([d for _, d in indexed], nms_iou)
        kept_set = {id(d) for d in kept}
        indexed = [(i, d) for i, d in indexed if id(d) in kept_set]
        frame_dets = [d for _, d in indexed]

        preds = None
        if predictions is not None:
            preds = []
            for traj in tracker.active:
                box = None
                if traj.last_seen == frame - 1 and traj.last_det_index is not None:
                    orig = prev_orig_index[traj.last_det_index]
                    box = predictions.get((frame - 1, orig))
                preds.append(box)

        outputs.extend(tracker.step(frame_dets, frame, preds))
        prev_orig_index = [i for i, _ in indexed]
    return outputs
