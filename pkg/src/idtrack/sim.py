"""Deterministic synthetic scenes for benchmarking the tracker.

Identities move piecewise-linearly inside a rectangular arena, bouncing off
the walls, with occasional seeded direction kicks. Detections are the true
boxes plus Gaussian center/size noise, random misses, scheduled occlusion
windows (full suppression) and uniformly scattered false positives. Each
identity owns a unit-norm appearance prototype on the embedding sphere;
detection embeddings are the prototype plus isotropic noise, re-normalized.

All randomness comes from one numpy Philox (4x64 counter-based) generator
seeded from ``SimConfig.seed``, and draws happen in a fixed order, so the
same config reproduces the same scene bit for bit. ``frame_stride`` never
changes the underlying world: the full scene is generated first and then
subsampled, which emulates dropping the frame rate by that factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Mapping

import numpy as np

from .geometry import BBox, Detection

__all__ = ["SimConfig", "generate", "subsample", "benchmark_config", "config_from_mapping"]


@dataclass(frozen=True)
class SimConfig:
    seed: int = 0
    num_identities: int = 20
    frames: int = 200
    arena: tuple[float, float] = (1280.0, 720.0)
    speed_range: tuple[float, float] = (1.0, 4.0)
    box_size_range: tuple[float, float] = (30.0, 70.0)
    center_noise: float = 1.0
    size_noise: float = 0.03
    miss_rate: float = 0.05
    fp_rate: float = 0.2
    occlusion_events: int = 0
    occlusion_duration: tuple[int, int] = (5, 15)
    embedding_dim: int = 64
    embedding_noise: float = 0.2
    frame_stride: int = 1
    turn_prob: float = 0.02  # chance per identity per frame of a direction kick

    def __post_init__(self):
        if self.num_identities < 1 or self.frames < 1:
            raise ValueError("need at least one identity and one frame")
        if self.frame_stride < 1:
            raise ValueError("frame_stride must be >= 1")
        if self.embedding_dim < 2:
            raise ValueError("embedding_dim must be >= 2")
        for name in ("speed_range", "box_size_range"):
            lo, hi = getattr(self, name)
            if lo < 0 or hi < lo:
                raise ValueError(f"{name} must satisfy 0 <= lo <= hi")
        if self.box_size_range[1] >= min(self.arena):
            raise ValueError("boxes must fit inside the arena")
        lo, hi = self.occlusion_duration
        if lo < 1 or hi < lo:
            raise ValueError("occlusion_duration must satisfy 1 <= lo <= hi")
        for name in ("center_noise", "size_noise", "embedding_noise", "miss_rate", "fp_rate", "turn_prob"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


def benchmark_config(seed: int = 7) -> SimConfig:
    """The stock ablation scene: 32 identities, 520 frames, occlusions on.

    Speeds and box sizes are chosen so that at a frame stride of 10 the
    per-frame displacement straddles the point where plain IoU association
    falls apart, while at stride 1 it stays trivially matchable.
    """
    return SimConfig(
        seed=seed,
        num_identities=32,
        frames=520,
        arena=(1600.0, 900.0),
        speed_range=(1.2, 4.2),
        box_size_range=(36.0, 72.0),
        center_noise=1.0,
        size_noise=0.02,
        miss_rate=0.04,
        fp_rate=0.3,
        occlusion_events=12,
        occlusion_duration=(5, 14),
        embedding_dim=64,
        embedding_noise=0.15,
        frame_stride=1,
        turn_prob=0.02,
    )


def _unit(vec: np.ndarray) -> np.ndarray:
    return vec / np.linalg.norm(vec)


def _bounce(p: float, v: float, lo: float, hi: float) -> tuple[float, float]:
    if hi <= lo:
        return lo, v
    while p < lo or p > hi:
        if p < lo:
            p, v = 2.0 * lo - p, -v
        else:
            p, v = 2.0 * hi - p, -v
    return p, v


def generate(config: SimConfig) -> tuple[dict[int, list[tuple[int, BBox]]], dict[int, list[Detection]]]:
    """Build (gt, dets) streams, both keyed by 1-based frame index.

    gt holds (identity, box) pairs for every identity in every frame; dets
    holds Detection objects (noisy boxes, confidence, unit embedding) in
    identity order followed by that frame's false positives.
    """
    rng = np.random.Generator(np.random.Philox(config.seed))
    n = config.num_identities
    width, height = config.arena

    protos = np.empty((n, config.embedding_dim))
    sizes = np.empty((n, 2))
    pos = np.empty((n, 2))
    vel = np.empty((n, 2))
    for i in range(n):
        protos[i] = _unit(rng.normal(size=config.embedding_dim))
        w = rng.uniform(*config.box_size_range)
        h = rng.uniform(*config.box_size_range)
        sizes[i] = (w, h)
        pos[i] = (rng.uniform(w / 2, width - w / 2), rng.uniform(h / 2, height - h / 2))
        speed = rng.uniform(*config.speed_range)
        angle = rng.uniform(0.0, 2.0 * math.pi)
        vel[i] = (speed * math.cos(angle), speed * math.sin(angle))

    occluded = np.zeros((n, config.frames + 1), dtype=bool)
    for _ in range(config.occlusion_events):
        who = int(rng.integers(0, n))
        start = int(rng.integers(1, config.frames + 1))
        dur = int(rng.integers(config.occlusion_duration[0], config.occlusion_duration[1] + 1))
        occluded[who, start:min(start + dur, config.frames + 1)] = True

    gt: dict[int, list[tuple[int, BBox]]] = {}
    dets: dict[int, list[Detection]] = {}
    for t in range(1, config.frames + 1):
        gt_frame: list[tuple[int, BBox]] = []
        det_frame: list[Detection] = []
        for i in range(n):
            if rng.random() < config.turn_prob:
                speed = math.hypot(*vel[i])
                angle = rng.uniform(0.0, 2.0 * math.pi)
                vel[i] = (speed * math.cos(angle), speed * math.sin(angle))
            w, h = sizes[i]
            pos[i, 0] += vel[i, 0]
            pos[i, 1] += vel[i, 1]
            pos[i, 0], vel[i, 0] = _bounce(pos[i, 0], vel[i, 0], w / 2, width - w / 2)
            pos[i, 1], vel[i, 1] = _bounce(pos[i, 1], vel[i, 1], h / 2, height - h / 2)
            box = BBox(pos[i, 0], pos[i, 1], w, h)
            gt_frame.append((i + 1, box))

            if occluded[i, t]:
                continue
            if rng.random() < config.miss_rate:
                continue
            noisy = BBox(
                box.cx + config.center_noise * rng.normal(),
                box.cy + config.center_noise * rng.normal(),
                box.w * math.exp(config.size_noise * rng.normal()),
                box.h * math.exp(config.size_noise * rng.normal()),
            )
            conf = 0.55 + 0.44 * rng.random()
            emb = _unit(protos[i] + config.embedding_noise * rng.normal(size=config.embedding_dim))
            det_frame.append(Detection(noisy, conf, t, emb))

        for _ in range(int(rng.poisson(config.fp_rate))):
            w = rng.uniform(*config.box_size_range)
            h = rng.uniform(*config.box_size_range)
            fp_box = BBox(
                rng.uniform(w / 2, width - w / 2),
                rng.uniform(h / 2, height - h / 2),
                w,
                h,
            )
            conf = 0.05 + 0.5 * rng.random()
            emb = _unit(rng.normal(size=config.embedding_dim))
            det_frame.append(Detection(fp_box, conf, t, emb))

        gt[t] = gt_frame
        dets[t] = det_frame

    if config.frame_stride > 1:
        gt = subsample(gt, config.frame_stride)
        dets = subsample(dets, config.frame_stride)
    return gt, dets


def subsample(stream: Mapping[int, list], stride: int) -> dict[int, list]:
    """Keep frames 1, 1+stride, 1+2*stride, ... and re-index them densely.

    Detection entries get their frame field rewritten to the new index;
    other entry types (gt tuples) are taken as-is.
    """
    if stride < 1:
        raise ValueError("stride must be >= 1")
    if not stream:
        return {}
    last = max(stream)
    out: dict[int, list] = {}
    for new_idx, orig in enumerate(range(1, last + 1, stride), start=1):
        entries = list(stream.get(orig, ()))
        entries = [replace(e, frame=new_idx) if isinstance(e, Detection) else e for e in entries]
        out[new_idx] = entries
    return out


_TUPLE_FIELDS = {
    "arena": float,
    "speed_range": float,
    "box_size_range": float,
    "occlusion_duration": int,
}
_INT_FIELDS = {"seed", "num_identities", "frames", "occlusion_events", "embedding_dim", "frame_stride"}


def config_from_mapping(values: Mapping[str, str]) -> SimConfig:
    """Build a SimConfig from string key=value pairs (e.g. a config file).

    Tuple-valued keys take comma-separated pairs, e.g. ``arena=1600,900``.
    Unknown keys raise.
    """
    kwargs = {}
    valid = SimConfig.__dataclass_fields__
    for key, raw in values.items():
        if key not in valid:
            raise ValueError(f"unknown sim config key {key!r}")
        if key in _TUPLE_FIELDS:
            parts = [p.strip() for p in raw.split(",")]
            if len(parts) != 2:
                raise ValueError(f"{key} needs two comma-separated values, got {raw!r}")
            cast = _TUPLE_FIELDS[key]
            kwargs[key] = (cast(parts[0]), cast(parts[1]))
        elif key in _INT_FIELDS:
            kwargs[key] = int(raw)
        else:
            kwargs[key] = float(raw)
    return SimConfig(**kwargs)
