"""Command line front end.

Subcommands:
    track     run the tracker over a detection file
    eval      score a result file against ground truth
    simulate  write a synthetic gt/dets/embeddings benchmark
    ablate    run the stock tracker variants across frame strides

Exit codes: 0 on success, 1 on runtime failures, 2 on usage errors.
The IDTRACK_SEED environment variable overrides the simulation seed from a
config file; an explicit --seed flag beats both.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

from .affinity import WEIGHT_PRESETS, AffinityWeights
from .metrics import DEFAULT_SWEEP_THRESHOLDS, evaluate, format_report, format_table, sweep_thresholds
from .mot_io import (
    load_detections,
    read_config,
    read_gt,
    read_predictions,
    read_scored_hypotheses,
    write_detections,
    write_embeddings,
    write_gt,
    write_results,
)
from .sim import benchmark_config, config_from_mapping, generate, subsample
from .tracker import DEFAULT_NMS_IOU, TrackerConfig, track_stream

__all__ = ["main", "ABLATION_MODELS"]


def _tracker_variant(weights: AffinityWeights, propagate: int) -> TrackerConfig:
    return TrackerConfig(weights=weights, motion_propagate_frames=propagate)


# The three stock variants compared by `ablate`: association on overlap only,
# overlap plus motion coasting, and the full overlap+identity blend.
ABLATION_MODELS = {
    "iou-only": _tracker_variant(AffinityWeights(1.0, 0.0), 0),
    "iou-motion": _tracker_variant(AffinityWeights(1.0, 0.0), 5),
    "id-assoc": _tracker_variant(AffinityWeights(0.5, 0.5), 5),
}


def _resolve_weights(args) -> AffinityWeights:
    weights = AffinityWeights.preset(args.preset)
    if args.w1 is not None or args.w2 is not None:
        w1 = args.w1 if args.w1 is not None else (1.0 - args.w2)
        w2 = args.w2 if args.w2 is not None else (1.0 - args.w1)
        weights = AffinityWeights(w1, w2)
    return weights


def cmd_track(args) -> int:
    config = TrackerConfig(
        weights=_resolve_weights(args),
        buffer_size=args.buffer_size,
        min_affinity=args.min_affinity,
        det_threshold=args.det_threshold,
        motion_propagate_frames=args.propagate_frames,
        embedding_momentum=args.embedding_momentum,
    )
    dets = load_detections(args.dets, args.embeddings)
    if args.frame_stride > 1:
        dets = subsample(dets, args.frame_stride)
    predictions = read_predictions(args.predictions) if args.predictions else None
    outputs = track_stream(dets, config, predictions, nms_iou=args.nms_iou)
    write_results(args.out, outputs, include_interpolated=args.write_interpolated)
    written = sum(1 for o in outputs if args.write_interpolated or not o.interpolated)
    print(f"tracked {max(dets) if dets else 0} frames, wrote {written} boxes to {args.out}")
    return 0


def cmd_eval(args) -> int:
    gt = read_gt(args.gt)
    if args.sweep:
        thresholds = DEFAULT_SWEEP_THRESHOLDS
        if args.thresholds:
            thresholds = tuple(float(p) for p in args.thresholds.split(","))
        result = sweep_thresholds(gt, read_scored_hypotheses(args.hyp), thresholds, args.iou_gate)
        rows = [(f"thr={thr:.2f}", report) for thr, report in result.rows]
        print(format_table(rows))
        print()
        print("# per-metric best (threshold where it peaks)")
        for name, (thr, value) in result.best.items():
            if name in ("mota", "motp"):
                print(f"best_{name}={100.0 * value:.4f} threshold={thr:.2f}")
            else:
                print(f"best_{name}={value:g} threshold={thr:.2f}")
        print()
        print(f"# best-MOTA operating point (threshold {result.best_mota_threshold:.2f})")
        print(format_report(result.best_mota_report, prefix="best_mota_row_"))
    else:
        report = evaluate(gt, read_gt(args.hyp), args.iou_gate)
        print(format_table([("all", report)]))
        print()
        print(format_report(report))
    return 0


def _sim_config(args):
    if args.config:
        config = config_from_mapping(read_config(args.config))
    else:
        config = benchmark_config()
    env_seed = os.environ.get("IDTRACK_SEED")
    if env_seed is not None:
        try:
            config = replace(config, seed=int(env_seed))
        except ValueError:
            raise ValueError(f"IDTRACK_SEED must be an integer, got {env_seed!r}") from None
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    return config


def cmd_simulate(args) -> int:
    config = _sim_config(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    gt, dets = generate(config)
    write_gt(out_dir / "gt.txt", gt)
    write_detections(out_dir / "dets.txt", dets)
    write_embeddings(out_dir / "embeddings.txt", dets)
    n_dets = sum(len(v) for v in dets.values())
    print(f"seed={config.seed} frames={len(gt)} identities={config.num_identities} detections={n_dets}")
    print(f"wrote gt.txt, dets.txt, embeddings.txt to {out_dir}")
    return 0


def cmd_ablate(args) -> int:
    config = _sim_config(args)
    strides = tuple(int(p) for p in args.strides.split(","))
    if any(s < 1 for s in strides):
        raise ValueError(f"strides must be >= 1, got {args.strides}")
    gt_full, dets_full = generate(config)

    rows = []
    lines = []
    for stride in strides:
        gt = subsample(gt_full, stride) if stride > 1 else gt_full
        dets = subsample(dets_full, stride) if stride > 1 else dets_full
        for name, base in ABLATION_MODELS.items():
            variant = TrackerConfig(
                weights=base.weights,
                buffer_size=base.buffer_size,
                min_affinity=base.min_affinity,
                det_threshold=args.det_threshold,
                motion_propagate_frames=base.motion_propagate_frames,
                embedding_momentum=base.embedding_momentum,
            )
            outputs = track_stream(dets, variant)
            hyp = {}
            for o in outputs:
                if not o.interpolated:
                    hyp.setdefault(o.frame, []).append((o.track_id, o.box))
            report = evaluate(gt, hyp, args.iou_gate)
            label = f"{name}@s{stride}"
            rows.append((label, report))
            lines.append(format_report(report, prefix=f"{name.replace('-', '_')}_s{stride}_"))
            if args.out_dir:
                out_dir = Path(args.out_dir)
                out_dir.mkdir(parents=True, exist_ok=True)
                write_results(out_dir / f"{name}_s{stride}.txt", outputs)

    print(format_table(rows))
    print()
    for block in lines:
        print(block)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="idtrack", description="identity-aware multi-object tracking toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("track", help="run the tracker over a detection file")
    p.add_argument("--dets", required=True, help="MOT-format detection file")
    p.add_argument("--embeddings", help="embedding sidecar file (dim=D header)")
    p.add_argument("--predictions", help="predicted next-frame boxes keyed by frame,det_index")
    p.add_argument("--preset", default="default", choices=sorted(WEIGHT_PRESETS))
    p.add_argument("--w1", type=float, help="overlap affinity weight")
    p.add_argument("--w2", type=float, help="identity affinity weight")
    p.add_argument("--buffer-size", type=int, default=10)
    p.add_argument("--min-affinity", type=float, default=0.2)
    p.add_argument("--det-threshold", type=float, default=0.5)
    p.add_argument("--nms-iou", type=float, default=DEFAULT_NMS_IOU)
    p.add_argument("--frame-stride", type=int, default=1)
    p.add_argument("--propagate-frames", type=int, default=5)
    p.add_argument("--embedding-momentum", type=float, default=0.5)
    p.add_argument("--write-interpolated", action="store_true", help="also write propagated boxes")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("eval", help="score a result file against ground truth")
    p.add_argument("--gt", required=True)
    p.add_argument("--hyp", required=True)
    p.add_argument("--iou-gate", type=float, default=0.5)
    p.add_argument("--sweep", action="store_true", help="sweep detection-score thresholds")
    p.add_argument("--thresholds", help="comma-separated sweep thresholds (default 0.1..0.9)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("simulate", help="write a synthetic benchmark scene")
    p.add_argument("--config", help="key=value sim config file (default: stock benchmark)")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, help="override the seed")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("ablate", help="compare tracker variants across frame strides")
    p.add_argument("--config", help="key=value sim config file (default: stock benchmark)")
    p.add_argument("--strides", default="1,10")
    p.add_argument("--det-threshold", type=float, default=0.5)
    p.add_argument("--iou-gate", type=float, default=0.5)
    p.add_argument("--seed", type=int, help="override the seed")
    p.add_argument("--out-dir", help="also write each variant's result file here")
    p.set_defaults(func=cmd_ablate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
