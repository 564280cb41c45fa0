"""Command-line surface: synth, infer, evaluate, sample, curve."""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from . import metrics
from .formats import (
    BatchManifest,
    load_annotations,
    load_predictions,
    load_proposals,
    render_report,
    save_batch_manifest,
    save_predictions,
)
from .frames import FrameStore
from .harness import HarnessConfig, evaluate_parallel, outcomes_to_results
from .pipeline import TrackerConfig, score_frames
from .sampler import BatchSpec, GroundTruthContext, balance_batch, classify_proposal
from .scoring import DEFAULT_SCALES, DEFAULT_STRIDE, DetectionsFileScorer, NccScorer
from .synth import SynthConfig, synth_generate


def _parse_scales(text: str) -> tuple[float, ...]:
    try:
        scales = tuple(float(part) for part in text.split(","))
    except ValueError:
        raise ValueError(f"bad --scales {text!r}, expected comma-separated ratios") from None
    if not scales or any(s <= 0 for s in scales):
        raise ValueError(f"bad --scales {text!r}, ratios must be positive")
    return scales


def _parse_ratio(text: str) -> tuple[int, int]:
    parts = text.split(":")
    if len(parts) != 2:
        raise ValueError(f"bad --ratio {text!r}, expected POS:NEG like 1:64")
    try:
        pos, neg = int(parts[0]), int(parts[1])
    except ValueError:
        raise ValueError(f"bad --ratio {text!r}, expected POS:NEG like 1:64") from None
    return pos, neg


def _build_scorer(args):
    if args.scorer == "ncc":
        return NccScorer(scales=_parse_scales(args.scales), stride=args.stride)
    if args.detections is None:
        raise ValueError("--scorer detections-file requires --detections")
    return DetectionsFileScorer(args.detections)


def _add_scorer_flags(parser):
    parser.add_argument(
        "--scorer", choices=["ncc", "detections-file"], default="ncc", help="frame scorer"
    )
    parser.add_argument("--detections", help="detections file for --scorer detections-file")
    parser.add_argument(
        "--scales",
        default=",".join(str(s) for s in DEFAULT_SCALES),
        help="NCC template scales, comma-separated",
    )
    parser.add_argument(
        "--stride", type=int, default=DEFAULT_STRIDE, help="NCC coarse scan stride in px"
    )


def _cmd_synth(args) -> int:
    scenarios = set(args.scenario or [])
    cfg = SynthConfig(
        num_videos=args.videos,
        frames_per_video=args.frames,
        width=args.width,
        height=args.height,
        rng_seed=args.seed,
        texture_seed=args.texture_seed,
        distractor_similar="distractor" in scenarios,
        ambiguous_context="ambiguous" in scenarios,
        blur_background="blur" in scenarios,
        distractor_noise=args.distractor_noise,
    )
    frames_root, annotations = synth_generate(cfg, args.out)
    print(f"wrote {cfg.num_videos} videos under {frames_root} and {annotations}")
    return 0


def _cmd_infer(args) -> int:
    store = FrameStore(args.frames)
    workload = load_annotations(args.annotations)
    scorer = _build_scorer(args)
    cfg = HarnessConfig(
        workers=args.workers, shuffle_seed=args.shuffle_seed, group_size=args.group_size
    )
    tracker = TrackerConfig(
        stop_threshold=args.stop_threshold,
        search_margin=args.search_margin,
        template_update=args.template_update,
    )
    report, outcomes = evaluate_parallel(store, workload, scorer, cfg, tracker)
    save_predictions(args.out, outcomes)
    print(render_report(report, "json"), end="")
    return 0


def _cmd_evaluate(args) -> int:
    workload = load_annotations(args.annotations)
    results = outcomes_to_results(workload, load_predictions(args.predictions))
    report = metrics.build_report(
        results,
        st_threshold=args.st_thresh,
        t_threshold=args.t_thresh,
        success_threshold=args.succ_thresh,
        recovery_iou=args.recovery_iou,
    )
    print(render_report(report, args.report), end="")
    return 0


def _cmd_sample(args) -> int:
    proposals = load_proposals(args.proposals)
    workload = load_annotations(args.annotations)
    ratio_pos, ratio_neg = _parse_ratio(args.ratio)
    spec = BatchSpec(ratio_pos=ratio_pos, ratio_neg=ratio_neg, mining_k=args.mining_k)
    if args.query_id is not None:
        if args.query_id not in workload.ground_truth:
            raise ValueError(f"query {args.query_id!r} not in {args.annotations}")
        query_ids = [args.query_id]
    else:
        query_ids = sorted(workload.ground_truth)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for qid in query_ids:
        gt = workload.ground_truth[qid]
        ctx = GroundTruthContext(gt.video_id, gt)
        positives = [p for p in proposals if classify_proposal(p, ctx) == "positive"]
        negatives = [p for p in proposals if classify_proposal(p, ctx) == "negative"]
        batch = balance_batch(positives, negatives, spec, seed=args.seed)
        manifest = BatchManifest(
            query_id=qid,
            ratio_pos=ratio_pos,
            ratio_neg=ratio_neg,
            mining_k=args.mining_k,
            seed=args.seed,
            batch=batch,
        )
        save_batch_manifest(out_dir / f"batch_{qid}.jsonl", manifest)
    print(f"wrote {len(query_ids)} batch manifest(s) to {out_dir}")
    return 0


def _cmd_curve(args) -> int:
    store = FrameStore(args.frames)
    workload = load_annotations(args.annotations)
    query = next(
        (q for q in workload.all_queries() if q.query_id == args.query_id), None
    )
    if query is None:
        raise ValueError(f"query {args.query_id!r} not in {args.annotations}")
    scorer = _build_scorer(args)
    crop = store.load_box(query.crop_video_id, query.crop_frame, query.crop_box)
    curve = score_frames(store, query.video_id, (0, query.query_frame - 1), crop, scorer)

    out = sys.stdout if args.out == "-" else open(args.out, "w", newline="", encoding="utf-8")
    try:
        writer = csv.writer(out)
        writer.writerow(["frame", "score", "x", "y", "w", "h"])
        for i, point in enumerate(curve.points):
            if point.box is None:
                writer.writerow([curve.first_frame + i, point.score, "", "", "", ""])
            else:
                b = point.box
                writer.writerow([curve.first_frame + i, point.score, b.x, b.y, b.w, b.h])
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lastseen",
        description="Visual-query video object retrieval toolkit.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset with exact ground truth")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--videos", type=int, default=8)
    p.add_argument("--frames", type=int, default=40, help="frames per video")
    p.add_argument("--width", type=int, default=160)
    p.add_argument("--height", type=int, default=120)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--texture-seed", type=int, default=7)
    p.add_argument(
        "--scenario",
        action="append",
        choices=["distractor", "ambiguous", "blur"],
        help="failure scenario to enable; repeatable",
    )
    p.add_argument("--distractor-noise", type=float, default=0.0)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("infer", help="run the retrieval pipeline over a workload")
    p.add_argument("--annotations", required=True)
    p.add_argument("--frames", required=True, help="frame store root")
    _add_scorer_flags(p)
    p.add_argument("--workers", type=int, default=0, help="0 = LASTSEEN_WORKERS or cores")
    p.add_argument("--group-size", type=int, default=1, help="videos per worker group")
    p.add_argument("--shuffle-seed", type=int, default=0)
    p.add_argument("--stop-threshold", type=float, default=0.6)
    p.add_argument("--search-margin", type=float, default=None)
    p.add_argument(
        "--template-update", choices=["none", "every_frame"], default="none"
    )
    p.add_argument("--out", required=True, help="per-query predictions file")
    p.set_defaults(func=_cmd_infer)

    p = sub.add_parser("evaluate", help="score a predictions file against ground truth")
    p.add_argument("--predictions", required=True)
    p.add_argument("--annotations", required=True)
    p.add_argument("--st-thresh", type=float, default=metrics.DEFAULT_ST_THRESHOLD)
    p.add_argument("--t-thresh", type=float, default=metrics.DEFAULT_T_THRESHOLD)
    p.add_argument("--succ-thresh", type=float, default=metrics.DEFAULT_SUCCESS_THRESHOLD)
    p.add_argument("--recovery-iou", type=float, default=metrics.DEFAULT_RECOVERY_IOU)
    p.add_argument("--report", choices=["json", "text"], default="json")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("sample", help="emit balanced training-batch manifests")
    p.add_argument("--proposals", required=True)
    p.add_argument("--annotations", required=True)
    p.add_argument("--out", required=True, help="output directory for manifests")
    p.add_argument("--ratio", default="1:64", help="positive:negative balance")
    p.add_argument("--mining-k", type=int, default=None, help="hard-mining budget")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--query-id", default=None, help="only this query (default: all)")
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("curve", help="emit one query's similarity curve as CSV")
    p.add_argument("--annotations", required=True)
    p.add_argument("--frames", required=True)
    p.add_argument("--query-id", required=True)
    _add_scorer_flags(p)
    p.add_argument("--out", default="-", help="CSV path, or - for stdout")
    p.set_defaults(func=_cmd_curve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
