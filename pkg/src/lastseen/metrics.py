"""Retrieval metrics over per-query (prediction, ground-truth) pairs, plus
frame-level detection AP/AR in positive-only and positive+negative modes."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

from .core import Box, FrameIndex, ResponseTrack, ScoredTrack, box_iou, st_iou, temporal_iou

# COCO-style IoU ladder: 0.50, 0.55, ..., 0.95 (exact decimals).
FRAME_IOU_THRESHOLDS = tuple((50 + 5 * i) / 100.0 for i in range(10))

DEFAULT_ST_THRESHOLD = 0.25
DEFAULT_T_THRESHOLD = 0.25
DEFAULT_SUCCESS_THRESHOLD = 0.05
DEFAULT_RECOVERY_IOU = 0.5


@dataclass(frozen=True)
class QueryResult:
    """One query's prediction (possibly absent) against its ground truth."""

    query_id: str
    prediction: ScoredTrack | None
    ground_truth: ResponseTrack

    def __post_init__(self) -> None:
        if (
            self.prediction is not None
            and self.prediction.track.video_id != self.ground_truth.video_id
        ):
            raise ValueError(
                f"query {self.query_id}: prediction video "
                f"{self.prediction.track.video_id!r} != ground truth video "
                f"{self.ground_truth.video_id!r}"
            )


@dataclass(frozen=True)
class EvalReport:
    """Headline retrieval numbers for one result set.

    ``st_ap_25`` / ``t_ap_25`` are named for the conventional 0.25 threshold;
    callers overriding the thresholds keep the field names.
    """

    st_ap_25: float
    t_ap_25: float
    success_rate: float
    recovery: float
    num_queries: int

    def to_record(self) -> dict:
        return {
            "st_ap_25": self.st_ap_25,
            "t_ap_25": self.t_ap_25,
            "success_rate": self.success_rate,
            "recovery": self.recovery,
            "num_queries": self.num_queries,
        }


@dataclass(frozen=True)
class FrameDetections:
    """Detections of one frame, with its single optional ground-truth box."""

    frame: FrameIndex
    is_positive_frame: bool
    detections: tuple[tuple[Box, float], ...]
    gt_box: Box | None

    def __post_init__(self) -> None:
        if self.is_positive_frame != (self.gt_box is not None):
            raise ValueError(
                f"frame {self.frame}: gt_box must be present exactly when the frame is positive"
            )
        object.__setattr__(self, "detections", tuple(self.detections))


@dataclass(frozen=True)
class FrameEvalResult:
    ap: float
    ap50: float
    ap75: float
    ar10: float


def average_precision(ranked: list[tuple[float, bool]], num_ground_truth: int) -> float:
    """All-points uninterpolated AP over a (confidence, is_true_positive) list.

    Sorting is by confidence descending with ties broken by input order, so
    the result is deterministic for any stable pre-ordering of the input.
    """
    if num_ground_truth < 1:
        raise ValueError(f"num_ground_truth must be >= 1, got {num_ground_truth}")
    ordered = sorted(ranked, key=lambda item: -item[0])
    ap = 0.0
    tp = 0
    for rank, (_, is_tp) in enumerate(ordered, start=1):
        if is_tp:
            tp += 1
            ap += tp / rank
    return ap / num_ground_truth


def _check_unique_query_ids(results: list[QueryResult]) -> None:
    seen = set()
    for r in results:
        if r.query_id in seen:
            raise ValueError(f"duplicate query_id {r.query_id!r} in result set")
        seen.add(r.query_id)


def _tube_ap(results: list[QueryResult], threshold: float, overlap) -> float:
    if not 0 < threshold < 1:
        raise ValueError(f"threshold must be in (0, 1), got {threshold}")
    _check_unique_query_ids(results)
    if not results:
        raise ValueError("cannot compute AP over an empty result set")
    ranked = [
        (r.prediction.confidence, overlap(r.prediction.track, r.ground_truth) >= threshold)
        for r in results
        if r.prediction is not None
    ]
    return average_precision(ranked, num_ground_truth=len(results))


def st_ap(results: list[QueryResult], threshold: float = DEFAULT_ST_THRESHOLD) -> float:
    """AP where a prediction is correct iff its spatio-temporal tube IoU with
    the ground truth meets ``threshold``; unanswered queries count as missed
    ground truth."""
    return _tube_ap(results, threshold, st_iou)


def t_ap(results: list[QueryResult], threshold: float = DEFAULT_T_THRESHOLD) -> float:
    """AP on temporal-extent IoU alone."""
    return _tube_ap(
        results,
        threshold,
        lambda p, g: temporal_iou((p.start, p.end), (g.start, g.end)),
    )


def success_rate(results: list[QueryResult], threshold: float = DEFAULT_SUCCESS_THRESHOLD) -> float:
    """Percentage of queries whose prediction overlaps ground truth with
    st_iou >= ``threshold``."""
    if not results:
        raise ValueError("cannot compute success rate over an empty result set")
    hits = sum(
        1
        for r in results
        if r.prediction is not None and st_iou(r.prediction.track, r.ground_truth) >= threshold
    )
    return 100.0 * hits / len(results)


def recovery(results: list[QueryResult], iou_threshold: float = DEFAULT_RECOVERY_IOU) -> float:
    """Mean percentage of ground-truth frames whose box the prediction
    recovers with spatial IoU >= ``iou_threshold``."""
    if not results:
        raise ValueError("cannot compute recovery over an empty result set")
    total = 0.0
    for r in results:
        gt = r.ground_truth
        if r.prediction is None:
            continue
        pred = r.prediction.track
        recovered = 0
        for frame in gt.frames():
            p = pred.box_at(frame)
            if p is not None and box_iou(p, gt.box_at(frame)) >= iou_threshold:
                recovered += 1
        total += recovered / len(gt.boxes)
    return 100.0 * total / len(results)


def build_report(
    results: list[QueryResult],
    st_threshold: float = DEFAULT_ST_THRESHOLD,
    t_threshold: float = DEFAULT_T_THRESHOLD,
    success_threshold: float = DEFAULT_SUCCESS_THRESHOLD,
    recovery_iou: float = DEFAULT_RECOVERY_IOU,
) -> EvalReport:
    return EvalReport(
        st_ap_25=st_ap(results, st_threshold),
        t_ap_25=t_ap(results, t_threshold),
        success_rate=success_rate(results, success_threshold),
        recovery=recovery(results, recovery_iou),
        num_queries=len(results),
    )


def _match_frame(
    frame: FrameDetections, iou_threshold: float, top_k: int | None
) -> list[tuple[float, bool]]:
    """Greedy confidence-ordered matching of one frame's detections against
    its (at most one) ground-truth box."""
    dets = sorted(frame.detections, key=lambda d: -d[1])
    if top_k is not None:
        dets = dets[:top_k]
    out = []
    gt_matched = False
    for det_box, score in dets:
        is_tp = (
            frame.is_positive_frame
            and not gt_matched
            and box_iou(det_box, frame.gt_box) >= iou_threshold
        )
        if is_tp:
            gt_matched = True
        out.append((score, is_tp))
    return out


def frame_detection_eval(
    frames: list[FrameDetections],
    mode: Literal["pos_only", "pos_and_neg"],
) -> FrameEvalResult:
    """COCO-style frame-level detection scores.

    ``pos_only`` drops negative frames before scoring (their detections can
    never hurt); ``pos_and_neg`` keeps them, turning every detection on a
    negative frame into an unconditional false positive.
    """
    if mode not in ("pos_only", "pos_and_neg"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "pos_only":
        frames = [f for f in frames if f.is_positive_frame]
    num_gt = sum(1 for f in frames if f.is_positive_frame)
    if num_gt == 0:
        raise ValueError("no positive frames to evaluate against")

    aps = []
    recalls = []
    for threshold in FRAME_IOU_THRESHOLDS:
        pooled = []
        for frame in frames:
            pooled.extend(_match_frame(frame, threshold, top_k=None))
        aps.append(average_precision(pooled, num_gt))

        capped_tp = 0
        for frame in frames:
            capped_tp += sum(1 for _, is_tp in _match_frame(frame, threshold, top_k=10) if is_tp)
        recalls.append(capped_tp / num_gt)

    return FrameEvalResult(
        ap=sum(aps) / len(aps),
        ap50=aps[0],
        ap75=aps[5],
        ar10=sum(recalls) / len(recalls),
    )
