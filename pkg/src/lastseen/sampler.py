"""Training-batch construction: proposal labeling against a ground-truth
track, hard-negative mining by loss, and 1:64 positive-negative balancing."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Literal

from .core import Box, FrameIndex, ResponseTrack, box_iou

POSITIVE_IOU = 0.5


@dataclass(frozen=True)
class Proposal:
    """A candidate box with provenance and, for mining, its loss value."""

    video_id: str
    frame: FrameIndex
    box: Box
    loss: float | None = None

    def __post_init__(self) -> None:
        if self.loss is not None and not math.isfinite(self.loss):
            raise ValueError(f"proposal loss must be finite, got {self.loss}")


@dataclass(frozen=True)
class GroundTruthContext:
    video_id: str
    track: ResponseTrack


@dataclass(frozen=True)
class BatchSpec:
    """Positive:negative balance plus the hard-mining budget.

    ``mining_k=None`` mines the full negative quota (top-loss first);
    a smaller k mines k and fills the rest by seeded uniform sampling.
    """

    ratio_pos: int = 1
    ratio_neg: int = 64
    mining_k: int | None = None

    def __post_init__(self) -> None:
        if self.ratio_pos < 1 or self.ratio_neg < 1:
            raise ValueError("batch ratio counts must be >= 1")
        if self.mining_k is not None and self.mining_k < 1:
            raise ValueError("mining_k must be >= 1")


@dataclass(frozen=True)
class Batch:
    positives: tuple[Proposal, ...]
    negatives: tuple[Proposal, ...]
    mined_count: int
    under_filled: bool


def classify_proposal(p: Proposal, ctx: GroundTruthContext) -> Literal["positive", "negative"]:
    """Negative iff: from another video, or temporally outside the track, or
    spatially off the track's box on that frame (IoU < 0.5). Positive
    otherwise."""
    if p.video_id != ctx.video_id:
        return "negative"
    gt_box = ctx.track.box_at(p.frame)
    if gt_box is None:
        return "negative"
    if box_iou(p.box, gt_box) < POSITIVE_IOU:
        return "negative"
    return "positive"


def _loss_order(negatives: list[Proposal]) -> list[int]:
    """Indices by loss descending, ties keeping input order."""
    for p in negatives:
        if p.loss is None:
            raise ValueError(f"proposal {p.video_id!r}@{p.frame} has no loss to mine by")
    return sorted(range(len(negatives)), key=lambda i: -negatives[i].loss)


def mine_hard_negatives(negatives: list[Proposal], k: int) -> list[Proposal]:
    """The k proposals of highest loss, descending; loss ties keep input
    order. Every input must carry a loss."""
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    return [negatives[i] for i in _loss_order(negatives)[:k]]


def balance_batch(
    positives: list[Proposal],
    negatives: list[Proposal],
    spec: BatchSpec = BatchSpec(),
    seed: int = 0,
) -> Batch:
    """Keep all positives; pick negatives up to ratio_neg per positive —
    hard-mined first, then a seeded uniform fill without replacement. Sets
    ``under_filled`` instead of padding when negatives run short."""
    if not positives:
        raise ValueError("a batch needs at least one positive proposal")
    target = len(positives) * spec.ratio_neg // spec.ratio_pos
    k = target if spec.mining_k is None else min(spec.mining_k, target)
    order = _loss_order(negatives)
    mined_idx = order[:k]
    chosen_idx = list(mined_idx)
    if len(chosen_idx) < target:
        taken = set(mined_idx)
        pool = [i for i in range(len(negatives)) if i not in taken]
        fill = random.Random(seed).sample(pool, k=min(target - len(chosen_idx), len(pool)))
        chosen_idx.extend(fill)
    return Batch(
        positives=tuple(positives),
        negatives=tuple(negatives[i] for i in chosen_idx),
        mined_count=len(mined_idx),
        under_filled=len(chosen_idx) < target,
    )
