"""Deterministic parallel evaluation over (video, query) workloads.

Queries within one video group run sequentially; groups are distributed
over worker processes. Determinism comes from separating computation
(unordered) from reduction (canonically ordered by query_id), never from
serializing execution.
"""

from __future__ import annotations

import os
import random
from concurrent.futures import FIRST_COMPLETED, ProcessPoolExecutor, wait
from dataclasses import dataclass
from typing import Callable, Literal

from .core import ResponseTrack, ScoredTrack, VisualQuery
from .frames import FrameStore
from .metrics import (
    DEFAULT_RECOVERY_IOU,
    DEFAULT_ST_THRESHOLD,
    DEFAULT_SUCCESS_THRESHOLD,
    DEFAULT_T_THRESHOLD,
    EvalReport,
    QueryResult,
    build_report,
)
from .pipeline import TrackerConfig, answer_query
from .scoring import FrameScorer

WORKERS_ENV_VAR = "LASTSEEN_WORKERS"


def default_worker_count() -> int:
    env = os.environ.get(WORKERS_ENV_VAR)
    if env is not None:
        workers = int(env)
        if workers < 1:
            raise ValueError(f"{WORKERS_ENV_VAR} must be >= 1, got {workers}")
        return workers
    return os.cpu_count() or 1


@dataclass(frozen=True)
class Workload:
    """Queries grouped by video, with ground truth for every query."""

    groups: tuple[tuple[str, tuple[VisualQuery, ...]], ...]
    ground_truth: dict[str, ResponseTrack]

    def __post_init__(self) -> None:
        seen_videos = set()
        seen_queries = set()
        for video_id, queries in self.groups:
            if video_id in seen_videos:
                raise ValueError(f"video {video_id!r} appears in more than one group")
            seen_videos.add(video_id)
            for q in queries:
                if q.video_id != video_id:
                    raise ValueError(
                        f"query {q.query_id!r} targets video {q.video_id!r} but sits in "
                        f"group {video_id!r}"
                    )
                if q.query_id in seen_queries:
                    raise ValueError(f"duplicate query_id {q.query_id!r}")
                seen_queries.add(q.query_id)
                if q.query_id not in self.ground_truth:
                    raise ValueError(f"query {q.query_id!r} has no ground truth")

    def num_queries(self) -> int:
        return sum(len(queries) for _, queries in self.groups)

    def all_queries(self) -> list[VisualQuery]:
        return [q for _, queries in self.groups for q in queries]


@dataclass(frozen=True)
class HarnessConfig:
    """``workers`` defaults to LASTSEEN_WORKERS or the core count;
    ``shuffle_seed`` only reorders scheduling, never results."""

    workers: int = 0  # 0 -> default_worker_count()
    shuffle_seed: int = 0
    group_size: int = 1

    def __post_init__(self) -> None:
        if self.workers < 0:
            raise ValueError("workers must be >= 1 (or 0 for the default)")
        if self.group_size < 1:
            raise ValueError("group_size must be >= 1")

    def effective_workers(self) -> int:
        return self.workers if self.workers >= 1 else default_worker_count()


Outcome = Literal["answered", "no_response", "error"]


@dataclass(frozen=True)
class QueryOutcome:
    """Per-query record written to the results file."""

    query_id: str
    video_id: str
    outcome: Outcome
    confidence: float | None = None
    peak_frame: int | None = None
    track: ResponseTrack | None = None
    error: str | None = None


def _run_group(
    store: FrameStore,
    queries: tuple[VisualQuery, ...],
    scorer: FrameScorer,
    tracker: TrackerConfig,
) -> list[QueryOutcome]:
    """Sequential evaluation of one video group; per-query failures become
    error outcomes without aborting the group."""
    outcomes = []
    for query in queries:
        try:
            answer = answer_query(store, query, scorer, tracker)
        except Exception as exc:
            outcomes.append(
                QueryOutcome(query.query_id, query.video_id, "error", error=str(exc))
            )
            continue
        if answer.scored is None:
            outcomes.append(QueryOutcome(query.query_id, query.video_id, "no_response"))
        else:
            outcomes.append(
                QueryOutcome(
                    query.query_id,
                    query.video_id,
                    "answered",
                    confidence=answer.scored.confidence,
                    peak_frame=answer.peak.frame,
                    track=answer.scored.track,
                )
            )
    return outcomes


def _chunk_errored(chunk: list[tuple[str, tuple[VisualQuery, ...]]], reason: str):
    return [
        QueryOutcome(q.query_id, q.video_id, "error", error=reason)
        for _, queries in chunk
        for q in queries
    ]


def _run_chunk(args) -> list[QueryOutcome]:
    store, chunk, scorer, tracker = args
    out = []
    for _, queries in chunk:
        out.extend(_run_group(store, queries, scorer, tracker))
    return out


def outcomes_to_results(workload: Workload, outcomes: list[QueryOutcome]) -> list[QueryResult]:
    """Pair outcomes with ground truth, ordered by query_id. Anything but a
    clean answer — including a query missing from ``outcomes`` — counts as
    unanswered; outcomes for unknown queries are a caller bug."""
    by_id: dict[str, QueryOutcome] = {}
    for o in outcomes:
        if o.query_id not in workload.ground_truth:
            raise ValueError(f"outcome for unknown query {o.query_id!r}")
        if o.query_id in by_id:
            raise ValueError(f"duplicate outcome for query {o.query_id!r}")
        by_id[o.query_id] = o
    results = []
    for query_id in sorted(workload.ground_truth):
        o = by_id.get(query_id)
        prediction = None
        if o is not None and o.outcome == "answered":
            prediction = ScoredTrack(o.track, o.confidence)
        results.append(QueryResult(query_id, prediction, workload.ground_truth[query_id]))
    return results


def evaluate_parallel(
    store: FrameStore,
    workload: Workload,
    scorer: FrameScorer,
    cfg: HarnessConfig = HarnessConfig(),
    tracker: TrackerConfig = TrackerConfig(),
    st_threshold: float = DEFAULT_ST_THRESHOLD,
    t_threshold: float = DEFAULT_T_THRESHOLD,
    success_threshold: float = DEFAULT_SUCCESS_THRESHOLD,
    recovery_iou: float = DEFAULT_RECOVERY_IOU,
    progress: Callable[[int, int], None] | None = None,
) -> tuple[EvalReport, list[QueryOutcome]]:
    """Evaluate the whole workload; report and per-query outcomes are
    byte-identical for any worker count.

    A failed chunk is retried once inline before its queries are marked
    errored; errored queries count as unanswered in the report.
    """
    if not workload.groups:
        raise ValueError("workload has no video groups to evaluate")
    total = workload.num_queries()

    groups = list(workload.groups)
    random.Random(cfg.shuffle_seed).shuffle(groups)
    chunks = [groups[i : i + cfg.group_size] for i in range(0, len(groups), cfg.group_size)]

    workers = min(cfg.effective_workers(), len(chunks))
    outcomes: list[QueryOutcome] = []
    completed = 0

    def note_done(chunk_outcomes: list[QueryOutcome]) -> None:
        nonlocal completed
        outcomes.extend(chunk_outcomes)
        completed += len(chunk_outcomes)
        if progress is not None:
            progress(completed, total)

    def run_inline(chunk) -> list[QueryOutcome]:
        try:
            return _run_chunk((store, chunk, scorer, tracker))
        except Exception as exc:
            return _chunk_errored(chunk, f"group failed twice: {exc}")

    if workers == 1:
        for chunk in chunks:
            note_done(run_inline(chunk))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            pending = {
                pool.submit(_run_chunk, (store, chunk, scorer, tracker)): chunk
                for chunk in chunks
            }
            while pending:
                done, _ = wait(pending, return_when=FIRST_COMPLETED)
                for future in done:
                    chunk = pending.pop(future)
                    try:
                        note_done(future.result())
                    except Exception:
                        note_done(run_inline(chunk))

    outcomes.sort(key=lambda o: o.query_id)
    results = outcomes_to_results(workload, outcomes)
    report = build_report(results, st_threshold, t_threshold, success_threshold, recovery_iou)
    return report, outcomes
