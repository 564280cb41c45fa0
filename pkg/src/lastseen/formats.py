"""Line-delimited JSON file formats: a header record carrying the kind and
schema_version, then one record per line. Savers emit a canonical form, so
load-then-save is byte identity on anything a saver produced."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .core import Box, ResponseTrack, VisualQuery
from .harness import QueryOutcome, Workload
from .metrics import EvalReport
from .sampler import Batch, Proposal

SCHEMA_VERSION = 1


class FormatError(ValueError):
    """A file failed structural validation; message names the offender."""


def _dump_line(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":")) + "\n"


def _write_lines(path: str | Path, kind: str, records, header_extra: dict | None = None) -> None:
    header = {"kind": kind, "schema_version": SCHEMA_VERSION}
    if header_extra:
        header.update(header_extra)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_dump_line(header))
        for record in records:
            fh.write(_dump_line(record))


def _read_lines(path: str | Path, kind: str) -> tuple[dict, list[dict]]:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"{kind} file {path} does not exist")
    with open(path, encoding="utf-8") as fh:
        lines = [line for line in fh.read().splitlines() if line.strip()]
    if not lines:
        raise FormatError(f"{path}: empty file, expected a {kind} header")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: unparseable header line: {exc}") from None
    if header.get("kind") != kind:
        raise FormatError(f"{path}: expected kind {kind!r}, found {header.get('kind')!r}")
    version = header.get("schema_version")
    if version != SCHEMA_VERSION:
        raise FormatError(f"{path}: unsupported schema_version {version!r}")
    records = []
    for lineno, line in enumerate(lines[1:], start=2):
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}:{lineno}: unparseable record: {exc}") from None
    return header, records


def _box_record(box: Box) -> dict:
    return {"x": box.x, "y": box.y, "w": box.w, "h": box.h}


def _parse_box(record: dict, where: str) -> Box:
    try:
        return Box(
            float(record["x"]), float(record["y"]), float(record["w"]), float(record["h"])
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{where}: bad box {record!r}: {exc}") from None


def _track_record(track: ResponseTrack) -> dict:
    return {
        "video_id": track.video_id,
        "start": track.start,
        "boxes": [_box_record(b) for b in track.boxes],
    }


def _parse_track(record: dict, where: str) -> ResponseTrack:
    try:
        boxes = tuple(_parse_box(b, where) for b in record["boxes"])
        return ResponseTrack(record["video_id"], int(record["start"]), boxes)
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{where}: bad track: {exc}") from None


# -- annotations ------------------------------------------------------------


def save_annotations(path: str | Path, workload: Workload) -> None:
    records = []
    for video_id, queries in sorted(workload.groups, key=lambda g: g[0]):
        for q in queries:
            gt = workload.ground_truth[q.query_id]
            records.append(
                {
                    "query_id": q.query_id,
                    "video_id": q.video_id,
                    "query_frame": q.query_frame,
                    "crop": {
                        "video_id": q.crop_video_id,
                        "frame": q.crop_frame,
                        "box": _box_record(q.crop_box),
                    },
                    "gt_track": {"start": gt.start, "boxes": [_box_record(b) for b in gt.boxes]},
                }
            )
    _write_lines(path, "annotations", records)


def load_annotations(path: str | Path) -> Workload:
    """Fully validated workload; every core-type invariant is checked here."""
    _, records = _read_lines(path, "annotations")
    by_video: dict[str, list[VisualQuery]] = {}
    ground_truth: dict[str, ResponseTrack] = {}
    for record in records:
        qid = record.get("query_id")
        where = f"query {qid!r}"
        try:
            query = VisualQuery(
                query_id=str(qid),
                video_id=str(record["video_id"]),
                query_frame=int(record["query_frame"]),
                crop_video_id=str(record["crop"]["video_id"]),
                crop_frame=int(record["crop"]["frame"]),
                crop_box=_parse_box(record["crop"]["box"], f"{where} crop"),
            )
            gt = _parse_track(
                {"video_id": record["video_id"], **record["gt_track"]}, f"{where} gt_track"
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"{where}: {exc}") from None
        if qid in ground_truth:
            raise FormatError(f"duplicate query_id {qid!r}")
        if gt.end >= query.query_frame:
            raise FormatError(
                f"{where}: gt_track ends at {gt.end}, not before query_frame "
                f"{query.query_frame}"
            )
        by_video.setdefault(query.video_id, []).append(query)
        ground_truth[query.query_id] = gt
    groups = tuple((vid, tuple(by_video[vid])) for vid in sorted(by_video))
    return Workload(groups=groups, ground_truth=ground_truth)


# -- detections -------------------------------------------------------------


def save_detections(path: str | Path, table: dict[tuple[str, int], list[tuple[Box, float]]]) -> None:
    records = []
    for video_id, frame in sorted(table):
        records.append(
            {
                "video_id": video_id,
                "frame": frame,
                "detections": [
                    {"box": _box_record(b), "score": float(s)} for b, s in table[(video_id, frame)]
                ],
            }
        )
    _write_lines(path, "detections", records)


def load_detections(path: str | Path) -> dict[tuple[str, int], list[tuple[Box, float]]]:
    _, records = _read_lines(path, "detections")
    table: dict[tuple[str, int], list[tuple[Box, float]]] = {}
    last_frame: dict[str, int] = {}
    for record in records:
        try:
            video_id = str(record["video_id"])
            frame = int(record["frame"])
            where = f"detections for {video_id!r}@{frame}"
            dets = [
                (_parse_box(d["box"], where), float(d["score"])) for d in record["detections"]
            ]
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"bad detections record {record!r}: {exc}") from None
        for _, score in dets:
            if not math.isfinite(score):
                raise FormatError(f"{where}: non-finite score {score}")
        if (video_id, frame) in table:
            raise FormatError(f"{where}: duplicate frame record")
        if video_id in last_frame and frame <= last_frame[video_id]:
            raise FormatError(f"{where}: frames out of order (after {last_frame[video_id]})")
        last_frame[video_id] = frame
        table[(video_id, frame)] = dets
    return table


# -- per-query predictions --------------------------------------------------


def save_predictions(path: str | Path, outcomes: list[QueryOutcome]) -> None:
    records = []
    for o in sorted(outcomes, key=lambda o: o.query_id):
        records.append(
            {
                "query_id": o.query_id,
                "video_id": o.video_id,
                "outcome": o.outcome,
                "confidence": o.confidence,
                "peak_frame": o.peak_frame,
                "track": None if o.track is None else _track_record(o.track),
                "error": o.error,
            }
        )
    _write_lines(path, "predictions", records)


def load_predictions(path: str | Path) -> list[QueryOutcome]:
    _, records = _read_lines(path, "predictions")
    outcomes = []
    seen = set()
    for record in records:
        qid = record.get("query_id")
        where = f"prediction for query {qid!r}"
        try:
            outcome = record["outcome"]
            if outcome not in ("answered", "no_response", "error"):
                raise FormatError(f"{where}: unknown outcome {outcome!r}")
            track = None
            if record.get("track") is not None:
                track = _parse_track(record["track"], where)
            if outcome == "answered" and (track is None or record.get("confidence") is None):
                raise FormatError(f"{where}: answered outcome needs a track and confidence")
            outcomes.append(
                QueryOutcome(
                    query_id=str(qid),
                    video_id=str(record["video_id"]),
                    outcome=outcome,
                    confidence=None
                    if record.get("confidence") is None
                    else float(record["confidence"]),
                    peak_frame=None
                    if record.get("peak_frame") is None
                    else int(record["peak_frame"]),
                    track=track,
                    error=record.get("error"),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(f"{where}: {exc}") from None
        if qid in seen:
            raise FormatError(f"duplicate query_id {qid!r} in predictions")
        seen.add(qid)
    return outcomes


# -- proposals and batch manifests -------------------------------------------


def save_proposals(path: str | Path, proposals: list[Proposal]) -> None:
    _write_lines(
        path,
        "proposals",
        (
            {
                "video_id": p.video_id,
                "frame": p.frame,
                "box": _box_record(p.box),
                "loss": p.loss,
            }
            for p in proposals
        ),
    )


def load_proposals(path: str | Path) -> list[Proposal]:
    _, records = _read_lines(path, "proposals")
    out = []
    for record in records:
        where = f"proposal {record.get('video_id')!r}@{record.get('frame')!r}"
        try:
            out.append(
                Proposal(
                    video_id=str(record["video_id"]),
                    frame=int(record["frame"]),
                    box=_parse_box(record["box"], where),
                    loss=None if record.get("loss") is None else float(record["loss"]),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"{where}: {exc}") from None
    return out


@dataclass(frozen=True)
class BatchManifest:
    """One balanced training batch for one query, as written to disk."""

    query_id: str
    ratio_pos: int
    ratio_neg: int
    mining_k: int | None
    seed: int
    batch: Batch


def save_batch_manifest(path: str | Path, manifest: BatchManifest) -> None:
    b = manifest.batch
    records = []
    for p in b.positives:
        records.append(
            {
                "label": "positive",
                "video_id": p.video_id,
                "frame": p.frame,
                "box": _box_record(p.box),
                "loss": p.loss,
                "mined": False,
            }
        )
    for i, p in enumerate(b.negatives):
        records.append(
            {
                "label": "negative",
                "video_id": p.video_id,
                "frame": p.frame,
                "box": _box_record(p.box),
                "loss": p.loss,
                "mined": i < b.mined_count,
            }
        )
    _write_lines(
        path,
        "batch_manifest",
        records,
        header_extra={
            "query_id": manifest.query_id,
            "ratio_pos": manifest.ratio_pos,
            "ratio_neg": manifest.ratio_neg,
            "mining_k": manifest.mining_k,
            "seed": manifest.seed,
            "under_filled": b.under_filled,
            "num_positives": len(b.positives),
            "num_negatives": len(b.negatives),
        },
    )


def load_batch_manifest(path: str | Path) -> BatchManifest:
    header, records = _read_lines(path, "batch_manifest")
    positives = []
    negatives = []
    mined_count = 0
    for record in records:
        where = f"batch record {record.get('video_id')!r}@{record.get('frame')!r}"
        try:
            proposal = Proposal(
                video_id=str(record["video_id"]),
                frame=int(record["frame"]),
                box=_parse_box(record["box"], where),
                loss=None if record.get("loss") is None else float(record["loss"]),
            )
            label = record["label"]
            if label == "positive":
                positives.append(proposal)
            elif label == "negative":
                negatives.append(proposal)
                if record.get("mined"):
                    mined_count += 1
            else:
                raise FormatError(f"{where}: unknown label {label!r}")
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(f"{where}: {exc}") from None
    try:
        batch = Batch(
            positives=tuple(positives),
            negatives=tuple(negatives),
            mined_count=mined_count,
            under_filled=bool(header["under_filled"]),
        )
        return BatchManifest(
            query_id=str(header["query_id"]),
            ratio_pos=int(header["ratio_pos"]),
            ratio_neg=int(header["ratio_neg"]),
            mining_k=None if header.get("mining_k") is None else int(header["mining_k"]),
            seed=int(header["seed"]),
            batch=batch,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad batch_manifest header: {exc}") from None


# -- report rendering ---------------------------------------------------------


def render_report(report: EvalReport, fmt: str = "json") -> str:
    record = report.to_record()
    if fmt == "json":
        return json.dumps(record, sort_keys=True) + "\n"
    if fmt == "text":
        width = max(len(k) for k in record)
        return "".join(f"{k:<{width}}  {v}\n" for k, v in record.items())
    raise ValueError(f"unknown report format {fmt!r}")
