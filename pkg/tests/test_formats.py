import json

import numpy as np
import pytest

from lastseen.formats import (
    BatchManifest,
    FormatError,
    load_annotations,
    load_batch_manifest,
    load_detections,
    load_predictions,
    load_proposals,
    render_report,
    save_annotations,
    save_batch_manifest,
    save_detections,
    save_predictions,
    save_proposals,
)
from generators import (
    random_detections_table,
    random_outcomes,
    random_proposals,
    random_workload,
)
from lastseen.metrics import EvalReport
from lastseen.sampler import Batch


class TestAnnotationsRoundTrip:
    def test_load_save_identity(self, tmp_path):
        rng = np.random.default_rng(0)
        for i in range(20):
            path = tmp_path / f"ann{i}.jsonl"
            save_annotations(path, random_workload(rng))
            first = path.read_bytes()
            save_annotations(path, load_annotations(path))
            assert path.read_bytes() == first

    def test_minimal_file(self, tmp_path):
        rng = np.random.default_rng(1)
        w = random_workload(rng, n_videos=1)
        path = tmp_path / "ann.jsonl"
        save_annotations(path, w)
        loaded = load_annotations(path)
        assert len(loaded.groups) == 1
        assert loaded.ground_truth.keys() == w.ground_truth.keys()

    def test_gt_not_before_query_frame_rejected(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        header = {"kind": "annotations", "schema_version": 1}
        record = {
            "query_id": "q0",
            "video_id": "v0",
            "query_frame": 3,
            "crop": {"video_id": "v0", "frame": 0, "box": {"x": 0, "y": 0, "w": 2, "h": 2}},
            "gt_track": {"start": 2, "boxes": [{"x": 0, "y": 0, "w": 2, "h": 2}] * 2},
        }
        path.write_text(json.dumps(header) + "\n" + json.dumps(record) + "\n")
        with pytest.raises(FormatError, match="q0"):
            load_annotations(path)

    def test_duplicate_query_id_rejected(self, tmp_path):
        path = tmp_path / "dup.jsonl"
        header = {"kind": "annotations", "schema_version": 1}
        record = {
            "query_id": "q0",
            "video_id": "v0",
            "query_frame": 5,
            "crop": {"video_id": "v0", "frame": 0, "box": {"x": 0, "y": 0, "w": 2, "h": 2}},
            "gt_track": {"start": 2, "boxes": [{"x": 0, "y": 0, "w": 2, "h": 2}]},
        }
        path.write_text(
            json.dumps(header) + "\n" + json.dumps(record) + "\n" + json.dumps(record) + "\n"
        )
        with pytest.raises(FormatError, match="duplicate"):
            load_annotations(path)

    def test_malformed_record_names_query_and_field(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        header = {"kind": "annotations", "schema_version": 1}
        record = {
            "query_id": "q7",
            "video_id": "v0",
            "query_frame": 5,
            "crop": {"video_id": "v0", "frame": 0, "box": {"x": 0, "y": 0, "w": -3, "h": 2}},
            "gt_track": {"start": 2, "boxes": [{"x": 0, "y": 0, "w": 2, "h": 2}]},
        }
        path.write_text(json.dumps(header) + "\n" + json.dumps(record) + "\n")
        with pytest.raises(FormatError, match="q7"):
            load_annotations(path)

    def test_unknown_schema_version_rejected(self, tmp_path):
        path = tmp_path / "v9.jsonl"
        path.write_text(json.dumps({"kind": "annotations", "schema_version": 9}) + "\n")
        with pytest.raises(FormatError, match="schema_version"):
            load_annotations(path)

    def test_wrong_kind_rejected(self, tmp_path):
        path = tmp_path / "wrong.jsonl"
        path.write_text(json.dumps({"kind": "detections", "schema_version": 1}) + "\n")
        with pytest.raises(FormatError, match="kind"):
            load_annotations(path)


class TestDetectionsRoundTrip:
    def test_load_save_identity(self, tmp_path):
        rng = np.random.default_rng(2)
        for i in range(20):
            path = tmp_path / f"det{i}.jsonl"
            save_detections(path, random_detections_table(rng))
            first = path.read_bytes()
            save_detections(path, load_detections(path))
            assert path.read_bytes() == first

    def test_out_of_order_frames_rejected(self, tmp_path):
        path = tmp_path / "ooo.jsonl"
        lines = [
            json.dumps({"kind": "detections", "schema_version": 1}),
            json.dumps({"video_id": "v0", "frame": 5, "detections": []}),
            json.dumps({"video_id": "v0", "frame": 3, "detections": []}),
        ]
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(FormatError, match="out of order"):
            load_detections(path)

    def test_non_finite_score_rejected(self, tmp_path):
        path = tmp_path / "inf.jsonl"
        lines = [
            json.dumps({"kind": "detections", "schema_version": 1}),
            json.dumps(
                {
                    "video_id": "v0",
                    "frame": 1,
                    "detections": [{"box": {"x": 0, "y": 0, "w": 1, "h": 1}, "score": float("inf")}],
                }
            ),
        ]
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(FormatError, match="non-finite"):
            load_detections(path)


class TestPredictionsRoundTrip:
    def test_load_save_identity(self, tmp_path):
        rng = np.random.default_rng(3)
        for i in range(20):
            path = tmp_path / f"pred{i}.jsonl"
            save_predictions(path, random_outcomes(rng))
            first = path.read_bytes()
            save_predictions(path, load_predictions(path))
            assert path.read_bytes() == first

    def test_records_sorted_by_query_id(self, tmp_path):
        rng = np.random.default_rng(4)
        outcomes = random_outcomes(rng)
        path = tmp_path / "pred.jsonl"
        save_predictions(path, list(reversed(outcomes)))
        loaded = load_predictions(path)
        assert [o.query_id for o in loaded] == sorted(o.query_id for o in outcomes)

    def test_answered_without_track_rejected(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        lines = [
            json.dumps({"kind": "predictions", "schema_version": 1}),
            json.dumps(
                {
                    "query_id": "q0",
                    "video_id": "v0",
                    "outcome": "answered",
                    "confidence": 0.5,
                    "peak_frame": 1,
                    "track": None,
                    "error": None,
                }
            ),
        ]
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(FormatError, match="track"):
            load_predictions(path)


class TestProposalsAndManifests:
    def test_proposals_round_trip(self, tmp_path):
        rng = np.random.default_rng(5)
        for i in range(20):
            path = tmp_path / f"prop{i}.jsonl"
            save_proposals(path, random_proposals(rng))
            first = path.read_bytes()
            save_proposals(path, load_proposals(path))
            assert path.read_bytes() == first

    def test_manifest_round_trip(self, tmp_path):
        rng = np.random.default_rng(6)
        for i in range(20):
            proposals = random_proposals(rng, n=12)
            manifest = BatchManifest(
                query_id=f"q{i}",
                ratio_pos=1,
                ratio_neg=64,
                mining_k=None if i % 2 else 5,
                seed=i,
                batch=Batch(
                    positives=tuple(proposals[:2]),
                    negatives=tuple(proposals[2:]),
                    mined_count=4,
                    under_filled=bool(i % 2),
                ),
            )
            path = tmp_path / f"batch{i}.jsonl"
            save_batch_manifest(path, manifest)
            first = path.read_bytes()
            loaded = load_batch_manifest(path)
            assert loaded == manifest
            save_batch_manifest(path, loaded)
            assert path.read_bytes() == first


class TestRenderReport:
    def test_json_and_text(self):
        report = EvalReport(0.5, 0.75, 80.0, 66.0, 12)
        record = json.loads(render_report(report, "json"))
        assert record == {
            "st_ap_25": 0.5,
            "t_ap_25": 0.75,
            "success_rate": 80.0,
            "recovery": 66.0,
            "num_queries": 12,
        }
        text = render_report(report, "text")
        assert "st_ap_25" in text and "12" in text

    def test_unknown_format_rejected(self):
        with pytest.raises(ValueError):
            render_report(EvalReport(0, 0, 0, 0, 0), "xml")
