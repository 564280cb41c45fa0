import hashlib
from pathlib import Path

import numpy as np
import pytest

from lastseen.formats import load_annotations
from lastseen.frames import FrameStore
from lastseen.synth import CONTEXT_BAR_WIDTH, SynthConfig, synth_generate

SMALL = dict(num_videos=3, frames_per_video=16, width=96, height=72)


def tree_digest(root: Path) -> str:
    digest = hashlib.sha256()
    for path in sorted(root.rglob("*")):
        if path.is_file():
            digest.update(str(path.relative_to(root)).encode())
            digest.update(path.read_bytes())
    return digest.hexdigest()


class TestDeterminism:
    def test_same_seed_same_bytes(self, tmp_path):
        cfg = SynthConfig(**SMALL, rng_seed=5)
        synth_generate(cfg, tmp_path / "a")
        synth_generate(cfg, tmp_path / "b")
        assert tree_digest(tmp_path / "a") == tree_digest(tmp_path / "b")

    def test_different_seed_differs(self, tmp_path):
        synth_generate(SynthConfig(**SMALL, rng_seed=5), tmp_path / "a")
        synth_generate(SynthConfig(**SMALL, rng_seed=6), tmp_path / "b")
        assert tree_digest(tmp_path / "a") != tree_digest(tmp_path / "b")


class TestGroundTruth:
    def test_annotations_load_and_validate(self, tmp_path):
        frames_root, annotations = synth_generate(SynthConfig(**SMALL), tmp_path)
        workload = load_annotations(annotations)
        store = FrameStore(frames_root)
        assert len(workload.groups) == 3
        for video_id, queries in workload.groups:
            assert store.num_frames(video_id) == 16
            (query,) = queries
            gt = workload.ground_truth[query.query_id]
            assert gt.end < query.query_frame
            for box in gt.boxes:
                assert 0 <= box.x and box.x + box.w <= 96
                assert 0 <= box.y and box.y + box.h <= 72

    def test_target_pixels_match_crop(self, tmp_path):
        # the crop cut from the crop frame equals the planted texture, and the
        # same pixels appear at every in-span gt box
        frames_root, annotations = synth_generate(SynthConfig(**SMALL), tmp_path)
        workload = load_annotations(annotations)
        store = FrameStore(frames_root)
        for query in workload.all_queries():
            gt = workload.ground_truth[query.query_id]
            crop = store.load_box(query.crop_video_id, query.crop_frame, query.crop_box)
            for frame in gt.frames():
                patch = store.load_box(query.video_id, frame, gt.box_at(frame))
                assert np.array_equal(patch, crop)


class TestScenarios:
    def test_blur_touches_only_background_frames(self, tmp_path):
        base_cfg = SynthConfig(**SMALL)
        blur_cfg = SynthConfig(**SMALL, blur_background=True)
        synth_generate(base_cfg, tmp_path / "clean")
        synth_generate(blur_cfg, tmp_path / "blur")
        workload = load_annotations(tmp_path / "clean" / "annotations.jsonl")
        clean = FrameStore(tmp_path / "clean" / "frames")
        blurred = FrameStore(tmp_path / "blur" / "frames")
        for video_id, queries in workload.groups:
            gt = workload.ground_truth[queries[0].query_id]
            changed_outside = 0
            for frame in range(16):
                same = np.array_equal(
                    clean.load_frame(video_id, frame), blurred.load_frame(video_id, frame)
                )
                if gt.start <= frame <= gt.end:
                    assert same, f"in-span frame {frame} of {video_id} was blurred"
                elif not same:
                    changed_outside += 1
            assert changed_outside >= 1

    def test_distractor_appears_outside_span(self, tmp_path):
        cfg = SynthConfig(**SMALL, distractor_similar=True)
        synth_generate(cfg, tmp_path / "d")
        synth_generate(SynthConfig(**SMALL), tmp_path / "clean")
        workload = load_annotations(tmp_path / "d" / "annotations.jsonl")
        with_d = FrameStore(tmp_path / "d" / "frames")
        clean = FrameStore(tmp_path / "clean" / "frames")
        for video_id, queries in workload.groups:
            gt = workload.ground_truth[queries[0].query_id]
            outside_changed = [
                frame
                for frame in range(16)
                if not (gt.start <= frame <= gt.end)
                and not np.array_equal(
                    with_d.load_frame(video_id, frame), clean.load_frame(video_id, frame)
                )
            ]
            assert outside_changed, f"no distractor frames in {video_id}"

    def test_ambiguous_crop_wider_than_gt(self, tmp_path):
        cfg = SynthConfig(**SMALL, ambiguous_context=True)
        _, annotations = synth_generate(cfg, tmp_path)
        workload = load_annotations(annotations)
        for query in workload.all_queries():
            gt = workload.ground_truth[query.query_id]
            gt_box = gt.box_at(query.crop_frame)
            assert query.crop_box.w == gt_box.w + CONTEXT_BAR_WIDTH
            assert query.crop_box.x == gt_box.x - CONTEXT_BAR_WIDTH
            # the bar sits inside the crop but outside the gt box
            assert query.crop_box.x < gt_box.x


class TestValidation:
    def test_too_few_frames_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="frames_per_video"):
            synth_generate(
                SynthConfig(num_videos=1, frames_per_video=8, width=96, height=72), tmp_path
            )

    def test_bad_config_rejected(self):
        with pytest.raises(ValueError):
            SynthConfig(num_videos=0)
        with pytest.raises(ValueError):
            SynthConfig(width=16)
        with pytest.raises(ValueError):
            SynthConfig(distractor_noise=-1)
