import numpy as np
import pytest

from lastseen.core import Box, ResponseTrack
from lastseen.sampler import (
    Batch,
    BatchSpec,
    GroundTruthContext,
    Proposal,
    balance_batch,
    classify_proposal,
    mine_hard_negatives,
)


@pytest.fixture
def ctx():
    # track covers frames 5..9 with a static box
    track = ResponseTrack("v1", 5, tuple(Box(10, 10, 20, 20) for _ in range(5)))
    return GroundTruthContext("v1", track)


def prop(video_id="v1", frame=7, box=None, loss=None):
    return Proposal(video_id, frame, box or Box(10, 10, 20, 20), loss)


HIGH_IOU = Box(10, 10, 20, 20)  # IoU 1.0 with gt
LOW_IOU = Box(24, 24, 20, 20)  # IoU < 0.5 with gt


class TestClassifyProposal:
    def test_low_iou_inside_span_is_negative(self, ctx):
        assert classify_proposal(prop(frame=7, box=LOW_IOU), ctx) == "negative"

    def test_outside_span_is_negative(self, ctx):
        assert classify_proposal(prop(frame=2, box=HIGH_IOU), ctx) == "negative"

    def test_high_iou_inside_span_is_positive(self, ctx):
        assert classify_proposal(prop(frame=7, box=HIGH_IOU), ctx) == "positive"

    def test_other_video_is_negative_regardless(self, ctx):
        for frame in (2, 7):
            for box in (HIGH_IOU, LOW_IOU):
                assert classify_proposal(prop("v2", frame, box), ctx) == "negative"

    def test_truth_table_exhaustive(self, ctx):
        # {same/other video} x {frame in/out of span} x {IoU >=/< 0.5}:
        # positive only when all three line up
        for video in ("v1", "v2"):
            for frame in (7, 2):
                for box in (HIGH_IOU, LOW_IOU):
                    expected = (
                        "positive" if (video, frame, box) == ("v1", 7, HIGH_IOU) else "negative"
                    )
                    assert classify_proposal(prop(video, frame, box), ctx) == expected

    def test_boundary_iou_exactly_half_is_positive(self, ctx):
        # IoU exactly 0.5 is not "< 0.5", hence positive
        half = Box(10, 10, 40, 20)  # inter 400, union 800
        assert classify_proposal(prop(frame=7, box=half), ctx) == "positive"

    def test_span_endpoints_inclusive(self, ctx):
        assert classify_proposal(prop(frame=5, box=HIGH_IOU), ctx) == "positive"
        assert classify_proposal(prop(frame=9, box=HIGH_IOU), ctx) == "positive"
        assert classify_proposal(prop(frame=10, box=HIGH_IOU), ctx) == "negative"


class TestMineHardNegatives:
    def test_top_k_by_loss(self):
        props = [prop(loss=0.1), prop(loss=0.9), prop(loss=0.5)]
        mined = mine_hard_negatives(props, 2)
        assert [p.loss for p in mined] == [0.9, 0.5]

    def test_k_larger_than_list(self):
        props = [prop(loss=0.1), prop(loss=0.9)]
        assert [p.loss for p in mine_hard_negatives(props, 10)] == [0.9, 0.1]

    def test_empty(self):
        assert mine_hard_negatives([], 5) == []

    def test_missing_loss_rejected(self):
        with pytest.raises(ValueError):
            mine_hard_negatives([prop(loss=None)], 1)

    def test_ties_keep_input_order(self):
        a = prop(frame=5, loss=0.5)
        b = prop(frame=6, loss=0.5)
        assert mine_hard_negatives([a, b], 2) == [a, b]


class TestBalanceBatch:
    def make_negatives(self, n, seed=3):
        rng = np.random.default_rng(seed)
        return [prop(frame=2, loss=float(rng.random())) for _ in range(n)]

    def test_full_supply_yields_exact_ratio(self):
        batch = balance_batch([prop(box=HIGH_IOU)], self.make_negatives(200))
        assert len(batch.negatives) == 64
        assert not batch.under_filled

    def test_scarce_supply_flags_underfill(self):
        batch = balance_batch([prop(box=HIGH_IOU)], self.make_negatives(10))
        assert len(batch.negatives) == 10
        assert batch.under_filled

    def test_deterministic_for_fixed_seed(self):
        negatives = self.make_negatives(300)
        positives = [prop(box=HIGH_IOU)]
        spec = BatchSpec(mining_k=10)
        a = balance_batch(positives, negatives, spec, seed=42)
        b = balance_batch(positives, negatives, spec, seed=42)
        assert a == b
        c = balance_batch(positives, negatives, spec, seed=43)
        assert a.negatives[:10] == c.negatives[:10]  # mined prefix fixed
        assert a != c

    def test_mined_prefix_dominates_fill_losses(self):
        negatives = self.make_negatives(150)
        spec = BatchSpec(mining_k=20)
        batch = balance_batch([prop(box=HIGH_IOU)], negatives, spec, seed=1)
        assert batch.mined_count == 20
        min_mined = min(p.loss for p in batch.negatives[:20])
        chosen_rest = [p.loss for p in batch.negatives[20:]]
        assert all(min_mined >= loss for loss in chosen_rest)

    def test_ratio_scales_with_positives(self):
        positives = [prop(box=HIGH_IOU) for _ in range(3)]
        batch = balance_batch(positives, self.make_negatives(400))
        assert len(batch.negatives) == 192

    def test_zero_positives_rejected(self):
        with pytest.raises(ValueError):
            balance_batch([], self.make_negatives(10))

    def test_never_exceeds_ratio(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            n_pos = int(rng.integers(1, 4))
            n_neg = int(rng.integers(0, 300))
            batch = balance_batch(
                [prop(box=HIGH_IOU)] * n_pos,
                self.make_negatives(n_neg, seed=int(rng.integers(1000))),
                BatchSpec(mining_k=int(rng.integers(1, 100))),
                seed=int(rng.integers(1000)),
            )
            assert len(batch.negatives) <= 64 * n_pos
            assert batch.under_filled == (len(batch.negatives) < 64 * n_pos)


class TestBatchSpec:
    def test_invalid_ratios(self):
        with pytest.raises(ValueError):
            BatchSpec(ratio_neg=0)
        with pytest.raises(ValueError):
            BatchSpec(mining_k=0)
