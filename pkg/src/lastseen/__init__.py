"""lastseen: "when did I last see X" — visual-query object retrieval in
video, with tube metrics, a training sampler, and a deterministic parallel
evaluation harness."""

from .core import (
    Box,
    FrameIndex,
    ResponseTrack,
    ScoredTrack,
    VisualQuery,
    box_iou,
    st_iou,
    temporal_iou,
)
from .metrics import (
    EvalReport,
    FrameDetections,
    QueryResult,
    average_precision,
    build_report,
    frame_detection_eval,
    recovery,
    st_ap,
    success_rate,
    t_ap,
)
from .pipeline import (
    SimilarityCurve,
    TrackerConfig,
    detect_peak,
    run_query,
    score_frames,
    track_bidirectional,
)
from .scoring import DetectionsFileScorer, FrameScorer, NccScorer, ncc_score

__version__ = "0.1.0"

__all__ = [
    "Box",
    "FrameIndex",
    "ResponseTrack",
    "ScoredTrack",
    "VisualQuery",
    "box_iou",
    "temporal_iou",
    "st_iou",
    "EvalReport",
    "FrameDetections",
    "QueryResult",
    "average_precision",
    "build_report",
    "frame_detection_eval",
    "recovery",
    "st_ap",
    "success_rate",
    "t_ap",
    "SimilarityCurve",
    "TrackerConfig",
    "detect_peak",
    "run_query",
    "score_frames",
    "track_bidirectional",
    "DetectionsFileScorer",
    "FrameScorer",
    "NccScorer",
    "ncc_score",
    "__version__",
]
