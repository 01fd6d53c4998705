"""Multi-target hand and eye tracking.

Kalman motion model, appearance galleries, optimal two-stage assignment,
a seeded scenario simulator, MOT metrics and a rule-based gesture labeller.
"""
from .assoc import CostMatrix, CostWeights, solve_assignment
from .geometry import BoundingBox, iou
from .gesture import GestureKind, Trajectory, classify, extract_features
from .kalman import KalmanTrackState, MotionModel
from .metrics import EvalReport, evaluate
from .simkit import ScenarioKind, ScenarioSpec, crossing_scenario, generate
from .tracker import Detection, FrameResult, Tracker, TrackerConfig, TrackStatus, run

__version__ = "0.1.0"

__all__ = [
    "BoundingBox", "iou", "KalmanTrackState", "MotionModel", "CostMatrix", "CostWeights", "solve_assignment",
    "Detection", "FrameResult", "Tracker", "TrackerConfig", "TrackStatus", "run",
    "ScenarioKind", "ScenarioSpec", "generate", "crossing_scenario", "EvalReport", "evaluate",
    "GestureKind", "Trajectory", "classify", "extract_features",
]
