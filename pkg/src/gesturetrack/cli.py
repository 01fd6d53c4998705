"""Command-line front end.

    gesturetrack simulate --kind swipe --seed 7 --detections d.jsonl --ground-truth gt.jsonl
    gesturetrack track d.jsonl -o tracks.jsonl
    gesturetrack evaluate tracks.jsonl gt.jsonl -o report.json
    gesturetrack classify tracks.jsonl -o gestures.jsonl
    gesturetrack render tracks.jsonl -o tracks.svg

Exit codes: 0 ok, 2 bad flags or config, 3 malformed input, 4 inconsistent inputs.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from dataclasses import asdict, dataclass, fields
from typing import Optional, Sequence

from . import formats
from .assoc import CHI2_95_4DOF, CostWeights, STAGE2_MIN_IOU
from .appearance import EMBEDDING_DIM, GALLERY_SIZE
from .gesture import GestureThresholds, Trajectory, classify
from .kalman import MotionModel
from .metrics import evaluate
from .render import render_svg
from .simkit import ScenarioKind, ScenarioSpec, generate
from .tracker import FrameResult, TrackerConfig, run

log = logging.getLogger("gesturetrack")

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_MISMATCH = 0, 2, 3, 4


@dataclass
class RunConfig:
    """Every tunable in one flat record; defaults mirror the library defaults."""

    # simulation
    kind: str = ScenarioKind.SWIPE.value
    seed: int = 0
    duration: Optional[int] = None
    n_targets: int = 1
    frame_width: int = 1920
    frame_height: int = 1080
    noise_std: float = 1.0
    p_miss: float = 0.0
    clutter_rate: float = 0.0
    embedding_noise_std: float = 0.05
    embedding_dim: int = EMBEDDING_DIM
    speed: Optional[float] = None
    # association
    lam: float = 0.5
    gate: float = CHI2_95_4DOF
    appearance_gate: Optional[float] = None
    # motion model
    std_position: float = 0.05
    std_velocity: float = 0.00625
    # tracker
    n_init: int = 3
    max_age: int = 30
    min_confidence: float = 0.1
    stage2_min_iou: float = STAGE2_MIN_IOU
    gallery_size: int = GALLERY_SIZE
    emit_tentative: bool = False
    emit_coasting: bool = False
    # evaluation
    iou_thresh: float = 0.5

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**data)

    def scenario(self) -> ScenarioSpec:
        return ScenarioSpec(
            kind=self.kind, n_targets=self.n_targets, duration=self.duration,
            frame_size=(self.frame_width, self.frame_height), noise_std=self.noise_std,
            p_miss=self.p_miss, clutter_rate=self.clutter_rate,
            embedding_noise_std=self.embedding_noise_std, seed=self.seed,
            speed=self.speed, embedding_dim=self.embedding_dim,
        )

    def tracker(self) -> TrackerConfig:
        return TrackerConfig(
            n_init=self.n_init, max_age=self.max_age, min_confidence=self.min_confidence,
            stage2_min_iou=self.stage2_min_iou, gallery_size=self.gallery_size,
            emit_tentative=self.emit_tentative, emit_coasting=self.emit_coasting,
            weights=CostWeights(self.lam, self.gate, self.appearance_gate),
        )

    def motion_model(self) -> MotionModel:
        return MotionModel(std_position=self.std_position, std_velocity=self.std_velocity)

    def validate(self) -> None:
        """Raise ValueError unless every field is in its domain."""
        for f in fields(self):
            value = getattr(self, f.name)
            if f.type in ("int", "Optional[int]") and value is not None and (
                isinstance(value, bool) or not isinstance(value, int)
            ):
                raise ValueError(f"{f.name} must be an integer")
            if f.type == "bool" and not isinstance(value, bool):
                raise ValueError(f"{f.name} must be true or false")
        try:
            ScenarioKind(self.kind)
        except ValueError:
            raise ValueError(f"kind must be one of {[k.value for k in ScenarioKind]}") from None
        self.scenario()
        self.tracker()
        self.motion_model()
        if not 0.0 < self.iou_thresh < 1.0:
            raise ValueError("iou_thresh must be in (0, 1)")
        if self.std_position <= 0 or self.std_velocity <= 0:
            raise ValueError("motion noise scales must be > 0")


# flag -> RunConfig field; flags default to SUPPRESS so only given ones override
_FLAG_FIELDS = {
    "kind": "kind", "seed": "seed", "duration": "duration", "n_targets": "n_targets",
    "noise_std": "noise_std", "p_miss": "p_miss", "clutter": "clutter_rate",
    "embedding_noise_std": "embedding_noise_std", "speed": "speed",
    "frame_width": "frame_width", "frame_height": "frame_height",
    "lam": "lam", "gate": "gate", "n_init": "n_init", "max_age": "max_age",
    "emit_tentative": "emit_tentative", "emit_coasting": "emit_coasting",
    "iou_thresh": "iou_thresh",
}


def _common_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    S = argparse.SUPPRESS
    g = p.add_argument_group("configuration")
    g.add_argument("--config", metavar="FILE", help="JSON file with RunConfig keys")
    g.add_argument("--print-config", action="store_true", help="print the effective config as JSON and exit")
    g.add_argument("--kind", choices=[k.value for k in ScenarioKind], default=S)
    g.add_argument("--seed", type=int, default=S)
    g.add_argument("--duration", type=int, default=S, help="frames")
    g.add_argument("--n-targets", type=int, default=S)
    g.add_argument("--noise-std", type=float, default=S, help="box noise, px")
    g.add_argument("--p-miss", type=float, default=S)
    g.add_argument("--clutter", type=float, default=S, help="expected false positives per frame")
    g.add_argument("--embedding-noise-std", type=float, default=S)
    g.add_argument("--speed", type=float, default=S, help="swipe speed, px/frame")
    g.add_argument("--frame-width", type=int, default=S)
    g.add_argument("--frame-height", type=int, default=S)
    g.add_argument("--lambda", dest="lam", type=float, default=S, help="motion weight in [0, 1]")
    g.add_argument("--gate", type=float, default=S, help="squared Mahalanobis gate")
    g.add_argument("--n-init", type=int, default=S)
    g.add_argument("--max-age", type=int, default=S)
    g.add_argument("--emit-tentative", action="store_true", default=S)
    g.add_argument("--emit-coasting", action="store_true", default=S)
    g.add_argument("--iou-thresh", type=float, default=S)
    g.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(prog="gesturetrack", description="Multi-target hand/eye tracking toolkit.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("simulate", parents=[common], help="generate a seeded scenario")
    p.add_argument("--detections", required=True, metavar="PATH")
    p.add_argument("--ground-truth", required=True, metavar="PATH")

    p = sub.add_parser("track", parents=[common], help="run the tracker on a detections file")
    p.add_argument("detections")
    p.add_argument("-o", "--output", default="-")

    p = sub.add_parser("evaluate", parents=[common], help="score tracks against ground truth")
    p.add_argument("tracks")
    p.add_argument("ground_truth")
    p.add_argument("-o", "--output", default="-")

    p = sub.add_parser("classify", parents=[common], help="label each track's gesture")
    p.add_argument("tracks")
    p.add_argument("-o", "--output", default="-")

    p = sub.add_parser("render", parents=[common], help="draw trajectories as SVG")
    p.add_argument("input", help="tracks or ground-truth JSONL")
    p.add_argument("-o", "--output", default="-")
    return parser


def effective_config(args: argparse.Namespace) -> RunConfig:
    data: dict = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ValueError("config file must hold a JSON object")
    cfg = RunConfig.from_dict(data)
    overrides = {f: getattr(args, flag) for flag, f in _FLAG_FIELDS.items() if hasattr(args, flag)}
    cfg = dataclasses.replace(cfg, **overrides)
    cfg.validate()
    return cfg


def _emit(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        formats.write_atomic(path, text)


def _jsonl(records) -> str:
    return "".join(formats.dumps(r) + "\n" for r in records)


def cmd_simulate(args, cfg: RunConfig) -> int:
    out = generate(cfg.scenario())
    formats.write_jsonl(args.detections, formats.detection_records(out.detections))
    formats.write_jsonl(args.ground_truth, formats.ground_truth_records(out))
    return EXIT_OK


def cmd_track(args, cfg: RunConfig) -> int:
    frames = formats.read_detections(args.detections)
    results = run(frames, cfg.tracker(), cfg.motion_model())
    _emit(args.output, _jsonl(formats.track_records(results)))
    return EXIT_OK


def cmd_evaluate(args, cfg: RunConfig) -> int:
    results = formats.read_tracks(args.tracks)
    gt, _ = formats.read_ground_truth(args.ground_truth)
    if not results:
        results = [FrameResult(t) for t in range(len(gt))]
    if len(results) != len(gt):
        log.error("frame count mismatch: %d track frames vs %d ground-truth frames", len(results), len(gt))
        return EXIT_MISMATCH
    report = evaluate(results, gt, cfg.iou_thresh)
    _emit(args.output, json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_classify(args, cfg: RunConfig) -> int:
    paths: dict[int, list] = {}
    for res in formats.read_tracks(args.tracks):
        for tr in res.tracks:
            paths.setdefault(tr.id, []).append((res.frame, tr.box))
    records = []
    for tid in sorted(paths):
        if len(paths[tid]) < 2:
            log.warning("track %d has a single frame; skipped", tid)
            continue
        lab = classify(Trajectory.from_points(paths[tid]), GestureThresholds())
        records.append(formats.gesture_record(tid, lab.label.value, lab.features.to_dict()))
    _emit(args.output, _jsonl(records))
    return EXIT_OK


def cmd_render(args, cfg: RunConfig) -> int:
    _, paths = formats.identity_paths(args.input)
    _emit(args.output, render_svg(paths, (cfg.frame_width, cfg.frame_height)))
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "track": cmd_track, "evaluate": cmd_evaluate,
            "classify": cmd_classify, "render": cmd_render}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits 2 on bad flags
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(levelname)s: %(message)s", stream=sys.stderr)
    try:
        cfg = effective_config(args)
    except (OSError, ValueError, TypeError) as exc:
        parser.error(f"invalid configuration: {exc}")
    if args.print_config:
        print(json.dumps(asdict(cfg), indent=2, sort_keys=True))
        return EXIT_OK
    try:
        return COMMANDS[args.command](args, cfg)
    except formats.InputError as exc:
        log.error("malformed input: %s", exc)
        return EXIT_INPUT
    except OSError as exc:
        log.error("cannot access file: %s", exc)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
