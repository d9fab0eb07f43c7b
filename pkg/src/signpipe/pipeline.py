"""Per-clip orchestration: keypoint stream in, feature sequence out.

Order of operations per clip: parse, multi-person filter, handedness
resolution, keypoint subset, per-frame signing spaces, median
stabilization, frame decimation, feature assembly. Every failure is
captured in a :class:`ClipResult` so one bad clip never aborts a batch.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import IO

from .config import PipelineConfig
from .core import (
    FrameDetections,
    PersonDetection,
    SelectedKeypoints,
    VideoClip,
    multi_person_filter,
    resolve_handedness,
    select_keypoints,
)
from .features import FeatureSequence, assemble, decimate
from .geometry import (
    DegenerateShoulders,
    EmptyIntersection,
    crop_spec,
    frame_signing_space,
    stabilize,
)
from .stream import StreamError, parse_keypoint_stream

ACCEPT = "accept"
REJECT = "reject"
ERROR = "error"


@dataclass(frozen=True)
class ClipResult:
    clip_id: str
    status: str
    reason: str | None = None
    frames_in: int = 0
    frames_out: int = 0
    multi_person_fraction: float = 0.0
    output_path: str | None = None
    crop: dict | None = None

    def sidecar_record(self) -> dict:
        record = {
            "clip_id": self.clip_id,
            "status": self.status,
            "frames_in": self.frames_in,
            "frames_out": self.frames_out,
        }
        if self.reason is not None:
            record["reason"] = self.reason
        if self.multi_person_fraction:
            record["multi_person_fraction"] = self.multi_person_fraction
        if self.output_path is not None:
            record["output_path"] = self.output_path
        if self.crop is not None:
            record["crop"] = self.crop
        return record


def _pick_person(frame: FrameDetections) -> PersonDetection | None:
    """The person a frame contributes. Several detections can survive the
    clip filter under a nonzero tolerance; the largest bounding box (first
    on ties) is taken for the signer."""
    if not frame.persons:
        return None
    if len(frame.persons) == 1:
        return frame.persons[0]

    def area(person: PersonDetection) -> float:
        x0, y0, x1, y1 = person.bbox
        return max(0.0, x1 - x0) * max(0.0, y1 - y0)

    best = frame.persons[0]
    best_area = area(best)
    for person in frame.persons[1:]:
        a = area(person)
        if a > best_area:
            best, best_area = person, a
    return best


def extract_clip(
    clip: VideoClip, config: PipelineConfig | None = None
) -> tuple[FeatureSequence | None, ClipResult]:
    if config is None:
        config = PipelineConfig()
    frames_in = len(clip.frames)

    decision = multi_person_filter(clip, config.multi_person_tolerance)
    if not decision.accepted:
        return None, ClipResult(
            clip_id=clip.clip_id,
            status=REJECT,
            reason=decision.reason,
            frames_in=frames_in,
            multi_person_fraction=decision.multi_person_fraction,
        )

    selected: list[SelectedKeypoints] = []
    spaces = []
    for frame in clip.frames:
        person = _pick_person(frame)
        if person is None:
            selected.append(SelectedKeypoints(None, None, None, None))
            continue
        left, right = resolve_handedness(person.body, person.hands)
        relabeled = replace(
            person, hands=tuple(h for h in (left, right) if h is not None)
        )
        keypoints = select_keypoints(relabeled)
        selected.append(keypoints)
        if keypoints.body is not None:
            try:
                spaces.append(
                    frame_signing_space(keypoints.body, config.shoulder_epsilon)
                )
            except DegenerateShoulders:
                pass  # frame contributes no box; clip may still have others

    if not spaces:
        return None, ClipResult(
            clip_id=clip.clip_id,
            status=REJECT,
            reason="no-signing-space",
            frames_in=frames_in,
            multi_person_fraction=decision.multi_person_fraction,
        )

    space = stabilize(spaces)
    kept = decimate(selected) if config.decimate else selected
    fps_out = clip.fps / 2.0 if config.decimate else clip.fps
    frames = tuple(
        assemble(keypoints, space, config.local_epsilon) for keypoints in kept
    )
    sequence = FeatureSequence(
        clip_id=clip.clip_id,
        fps_out=fps_out,
        frames=frames,
        signing_space=space.box,
    )
    try:
        crop = crop_spec(
            space, clip.width, clip.height, config.target_resolution
        ).to_record()
    except EmptyIntersection:
        crop = None  # space fell outside the image; features are unaffected
    result = ClipResult(
        clip_id=clip.clip_id,
        status=ACCEPT,
        frames_in=frames_in,
        frames_out=len(frames),
        multi_person_fraction=decision.multi_person_fraction,
        crop=crop,
    )
    return sequence, result


def extract_stream(
    source: IO[str], config: PipelineConfig | None = None, name: str = "<stream>"
) -> tuple[FeatureSequence | None, ClipResult]:
    """Parse one keypoint stream and extract it, trapping parse errors."""
    try:
        clip = parse_keypoint_stream(source)
    except StreamError as exc:
        return None, ClipResult(clip_id=name, status=ERROR, reason=str(exc))
    return extract_clip(clip, config)
