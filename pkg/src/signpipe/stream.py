"""Line-delimited keypoint stream parsing and serialization.

A stream is UTF-8 text: one JSON header line carrying
``{clip_id, fps, width, height}``, then one JSON object per frame:

    {"frame_index": 0, "persons": [{"bbox": [x0, y0, x1, y1],
        "body": [[x, y], ...33] | null,
        "face": [[x, y], ...478] | null,
        "hands": [{"side": "left" | "right", "points": [[x, y], ...21]}]}]}

Coordinates are image-normalized. Points may carry an optional third
value (detector confidence); it is retained but never used by geometry.
Frame indices must be contiguous from 0.
"""

from __future__ import annotations

import json
import math
from typing import IO, Any, Iterable

from .core import (
    BODY_POINT_COUNT,
    FACE_POINT_COUNT,
    HAND_POINT_COUNT,
    FrameDetections,
    HandDetection,
    KeypointGroup,
    PersonDetection,
    Side,
    VideoClip,
)


class StreamError(ValueError):
    """Base for keypoint stream violations; carries the offending line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class MalformedRecord(StreamError):
    pass


class CardinalityError(StreamError):
    pass


class NonMonotonicFrames(StreamError):
    pass


class EmptyVideo(ValueError):
    pass


def _reject_constant(token: str) -> float:
    raise ValueError(f"non-finite number {token!r}")


def _loads(line: str, line_no: int) -> dict:
    try:
        record = json.loads(line, parse_constant=_reject_constant)
    except ValueError as exc:
        raise MalformedRecord(line_no, str(exc)) from None
    if not isinstance(record, dict):
        raise MalformedRecord(line_no, "record is not an object")
    return record


def _finite(value: Any, line_no: int, what: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise MalformedRecord(line_no, f"{what} is not a number")
    value = float(value)
    if not math.isfinite(value):
        raise MalformedRecord(line_no, f"{what} is not finite")
    return value


def _parse_points(
    raw: Any, expected: int, line_no: int, what: str
) -> KeypointGroup:
    if not isinstance(raw, list):
        raise MalformedRecord(line_no, f"{what} is not an array")
    if len(raw) != expected:
        raise CardinalityError(
            line_no, f"{what} has {len(raw)} points, expected {expected}"
        )
    points = []
    confidences = []
    saw_confidence = False
    for i, entry in enumerate(raw):
        if not isinstance(entry, list) or len(entry) not in (2, 3):
            raise MalformedRecord(line_no, f"{what}[{i}] is not an [x, y] pair")
        x = _finite(entry[0], line_no, f"{what}[{i}].x")
        y = _finite(entry[1], line_no, f"{what}[{i}].y")
        points.append((x, y))
        if len(entry) == 3:
            saw_confidence = True
            confidences.append(_finite(entry[2], line_no, f"{what}[{i}] confidence"))
        else:
            confidences.append(0.0)
    return KeypointGroup(
        points=tuple(points),
        confidences=tuple(confidences) if saw_confidence else None,
    )


def _parse_person(raw: Any, line_no: int, index: int) -> PersonDetection:
    what = f"persons[{index}]"
    if not isinstance(raw, dict):
        raise MalformedRecord(line_no, f"{what} is not an object")
    bbox_raw = raw.get("bbox")
    if not isinstance(bbox_raw, list) or len(bbox_raw) != 4:
        raise MalformedRecord(line_no, f"{what}.bbox is not a 4-element array")
    bbox = tuple(_finite(v, line_no, f"{what}.bbox") for v in bbox_raw)

    body = raw.get("body")
    face = raw.get("face")
    hands_raw = raw.get("hands", [])
    if not isinstance(hands_raw, list):
        raise MalformedRecord(line_no, f"{what}.hands is not an array")
    if len(hands_raw) > 2:
        raise MalformedRecord(line_no, f"{what} has {len(hands_raw)} hands, at most 2 allowed")

    hands = []
    for j, hand_raw in enumerate(hands_raw):
        if not isinstance(hand_raw, dict):
            raise MalformedRecord(line_no, f"{what}.hands[{j}] is not an object")
        side_raw = hand_raw.get("side")
        if side_raw not in ("left", "right"):
            raise MalformedRecord(line_no, f"{what}.hands[{j}].side is not left/right")
        group = _parse_points(
            hand_raw.get("points"), HAND_POINT_COUNT, line_no, f"{what}.hands[{j}].points"
        )
        hands.append(HandDetection(side=Side(side_raw), group=group))

    confidence = raw.get("confidence")
    if confidence is not None:
        confidence = _finite(confidence, line_no, f"{what}.confidence")

    return PersonDetection(
        bbox=bbox,
        body=_parse_points(body, BODY_POINT_COUNT, line_no, f"{what}.body")
        if body is not None
        else None,
        face=_parse_points(face, FACE_POINT_COUNT, line_no, f"{what}.face")
        if face is not None
        else None,
        hands=tuple(hands),
        confidence=confidence,
    )


def parse_keypoint_stream(reader: IO[str] | Iterable[str]) -> VideoClip:
    """Parse one clip from a line-delimited keypoint stream.

    Raises :class:`MalformedRecord`, :class:`CardinalityError`,
    :class:`NonMonotonicFrames`, or :class:`EmptyVideo`; every stream error
    reports the 1-based line it occurred on.
    """
    header: dict | None = None
    frames: list[FrameDetections] = []
    line_no = 0
    for line_no, line in enumerate(reader, start=1):
        if not line.strip():
            continue
        record = _loads(line, line_no)
        if header is None:
            header = _parse_header(record, line_no)
            continue
        if "frame_index" not in record:
            raise MalformedRecord(line_no, "missing frame_index")
        raw_index = record["frame_index"]
        if isinstance(raw_index, bool) or not isinstance(raw_index, int):
            raise MalformedRecord(line_no, "frame_index is not an integer")
        if raw_index != len(frames):
            raise NonMonotonicFrames(
                line_no, f"frame_index {raw_index}, expected {len(frames)}"
            )
        persons_raw = record.get("persons")
        if not isinstance(persons_raw, list):
            raise MalformedRecord(line_no, "persons is not an array")
        persons = tuple(
            _parse_person(p, line_no, i) for i, p in enumerate(persons_raw)
        )
        frames.append(FrameDetections(frame_index=raw_index, persons=persons))

    if header is None:
        raise EmptyVideo("stream has no header line")
    if not frames:
        raise EmptyVideo(f"clip {header['clip_id']!r} has no frames")
    return VideoClip(
        clip_id=header["clip_id"],
        fps=header["fps"],
        width=header["width"],
        height=header["height"],
        frames=tuple(frames),
    )


def _parse_header(record: dict, line_no: int) -> dict:
    clip_id = record.get("clip_id")
    if not isinstance(clip_id, str) or not clip_id:
        raise MalformedRecord(line_no, "header clip_id is not a non-empty string")
    fps = _finite(record.get("fps"), line_no, "header fps")
    if fps <= 0:
        raise MalformedRecord(line_no, f"header fps must be > 0, got {fps}")
    parsed = {"clip_id": clip_id, "fps": fps}
    for key in ("width", "height"):
        value = record.get(key)
        if isinstance(value, bool) or not isinstance(value, int) or value <= 0:
            raise MalformedRecord(line_no, f"header {key} is not a positive integer")
        parsed[key] = value
    return parsed


def _points_json(group: KeypointGroup) -> list:
    if group.confidences is None:
        return [[x, y] for x, y in group.points]
    return [
        [x, y, c] for (x, y), c in zip(group.points, group.confidences)
    ]


def write_keypoint_stream(clip: VideoClip, writer: IO[str]) -> None:
    """Serialize a clip back to the line-delimited stream format."""
    header = {
        "clip_id": clip.clip_id,
        "fps": clip.fps,
        "width": clip.width,
        "height": clip.height,
    }
    writer.write(json.dumps(header, separators=(",", ":")) + "\n")
    for frame in clip.frames:
        persons = []
        for person in frame.persons:
            entry: dict[str, Any] = {
                "bbox": list(person.bbox),
                "body": _points_json(person.body) if person.body else None,
                "face": _points_json(person.face) if person.face else None,
                "hands": [
                    {"side": hand.side.value, "points": _points_json(hand.group)}
                    for hand in person.hands
                ],
            }
            if person.confidence is not None:
                entry["confidence"] = person.confidence
            persons.append(entry)
        record = {"frame_index": frame.frame_index, "persons": persons}
        writer.write(json.dumps(record, separators=(",", ":")) + "\n")
