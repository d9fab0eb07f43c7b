"""Domain types and per-person keypoint operations.

All coordinates are image-normalized: x and y in [0, 1] with the origin at
the top-left corner. Producers working in pixel space divide by the image
dimensions before emitting records.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

Point = tuple[float, float]

BODY_POINT_COUNT = 33
FACE_POINT_COUNT = 478
HAND_POINT_COUNT = 21

# Indices into the 33-point body layout.
LEFT_SHOULDER = 11
RIGHT_SHOULDER = 12
LEFT_WRIST = 15
RIGHT_WRIST = 16

# Wrist root of the 21-point hand layout, compared against body wrists
# when resolving handedness.
HAND_WRIST = 0

# Body points kept for features: indices 0..24 (legs dropped).
BODY_KEPT_COUNT = 25

# Face-mesh indices kept out of the dense 478-point mesh, in output order.
FACE_SUBSET = (
    0, 4, 13, 14, 17, 33, 39, 46, 52, 55, 61, 64, 81, 93, 133, 151, 152,
    159, 172, 178, 181, 263, 269, 276, 282, 285, 291, 294, 311, 323, 362,
    386, 397, 402, 405, 468, 473,
)

SELECTED_POINT_COUNT = BODY_KEPT_COUNT + len(FACE_SUBSET) + 2 * HAND_POINT_COUNT


class Side(Enum):
    LEFT = "left"
    RIGHT = "right"


@dataclass(frozen=True)
class KeypointGroup:
    """One detector output group; confidences are carried but never used by geometry."""

    points: tuple[Point, ...]
    confidences: tuple[float, ...] | None = None


@dataclass(frozen=True)
class HandDetection:
    side: Side
    group: KeypointGroup


@dataclass(frozen=True)
class PersonDetection:
    bbox: tuple[float, float, float, float]
    body: KeypointGroup | None
    face: KeypointGroup | None
    hands: tuple[HandDetection, ...]
    confidence: float | None = None


@dataclass(frozen=True)
class FrameDetections:
    frame_index: int
    persons: tuple[PersonDetection, ...]


@dataclass(frozen=True)
class VideoClip:
    clip_id: str
    fps: float
    width: int
    height: int
    frames: tuple[FrameDetections, ...]


@dataclass(frozen=True)
class SelectedKeypoints:
    """The 104-point subset of one person: 25 body, 37 face, 21 + 21 hand points.

    Absent groups stay ``None``; downstream feature assembly zero-fills them
    and records the mask.
    """

    body: tuple[Point, ...] | None
    face: tuple[Point, ...] | None
    left_hand: tuple[Point, ...] | None
    right_hand: tuple[Point, ...] | None

    @property
    def masks(self) -> tuple[bool, bool, bool, bool]:
        """Presence flags in (body, face, left hand, right hand) order."""
        return (
            self.body is not None,
            self.face is not None,
            self.left_hand is not None,
            self.right_hand is not None,
        )


@dataclass(frozen=True)
class FilterDecision:
    accepted: bool
    reason: str | None
    multi_person_fraction: float


def multi_person_filter(clip: VideoClip, tolerance: float = 0.0) -> FilterDecision:
    """Accept or reject a clip based on how often more than one person is detected.

    Rejects when the fraction of frames holding two or more persons exceeds
    ``tolerance``. The default of 0.0 rejects on any multi-person frame.
    """
    if not 0.0 <= tolerance <= 1.0:
        raise ValueError(f"tolerance must be in [0, 1], got {tolerance}")
    multi = sum(1 for frame in clip.frames if len(frame.persons) >= 2)
    fraction = multi / len(clip.frames)
    if fraction > tolerance:
        return FilterDecision(False, "multi-person", fraction)
    return FilterDecision(True, None, fraction)


def _distance(a: Point, b: Point) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def resolve_handedness(
    body: KeypointGroup | None,
    hands: tuple[HandDetection, ...],
) -> tuple[HandDetection | None, HandDetection | None]:
    """Assign detected hands to the left/right body wrists.

    With two hands, the assignment minimizing the summed wrist-to-wrist
    Euclidean distance wins; with one hand, the nearer body wrist wins.
    Exact ties and a missing body keep the detector-reported side labels.
    Returns a ``(left, right)`` pair relabeled accordingly; hand points are
    never mutated, and the result does not depend on the input ordering of
    the hands (ties aside).
    """
    if len(hands) > 2:
        raise ValueError(f"at most 2 hands supported, got {len(hands)}")
    if not hands:
        return (None, None)
    if body is None:
        return _assign_by_labels(hands)

    left_wrist = body.points[LEFT_WRIST]
    right_wrist = body.points[RIGHT_WRIST]

    if len(hands) == 1:
        hand = hands[0]
        wrist = hand.group.points[HAND_WRIST]
        d_left = _distance(wrist, left_wrist)
        d_right = _distance(wrist, right_wrist)
        if d_left == d_right:
            return _assign_by_labels(hands)
        if d_left < d_right:
            return (_as_side(hand, Side.LEFT), None)
        return (None, _as_side(hand, Side.RIGHT))

    a, b = hands
    wrist_a = a.group.points[HAND_WRIST]
    wrist_b = b.group.points[HAND_WRIST]
    sum_ab = _distance(wrist_a, left_wrist) + _distance(wrist_b, right_wrist)
    sum_ba = _distance(wrist_b, left_wrist) + _distance(wrist_a, right_wrist)
    if sum_ab == sum_ba:
        return _assign_by_labels(hands)
    if sum_ab < sum_ba:
        return (_as_side(a, Side.LEFT), _as_side(b, Side.RIGHT))
    return (_as_side(b, Side.LEFT), _as_side(a, Side.RIGHT))


def _as_side(hand: HandDetection, side: Side) -> HandDetection:
    if hand.side is side:
        return hand
    return replace(hand, side=side)


def _assign_by_labels(
    hands: tuple[HandDetection, ...],
) -> tuple[HandDetection | None, HandDetection | None]:
    # Detector labels win; a duplicated label pushes the later hand onto the
    # free slot so both survive.
    left: HandDetection | None = None
    right: HandDetection | None = None
    for hand in hands:
        if hand.side is Side.LEFT and left is None:
            left = hand
        elif hand.side is Side.RIGHT and right is None:
            right = hand
        elif left is None:
            left = _as_side(hand, Side.LEFT)
        elif right is None:
            right = _as_side(hand, Side.RIGHT)
    return (left, right)


def select_keypoints(person: PersonDetection) -> SelectedKeypoints:
    """Reduce one person's detections to the 104 points used for features.

    Keeps body indices 0..24, the fixed 37-point face subset (in
    ``FACE_SUBSET`` order), and both full hands. Hand side labels are
    trusted here; run :func:`resolve_handedness` first.
    """
    body = person.body.points[:BODY_KEPT_COUNT] if person.body else None
    face = (
        tuple(person.face.points[i] for i in FACE_SUBSET) if person.face else None
    )
    left = next((h for h in person.hands if h.side is Side.LEFT), None)
    right = next((h for h in person.hands if h.side is Side.RIGHT), None)
    return SelectedKeypoints(
        body=body,
        face=face,
        left_hand=left.group.points if left else None,
        right_hand=right.group.points if right else None,
    )
