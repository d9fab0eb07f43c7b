"""Keypoint normalization and 208-dimensional feature vector assembly.

Hands and face get local normalization: a square box around the group,
preserving aspect ratio, mapped to [-1, 1]. Body points get global
normalization relative to the stabilized signing space, so everything
inside the space lands in [-1, 1] and the relationships between body parts
survive. One frame packs to 2 x (25 + 37 + 21 + 21) = 208 values.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence, TypeVar

import numpy as np

from .core import (
    BODY_KEPT_COUNT,
    FACE_SUBSET,
    HAND_POINT_COUNT,
    Point,
    SelectedKeypoints,
)
from .geometry import Box, SigningSpace

LOCAL_EPSILON = 1e-9

FEATURE_DIM = 2 * (BODY_KEPT_COUNT + len(FACE_SUBSET) + 2 * HAND_POINT_COUNT)

# Value spans of each group in the packed vector, (x, y) interleaved.
BODY_SLICE = slice(0, 2 * BODY_KEPT_COUNT)
FACE_SLICE = slice(BODY_SLICE.stop, BODY_SLICE.stop + 2 * len(FACE_SUBSET))
LEFT_HAND_SLICE = slice(FACE_SLICE.stop, FACE_SLICE.stop + 2 * HAND_POINT_COUNT)
RIGHT_HAND_SLICE = slice(LEFT_HAND_SLICE.stop, LEFT_HAND_SLICE.stop + 2 * HAND_POINT_COUNT)

T = TypeVar("T")


class EmptyGroup(ValueError):
    pass


class NormScheme(Enum):
    LOCAL_SQUARE = "local_square"
    GLOBAL_SIGNING_SPACE = "global_signing_space"


@dataclass(frozen=True)
class NormalizedGroup:
    points: tuple[Point, ...]
    scheme: NormScheme


@dataclass(frozen=True)
class FeatureVector:
    """One frame's packed feature values plus per-group presence masks.

    ``values`` is float32 of length 208, ordered body, face, left hand,
    right hand with x, y interleaved; groups whose mask is False are
    all zeros.
    """

    values: np.ndarray
    masks: tuple[bool, bool, bool, bool]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FeatureVector):
            return NotImplemented
        return self.masks == other.masks and np.array_equal(self.values, other.values)


@dataclass(frozen=True)
class FeatureSequence:
    clip_id: str
    fps_out: float
    frames: tuple[FeatureVector, ...]
    signing_space: Box


def local_normalize(
    points: Sequence[Point], epsilon: float = LOCAL_EPSILON
) -> NormalizedGroup:
    """Map a keypoint group into [-1, 1]^2 via a square box around it.

    The square is centered on the group's tight bounding box and sized by
    the longer bbox side, which preserves the aspect ratio. A group tighter
    than ``epsilon`` in both dimensions collapses to all zeros. The output
    is invariant under translating or uniformly scaling the input.
    """
    if not points:
        raise EmptyGroup("cannot normalize an empty keypoint group")
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    x_min, x_max = min(xs), max(xs)
    y_min, y_max = min(ys), max(ys)
    side = max(x_max - x_min, y_max - y_min)
    if side < epsilon:
        return NormalizedGroup(
            points=tuple((0.0, 0.0) for _ in points),
            scheme=NormScheme.LOCAL_SQUARE,
        )
    cx = (x_min + x_max) / 2
    cy = (y_min + y_max) / 2
    half = side / 2
    # Mathematically the map lands in [-1, 1]; clamping only strips the
    # last-ulp rounding dust so the containment invariant is exact.
    normalized = tuple(
        (
            min(1.0, max(-1.0, (x - cx) / half)),
            min(1.0, max(-1.0, (y - cy) / half)),
        )
        for x, y in points
    )
    return NormalizedGroup(points=normalized, scheme=NormScheme.LOCAL_SQUARE)


def global_normalize(points: Sequence[Point], space: SigningSpace) -> NormalizedGroup:
    """Map keypoints relative to the signing space: the box spans [-1, 1]^2.

    Points outside the box map outside [-1, 1] and are deliberately not
    clamped; their geometry relative to the space is the signal.
    """
    box = space.box
    x_span = box.x_max - box.x_min
    y_span = box.y_max - box.y_min
    normalized = tuple(
        (
            2 * (x - box.x_min) / x_span - 1,
            2 * (y - box.y_min) / y_span - 1,
        )
        for x, y in points
    )
    return NormalizedGroup(points=normalized, scheme=NormScheme.GLOBAL_SIGNING_SPACE)


def decimate(frames: Sequence[T]) -> list[T]:
    """Keep every other frame (even input indices), halving the temporal rate."""
    return list(frames[::2])


def _fill(values: np.ndarray, span: slice, group: NormalizedGroup) -> None:
    flat = np.asarray(group.points, dtype=np.float32).reshape(-1)
    values[span] = flat


def assemble(
    selected: SelectedKeypoints,
    space: SigningSpace,
    local_epsilon: float = LOCAL_EPSILON,
) -> FeatureVector:
    """Pack one frame's selected keypoints into the 208-value feature vector.

    Body points are globally normalized against the stabilized signing
    space; face and hands are locally normalized. Absent groups zero-fill
    their span and drop their mask flag; a missing body is not an error
    here, it is just flagged.
    """
    values = np.zeros(FEATURE_DIM, dtype=np.float32)
    if selected.body is not None:
        _fill(values, BODY_SLICE, global_normalize(selected.body, space))
    if selected.face is not None:
        _fill(values, FACE_SLICE, local_normalize(selected.face, local_epsilon))
    if selected.left_hand is not None:
        _fill(values, LEFT_HAND_SLICE, local_normalize(selected.left_hand, local_epsilon))
    if selected.right_hand is not None:
        _fill(values, RIGHT_HAND_SLICE, local_normalize(selected.right_hand, local_epsilon))
    return FeatureVector(values=values, masks=selected.masks)
