"""Signing-space boxes, median stabilization, and square crop geometry.

The signing space is the region a signer articulates in: a box centered
between the shoulders with side four times the shoulder distance, grown
outward until it covers every retained body keypoint of the frame. Per-frame
boxes are unstable under detector jitter, so the whole-clip box is the
per-coordinate median over frames.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from statistics import median
from typing import Sequence

import numpy as np

from .core import LEFT_SHOULDER, RIGHT_SHOULDER, Point

SHOULDER_EPSILON = 1e-6

# Box side as a multiple of the shoulder distance.
SIGNING_SPACE_SCALE = 4.0


class DegenerateShoulders(ValueError):
    pass


class EmptySequence(ValueError):
    pass


class EmptyIntersection(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


class BoxSource(Enum):
    PER_FRAME = "per_frame"
    MEDIAN_STABILIZED = "median_stabilized"


@dataclass(frozen=True)
class Box:
    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self) -> None:
        values = (self.x_min, self.y_min, self.x_max, self.y_max)
        if not all(math.isfinite(v) for v in values):
            raise ValueError(f"box coordinates must be finite, got {values}")
        if self.x_min >= self.x_max or self.y_min >= self.y_max:
            raise ValueError(f"box must have positive extent, got {values}")

    @property
    def center(self) -> Point:
        return ((self.x_min + self.x_max) / 2, (self.y_min + self.y_max) / 2)


@dataclass(frozen=True)
class SigningSpace:
    box: Box
    shoulder_distance: float
    source: BoxSource


@dataclass(frozen=True)
class CropSpec:
    """Integer crop-and-pad plan taking one frame to a square of ``target_resolution``.

    ``rect`` is (x0, y0, x1, y1) in source pixels, already clamped to the
    image; ``pad`` is (left, top, right, bottom) black padding making
    rect + pad square.
    """

    rect: tuple[int, int, int, int]
    pad: tuple[int, int, int, int]
    target_resolution: int
    source_width: int
    source_height: int

    @property
    def square_side(self) -> int:
        x0, y0, x1, y1 = self.rect
        return (x1 - x0) + self.pad[0] + self.pad[2]

    def map_point(self, x: float, y: float) -> tuple[float, float]:
        """Map an image-normalized point into output pixel coordinates."""
        x0, y0, _, _ = self.rect
        scale = self.target_resolution / self.square_side
        out_x = (x * self.source_width - x0 + self.pad[0]) * scale
        out_y = (y * self.source_height - y0 + self.pad[1]) * scale
        return (out_x, out_y)

    def to_record(self) -> dict:
        return {
            "rect": list(self.rect),
            "pad": list(self.pad),
            "target": self.target_resolution,
            "source": [self.source_width, self.source_height],
        }

    @classmethod
    def from_record(cls, record: dict) -> "CropSpec":
        return cls(
            rect=tuple(record["rect"]),
            pad=tuple(record["pad"]),
            target_resolution=record["target"],
            source_width=record["source"][0],
            source_height=record["source"][1],
        )


def frame_signing_space(
    body_points: Sequence[Point], epsilon: float = SHOULDER_EPSILON
) -> SigningSpace:
    """Compute one frame's signing space from its retained body keypoints.

    The initial box is centered on the shoulder midpoint with side
    4x the shoulder distance; each side is then pushed outward so every
    given body point lies inside. Raises :class:`DegenerateShoulders` when
    the shoulders (nearly) coincide.
    """
    left = body_points[LEFT_SHOULDER]
    right = body_points[RIGHT_SHOULDER]
    distance = math.hypot(left[0] - right[0], left[1] - right[1])
    if distance <= epsilon:
        raise DegenerateShoulders(
            f"shoulder distance {distance} is below epsilon {epsilon}"
        )
    cx = (left[0] + right[0]) / 2
    cy = (left[1] + right[1]) / 2
    half = SIGNING_SPACE_SCALE * distance / 2

    xs = [p[0] for p in body_points]
    ys = [p[1] for p in body_points]
    box = Box(
        x_min=min(cx - half, *xs),
        y_min=min(cy - half, *ys),
        x_max=max(cx + half, *xs),
        y_max=max(cy + half, *ys),
    )
    return SigningSpace(box=box, shoulder_distance=distance, source=BoxSource.PER_FRAME)


def stabilize(spaces: Sequence[SigningSpace]) -> SigningSpace:
    """Collapse per-frame signing spaces into one per-coordinate median box.

    Each of x_min, y_min, x_max, y_max is the independent median over frames
    (even counts average the two middle values). The result is the stable
    whole-clip crop; individual frames may still have keypoints outside it.
    """
    if not spaces:
        raise EmptySequence("no signing spaces to stabilize")
    box = Box(
        x_min=median(s.box.x_min for s in spaces),
        y_min=median(s.box.y_min for s in spaces),
        x_max=median(s.box.x_max for s in spaces),
        y_max=median(s.box.y_max for s in spaces),
    )
    return SigningSpace(
        box=box,
        shoulder_distance=median(s.shoulder_distance for s in spaces),
        source=BoxSource.MEDIAN_STABILIZED,
    )


def crop_spec(
    space: SigningSpace,
    image_width_px: int,
    image_height_px: int,
    target_resolution: int,
) -> CropSpec:
    """Convert a signing space into an integer crop-and-pad plan.

    The box is scaled to pixels, rounded outward (never cropping signing
    content), and clamped to the image; the shorter rect dimension is then
    padded symmetrically to a square, odd remainders landing on the
    max side.
    """
    if image_width_px <= 0 or image_height_px <= 0:
        raise ValueError("image dimensions must be positive")
    if target_resolution <= 0:
        raise ValueError("target resolution must be positive")
    box = space.box
    x0 = max(0, math.floor(box.x_min * image_width_px))
    y0 = max(0, math.floor(box.y_min * image_height_px))
    x1 = min(image_width_px, math.ceil(box.x_max * image_width_px))
    y1 = min(image_height_px, math.ceil(box.y_max * image_height_px))
    if x0 >= x1 or y0 >= y1:
        raise EmptyIntersection(
            f"box {box} does not intersect a {image_width_px}x{image_height_px} image"
        )
    width = x1 - x0
    height = y1 - y0
    pad = [0, 0, 0, 0]
    if width < height:
        deficit = height - width
        pad[0] = deficit // 2
        pad[2] = deficit - pad[0]
    elif height < width:
        deficit = width - height
        pad[1] = deficit // 2
        pad[3] = deficit - pad[1]
    return CropSpec(
        rect=(x0, y0, x1, y1),
        pad=tuple(pad),
        target_resolution=target_resolution,
        source_width=image_width_px,
        source_height=image_height_px,
    )


def apply_crop(frame_pixels: np.ndarray, spec: CropSpec) -> np.ndarray:
    """Crop, black-pad to square, and nearest-neighbor resize one RGB frame.

    ``frame_pixels`` must be a (height, width, 3) uint8 array matching the
    spec's source dimensions. Output pixel (i, j) samples the square at
    ``floor((i + 0.5) * side / target)``, which makes an identity spec a
    byte-identical copy.
    """
    expected = (spec.source_height, spec.source_width, 3)
    if frame_pixels.shape != expected:
        raise DimensionMismatch(
            f"buffer shape {frame_pixels.shape}, spec expects {expected}"
        )
    x0, y0, x1, y1 = spec.rect
    left, top, _, _ = spec.pad
    side = spec.square_side
    square = np.zeros((side, side, 3), dtype=np.uint8)
    square[top : top + (y1 - y0), left : left + (x1 - x0)] = frame_pixels[
        y0:y1, x0:x1
    ]
    target = spec.target_resolution
    index = np.minimum(
        ((np.arange(target) + 0.5) * side / target).astype(np.int64), side - 1
    )
    return square[np.ix_(index, index)]
