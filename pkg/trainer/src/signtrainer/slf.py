"""Reader for `.slf` landmark feature files.

The file format is the interface to the preprocessing toolchain, so this
module depends only on the byte layout: little-endian, magic ``SLF1``,
header ``<HIIfffff`` (version, frame count, feature dim, fps, 4-float
signing-space box), then per frame ``dim`` float32 values and one
presence mask byte (bits 0..3). The clip id is the file name stem.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"SLF1"
SUPPORTED_VERSION = 1

_HEADER = struct.Struct("<HIIfffff")
_MASK_GROUPS = 4


class SlfReadError(ValueError):
    pass


class BadMagic(SlfReadError):
    pass


class VersionMismatch(SlfReadError):
    pass


class TruncatedFile(SlfReadError):
    pass


@dataclass(frozen=True)
class FeatureClip:
    """One decoded feature file: frames are [n, dim] float32, group_masks
    are [n, 4] bool (body, face, left hand, right hand present)."""

    clip_id: str
    fps: float
    frames: np.ndarray
    group_masks: np.ndarray
    box: tuple[float, float, float, float]

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def dim(self) -> int:
        return self.frames.shape[1]


def read_clip_bytes(data: bytes, clip_id: str = "") -> FeatureClip:
    if len(data) < len(MAGIC):
        raise TruncatedFile("shorter than magic")
    if data[: len(MAGIC)] != MAGIC:
        raise BadMagic(f"magic {data[:len(MAGIC)]!r}, expected {MAGIC!r}")
    if len(data) < len(MAGIC) + _HEADER.size:
        raise TruncatedFile("shorter than header")
    version, frame_count, dim, fps, x0, y0, x1, y1 = _HEADER.unpack_from(
        data, len(MAGIC)
    )
    if version != SUPPORTED_VERSION:
        raise VersionMismatch(
            f"format version {version}, reader supports {SUPPORTED_VERSION}"
        )
    if dim == 0:
        raise SlfReadError("header declares zero feature dim")

    record_size = 4 * dim + 1
    body = data[len(MAGIC) + _HEADER.size :]
    if len(body) < record_size * frame_count:
        raise TruncatedFile(
            f"header declares {frame_count} frames, payload holds "
            f"{len(body) // record_size}"
        )
    if len(body) > record_size * frame_count:
        raise SlfReadError("trailing bytes after declared frames")

    records = np.frombuffer(body, dtype=np.uint8).reshape(frame_count, record_size)
    frames = records[:, : 4 * dim].copy().view("<f4").reshape(frame_count, dim)
    mask_bytes = records[:, 4 * dim]
    if np.any(mask_bytes >> _MASK_GROUPS):
        bad = int(np.argmax(mask_bytes >> _MASK_GROUPS))
        raise SlfReadError(f"frame {bad}: unknown mask bits 0x{mask_bytes[bad]:02x}")
    group_masks = (
        mask_bytes[:, None] & (1 << np.arange(_MASK_GROUPS, dtype=np.uint8))
    ).astype(bool)
    return FeatureClip(
        clip_id=clip_id,
        fps=fps,
        frames=np.ascontiguousarray(frames, dtype=np.float32),
        group_masks=group_masks,
        box=(x0, y0, x1, y1),
    )


def read_clip(path: str | Path) -> FeatureClip:
    path = Path(path)
    return read_clip_bytes(path.read_bytes(), clip_id=path.stem)
