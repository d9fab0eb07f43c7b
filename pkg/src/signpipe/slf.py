"""Binary feature file codec (`.slf`).

Layout, all little-endian:

    magic   4 bytes  b"SLF1"
    header  version u16, frame count u32, dim u32 (= 208), fps f32,
            signing-space box as 4 x f32 (x_min, y_min, x_max, y_max)
    frames  per frame: dim x f32 values, then 1 mask byte
            (bit 0 body, bit 1 face, bit 2 left hand, bit 3 right hand)

The payload is self-describing except for the clip id, which lives in the
file name (``<clip_id>.slf``).
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import IO

import numpy as np

from .features import FEATURE_DIM, FeatureSequence, FeatureVector
from .geometry import Box

MAGIC = b"SLF1"
FORMAT_VERSION = 1

_HEADER = struct.Struct("<HIIfffff")
_MASK_BITS = ("body", "face", "left_hand", "right_hand")


class SlfError(ValueError):
    pass


class BadMagic(SlfError):
    pass


class VersionMismatch(SlfError):
    pass


class TruncatedFile(SlfError):
    pass


def write_features(seq: FeatureSequence, sink: IO[bytes]) -> None:
    box = seq.signing_space
    sink.write(MAGIC)
    sink.write(
        _HEADER.pack(
            FORMAT_VERSION,
            len(seq.frames),
            FEATURE_DIM,
            seq.fps_out,
            box.x_min,
            box.y_min,
            box.x_max,
            box.y_max,
        )
    )
    for frame in seq.frames:
        sink.write(np.asarray(frame.values, dtype="<f4").tobytes())
        mask_byte = sum(1 << i for i, flag in enumerate(frame.masks) if flag)
        sink.write(bytes([mask_byte]))


def read_features(source: IO[bytes], clip_id: str = "") -> FeatureSequence:
    """Read one feature sequence; ``clip_id`` is supplied by the caller
    (usually the file stem) since the payload does not carry it."""
    magic = source.read(len(MAGIC))
    if len(magic) < len(MAGIC):
        raise TruncatedFile("file shorter than magic")
    if magic != MAGIC:
        raise BadMagic(f"magic {magic!r}, expected {MAGIC!r}")
    header = source.read(_HEADER.size)
    if len(header) < _HEADER.size:
        raise TruncatedFile("file shorter than header")
    version, frame_count, dim, fps, x_min, y_min, x_max, y_max = _HEADER.unpack(header)
    if version != FORMAT_VERSION:
        raise VersionMismatch(f"version {version}, reader supports {FORMAT_VERSION}")
    if dim != FEATURE_DIM:
        raise SlfError(f"dim {dim}, format version {FORMAT_VERSION} requires {FEATURE_DIM}")

    record_size = 4 * dim + 1
    payload = source.read(record_size * frame_count + 1)
    if len(payload) < record_size * frame_count:
        raise TruncatedFile(
            f"header declares {frame_count} frames, payload holds "
            f"{len(payload) // record_size}"
        )
    if len(payload) > record_size * frame_count:
        raise SlfError("trailing data after declared frames")

    frames = []
    for i in range(frame_count):
        offset = i * record_size
        values = np.frombuffer(payload, dtype="<f4", count=dim, offset=offset).copy()
        mask_byte = payload[offset + 4 * dim]
        if mask_byte >> len(_MASK_BITS):
            raise SlfError(f"frame {i}: unknown mask bits 0x{mask_byte:02x}")
        masks = tuple(bool(mask_byte & (1 << b)) for b in range(len(_MASK_BITS)))
        frames.append(FeatureVector(values=values, masks=masks))

    try:
        box = Box(x_min=x_min, y_min=y_min, x_max=x_max, y_max=y_max)
    except ValueError as exc:
        raise SlfError(f"header box invalid: {exc}") from exc
    return FeatureSequence(
        clip_id=clip_id,
        fps_out=fps,
        frames=tuple(frames),
        signing_space=box,
    )


def write_feature_file(seq: FeatureSequence, directory: str | Path) -> Path:
    path = Path(directory) / f"{seq.clip_id}.slf"
    with open(path, "wb") as sink:
        write_features(seq, sink)
    return path


def read_feature_file(path: str | Path) -> FeatureSequence:
    path = Path(path)
    with open(path, "rb") as source:
        return read_features(source, clip_id=path.stem)
