"""Video volume container and its little-endian binary format.

Layout: magic ``VVOL``, u32 version (1), u32 C, N_t, H, W, then
C*N_t*H*W float32 intensities in row-major (C, N_t, H, W) order.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

MAGIC = b"VVOL"
VERSION = 1

__all__ = ["VideoVolume", "write_vvol", "read_vvol", "write_pgm"]


@dataclass
class VideoVolume:
    """Grayscale (or multi-channel) video intensities, (C, N_t, H, W) f32."""

    data: np.ndarray

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=np.float32)
        if self.data.ndim != 4:
            raise ValueError(f"expected (C, N_t, H, W), got shape {self.data.shape}")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("video volume must be finite")

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def n_frames(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[2]

    @property
    def width(self) -> int:
        return self.data.shape[3]


def write_vvol(volume: VideoVolume, path) -> None:
    data = volume.data
    header = MAGIC + struct.pack("<5I", VERSION, *data.shape)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(data.astype("<f4", copy=False).tobytes())


def read_vvol(path) -> VideoVolume:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        version, c, n_t, h, w = struct.unpack("<5I", fh.read(20))
        if version != VERSION:
            raise ValueError(f"{path}: unsupported version {version}")
        raw = fh.read(4 * c * n_t * h * w)
        if len(raw) != 4 * c * n_t * h * w:
            raise ValueError(f"{path}: truncated payload")
        data = np.frombuffer(raw, dtype="<f4").reshape(c, n_t, h, w)
    return VideoVolume(data=data.copy())


def write_pgm(image, path) -> None:
    """Binary PGM export of one [0, 1] grayscale frame, for inspection."""
    image = np.asarray(image)
    if image.ndim != 2:
        raise ValueError("PGM export expects a single 2-D frame")
    levels = np.clip(np.rint(image * 255.0), 0, 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{image.shape[1]} {image.shape[0]}\n255\n".encode())
        fh.write(levels.tobytes())
