"""Loading, validating and saving grayscale frame sequences.

Frames are float64 arrays indexed ``[row, col]``; the first array axis is the
``u1`` coordinate used throughout the package, the second is ``u2``.
Intensities are normalized to [0, 1].
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import ChannelMismatch, EmptySequence, MixedDimensions, UnreadableFrame

FRAME_SUFFIXES = (".pgm", ".png")

# Rec.601 luma weights
LUMA_WEIGHTS = (0.299, 0.587, 0.114)


@dataclass(frozen=True)
class FrameSequence:
    """Time-ordered grayscale frames sampled at ``fs_hz``.

    ``data`` has shape ``(N, height, width)`` and is made read-only on
    construction so a sequence can be shared between workers.
    """

    data: np.ndarray
    fs_hz: float

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.ndim != 3:
            raise MixedDimensions(f"expected (N, H, W) frames, got shape {data.shape}")
        if data.shape[0] == 0:
            raise EmptySequence("sequence has no frames")
        if not self.fs_hz > 0:
            raise ValueError(f"fs_hz must be positive, got {self.fs_hz}")
        data = data.copy() if data is self.data and data.flags.writeable else data
        data.flags.writeable = False
        object.__setattr__(self, "data", data)

    @classmethod
    def from_frames(cls, frames, fs_hz: float) -> "FrameSequence":
        frames = [np.asarray(f, dtype=float) for f in frames]
        if not frames:
            raise EmptySequence("sequence has no frames")
        shape = frames[0].shape
        for idx, f in enumerate(frames):
            if f.ndim != 2:
                raise MixedDimensions(f"frame {idx} is not 2-D (shape {f.shape})")
            if f.shape != shape:
                raise MixedDimensions(f"frame {idx} has shape {f.shape}, expected {shape}")
        return cls(np.stack(frames), fs_hz)

    @property
    def frames(self) -> list[np.ndarray]:
        return list(self.data)

    @property
    def n_frames(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    @property
    def ts(self) -> float:
        return 1.0 / self.fs_hz

    def times(self) -> np.ndarray:
        return np.arange(self.n_frames) * self.ts

    def __len__(self):
        return self.n_frames

    def __getitem__(self, n):
        return self.data[n]

    def crop(self, row0: int, col0: int, size_r: int, size_c: int) -> "FrameSequence":
        return FrameSequence(self.data[:, row0:row0 + size_r, col0:col0 + size_c], self.fs_hz)

    def slice_frames(self, start: int, stop: int) -> "FrameSequence":
        return FrameSequence(self.data[start:stop], self.fs_hz)


def to_grayscale(rgb_frame) -> np.ndarray:
    """Collapse an ``(H, W, 3)`` RGB frame to luma with Rec.601 weights."""
    rgb = np.asarray(rgb_frame, dtype=float)
    if rgb.ndim != 3 or rgb.shape[-1] != 3:
        raise ChannelMismatch(f"expected (H, W, 3) array, got shape {rgb.shape}")
    return rgb @ np.asarray(LUMA_WEIGHTS)


def _read_image(path: Path) -> np.ndarray:
    try:
        with Image.open(path) as im:
            im.load()
            mode = im.mode
            arr = np.asarray(im)
    except (UnidentifiedImageError, OSError) as exc:
        raise UnreadableFrame(f"cannot read frame {path}: {exc}") from exc

    if mode in ("L", "P"):
        return arr.astype(float) / 255.0
    if mode in ("I;16", "I;16B", "I;16L", "I"):
        return arr.astype(float) / 65535.0
    if mode in ("RGB", "RGBA"):
        return to_grayscale(arr[..., :3].astype(float) / 255.0)
    raise UnreadableFrame(f"unsupported image mode {mode!r} in {path}")


def read_meta(meta_path) -> dict:
    meta = {}
    try:
        text = Path(meta_path).read_text()
    except OSError as exc:
        raise UnreadableFrame(f"missing sidecar header {meta_path}") from exc
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        meta[key.strip()] = value.strip()
    try:
        return {
            "width": int(meta["width"]),
            "height": int(meta["height"]),
            "fps": float(meta["fps"]),
        }
    except (KeyError, ValueError) as exc:
        raise UnreadableFrame(f"malformed sidecar header {meta_path}: {exc}") from exc


def _load_y8(path: Path, fs_hz) -> FrameSequence:
    meta = read_meta(str(path) + ".meta")
    w, h = meta["width"], meta["height"]
    raw = np.fromfile(path, dtype=np.uint8)
    if raw.size == 0:
        raise EmptySequence(f"{path} is empty")
    if w <= 0 or h <= 0 or raw.size % (w * h):
        raise UnreadableFrame(
            f"{path}: {raw.size} bytes is not a whole number of {w}x{h} frames")
    frames = raw.reshape(-1, h, w).astype(float) / 255.0
    return FrameSequence(frames, fs_hz if fs_hz is not None else meta["fps"])


def load_sequence(path, fs_hz: float | None = None) -> FrameSequence:
    """Load a directory of PGM/PNG frames or a raw ``.y8`` file.

    :param path: directory (frames taken in lexicographic filename order) or
        a ``.y8`` file with a ``.y8.meta`` sidecar.
    :param fs_hz: frame rate. Required for directories; for ``.y8`` input it
        overrides the sidecar ``fps`` when given.
    """
    path = Path(path)
    if path.is_dir():
        if fs_hz is None:
            raise ValueError("fs_hz is required when loading a frame directory")
        names = sorted(p for p in os.listdir(path) if p.lower().endswith(FRAME_SUFFIXES))
        if not names:
            raise EmptySequence(f"no PGM/PNG frames in {path}")
        return FrameSequence.from_frames([_read_image(path / n) for n in names], fs_hz)
    if not path.exists():
        raise UnreadableFrame(f"{path} does not exist")
    if path.suffix.lower() == ".y8":
        return _load_y8(path, fs_hz)
    if path.suffix.lower() in FRAME_SUFFIXES:
        if fs_hz is None:
            raise ValueError("fs_hz is required for a single image")
        return FrameSequence.from_frames([_read_image(path)], fs_hz)
    raise UnreadableFrame(f"unrecognized input {path}")


def quantize_u8(data) -> np.ndarray:
    return np.clip(np.rint(np.asarray(data) * 255.0), 0, 255).astype(np.uint8)


def save_y8(seq: FrameSequence, path) -> Path:
    """Write ``seq`` as raw 8-bit frames plus the ``.meta`` sidecar."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    quantize_u8(seq.data).tofile(path)
    Path(str(path) + ".meta").write_text(
        f"width={seq.width}\nheight={seq.height}\nfps={seq.fs_hz!r}\n")
    return path


def write_pgm(frame, path) -> Path:
    """Save one frame (values in [0, 1]) as binary P5 with maxval 255."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    u8 = quantize_u8(frame)
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (u8.shape[1], u8.shape[0]))
        fh.write(u8.tobytes())
    return path


def save_frame_dir(seq: FrameSequence, directory, prefix="frame") -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    width = max(5, len(str(seq.n_frames)))
    for n, frame in enumerate(seq.data):
        write_pgm(frame, directory / f"{prefix}{n:0{width}d}.pgm")
    return directory
