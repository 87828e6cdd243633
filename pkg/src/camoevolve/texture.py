"""Camouflage pattern representation and serialization.

A pattern is a small RGB grid whose channels are continuous reals in
[0, 255]. Channels stay continuous throughout optimization; quantization to
8-bit happens only when writing the PPM preview. Full precision is preserved
by a JSON sidecar written next to every PPM.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidColorError, InvalidDimensionError, PatternFormatError
from .seeding import derive_rng

CHANNEL_MIN = 0.0
CHANNEL_MAX = 255.0


class PrecisionLossWarning(UserWarning):
    """Loading fell back to 8-bit PPM values because the sidecar is missing."""


@dataclass(frozen=True)
class CamouflagePattern:
    """Immutable RGB grid; ``channels`` has shape (height, width, 3)."""

    channels: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.asarray(self.channels, dtype=np.float64)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise InvalidDimensionError(
                f"pattern grid must have shape (height, width, 3), got {arr.shape}"
            )
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InvalidDimensionError(
                f"pattern dimensions must be >= 1, got {arr.shape[1]}x{arr.shape[0]}"
            )
        if not np.isfinite(arr).all():
            raise InvalidColorError("pattern channels must be finite")
        if arr.min() < CHANNEL_MIN or arr.max() > CHANNEL_MAX:
            raise InvalidColorError(
                f"pattern channels must lie in [0, 255], got range "
                f"[{arr.min()}, {arr.max()}]"
            )
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "channels", arr)

    @property
    def width(self) -> int:
        return self.channels.shape[1]

    @property
    def height(self) -> int:
        return self.channels.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, CamouflagePattern):
            return NotImplemented
        return self.channels.shape == other.channels.shape and np.array_equal(
            self.channels, other.channels
        )

    __hash__ = None  # mutable-array semantics: not hashable

    def __repr__(self) -> str:
        return f"CamouflagePattern({self.width}x{self.height})"

    def quantized(self) -> np.ndarray:
        """8-bit view for display/export (round half to even)."""
        return np.rint(self.channels).astype(np.uint8)


def new_random(width: int, height: int, seed: int) -> CamouflagePattern:
    """Pattern with channels i.i.d. uniform on [0, 255], keyed by seed."""
    if width < 1 or height < 1:
        raise InvalidDimensionError(f"dimensions must be >= 1, got {width}x{height}")
    rng = derive_rng(seed)
    return CamouflagePattern(rng.uniform(CHANNEL_MIN, CHANNEL_MAX, size=(height, width, 3)))


def solid(width: int, height: int, rgb: tuple[float, float, float]) -> CamouflagePattern:
    """Uniform pattern where every pixel equals ``rgb``."""
    if width < 1 or height < 1:
        raise InvalidDimensionError(f"dimensions must be >= 1, got {width}x{height}")
    r, g, b = rgb
    for v in (r, g, b):
        if not (CHANNEL_MIN <= v <= CHANNEL_MAX):
            raise InvalidColorError(f"channel {v} outside [0, 255]")
    grid = np.empty((height, width, 3), dtype=np.float64)
    grid[:, :] = (r, g, b)
    return CamouflagePattern(grid)


def clamp(values: np.ndarray) -> CamouflagePattern:
    """Clip an unconstrained grid back into the valid channel range."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 3 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InvalidDimensionError(
            f"grid must have shape (height, width, 3) with positive size, got {arr.shape}"
        )
    return CamouflagePattern(np.clip(arr, CHANNEL_MIN, CHANNEL_MAX))


def tile(pattern: CamouflagePattern, target_width: int, target_height: int) -> CamouflagePattern:
    """Repeat the pattern periodically to cover target_width x target_height.

    Output pixel (x, y) equals pattern pixel (x mod width, y mod height).
    """
    if target_width < 1 or target_height < 1:
        raise InvalidDimensionError(
            f"tile target must be >= 1x1, got {target_width}x{target_height}"
        )
    ys = np.arange(target_height) % pattern.height
    xs = np.arange(target_width) % pattern.width
    return CamouflagePattern(pattern.channels[np.ix_(ys, xs)])


def _sidecar_path(path: Path) -> Path:
    return path.with_name(path.name + ".json")


def save(pattern: CamouflagePattern, path: str | Path) -> None:
    """Write a binary PPM (P6, 8-bit) plus a full-precision JSON sidecar."""
    path = Path(path)
    header = f"P6\n{pattern.width} {pattern.height}\n255\n".encode("ascii")
    path.write_bytes(header + pattern.quantized().tobytes())
    sidecar = {
        "width": pattern.width,
        "height": pattern.height,
        "channels": pattern.channels.ravel().tolist(),
    }
    _sidecar_path(path).write_text(json.dumps(sidecar), encoding="ascii")


def load(path: str | Path) -> CamouflagePattern:
    """Load a pattern, preferring the full-precision sidecar.

    Without a sidecar the 8-bit PPM values are used and a
    PrecisionLossWarning is emitted.
    """
    path = Path(path)
    sidecar = _sidecar_path(path)
    if sidecar.exists():
        return _load_sidecar(sidecar)
    data = path.read_bytes()
    warnings.warn(
        f"no sidecar next to {path}; loading 8-bit values", PrecisionLossWarning
    )
    return _parse_ppm(data)


def _load_sidecar(sidecar: Path) -> CamouflagePattern:
    try:
        doc = json.loads(sidecar.read_text(encoding="ascii"))
    except (ValueError, UnicodeDecodeError) as exc:
        raise PatternFormatError(f"sidecar {sidecar} is not valid JSON: {exc}") from exc
    try:
        width, height = int(doc["width"]), int(doc["height"])
        channels = np.asarray(doc["channels"], dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise PatternFormatError(f"sidecar {sidecar} missing field: {exc}") from exc
    if channels.size != width * height * 3:
        raise PatternFormatError(
            f"sidecar {sidecar} holds {channels.size} channels, "
            f"expected {width * height * 3}"
        )
    return CamouflagePattern(channels.reshape(height, width, 3))


def _parse_ppm(data: bytes) -> CamouflagePattern:
    """Parse binary P6; raises PatternFormatError with a byte offset."""
    pos = 0

    def skip_space_and_comments(at: int) -> int:
        while at < len(data):
            if data[at : at + 1].isspace():
                at += 1
            elif data[at : at + 1] == b"#":
                while at < len(data) and data[at : at + 1] != b"\n":
                    at += 1
            else:
                break
        return at

    def read_token(at: int) -> tuple[bytes, int]:
        at = skip_space_and_comments(at)
        start = at
        while at < len(data) and not data[at : at + 1].isspace():
            at += 1
        if start == at:
            raise PatternFormatError("truncated PPM header", offset=start)
        return data[start:at], at

    magic, pos = read_token(pos)
    if magic != b"P6":
        raise PatternFormatError(f"expected P6 magic, got {magic!r}", offset=0)
    fields = []
    for name in ("width", "height", "maxval"):
        token, pos = read_token(pos)
        try:
            fields.append(int(token))
        except ValueError:
            raise PatternFormatError(
                f"non-numeric {name} field {token!r}", offset=pos - len(token)
            ) from None
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise PatternFormatError(f"invalid dimensions {width}x{height}", offset=3)
    if maxval != 255:
        raise PatternFormatError(f"unsupported maxval {maxval}", offset=pos)
    pos += 1  # exactly one whitespace byte separates header from payload
    expected = width * height * 3
    payload = data[pos : pos + expected]
    if len(payload) < expected:
        raise PatternFormatError(
            f"payload holds {len(payload)} bytes, expected {expected}",
            offset=pos + len(payload),
        )
    grid = np.frombuffer(payload, dtype=np.uint8).astype(np.float64)
    return CamouflagePattern(grid.reshape(height, width, 3))
