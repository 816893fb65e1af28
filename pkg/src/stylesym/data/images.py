"""Image decoding, encoding and resampling.

Images live in memory as channel-major float64 planes in [0, 1].  The
decoders cover exactly the formats the corpora use: binary PGM (P5) and
PPM (P6) with maxval 255, and 8-bit non-interlaced PNG (grayscale or
RGB).  The PNG path is a bounded decoder built on stdlib zlib -- no
palette, no alpha, no 16-bit.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ImageFormatError

_PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"


@dataclass
class ImageTensor:
    """Channel-major image: `pixels` has shape (channels, height, width).

    Values are float64 in [0, 1]; channels is 1 (gray) or 3 (RGB).
    """

    pixels: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.pixels, dtype=np.float64)
        if p.ndim != 3:
            raise ImageFormatError(f"pixels must be 3-D, got shape {p.shape}")
        if p.shape[0] not in (1, 3):
            raise ImageFormatError(f"channels must be 1 or 3, got {p.shape[0]}")
        if p.shape[1] < 1 or p.shape[2] < 1:
            raise ImageFormatError(f"empty image of shape {p.shape}")
        if not np.all(np.isfinite(p)):
            raise ImageFormatError("pixel values must be finite")
        if p.min() < 0.0 or p.max() > 1.0:
            raise ImageFormatError(
                f"pixel values outside [0, 1]: min {p.min()}, max {p.max()}"
            )
        self.pixels = p

    @property
    def channels(self) -> int:
        return self.pixels.shape[0]

    @property
    def height(self) -> int:
        return self.pixels.shape[1]

    @property
    def width(self) -> int:
        return self.pixels.shape[2]

    def plane(self, i: int = 0) -> np.ndarray:
        """The i-th channel as a (height, width) array."""
        return self.pixels[i]


def from_bytes_array(arr: np.ndarray) -> ImageTensor:
    """Build an ImageTensor from a uint8 array of shape (c, h, w)."""
    return ImageTensor(arr.astype(np.float64) / 255.0)


def to_bytes_array(img: ImageTensor) -> np.ndarray:
    """Quantize back to uint8 with round-half-away behaviour of np.round."""
    return np.clip(np.round(img.pixels * 255.0), 0, 255).astype(np.uint8)


# ---------------------------------------------------------------------------
# PNM (PGM P5 / PPM P6)
# ---------------------------------------------------------------------------


def _read_pnm_tokens(data: bytes, count: int, start: int):
    """Read `count` whitespace-separated header tokens, skipping # comments.

    Returns (tokens, offset_just_past_single_whitespace_after_last_token).
    """
    tokens = []
    i = start
    n = len(data)
    while len(tokens) < count:
        while i < n and data[i : i + 1].isspace():
            i += 1
        if i < n and data[i : i + 1] == b"#":
            while i < n and data[i : i + 1] not in (b"\n", b"\r"):
                i += 1
            continue
        j = i
        while j < n and not data[j : j + 1].isspace():
            j += 1
        if j == i:
            raise ImageFormatError("truncated PNM header")
        tokens.append(data[i:j])
        i = j
    if i >= n:
        raise ImageFormatError("truncated PNM header")
    return tokens, i + 1  # exactly one whitespace byte after maxval


def _decode_pnm(data: bytes, path: str) -> ImageTensor:
    magic = data[:2]
    channels = 1 if magic == b"P5" else 3
    try:
        tokens, offset = _read_pnm_tokens(data, 3, 2)
    except ImageFormatError as exc:
        raise ImageFormatError(f"{path}: {exc}") from None
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError:
        raise ImageFormatError(f"{path}: malformed PNM header") from None
    if width < 1 or height < 1:
        raise ImageFormatError(f"{path}: bad PNM dimensions {width}x{height}")
    if maxval != 255:
        raise ImageFormatError(
            f"{path}: unsupported PNM maxval {maxval} (only 8-bit, maxval 255)"
        )
    expected = width * height * channels
    raster = data[offset : offset + expected]
    if len(raster) != expected:
        raise ImageFormatError(
            f"{path}: truncated PNM raster ({len(raster)} of {expected} bytes)"
        )
    flat = np.frombuffer(raster, dtype=np.uint8)
    if channels == 1:
        arr = flat.reshape(1, height, width)
    else:
        arr = flat.reshape(height, width, 3).transpose(2, 0, 1)
    return from_bytes_array(arr)


def _encode_pnm(img: ImageTensor) -> bytes:
    arr = to_bytes_array(img)
    if img.channels == 1:
        header = b"P5\n%d %d\n255\n" % (img.width, img.height)
        raster = arr[0].tobytes()
    else:
        header = b"P6\n%d %d\n255\n" % (img.width, img.height)
        raster = arr.transpose(1, 2, 0).tobytes()
    return header + raster


def save_pgm(img: ImageTensor, path) -> None:
    """Write a grayscale image as binary PGM (maxval 255)."""
    if img.channels != 1:
        raise ImageFormatError("save_pgm needs a 1-channel image")
    Path(path).write_bytes(_encode_pnm(img))


def save_ppm(img: ImageTensor, path) -> None:
    """Write an RGB image as binary PPM (maxval 255)."""
    if img.channels != 3:
        raise ImageFormatError("save_ppm needs a 3-channel image")
    Path(path).write_bytes(_encode_pnm(img))


# ---------------------------------------------------------------------------
# PNG (8-bit, non-interlaced, gray / RGB)
# ---------------------------------------------------------------------------


def _png_unfilter(raw: bytes, height: int, stride: int, bpp: int) -> np.ndarray:
    out = np.empty((height, stride), dtype=np.uint8)
    pos = 0
    prev = np.zeros(stride, dtype=np.uint8)
    for row in range(height):
        ftype = raw[pos]
        pos += 1
        line = np.frombuffer(raw[pos : pos + stride], dtype=np.uint8).copy()
        pos += stride
        if ftype == 0:  # None
            pass
        elif ftype == 1:  # Sub
            for i in range(bpp, stride):
                line[i] = (line[i] + line[i - bpp]) & 0xFF
        elif ftype == 2:  # Up
            line = (line.astype(np.int32) + prev).astype(np.uint8)
        elif ftype == 3:  # Average
            for i in range(stride):
                left = int(line[i - bpp]) if i >= bpp else 0
                line[i] = (int(line[i]) + (left + int(prev[i])) // 2) & 0xFF
        elif ftype == 4:  # Paeth
            for i in range(stride):
                a = int(line[i - bpp]) if i >= bpp else 0
                b = int(prev[i])
                c = int(prev[i - bpp]) if i >= bpp else 0
                p = a + b - c
                pa, pb, pc = abs(p - a), abs(p - b), abs(p - c)
                if pa <= pb and pa <= pc:
                    pred = a
                elif pb <= pc:
                    pred = b
                else:
                    pred = c
                line[i] = (int(line[i]) + pred) & 0xFF
        else:
            raise ImageFormatError(f"unknown PNG filter type {ftype}")
        out[row] = line
        prev = line
    return out


def _decode_png(data: bytes, path: str) -> ImageTensor:
    if len(data) < 8 or data[:8] != _PNG_SIGNATURE:
        raise ImageFormatError(f"{path}: bad PNG signature")
    pos = 8
    ihdr = None
    idat = []
    while pos + 8 <= len(data):
        (length,) = struct.unpack(">I", data[pos : pos + 4])
        ctype = data[pos + 4 : pos + 8]
        body = data[pos + 8 : pos + 8 + length]
        if len(body) != length:
            raise ImageFormatError(f"{path}: truncated PNG chunk {ctype!r}")
        crc = data[pos + 8 + length : pos + 12 + length]
        if len(crc) != 4:
            raise ImageFormatError(f"{path}: truncated PNG chunk {ctype!r}")
        if struct.unpack(">I", crc)[0] != zlib.crc32(ctype + body):
            raise ImageFormatError(f"{path}: PNG chunk {ctype!r} CRC mismatch")
        if ctype == b"IHDR":
            ihdr = body
        elif ctype == b"IDAT":
            idat.append(body)
        elif ctype == b"IEND":
            break
        pos += 12 + length
    if ihdr is None or len(ihdr) != 13:
        raise ImageFormatError(f"{path}: missing PNG IHDR")
    width, height, depth, color, comp, filt, interlace = struct.unpack(
        ">IIBBBBB", ihdr
    )
    if depth != 8:
        raise ImageFormatError(f"{path}: unsupported PNG bit depth {depth}")
    if color not in (0, 2):
        raise ImageFormatError(
            f"{path}: unsupported PNG color type {color} (only gray/RGB)"
        )
    if interlace != 0:
        raise ImageFormatError(f"{path}: interlaced PNG not supported")
    if comp != 0 or filt != 0:
        raise ImageFormatError(f"{path}: nonstandard PNG compression/filtering")
    if not idat:
        raise ImageFormatError(f"{path}: PNG has no IDAT data")
    channels = 1 if color == 0 else 3
    try:
        raw = zlib.decompress(b"".join(idat))
    except zlib.error as exc:
        raise ImageFormatError(f"{path}: PNG inflate failed: {exc}") from None
    stride = width * channels
    if len(raw) != height * (stride + 1):
        raise ImageFormatError(f"{path}: PNG raster size mismatch")
    rows = _png_unfilter(raw, height, stride, channels)
    if channels == 1:
        arr = rows.reshape(1, height, width)
    else:
        arr = rows.reshape(height, width, 3).transpose(2, 0, 1)
    return from_bytes_array(arr)


def save_png(img: ImageTensor, path) -> None:
    """Write an 8-bit non-interlaced PNG (filter type 0 on every row)."""
    arr = to_bytes_array(img)
    color = 0 if img.channels == 1 else 2
    if img.channels == 1:
        rows = arr[0]
    else:
        rows = arr.transpose(1, 2, 0).reshape(img.height, -1)
    raw = b"".join(b"\x00" + rows[r].tobytes() for r in range(img.height))
    ihdr = struct.pack(">IIBBBBB", img.width, img.height, 8, color, 0, 0, 0)

    def chunk(ctype: bytes, body: bytes) -> bytes:
        return (
            struct.pack(">I", len(body))
            + ctype
            + body
            + struct.pack(">I", zlib.crc32(ctype + body))
        )

    payload = zlib.compress(raw, 9)
    blob = (
        _PNG_SIGNATURE
        + chunk(b"IHDR", ihdr)
        + chunk(b"IDAT", payload)
        + chunk(b"IEND", b"")
    )
    Path(path).write_bytes(blob)


# ---------------------------------------------------------------------------
# Loading, grayscale, resize
# ---------------------------------------------------------------------------


def load_image(path) -> ImageTensor:
    """Decode a PGM/PPM/PNG file into an ImageTensor.

    Raises:
        ImageFormatError: unsupported magic, bad depth, truncation, with
            the offending path in the message.
    """
    p = Path(path)
    try:
        data = p.read_bytes()
    except OSError as exc:
        raise ImageFormatError(f"cannot read image {p}: {exc}") from None
    if data[:2] in (b"P5", b"P6"):
        return _decode_pnm(data, str(p))
    if data[:8] == _PNG_SIGNATURE:
        return _decode_png(data, str(p))
    raise ImageFormatError(
        f"{p}: unsupported image format (expected PGM P5, PPM P6 or 8-bit PNG)"
    )


def to_grayscale(img: ImageTensor) -> ImageTensor:
    """Collapse RGB to luma with weights 0.299 / 0.587 / 0.114.

    A 1-channel input is returned unchanged (same values, fresh object).
    """
    if img.channels == 1:
        return ImageTensor(img.pixels.copy())
    luma = (
        0.299 * img.pixels[0] + 0.587 * img.pixels[1] + 0.114 * img.pixels[2]
    )
    return ImageTensor(np.clip(luma, 0.0, 1.0)[np.newaxis])


def _axis_lerp(plane: np.ndarray, out_len: int, axis: int) -> np.ndarray:
    in_len = plane.shape[axis]
    # Half-pixel-centered source positions, clamped at the borders.
    src = (np.arange(out_len) + 0.5) * (in_len / out_len) - 0.5
    src = np.clip(src, 0.0, in_len - 1.0)
    lo = np.floor(src).astype(np.int64)
    hi = np.minimum(lo + 1, in_len - 1)
    frac = src - lo
    a = np.take(plane, lo, axis=axis)
    b = np.take(plane, hi, axis=axis)
    shape = [1, 1]
    shape[axis] = out_len
    f = frac.reshape(shape)
    return a * (1.0 - f) + b * f


def resize_bilinear(img: ImageTensor, width: int, height: int) -> ImageTensor:
    """Separable bilinear resample with half-pixel-centered sampling.

    Args:
        img: source image.
        width: target width (>= 1).
        height: target height (>= 1).

    Returns:
        ImageTensor of shape (channels, height, width); values stay in
        [0, 1] because every output is a convex combination of inputs.
    """
    if width < 1 or height < 1:
        raise ImageFormatError(f"bad resize target {width}x{height}")
    planes = []
    for c in range(img.channels):
        p = _axis_lerp(img.pixels[c], height, axis=0)
        p = _axis_lerp(p, width, axis=1)
        planes.append(p)
    return ImageTensor(np.clip(np.stack(planes), 0.0, 1.0))
