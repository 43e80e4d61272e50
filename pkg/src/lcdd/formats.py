"""Binary PGM (P5) / PPM (P6) images and the LCDDT1 tensor format.

LCDDT1 layout: the 6 magic bytes ``LCDDT1``, the rank as little-endian
uint32, one little-endian uint32 per dimension, then the values as
little-endian float64 in row-major order.
"""
from __future__ import annotations

import os
import struct

import numpy as np

from .data import image_to_model, model_to_image

TENSOR_MAGIC = b"LCDDT1"


class ParseError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


def _header_token(data: bytes, pos: int) -> tuple[bytes, int, int]:
    """Next whitespace-delimited header token, skipping ``#`` comments."""
    n = len(data)
    while pos < n:
        c = data[pos:pos + 1]
        if c.isspace():
            pos += 1
        elif c == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
        else:
            break
    start = pos
    while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise ParseError("unexpected end of header", start)
    return data[start:pos], start, pos


def decode_pnm(data: bytes) -> np.ndarray:
    """Decode P5 into ``(H, W)`` or P6 into ``(H, W, 3)`` uint8."""
    magic = data[:2]
    if magic not in (b"P5", b"P6"):
        raise ParseError(f"bad magic {magic!r}, expected P5 or P6", 0)
    pos = 2
    fields = []
    for name in ("width", "height", "maxval"):
        tok, start, pos = _header_token(data, pos)
        if not tok.isdigit():
            raise ParseError(f"{name} is not a positive integer: {tok!r}", start)
        fields.append((int(tok), start))
    (w, _), (h, _), (maxval, mstart) = fields
    if w < 1 or h < 1:
        raise ParseError("image dimensions must be positive", fields[0][1])
    if maxval != 255:
        raise ParseError(f"unsupported maxval {maxval}, only 255 is accepted", mstart)
    if pos >= len(data) or not data[pos:pos + 1].isspace():
        raise ParseError("missing whitespace after maxval", pos)
    pos += 1
    ch = 1 if magic == b"P5" else 3
    need = w * h * ch
    if len(data) - pos < need:
        raise ParseError(f"truncated payload: need {need} bytes, have {len(data) - pos}", pos)
    img = np.frombuffer(data, dtype=np.uint8, count=need, offset=pos)
    return img.reshape((h, w) if ch == 1 else (h, w, 3)).copy()


def encode_pnm(img) -> bytes:
    img = np.asarray(img)
    if img.dtype != np.uint8:
        raise ValueError("images must be uint8")
    if img.ndim == 2:
        magic = b"P5"
    elif img.ndim == 3 and img.shape[2] == 3:
        magic = b"P6"
    else:
        raise ValueError(f"cannot encode image of shape {img.shape}")
    h, w = img.shape[:2]
    return magic + f"\n{w} {h}\n255\n".encode("ascii") + np.ascontiguousarray(img).tobytes()


def read_image(path) -> np.ndarray:
    with open(path, "rb") as f:
        return decode_pnm(f.read())


def write_image(path, img) -> None:
    with open(path, "wb") as f:
        f.write(encode_pnm(img))


def decode_tensor(data: bytes) -> np.ndarray:
    if data[:6] != TENSOR_MAGIC:
        raise ParseError(f"bad magic {data[:6]!r}, expected {TENSOR_MAGIC!r}", 0)
    if len(data) < 10:
        raise ParseError("truncated rank field", 6)
    (rank,) = struct.unpack_from("<I", data, 6)
    pos = 10
    if len(data) < pos + 4 * rank:
        raise ParseError("truncated dimension list", pos)
    dims = struct.unpack_from(f"<{rank}I", data, pos)
    pos += 4 * rank
    count = int(np.prod(dims, dtype=np.int64)) if rank else 1
    if len(data) - pos < 8 * count:
        raise ParseError(f"truncated payload: need {8 * count} bytes, have {len(data) - pos}", pos)
    values = np.frombuffer(data, dtype="<f8", count=count, offset=pos)
    return values.astype(np.float64).reshape(dims)


def encode_tensor(x) -> bytes:
    x = np.asarray(x, dtype=np.float64)
    head = TENSOR_MAGIC + struct.pack(f"<I{x.ndim}I", x.ndim, *x.shape)
    return head + np.ascontiguousarray(x, dtype="<f8").tobytes()


def read_tensor(path) -> np.ndarray:
    with open(path, "rb") as f:
        return decode_tensor(f.read())


def write_tensor(path, x) -> None:
    with open(path, "wb") as f:
        f.write(encode_tensor(x))


def is_tensor_file(path) -> bool:
    with open(path, "rb") as f:
        return f.read(6) == TENSOR_MAGIC


def read_any(path) -> tuple[np.ndarray, bool]:
    """Load a signal in model range; the flag tells whether it was an 8-bit image."""
    if is_tensor_file(path):
        return read_tensor(path), False
    return image_to_model(read_image(path)), True


def write_like(path, signal, as_image: bool) -> None:
    ext = os.path.splitext(str(path))[1].lower()
    if as_image and ext not in (".lcddt", ".tensor", ".bin"):
        write_image(path, model_to_image(signal))
    else:
        write_tensor(path, signal)
