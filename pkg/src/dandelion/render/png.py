"""Minimal PNG codec for 8-bit RGBA images (zlib + struct only)."""
from __future__ import annotations

import struct
import zlib

import numpy as np

from ..errors import DataError, InvalidParams
from .raster import RasterImage

SIGNATURE = b"\x89PNG\r\n\x1a\n"


def _chunk(kind: bytes, data: bytes) -> bytes:
    return struct.pack(">I", len(data)) + kind + data + struct.pack(">I", zlib.crc32(kind + data) & 0xFFFFFFFF)


def encode_png(img: RasterImage, level: int = 6) -> bytes:
    """Encode as truecolor-with-alpha, 8 bits per channel, "Up" row filter."""
    if img.width <= 0 or img.height <= 0:
        raise InvalidParams(f"cannot encode an empty {img.width}x{img.height} image")
    rows = img.pixels.reshape(img.height, img.width * 4)
    filtered = rows.copy()
    filtered[1:] = rows[1:] - rows[:-1]  # uint8 arithmetic wraps mod 256
    lines = np.concatenate([np.full((img.height, 1), 2, dtype=np.uint8), filtered], axis=1)
    ihdr = struct.pack(">IIBBBBB", img.width, img.height, 8, 6, 0, 0, 0)
    return b"".join([
        SIGNATURE,
        _chunk(b"IHDR", ihdr),
        _chunk(b"IDAT", zlib.compress(lines.tobytes(), level)),
        _chunk(b"IEND", b""),
    ])


def _paeth(a: int, b: int, c: int) -> int:
    p = a + b - c
    pa, pb, pc = abs(p - a), abs(p - b), abs(p - c)
    if pa <= pb and pa <= pc:
        return a
    return b if pb <= pc else c


def decode_png(data: bytes) -> RasterImage:
    """Decode a non-interlaced 8-bit RGBA PNG (all five row filters)."""
    if not data.startswith(SIGNATURE):
        raise DataError("not a PNG file")
    pos = len(SIGNATURE)
    header = None
    idat = []
    while pos < len(data):
        if pos + 8 > len(data):
            raise DataError("truncated PNG chunk")
        (length,) = struct.unpack(">I", data[pos:pos + 4])
        kind = data[pos + 4:pos + 8]
        body = data[pos + 8:pos + 8 + length]
        (crc,) = struct.unpack(">I", data[pos + 8 + length:pos + 12 + length])
        if zlib.crc32(kind + body) & 0xFFFFFFFF != crc:
            raise DataError(f"CRC mismatch in {kind!r} chunk")
        pos += 12 + length
        if kind == b"IHDR":
            header = struct.unpack(">IIBBBBB", body)
        elif kind == b"IDAT":
            idat.append(body)
        elif kind == b"IEND":
            break
    if header is None:
        raise DataError("missing IHDR")
    width, height, depth, color, _, _, interlace = header
    if (depth, color, interlace) != (8, 6, 0):
        raise DataError("only non-interlaced 8-bit RGBA PNGs are supported")
    raw = np.frombuffer(zlib.decompress(b"".join(idat)), dtype=np.uint8)
    stride = width * 4
    if raw.size != height * (stride + 1):
        raise DataError("image data has the wrong size")
    raw = raw.reshape(height, stride + 1)
    out = np.zeros((height, stride), dtype=np.uint8)
    prior = np.zeros(stride, dtype=np.uint8)
    for r in range(height):
        ftype, line = raw[r, 0], raw[r, 1:]
        if ftype == 0:
            cur = line.copy()
        elif ftype == 1:
            cur = np.cumsum(line.reshape(width, 4), axis=0, dtype=np.uint8).reshape(stride)
        elif ftype == 2:
            cur = line + prior
        elif ftype in (3, 4):
            cur = np.zeros(stride, dtype=np.uint8)
            for i in range(stride):
                left = int(cur[i - 4]) if i >= 4 else 0
                up = int(prior[i])
                if ftype == 3:
                    pred = (left + up) // 2
                else:
                    pred = _paeth(left, up, int(prior[i - 4]) if i >= 4 else 0)
                cur[i] = (int(line[i]) + pred) & 0xFF
        else:
            raise DataError(f"unknown PNG filter type {ftype}")
        out[r] = cur
        prior = cur
    return RasterImage(width, height, out.reshape(height, width, 4))
