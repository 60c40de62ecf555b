"""Binary NetPBM (P5 gray, P6 RGB) reading and writing, maxval 255 only."""

from __future__ import annotations

import os

import numpy as np

from dip.errors import MalformedHeader, TruncatedData, UnsupportedMaxval
from dip.imaging.buffer import ImageBuffer

_WHITESPACE = b" \t\n\r\v\f"


def _header_tokens(raw: bytes):
    """Yield (token, end_offset) for the four header fields, skipping comments."""
    pos, n = 0, len(raw)
    found = 0
    while found < 4:
        while pos < n and (raw[pos] in _WHITESPACE or raw[pos] == ord("#")):
            if raw[pos] == ord("#"):
                while pos < n and raw[pos] not in b"\r\n":
                    pos += 1
            else:
                pos += 1
        start = pos
        while pos < n and raw[pos] not in _WHITESPACE and raw[pos] != ord("#"):
            pos += 1
        if start == pos:
            raise MalformedHeader("header ended early")
        found += 1
        yield raw[start:pos], pos


def parse_netpbm(raw: bytes) -> ImageBuffer:
    tokens = []
    end = 0
    for tok, end in _header_tokens(raw):
        tokens.append(tok)
    magic, w_tok, h_tok, max_tok = tokens
    if magic not in (b"P5", b"P6"):
        raise MalformedHeader(f"unsupported magic {magic!r}")
    try:
        width, height, maxval = int(w_tok), int(h_tok), int(max_tok)
    except ValueError as exc:
        raise MalformedHeader(f"non-numeric header field: {exc}") from None
    if width <= 0 or height <= 0:
        raise MalformedHeader(f"invalid dimensions {width}x{height}")
    if maxval != 255:
        raise UnsupportedMaxval(f"maxval {maxval} (only 255 supported)")
    if end >= len(raw) or raw[end] not in _WHITESPACE:
        raise MalformedHeader("missing whitespace after maxval")
    body = raw[end + 1 :]
    channels = 1 if magic == b"P5" else 3
    need = width * height * channels
    if len(body) < need:
        raise TruncatedData(f"expected {need} sample bytes, found {len(body)}")
    data = np.frombuffer(body[:need], dtype=np.uint8).copy()
    shape = (height, width) if channels == 1 else (height, width, 3)
    return ImageBuffer(data.reshape(shape))


def encode_netpbm(img: ImageBuffer) -> bytes:
    magic = b"P5" if img.channels == 1 else b"P6"
    header = magic + b"\n%d %d\n255\n" % (img.width, img.height)
    return header + np.ascontiguousarray(img.data).tobytes()


def load_image(path: str | os.PathLike) -> ImageBuffer:
    with open(path, "rb") as fh:
        return parse_netpbm(fh.read())


def save_image(img: ImageBuffer, path: str | os.PathLike) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_netpbm(img))
