"""uuencode payload profile used for embedded entities.

Each data line holds up to 45 input bytes: one length character followed by
the encoded groups, zero sextets written as a backtick.  The region ends
with a lone backtick line.  There are no ``begin``/``end`` lines.
"""
from __future__ import annotations

import binascii

from .errors import DecodeError

LINE_BYTES = 45
TERMINATOR = b"`\n"
_ALPHABET = bytes(range(0x20, 0x61))


def encoded_length(n: int) -> int:
    """Size of the encoded region for ``n`` input bytes, terminator included."""
    full, rest = divmod(n, LINE_BYTES)
    size = full * (2 + LINE_BYTES // 3 * 4)
    if rest:
        size += 2 + -(-rest // 3) * 4
    return size + len(TERMINATOR)


def encode(data: bytes) -> bytes:
    view = memoryview(data)
    lines = [binascii.b2a_uu(view[i:i + LINE_BYTES], backtick=True)
             for i in range(0, len(view), LINE_BYTES)]
    lines.append(TERMINATOR)
    return b"".join(lines)


def decode(region: bytes) -> bytes:
    region = bytes(region)
    if not region.endswith(TERMINATOR):
        raise DecodeError("uuencoded region is not terminated by a '`' line")
    body = region[:-len(TERMINATOR)]
    if not body:
        return b""
    if not body.endswith(b"\n"):
        raise DecodeError("uuencoded region is truncated")
    lines = body[:-1].split(b"\n")
    out = []
    last = len(lines) - 1
    for i, line in enumerate(lines):
        if not line:
            raise DecodeError(f"empty line {i} inside uuencoded region")
        n = (line[0] - 32) & 0x3F
        if line[0] < 0x20 or line[0] > 0x60 or n == 0 or n > LINE_BYTES:
            raise DecodeError(f"bad length character on line {i}")
        if i != last and n != LINE_BYTES:
            raise DecodeError(f"short line {i} before the end of the region")
        if len(line) != 1 + -(-n // 3) * 4:
            raise DecodeError(f"line {i} has {len(line)} characters, expected {1 + -(-n // 3) * 4}")
        if line.translate(None, _ALPHABET):
            raise DecodeError(f"character out of range on line {i}")
        try:
            out.append(binascii.a2b_uu(line))
        except binascii.Error as e:
            raise DecodeError(f"line {i}: {e}") from None
    return b"".join(out)
