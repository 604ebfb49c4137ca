import random

import pytest
from hypothesis import given, strategies as st

from pfswrap import uu
from pfswrap.errors import DecodeError, LengthMismatch
from pfswrap.format import Encoding, decode_content, encode_content
from oracles import uu_oracle_decode, uu_oracle_encode

# Frozen from uu_oracle_encode.
CAT = b"#0V%T\n`\n"
FORTY_SIX = (b'M``$"`P0%!@<("0H+#`T.#Q`1$A,4%187&!D:&QP=\'A\\@(2(C)"4F)R@I*BLL\n'
             b"!+0``\n`\n")


def test_cat():
    assert encode_content(b"Cat", Encoding.UUENCODE) == CAT
    assert decode_content(CAT, Encoding.UUENCODE, 3) == b"Cat"


def test_empty():
    assert encode_content(b"", Encoding.RAW) == b""
    assert decode_content(b"", Encoding.RAW, 0) == b""
    assert uu.encode(b"") == b"`\n"
    assert uu.decode(b"`\n") == b""


def test_line_split_at_45():
    assert uu.encode(bytes(range(46))) == FORTY_SIX
    assert uu.decode(FORTY_SIX) == bytes(range(46))


def test_zero_sextets_are_backticks():
    assert uu.encode(b"\x00\x00\x00") == b"#````\n`\n"


@pytest.mark.parametrize("n", [0, 1, 2, 3, 44, 45, 46, 89, 90, 91, 1000])
def test_encoded_length(n):
    assert uu.encoded_length(n) == len(uu.encode(bytes(n)))


@pytest.mark.parametrize("bad", [
    b"#0V%T\n",            # terminator missing
    b"#0V%T",              # truncated mid-line
    b"#0V%\n`\n",          # short line
    b"#0V%T\n\n`\n",       # blank line
    b"#0V%~\n`\n",         # character out of range
    b"!0V%T\n#0V%T\n`\n",  # length char disagrees with line size
    b"#0V%T\n#0V%T\n`\n",  # short line before the last one
])
def test_decode_rejects(bad):
    with pytest.raises(DecodeError):
        uu.decode(bad)


def test_truncated_region_is_decode_error():
    region = uu.encode(bytes(range(200)))
    with pytest.raises(DecodeError):
        decode_content(region[:-5], Encoding.UUENCODE, 200)


def test_length_mismatch():
    with pytest.raises(LengthMismatch):
        decode_content(CAT, Encoding.UUENCODE, 4)
    with pytest.raises(LengthMismatch):
        decode_content(b"abc", Encoding.RAW, 2)


def test_all_byte_values():
    data = bytes(range(256)) * 3
    for enc in Encoding:
        assert decode_content(encode_content(data, enc), enc, len(data)) == data


def test_matches_oracle_seeded():
    rng = random.Random(9)
    for _ in range(200):
        data = rng.randbytes(rng.randint(0, 300))
        assert uu.encode(data) == uu_oracle_encode(data)
        assert uu.decode(uu_oracle_encode(data)) == data


@given(st.binary(max_size=2000), st.sampled_from(list(Encoding)))
def test_inverse(data, enc):
    assert decode_content(encode_content(data, enc), enc, len(data)) == data


@given(st.binary(max_size=500))
def test_oracle_roundtrip(data):
    assert uu_oracle_decode(uu.encode(data)) == data
