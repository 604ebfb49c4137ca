"""Reader, writer, validator and lookup for PFS wrapper files.

A wrapper is a text header followed by ``[ENTITY]`` tag blocks.  Embedded
entities end their tag block with ``[DATA]`` and are followed by exactly
``storedlength`` payload bytes and one LF::

    PFS!
    version=1.0
    date=25-06-97
    [ENTITY]
    longname=index.html
    dirname=
    length=5
    storedlength=5
    mode=RO
    storage=embedded
    encoding=raw
    [DATA]
    hello

Tag values may carry a trailing comment introduced by ``;`` after a space
or tab.  Keys that this module does not know are kept, in order, in
``extra_tags`` and written back unchanged.
"""
from __future__ import annotations

import datetime as dt
import enum
import io
import os
import re
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field, replace
from typing import BinaryIO, Iterator, Union
from urllib.parse import urlsplit

from . import uu
from .errors import (
    AbsoluteRemainder,
    BadEnumValue,
    BadFraming,
    BadValue,
    DuplicatePath,
    IllegalByte,
    InvalidName,
    LengthMismatch,
    MalformedTagLine,
    MissingMagic,
    MissingRequiredKey,
    PathError,
    PayloadLengthMismatch,
    PayloadOverrun,
    RemoteEntity,
    TraversalRejected,
    UnrepresentableValue,
)

MAGIC = "PFS!"
ENTITY_SECTION = "[ENTITY]"
DATA_SECTION = "[DATA]"

HEADER_KEYS = ("version", "date")
ENTITY_KEYS = (
    "originalname", "longname", "shortname", "dirname", "created", "length",
    "storedlength", "origin", "description", "remotereadhost", "mode",
    "storage", "encoding",
)

_COMMENT = re.compile(r"[ \t];")
_VERSION = re.compile(r"\d+(\.\d+)*\Z")
_UINT = re.compile(r"\d+\Z")
_SHORT_DATE = re.compile(r"(\d{2})-(\d{2})-(\d{2})\Z")
_SHORT_STAMP = re.compile(r"(\d{2})-(\d{2})-(\d{2}) (\d{1,2}):(\d{2}):(\d{2}) ([AP]M)\Z")
_DRIVE = re.compile(r"[A-Za-z]:")


class Storage(str, enum.Enum):
    EMBEDDED = "embedded"
    REMOTE = "remote"


class Encoding(str, enum.Enum):
    RAW = "raw"
    UUENCODE = "uuencode"


class Mode(str, enum.Enum):
    RO = "RO"


Tags = tuple[tuple[str, str], ...]


@dataclass(frozen=True)
class WrapperHeader:
    version: str = "1.0"
    date: dt.date = field(default_factory=dt.date.today)
    extra_tags: Tags = ()


@dataclass(frozen=True)
class EntityRecord:
    longname: str
    dirname: str = ""
    length: int = 0
    storage: Storage = Storage.EMBEDDED
    mode: Mode = Mode.RO
    encoding: Encoding | None = Encoding.RAW
    storedlength: int | None = 0
    remotereadhost: str | None = None
    originalname: str | None = None
    shortname: str | None = None
    created: dt.datetime | None = None
    origin: str | None = None
    description: str | None = None
    extra_tags: Tags = ()
    # Only meaningful for a parsed archive; ignored by equality.
    payload_offset: int | None = field(default=None, compare=False)

    @classmethod
    def embedded(cls, longname: str, dirname: str = "", length: int = 0,
                 encoding: Encoding = Encoding.RAW, **kw) -> EntityRecord:
        encoding = Encoding(encoding)
        return cls(longname=longname, dirname=dirname, length=length,
                   storage=Storage.EMBEDDED, encoding=encoding,
                   storedlength=stored_length(length, encoding), **kw)

    @classmethod
    def remote(cls, longname: str, url: str, dirname: str = "", length: int = 0,
               **kw) -> EntityRecord:
        return cls(longname=longname, dirname=dirname, length=length,
                   storage=Storage.REMOTE, encoding=None, storedlength=None,
                   remotereadhost=url, **kw)

    @property
    def path(self) -> str:
        """Interior path used for lookups: ``dirname/longname``."""
        return f"{self.dirname}/{self.longname}" if self.dirname else self.longname

    @property
    def is_remote(self) -> bool:
        return self.storage is Storage.REMOTE


@dataclass(frozen=True)
class Archive:
    header: WrapperHeader
    entities: tuple[EntityRecord, ...] = ()
    source_size: int = field(default=0, compare=False)

    def __len__(self):
        return len(self.entities)

    def __iter__(self) -> Iterator[EntityRecord]:
        return iter(self.entities)


class PathIndex(Mapping):
    """Interior path -> entity ordinal."""

    def __init__(self, table: dict[str, int]):
        self._table = table

    def __getitem__(self, path):
        return self._table[path]

    def __iter__(self):
        return iter(self._table)

    def __len__(self):
        return len(self._table)


@dataclass(frozen=True)
class ValidationIssue:
    severity: str  # "error" or "warning"
    locator: int | str  # entity ordinal or "header"
    message: str

    def __str__(self):
        where = self.locator if self.locator == "header" else f"entity {self.locator}"
        return f"{self.severity}: {where}: {self.message}"


def stored_length(length: int, encoding: Encoding) -> int:
    """Size of the payload region holding ``length`` content bytes."""
    if Encoding(encoding) is Encoding.UUENCODE:
        return uu.encoded_length(length)
    return length


# -- content encoding -------------------------------------------------------

def encode_content(data: bytes, encoding: Encoding) -> bytes:
    if Encoding(encoding) is Encoding.UUENCODE:
        return uu.encode(data)
    return bytes(data)


def decode_content(data: bytes, encoding: Encoding, expected_length: int) -> bytes:
    if Encoding(encoding) is Encoding.UUENCODE:
        out = uu.decode(data)
    else:
        out = bytes(data)
    if len(out) != expected_length:
        raise LengthMismatch(f"decoded {len(out)} bytes, expected {expected_length}")
    return out


# -- paths ------------------------------------------------------------------

def normalize_interior_path(raw: str) -> str:
    """Normalize the part of a request path that follows the wrapper segment.

    >>> normalize_interior_path("/Dept1//payroll")
    'Dept1/payroll'
    """
    if "\x00" in raw:
        raise IllegalByte("NUL byte in path")
    if raw.startswith("/"):
        raw = raw[1:]
    segments = [s for s in raw.split("/") if s]
    for s in segments:
        if s in (".", ".."):
            raise TraversalRejected(f"path segment {s!r} is not allowed")
    if segments and _DRIVE.match(segments[0]):
        raise AbsoluteRemainder(f"path starts with a drive designator {segments[0]!r}")
    return "/".join(segments)


def split_interior(path: str) -> tuple[str, str]:
    """Split a normalized interior path into (dirname, longname)."""
    dirname, _, longname = path.rpartition("/")
    return dirname, longname


def _check_names(dirname: str, longname: str, ordinal=None):
    if "\x00" in dirname or "\x00" in longname:
        raise IllegalByte(f"entity {ordinal}: NUL byte in name")
    if not longname or "/" in longname:
        raise InvalidName(f"bad longname {longname!r}", ordinal)
    if longname in (".", ".."):
        raise TraversalRejected(f"entity {ordinal}: longname {longname!r} is not allowed")
    if dirname:
        segments = dirname.split("/")
        if any(s in (".", "..") for s in segments):
            raise TraversalRejected(f"entity {ordinal}: dirname {dirname!r} escapes the wrapper")
        if "" in segments:
            raise InvalidName(f"dirname {dirname!r} has empty, leading or trailing segments", ordinal)


# -- dates ------------------------------------------------------------------

def _pivot(yy: int) -> int:
    return 1900 + yy if yy >= 70 else 2000 + yy


def _short_form_ok(year: int) -> bool:
    return 1970 <= year <= 2069


def format_date(d: dt.date) -> str:
    if _short_form_ok(d.year):
        return d.strftime("%d-%m-") + f"{d.year % 100:02d}"
    return d.isoformat()


def parse_date(text: str) -> dt.date:
    m = _SHORT_DATE.match(text)
    try:
        if m:
            return dt.date(_pivot(int(m[3])), int(m[2]), int(m[1]))
        return dt.date.fromisoformat(text)
    except ValueError:
        raise BadValue(f"bad date {text!r}") from None


def format_timestamp(t: dt.datetime) -> str:
    if _short_form_ok(t.year) and t.microsecond == 0 and t.tzinfo is None:
        hour = t.hour % 12 or 12
        ampm = "AM" if t.hour < 12 else "PM"
        return f"{t.day:02d}-{t.month:02d}-{t.year % 100:02d} {hour}:{t.minute:02d}:{t.second:02d} {ampm}"
    return t.isoformat()


def parse_timestamp(text: str) -> dt.datetime:
    m = _SHORT_STAMP.match(text)
    try:
        if m:
            hour = int(m[4])
            if not 1 <= hour <= 12:
                raise ValueError
            hour = hour % 12 + (12 if m[7] == "PM" else 0)
            return dt.datetime(_pivot(int(m[3])), int(m[2]), int(m[1]),
                               hour, int(m[5]), int(m[6]))
        return dt.datetime.fromisoformat(text)
    except ValueError:
        raise BadValue(f"bad timestamp {text!r}") from None


# -- parsing ----------------------------------------------------------------

class _Lines:
    """Line cursor over a bytes-like buffer (bytes, memoryview of bytes, mmap)."""

    def __init__(self, data):
        self.data = data
        self.size = len(data)
        self.pos = 0

    def at_end(self):
        return self.pos >= self.size

    def next(self) -> str:
        nl = self.data.find(b"\n", self.pos)
        end = self.size if nl < 0 else nl
        raw = bytes(self.data[self.pos:end])
        self.pos = end + 1 if nl >= 0 else self.size
        if raw.endswith(b"\r"):
            raw = raw[:-1]
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError:
            raise MalformedTagLine("tag line is not valid UTF-8") from None

    def peek(self) -> str | None:
        if self.at_end():
            return None
        pos = self.pos
        try:
            return self.next()
        finally:
            self.pos = pos


def _split_tag(line: str, ordinal) -> tuple[str, str]:
    key, eq, value = line.partition("=")
    if not eq:
        raise MalformedTagLine(f"expected key=value, got {line[:60]!r}", ordinal)
    key = key.strip()
    if not key:
        raise MalformedTagLine(f"empty key in {line[:60]!r}", ordinal)
    m = _COMMENT.search(value)
    if m:
        value = value[:m.start()]
    return key, value.strip()


def _read_tags(lines: _Lines, known, ordinal):
    """Read tag lines until a section line or EOF.

    Returns (known tag dict, extra tag tuple, section line or None).
    """
    found: dict[str, str] = {}
    extra = []
    while not lines.at_end():
        line = lines.next()
        if line in (ENTITY_SECTION, DATA_SECTION):
            return found, tuple(extra), line
        if not line.strip():
            continue
        key, value = _split_tag(line, ordinal)
        if key in known:
            if key in found:
                raise MalformedTagLine(f"duplicate key {key!r}", ordinal)
            found[key] = value
        else:
            extra.append((key, value))
    return found, tuple(extra), None


def _require(tags, key, ordinal, what="entity"):
    if key not in tags:
        raise MissingRequiredKey(f"{what} lacks required key {key!r}", ordinal)
    return tags[key]


def _uint(tags, key, ordinal) -> int:
    value = tags[key]
    if not _UINT.match(value):
        raise BadValue(f"{key}={value!r} is not a non-negative integer", ordinal)
    return int(value)


def _enum(cls, value, key, ordinal):
    try:
        return cls(value)
    except ValueError:
        raise BadEnumValue(f"unknown {key} value {value!r}", ordinal) from None


def _parse_header(lines: _Lines):
    try:
        magic = None if lines.at_end() else lines.next()
    except MalformedTagLine:
        magic = None
    if magic != MAGIC:
        raise MissingMagic("wrapper does not start with the PFS! magic line")
    tags, extra, section = _read_tags(lines, HEADER_KEYS, None)
    if section == DATA_SECTION:
        raise BadFraming("[DATA] section outside an entity")
    version = _require(tags, "version", None, "header")
    if not _VERSION.match(version):
        raise BadValue(f"version {version!r} is not dotted decimal")
    date = parse_date(_require(tags, "date", None, "header"))
    return WrapperHeader(version=version, date=date, extra_tags=extra), section


def _parse_entity(lines: _Lines, ordinal):
    tags, extra, section = _read_tags(lines, ENTITY_KEYS, ordinal)
    longname = _require(tags, "longname", ordinal)
    dirname = _require(tags, "dirname", ordinal)
    _check_names(dirname, longname, ordinal)
    _require(tags, "length", ordinal)
    length = _uint(tags, "length", ordinal)
    storage = _enum(Storage, _require(tags, "storage", ordinal), "storage", ordinal)
    mode = _enum(Mode, _require(tags, "mode", ordinal), "mode", ordinal)
    created = parse_timestamp(tags["created"]) if "created" in tags else None
    common = dict(
        longname=longname, dirname=dirname, length=length, storage=storage,
        mode=mode, originalname=tags.get("originalname"),
        shortname=tags.get("shortname"), created=created,
        origin=tags.get("origin"), description=tags.get("description"),
        extra_tags=extra,
    )
    if storage is Storage.REMOTE:
        url = _require(tags, "remotereadhost", ordinal)
        for key in ("encoding", "storedlength"):
            if key in tags:
                raise BadValue(f"{key} is not allowed on a remote entity", ordinal)
        if section == DATA_SECTION:
            raise BadFraming("remote entity carries a [DATA] block", ordinal)
        return EntityRecord(encoding=None, storedlength=None, remotereadhost=url,
                            **common), section

    if "remotereadhost" in tags:
        raise BadValue("remotereadhost is not allowed on an embedded entity", ordinal)
    encoding = _enum(Encoding, tags.get("encoding", "raw"), "encoding", ordinal)
    _require(tags, "storedlength", ordinal)
    stored = _uint(tags, "storedlength", ordinal)
    if section != DATA_SECTION:
        raise MissingRequiredKey("embedded entity has no [DATA] block", ordinal)
    offset = lines.pos
    end = offset + stored
    if end > lines.size:
        raise PayloadOverrun(
            f"storedlength {stored} exceeds the {lines.size - offset} bytes remaining", ordinal)
    tail = bytes(lines.data[end:end + 2])
    if tail.startswith(b"\n"):
        lines.pos = end + 1
    elif tail == b"\r\n":
        lines.pos = end + 2
    elif not tail:
        raise PayloadOverrun("payload is not followed by a line feed", ordinal)
    else:
        raise BadFraming("payload is not followed by a line feed", ordinal)
    section = None
    if not lines.at_end():
        section = lines.next()
        if section != ENTITY_SECTION:
            raise BadFraming(f"expected [ENTITY] after payload, got {section[:60]!r}", ordinal)
    return EntityRecord(encoding=encoding, storedlength=stored,
                        payload_offset=offset, **common), section


def parse_wrapper(data) -> Archive:
    """Parse a complete wrapper held in a bytes-like object.

    Payloads are located, not decoded; use :func:`read_content` for that.
    """
    lines = _Lines(data)
    header, section = _parse_header(lines)
    entities = []
    seen: dict[str, int] = {}
    while section == ENTITY_SECTION:
        ordinal = len(entities)
        entity, section = _parse_entity(lines, ordinal)
        if entity.path in seen:
            raise DuplicatePath(
                f"{entity.path!r} already defined by entity {seen[entity.path]}", ordinal)
        seen[entity.path] = ordinal
        entities.append(entity)
    return Archive(header=header, entities=tuple(entities), source_size=lines.size)


def parse_file(path) -> Archive:
    with open(path, "rb") as f:
        return parse_wrapper(f.read())


# -- serialization ----------------------------------------------------------

PayloadSource = Union[Callable[[EntityRecord], bytes], Mapping[str, bytes]]


def _check_value(key: str, value: str):
    if "\n" in value or "\r" in value:
        raise UnrepresentableValue(f"{key}: value contains a line break")
    if value != value.strip():
        raise UnrepresentableValue(f"{key}: value has surrounding whitespace: {value!r}")
    if _COMMENT.search(value):
        raise UnrepresentableValue(f"{key}: value would be read as a comment: {value!r}")


def _check_key(key: str, known):
    if not key or key != key.strip() or "=" in key or "\n" in key or "\r" in key:
        raise UnrepresentableValue(f"bad tag key {key!r}")
    if key in known:
        raise UnrepresentableValue(f"extra tag {key!r} shadows a standard key")


def _tag(key, value) -> bytes:
    _check_value(key, value)
    try:
        return f"{key}={value}\n".encode("utf-8")
    except UnicodeEncodeError:
        raise UnrepresentableValue(f"{key}: value is not valid UTF-8: {value!r}") from None


def _extra(tags: Tags, known) -> bytes:
    out = []
    for key, value in tags:
        _check_key(key, known)
        out.append(_tag(key, value))
    return b"".join(out)


def _entity_tags(e: EntityRecord, storedlength) -> bytes:
    fields = [
        ("originalname", e.originalname),
        ("longname", e.longname),
        ("shortname", e.shortname),
        ("dirname", e.dirname),
        ("created", format_timestamp(e.created) if e.created else None),
        ("length", str(e.length)),
        ("storedlength", None if storedlength is None else str(storedlength)),
        ("origin", e.origin),
        ("description", e.description),
        ("remotereadhost", e.remotereadhost if e.is_remote else None),
        ("mode", Mode(e.mode).value),
        ("storage", Storage(e.storage).value),
        ("encoding", None if e.is_remote else Encoding(e.encoding or "raw").value),
    ]
    out = [ENTITY_SECTION.encode() + b"\n"]
    out += [_tag(k, v) for k, v in fields if v is not None]
    out.append(_extra(e.extra_tags, ENTITY_KEYS))
    return b"".join(out)


def _payload_getter(source: PayloadSource) -> Callable[[EntityRecord], bytes]:
    if isinstance(source, Mapping):
        return lambda e: source[e.path]
    return source


def write_wrapper(archive: Archive, payload_source: PayloadSource, out: BinaryIO) -> int:
    """Write ``archive`` in canonical form to ``out``; return bytes written."""
    get = _payload_getter(payload_source)
    header = archive.header
    if not _VERSION.match(header.version):
        raise UnrepresentableValue(f"version {header.version!r} is not dotted decimal")
    written = out.write(
        f"{MAGIC}\n".encode()
        + _tag("version", header.version)
        + _tag("date", format_date(header.date))
        + _extra(header.extra_tags, HEADER_KEYS)
    )
    seen = set()
    for ordinal, e in enumerate(archive.entities):
        _check_names(e.dirname, e.longname, ordinal)
        if e.path in seen:
            raise DuplicatePath(f"duplicate path {e.path!r}", ordinal)
        seen.add(e.path)
        if e.is_remote:
            if not e.remotereadhost:
                raise MissingRequiredKey("remote entity lacks remotereadhost", ordinal)
            written += out.write(_entity_tags(e, None))
            continue
        data = get(e)
        if len(data) != e.length:
            raise PayloadLengthMismatch(
                f"{e.path}: payload has {len(data)} bytes, entity length is {e.length}")
        payload = encode_content(data, e.encoding or Encoding.RAW)
        written += out.write(_entity_tags(e, len(payload)))
        written += out.write(DATA_SECTION.encode() + b"\n")
        written += out.write(payload)
        written += out.write(b"\n")
    return written


def serialize_wrapper(archive: Archive, payload_source: PayloadSource = ()) -> bytes:
    buf = io.BytesIO()
    write_wrapper(archive, payload_source or {}, buf)
    return buf.getvalue()


def copy_payloads(archive: Archive, source) -> Callable[[EntityRecord], bytes]:
    """Payload provider that reads each entity's content from an existing wrapper."""
    return lambda e: read_content(archive, source, e)


# -- lookup -----------------------------------------------------------------

def lookup_linear(archive: Archive, interior: str) -> EntityRecord | None:
    for e in archive.entities:
        if e.path == interior:
            return e
    return None


def build_index(archive: Archive) -> PathIndex:
    table: dict[str, int] = {}
    for ordinal, e in enumerate(archive.entities):
        if e.path in table:
            raise DuplicatePath(f"duplicate path {e.path!r}", ordinal)
        table[e.path] = ordinal
    return PathIndex(table)


def lookup_indexed(index: PathIndex, archive: Archive, interior: str) -> EntityRecord | None:
    ordinal = index.get(interior)
    return None if ordinal is None else archive.entities[ordinal]


# -- content ----------------------------------------------------------------

def _read_at(source, offset: int, size: int) -> bytes:
    if hasattr(source, "fileno"):
        chunks = []
        while size > 0:
            chunk = os.pread(source.fileno(), size, offset)
            if not chunk:
                break
            chunks.append(chunk)
            offset += len(chunk)
            size -= len(chunk)
        return b"".join(chunks)
    return bytes(source[offset:offset + size])


def read_content(archive: Archive, wrapper_bytes, entity: EntityRecord) -> bytes:
    """Return the decoded content of an embedded entity.

    ``wrapper_bytes`` may be any sliceable buffer or an open binary file;
    files are read with positional reads so one handle can serve many
    threads.
    """
    if entity.is_remote:
        raise RemoteEntity(f"{entity.path} is stored at {entity.remotereadhost}")
    if entity.payload_offset is None or entity.storedlength is None:
        raise ValueError(f"{entity.path} was not read from a wrapper")
    region = _read_at(wrapper_bytes, entity.payload_offset, entity.storedlength)
    if len(region) != entity.storedlength:
        raise LengthMismatch(f"{entity.path}: payload region is truncated")
    return decode_content(region, entity.encoding or Encoding.RAW, entity.length)


# -- validation -------------------------------------------------------------

def _valid_url(url) -> bool:
    try:
        parts = urlsplit(url)
    except ValueError:
        return False
    return parts.scheme in ("http", "https") and bool(parts.hostname)


def validate(archive: Archive, source=None) -> list[ValidationIssue]:
    """Check every invariant of ``archive``.

    With ``source`` (the wrapper bytes or an open file) embedded payloads are
    also decoded and checked against their declared length.
    """
    issues = []

    def error(where, msg):
        issues.append(ValidationIssue("error", where, msg))

    def warn(where, msg):
        issues.append(ValidationIssue("warning", where, msg))

    header = archive.header
    if not header.version or not _VERSION.match(header.version):
        error("header", f"version {header.version!r} is not dotted decimal")
    for key, _ in header.extra_tags:
        warn("header", f"unrecognized header key {key!r}")

    seen: dict[str, int] = {}
    regions = []
    for i, e in enumerate(archive.entities):
        try:
            _check_names(e.dirname, e.longname, i)
        except (InvalidName, PathError) as exc:
            error(i, str(exc))
        if e.path in seen:
            error(i, f"path {e.path!r} duplicates entity {seen[e.path]}")
        else:
            seen[e.path] = i
        if e.mode != Mode.RO:
            error(i, f"unknown mode {e.mode!r}")
        if e.length < 0:
            error(i, "negative length")
        for key, _ in e.extra_tags:
            warn(i, f"unrecognized key {key!r}")

        if e.storage == Storage.REMOTE:
            if not e.remotereadhost:
                error(i, "remote entity has no remotereadhost")
            elif not _valid_url(e.remotereadhost):
                error(i, f"remotereadhost {e.remotereadhost!r} is not an absolute http(s) URL")
            if e.payload_offset is not None or e.encoding is not None or e.storedlength is not None:
                error(i, "remote entity carries payload fields")
            continue
        if e.storage != Storage.EMBEDDED:
            error(i, f"unknown storage {e.storage!r}")
            continue
        if e.remotereadhost:
            error(i, "embedded entity has a remotereadhost")
        if e.encoding not in (Encoding.RAW, Encoding.UUENCODE):
            error(i, f"unknown encoding {e.encoding!r}")
            continue
        if e.storedlength is None or e.storedlength < 0:
            error(i, "embedded entity has no storedlength")
            continue
        if e.storedlength != stored_length(e.length, e.encoding):
            error(i, f"storedlength {e.storedlength} does not match length {e.length} "
                     f"for {e.encoding.value} encoding")
        if e.payload_offset is None:
            error(i, "embedded entity has no payload offset")
            continue
        end = e.payload_offset + e.storedlength
        if e.payload_offset < 0 or end > archive.source_size:
            error(i, "payload region lies outside the wrapper")
        regions.append((e.payload_offset, end, i))
        if source is not None and not issues_for(issues, i):
            try:
                read_content(archive, source, e)
            except (ValueError, LengthMismatch) as exc:
                error(i, f"{type(exc).__name__}: {exc}")

    regions.sort()
    for (a_start, a_end, a), (b_start, b_end, b) in zip(regions, regions[1:]):
        if b_start < a_end:
            error(b, f"payload region overlaps entity {a}")
    return issues


def issues_for(issues, locator) -> list[ValidationIssue]:
    return [i for i in issues if i.locator == locator and i.severity == "error"]


def has_errors(issues) -> bool:
    return any(i.severity == "error" for i in issues)


def with_entities(archive: Archive, entities) -> Archive:
    return replace(archive, entities=tuple(entities))
