"""pfsutil operations: create, list, extract, edit, verify and link audit.

Each ``cmd_*`` function does the work and returns a summary object; the
argument parsing and printing live in :mod:`pfswrap.cli`.
"""
from __future__ import annotations

import datetime as dt
import fnmatch
import logging
import os
import platform
import re
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Union
from urllib.parse import quote, urlsplit

from .errors import (
    DestinationCollision,
    DuplicatePath,
    FetchError,
    FormatError,
    NotFound,
    OutputExists,
    PathError,
    SymlinkCycle,
    TraversalRejected,
    UnreadableFile,
)
from .format import (
    Archive,
    Encoding,
    EntityRecord,
    ValidationIssue,
    WrapperHeader,
    copy_payloads,
    lookup_linear,
    normalize_interior_path,
    parse_wrapper,
    read_content,
    split_interior,
    validate,
    write_wrapper,
)
from .remote import FetchResult, fetch

log = logging.getLogger(__name__)

REMOTE_MANIFEST = "PFS-REMOTE.txt"
FETCH_WORKERS = 4


def _is_http_url(url: str) -> bool:
    parts = urlsplit(url)
    return parts.scheme in ("http", "https") and bool(parts.netloc)


@dataclass
class BuildOptions:
    root: str
    include_globs: list[str] = field(default_factory=list)
    default_encoding: Encoding = Encoding.RAW
    remote_rules: list[tuple[str, str]] = field(default_factory=list)
    origin_tag: str = field(default_factory=platform.system)

    def __post_init__(self):
        self.default_encoding = Encoding(self.default_encoding)
        for pattern, base in self.remote_rules:
            if not _is_http_url(base):
                raise ValueError(f"remote base URL for {pattern!r} is not an absolute http(s) URL: {base!r}")


@dataclass
class CreateSummary:
    entity_count: int
    embedded_count: int
    remote_count: int
    bytes_written: int


@dataclass
class ListRow:
    path: str
    storage: str
    length: int
    created: dt.datetime | None
    remotereadhost: str | None


@dataclass
class ExtractSummary:
    written: int = 0
    fetched: int = 0
    skipped_remote: int = 0
    failed: int = 0


@dataclass
class EditSummary:
    action: str
    interior: str
    entity_count: int


@dataclass(frozen=True)
class AuditRecord:
    path: str
    line: int
    url: str
    classification: str  # "same-host" or "foreign-host"


AuditReport = list[AuditRecord]


# -- helpers ----------------------------------------------------------------

def _read_wrapper(path) -> tuple[Archive, bytes]:
    with open(path, "rb") as f:
        data = f.read()
    return parse_wrapper(data), data


def _atomic_write(path: str, write: Callable) -> int:
    """Write via ``write(fileobj)`` into a temp file next to ``path``, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".pfs-", suffix=".tmp", dir=directory)
    try:
        try:
            mode = os.stat(path).st_mode & 0o777
        except FileNotFoundError:
            mode = 0o644
        os.chmod(tmp, mode)
        with os.fdopen(fd, "wb") as f:
            n = write(f)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise
    return n


def _file_stamp(st) -> dt.datetime:
    return dt.datetime.fromtimestamp(int(st.st_mtime))


def _walk(root: str, skip: set[str]):
    """Yield (relative posix path, absolute path) for every file under root.

    Symlinks are followed; a directory reached twice through links is a cycle.
    """
    visited = set()

    def visit(directory, rel):
        st = os.stat(directory)
        key = (st.st_dev, st.st_ino)
        if key in visited:
            raise SymlinkCycle(f"directory cycle through {directory}")
        visited.add(key)
        try:
            names = sorted(os.listdir(directory))
        except OSError as e:
            raise UnreadableFile(f"cannot list {directory}: {e}") from None
        files, dirs = [], []
        for name in names:
            full = os.path.join(directory, name)
            if os.path.realpath(full) in skip:
                continue
            if os.path.isdir(full):
                dirs.append(name)
            elif os.path.isfile(full):
                files.append(name)
            elif os.path.islink(full):
                log.warning("skipping dangling link %s", full)
        for name in files:
            yield (f"{rel}/{name}" if rel else name), os.path.join(directory, name)
        for name in dirs:
            yield from visit(os.path.join(directory, name), f"{rel}/{name}" if rel else name)
        visited.discard(key)

    yield from visit(root, "")


def _remote_url(rules, rel: str) -> str | None:
    for pattern, base in rules:
        if fnmatch.fnmatchcase(rel, pattern):
            return base.rstrip("/") + "/" + quote(rel, safe="/~")
    return None


def _included(globs, rel: str) -> bool:
    return not globs or any(fnmatch.fnmatchcase(rel, g) for g in globs)


# -- create -----------------------------------------------------------------

def cmd_create(options: BuildOptions, output: str, overwrite: bool = False) -> CreateSummary:
    root = options.root
    if not os.path.isdir(root):
        raise UnreadableFile(f"{root} is not a readable directory")
    if os.path.exists(output) and not overwrite:
        raise OutputExists(f"{output} already exists")

    entities = []
    sources = {}
    for rel, full in _walk(root, skip={os.path.realpath(output)}):
        if not _included(options.include_globs, rel):
            continue
        try:
            st = os.stat(full)
        except OSError as e:
            raise UnreadableFile(f"cannot stat {full}: {e}") from None
        dirname, longname = split_interior(rel)
        meta = dict(dirname=dirname, length=st.st_size, originalname=os.path.abspath(full),
                    shortname=longname, created=_file_stamp(st), origin=options.origin_tag)
        url = _remote_url(options.remote_rules, rel)
        if url:
            entities.append(EntityRecord.remote(longname, url, **meta))
        else:
            entities.append(EntityRecord.embedded(longname, encoding=options.default_encoding, **meta))
            sources[rel] = full

    if not entities:
        log.warning("%s contains no files; writing a header-only wrapper", root)

    def payload(e: EntityRecord) -> bytes:
        try:
            with open(sources[e.path], "rb") as f:
                return f.read()
        except OSError as exc:
            raise UnreadableFile(f"cannot read {sources[e.path]}: {exc}") from None

    archive = Archive(WrapperHeader(date=dt.date.today()), tuple(entities))
    written = _atomic_write(output, lambda f: write_wrapper(archive, payload, f))
    remote = sum(e.is_remote for e in entities)
    return CreateSummary(len(entities), len(entities) - remote, remote, written)


# -- list -------------------------------------------------------------------

def cmd_list(wrapper: str) -> list[ListRow]:
    archive, _ = _read_wrapper(wrapper)
    return [ListRow(e.path, e.storage.value, e.length, e.created,
                    e.remotereadhost if e.is_remote else None)
            for e in archive.entities]


# -- extract ----------------------------------------------------------------

def _target_path(dest_real: str, dest: str, entity: EntityRecord) -> str:
    interior = normalize_interior_path(entity.path)
    if interior != entity.path:
        raise TraversalRejected(f"entity path {entity.path!r} is not normalized")
    target = os.path.join(dest, *interior.split("/"))
    real = os.path.realpath(target)
    if not real.startswith(dest_real.rstrip(os.sep) + os.sep):
        raise TraversalRejected(f"{entity.path!r} would be written outside {dest}")
    return target


def _write_file(target: str, data: bytes, created: dt.datetime | None):
    os.makedirs(os.path.dirname(target), exist_ok=True)
    with open(target, "wb") as f:
        f.write(data)
    if created is not None:
        try:
            ts = created.timestamp()
            os.utime(target, (ts, ts))
        except (OSError, OverflowError, ValueError):
            pass


def cmd_extract(wrapper: str, dest: str, fetch_remote: bool = False, overwrite: bool = False,
                fetcher: Callable[..., FetchResult] = fetch, timeout: float = 10.0,
                max_remote_bytes: int = 32 * 1024 * 1024) -> ExtractSummary:
    archive, data = _read_wrapper(wrapper)
    os.makedirs(dest, exist_ok=True)
    dest_real = os.path.realpath(dest)

    targets = {}
    for e in archive.entities:
        target = _target_path(dest_real, dest, e)
        if e.is_remote and not fetch_remote:
            continue
        if os.path.lexists(target) and not overwrite:
            raise DestinationCollision(f"{target} already exists")
        targets[e.path] = target

    summary = ExtractSummary()
    manifest = []
    for e in archive.entities:
        if e.is_remote:
            continue
        _write_file(targets[e.path], read_content(archive, data, e), e.created)
        summary.written += 1

    remote = [e for e in archive.entities if e.is_remote]
    if fetch_remote and remote:
        def get(e):
            try:
                return e, fetcher(e.remotereadhost, timeout=timeout,
                                  max_bytes=max(max_remote_bytes, e.length)), None
            except FetchError as exc:
                return e, None, exc

        with ThreadPoolExecutor(max_workers=FETCH_WORKERS) as pool:
            for e, result, exc in pool.map(get, remote):
                if exc is None and result.status == 200:
                    if len(result.body) != e.length:
                        log.warning("%s: fetched %d bytes, entity says %d",
                                    e.path, len(result.body), e.length)
                    _write_file(targets[e.path], result.body, e.created)
                    summary.fetched += 1
                    continue
                reason = exc if exc is not None else f"origin answered {result.status}"
                log.warning("cannot fetch %s from %s: %s", e.path, e.remotereadhost, reason)
                summary.failed += 1
                manifest.append(e)
    else:
        manifest = remote
        summary.skipped_remote = len(remote)

    if manifest:
        path = os.path.join(dest, REMOTE_MANIFEST)
        if os.path.lexists(path) and not overwrite:
            raise DestinationCollision(f"{path} already exists")
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for e in manifest:
                f.write(f"{e.path}\t{e.remotereadhost}\n")
    return summary


def read_manifest(path: str) -> list[tuple[str, str]]:
    with open(path, encoding="utf-8") as f:
        return [tuple(line.rstrip("\n").split("\t", 1)) for line in f if line.strip()]


# -- edit -------------------------------------------------------------------

@dataclass
class AddEmbedded:
    file: str
    interior: str
    encoding: Encoding = Encoding.RAW


@dataclass
class AddRemote:
    url: str
    interior: str
    length: int


@dataclass
class Remove:
    interior: str


EditAction = Union[AddEmbedded, AddRemote, Remove]


def cmd_edit(wrapper: str, action: EditAction) -> EditSummary:
    """Add or remove one entity, rewriting the wrapper atomically.

    Existing entities are never modified; their content is copied through.
    """
    archive, data = _read_wrapper(wrapper)
    interior = normalize_interior_path(action.interior)
    if not interior:
        raise PathError("interior path is empty")
    existing = lookup_linear(archive, interior)
    payloads = copy_payloads(archive, data)
    entities = list(archive.entities)

    if isinstance(action, Remove):
        if existing is None:
            raise NotFound(f"{interior} is not in {wrapper}")
        entities = [e for e in entities if e.path != interior]
        name = "remove"
    else:
        if existing is not None:
            raise DuplicatePath(f"{interior} already exists in {wrapper}")
        dirname, longname = split_interior(interior)
        if isinstance(action, AddEmbedded):
            try:
                with open(action.file, "rb") as f:
                    content = f.read()
                st = os.stat(action.file)
            except OSError as e:
                raise UnreadableFile(f"cannot read {action.file}: {e}") from None
            entity = EntityRecord.embedded(
                longname, dirname, len(content), action.encoding,
                originalname=os.path.abspath(action.file), shortname=longname,
                created=_file_stamp(st), origin=platform.system())
            inner = payloads

            def payloads(e):
                return content if e.path == interior else inner(e)

            name = "add-embedded"
        else:
            if not _is_http_url(action.url):
                raise ValueError(f"not an absolute http(s) URL: {action.url!r}")
            if action.length < 0:
                raise ValueError("length must be non-negative")
            entity = EntityRecord.remote(longname, action.url, dirname, action.length,
                                         shortname=longname, created=dt.datetime.now().replace(microsecond=0),
                                         origin=platform.system())
            name = "add-remote"
        entities.append(entity)

    new = replace(archive, entities=tuple(entities))
    _atomic_write(wrapper, lambda f: write_wrapper(new, payloads, f))
    return EditSummary(name, interior, len(entities))


# -- verify -----------------------------------------------------------------

def verify_bytes(data: bytes) -> list[ValidationIssue]:
    try:
        archive = parse_wrapper(data)
    except (FormatError, PathError) as e:
        where = getattr(e, "entity", None)
        return [ValidationIssue("error", "header" if where is None else where,
                                f"{type(e).__name__}: {e}")]
    return validate(archive, data)


def cmd_verify(wrapper: str) -> tuple[int, list[ValidationIssue]]:
    """Exit status 0 iff the wrapper has no error-severity issues."""
    try:
        with open(wrapper, "rb") as f:
            data = f.read()
    except OSError as e:
        return 1, [ValidationIssue("error", "header", f"cannot read {wrapper}: {e}")]
    issues = verify_bytes(data)
    return (1 if any(i.severity == "error" for i in issues) else 0), issues


# -- audit ------------------------------------------------------------------

_LINK_ATTR = re.compile(
    r"""\b(?:href|src)\s*=\s*(?:"([^"]*)"|'([^']*)'|([^\s"'>]+))""",
    re.IGNORECASE,
)
_ABSOLUTE = re.compile(r"https?://", re.IGNORECASE)
HTML_SUFFIXES = (".html", ".htm")


def scan_links(text: str, path: str, site_host: str) -> list[AuditRecord]:
    records = []
    site = site_host.lower()
    for m in _LINK_ATTR.finditer(text):
        url = next(g for g in m.groups() if g is not None).strip()
        if not _ABSOLUTE.match(url):
            continue
        try:
            host = urlsplit(url).hostname or ""
        except ValueError:
            host = ""
        line = text.count("\n", 0, m.start()) + 1
        kind = "same-host" if host == site else "foreign-host"
        records.append(AuditRecord(path, line, url, kind))
    return records


def cmd_audit_links(wrapper: str, site_host: str) -> AuditReport:
    archive, data = _read_wrapper(wrapper)
    report = []
    for e in archive.entities:
        if e.is_remote or not e.longname.lower().endswith(HTML_SUFFIXES):
            continue
        text = read_content(archive, data, e).decode("latin-1")
        report.extend(scan_links(text, e.path, site_host))
    return report
