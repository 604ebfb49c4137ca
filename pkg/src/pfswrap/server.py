"""HTTP server that serves a document root and looks inside ``.pfs`` wrappers.

A request such as ``/~user/site.pfs/index.html`` is answered with the
``index.html`` entity of the wrapper file ``~user/site.pfs``; the bare
``/~user/site.pfs`` downloads the wrapper itself.  Real files always win
over a wrapper interpretation of the same path.
"""
from __future__ import annotations

import argparse
import logging
import mmap
import os
import stat
import sys
import threading
import time
from collections import OrderedDict
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import BinaryIO, Callable, Union
from urllib.parse import unquote, urlsplit

from .errors import ContentError, FetchError, FormatError, IllegalByte, PathError
from .format import (
    Archive,
    EntityRecord,
    PathIndex,
    build_index,
    lookup_indexed,
    normalize_interior_path,
    parse_wrapper,
    read_content,
)
from .remote import FetchResult, fetch

log = logging.getLogger(__name__)
access_log = logging.getLogger("pfswrap.access")

WRAPPER_SUFFIX = ".pfs"
NOT_FOUND_BODY = b"404 Error: not found"
RELAY_SLOTS = 8

MIME_TYPES = {
    "html": "text/html",
    "htm": "text/html",
    "txt": "text/plain",
    "gif": "image/gif",
    "jpg": "image/jpeg",
    "jpeg": "image/jpeg",
    "png": "image/png",
    "css": "text/css",
    "js": "text/javascript",
    "pfs": "application/octet-stream",
}
DEFAULT_MIME = "application/octet-stream"


@dataclass
class ServerConfig:
    docroot: str
    bind: str = "127.0.0.1"
    port: int = 8080  # 0 picks a free port
    index_name: str = "index.html"
    remote_timeout: float = 10.0
    remote_relay_enabled: bool = True
    max_remote_bytes: int = 32 * 1024 * 1024
    archive_cache_capacity: int = 16

    def __post_init__(self):
        if not os.path.isdir(self.docroot):
            raise ValueError(f"docroot {self.docroot!r} is not a directory")
        if not 0 <= self.port <= 65535:
            raise ValueError(f"port {self.port} out of range")
        if self.remote_timeout <= 0:
            raise ValueError("remote_timeout must be positive")
        if self.archive_cache_capacity < 1:
            raise ValueError("archive_cache_capacity must be at least 1")


# -- routing ----------------------------------------------------------------

@dataclass(frozen=True)
class PlainFile:
    path: str


@dataclass(frozen=True)
class WholeWrapper:
    path: str


@dataclass(frozen=True)
class WrapperEntry:
    path: str
    interior: str


@dataclass(frozen=True)
class NotFound:
    pass


@dataclass(frozen=True)
class BadRequest:
    reason: str


RouteDecision = Union[PlainFile, WholeWrapper, WrapperEntry, NotFound, BadRequest]


def mime_for_path(name: str) -> str:
    _, dot, ext = name.rpartition(".")
    if not dot:
        return DEFAULT_MIME
    return MIME_TYPES.get(ext.lower(), DEFAULT_MIME)


def split_pfs_path(decoded_path: str) -> tuple[str, str | None, str | None]:
    """Split a request path at the first segment ending in ``.pfs``.

    Returns ``(prefix, wrapper_segment, interior)``; the last two are None
    when no segment names a wrapper.

    >>> split_pfs_path("/~jsmith/account-site.pfs/index.html")
    ('~jsmith/account-site.pfs', 'account-site.pfs', '/index.html')
    """
    if "\x00" in decoded_path:
        raise IllegalByte("NUL byte in request path")
    segments = decoded_path.split("/")
    for i, seg in enumerate(segments):
        if seg.endswith(WRAPPER_SUFFIX):
            prefix = "/".join(s for s in segments[:i + 1] if s)
            rest = segments[i + 1:]
            interior = "/" + "/".join(rest) if rest else ""
            return prefix, seg, interior
    return "/".join(s for s in segments if s), None, None


def _contained(root_real: str, path: str) -> bool:
    real = os.path.realpath(path)
    return real == root_real or real.startswith(root_real.rstrip(os.sep) + os.sep)


def _bad_segment(seg: str) -> bool:
    if seg in (".", ".."):
        return True
    return any(sep in seg for sep in (os.sep, os.altsep) if sep and sep != "/")


def resolve_route(config: ServerConfig, decoded_path: str) -> RouteDecision:
    if not decoded_path.startswith("/"):
        return BadRequest("path must start with '/'")
    if "\x00" in decoded_path:
        return BadRequest("NUL byte in path")
    if any(_bad_segment(s) for s in decoded_path.split("/")):
        return BadRequest("path traversal rejected")

    root = config.docroot
    root_real = os.path.realpath(root)
    literal = os.path.join(root, decoded_path.lstrip("/"))
    prefix, wrapper, interior = split_pfs_path(decoded_path)
    if os.path.isfile(literal) and _contained(root_real, literal):
        # A bare wrapper URL names the wrapper itself; same bytes, clearer route.
        return WholeWrapper(literal) if wrapper and not interior else PlainFile(literal)
    if wrapper is None:
        return NotFound()
    fs_path = os.path.join(root, prefix)
    if not (os.path.isfile(fs_path) and _contained(root_real, fs_path)):
        return NotFound()
    if not interior:
        return WholeWrapper(fs_path)
    try:
        name = normalize_interior_path(interior)
    except PathError as e:
        return BadRequest(str(e))
    if interior.endswith("/"):
        name = f"{name}/{config.index_name}" if name else config.index_name
    return WrapperEntry(fs_path, name)


# -- archive cache ----------------------------------------------------------

class ArchiveCache:
    """Parsed wrappers keyed by path, revalidated by size and mtime.

    Two threads missing on the same path may both parse; the later insert
    wins, which is harmless because archives are immutable.
    """

    def __init__(self, capacity: int = 16):
        self.capacity = capacity
        self.parse_count = 0
        self._entries: OrderedDict[str, tuple[tuple, Archive, PathIndex]] = OrderedDict()
        self._lock = threading.Lock()

    def get(self, fs_path: str, f: BinaryIO) -> tuple[Archive, PathIndex]:
        """Return the archive for the open wrapper file ``f`` at ``fs_path``."""
        st = os.fstat(f.fileno())
        key = (st.st_size, st.st_mtime_ns, st.st_ino)
        with self._lock:
            hit = self._entries.get(fs_path)
            if hit is not None and hit[0] == key:
                self._entries.move_to_end(fs_path)
                return hit[1], hit[2]
        archive = self._parse(f, st.st_size)
        index = build_index(archive)
        with self._lock:
            self.parse_count += 1
            self._entries[fs_path] = (key, archive, index)
            self._entries.move_to_end(fs_path)
            while len(self._entries) > self.capacity:
                self._entries.popitem(last=False)
        return archive, index

    def open(self, fs_path: str) -> tuple[Archive, PathIndex]:
        with open(fs_path, "rb") as f:
            return self.get(fs_path, f)

    @staticmethod
    def _parse(f, size) -> Archive:
        if size == 0:
            return parse_wrapper(b"")
        with mmap.mmap(f.fileno(), 0, access=mmap.ACCESS_READ) as m:
            return parse_wrapper(m)

    def __len__(self):
        return len(self._entries)


# -- request handling -------------------------------------------------------

@dataclass
class Request:
    method: str
    target: str
    headers: dict = field(default_factory=dict)


@dataclass
class Response:
    status: int
    headers: list[tuple[str, str]] = field(default_factory=list)
    body: bytes = b""
    body_file: BinaryIO | None = None

    def header(self, name: str) -> str | None:
        for k, v in self.headers:
            if k.lower() == name.lower():
                return v
        return None

    def write_to(self, out) -> int:
        if self.body_file is None:
            out.write(self.body)
            return len(self.body)
        sent = 0
        while chunk := self.body_file.read(64 * 1024):
            out.write(chunk)
            sent += len(chunk)
        return sent

    def read_body(self) -> bytes:
        if self.body_file is None:
            return self.body
        try:
            return self.body_file.read()
        finally:
            self.close()

    def close(self):
        if self.body_file is not None:
            self.body_file.close()
            self.body_file = None


def _reply(status: int, body: bytes, content_type="text/plain", extra=()) -> Response:
    headers = [("Content-Type", content_type), ("Content-Length", str(len(body))),
               ("Connection", "close"), *extra]
    return Response(status, headers, body)


def _error(status: int, text: str, extra=()) -> Response:
    return _reply(status, text.encode("utf-8", "replace"), extra=extra)


def decode_target(target: str) -> str:
    """Request-target to decoded path; percent-escapes are decoded once, ``+`` kept."""
    path = target if target.startswith("/") else urlsplit(target).path
    path = path.split("?", 1)[0].split("#", 1)[0]
    return unquote(path, errors="surrogateescape")


class PFSApp:
    """Request handling independent of the socket layer."""

    def __init__(self, config: ServerConfig,
                 fetcher: Callable[..., FetchResult] = fetch,
                 cache: ArchiveCache | None = None):
        self.config = config
        self.fetcher = fetcher
        self.cache = cache or ArchiveCache(config.archive_cache_capacity)
        self._relay_slots = threading.BoundedSemaphore(RELAY_SLOTS)

    def open_archive_cached(self, fs_path: str) -> tuple[Archive, PathIndex]:
        return self.cache.open(fs_path)

    def handle_request(self, request: Request) -> Response:
        method = request.method.upper()
        if method not in ("GET", "HEAD"):
            return _error(405, "405 Error: method not allowed", extra=[("Allow", "GET, HEAD")])
        resp = self._get(request.target)
        if method == "HEAD":
            resp.close()
            resp.body = b""
        return resp

    def _get(self, target: str) -> Response:
        try:
            path = decode_target(target)
        except ValueError:
            return _error(400, "400 Error: bad request")
        route = resolve_route(self.config, path)
        if isinstance(route, (PlainFile, WholeWrapper)):
            return self._serve_file(route.path)
        if isinstance(route, WrapperEntry):
            return self._serve_entry(route.path, route.interior)
        if isinstance(route, BadRequest):
            return _error(400, "400 Error: bad request")
        return _reply(404, NOT_FOUND_BODY)

    def _serve_file(self, fs_path: str) -> Response:
        try:
            f = open(fs_path, "rb")
        except OSError:
            return _reply(404, NOT_FOUND_BODY)
        st = os.fstat(f.fileno())
        if not stat.S_ISREG(st.st_mode):
            f.close()
            return _reply(404, NOT_FOUND_BODY)
        headers = [("Content-Type", mime_for_path(fs_path)),
                   ("Content-Length", str(st.st_size)), ("Connection", "close")]
        return Response(200, headers, body_file=f)

    def _serve_entry(self, fs_path: str, interior: str) -> Response:
        try:
            with open(fs_path, "rb") as f:
                archive, index = self.cache.get(fs_path, f)
                entity = lookup_indexed(index, archive, interior)
                if entity is None:
                    return _reply(404, NOT_FOUND_BODY)
                if not entity.is_remote:
                    body = read_content(archive, f, entity)
                    return _reply(200, body, mime_for_path(entity.longname))
        except OSError:
            return _reply(404, NOT_FOUND_BODY)
        except (FormatError, ContentError) as e:
            log.error("cannot serve %s from %s: %s: %s", interior, fs_path, type(e).__name__, e)
            return _error(500, "500 Error: internal server error")
        return self.relay_remote(entity)

    def relay_remote(self, entity: EntityRecord) -> Response:
        cfg = self.config
        if not cfg.remote_relay_enabled:
            return _error(502, f"502 Error: {entity.path} is stored remotely and relaying is disabled")
        if not self._relay_slots.acquire(timeout=cfg.remote_timeout):
            return _error(502, "502 Error: too many remote relays in progress")
        try:
            result = self.fetcher(entity.remotereadhost, timeout=cfg.remote_timeout,
                                  max_bytes=cfg.max_remote_bytes)
        except FetchError as e:
            log.warning("relay of %s failed: %s", entity.remotereadhost, e)
            return _error(502, f"502 Error: {type(e).__name__}: {e}")
        finally:
            self._relay_slots.release()
        if result.status != 200:
            return _error(502, f"502 Error: origin answered {result.status}")
        return _reply(200, result.body, result.content_type or mime_for_path(entity.longname))


# -- socket layer -----------------------------------------------------------

class PFSRequestHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.0"
    server_version = "pfswrap/1.0"
    sys_version = ""

    def __getattr__(self, name):
        # Route every method to the app so unsupported ones get a 405, not a 501.
        if name.startswith("do_"):
            return self._dispatch
        raise AttributeError(name)

    def _dispatch(self):
        start = time.perf_counter()
        resp = self.server.app.handle_request(Request(self.command, self.path, dict(self.headers)))
        sent = 0
        try:
            self.send_response(resp.status)
            for k, v in resp.headers:
                self.send_header(k, v)
            self.end_headers()
            sent = resp.write_to(self.wfile)
        except ConnectionError as e:
            log.info("client went away: %s", e)
        finally:
            resp.close()
        access_log.info("%s %s %d %d %d", self.command, self.path, resp.status, sent,
                        round((time.perf_counter() - start) * 1000))

    def log_request(self, code="-", size="-"):
        pass

    def log_message(self, format, *args):
        log.debug("%s " + format, self.address_string(), *args)


class PFSHTTPServer(ThreadingHTTPServer):
    daemon_threads = True
    block_on_close = False

    def __init__(self, app: PFSApp):
        self.app = app
        super().__init__((app.config.bind, app.config.port), PFSRequestHandler)


def make_server(config: ServerConfig, **app_kw) -> PFSHTTPServer:
    return PFSHTTPServer(PFSApp(config, **app_kw))


def main(argv=None):
    p = argparse.ArgumentParser(prog="pfs-serve",
                                description="Serve a document root, looking inside .pfs wrappers.")
    p.add_argument("--root", required=True, help="document root")
    p.add_argument("--bind", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--index", default="index.html", help="entry served for a trailing-slash wrapper URL")
    p.add_argument("--remote-timeout", type=float, default=10.0, metavar="SECONDS")
    p.add_argument("--no-remote-relay", action="store_true")
    p.add_argument("--max-remote-bytes", type=int, default=32 * 1024 * 1024)
    p.add_argument("--log-level", default="INFO")
    args = p.parse_args(argv)

    logging.basicConfig(level=args.log_level.upper(), stream=sys.stderr,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    out = logging.StreamHandler(sys.stdout)
    out.setFormatter(logging.Formatter("%(message)s"))
    access_log.addHandler(out)
    access_log.propagate = False
    access_log.setLevel(logging.INFO)

    try:
        config = ServerConfig(docroot=args.root, bind=args.bind, port=args.port,
                              index_name=args.index, remote_timeout=args.remote_timeout,
                              remote_relay_enabled=not args.no_remote_relay,
                              max_remote_bytes=args.max_remote_bytes)
    except ValueError as e:
        p.error(str(e))
    server = make_server(config)
    host, port = server.server_address[:2]
    log.info("serving %s on http://%s:%d/", config.docroot, host, port)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
