"""Small HTTP GET client for remote-tagged entries."""
from __future__ import annotations

import http.client
import socket
import ssl
import time
from dataclasses import dataclass
from urllib.parse import urljoin, urlsplit

from .errors import BadScheme, ConnectFailure, RedirectLoop, Timeout, TooLarge

USER_AGENT = "pfswrap/1.0"
MAX_REDIRECTS = 3
REDIRECT_CODES = {301, 302, 303, 307, 308}
CHUNK = 64 * 1024


@dataclass
class FetchResult:
    status: int
    content_type: str | None
    body: bytes


def _target(url: str):
    parts = urlsplit(url)
    if parts.scheme not in ("http", "https"):
        raise BadScheme(f"unsupported URL scheme {parts.scheme!r} in {url!r}")
    if not parts.hostname:
        raise BadScheme(f"URL has no host: {url!r}")
    path = parts.path or "/"
    if parts.query:
        path += "?" + parts.query
    return parts, path


class _Deadline:
    def __init__(self, timeout: float):
        self.end = time.monotonic() + timeout

    def left(self) -> float:
        left = self.end - time.monotonic()
        if left <= 0:
            raise Timeout("remote fetch timed out")
        return left


def _get_once(url: str, deadline: _Deadline, max_bytes: int):
    parts, path = _target(url)
    if parts.scheme == "https":
        conn = http.client.HTTPSConnection(parts.hostname, parts.port, timeout=deadline.left(),
                                           context=ssl.create_default_context())
    else:
        conn = http.client.HTTPConnection(parts.hostname, parts.port, timeout=deadline.left())
    sock = resp = None
    try:
        try:
            conn.connect()
        except socket.timeout:
            raise Timeout(f"timed out connecting to {parts.netloc}") from None
        except OSError as e:
            raise ConnectFailure(f"cannot connect to {parts.netloc}: {e}") from None
        # http.client drops conn.sock once the response owns the connection.
        sock = conn.sock
        try:
            sock.settimeout(deadline.left())
            conn.request("GET", path, headers={
                "User-Agent": USER_AGENT,
                "Accept": "*/*",
                "Connection": "close",
            })
            resp = conn.getresponse()
            if resp.status in REDIRECT_CODES and resp.getheader("Location"):
                return resp.status, urljoin(url, resp.getheader("Location")), None, b""
            declared = resp.getheader("Content-Length")
            if declared and declared.isdigit() and int(declared) > max_bytes:
                raise TooLarge(f"{url}: declared body of {declared} bytes exceeds {max_bytes}")
            chunks = []
            total = 0
            while True:
                sock.settimeout(deadline.left())
                chunk = resp.read1(CHUNK) if hasattr(resp, "read1") else resp.read(CHUNK)
                if not chunk:
                    break
                total += len(chunk)
                if total > max_bytes:
                    raise TooLarge(f"{url}: body exceeds {max_bytes} bytes")
                chunks.append(chunk)
            return resp.status, None, resp.getheader("Content-Type"), b"".join(chunks)
        except socket.timeout:
            raise Timeout(f"timed out reading from {parts.netloc}") from None
        except (http.client.HTTPException, ConnectionError) as e:
            raise ConnectFailure(f"{parts.netloc}: {e}") from None
    finally:
        if resp is not None:
            resp.close()
        conn.close()
        if sock is not None:
            # Shut down explicitly: a lingering makefile() reference would keep the fd open.
            try:
                sock.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
            sock.close()


def fetch(url: str, timeout: float = 10.0, max_bytes: int = 32 * 1024 * 1024) -> FetchResult:
    """GET ``url``, following at most three redirects.

    The whole exchange, redirects included, is bounded by ``timeout`` seconds
    and the body by ``max_bytes``; exceeding either aborts the connection.
    """
    deadline = _Deadline(timeout)
    for _ in range(MAX_REDIRECTS + 1):
        status, location, content_type, body = _get_once(url, deadline, max_bytes)
        if location is None:
            return FetchResult(status, content_type, body)
        url = location
    raise RedirectLoop(f"more than {MAX_REDIRECTS} redirects")
