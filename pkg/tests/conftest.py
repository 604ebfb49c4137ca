import http.client
import os
import socket
import sys
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from pfswrap.server import ServerConfig, make_server  # noqa: E402

# A wrapper holding one remote entity, shaped like the classic vendor-notes sample.
SAMPLE_WRAPPER = (
    b"PFS!\n"
    b"version=1.0\n"
    b"date=25-06-97\n"
    b"[ENTITY]\n"
    b"originalname=C:\\Program Files\\WINZIP\\Vendor.txt\n"
    b"longname=Vendor.txt\n"
    b"shortname=Vendor.txt\n"
    b"dirname=                ;PFS directory (root)\n"
    b"created=14-08-95 6:00:00 AM\n"
    b"length=2952 ;physical file length\n"
    b"origin=Windows95 ;created Win-PFSutil ver1.0\n"
    b"description=This is the Vendors message file\n"
    b"remotereadhost=http://astral.ct.monash.edu.au/~files/vendor.txt\n"
    b"mode=RO ;read-only access\n"
    b"storage=remote ;stored on remotehost\n"
)
SAMPLE_URL_PATH = "/~files/vendor.txt"

ACCOUNTS_FILES = {
    "index.html": b'<html><body><a href="Dept1/payroll">Payroll</a>'
                  b'<img src="Images/logo.gif"></body></html>\n',
    "Images/logo.gif": b"GIF89a" + bytes(range(256)),
    "Images/chart.gif": b"GIF89a" + bytes(range(255, -1, -1)) * 2,
    "Dept1/payroll": b"payroll data\n",
    "Dept2/budget": b"budget data\n",
}


def write_tree(root, files):
    for rel, data in files.items():
        path = os.path.join(root, *rel.split("/"))
        os.makedirs(os.path.dirname(path), exist_ok=True)
        with open(path, "wb") as f:
            f.write(data)


@pytest.fixture
def sample_bytes():
    return SAMPLE_WRAPPER


@pytest.fixture
def accounts_tree(tmp_path):
    root = tmp_path / "Accounts"
    write_tree(root, ACCOUNTS_FILES)
    return root


# -- stub origin ------------------------------------------------------------

class StubOrigin:
    """Tiny HTTP origin.  ``routes`` maps a path to (status, content_type, body),
    ("redirect", location), or to the strings "stall" and "flood"."""

    def __init__(self):
        self.routes = {}
        self.hits = []
        self.flood_aborted = threading.Event()
        self.release = threading.Event()
        stub = self

        class Handler(BaseHTTPRequestHandler):
            protocol_version = "HTTP/1.0"

            def do_GET(self):
                stub.hits.append((self.path, dict(self.headers)))
                route = stub.routes.get(self.path, (404, "text/plain", b"no such file"))
                if route == "stall":
                    stub.release.wait(30)
                    return
                if route == "flood":
                    self.send_response(200)
                    self.send_header("Content-Type", "application/octet-stream")
                    self.end_headers()
                    try:
                        for _ in range(4096):
                            self.wfile.write(b"\xAB" * 16384)
                    except (ConnectionError, OSError):
                        stub.flood_aborted.set()
                    return
                if route[0] == "redirect":
                    self.send_response(302)
                    self.send_header("Location", route[1])
                    self.send_header("Content-Length", "0")
                    self.end_headers()
                    return
                status, ctype, body = route
                self.send_response(status)
                if ctype:
                    self.send_header("Content-Type", ctype)
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

            def log_message(self, *args):
                pass

        self.server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.server.daemon_threads = True
        self.server.block_on_close = False
        self.thread = threading.Thread(target=self.server.serve_forever, daemon=True)
        self.thread.start()

    @property
    def base(self):
        return f"http://127.0.0.1:{self.server.server_port}"

    def url(self, path):
        return self.base + path

    def stop(self):
        self.release.set()
        self.server.shutdown()
        self.server.server_close()


@pytest.fixture
def origin():
    stub = StubOrigin()
    yield stub
    stub.stop()


@pytest.fixture
def dead_url():
    """URL of a port nobody listens on."""
    s = socket.socket()
    s.bind(("127.0.0.1", 0))
    port = s.getsockname()[1]
    s.close()
    return f"http://127.0.0.1:{port}/x"


# -- running PFS server -----------------------------------------------------

class RunningServer:
    def __init__(self, config, **app_kw):
        self.httpd = make_server(config, **app_kw)
        self.app = self.httpd.app
        self.port = self.httpd.server_address[1]
        self.thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)
        self.thread.start()

    def request(self, path, method="GET"):
        conn = http.client.HTTPConnection("127.0.0.1", self.port, timeout=30)
        try:
            conn.request(method, path)
            resp = conn.getresponse()
            return resp.status, {k.lower(): v for k, v in resp.getheaders()}, resp.read()
        finally:
            conn.close()

    def timed(self, path):
        start = time.perf_counter()
        status, _, body = self.request(path)
        return time.perf_counter() - start, status, body

    def stop(self):
        self.httpd.shutdown()
        self.httpd.server_close()


@pytest.fixture
def serve():
    servers = []

    def start(docroot, **kw):
        app_kw = {k: kw.pop(k) for k in ("fetcher", "cache") if k in kw}
        srv = RunningServer(ServerConfig(docroot=str(docroot), port=0, **kw), **app_kw)
        servers.append(srv)
        return srv

    yield start
    for srv in servers:
        srv.stop()
