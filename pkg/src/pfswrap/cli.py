"""``pfsutil`` command line.

Exit codes: 0 success, 1 validation or operation error, 2 usage error.
"""
from __future__ import annotations

import argparse
import logging
import sys

from . import tool
from .errors import FetchError, PFSError
from .format import Encoding, format_timestamp


def _remote_rule(text: str) -> tuple[str, str]:
    pattern, eq, base = text.partition("=")
    if not eq or not pattern or not base:
        raise argparse.ArgumentTypeError(f"expected GLOB=BASEURL, got {text!r}")
    return pattern, base


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pfsutil", description="Create and inspect PFS web document wrappers.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("create", help="package a directory tree")
    c.add_argument("--root", required=True)
    c.add_argument("--out", required=True)
    c.add_argument("--encoding", choices=[e.value for e in Encoding], default="raw")
    c.add_argument("--remote", type=_remote_rule, action="append", default=[], metavar="GLOB=BASEURL",
                   help="store matching files as remote references under BASEURL")
    c.add_argument("--include", action="append", default=[], metavar="GLOB")
    c.add_argument("--origin", help="origin tag stamped on every entity")
    c.add_argument("--overwrite", action="store_true")

    c = sub.add_parser("list", help="list entities")
    c.add_argument("file")

    c = sub.add_parser("extract", help="unpack a wrapper into a directory")
    c.add_argument("file")
    c.add_argument("--dest", required=True)
    c.add_argument("--fetch-remote", action="store_true")
    c.add_argument("--overwrite", action="store_true")

    c = sub.add_parser("add", help="embed a local file")
    c.add_argument("file")
    c.add_argument("--from", dest="source", required=True, metavar="PATH")
    c.add_argument("--as", dest="interior", required=True, metavar="INTERIOR")
    c.add_argument("--encoding", choices=[e.value for e in Encoding], default="raw")

    c = sub.add_parser("add-remote", help="add a remote reference")
    c.add_argument("file")
    c.add_argument("--url", required=True)
    c.add_argument("--as", dest="interior", required=True, metavar="INTERIOR")
    c.add_argument("--length", type=int, required=True)

    c = sub.add_parser("remove", help="remove an entity")
    c.add_argument("file")
    c.add_argument("interior")

    c = sub.add_parser("verify", help="check a wrapper for errors")
    c.add_argument("file")

    c = sub.add_parser("audit-links", help="report absolute links in embedded HTML")
    c.add_argument("file")
    c.add_argument("--host", required=True)
    return p


def run(args, out=None) -> int:
    out = out or sys.stdout
    cmd = args.command
    if cmd == "create":
        kw = {"origin_tag": args.origin} if args.origin else {}
        try:
            options = tool.BuildOptions(root=args.root, include_globs=args.include,
                                        default_encoding=args.encoding, remote_rules=args.remote, **kw)
        except ValueError as e:
            print(f"pfsutil: {e}", file=sys.stderr)
            return 2
        s = tool.cmd_create(options, args.out, overwrite=args.overwrite)
        print(f"{s.entity_count} entities ({s.embedded_count} embedded, {s.remote_count} remote), "
              f"{s.bytes_written} bytes written to {args.out}", file=out)
    elif cmd == "list":
        for row in tool.cmd_list(args.file):
            created = format_timestamp(row.created) if row.created else "-"
            line = f"{row.path}\t{row.storage}\t{row.length}\t{created}"
            if row.remotereadhost:
                line += f"\t{row.remotereadhost}"
            print(line, file=out)
    elif cmd == "extract":
        s = tool.cmd_extract(args.file, args.dest, fetch_remote=args.fetch_remote,
                             overwrite=args.overwrite)
        print(f"written {s.written}, fetched {s.fetched}, skipped remote {s.skipped_remote}, "
              f"failed {s.failed}", file=out)
    elif cmd in ("add", "add-remote", "remove"):
        if cmd == "add":
            action = tool.AddEmbedded(args.source, args.interior, Encoding(args.encoding))
        elif cmd == "add-remote":
            action = tool.AddRemote(args.url, args.interior, args.length)
        else:
            action = tool.Remove(args.interior)
        s = tool.cmd_edit(args.file, action)
        print(f"{s.action} {s.interior}: {s.entity_count} entities", file=out)
    elif cmd == "verify":
        status, issues = tool.cmd_verify(args.file)
        for issue in issues:
            print(issue, file=out)
        return status
    elif cmd == "audit-links":
        for r in tool.cmd_audit_links(args.file, args.host):
            print(f"{r.path}:{r.line}\t{r.classification}\t{r.url}", file=out)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="pfsutil: %(levelname)s: %(message)s")
    try:
        return run(args)
    except (PFSError, FetchError, OSError, ValueError) as e:
        print(f"pfsutil: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
