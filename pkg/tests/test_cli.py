import subprocess
import sys

import pytest

from conftest import ACCOUNTS_FILES, write_tree
from pfswrap.cli import main


@pytest.fixture
def wrapper(tmp_path, accounts_tree):
    out = tmp_path / "site.pfs"
    assert main(["create", "--root", str(accounts_tree), "--out", str(out)]) == 0
    return out


def test_create_and_list(wrapper, capsys):
    capsys.readouterr()
    assert main(["list", str(wrapper)]) == 0
    rows = [line.split("\t") for line in capsys.readouterr().out.splitlines()]
    assert sorted(r[0] for r in rows) == sorted(ACCOUNTS_FILES)
    assert {r[1] for r in rows} == {"embedded"}


def test_create_refuses_existing(wrapper, accounts_tree, capsys):
    assert main(["create", "--root", str(accounts_tree), "--out", str(wrapper)]) == 1
    assert "OutputExists" in capsys.readouterr().err
    assert main(["create", "--root", str(accounts_tree), "--out", str(wrapper), "--overwrite"]) == 0


def test_create_remote_rule(tmp_path, accounts_tree, capsys):
    out = tmp_path / "r.pfs"
    assert main(["create", "--root", str(accounts_tree), "--out", str(out),
                 "--remote", "Images/*=http://img.example/site"]) == 0
    assert "2 remote" in capsys.readouterr().out
    main(["list", str(out)])
    listing = capsys.readouterr().out
    assert "http://img.example/site/Images/logo.gif" in listing


def test_create_bad_remote_base_is_usage_error(tmp_path, accounts_tree):
    assert main(["create", "--root", str(accounts_tree), "--out", str(tmp_path / "x.pfs"),
                 "--remote", "*=ftp://nope"]) == 2


def test_usage_errors():
    for argv in ([], ["create", "--root", "x"], ["frobnicate"], ["create", "--root", "x", "--out", "y",
                                                                  "--remote", "nobase"]):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 2


def test_extract(wrapper, tmp_path, capsys):
    dest = tmp_path / "out"
    assert main(["extract", str(wrapper), "--dest", str(dest)]) == 0
    assert "written 5" in capsys.readouterr().out
    for rel, data in ACCOUNTS_FILES.items():
        assert (dest / rel).read_bytes() == data
    assert main(["extract", str(wrapper), "--dest", str(dest)]) == 1
    assert main(["extract", str(wrapper), "--dest", str(dest), "--overwrite"]) == 0


def test_edit_cycle(wrapper, tmp_path, capsys):
    new = tmp_path / "new.txt"
    new.write_bytes(b"new\n")
    assert main(["add", str(wrapper), "--from", str(new), "--as", "Docs/new.txt", "--encoding", "uuencode"]) == 0
    assert main(["add-remote", str(wrapper), "--url", "http://h.example/v.txt", "--as", "v.txt",
                 "--length", "10"]) == 0
    assert main(["remove", str(wrapper), "Dept2/budget"]) == 0
    assert main(["remove", str(wrapper), "Dept2/budget"]) == 1
    capsys.readouterr()
    main(["list", str(wrapper)])
    paths = [line.split("\t")[0] for line in capsys.readouterr().out.splitlines()]
    assert "Docs/new.txt" in paths and "v.txt" in paths and "Dept2/budget" not in paths
    assert main(["verify", str(wrapper)]) == 0


def test_verify_reports_errors(wrapper, capsys):
    data = bytearray(wrapper.read_bytes())
    data[data.index(b"length=") + 7] = ord("9")
    wrapper.write_bytes(bytes(data))
    capsys.readouterr()
    assert main(["verify", str(wrapper)]) == 1
    assert "error" in capsys.readouterr().out


def test_missing_file_is_operation_error(tmp_path, capsys):
    assert main(["list", str(tmp_path / "nope.pfs")]) == 1
    assert "pfsutil:" in capsys.readouterr().err


def test_audit_links(tmp_path, capsys):
    src = tmp_path / "src"
    write_tree(src, {"index.html": b'<a href="http://mysite.example/a.html">x</a>\n'
                                   b'<img src="http://other.example/b.gif">\n<a href="rel.html">r</a>'})
    out = tmp_path / "a.pfs"
    main(["create", "--root", str(src), "--out", str(out)])
    capsys.readouterr()
    assert main(["audit-links", str(out), "--host", "mysite.example"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 2
    assert lines[0].startswith("index.html:1\t") and lines[0].endswith("http://mysite.example/a.html")
    assert lines[1].startswith("index.html:2\t") and lines[1].endswith("http://other.example/b.gif")


def test_console_script_entry(wrapper):
    proc = subprocess.run([sys.executable, "-m", "pfswrap.cli", "list", str(wrapper)],
                          capture_output=True, text=True, timeout=30)
    assert proc.returncode == 0 and "index.html" in proc.stdout
