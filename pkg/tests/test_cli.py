#!/usr/bin/env python3
import json
import logging
import os
import tempfile

from main import EXIT_FAIL, EXIT_PASS, EXIT_USAGE, run
from tests.desk import session_path

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)


def _run(*argv: str):
    """Run a command with --out to a temporary file; return (exit code, output text)."""
    handle, out = tempfile.mkstemp(suffix=".json")
    os.close(handle)
    try:
        code = run(list(argv) + ["--out", out])
        with open(out, encoding="utf-8") as f:
            return code, f.read()
    finally:
        os.remove(out)


def test_split_and_verify():
    code, text = _run("split", "--session", session_path("circle"))
    assert code == EXIT_PASS, f"split exited {code}"
    report = json.loads(text)
    assert report["passed"] and report["data"]["ranks"] == [[1, 2, 1], [0, 1, 1]], report["data"]["ranks"]

    with tempfile.TemporaryDirectory() as tmp:
        good = os.path.join(tmp, "split.json")
        with open(good, "w", encoding="utf-8") as f:
            f.write(text)
        code, verified = _run("verify", "--session", session_path("circle"), "--splitting", good)
        assert code == EXIT_PASS and json.loads(verified)["passed"], "verify accepts its own split"

        report["data"]["splitting"]["e1"][0][0][0] = [[5, "1"]]
        bad = os.path.join(tmp, "tampered.json")
        with open(bad, "w", encoding="utf-8") as f:
            json.dump(report, f)
        code, rejected = _run("verify", "--session", session_path("circle"), "--splitting", bad)
        assert code == EXIT_FAIL and json.loads(rejected)["violations"], "tampered e1 rejected"


def test_split_is_deterministic():
    first = _run("split", "--session", session_path("trefoil"))
    second = _run("split", "--session", session_path("trefoil"))
    assert first == second, "two runs differ"


def test_realize():
    code, text = _run("realize", "--session", session_path("d_infinity"), "--complex", "ab")
    assert code == EXIT_PASS, f"realize exited {code}"
    assert json.loads(text)["data"]["sizes"][0] == [4, 3], "U_0 of the abelianized complex"


def test_export_dot():
    code, text = _run("export-dot", "--session", session_path("circle"))
    assert code == EXIT_PASS
    lines = text.strip().splitlines()
    assert lines[0] == "graph U0 {" and lines[-1] == "}", lines
    assert sum(" -- " in line for line in lines) == 1, "one edge"
    assert sum(line.startswith('  "') and line.endswith('";') and " -- " not in line for line in lines) == 2, "two vertices"
    code, _ = _run("export-dot", "--session", session_path("circle"), "--degree", "5")
    assert code == EXIT_USAGE, "degree out of range"


def test_cw_commands():
    code, text = _run("cw-realize", "--session", session_path("circle"), "--cw", "S1")
    data = json.loads(text)["data"]
    assert code == EXIT_PASS and data["fundamental"] and data["repairs"] == 0, "S¹ domains"
    code, text = _run("cw-split", "--session", session_path("circle"))
    data = json.loads(text)["data"]
    assert code == EXIT_PASS and data["verdict"]["verdict"] == "acyclic", f"cw-split exited {code}"
    assert data["cell_count_identity"] and data["cylinder_ranks"] == [2, 2], data


def test_plus_and_refine():
    code, text = _run("plus", "--session", session_path("plus"), "--name", "torus")
    data = json.loads(text)["data"]
    assert code == EXIT_PASS and data["plus_ranks"] == [1, 2, 1, 1] and data["witnesses_verified"], data
    cycles = data["attaching_cycles"]
    assert len(cycles) == 1 and len(cycles[0]) == 2, f"one commutator, one Fox derivative per generator: {cycles}"
    for entry in cycles[0]:
        assert sorted(c for c, _ in entry) == [-1, 1], f"Fox derivative of a commutator has augmentation zero: {entry}"
    code, text = _run("plus", "--session", session_path("plus"))
    point = json.loads(text)["data"]
    assert code == EXIT_PASS and point["name"] == "point", "first plus entry by default"
    assert point["attaching_cycles"] is None, "no Fox derivatives without a free source of matching rank"
    code, text = _run("refine", "--session", session_path("refine"))
    data = json.loads(text)["data"]
    assert code == EXIT_PASS and data["ranks"] == [4, 9, 5, 3, 1], data["ranks"]


def test_usage_errors():
    assert _run("split", "--session", "/nonexistent/session.json")[0] == EXIT_USAGE, "missing session file"
    assert _run("cw-split", "--session", session_path("circle"), "--window", "-1")[0] == EXIT_USAGE, "negative window"
    assert _run("plus", "--session", session_path("plus"), "--name", "sphere")[0] == EXIT_USAGE, "unknown plus entry"
    assert _run("verify", "--session", session_path("circle"))[0] == EXIT_USAGE, "verify without a splitting"
    try:
        run(["split"])
        assert False, "--session is required"
    except SystemExit as e:
        assert e.code == 2


def test_undecodable_files():
    with tempfile.TemporaryDirectory() as tmp:
        garbled = os.path.join(tmp, "garbled.json")
        with open(garbled, "wb") as f:
            f.write(b'{"name": "\xff\xfe"}')
        assert _run("split", "--session", garbled)[0] == EXIT_USAGE, "undecodable session"
        assert _run("verify", "--session", session_path("circle"), "--splitting", garbled)[0] == EXIT_USAGE, "undecodable splitting"


if __name__ == "__main__":
    test_split_and_verify()
    test_split_is_deterministic()
    test_realize()
    test_export_dot()
    test_cw_commands()
    test_plus_and_refine()
    test_usage_errors()
    test_undecodable_files()
    logger.info("CLI tests passed")
