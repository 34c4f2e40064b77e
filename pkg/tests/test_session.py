#!/usr/bin/env python3
import json
import logging
import os
import tempfile

from src.amalgam import CosetKind
from src.errors import SessionError
from src.session import Session, dump_session, load_session, parse_session
from tests.desk import session, session_path

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)


def _error_path(document) -> str:
    text = document if isinstance(document, str) else json.dumps(document)
    try:
        Session(parse_session(text))
    except SessionError as e:
        return e.path
    raise AssertionError("session accepted")


def test_bundled_sessions_load():
    for name in ("circle", "d_infinity", "trefoil", "free2", "klein", "plus", "refine"):
        s = session(name)
        assert s.groups, f"{name}: no groups"
    assert session("circle").cw_complex("S1").base_cell == "p", "S¹ base cell"
    assert set(session("plus").plus) == {"point", "torus"}, "plus entries"
    assert "kill_loop" in session("refine").refinements, "refinement entry"


def test_round_trip():
    with open(session_path("trefoil"), encoding="utf-8") as handle:
        doc = parse_session(handle.read())
    assert parse_session(dump_session(doc)) == doc, "dump then parse gives the same document"
    s = session("trefoil")
    i1 = s.homomorphisms["i1"]
    image = i1.apply(i1.source.letter("z"))
    assert i1.target.format(image) == "x^2" and i1.target.parse(i1.target.format(image)) == image, "z maps to x²"


def test_error_paths():
    groups = [{"name": "A", "kind": "free", "generators": ["a"]}]
    assert _error_path({"groups": groups, "homomorphisms": [{"name": "h", "source": "A", "target": "B", "images": {}}]}) == "$.homomorphisms[0].target"
    assert _error_path({"groups": [{"name": "A", "kind": "cyclic"}]}) == "$.groups[0].kind"
    assert _error_path("{ not json") == "$"
    bad_complex = {"groups": groups, "complexes": [{"name": "K", "ring": "A", "ranks": [1, 1], "differentials": []}]}
    assert _error_path(bad_complex).endswith(".differentials"), "two ranks need one differential"
    needs_presentation = {"groups": groups, "complexes": [{"name": "K", "ring": "G", "ranks": [1]}]}
    assert _error_path(needs_presentation) == "$.complexes[0].ring", "Z[G] without a presentation"
    twice = {"groups": groups + groups}
    assert _error_path(twice) == "$.groups[1].name", "duplicate group"
    try:
        load_session("/nonexistent/session.json")
        assert False, "missing file loaded"
    except SessionError as e:
        assert e.path == "$"


def test_invalid_utf8():
    handle, path = tempfile.mkstemp(suffix=".json")
    os.close(handle)
    try:
        with open(path, "wb") as f:
            f.write(b'{"name": "\xff\xfe"}')
        try:
            load_session(path)
            assert False, "undecodable file loaded"
        except SessionError as e:
            assert e.path == "$" and "UTF-8" in str(e), f"reported as {e.path}: {e}"
    finally:
        os.remove(path)


def test_seeds():
    s = session("circle")
    p = s.require_presentation()
    assert s.seed(None) is None and s.seed("default") is None, "default seed"
    edge = s.seed("edge:1")
    assert (len(edge.vertices), len(edge.edges)) == (2, 1), "an edge seed is the closed edge"
    vertex = s.seed("vertex:G1:t")
    assert vertex.vertices == frozenset([p.coset_key(p.reduce("t"), CosetKind.G1)]) and not vertex.edges, "G1·t"
    d = session("d_infinity")
    pair = d.seed("vertex:G1:1, vertex:G2:1")
    assert len(pair.edges) == 1, "the hull of G1 and G2 is the base edge"
    for text in ("foo", "vertex:G3:1", "vertex:G1:q"):
        try:
            s.seed(text)
            assert False, f"seed {text!r} accepted"
        except SessionError as e:
            assert e.path == "--seed", e.path


def test_lookups():
    s = session("plus")
    try:
        s.require_presentation()
        assert False, "plus has no presentation"
    except SessionError as e:
        assert e.path == "$.presentation"
    try:
        s.cw_complex()
        assert False, "plus has no CW complexes"
    except SessionError:
        pass
    circle = session("circle")
    assert circle.complex_name(circle.complex()) == "C", "the first complex over Z[G]"


if __name__ == "__main__":
    test_bundled_sessions_load()
    test_round_trip()
    test_error_paths()
    test_invalid_utf8()
    test_seeds()
    test_lookups()
    logger.info("Session tests passed")
