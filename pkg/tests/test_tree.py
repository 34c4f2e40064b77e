#!/usr/bin/env python3
import logging

from hypothesis import given, settings
from hypothesis import strategies as st

from src.amalgam import CosetKind
from src.tree import BassSerreTree, FiniteSubtree, contains
from tests.desk import presentation, words

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)


def test_endpoints():
    d = presentation("d_infinity")
    T = BassSerreTree(d)
    assert T.endpoints(T.base_edge()) == (T.base_vertex(), T.vertex(d.identity(), CosetKind.G2)), "H joins G1 and G2"
    a = d.reduce("a")
    assert T.endpoints(T.edge(a)) == (T.base_vertex(), T.vertex(a, CosetKind.G2)), "H·a joins G1 and G2·a"
    circle = presentation("circle")
    C = BassSerreTree(circle)
    head, tail = C.endpoints(C.base_edge())
    assert head == C.base_vertex() and tail == C.vertex(circle.stable(-1)), "H joins G1 and G1·t⁻¹"


def test_action():
    d = presentation("d_infinity")
    T = BassSerreTree(d)
    b = d.reduce("b")
    assert T.act(T.base_vertex(), b) == T.vertex(b), "G1·b"
    assert T.act(T.vertex(b, CosetKind.G2), b) == T.vertex(d.identity(), CosetKind.G2), "G2·b·b = G2"


def test_geodesics():
    d = presentation("d_infinity")
    T = BassSerreTree(d)
    u = T.vertex(d.reduce("a"), CosetKind.G2)
    v = T.vertex(d.identity(), CosetKind.G2)
    path = T.geodesic(u, v)
    assert path == [u, T.edge(d.reduce("a")), T.base_vertex(), T.base_edge(), v], [d.format_key(x) for x in path]
    assert T.distance(T.base_vertex(), T.vertex(d.reduce("b"))) == 2, "G1 and G1·b are two edges apart"
    circle = presentation("circle")
    C = BassSerreTree(circle)
    assert C.distance(C.base_vertex(), C.vertex(circle.reduce("t^-2"))) == 2, "G1·t⁻² is two edges from G1"


def test_hull_and_validation():
    d = presentation("d_infinity")
    T = BassSerreTree(d)
    hull = T.hull([T.vertex(d.reduce("a"), CosetKind.G2), T.vertex(d.identity(), CosetKind.G2)])
    assert (len(hull.vertices), len(hull.edges)) == (3, 2), "hull of G2·a, G2 is a path of length 2"
    assert T.validate_subtree(hull).passed, "hulls are subtrees"
    assert contains(T.base_subtree(), hull), "the base edge lies on the path"
    broken = FiniteSubtree(frozenset([T.base_vertex(), T.vertex(d.reduce("b"))]), frozenset())
    report = T.validate_subtree(broken, 0)
    assert not report.passed and report.first.kind == "subtree" and report.first.degree == 0, "disconnected pair rejected"
    try:
        T.hull([])
        assert False, "hull of nothing"
    except ValueError:
        pass


# radius-6 ball sizes; free2 counts only the spread-1 neighbours of each vertex
BALLS = {
    "d_infinity": (13, 12),
    "circle": (13, 12),
    "klein": (13, 12),
    "torus": (13, 12),
    "trefoil": (43, 42),
    "free2": (190, 189),
    "bs12": (190, 189),
}

DEGREES = {
    "d_infinity": {CosetKind.G1: 2, CosetKind.G2: 2},
    "trefoil": {CosetKind.G1: 2, CosetKind.G2: 3},
    "free2": {CosetKind.G1: 3, CosetKind.G2: 3},
    "circle": {CosetKind.G1: 2},
    "klein": {CosetKind.G1: 2},
    "bs12": {CosetKind.G1: 3},
    "torus": {CosetKind.G1: 2},
}


def test_balls():
    for name, size in BALLS.items():
        p = presentation(name)
        T = BassSerreTree(p)
        ball = T.ball(6)
        assert (len(ball.vertices), len(ball.edges)) == size, f"{name}: radius-6 ball has {len(ball.vertices)} vertices"
        assert T.validate_subtree(ball).passed, f"{name}: ball fails validation"

        # orbits in the ball match the quotient graph: one or two vertices, one edge
        kinds = {v.kind for v in ball.vertices}
        expected = {CosetKind.G1, CosetKind.G2} if p.is_amalgam else {CosetKind.G1}
        assert kinds == expected, f"{name}: vertex orbits {kinds}"
        assert {e.kind for e in ball.edges} == {CosetKind.H}, f"{name}: more than one edge orbit"
        for v in ball.vertices:
            assert T.act(T.vertex(p.identity(), v.kind), v.rep) == v, f"{name}: {p.format_key(v)} is not a translate of its orbit vertex"
        for e in ball.edges:
            assert T.act(T.base_edge(), e.rep) == e, f"{name}: {p.format_key(e)} is not a translate of the base edge"
            ends = tuple(v.kind for v in T.endpoints(e))
            quotient = (CosetKind.G1, CosetKind.G2) if p.is_amalgam else (CosetKind.G1, CosetKind.G1)
            assert ends == quotient, f"{name}: edge {p.format_key(e)} joins {ends}"

        for v in T.ball(3).vertices:
            assert len(T.neighbours(v)) == DEGREES[name][v.kind], f"{name}: {p.format_key(v)} has degree {len(T.neighbours(v))}"


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(["d_infinity", "trefoil", "circle", "klein", "bs12"]), st.data())
def test_geodesics_are_equivariant(name, data):
    p = presentation(name)
    T = BassSerreTree(p)
    u = T.vertex(p.reduce(data.draw(words(p, 4))))
    v = T.vertex(p.reduce(data.draw(words(p, 4))))
    e = T.edge(p.reduce(data.draw(words(p, 4))))
    g = p.reduce(data.draw(words(p, 4)))
    moved = T.geodesic(T.act(u, g), T.act(v, g))
    assert moved == [T.act(x, g) for x in T.geodesic(u, v)], f"{name}: geodesic not equivariant"
    assert T.endpoints(T.act(e, g)) == tuple(T.act(x, g) for x in T.endpoints(e)), f"{name}: endpoints not equivariant"


if __name__ == "__main__":
    test_endpoints()
    test_action()
    test_geodesics()
    test_hull_and_validation()
    test_balls()
    test_geodesics_are_equivariant()
    logger.info("Tree tests passed")
