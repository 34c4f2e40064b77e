#!/usr/bin/env python3
import logging

from hypothesis import given, settings
from hypothesis import strategies as st
from sympy import Matrix, ZZ
from sympy.matrices.normalforms import smith_normal_form

from src.amalgam import CosetKind
from src.chain import ChainComplex, ChainMap, identity_map, zero_map
from src.groupring import GroupRing
from src.groups import BaseGroup
from src.oracle import SmithForm, acyclic_cone, integer_complex, integer_exactness, integer_homology, integer_matrix, smith, tree_exactness
from src.tree import BassSerreTree, FiniteSubtree
from tests.desk import presentation, session

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

small_matrices = st.integers(min_value=1, max_value=4).flatmap(
    lambda m: st.integers(min_value=1, max_value=4).flatmap(
        lambda n: st.lists(st.lists(st.integers(min_value=-6, max_value=6), min_size=n, max_size=n), min_size=m, max_size=m)
    )
)


def test_smith_examples():
    assert smith(integer_matrix([[1, 0, 0], [0, 1, 0], [0, 0, 1]])) == (3, [1, 1, 1]), "identity"
    assert smith(integer_matrix([[2, 0], [0, 4]])) == (2, [2, 4]), "diag(2, 4) is already in normal form"
    assert smith(integer_matrix([[2, 1], [0, 3]])) == (2, [1, 6]), "[[2,1],[0,3]] ~ diag(1, 6)"
    reference = smith_normal_form(Matrix([[2, 1], [0, 3]]), domain=ZZ)
    assert sorted(abs(reference[i, i]) for i in range(2)) == [1, 6], "sympy agrees on diag(1, 6)"
    assert smith(integer_matrix([], (0, 3))) == (0, []), "empty matrix"


@settings(max_examples=200, deadline=None)
@given(small_matrices)
def test_smith_form_invariants(rows):
    form = SmithForm(integer_matrix(rows))
    assert form.self_check(), "L·M·R = D"
    factors = form.invariant_factors
    assert all(b % a == 0 for a, b in zip(factors, factors[1:])), f"divisibility chain {factors}"
    assert all(a > 0 for a in factors), "invariant factors are positive"
    assert form.rank == Matrix(rows).rank(), "rank agrees with sympy"
    if len(rows) == len(rows[0]) and form.rank == len(rows):
        product = 1
        for a in factors:
            product *= a
        assert product == abs(Matrix(rows).det()), "product of factors is |det|"
    for x in form.left_kernel():
        assert not any(x.dot(form.M)), "left kernel rows annihilate M"


def test_integer_homology():
    circle = integer_homology([1, 1], [integer_matrix([[0]])])
    assert circle[0]["betti"] == 1 and circle[1]["betti"] == 1, "S¹"
    rp2 = integer_homology([1, 1, 1], [integer_matrix([[0]]), integer_matrix([[2]])])
    assert rp2[1] == {"betti": 0, "torsion": [2]}, f"RP² has H1 = Z/2, got {rp2[1]}"
    assert not integer_exactness([1, 1, 1], [integer_matrix([[0]]), integer_matrix([[2]])]), "torsion is not exact"
    assert integer_exactness([1, 1], [integer_matrix([[1]])]), "Z --1--> Z is exact"


def test_tree_exactness():
    d = presentation("d_infinity")
    T = BassSerreTree(d)
    assert tree_exactness(T, FiniteSubtree(frozenset([T.base_vertex()]))).passed, "a vertex"
    assert tree_exactness(T, T.base_subtree(), c=2).passed, "an edge, two cells per vertex"
    apart = FiniteSubtree(frozenset([T.base_vertex(), T.vertex(d.reduce("b"))]))
    report = tree_exactness(T, apart, degree=1)
    assert not report.passed and report.first.kind == "exactness" and report.first.degree == 1, "two vertices, no edge"
    stray = FiniteSubtree(frozenset([T.base_vertex()]), frozenset([T.base_edge()]))
    assert not tree_exactness(T, stray).passed, "edge with an endpoint outside"


def test_integer_complex_of_circle():
    circle = session("circle")
    mats = integer_complex(circle.rings["G"], circle.complex("C"))
    assert len(mats) == 1 and mats[0].tolist() == [[0]], "t − 1 augments to 0"


def test_acyclic_cone_verdicts():
    Z = GroupRing(BaseGroup("One", "trivial"))
    point = ChainComplex(Z.tag, (1,), ())
    verdict = acyclic_cone(Z, identity_map(Z, point), 3)
    assert verdict.verdict == "acyclic" and verdict.radius == 2, f"cone of 1 on Z: {verdict}"

    circle = session("circle")
    R = circle.rings["G"]
    C = circle.complex("C")
    verdict = acyclic_cone(R, identity_map(R, C), 3)
    assert verdict.verdict == "acyclic" and verdict.radius == 3, f"cone of 1 on C(S¹): {verdict}"
    narrow = acyclic_cone(R, identity_map(R, C), 1)
    assert narrow.verdict == "inconclusive" and narrow.margin == -2, f"window below radius: {narrow}"
    verdict = acyclic_cone(R, zero_map(R, C, C), 3)
    assert verdict.verdict == "not_acyclic", "cone of 0 on C(S¹) has the homology of two circles"

    A = BaseGroup("A", "finite", [], ["e", "a"], [[0, 1], [1, 0]])
    Z2 = GroupRing(A)
    pt = ChainComplex(Z2.tag, (1,), ())
    norm = ChainMap(pt, pt, (Z2.matrix([[Z2.parse([(1, "e"), (1, "a")])]]),))
    verdict = acyclic_cone(Z2, norm, 3)
    assert verdict.verdict == "not_acyclic", f"1 + a is not invertible in Z[Z/2]: {verdict}"
    unit = ChainMap(pt, pt, (Z2.matrix([[Z2.parse([(1, "a")])]]),))
    verdict = acyclic_cone(Z2, unit, 3)
    assert verdict.verdict == "acyclic" and verdict.detail.startswith("finite group"), f"a is a unit: {verdict}"


if __name__ == "__main__":
    test_smith_examples()
    test_smith_form_invariants()
    test_integer_homology()
    test_tree_exactness()
    test_integer_complex_of_circle()
    test_acyclic_cone_verdicts()
    logger.info("Oracle tests passed")
