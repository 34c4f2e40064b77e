#!/usr/bin/env python3
import logging

from hypothesis import given, settings
from hypothesis import strategies as st

from src.amalgam import CosetKind
from src.errors import StructuralError
from src.groupring import GroupRing, decompose, induce, presentation_ring, restrict_component, support_cosets
from src.groups import BaseGroup
from tests.desk import presentation, ring_terms

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)


def test_products():
    circle = presentation("circle")
    R = presentation_ring(circle)
    t_minus_1 = R.parse([(1, "t"), (-1, "1")])
    t_plus_1 = R.parse([(1, "t"), (1, "1")])
    assert R.multiply(t_minus_1, t_plus_1) == R.parse([(1, "t^2"), (-1, "1")]), "(t−1)(t+1) = t²−1"
    t = circle.stable(1)
    assert R.multiply(R.from_group(t), R.from_group(circle.nf_invert(t))) == R.one(), "t·t⁻¹ = 1"
    d = presentation("d_infinity")
    S = presentation_ring(d)
    a_plus_b = S.parse([(1, "a"), (1, "b")])
    assert S.multiply(a_plus_b, a_plus_b) == S.parse([(2, "1"), (1, "a b"), (1, "b a")]), "(a+b)² = 2 + ab + ba"
    assert S.augmentation(S.parse([(1, "a"), (-1, "b")])) == 0, "a − b has augmentation 0"
    assert S.format(S.parse([(2, "a b"), (-1, "1")])) == "-1 + 2·a b", "terms print in normal-form order"


def test_subring_membership():
    trefoil = presentation("trefoil")
    G1 = presentation_ring(trefoil, "G1")
    assert G1.parse([(1, "x^3")]).terms, "x³ lies in ⟨x⟩"
    try:
        G1.parse([(1, "y")])
        assert False, "y accepted in Z[⟨x⟩]"
    except StructuralError:
        pass
    try:
        presentation_ring(presentation("circle"), "G2")
        assert False, "an HNN extension has no Z[G2]"
    except StructuralError:
        pass


def test_support_cosets():
    circle = presentation("circle")
    R = presentation_ring(circle)
    assert support_cosets(circle, R.zero(), CosetKind.H) == set(), "zero has empty support"
    assert len(support_cosets(circle, R.parse([(1, "t"), (-1, "1")]), CosetKind.G1)) == 2, "t − 1 meets two G1-cosets"
    d = presentation("d_infinity")
    S = presentation_ring(d)
    assert len(support_cosets(d, S.parse([(1, "1"), (1, "a")]), CosetKind.G1)) == 1, "1 + a lies in one G1-coset"
    one = restrict_component(d, S.one(), d.coset_key(d.identity(), CosetKind.G1), presentation_ring(d, "G1"))
    assert one == presentation_ring(d, "G1").one(), "the identity restricts to 1 on G1"


def test_fox_derivative():
    F = BaseGroup("F", "free", ["a", "b"])
    R = GroupRing(F)
    commutator = F.parse("a b a^-1 b^-1")
    assert R.fox_derivative(commutator, 1) == R.parse([(1, "1"), (-1, "a b a^-1")]), "∂/∂a [a,b] = 1 − aba⁻¹"
    assert R.fox_derivative(commutator, 2) == R.parse([(1, "a"), (-1, "a b a^-1 b^-1")]), "∂/∂b [a,b] = a − [a,b]"
    try:
        GroupRing(BaseGroup("Z2", "free_abelian", ["u", "v"])).fox_derivative(None, 1)
        assert False, "Fox derivative over an abelian group"
    except StructuralError:
        pass


def test_matrices():
    d = presentation("d_infinity")
    S = presentation_ring(d)
    a = S.parse([(1, "a")])
    A = S.matrix([[a, S.one()]])
    B = S.matrix([[S.one()], [a]])
    assert S.matmul(A, B) == S.matrix([[S.scale(a, 2)]]), "a·1 + 1·a = 2a"
    block = S.block([[A, S.zero_matrix(1, 3)], [S.zero_matrix(2, 2), S.zero_matrix(2, 3)]])
    assert block.shape == (3, 5), f"block shape {block.shape}"
    try:
        S.matmul(A, A)
        assert False, "1x2 times 1x2"
    except StructuralError:
        pass
    try:
        G1 = presentation_ring(d, "G1")
        S.madd(A, G1.matrix([[G1.one(), G1.one()]]))
        assert False, "ring tags mixed"
    except StructuralError:
        pass


@settings(max_examples=150, deadline=None)
@given(st.sampled_from(["trefoil", "d_infinity", "klein", "bs12"]), st.data())
def test_ring_axioms(name, data):
    p = presentation(name)
    R = presentation_ring(p)
    x, y, z = (R.parse(data.draw(ring_terms(p))) for _ in range(3))
    assert R.multiply(R.multiply(x, y), z) == R.multiply(x, R.multiply(y, z)), f"{name}: associativity"
    assert R.multiply(x, R.add(y, z)) == R.add(R.multiply(x, y), R.multiply(x, z)), f"{name}: left distributivity"
    assert R.multiply(R.add(x, y), z) == R.add(R.multiply(x, z), R.multiply(y, z)), f"{name}: right distributivity"
    assert R.augmentation(R.multiply(x, y)) == R.augmentation(x) * R.augmentation(y), f"{name}: augmentation is multiplicative"


@settings(max_examples=150, deadline=None)
@given(st.sampled_from(["trefoil", "d_infinity", "circle", "bs12", "torus"]), st.sampled_from(list(CosetKind)), st.data())
def test_coset_decomposition(name, kind, data):
    p = presentation(name)
    if kind == CosetKind.G2 and not p.is_amalgam:
        kind = CosetKind.H
    R = presentation_ring(p)
    x = R.parse(data.draw(ring_terms(p)))
    target = presentation_ring(p, kind.value)
    total = R.zero()
    for c, y in decompose(p, x, kind, target).items():
        total = R.add(total, induce(p, y, c, R))
    assert total == x, f"{name}: components over {kind.value}-cosets do not sum back"


if __name__ == "__main__":
    test_products()
    test_subring_membership()
    test_support_cosets()
    test_fox_derivative()
    test_matrices()
    test_ring_axioms()
    test_coset_decomposition()
    logger.info("Group ring tests passed")
