#!/usr/bin/env python3
import logging

from hypothesis import given, settings
from hypothesis import strategies as st

from src.errors import InjectivityError, StructuralError, WordParseError
from src.groups import BaseGroup, Homomorphism, Injectivity, Transversal, generates, tokenize

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

Z2 = BaseGroup("A", "finite", [], ["e", "a"], [[0, 1], [1, 0]])
F = BaseGroup("F", "free", ["x", "y"])
ZZ = BaseGroup("Z2", "free_abelian", ["u", "v"])

free_words = st.lists(st.tuples(st.sampled_from(["x", "y"]), st.integers(min_value=-3, max_value=3)), max_size=6).map(
    lambda ls: " ".join(f"{s}^{e}" for s, e in ls)
)


def test_tokenize():
    assert tokenize("x^2 t^-1 y") == [("x", 2), ("t", -1), ("y", 1)], "exponents parse"
    assert tokenize("1") == [], "the identity token is empty"
    try:
        tokenize("x^^2")
        assert False, "malformed token accepted"
    except WordParseError:
        pass


def test_finite_arithmetic():
    a = Z2.parse("a")
    assert Z2.is_identity(Z2.op(a, a)), "a·a = e in Z/2"
    assert Z2.invert(a) == a, "a is its own inverse"
    assert Z2.format(Z2.identity()) == "1", "identity prints as 1"
    assert Z2.order == 2 and Z2.validate() == [], "Z/2 table is a group"


def test_free_and_free_abelian_arithmetic():
    assert F.op(F.parse("x^2"), F.parse("x^-1")) == F.parse("x"), "x²·x⁻¹ = x"
    assert F.format(F.parse("x y y x^-1")) == "x y^2 x^-1", "free words print reduced"
    assert ZZ.op(ZZ.from_exponents([1, 2]), ZZ.from_exponents([3, -2])) == ZZ.from_exponents([4, 0]), "vectors add"
    assert ZZ.format(ZZ.parse("v u^2")) == "u^2 v", "free abelian words print in generator order"


def test_non_associative_table_is_reported():
    bad = BaseGroup("Q", "finite", [], ["e", "a", "b"], [[0, 1, 2], [1, 0, 0], [2, 0, 0]])
    problems = bad.validate()
    assert problems and "associativity" in problems[0], f"expected an associativity violation, got {problems}"


def test_homomorphism_apply_and_relations():
    X, Y, Z = BaseGroup("X", "free", ["x"]), BaseGroup("Y", "free", ["y"]), BaseGroup("Z", "free", ["z"])
    i1 = Homomorphism("i1", Z, X, {"z": X.parse("x^2")})
    i2 = Homomorphism("i2", Z, Y, {"z": Y.parse("y^3")})
    assert i1.apply(Z.parse("z")) == X.parse("x^2"), "i1(z) = x²"
    assert i2.apply(Z.parse("z^2")) == Y.parse("y^6"), "i2(z²) = y⁶"
    assert i1.check_injective() == Injectivity.ASSERTED, "infinite sources are user-asserted"
    try:
        Homomorphism("bad", Z2, X, {"a": X.parse("x")})
        assert False, "a² = e sent to x² was accepted"
    except StructuralError:
        pass


def test_injectivity_rejections():
    one = BaseGroup("One", "trivial")
    kill = Homomorphism("kill", Z2, one, {"a": one.identity()})
    try:
        kill.check_injective()
        assert False, "Z/2 -> 1 accepted as injective"
    except InjectivityError:
        pass
    ab = Homomorphism("ab", F, ZZ, {"x": ZZ.parse("u"), "y": ZZ.parse("v")})
    try:
        ab.check_injective()
        assert False, "F2 -> Z² accepted as injective"
    except InjectivityError:
        pass
    inc = Homomorphism("inc", BaseGroup("H", "trivial"), Z2, {})
    assert inc.check_injective() == Injectivity.VERIFIED, "finite sources are verified"


def test_transversal_factor():
    X, Z = BaseGroup("X", "free", ["x"]), BaseGroup("Z", "free", ["z"])
    T = Transversal(Homomorphism("i1", Z, X, {"z": X.parse("x^2")}))
    h, r = T.factor(X.parse("x^3"))
    assert h == Z.parse("z") and r == X.parse("x"), f"x³ = i(z)·x, got {Z.format(h)}, {X.format(r)}"
    assert T.contains(X.parse("x^-4")), "x⁻⁴ lies in ⟨x²⟩"
    assert T.representative(X.parse("x^-1")) == X.parse("x"), "⟨x²⟩x⁻¹ = ⟨x²⟩x"

    A = BaseGroup("A", "free_abelian", ["u", "v"])
    C = BaseGroup("C", "free_abelian", ["c"])
    j = Homomorphism("j", C, A, {"c": A.parse("u^2 v")})
    h, r = Transversal(j).factor(A.parse("u^5 v^3"))
    assert A.op(j.apply(h), r) == A.parse("u^5 v^3"), "g = j(h)·r"


def test_generates():
    assert generates(F, [F.parse("x"), F.parse("y")]), "x, y generate F2"
    assert generates(F, [F.parse("x y"), F.parse("y")]), "xy, y generate F2"
    assert not generates(F, [F.parse("x^2"), F.parse("y")]), "x², y do not generate F2"
    assert generates(ZZ, [ZZ.from_exponents([1, 0]), ZZ.from_exponents([1, 1])]), "(1,0), (1,1) generate Z²"
    assert not generates(ZZ, [ZZ.from_exponents([2, 0]), ZZ.from_exponents([0, 1])]), "(2,0), (0,1) have index 2"
    assert generates(Z2, [Z2.parse("a")]) and not generates(Z2, []), "a generates Z/2"


@settings(max_examples=300, deadline=None)
@given(free_words, free_words, free_words)
def test_free_group_axioms(u, v, w):
    a, b, c = F.parse(u), F.parse(v), F.parse(w)
    assert F.op(F.op(a, b), c) == F.op(a, F.op(b, c)), "associativity"
    assert F.is_identity(F.op(a, F.invert(a))), "inverses"
    assert F.parse(F.format(a)) == a, "format re-parses"


if __name__ == "__main__":
    test_tokenize()
    test_finite_arithmetic()
    test_free_and_free_abelian_arithmetic()
    test_non_associative_table_is_reported()
    test_homomorphism_apply_and_relations()
    test_injectivity_rejections()
    test_transversal_factor()
    test_generates()
    test_free_group_axioms()
    logger.info("Group tests passed")
