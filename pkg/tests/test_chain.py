#!/usr/bin/env python3
import logging
from dataclasses import replace

from hypothesis import given, settings
from hypothesis import strategies as st

from src.chain import (
    ChainComplex,
    ChainMap,
    direct_sum,
    double_cylinder_projection,
    double_mapping_cylinder,
    identity_map,
    mapping_cone,
    mapping_cylinder,
    quotient_complex,
    validate_chain_map,
    validate_complex,
    zero_complex,
    zero_map,
)
from src.groupring import GroupRing, presentation_ring
from src.groups import BaseGroup
from src.oracle import homotopy_identities, integer_complex, integer_homology
from tests.desk import chain_maps, complexes, presentation, session

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

Z = GroupRing(BaseGroup("One", "trivial"))
POINT = ChainComplex(Z.tag, (1,), ())


def scalar_map(k: int) -> ChainMap:
    return ChainMap(POINT, POINT, (Z.matrix([[Z.scalar(k)]]),))


def test_validate_complex():
    assert validate_complex(Z, zero_complex(Z)).passed, "the zero complex is a complex"
    circle = session("circle")
    R = circle.rings["G"]
    C = circle.complex("C")
    assert validate_complex(R, C).passed, "S¹ chain complex"
    t_minus_1 = C.differentials[0]
    square = ChainComplex("G", (1, 1, 1), (t_minus_1, t_minus_1))
    report = validate_complex(R, square)
    assert not report.passed and report.first.kind == "complex" and report.first.degree == 2, "(t−1)² ≠ 0 is reported"
    bad_shape = ChainComplex("G", (2, 1), (t_minus_1,))
    assert not validate_complex(R, bad_shape).passed, "a 1x1 matrix cannot be d_1 of ranks (2, 1)"


def test_chain_map_squares():
    circle = session("circle")
    R = circle.rings["G"]
    C = circle.complex("C")
    assert validate_chain_map(R, identity_map(R, C)).passed, "identity is a chain map"
    t = R.from_group(presentation("circle").stable(1))
    shifted = ChainMap(C, C, (R.matrix([[R.one()]]), R.matrix([[t]])))
    report = validate_chain_map(R, shifted, "s")
    assert not report.passed and report.first.kind == "chain_map" and report.first.degree == 1, "1 in degree 0 and t in degree 1 do not commute with t − 1"


def test_cylinder_of_multiplication():
    cyl = mapping_cylinder(Z, scalar_map(2))
    M = cyl.complex
    assert M.ranks == (2, 1), f"cylinder ranks {M.ranks}"
    assert Z.serialize_matrix(M.differentials[0]) == [[[(-2, "1")], [(1, "1")]]], "d_1 = (−2, 1)"
    assert Z.serialize_matrix(cyl.projection.matrices[0]) == [[[(1, "1")]], [[(2, "1")]]], "p = (1, 2)"
    assert validate_complex(Z, M).passed and validate_chain_map(Z, cyl.projection, "p").passed, "cylinder and projection"
    assert homotopy_identities(Z, cyl).passed, "homotopy identities for ×2"

    identity = mapping_cylinder(Z, scalar_map(1))
    assert Z.serialize_matrix(identity.complex.differentials[0]) == [[[(-1, "1")], [(1, "1")]]], "d_1 = (−1, 1)"
    assert homotopy_identities(Z, identity).passed, "homotopy identities for the identity"

    broken = replace(cyl, homotopy=(Z.zero_matrix(2, 1),) + cyl.homotopy[1:])
    report = homotopy_identities(Z, broken)
    assert not report.passed and report.first.degree == 0, "a zero homotopy is caught in degree 0"


def test_double_cylinder():
    both = double_mapping_cylinder(Z, scalar_map(1), scalar_map(1))
    assert both.complex.ranks == (2, 1), f"ranks {both.complex.ranks}"
    homology = integer_homology(both.complex.ranks, integer_complex(Z, both.complex))
    assert homology[0]["betti"] == 1 and homology[1]["betti"] == 0, "two points joined by an interval"
    one_sided = double_mapping_cylinder(Z, scalar_map(1), scalar_map(0))
    homology = integer_homology(one_sided.complex.ranks, integer_complex(Z, one_sided.complex))
    assert homology[0]["betti"] == 1, "an interval and a point joined at one end"
    projection = double_cylinder_projection(Z, both, scalar_map(1), scalar_map(1))
    assert validate_chain_map(Z, projection, "f").passed, "(1, 0, −1) is a chain map when e1·f1 = e2·f2"
    empty = direct_sum(Z, POINT, zero_complex(Z))
    assert empty.ranks == (1,), "V = 0 leaves the sum unchanged"


def test_cone_and_quotient():
    cone = mapping_cone(Z, identity_map(Z, POINT))
    assert cone.ranks == (1, 1) and Z.serialize_matrix(cone.differentials[0]) == [[[(-1, "1")]]], "cone of 1 on Z"
    inclusion = zero_map(Z, zero_complex(Z), POINT)
    assert quotient_complex(Z, inclusion).ranks == (1,), "nothing hit, nothing removed"
    assert quotient_complex(Z, identity_map(Z, POINT)).ranks == (0,), "everything hit"


def _into_sum(R, f: ChainMap, B: ChainComplex) -> ChainMap:
    """f : A -> A followed by the inclusion A -> A ⊕ B."""
    A = f.source
    target = direct_sum(R, A, B)
    matrices = []
    for r in range(A.top + 1):
        m = f.matrices[r]
        matrices.append(R.block([[m, R.zero_matrix(A.rank(r), B.rank(r))]]) if B.rank(r) else m)
    return ChainMap(A, target, tuple(matrices))


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(["d_infinity", "trefoil", "free2", "klein", "bs12", "torus"]), st.data())
def test_cylinders_of_random_maps(name, data):
    p = presentation(name)
    R = presentation_ring(p)
    A = data.draw(complexes(p, max_top=2, max_rank=2))
    B = data.draw(complexes(p, max_top=2, max_rank=2))
    assert validate_complex(R, A).passed and validate_complex(R, B).passed, f"{name}: drawn complexes are not complexes"
    e = _into_sum(R, data.draw(chain_maps(p, A)), B)
    assert validate_chain_map(R, e, "e").passed, f"{name}: k + dh + hd is not a chain map"
    cyl = mapping_cylinder(R, e)
    assert validate_complex(R, cyl.complex).passed, f"{name}: cylinder differentials square to zero"
    assert validate_chain_map(R, cyl.projection, "p").passed and validate_chain_map(R, cyl.inclusion, "i").passed, f"{name}: p and incl"
    assert homotopy_identities(R, cyl).passed, f"{name}: homotopy identities"


if __name__ == "__main__":
    test_validate_complex()
    test_chain_map_squares()
    test_cylinder_of_multiplication()
    test_double_cylinder()
    test_cone_and_quotient()
    test_cylinders_of_random_maps()
    logger.info("Chain tests passed")
