"""Finite based free chain complexes over a group ring.

Modules are rows: a map between free modules of ranks a and b is an a x b matrix acting by
right multiplication, so composites read left to right and a chain map F: A -> B satisfies
d^A_r·F_{r-1} = F_r·d^B_r.
"""

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

from src.errors import StructuralError
from src.groupring import GroupRing, RingMatrix
from src.models.schemas import VerificationReport

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ChainComplex:
    ring: str
    # ranks[r] for r = 0..n
    ranks: Tuple[int, ...]
    # differentials[r - 1] = d_r : C_r -> C_{r-1}
    differentials: Tuple[RingMatrix, ...] = ()

    @property
    def top(self) -> int:
        return len(self.ranks) - 1

    def rank(self, r: int) -> int:
        return self.ranks[r] if 0 <= r < len(self.ranks) else 0


@dataclass(frozen=True)
class ChainMap:
    source: ChainComplex
    target: ChainComplex
    # matrices[r] = F_r : A_r -> B_r for r = 0..source.top
    matrices: Tuple[RingMatrix, ...]

    def at(self, r: int) -> Optional[RingMatrix]:
        return self.matrices[r] if 0 <= r < len(self.matrices) else None


@dataclass(frozen=True)
class CylinderData:
    complex: ChainComplex
    inclusion: ChainMap
    projection: ChainMap
    # homotopy[r] = h_r : M_r -> M_{r+1}
    homotopy: Tuple[RingMatrix, ...]


@dataclass(frozen=True)
class DoubleCylinder:
    complex: ChainComplex
    # block sizes per degree: W1_r, V_{r-1}, W2_r
    blocks: Tuple[Tuple[int, int, int], ...]
    inclusion1: ChainMap
    inclusion2: ChainMap


def complex_from(ring: GroupRing, ranks: Sequence[int], differentials: Sequence[RingMatrix]) -> ChainComplex:
    if len(differentials) != max(len(ranks) - 1, 0):
        raise StructuralError(f"a complex with {len(ranks)} ranks needs {max(len(ranks) - 1, 0)} differentials")
    return ChainComplex(ring.tag, tuple(ranks), tuple(differentials))


def zero_complex(ring: GroupRing) -> ChainComplex:
    return ChainComplex(ring.tag, (0,), ())


def differential(ring: GroupRing, C: ChainComplex, r: int) -> RingMatrix:
    if 1 <= r <= C.top:
        return C.differentials[r - 1]
    return ring.zero_matrix(C.rank(r), C.rank(r - 1))


def map_at(ring: GroupRing, f: ChainMap, r: int) -> RingMatrix:
    m = f.at(r)
    return m if m is not None else ring.zero_matrix(f.source.rank(r), f.target.rank(r))


def retag(C: ChainComplex, ring: GroupRing) -> ChainComplex:
    """The same matrices read in a larger ring over the same group elements (induction along an inclusion)."""
    return ChainComplex(ring.tag, C.ranks, tuple(RingMatrix(ring.tag, d.rows, d.cols, d.entries) for d in C.differentials))


def retag_map(f: ChainMap, ring: GroupRing) -> ChainMap:
    return ChainMap(retag(f.source, ring), retag(f.target, ring), tuple(RingMatrix(ring.tag, m.rows, m.cols, m.entries) for m in f.matrices))


def induce_complex(C: ChainComplex, source: GroupRing, fn: Callable, target: GroupRing) -> ChainComplex:
    """Base change along a group homomorphism given elementwise."""
    diffs = tuple(source.mapped(d, lambda x, i, j: source.map_through(x, fn, target), target) for d in C.differentials)
    return ChainComplex(target.tag, C.ranks, diffs)


def validate_complex(ring: GroupRing, C: ChainComplex) -> VerificationReport:
    report = VerificationReport()
    if C.ring != ring.tag:
        report.add("complex", f"complex over Z[{C.ring}] checked in Z[{ring.tag}]")
        return report
    if len(C.differentials) != max(C.top, 0) or any(r < 0 for r in C.ranks):
        report.add("complex", f"{len(C.ranks)} ranks with {len(C.differentials)} differentials")
        return report
    for r in range(1, C.top + 1):
        d = C.differentials[r - 1]
        if d.shape != (C.rank(r), C.rank(r - 1)):
            report.add("complex", f"d_{r} is {d.rows}x{d.cols}, expected {C.rank(r)}x{C.rank(r - 1)}", r)
            return report
    for r in range(2, C.top + 1):
        product = ring.matmul(C.differentials[r - 1], C.differentials[r - 2])
        spot = ring.first_nonzero(product)
        if spot is not None:
            report.add("complex", f"d_{r}·d_{r - 1} is nonzero at {spot}: {ring.format(product[spot])}", r)
            return report
    return report


def validate_chain_map(ring: GroupRing, f: ChainMap, name: str = "f") -> VerificationReport:
    report = VerificationReport()
    A, B = f.source, f.target
    for r in range(0, A.top + 1):
        m = map_at(ring, f, r)
        if m.shape != (A.rank(r), B.rank(r)):
            report.add("chain_map", f"{name}_{r} is {m.rows}x{m.cols}, expected {A.rank(r)}x{B.rank(r)}", r)
            return report
    for r in range(1, max(A.top, B.top) + 1):
        left = ring.matmul(differential(ring, A, r), map_at(ring, f, r - 1))
        right = ring.matmul(map_at(ring, f, r), differential(ring, B, r))
        spot = ring.first_nonzero(ring.msub(left, right))
        if spot is not None:
            report.add("chain_map", f"square of {name} fails in degree {r} at {spot}", r)
    return report


def identity_map(ring: GroupRing, C: ChainComplex) -> ChainMap:
    return ChainMap(C, C, tuple(ring.identity_matrix(C.rank(r)) for r in range(C.top + 1)))


def zero_map(ring: GroupRing, A: ChainComplex, B: ChainComplex) -> ChainMap:
    return ChainMap(A, B, tuple(ring.zero_matrix(A.rank(r), B.rank(r)) for r in range(A.top + 1)))


def compose(ring: GroupRing, f: ChainMap, g: ChainMap) -> ChainMap:
    """First f, then g."""
    return ChainMap(f.source, g.target, tuple(ring.matmul(map_at(ring, f, r), map_at(ring, g, r)) for r in range(f.source.top + 1)))


def add_maps(ring: GroupRing, f: ChainMap, g: ChainMap) -> ChainMap:
    return ChainMap(f.source, f.target, tuple(ring.madd(map_at(ring, f, r), map_at(ring, g, r)) for r in range(f.source.top + 1)))


def negate_map(ring: GroupRing, f: ChainMap) -> ChainMap:
    return ChainMap(f.source, f.target, tuple(ring.mneg(m) for m in f.matrices))


def direct_sum(ring: GroupRing, A: ChainComplex, B: ChainComplex) -> ChainComplex:
    n = max(A.top, B.top)
    ranks = tuple(A.rank(r) + B.rank(r) for r in range(n + 1))
    diffs = []
    for r in range(1, n + 1):
        dA, dB = differential(ring, A, r), differential(ring, B, r)
        diffs.append(ring.block([
            [dA, ring.zero_matrix(A.rank(r), B.rank(r - 1))],
            [ring.zero_matrix(B.rank(r), A.rank(r - 1)), dB],
        ]))
    return ChainComplex(ring.tag, ranks, tuple(diffs))


def quotient_complex(ring: GroupRing, inclusion: ChainMap) -> ChainComplex:
    """M'/M for an inclusion sending basis cells to basis cells; the new cells are the columns it misses."""
    target = inclusion.target
    new = []
    for r in range(target.top + 1):
        m = map_at(ring, inclusion, r)
        hit = {j for row in m.entries for j, x in enumerate(row) if x}
        new.append([j for j in range(target.rank(r)) if j not in hit])
    diffs = []
    for r in range(1, target.top + 1):
        d = target.differentials[r - 1]
        grid = [[d.entries[i][j] for j in new[r - 1]] for i in new[r]]
        diffs.append(ring.matrix(grid, len(new[r]), len(new[r - 1])))
    return ChainComplex(ring.tag, tuple(len(cells) for cells in new), tuple(diffs))


def _sign(r: int) -> int:
    return -1 if r % 2 else 1


def mapping_cylinder(ring: GroupRing, e: ChainMap) -> CylinderData:
    """Cylinder of e: V -> W with degree-r module W_r ⊕ V_{r-1} ⊕ V_r.

    d_r has rows W: [d_W, 0, 0], V_{r-1}: [(-1)^r e, d_V, (-1)^(r-1)], V_r: [0, 0, d_V];
    p = (1, 0, e), and h_r sends V_r into the middle V_r of degree r+1 with sign (-1)^(r+1),
    so that h_r·d_{r+1} + d_r·h_{r-1} = p_r·incl_r - 1.
    """
    V, W = e.source, e.target
    n = max(V.top + 1, W.top)
    z = ring.zero_matrix

    def sizes(r):
        return W.rank(r), V.rank(r - 1), V.rank(r)

    ranks = tuple(sum(sizes(r)) for r in range(n + 1))
    diffs = []
    for r in range(1, n + 1):
        w, v1, v = sizes(r)
        w_, v1_, v_ = sizes(r - 1)
        eye = ring.mscale(ring.identity_matrix(v1), _sign(r - 1))
        diffs.append(ring.block([
            [differential(ring, W, r), z(w, v1_), z(w, v_)],
            [ring.mscale(map_at(ring, e, r - 1), _sign(r)), differential(ring, V, r - 1), eye],
            [z(v, w_), z(v, v1_), differential(ring, V, r)],
        ]))
    M = ChainComplex(ring.tag, ranks, tuple(diffs))

    incl, proj, homotopy = [], [], []
    for r in range(n + 1):
        w, v1, v = sizes(r)
        incl.append(ring.block([[ring.identity_matrix(w), z(w, v1), z(w, v)]]))
        proj.append(ring.block([[ring.identity_matrix(w)], [z(v1, w)], [map_at(ring, e, r)]]))
        w2, v12, v2 = sizes(r + 1)
        homotopy.append(ring.block([
            [z(w, w2), z(w, v12), z(w, v2)],
            [z(v1, w2), z(v1, v12), z(v1, v2)],
            [z(v, w2), ring.mscale(ring.identity_matrix(v), _sign(r + 1)), z(v, v2)],
        ]))
    logger.debug(f"Mapping cylinder over Z[{ring.tag}] with ranks {ranks}")
    return CylinderData(M, ChainMap(W, M, tuple(incl)), ChainMap(M, W, tuple(proj)), tuple(homotopy))


def double_mapping_cylinder(ring: GroupRing, e1: ChainMap, e2: ChainMap) -> DoubleCylinder:
    """M(e1, e2) with degree-r module W1_r ⊕ V_{r-1} ⊕ W2_r and V-rows [(-1)^r e1, d_V, (-1)^r e2]."""
    if e1.source != e2.source:
        raise StructuralError("double mapping cylinder needs maps with a common source")
    V, W1, W2 = e1.source, e1.target, e2.target
    n = max(W1.top, W2.top, V.top + 1)
    z = ring.zero_matrix

    def sizes(r):
        return W1.rank(r), V.rank(r - 1), W2.rank(r)

    ranks = tuple(sum(sizes(r)) for r in range(n + 1))
    diffs = []
    for r in range(1, n + 1):
        a, v, b = sizes(r)
        a_, v_, b_ = sizes(r - 1)
        diffs.append(ring.block([
            [differential(ring, W1, r), z(a, v_), z(a, b_)],
            [ring.mscale(map_at(ring, e1, r - 1), _sign(r)), differential(ring, V, r - 1), ring.mscale(map_at(ring, e2, r - 1), _sign(r))],
            [z(b, a_), z(b, v_), differential(ring, W2, r)],
        ]))
    M = ChainComplex(ring.tag, ranks, tuple(diffs))
    inc1, inc2 = [], []
    for r in range(n + 1):
        a, v, b = sizes(r)
        if r <= W1.top:
            inc1.append(ring.block([[ring.identity_matrix(a), z(a, v), z(a, b)]]))
        if r <= W2.top:
            inc2.append(ring.block([[z(b, a), z(b, v), ring.identity_matrix(b)]]))
    logger.debug(f"Double mapping cylinder over Z[{ring.tag}] with ranks {ranks}")
    return DoubleCylinder(M, tuple(sizes(r) for r in range(n + 1)), ChainMap(W1, M, tuple(inc1)), ChainMap(W2, M, tuple(inc2)))


def double_cylinder_projection(ring: GroupRing, cyl: DoubleCylinder, f1: ChainMap, f2: ChainMap) -> ChainMap:
    """(f1, 0, -f2): M(e1, e2) -> C, a chain map whenever e1·f1 = e2·f2."""
    target = f1.target
    matrices = []
    for r, (a, v, b) in enumerate(cyl.blocks):
        matrices.append(ring.block([
            [map_at(ring, f1, r) if a else ring.zero_matrix(0, target.rank(r))],
            [ring.zero_matrix(v, target.rank(r))],
            [ring.mneg(map_at(ring, f2, r)) if b else ring.zero_matrix(0, target.rank(r))],
        ]))
    return ChainMap(cyl.complex, target, tuple(matrices))


def mapping_cone(ring: GroupRing, f: ChainMap) -> ChainComplex:
    """Cone of f: A -> B, degree r = B_r ⊕ A_{r-1}, rows B: [d_B, 0], A: [(-1)^r f, d_A]."""
    A, B = f.source, f.target
    n = max(B.top, A.top + 1)
    ranks = tuple(B.rank(r) + A.rank(r - 1) for r in range(n + 1))
    diffs = []
    for r in range(1, n + 1):
        diffs.append(ring.block([
            [differential(ring, B, r), ring.zero_matrix(B.rank(r), A.rank(r - 2))],
            [ring.mscale(map_at(ring, f, r - 1), _sign(r)), differential(ring, A, r - 1)],
        ]))
    return ChainComplex(ring.tag, ranks, tuple(diffs))


def cone_projection(ring: GroupRing, f: ChainMap, g: ChainMap) -> ChainMap:
    """(g, 0): cone(f) -> C for g: B -> C with f·g = 0."""
    A, B = f.source, f.target
    cone = mapping_cone(ring, f)
    matrices = []
    for r in range(cone.top + 1):
        matrices.append(ring.block([
            [map_at(ring, g, r) if B.rank(r) else ring.zero_matrix(0, g.target.rank(r))],
            [ring.zero_matrix(A.rank(r - 1), g.target.rank(r))],
        ]))
    return ChainMap(cone, g.target, tuple(matrices))


def stack_maps(ring: GroupRing, source: ChainComplex, target: ChainComplex, parts: List[ChainMap], sign: Sequence[int]) -> ChainMap:
    """Column-stack maps with a common source: [s1·F1 | s2·F2 | ...] into a direct sum target."""
    matrices = []
    for r in range(source.top + 1):
        blocks = [ring.mscale(map_at(ring, g, r), s) for g, s in zip(parts, sign)]
        matrices.append(ring.block([blocks]) if source.rank(r) else ring.zero_matrix(0, target.rank(r)))
    return ChainMap(source, target, tuple(matrices))


def row_stack_maps(ring: GroupRing, source: ChainComplex, target: ChainComplex, parts: List[ChainMap], sign: Sequence[int]) -> ChainMap:
    """Row-stack maps with a common target: [s1·F1; s2·F2; ...] out of a direct sum source."""
    matrices = []
    for r in range(source.top + 1):
        blocks = [[ring.mscale(map_at(ring, g, r), s)] for g, s in zip(parts, sign)]
        matrices.append(ring.block(blocks) if target.rank(r) else ring.zero_matrix(source.rank(r), 0))
    return ChainMap(source, target, tuple(matrices))
