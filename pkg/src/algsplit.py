import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Set, Tuple

from src.amalgam import CosetKey, CosetKind, Presentation
from src.chain import ChainComplex, ChainMap, retag, validate_chain_map, validate_complex
from src.errors import RealizationError, StructuralError
from src.groupring import GroupRing, RingMatrix, presentation_ring, restrict_component, support_cosets
from src.models.schemas import ComplexDoc, SplittingDoc, SubtreeDoc, VerificationReport
from src.oracle import tree_exactness
from src.tree import BassSerreTree, FiniteSubtree, contains

logger = logging.getLogger(__name__)

Basis = Tuple[Tuple[CosetKey, int], ...]


@dataclass(frozen=True)
class SubtreeSequence:
    # subtrees[r] = U_r for r = 0..n
    subtrees: Tuple[FiniteSubtree, ...]

    def __getitem__(self, r: int) -> FiniteSubtree:
        return self.subtrees[r]

    @property
    def top(self) -> int:
        return len(self.subtrees) - 1


@dataclass(frozen=True)
class MVSplitting:
    presentation: str
    complex: ChainComplex
    U: SubtreeSequence
    D: ChainComplex
    C1: ChainComplex
    C2: Optional[ChainComplex]
    # e1: D -> C1; e2: D -> C2 (amalgam) or D -> C1 through b ↦ b·t⁻¹·y (hnn); f_i: C_i -> C
    e1: ChainMap
    e2: ChainMap
    f1: ChainMap
    f2: Optional[ChainMap]
    bases: Dict[str, Tuple[Basis, ...]] = field(default_factory=dict, compare=False, hash=False)


class AlgebraicTransversality:
    """Finite Mayer–Vietoris splittings of a free Z[G]-complex along the Bass–Serre tree."""

    def __init__(self, presentation: Presentation):
        self.p = presentation
        self.tree = BassSerreTree(presentation)
        self.ring = presentation_ring(presentation, "G")
        self.rings = {"G": self.ring, "G1": presentation_ring(presentation, "G1"), "H": presentation_ring(presentation, "H")}
        if presentation.is_amalgam:
            self.rings["G2"] = presentation_ring(presentation, "G2")

    def __repr__(self) -> str:
        return f"AlgebraicTransversality({self.p.name})"

    def default_seed(self) -> FiniteSubtree:
        """U_n when no seed is given (`--seed default`): the closed base edge for an amalgam, the base vertex G1 alone for an HNN extension.

        The HNN seed carries no edge; U_{n-1} picks up H·1 from the differential when it needs it.
        """
        if self.p.is_amalgam:
            return self.tree.hull([self.tree.base_edge()])
        return self.tree.hull([self.tree.base_vertex()])

    def _check_complex(self, C: ChainComplex):
        if C.ring != "G":
            raise StructuralError(f"splittings need a complex over Z[G], not Z[{C.ring}]")

    def diff_support(self, C: ChainComplex, r: int, v: CosetKey) -> Set[CosetKey]:
        self._check_complex(C)
        if not 1 <= r <= C.top:
            return set()
        d = C.differentials[r - 1]
        supports: Set[CosetKey] = set()
        for row in d.entries:
            for x in row:
                supports |= support_cosets(self.p, self.ring.left_translate(v.rep, x), v.kind)
        return supports

    def _sweep(self, C: ChainComplex, top: FiniteSubtree, lower: Dict[int, Iterable[CosetKey]]) -> SubtreeSequence:
        subtrees = [top]
        for r in range(C.top, 0, -1):
            current = subtrees[-1]
            items: List[CosetKey] = list(current.vertices) + list(current.edges) + list(lower.get(r - 1, ()))
            for v in sorted(current.vertices, key=self.p.key_sort):
                items.extend(self.diff_support(C, r, v))
            subtrees.append(self.tree.hull(items))
            logger.debug(f"U_{r - 1}: {len(subtrees[-1].vertices)} vertices, {len(subtrees[-1].edges)} edges")
        return SubtreeSequence(tuple(reversed(subtrees)))

    def realize(self, C: ChainComplex, seed: Optional[FiniteSubtree] = None) -> SubtreeSequence:
        self._check_complex(C)
        seed = seed if seed is not None else self.default_seed()
        if not seed.vertices:
            raise ValueError("realize needs a nonempty seed")
        report = self.tree.validate_subtree(seed)
        if not report.passed:
            raise StructuralError(f"seed is not a subtree: {report.first.detail}")
        U = self._sweep(C, seed, {})
        logger.info(f"Realized {self.p.name} complex: subtree sizes {[len(s.vertices) for s in U.subtrees]}")
        return U

    def extend_sequence(self, C: ChainComplex, U: SubtreeSequence, targets: Dict[int, Iterable[CosetKey]]) -> SubtreeSequence:
        """Smallest realized enlargement of U containing the targets (keyed by degree)."""
        targets = {r: list(items) for r, items in targets.items()}
        top = self.tree.extend(U[C.top], targets.get(C.top, ()))
        lower = {r: list(U[r].vertices) + list(U[r].edges) + targets.get(r, []) for r in range(C.top)}
        return self._sweep(C, top, lower)

    def realization_violations(self, C: ChainComplex, U: SubtreeSequence) -> List[Tuple[int, CosetKey, CosetKey]]:
        violations = []
        for r in range(1, C.top + 1):
            for v in sorted(U[r].vertices, key=self.p.key_sort):
                for w in sorted(self.diff_support(C, r, v), key=self.p.key_sort):
                    if w not in U[r - 1].vertices:
                        violations.append((r, v, w))
        return violations

    # assembly

    def _basis(self, keys: Iterable[CosetKey], c: int) -> Basis:
        return tuple((key, k) for key in sorted(keys, key=self.p.key_sort) for k in range(c))

    def _restricted(self, C: ChainComplex, bases: List[Basis], kind: CosetKind, target: GroupRing) -> ChainComplex:
        diffs = []
        for r in range(1, C.top + 1):
            d = C.differentials[r - 1]
            columns = {b: j for j, b in enumerate(bases[r - 1])}
            grid = [[target.zero() for _ in bases[r - 1]] for _ in bases[r]]
            for i, (v, k) in enumerate(bases[r]):
                for l in range(C.rank(r - 1)):
                    x = self.ring.left_translate(v.rep, d.entries[k][l])
                    for w in support_cosets(self.p, x, kind):
                        if (w, l) not in columns:
                            raise RealizationError(r, self.p.format_key(v), self.p.format_key(w))
                        grid[i][columns[(w, l)]] = restrict_component(self.p, x, w, target)
            diffs.append(target.matrix(grid, len(bases[r]), len(bases[r - 1])))
        return ChainComplex(target.tag, tuple(len(b) for b in bases), tuple(diffs))

    def _incidence_map(self, source: ChainComplex, target: ChainComplex, rows: List[Basis], cols: List[Basis], entry) -> ChainMap:
        """Matrices with entry(key, column key) at ((key, k), (column key, k))."""
        ring = self.ring
        matrices = []
        for r in range(source.top + 1):
            index = {b: j for j, b in enumerate(cols[r])}
            grid = [[ring.zero() for _ in cols[r]] for _ in rows[r]]
            for i, (key, k) in enumerate(rows[r]):
                for column_key, value in entry(key):
                    grid[i][index[(column_key, k)]] = ring.from_group(value)
            matrices.append(ring.matrix(grid, len(rows[r]), len(cols[r])))
        return ChainMap(source, target, tuple(matrices))

    def _projection(self, source: ChainComplex, C: ChainComplex, rows: List[Basis]) -> ChainMap:
        ring = self.ring
        matrices = []
        for r in range(source.top + 1):
            grid = [[ring.zero() for _ in range(C.rank(r))] for _ in rows[r]]
            for i, (v, k) in enumerate(rows[r]):
                grid[i][k] = ring.from_group(v.rep)
            matrices.append(ring.matrix(grid, len(rows[r]), C.rank(r)))
        return ChainMap(source, C, tuple(matrices))

    def endpoint_factors(self, edge: CosetKey) -> Tuple[Tuple[CosetKey, object], Tuple[CosetKey, object]]:
        """((v1, γ1), (v2, γ2)): γ1 = ĝ_ε·ĝ_v1⁻¹ and γ2 = ĝ_ε·ĝ_v2⁻¹, or t⁻¹·ĝ_ε·ĝ_v2⁻¹ for an HNN extension."""
        p = self.p
        v1, v2 = self.tree.endpoints(edge)
        g = edge.rep
        gamma1 = p.nf_multiply(g, p.nf_invert(v1.rep))
        lifted = g if p.is_amalgam else p.nf_multiply(p.stable(-1), g)
        gamma2 = p.nf_multiply(lifted, p.nf_invert(v2.rep))
        return (v1, gamma1), (v2, gamma2)

    def build_splitting(self, C: ChainComplex, U: SubtreeSequence) -> MVSplitting:
        """Restrict C to the vertex and edge cosets of a realized sequence U.

        U usually comes from `realize`, whose default top subtree is the closed base edge for an amalgam
        and the base vertex alone for an HNN extension; so the circle with the default seed splits with
        ranks (1, 2, 1) in degree 0 and (0, 1, 1) in degree 1.
        Raises RealizationError when a cell over U_r has a boundary coset outside U_{r-1}.
        """
        self._check_complex(C)
        if U.top != C.top:
            raise StructuralError(f"subtree sequence has {U.top + 1} degrees, complex has {C.top + 1}")
        p = self.p
        n = C.top
        D_basis = [self._basis(U[r].edges, C.rank(r)) for r in range(n + 1)]
        if p.is_amalgam:
            C1_basis = [self._basis(U[r].vertices_of(CosetKind.G1), C.rank(r)) for r in range(n + 1)]
            C2_basis = [self._basis(U[r].vertices_of(CosetKind.G2), C.rank(r)) for r in range(n + 1)]
        else:
            C1_basis = [self._basis(U[r].vertices, C.rank(r)) for r in range(n + 1)]
            C2_basis = None

        D = self._restricted(C, D_basis, CosetKind.H, self.rings["H"])
        C1 = self._restricted(C, C1_basis, CosetKind.G1, self.rings["G1"])
        C2 = self._restricted(C, C2_basis, CosetKind.G2, self.rings["G2"]) if C2_basis is not None else None

        ends = {e: self.endpoint_factors(e) for r in range(n + 1) for e in U[r].edges}
        e1 = self._incidence_map(D, C1, D_basis, C1_basis, lambda e: [ends[e][0]])
        e2 = self._incidence_map(D, C2 if C2 is not None else C1, D_basis, C2_basis or C1_basis, lambda e: [ends[e][1]])
        f1 = self._projection(C1, C, C1_basis)
        f2 = self._projection(C2, C, C2_basis) if C2 is not None else None

        bases = {"D": tuple(D_basis), "C1": tuple(C1_basis)}
        if C2_basis is not None:
            bases["C2"] = tuple(C2_basis)
        logger.info(
            f"Splitting of {p.name}: ranks D={D.ranks}, C1={C1.ranks}" + (f", C2={C2.ranks}" if C2 is not None else "") + f", C={C.ranks}"
        )
        return MVSplitting(p.name, C, U, D, C1, C2, e1, e2, f1, f2, bases)

    # derived maps over Z[G]

    def twisted_e2(self, S: MVSplitting) -> ChainMap:
        """The Z[G] chain map of the second end: e2 itself, or t·e2 for an HNN extension."""
        if self.p.is_amalgam:
            return S.e2
        t = self.p.stable(1)
        return ChainMap(S.e2.source, S.e2.target, tuple(self.ring.left_translate_matrix(t, m) for m in S.e2.matrices))

    def middle_map(self, S: MVSplitting) -> List[RingMatrix]:
        """e = [e1 | e2] (amalgam) or e1 − t·e2 (hnn), per degree."""
        ring = self.ring
        e2 = self.twisted_e2(S)
        if self.p.is_amalgam:
            return [ring.block([[S.e1.matrices[r], S.e2.matrices[r]]]) if S.D.rank(r) else ring.zero_matrix(0, S.C1.rank(r) + S.C2.rank(r))
                    for r in range(S.complex.top + 1)]
        return [ring.msub(S.e1.matrices[r], e2.matrices[r]) for r in range(S.complex.top + 1)]

    def outer_map(self, S: MVSplitting) -> List[RingMatrix]:
        """f = [f1; −f2] (amalgam) or f1 (hnn), per degree."""
        ring = self.ring
        if not self.p.is_amalgam:
            return list(S.f1.matrices)
        out = []
        for r in range(S.complex.top + 1):
            c = S.complex.rank(r)
            top = S.f1.matrices[r] if S.C1.rank(r) else ring.zero_matrix(0, c)
            bottom = ring.mneg(S.f2.matrices[r]) if S.C2.rank(r) else ring.zero_matrix(0, c)
            out.append(ring.block([[top], [bottom]]))
        return out

    # verification

    def verify_splitting(self, S: MVSplitting) -> VerificationReport:
        p, ring = self.p, self.ring
        report = VerificationReport()
        C, U = S.complex, S.U
        n = C.top
        if U.top != n:
            report.add("rank", f"{U.top + 1} subtrees for a complex with {n + 1} degrees")
            return report

        for r in range(n + 1):
            report.extend(self.tree.validate_subtree(U[r], r), r)
        if not report.passed:
            return report
        for r, v, w in self.realization_violations(C, U):
            report.add("realization", f"vertex {p.format_key(v)} reaches {p.format_key(w)} outside U_{r - 1}", r)

        pieces = [("D", S.D, "H"), ("C1", S.C1, "G1")] + ([("C2", S.C2, "G2")] if S.C2 is not None else [])
        for name, piece, tag in pieces:
            check = validate_complex(self.rings[tag], piece)
            for violation in check.violations:
                report.add(violation.kind, f"{name}: {violation.detail}", violation.degree)

        maps = [("e1", S.e1), ("e2" if p.is_amalgam else "t·e2", self.twisted_e2(S)), ("f1", S.f1)]
        if S.f2 is not None:
            maps.append(("f2", S.f2))
        for name, f in maps:
            lifted = ChainMap(retag(f.source, ring), retag(f.target, ring), f.matrices)
            report.extend(validate_chain_map(ring, lifted, name))

        try:
            middle, outer = self.middle_map(S), self.outer_map(S)
            for r in range(n + 1):
                spot = ring.first_nonzero(ring.matmul(middle[r], outer[r]))
                if spot is not None:
                    report.add("composition", f"f∘e is nonzero at {spot}", r)
        except StructuralError as exc:
            report.add("composition", f"maps do not compose: {exc}")

        for r in range(n + 1):
            c = C.rank(r)
            v1 = len(U[r].vertices_of(CosetKind.G1))
            expected = [("D", S.D, c * len(U[r].edges)), ("C1", S.C1, c * v1)]
            if S.C2 is not None:
                expected.append(("C2", S.C2, c * len(U[r].vertices_of(CosetKind.G2))))
            for name, piece, rank in expected:
                if piece.rank(r) != rank:
                    report.add("rank", f"{name} has rank {piece.rank(r)}, expected {rank}", r)

        if report.passed:
            self._check_incidence(S, report)
        if report.passed:
            for r in range(n + 1):
                report.extend(tree_exactness(self.tree, U[r], C.rank(r), r), r)
        logger.info(f"Verified splitting of {p.name}: passed={report.passed}, {len(report.violations)} violations")
        return report

    def _check_incidence(self, S: MVSplitting, report: VerificationReport):
        """e and f rescaled by the coset representatives are the incidence maps of U_r."""
        p, ring = self.p, self.ring
        checks = [("e1", S.e1, "D", "C1", 0), ("e2", S.e2, "D", "C2" if S.C2 is not None else "C1", 1)]
        for name, f, src, dst, side in checks:
            for r in range(S.complex.top + 1):
                rows, cols = S.bases[src][r], S.bases[dst][r]
                m = f.matrices[r]
                for i, (edge, k) in enumerate(rows):
                    end, gamma = self.endpoint_factors(edge)[side]
                    for j, (v, l) in enumerate(cols):
                        expected = ring.from_group(gamma) if (v, l) == (end, k) else ring.zero()
                        if m.entries[i][j] != expected:
                            report.add("incidence", f"{name} entry for {p.format_key(edge)} at {p.format_key(v)} is {ring.format(m.entries[i][j])}", r)
                            return
        projections = [("f1", S.f1, "C1")] + ([("f2", S.f2, "C2")] if S.f2 is not None else [])
        for name, f, src in projections:
            for r in range(S.complex.top + 1):
                for i, (v, k) in enumerate(S.bases[src][r]):
                    for l in range(S.complex.rank(r)):
                        expected = ring.from_group(v.rep) if l == k else ring.zero()
                        if f.matrices[r].entries[i][l] != expected:
                            report.add("incidence", f"{name} entry for {p.format_key(v)} is not its representative", r)
                            return

    def splitting_embeds(self, S: MVSplitting, T: MVSplitting) -> bool:
        """S ⊆ T degreewise: nested subtrees, and T's differentials restrict to S's on S's basis."""
        if S.complex != T.complex:
            return False
        for r in range(S.complex.top + 1):
            if not contains(S.U[r], T.U[r]):
                return False
        for name in S.bases:
            small, big = getattr(S, name), getattr(T, name)
            for r in range(1, S.complex.top + 1):
                rows_s, cols_s = S.bases[name][r], S.bases[name][r - 1]
                rows_t = {b: i for i, b in enumerate(T.bases[name][r])}
                cols_t = T.bases[name][r - 1]
                ds, dt = small.differentials[r - 1], big.differentials[r - 1]
                column_index = {b: j for j, b in enumerate(cols_s)}
                for i, b in enumerate(rows_s):
                    if b not in rows_t:
                        return False
                    row_t = dt.entries[rows_t[b]]
                    for j, c in enumerate(cols_t):
                        expected = ds.entries[i][column_index[c]] if c in column_index else None
                        if expected is None:
                            if row_t[j]:
                                return False
                        elif row_t[j] != expected:
                            return False
        return True

    def degree_sequence_ranks(self, S: MVSplitting, r: int) -> Tuple[int, int, int]:
        middle = S.C1.rank(r) + (S.C2.rank(r) if S.C2 is not None else 0)
        return S.D.rank(r), middle, S.complex.rank(r)

    # documents

    def _complex_doc(self, C: ChainComplex) -> ComplexDoc:
        ring = self.rings.get(C.ring, self.ring)
        return ComplexDoc(ring=C.ring, ranks=list(C.ranks), differentials=[ring.serialize_matrix(d) for d in C.differentials])

    def to_doc(self, S: MVSplitting, complex_name: str) -> SplittingDoc:
        fmt = self.p.format_key

        def subtree(s: FiniteSubtree) -> SubtreeDoc:
            return SubtreeDoc(vertices=sorted(fmt(v) for v in s.vertices), edges=sorted(fmt(e) for e in s.edges))

        def maps(f: Optional[ChainMap]):
            return None if f is None else [self.ring.serialize_matrix(m) for m in f.matrices]

        return SplittingDoc(
            presentation=self.p.name,
            complex=complex_name,
            subtrees=[subtree(s) for s in S.U.subtrees],
            D=self._complex_doc(S.D),
            C1=self._complex_doc(S.C1),
            C2=self._complex_doc(S.C2) if S.C2 is not None else None,
            e1=maps(S.e1),
            e2=maps(S.e2),
            f1=maps(S.f1),
            f2=maps(S.f2),
        )

    def _read_complex(self, doc: ComplexDoc) -> ChainComplex:
        if doc.ring not in self.rings:
            raise StructuralError(f"unknown ring {doc.ring!r} for presentation {self.p.name}")
        ring = self.rings[doc.ring]
        diffs = []
        for r, grid in enumerate(doc.differentials, start=1):
            rows = doc.ranks[r] if r < len(doc.ranks) else 0
            diffs.append(ring.parse_matrix(grid, rows, doc.ranks[r - 1]))
        return ChainComplex(ring.tag, tuple(doc.ranks), tuple(diffs))

    def from_doc(self, doc: SplittingDoc, C: ChainComplex) -> MVSplitting:
        """Rebuild a splitting from its document; bases follow the canonical order of the stored subtrees."""
        if doc.presentation != self.p.name:
            raise StructuralError(f"splitting belongs to {doc.presentation}, not {self.p.name}")
        subtrees = []
        for s in doc.subtrees:
            subtrees.append(FiniteSubtree(frozenset(self.p.parse_key(v) for v in s.vertices), frozenset(self.p.parse_key(e) for e in s.edges)))
        U = SubtreeSequence(tuple(subtrees))
        D, C1 = self._read_complex(doc.D), self._read_complex(doc.C1)
        C2 = self._read_complex(doc.C2) if doc.C2 is not None else None
        n = len(subtrees) - 1

        def basis(r: int, keys) -> Basis:
            return self._basis(keys, C.rank(r))

        D_basis = tuple(basis(r, U[r].edges) for r in range(n + 1))
        if self.p.is_amalgam:
            C1_basis = tuple(basis(r, U[r].vertices_of(CosetKind.G1)) for r in range(n + 1))
            C2_basis = tuple(basis(r, U[r].vertices_of(CosetKind.G2)) for r in range(n + 1))
        else:
            C1_basis, C2_basis = tuple(basis(r, U[r].vertices) for r in range(n + 1)), None

        def read_map(grids, source: ChainComplex, target: ChainComplex) -> ChainMap:
            matrices = tuple(self.ring.parse_matrix(g, source.rank(r), target.rank(r)) for r, g in enumerate(grids))
            return ChainMap(source, target, matrices)

        e1 = read_map(doc.e1, D, C1)
        e2 = read_map(doc.e2, D, C2 if C2 is not None else C1)
        f1 = read_map(doc.f1, C1, C)
        f2 = read_map(doc.f2, C2, C) if C2 is not None and doc.f2 is not None else None
        bases = {"D": D_basis, "C1": C1_basis}
        if C2_basis is not None:
            bases["C2"] = C2_basis
        return MVSplitting(self.p.name, C, U, D, C1, C2, e1, e2, f1, f2, bases)
