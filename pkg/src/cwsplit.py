import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx

from src.algsplit import AlgebraicTransversality, MVSplitting, SubtreeSequence
from src.amalgam import CosetKey, CosetKind, NormalForm, Presentation
from src.chain import (
    ChainComplex,
    ChainMap,
    differential,
    double_cylinder_projection,
    double_mapping_cylinder,
    cone_projection,
    identity_map,
    induce_complex,
    map_at,
    mapping_cone,
    quotient_complex,
    retag,
    validate_chain_map,
    validate_complex,
    zero_complex,
    zero_map,
)
from src.config import config
from src.errors import CertificateNotFoundError, ContainmentError, StructuralError, WitnessError
from src.groupring import GroupRing, RingElement, RingMatrix, presentation_ring
from src.groups import BaseElement, BaseGroup, GroupKind, Homomorphism, generates
from src.models.schemas import Verdict, VerificationReport, WitnessSpec
from src.oracle import acyclic_cone, smith, integer_matrix
from src.tree import FiniteSubtree

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EquivariantCW:
    """A G-CW complex given by its cellular chain complex C(W̃), one lifted cell per cell of W."""

    name: str
    complex: ChainComplex
    # cells[r] names the r-cells in basis order
    cells: Tuple[Tuple[str, ...], ...]
    base_cell: str

    @property
    def top(self) -> int:
        return self.complex.top


@dataclass
class PartCertificate:
    part: str
    kind: CosetKind
    nodes: List[Tuple[CosetKey, str]]
    # (tail node, head node, voltage, (coset, 1-cell))
    edges: List[Tuple[int, int, NormalForm, Tuple[CosetKey, str]]]
    spanning: List[int] = field(default_factory=list)
    loops: List[NormalForm] = field(default_factory=list)
    components: int = 0
    generates: bool = True
    euler: int = 0

    @property
    def connected(self) -> bool:
        return self.components <= 1 and self.generates


@dataclass(frozen=True)
class CWDomain:
    U: SubtreeSequence
    # part -> {(coset key, cell name)} over all dimensions
    cells: Dict[str, frozenset]
    certificates: Dict[str, PartCertificate]
    repairs: int = 0
    fundamental: bool = False


@dataclass(frozen=True)
class SvKSplitting:
    cw: EquivariantCW
    domain: CWDomain
    splitting: MVSplitting
    splitting_report: VerificationReport
    # quotient cells per part, plus the cylinder cells Y(U) × [0,1]
    quotient_cells: Dict[str, Tuple[Tuple[str, ...], ...]]
    cylinder: ChainComplex
    projection: ChainMap
    projection_report: VerificationReport
    verdict: Verdict
    euler: Dict[str, int] = field(default_factory=dict)


@dataclass(frozen=True)
class KernelData:
    hom: Homomorphism
    kernel_words: Optional[Tuple[str, ...]] = None
    witnesses: Optional[WitnessSpec] = None


@dataclass(frozen=True)
class PlusConstructionData:
    source: ChainComplex
    plus: ChainComplex
    relative: ChainComplex
    inclusion: ChainMap
    kernel: Tuple[str, ...]
    witnesses_verified: bool
    attaching_cycles: Optional[Tuple[Tuple[Tuple[Tuple[int, str], ...], ...], ...]]
    verdict: Verdict
    relative_factors: Tuple[int, ...] = ()


@dataclass(frozen=True)
class RefinedSplitting:
    pieces: Dict[str, PlusConstructionData]
    complex: ChainComplex
    inclusion: ChainMap
    report: VerificationReport
    verdict: Verdict


def _parts(p: Presentation) -> List[Tuple[str, CosetKind]]:
    if p.is_amalgam:
        return [("X1", CosetKind.G1), ("X2", CosetKind.G2), ("Y", CosetKind.H)]
    return [("X1", CosetKind.G1), ("Y", CosetKind.H)]


def _keys(U: FiniteSubtree, kind: CosetKind) -> List[CosetKey]:
    return list(U.edges) if kind == CosetKind.H else U.vertices_of(kind)


class CombinatorialTransversality:
    def __init__(self, presentation: Presentation):
        self.p = presentation
        self.alg = AlgebraicTransversality(presentation)
        self.tree = self.alg.tree
        self.ring = self.alg.ring

    def __repr__(self) -> str:
        return f"CombinatorialTransversality({self.p.name})"

    def _factor_group(self, kind: CosetKind) -> BaseGroup:
        return {CosetKind.G1: self.p.G1, CosetKind.G2: self.p.G2, CosetKind.H: self.p.H}[kind]

    # one-cells as pairs of signed endpoint lifts

    def _one_cells(self, W: EquivariantCW) -> List[Tuple[str, Optional[Tuple[NormalForm, str]], Optional[Tuple[NormalForm, str]]]]:
        if W.top < 1:
            return []
        d1 = W.complex.differentials[0]
        cells = []
        for i, name in enumerate(W.cells[1]):
            plus = minus = None
            for j, x in enumerate(d1.entries[i]):
                for g, c in x.terms:
                    if c == 1 and plus is None:
                        plus = (g, W.cells[0][j])
                    elif c == -1 and minus is None:
                        minus = (g, W.cells[0][j])
            cells.append((name, plus, minus))
        return cells

    def validate_cw(self, W: EquivariantCW) -> VerificationReport:
        report = validate_complex(self.ring, W.complex)
        if not report.passed:
            return report
        if len(W.cells) != W.top + 1 or any(len(W.cells[r]) != W.complex.rank(r) for r in range(W.top + 1)):
            report.add("complex", "cell names do not match the ranks")
            return report
        if W.base_cell not in (W.cells[0] if W.cells else ()):
            report.add("complex", f"base cell {W.base_cell!r} is not a 0-cell")
        if W.top >= 1:
            d1 = W.complex.differentials[0]
            for i, name in enumerate(W.cells[1]):
                terms = [c for x in d1.entries[i] for _, c in x.terms]
                if sum(terms) != 0:
                    report.add("complex", f"1-cell {name}: boundary has augmentation {sum(terms)}", 1)
                elif terms and sorted(terms) != [-1, 1]:
                    report.add("complex", f"1-cell {name}: boundary is not a difference of two 0-cells", 1)
        graph = nx.MultiGraph()
        graph.add_nodes_from(W.cells[0] if W.cells else ())
        for name, plus, minus in self._one_cells(W):
            if plus is not None and minus is not None:
                graph.add_edge(plus[1], minus[1], key=name)
        if graph.number_of_nodes() and not nx.is_connected(graph):
            report.add("complex", f"orbit 1-skeleton has {nx.number_connected_components(graph)} components", 1)
        return report

    # domains

    def domain_cells(self, W: EquivariantCW, U: SubtreeSequence) -> Dict[str, frozenset]:
        return {
            part: frozenset((c, cell) for r in range(W.top + 1) for c in _keys(U[r], kind) for cell in W.cells[r])
            for part, kind in _parts(self.p)
        }

    def certify_part(self, W: EquivariantCW, U: SubtreeSequence, part: str, kind: CosetKind) -> PartCertificate:
        p = self.p
        nodes = [(c, a) for c in sorted(_keys(U[0], kind), key=p.key_sort) for a in W.cells[0]]
        index = {node: i for i, node in enumerate(nodes)}

        def locate(g: NormalForm, a: str) -> Tuple[int, NormalForm]:
            c = p.coset_key(g, kind)
            if (c, a) not in index:
                index[(c, a)] = len(nodes)
                nodes.append((c, a))
            return index[(c, a)], p.nf_multiply(g, p.nf_invert(c.rep))

        edges = []
        if W.top >= 1:
            for c in sorted(_keys(U[1], kind), key=p.key_sort):
                for name, plus, minus in self._one_cells(W):
                    if plus is None or minus is None:
                        continue
                    u, mu_plus = locate(p.nf_multiply(c.rep, plus[0]), plus[1])
                    v, mu_minus = locate(p.nf_multiply(c.rep, minus[0]), minus[1])
                    edges.append((u, v, p.nf_multiply(p.nf_invert(mu_plus), mu_minus), (c, name)))

        cert = PartCertificate(part, kind, nodes, edges)
        dims = [len(_keys(U[r], kind)) * W.complex.rank(r) for r in range(W.top + 1)]
        cert.euler = sum((-1) ** r * n for r, n in enumerate(dims))
        if not nodes:
            return cert

        graph = nx.MultiGraph()
        graph.add_nodes_from(range(len(nodes)))
        for k, (u, v, _, _) in enumerate(edges):
            graph.add_edge(u, v, key=k)
        cert.components = nx.number_connected_components(graph)
        cert.spanning = sorted(k for _, _, k in nx.minimum_spanning_edges(graph, algorithm="kruskal", keys=True, data=False))

        potential: Dict[int, NormalForm] = {}
        adjacency: Dict[int, List[Tuple[int, NormalForm]]] = {i: [] for i in range(len(nodes))}
        for k in cert.spanning:
            u, v, lam, _ = edges[k]
            adjacency[u].append((v, lam))
            adjacency[v].append((u, p.nf_invert(lam)))
        for root in range(len(nodes)):
            if root in potential:
                continue
            potential[root] = p.identity()
            queue = deque([root])
            while queue:
                u = queue.popleft()
                for v, lam in adjacency[u]:
                    if v not in potential:
                        potential[v] = p.nf_multiply(potential[u], lam)
                        queue.append(v)
        spanning = set(cert.spanning)
        for k, (u, v, lam, _) in enumerate(edges):
            if k in spanning:
                continue
            loop = p.nf_multiply(p.nf_multiply(potential[u], lam), p.nf_invert(potential[v]))
            cert.loops.append(loop)
        group = self._factor_group(kind)
        cert.generates = generates(group, [p.to_factor(g, kind) for g in cert.loops])
        logger.debug(
            f"Part {part}: {len(nodes)} nodes, {len(edges)} edges, {cert.components} components, generates={cert.generates}"
        )
        return cert

    def certify(self, W: EquivariantCW, U: SubtreeSequence) -> Dict[str, PartCertificate]:
        return {part: self.certify_part(W, U, part, kind) for part, kind in _parts(self.p)}

    def verify_certificate(self, W: EquivariantCW, cert: PartCertificate) -> bool:
        """Re-check a certificate: every edge is a lifted 1-cell joining its nodes, and loops generate."""
        p = self.p
        cells = {name: (plus, minus) for name, plus, minus in self._one_cells(W)}
        for u, v, lam, (c, name) in cert.edges:
            plus, minus = cells[name]
            g_plus, g_minus = p.nf_multiply(c.rep, plus[0]), p.nf_multiply(c.rep, minus[0])
            if (p.coset_key(g_plus, cert.kind), plus[1]) != cert.nodes[u]:
                return False
            if (p.coset_key(g_minus, cert.kind), minus[1]) != cert.nodes[v]:
                return False
            mu_plus = p.nf_multiply(g_plus, p.nf_invert(cert.nodes[u][0].rep))
            mu_minus = p.nf_multiply(g_minus, p.nf_invert(cert.nodes[v][0].rep))
            if p.nf_multiply(p.nf_invert(mu_plus), mu_minus) != lam:
                return False
        if not cert.nodes:
            return True
        group = self._factor_group(cert.kind)
        return generates(group, [p.to_factor(g, cert.kind) for g in cert.loops]) == cert.generates

    def _search(self, W: EquivariantCW, start: Tuple[NormalForm, str], goal: Tuple[NormalForm, str]) -> List[Tuple[int, NormalForm, str]]:
        """Cells (dimension, translate, name) of an edge path in the 1-skeleton of W̃."""
        p = self.p
        cells = [(name, plus, minus) for name, plus, minus in self._one_cells(W) if plus is not None and minus is not None]
        parent: Dict[Tuple[NormalForm, str], Optional[Tuple[Tuple[NormalForm, str], NormalForm, str]]] = {start: None}
        queue = deque([start])
        while queue:
            node = queue.popleft()
            if node == goal:
                path = []
                while parent[node] is not None:
                    previous, h, name = parent[node]
                    path += [(0, node[0], node[1]), (1, h, name)]
                    node = previous
                path.append((0, node[0], node[1]))
                return list(reversed(path))
            if len(parent) > config.witness_search_bound:
                break
            x, a = node
            for name, (g_plus, a_plus), (g_minus, a_minus) in cells:
                for (g_here, a_here), (g_there, a_there) in (((g_plus, a_plus), (g_minus, a_minus)), ((g_minus, a_minus), (g_plus, a_plus))):
                    if a_here != a:
                        continue
                    h = p.nf_multiply(x, p.nf_invert(g_here))
                    nxt = (p.nf_multiply(h, g_there), a_there)
                    if nxt not in parent:
                        parent[nxt] = (node, h, name)
                        queue.append(nxt)
        raise CertificateNotFoundError(
            f"no path from {p.format(start[0])}·{start[1]} to {p.format(goal[0])}·{goal[1]} within {config.witness_search_bound} lifted cells"
        )

    def _repair_targets(self, W: EquivariantCW, cert: PartCertificate) -> Dict[int, List[CosetKey]]:
        p = self.p
        graph = nx.MultiGraph()
        graph.add_nodes_from(range(len(cert.nodes)))
        for u, v, _, _ in cert.edges:
            graph.add_edge(u, v)
        base_c, base_a = cert.nodes[0]
        start = (base_c.rep, base_a)
        goals = []
        for component in nx.connected_components(graph):
            if 0 not in component:
                c, a = cert.nodes[min(component)]
                goals.append((c.rep, a))
        if not goals and not cert.generates:
            group = self._factor_group(cert.kind)
            for gen in group.generator_elements():
                goals.append((p.nf_multiply(p.embed(cert.kind, gen), base_c.rep), base_a))
        targets: Dict[int, List[CosetKey]] = {0: [], 1: []}
        for goal in goals:
            for dim, g, _ in self._search(W, start, goal):
                targets[dim].append(p.coset_key(g, cert.kind))
        return targets

    def cw_realize(self, W: EquivariantCW, seed: Optional[FiniteSubtree] = None) -> CWDomain:
        report = self.validate_cw(W)
        if not report.passed:
            raise StructuralError(f"{W.name} is not a valid equivariant CW complex: {report.first.detail}")
        C = W.complex
        U = self.alg.realize(C, seed)
        for round_ in range(config.max_repair_rounds + 1):
            certificates = self.certify(W, U)
            failing = [cert for cert in certificates.values() if cert.nodes and not cert.connected]
            if not failing:
                fundamental = all(len(U[r].vertices) == 1 or (len(U[r].vertices) == 2 and len(U[r].edges) == 1) for r in range(C.top + 1))
                logger.info(f"Domains of {W.name} connected after {round_} repair rounds")
                return CWDomain(U, self.domain_cells(W, U), certificates, round_, fundamental)
            if round_ == config.max_repair_rounds:
                break
            targets: Dict[int, List[CosetKey]] = {}
            for cert in failing:
                for dim, keys in self._repair_targets(W, cert).items():
                    if dim <= C.top:
                        targets.setdefault(dim, []).extend(keys)
            logger.debug(f"Repair round {round_ + 1} for parts {[c.part for c in failing]}")
            U = self.alg.extend_sequence(C, U, targets)
        raise CertificateNotFoundError(f"domains of {W.name} still disconnected after {config.max_repair_rounds} repair rounds")

    # Seifert–van Kampen splitting

    def quotient_cells(self, W: EquivariantCW, domain: CWDomain) -> Dict[str, Tuple[Tuple[str, ...], ...]]:
        fmt = self.p.format_key
        out = {}
        for part, kind in _parts(self.p):
            out[part] = tuple(
                tuple(f"{fmt(c)}/{cell}" for c in sorted(_keys(domain.U[r], kind), key=self.p.key_sort) for cell in W.cells[r])
                for r in range(W.top + 1)
            )
        y = out["Y"]
        out["Y×I"] = tuple(() if r == 0 else tuple(f"{name}×I" for name in y[r - 1]) for r in range(W.top + 2))
        return out

    def build_svk(self, W: EquivariantCW, domain: CWDomain, window: Optional[int] = None) -> SvKSplitting:
        window = config.window if window is None else window
        for cert in domain.certificates.values():
            if not self.verify_certificate(W, cert) or (cert.nodes and not cert.connected):
                raise StructuralError(f"certificate for part {cert.part} does not verify")
        ring, C = self.ring, W.complex
        S = self.alg.build_splitting(C, domain.U)
        report = self.alg.verify_splitting(S)
        D, C1 = retag(S.D, ring), retag(S.C1, ring)
        f1 = ChainMap(C1, C, S.f1.matrices)
        if self.p.is_amalgam:
            C2 = retag(S.C2, ring)
            e1 = ChainMap(D, C1, S.e1.matrices)
            e2 = ChainMap(D, C2, S.e2.matrices)
            cylinder = double_mapping_cylinder(ring, e1, e2)
            M = cylinder.complex
            projection = double_cylinder_projection(ring, cylinder, f1, ChainMap(C2, C, S.f2.matrices))
        else:
            middle = ChainMap(D, C1, tuple(self.alg.middle_map(S)))
            M = mapping_cone(ring, middle)
            projection = cone_projection(ring, middle, f1)
        projection_report = validate_complex(ring, M)
        projection_report.extend(validate_chain_map(ring, projection, "f̃"))
        verdict = acyclic_cone(ring, projection, window)
        euler = {part: cert.euler for part, cert in domain.certificates.items()}
        logger.info(f"SvK splitting of {W.name}: cylinder ranks {M.ranks}, cone verdict {verdict.verdict}")
        return SvKSplitting(W, domain, S, report, self.quotient_cells(W, domain), M, projection, projection_report, verdict, euler)

    def cell_count_identity(self, W: EquivariantCW, domain: CWDomain) -> bool:
        """Per dimension, cells of W/G = cells of X1 + cells of X2 − cells of Y (no X2 for an HNN extension).

        Only a fundamental domain, with every U_r a single vertex or a single edge, decomposes W/G this way.
        """
        if not domain.fundamental:
            return False
        dims = {name: r for r in range(W.top + 1) for name in W.cells[r]}
        signs = {"X1": 1, "X2": 1, "Y": -1}
        counts = [0] * (W.top + 1)
        for part, cells in domain.cells.items():
            for _, name in cells:
                if name not in dims:
                    return False
                counts[dims[name]] += signs[part]
        for r in range(W.top + 1):
            if counts[r] != len(W.cells[r]):
                logger.debug(f"{W.name}: {counts[r]} quotient cells in dimension {r}, expected {len(W.cells[r])}")
                return False
        return True

    # injective refinement

    def _base_piece(self, complex_: ChainComplex, kind: CosetKind) -> Tuple[GroupRing, ChainComplex]:
        source = presentation_ring(self.p, kind.value)
        target = GroupRing(self._factor_group(kind))
        return target, induce_complex(complex_, source, lambda g: self.p.to_factor(g, kind), target)

    def _place(self, y_words: List[BaseElement], x_words: List[BaseElement], psi: Optional[Homomorphism], piece: str) -> List[Tuple[int, int, int]]:
        """(j, k, ±1) with ψ(y_j) = x_k^±1."""
        if not y_words:
            return []
        if psi is None:
            raise ContainmentError(f"no map from the fundamental group of Y into that of {piece}")
        placed = []
        for j, y in enumerate(y_words):
            image = psi.apply(y)
            if image in x_words:
                placed.append((j, x_words.index(image), 1))
            elif psi.target.invert(image) in x_words:
                placed.append((j, x_words.index(psi.target.invert(image)), -1))
            else:
                raise ContainmentError(f"image {psi.target.format(image)} of {psi.source.format(y)} is not a kernel word of {piece}")
        return placed

    def _extend_map(self, old: Sequence[RingMatrix], source: ChainComplex, target: ChainComplex, n_src: int, n_dst: int,
                    extra: Dict[Tuple[int, int], RingElement]) -> ChainMap:
        """The old matrices on the old cells and `extra` between the attached cells of degrees 2 and 3."""
        ring = self.ring
        z = ring.zero_matrix
        matrices = []
        for r in range(source.top + 1):
            attached_src = n_src if r in (2, 3) else 0
            attached_dst = n_dst if r in (2, 3) else 0
            rows, cols = source.rank(r) - attached_src, target.rank(r) - attached_dst
            base = old[r] if r < len(old) else z(rows, cols)
            if not attached_src and not attached_dst:
                matrices.append(base)
                continue
            grid = [[extra.get((j, k), ring.zero()) for k in range(attached_dst)] for j in range(attached_src)]
            matrices.append(ring.block([
                [base, z(rows, attached_dst)],
                [z(attached_src, cols), ring.matrix(grid, attached_src, attached_dst)],
            ]))
        return ChainMap(source, target, tuple(matrices))

    def injective_refine(self, S: SvKSplitting, kernels: Dict[str, KernelData], maps: Dict[str, Homomorphism],
                         window: Optional[int] = None) -> RefinedSplitting:
        """Attach cell pairs killing the kernels onto H and G_i, then rebuild the cylinder over Z[G]."""
        window = config.window if window is None else window
        p, ring = self.p, self.ring
        split = S.splitting
        pieces = {"Y": (split.D, CosetKind.H), "X1": (split.C1, CosetKind.G1)}
        if p.is_amalgam:
            pieces["X2"] = (split.C2, CosetKind.G2)
        missing = [name for name in pieces if name not in kernels]
        if missing:
            raise StructuralError(f"no kernel data for {', '.join(missing)}")
        for name, (_, kind) in pieces.items():
            group = self._factor_group(kind)
            if kernels[name].hom.target.name != group.name:
                raise StructuralError(f"kernel data for {name} maps onto {kernels[name].hom.target.name}, not {group.name}")

        words = {name: verify_kernel(kernels[name]) for name in pieces}
        # for an HNN extension both ends of Y land in X1
        ends = {"X1": "X1", "X2": "X2" if p.is_amalgam else "X1"}
        placement = {end: self._place(words["Y"], words[piece], maps.get(end), piece) for end, piece in ends.items()}

        refined: Dict[str, PlusConstructionData] = {}
        for name, (complex_, kind) in pieces.items():
            base_ring, base = self._base_piece(complex_, kind)
            refined[name] = _plus_data(base_ring, base, kernels[name], words[name], window)

        n = {name: len(words[name]) for name in pieces}
        D, C1 = retag(split.D, ring), retag(split.C1, ring)
        D_new, incD = attach_cells(ring, D, n["Y"])
        C1_new, incC1 = attach_cells(ring, C1, n["X1"])
        report = VerificationReport()
        if p.is_amalgam:
            C2 = retag(split.C2, ring)
            C2_new, incC2 = attach_cells(ring, C2, n["X2"])
            e1 = self._extend_map(split.e1.matrices, D_new, C1_new, n["Y"], n["X1"],
                                  {(j, k): ring.scalar(s) for j, k, s in placement["X1"]})
            e2 = self._extend_map(split.e2.matrices, D_new, C2_new, n["Y"], n["X2"],
                                  {(j, k): ring.scalar(s) for j, k, s in placement["X2"]})
            report.extend(validate_chain_map(ring, e1, "e1'"))
            report.extend(validate_chain_map(ring, e2, "e2'"))
            old = double_mapping_cylinder(ring, ChainMap(D, C1, split.e1.matrices), ChainMap(D, C2, split.e2.matrices))
            new = double_mapping_cylinder(ring, e1, e2)
            M, M_new = old.complex, new.complex
            blocks_old, blocks_new = old.blocks, new.blocks
            parts = [(incC1, 0), (incD, -1), (incC2, 0)]
        else:
            t = p.stable(1)
            extra: Dict[Tuple[int, int], RingElement] = {}
            for j, k, s in placement["X1"]:
                extra[(j, k)] = ring.add(extra.get((j, k), ring.zero()), ring.scalar(s))
            for j, k, s in placement["X2"]:
                extra[(j, k)] = ring.sub(extra.get((j, k), ring.zero()), ring.from_group(t, s))
            middle = self.alg.middle_map(split)
            e = self._extend_map(middle, D_new, C1_new, n["Y"], n["X1"], extra)
            report.extend(validate_chain_map(ring, e, "e'"))
            M = mapping_cone(ring, ChainMap(D, C1, tuple(middle)))
            M_new = mapping_cone(ring, e)
            blocks_old = tuple((C1.rank(r), D.rank(r - 1)) for r in range(M.top + 1))
            blocks_new = tuple((C1_new.rank(r), D_new.rank(r - 1)) for r in range(M_new.top + 1))
            parts = [(incC1, 0), (incD, -1)]
        report.extend(validate_complex(ring, M_new))

        matrices = []
        for r in range(M.top + 1):
            rows = []
            for b, (inc, shift) in enumerate(parts):
                rows.append([
                    map_at(ring, inc, r + shift) if b == b2 else ring.zero_matrix(blocks_old[r][b], blocks_new[r][b2])
                    for b2 in range(len(parts))
                ])
            matrices.append(ring.block(rows))
        inclusion = ChainMap(M, M_new, tuple(matrices))
        report.extend(validate_chain_map(ring, inclusion, "incl"))
        verdict = _relative_verdict(ring, inclusion, window)
        logger.info(f"Injective refinement of {S.cw.name}: attached {n} cell pairs, cone verdict {verdict.verdict}")
        return RefinedSplitting(refined, M_new, inclusion, report, verdict)


def attach_cells(ring: GroupRing, K: ChainComplex, n: int) -> Tuple[ChainComplex, ChainMap]:
    """K ⊕ (Z[Π]^n in degree 3 --identity--> Z[Π]^n in degree 2), with the inclusion of K."""
    if n == 0:
        return K, identity_map(ring, K)
    top = max(K.top, 3)
    ranks = [K.rank(r) + (n if r in (2, 3) else 0) for r in range(top + 1)]
    z = ring.zero_matrix
    diffs = []
    for r in range(1, top + 1):
        d = differential(ring, K, r)
        if r == 2:
            diffs.append(ring.block([[d], [z(n, K.rank(1))]]))
        elif r == 3:
            diffs.append(ring.block([[d, z(K.rank(3), n)], [z(n, K.rank(2)), ring.identity_matrix(n)]]))
        elif r == 4:
            diffs.append(ring.block([[d, z(K.rank(4), n)]]))
        else:
            diffs.append(d)
    plus = ChainComplex(ring.tag, tuple(ranks), tuple(diffs))
    inclusion = []
    for r in range(K.top + 1):
        extra = n if r in (2, 3) else 0
        inclusion.append(ring.block([[ring.identity_matrix(K.rank(r)), z(K.rank(r), extra)]]))
    return plus, ChainMap(K, plus, tuple(inclusion))


def _relative_verdict(ring: GroupRing, inclusion: ChainMap, window: int) -> Verdict:
    # the cone of a cellular inclusion is equivalent to the quotient by its image
    quotient = quotient_complex(ring, inclusion)
    return acyclic_cone(ring, zero_map(ring, zero_complex(ring), quotient), window)


def relative_complex(ring: GroupRing, n: int) -> ChainComplex:
    z = ring.zero_matrix
    return ChainComplex(ring.tag, (0, 0, n, n), (z(0, 0), z(n, 0), ring.identity_matrix(n)))


def verify_witnesses(phi: Homomorphism, witnesses: WitnessSpec) -> List[BaseElement]:
    """Check the lifts, images and relators; return the kernel words {v_i(h')·g_i⁻¹} ∪ {w_k(h')}."""
    source, target = phi.source, phi.target
    lifts: Dict[str, BaseElement] = {}
    for symbol in target.generators:
        if symbol not in witnesses.lifts:
            raise WitnessError(symbol, f"no lift for generator of {target.name}")
        lift = source.parse(witnesses.lifts[symbol])
        if phi.apply(lift) != target.letter(symbol):
            raise WitnessError(witnesses.lifts[symbol], f"lift does not map to {symbol}")
        lifts[symbol] = lift
    kernel = []
    for symbol in source.generators:
        if symbol not in witnesses.images:
            raise WitnessError(symbol, f"no image word for generator of {source.name}")
        word = witnesses.images[symbol]
        if target.parse(word) != phi.apply(source.letter(symbol)):
            raise WitnessError(word, f"image word of {symbol} does not evaluate to its image")
        kernel.append(source.op(target.evaluate(word, lifts, source), source.invert(source.letter(symbol))))
    for word in witnesses.relators:
        if not target.is_identity(target.parse(word)):
            raise WitnessError(word, f"relator is not trivial in {target.name}")
        kernel.append(target.evaluate(word, lifts, source))
    return [x for x in kernel if not source.is_identity(x)]


def verify_kernel(data: KernelData) -> List[BaseElement]:
    phi = data.hom
    source, target = phi.source, phi.target
    if not generates(target, [phi.apply(g) for g in source.generator_elements()]):
        raise WitnessError(phi.name, f"homomorphism is not onto {target.name}")
    if data.kernel_words is not None:
        kernel = [source.parse(word) for word in data.kernel_words]
        if data.witnesses is not None:
            verify_witnesses(phi, data.witnesses)
    elif data.witnesses is not None:
        kernel = verify_witnesses(phi, data.witnesses)
    else:
        raise WitnessError(phi.name, "neither kernel words nor witnesses given")
    for x in kernel:
        if not target.is_identity(phi.apply(x)):
            raise WitnessError(source.format(x), f"word does not lie in the kernel of {phi.name}")
    return kernel


def _plus_data(ring: GroupRing, K: ChainComplex, data: KernelData, kernel: List[BaseElement], window: int,
               cycles=None) -> PlusConstructionData:
    n = len(kernel)
    plus, inclusion = attach_cells(ring, K, n)
    relative = relative_complex(ring, n)
    _, factors = smith(integer_matrix([[1 if i == j else 0 for j in range(n)] for i in range(n)], (n, n)))
    verdict = _relative_verdict(ring, inclusion, window)
    source = data.hom.source
    return PlusConstructionData(
        K, plus, relative, inclusion, tuple(source.format(x) for x in kernel), data.witnesses is not None, cycles, verdict, tuple(factors)
    )


def plus_construction(K: ChainComplex, data: KernelData, window: Optional[int] = None) -> PlusConstructionData:
    """Chain-level plus construction of K over Z[π] along φ: π -> Π."""
    window = config.window if window is None else window
    phi = data.hom
    source_ring, target_ring = GroupRing(phi.source), GroupRing(phi.target)
    if K.ring != source_ring.tag:
        raise StructuralError(f"complex over Z[{K.ring}] for a map out of {phi.source.name}")
    kernel = verify_kernel(data)
    pushed = induce_complex(K, source_ring, phi.apply, target_ring)
    cycles = None
    if phi.source.kind == GroupKind.FREE and K.rank(1) == phi.source.rank:
        cycles = tuple(
            tuple(tuple(target_ring.serialize(source_ring.map_through(source_ring.fox_derivative(x, i), phi.apply, target_ring)))
                  for i in range(1, phi.source.rank + 1))
            for x in kernel
        )
    result = _plus_data(target_ring, pushed, data, kernel, window, cycles)
    logger.info(f"Plus construction along {phi.name}: {len(kernel)} cell pairs, cone verdict {result.verdict.verdict}")
    return result
