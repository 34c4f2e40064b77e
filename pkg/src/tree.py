import logging
from collections import deque
from dataclasses import dataclass, field
from typing import FrozenSet, Iterable, List, Optional, Set, Tuple

import networkx as nx

from src.amalgam import CosetKey, CosetKind, NormalForm, Presentation
from src.groups import BaseElement, BaseGroup
from src.models.schemas import VerificationReport

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FiniteSubtree:
    vertices: FrozenSet[CosetKey] = field(default_factory=frozenset)
    edges: FrozenSet[CosetKey] = field(default_factory=frozenset)

    def __contains__(self, item: CosetKey) -> bool:
        return item in (self.vertices if item.is_vertex else self.edges)

    def vertices_of(self, kind: CosetKind) -> List[CosetKey]:
        return [v for v in self.vertices if v.kind == kind]

    def union(self, other: "FiniteSubtree") -> "FiniteSubtree":
        return FiniteSubtree(self.vertices | other.vertices, self.edges | other.edges)


def contains(inner: FiniteSubtree, outer: FiniteSubtree) -> bool:
    return inner.vertices <= outer.vertices and inner.edges <= outer.edges


def factor_elements(group: BaseGroup, radius: int) -> List[BaseElement]:
    """Elements of a base group within word length `radius` of the identity (all of them if finite)."""
    if group.is_finite:
        return group.elements()
    seen = {group.identity()}
    frontier = [group.identity()]
    steps = [g for s in group.generator_elements() for g in (s, group.invert(s))]
    for _ in range(radius):
        grown = []
        for x in frontier:
            for s in steps:
                y = group.op(x, s)
                if y not in seen:
                    seen.add(y)
                    grown.append(y)
        frontier = grown
    return sorted(seen, key=group.sort_key)


class BassSerreTree:
    """Vertices G_i·g and edges H·g of the tree of a presentation, with the right G-action."""

    def __init__(self, presentation: Presentation):
        self.p = presentation

    def __repr__(self) -> str:
        return f"BassSerreTree({self.p.name})"

    def base_vertex(self) -> CosetKey:
        return self.p.coset_key(self.p.identity(), CosetKind.G1)

    def base_edge(self) -> CosetKey:
        return self.p.coset_key(self.p.identity(), CosetKind.H)

    def base_subtree(self) -> FiniteSubtree:
        return self.hull([self.base_edge()])

    def vertex(self, g: NormalForm, kind: CosetKind = CosetKind.G1) -> CosetKey:
        return self.p.coset_key(g, kind)

    def edge(self, g: NormalForm) -> CosetKey:
        return self.p.coset_key(g, CosetKind.H)

    def endpoints(self, e: CosetKey) -> Tuple[CosetKey, CosetKey]:
        g = e.rep
        if self.p.is_amalgam:
            return self.p.coset_key(g, CosetKind.G1), self.p.coset_key(g, CosetKind.G2)
        # H·g joins G1·g and G1·t⁻¹g
        return self.p.coset_key(g, CosetKind.G1), self.p.coset_key(self.p.nf_multiply(self.p.stable(-1), g), CosetKind.G1)

    def act(self, x: CosetKey, g: NormalForm) -> CosetKey:
        return self.p.coset_key(self.p.nf_multiply(x.rep, g), x.kind)

    def act_subtree(self, s: FiniteSubtree, g: NormalForm) -> FiniteSubtree:
        return FiniteSubtree(frozenset(self.act(v, g) for v in s.vertices), frozenset(self.act(e, g) for e in s.edges))

    def neighbours(self, v: CosetKey, spread: int = 1) -> List[Tuple[CosetKey, CosetKey]]:
        """(edge, far endpoint) pairs at v; for infinite index only cosets of reps within word length `spread`."""
        p = self.p
        g = v.rep
        pairs: List[Tuple[CosetKey, CosetKey]] = []
        if p.is_amalgam:
            tag = 1 if v.kind == CosetKind.G1 else 2
            group = p.factor_group(tag)
            other = CosetKind.G2 if tag == 1 else CosetKind.G1
            edges: Set[CosetKey] = set()
            for gamma in factor_elements(group, spread):
                edges.add(p.coset_key(p.nf_multiply(p.embed(v.kind, gamma), g), CosetKind.H))
            for e in edges:
                pairs.append((e, p.coset_key(e.rep, other)))
        else:
            edges = set()
            for gamma in factor_elements(p.G1, spread):
                x = p.nf_multiply(p.embed(CosetKind.G1, gamma), g)
                edges.add(p.coset_key(x, CosetKind.H))
                edges.add(p.coset_key(p.nf_multiply(p.stable(1), x), CosetKind.H))
            for e in edges:
                a, b = self.endpoints(e)
                pairs.append((e, b if a == v else a))
        return sorted(pairs, key=lambda pair: p.key_sort(pair[0]))

    def root_path(self, v: CosetKey) -> List[CosetKey]:
        """Alternating vertex/edge path from v down to the base vertex G1·e."""
        p = self.p
        path = [v]
        current = v
        while True:
            w = current.rep
            if not w.syllables:
                if current.kind == CosetKind.G2:
                    path += [self.base_edge(), self.base_vertex()]
                return path
            if p.is_amalgam:
                other = CosetKind.G2 if current.kind == CosetKind.G1 else CosetKind.G1
                edge = p.coset_key(w, CosetKind.H)
                nxt = p.coset_key(w, other)
            else:
                eps, s = w.syllables[0]
                tail = NormalForm(p.name, s, w.syllables[1:])
                edge = p.coset_key(tail if eps == -1 else w, CosetKind.H)
                nxt = p.coset_key(tail, CosetKind.G1)
            path += [edge, nxt]
            current = nxt

    def geodesic(self, u: CosetKey, v: CosetKey) -> List[CosetKey]:
        pu, pv = self.root_path(u), self.root_path(v)
        while len(pu) >= 3 and len(pv) >= 3 and pu[-3] == pv[-3]:
            pu, pv = pu[:-2], pv[:-2]
        return pu + pv[-2::-1]

    def distance(self, u: CosetKey, v: CosetKey) -> int:
        return (len(self.geodesic(u, v)) - 1) // 2

    def hull(self, items: Iterable[CosetKey], basepoint: Optional[CosetKey] = None) -> FiniteSubtree:
        items = list(items)
        if not items:
            raise ValueError("hull of an empty set of tree cells")
        vertices: Set[CosetKey] = set()
        edges: Set[CosetKey] = set()
        for x in items:
            if x.is_vertex:
                vertices.add(x)
            else:
                edges.add(x)
                vertices.update(self.endpoints(x))
        if basepoint is None:
            base = self.base_vertex()
            basepoint = base if base in vertices else min(vertices, key=self.p.key_sort)
        for v in list(vertices):
            path = self.geodesic(basepoint, v)
            vertices.update(path[0::2])
            edges.update(path[1::2])
        return FiniteSubtree(frozenset(vertices), frozenset(edges))

    def extend(self, s: FiniteSubtree, items: Iterable[CosetKey]) -> FiniteSubtree:
        return self.hull(list(s.vertices) + list(s.edges) + list(items))

    def graph(self, s: FiniteSubtree) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(s.vertices)
        for e in s.edges:
            a, b = self.endpoints(e)
            graph.add_edge(a, b, key=e)
        return graph

    def validate_subtree(self, s: FiniteSubtree, degree: Optional[int] = None) -> VerificationReport:
        report = VerificationReport()
        if not s.vertices:
            report.add("subtree", "empty subtree", degree)
            return report
        for e in sorted(s.edges, key=self.p.key_sort):
            for v in self.endpoints(e):
                if v not in s.vertices:
                    report.add("subtree", f"edge {self.p.format_key(e)} has endpoint {self.p.format_key(v)} outside the subtree", degree)
                    return report
        graph = self.graph(s)
        if not nx.is_connected(graph):
            report.add("subtree", f"disconnected: {nx.number_connected_components(graph)} components", degree)
        elif len(s.vertices) != len(s.edges) + 1:
            report.add("subtree", f"|V| = {len(s.vertices)} but |E| = {len(s.edges)}", degree)
        return report

    def ball(self, radius: int, spread: int = 1) -> FiniteSubtree:
        """Breadth-first neighbourhood of the base vertex; a reference enumeration for tests."""
        start = self.base_vertex()
        depth = {start: 0}
        edges: Set[CosetKey] = set()
        queue = deque([start])
        while queue:
            v = queue.popleft()
            if depth[v] == radius:
                continue
            for e, w in self.neighbours(v, spread):
                edges.add(e)
                if w not in depth:
                    depth[w] = depth[v] + 1
                    queue.append(w)
        logger.debug(f"Ball of radius {radius} in {self.p.name}: {len(depth)} vertices, {len(edges)} edges")
        return FiniteSubtree(frozenset(depth), frozenset(edges))

    def export_dot(self, s: FiniteSubtree, name: str = "U", rankdir: str = "LR") -> str:
        fmt = self.p.format_key
        lines = [f"graph {name} {{", f"  rankdir={rankdir};"]
        for label in sorted(fmt(v) for v in s.vertices):
            lines.append(f'  "{label}";')
        rows = []
        for e in s.edges:
            a, b = self.endpoints(e)
            rows.append(f'  "{fmt(a)}" -- "{fmt(b)}" [label="{fmt(e)}"];')
        lines += sorted(rows)
        lines.append("}")
        return "\n".join(lines) + "\n"
