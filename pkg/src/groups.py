import logging
import re
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from sympy.combinatorics.free_groups import free_group

from src.errors import InjectivityError, StructuralError, WordParseError

logger = logging.getLogger(__name__)

TOKEN = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)(?:\^(-?\d+))?$")
IDENTITY_TOKEN = "1"


class GroupKind(str, Enum):
    TRIVIAL = "trivial"
    FINITE = "finite"
    FREE = "free"
    FREE_ABELIAN = "free_abelian"


class Injectivity(str, Enum):
    VERIFIED = "verified"
    ASSERTED = "user-asserted"


def tokenize(text: str) -> List[Tuple[str, int]]:
    """Split a word such as "x^2 t^-1 y" into (symbol, exponent) pairs."""
    tokens = []
    for raw in (text or "").split():
        if raw == IDENTITY_TOKEN:
            continue
        match = TOKEN.match(raw)
        if not match:
            raise WordParseError(f"malformed token {raw!r} in word {text!r}")
        exponent = int(match.group(2)) if match.group(2) is not None else 1
        tokens.append((match.group(1), exponent))
    return tokens


def letter_key(letter: int) -> Tuple[int, bool]:
    # x < x^-1 < y < y^-1 < ...
    return (abs(letter), letter < 0)


def xgcd(a: int, b: int) -> Tuple[int, int, int]:
    """Return (g, s, t) with s*a + t*b = g = gcd(a, b) >= 0."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r != 0:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def hermite_rows(rows: Sequence[Sequence[int]], width: int) -> Tuple[List[List[int]], List[List[int]], List[int]]:
    """Row Hermite form H = U·A with U unimodular.

    Pivots are positive and entries above a pivot lie in [0, pivot).
    Returns (H, U, pivot columns); zero rows of H sit below the pivot rows.
    """
    A = [list(row) for row in rows]
    m = len(A)
    U = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
    pivots: List[int] = []
    r = 0
    for c in range(width):
        if r == m:
            break
        for i in range(r + 1, m):
            if A[i][c] == 0:
                continue
            a, b = A[r][c], A[i][c]
            g, s, t = xgcd(a, b)
            p, q = -b // g, a // g
            A[r], A[i] = (
                [s * x + t * y for x, y in zip(A[r], A[i])],
                [p * x + q * y for x, y in zip(A[r], A[i])],
            )
            U[r], U[i] = (
                [s * x + t * y for x, y in zip(U[r], U[i])],
                [p * x + q * y for x, y in zip(U[r], U[i])],
            )
        if A[r][c] == 0:
            continue
        if A[r][c] < 0:
            A[r] = [-x for x in A[r]]
            U[r] = [-x for x in U[r]]
        for i in range(r):
            q = A[i][c] // A[r][c]
            if q:
                A[i] = [x - q * y for x, y in zip(A[i], A[r])]
                U[i] = [x - q * y for x, y in zip(U[i], U[r])]
        pivots.append(c)
        r += 1
    return A, U, pivots


@dataclass(frozen=True)
class BaseElement:
    group: str
    # tuple for trivial/finite/free-abelian groups, a sympy FreeGroupElement for free groups
    word: Any


class BaseGroup:
    def __init__(
        self,
        name: str,
        kind: GroupKind,
        generators: Sequence[str] = (),
        elements: Optional[Sequence[str]] = None,
        table: Optional[Sequence[Sequence[int]]] = None,
    ):
        self.name = name
        self.kind = GroupKind(kind)
        if self.kind == GroupKind.FREE and not generators:
            self.kind = GroupKind.TRIVIAL
        self.generators: List[str] = list(generators)
        self.elements_names: List[str] = list(elements or [])
        self.table: List[List[int]] = [list(row) for row in (table or [])]
        self._identity_index = 0
        self._free = None
        self._free_gens: List[Any] = []
        self._index = {symbol: i for i, symbol in enumerate(self.generators)}

        if self.kind == GroupKind.TRIVIAL:
            self.generators = []
            self._index = {}
        elif self.kind == GroupKind.FINITE:
            self._init_finite()
        elif self.kind == GroupKind.FREE:
            created = free_group(",".join(self.generators))
            self._free, self._free_gens = created[0], list(created[1:])
            self._symbol_index = {str(g): i for i, g in enumerate(self._free_gens)}
        if len(set(self.generators)) != len(self.generators):
            raise StructuralError(f"group {name}: repeated generator symbols")

    def _init_finite(self):
        n = len(self.elements_names)
        if n == 0 or len(self.table) != n or any(len(row) != n for row in self.table):
            raise StructuralError(f"group {self.name}: multiplication table must be {n}x{n}")
        if any(not 0 <= x < n for row in self.table for x in row):
            raise StructuralError(f"group {self.name}: table entry out of range")
        identities = [e for e in range(n) if all(self.table[e][x] == x and self.table[x][e] == x for x in range(n))]
        if not identities:
            raise StructuralError(f"group {self.name}: table has no identity")
        self._identity_index = identities[0]
        self._names = {symbol: i for i, symbol in enumerate(self.elements_names)}
        if not self.generators:
            self.generators = [s for i, s in enumerate(self.elements_names) if i != self._identity_index]
        unknown = [g for g in self.generators if g not in self._names]
        if unknown:
            raise StructuralError(f"group {self.name}: generators {unknown} are not elements")
        self._index = {symbol: i for i, symbol in enumerate(self.generators)}

    def __repr__(self) -> str:
        return f"BaseGroup({self.name}, {self.kind.value}, {self.generators})"

    @property
    def rank(self) -> int:
        return len(self.generators)

    @property
    def is_finite(self) -> bool:
        return self.kind in (GroupKind.TRIVIAL, GroupKind.FINITE)

    @property
    def order(self) -> Optional[int]:
        if self.kind == GroupKind.TRIVIAL:
            return 1
        if self.kind == GroupKind.FINITE:
            return len(self.elements_names)
        return None

    def symbols(self) -> List[str]:
        if self.kind == GroupKind.FINITE:
            return list(self.elements_names)
        return list(self.generators)

    def _check(self, *items: BaseElement):
        for a in items:
            if a.group != self.name:
                raise StructuralError(f"element of {a.group} used in group {self.name}")

    # construction

    def identity(self) -> BaseElement:
        if self.kind == GroupKind.TRIVIAL:
            return BaseElement(self.name, ())
        if self.kind == GroupKind.FINITE:
            return BaseElement(self.name, (self._identity_index,))
        if self.kind == GroupKind.FREE:
            return BaseElement(self.name, self._free.identity)
        return BaseElement(self.name, (0,) * self.rank)

    def generator_elements(self) -> List[BaseElement]:
        return [self.letter(symbol, 1) for symbol in self.generators]

    def letter(self, symbol: str, exponent: int = 1) -> BaseElement:
        if self.kind == GroupKind.FINITE:
            if symbol not in self._names:
                raise WordParseError(f"unknown symbol {symbol!r} in group {self.name}")
            return self.power(BaseElement(self.name, (self._names[symbol],)), exponent)
        if symbol not in self._index:
            raise WordParseError(f"unknown symbol {symbol!r} in group {self.name}")
        i = self._index[symbol]
        if self.kind == GroupKind.FREE:
            return BaseElement(self.name, self._free_gens[i] ** exponent)
        vector = [0] * self.rank
        vector[i] = exponent
        return BaseElement(self.name, tuple(vector))

    def from_letters(self, letters: Iterable[int]) -> BaseElement:
        word = self._free.identity
        for a in letters:
            word = word * (self._free_gens[abs(a) - 1] ** (1 if a > 0 else -1))
        return BaseElement(self.name, word)

    def from_exponents(self, vector: Sequence[int]) -> BaseElement:
        if self.kind == GroupKind.FREE_ABELIAN:
            return BaseElement(self.name, tuple(int(v) for v in vector))
        if self.kind == GroupKind.TRIVIAL:
            return self.identity()
        if self.kind == GroupKind.FREE and self.rank == 1:
            return BaseElement(self.name, self._free_gens[0] ** int(vector[0]))
        raise StructuralError(f"group {self.name} has no exponent coordinates")

    def parse(self, text: str) -> BaseElement:
        result = self.identity()
        for symbol, exponent in tokenize(text):
            result = self.op(result, self.letter(symbol, exponent))
        return result

    def evaluate(self, text: str, images: Dict[str, BaseElement], target: "BaseGroup") -> BaseElement:
        """Substitute elements of another group for this group's letters."""
        result = target.identity()
        for symbol, exponent in tokenize(text):
            if symbol not in images:
                raise WordParseError(f"no image for symbol {symbol!r} of group {self.name}")
            result = target.op(result, target.power(images[symbol], exponent))
        return result

    # arithmetic

    def op(self, a: BaseElement, b: BaseElement) -> BaseElement:
        self._check(a, b)
        if self.kind == GroupKind.TRIVIAL:
            return a
        if self.kind == GroupKind.FINITE:
            return BaseElement(self.name, (self.table[a.word[0]][b.word[0]],))
        if self.kind == GroupKind.FREE:
            return BaseElement(self.name, a.word * b.word)
        return BaseElement(self.name, tuple(x + y for x, y in zip(a.word, b.word)))

    multiply = op

    def invert(self, a: BaseElement) -> BaseElement:
        self._check(a)
        if self.kind == GroupKind.TRIVIAL:
            return a
        if self.kind == GroupKind.FINITE:
            row = self.table[a.word[0]]
            inverse = next(y for y in range(len(row)) if row[y] == self._identity_index)
            return BaseElement(self.name, (inverse,))
        if self.kind == GroupKind.FREE:
            return BaseElement(self.name, a.word ** -1)
        return BaseElement(self.name, tuple(-x for x in a.word))

    def power(self, a: BaseElement, k: int) -> BaseElement:
        if k < 0:
            a, k = self.invert(a), -k
        result = self.identity()
        square = a
        while k:
            if k & 1:
                result = self.op(result, square)
            square = self.op(square, square)
            k >>= 1
        return result

    def is_identity(self, a: BaseElement) -> bool:
        return a == self.identity()

    # canonical data

    def letters(self, a: BaseElement) -> List[int]:
        """Signed 1-based generator indices of a reduced free word."""
        self._check(a)
        letters: List[int] = []
        for symbol, exponent in a.word.array_form:
            i = self._symbol_index[str(symbol)] + 1
            letters.extend([i if exponent > 0 else -i] * abs(exponent))
        return letters

    def exponents(self, a: BaseElement) -> Tuple[int, ...]:
        self._check(a)
        if self.kind == GroupKind.FREE_ABELIAN:
            return a.word
        if self.kind == GroupKind.TRIVIAL:
            return ()
        if self.kind == GroupKind.FREE and self.rank == 1:
            return (sum(1 if x > 0 else -1 for x in self.letters(a)),)
        raise StructuralError(f"group {self.name} has no exponent coordinates")

    def length(self, a: BaseElement) -> int:
        if self.kind == GroupKind.FREE:
            return len(a.word)
        if self.kind == GroupKind.FREE_ABELIAN:
            return sum(abs(x) for x in a.word)
        return 0 if self.is_identity(a) else 1

    def sort_key(self, a: BaseElement) -> Tuple:
        if self.kind == GroupKind.FREE:
            letters = self.letters(a)
            return (len(letters), tuple(letter_key(x) for x in letters))
        if self.kind == GroupKind.FREE_ABELIAN:
            return (self.length(a), tuple((abs(x), x < 0) for x in a.word))
        return tuple(a.word)

    def format(self, a: BaseElement) -> str:
        self._check(a)
        if self.is_identity(a):
            return IDENTITY_TOKEN
        if self.kind == GroupKind.FINITE:
            return self.elements_names[a.word[0]]
        if self.kind == GroupKind.FREE:
            parts = []
            for symbol, exponent in a.word.array_form:
                parts.append(str(symbol) if exponent == 1 else f"{symbol}^{exponent}")
            return " ".join(parts)
        parts = []
        for symbol, exponent in zip(self.generators, a.word):
            if exponent:
                parts.append(symbol if exponent == 1 else f"{symbol}^{exponent}")
        return " ".join(parts)

    def elements(self) -> List[BaseElement]:
        if self.kind == GroupKind.TRIVIAL:
            return [self.identity()]
        if self.kind == GroupKind.FINITE:
            return [BaseElement(self.name, (i,)) for i in range(len(self.elements_names))]
        raise StructuralError(f"group {self.name} is infinite")

    def validate(self) -> List[str]:
        """Group axioms of a finite table, checked by full enumeration."""
        if self.kind != GroupKind.FINITE:
            return []
        violations = []
        n = len(self.table)
        for x in range(n):
            if self._identity_index not in self.table[x]:
                violations.append(f"{self.elements_names[x]} has no inverse")
        for x in range(n):
            for y in range(n):
                xy = self.table[x][y]
                for z in range(n):
                    if self.table[xy][z] != self.table[x][self.table[y][z]]:
                        violations.append(
                            f"associativity fails at ({self.elements_names[x]}, {self.elements_names[y]}, {self.elements_names[z]})"
                        )
                        return violations
        return violations


class Homomorphism:
    def __init__(self, name: str, source: BaseGroup, target: BaseGroup, images: Dict[str, BaseElement]):
        self.name = name
        self.source = source
        self.target = target
        self.images = dict(images)
        self.injectivity = Injectivity.ASSERTED
        self._table: Dict[int, BaseElement] = {}
        missing = [g for g in source.generators if g not in self.images]
        if missing:
            raise StructuralError(f"homomorphism {name}: no image for generators {missing}")
        for symbol, image in self.images.items():
            if symbol not in source.generators:
                raise StructuralError(f"homomorphism {name}: {symbol!r} is not a generator of {source.name}")
            target._check(image)
        self._check_relations()

    def __repr__(self) -> str:
        return f"Homomorphism({self.name}: {self.source.name} -> {self.target.name})"

    def _check_relations(self):
        if self.source.kind == GroupKind.FINITE:
            # Walk the Cayley graph; a conflicting image is a relator sent off the identity.
            start = self.source.identity()
            self._table = {start.word[0]: self.target.identity()}
            queue = deque([start])
            while queue:
                x = queue.popleft()
                for symbol in self.source.generators:
                    y = self.source.op(x, self.source.letter(symbol))
                    image = self.target.op(self._table[x.word[0]], self.images[symbol])
                    known = self._table.get(y.word[0])
                    if known is None:
                        self._table[y.word[0]] = image
                        queue.append(y)
                    elif known != image:
                        raise StructuralError(f"homomorphism {self.name} does not respect the relations of {self.source.name}")
            if len(self._table) != self.source.order:
                raise StructuralError(f"homomorphism {self.name}: generators do not generate {self.source.name}")
        elif self.source.kind == GroupKind.FREE_ABELIAN:
            gens = [self.images[g] for g in self.source.generators]
            for i, a in enumerate(gens):
                for b in gens[i + 1:]:
                    if self.target.op(a, b) != self.target.op(b, a):
                        raise StructuralError(f"homomorphism {self.name}: images of {self.source.name} do not commute")

    def apply(self, g: BaseElement) -> BaseElement:
        if g.group != self.source.name:
            raise StructuralError(f"{g.group} element is not in the source {self.source.name} of {self.name}")
        kind = self.source.kind
        if kind == GroupKind.TRIVIAL:
            return self.target.identity()
        if kind == GroupKind.FINITE:
            return self._table[g.word[0]]
        result = self.target.identity()
        if kind == GroupKind.FREE:
            for letter in self.source.letters(g):
                image = self.images[self.source.generators[abs(letter) - 1]]
                result = self.target.op(result, image if letter > 0 else self.target.invert(image))
            return result
        for symbol, exponent in zip(self.source.generators, g.word):
            if exponent:
                result = self.target.op(result, self.target.power(self.images[symbol], exponent))
        return result

    def check_injective(self) -> Injectivity:
        """Verify injectivity where it is decidable, reject maps that cannot be injective."""
        source, target = self.source, self.target
        if source.is_finite:
            kernel = [x for x in source.elements() if target.is_identity(self.apply(x))]
            if len(kernel) > 1:
                names = [source.format(x) for x in kernel]
                raise InjectivityError(f"homomorphism {self.name} has kernel {names}")
            self.injectivity = Injectivity.VERIFIED
            return self.injectivity
        if target.is_finite:
            raise InjectivityError(f"homomorphism {self.name}: infinite {source.name} cannot embed in finite {target.name}")
        if any(target.is_identity(self.images[g]) for g in source.generators):
            raise InjectivityError(f"homomorphism {self.name} kills a generator of {source.name}")
        if source.kind == GroupKind.FREE and source.rank >= 2 and target.kind == GroupKind.FREE_ABELIAN:
            raise InjectivityError(f"homomorphism {self.name}: free group of rank {source.rank} cannot embed in an abelian group")
        if source.kind == GroupKind.FREE_ABELIAN and source.rank >= 2 and target.kind == GroupKind.FREE:
            raise InjectivityError(f"homomorphism {self.name}: free abelian group of rank {source.rank} cannot embed in a free group")
        self.injectivity = Injectivity.ASSERTED
        logger.debug(f"Injectivity of {self.name} recorded as user assertion")
        return self.injectivity


class FoldedGraph:
    """Stallings folding of a set of free words, optionally labelled by subgroup elements.

    The labels of a closed path at the base vertex multiply to the subgroup element
    whose image the path reads.
    """

    def __init__(self, group: BaseGroup, words: Sequence[Tuple[List[int], Optional[BaseElement]]], labels: Optional[BaseGroup] = None):
        self.group = group
        self.labels = labels
        half: set = set()
        next_vertex = 1
        for letters, label in words:
            if not letters:
                continue
            u = 0
            for k, a in enumerate(letters):
                if k == len(letters) - 1:
                    v = 0
                else:
                    v, next_vertex = next_vertex, next_vertex + 1
                lab = label if k == 0 else self._identity()
                half.add((u, a, v, lab))
                half.add((v, -a, u, self._inv(lab)))
                u = v
        self.out = self._fold(half)
        self.vertices = sorted(self.out)
        self._spanning = self._shortlex_tree()

    def _identity(self):
        return self.labels.identity() if self.labels is not None else None

    def _inv(self, lab):
        return self.labels.invert(lab) if self.labels is not None else None

    def _mul(self, a, b):
        return self.labels.op(a, b) if self.labels is not None else None

    def _fold(self, half: set) -> Dict[int, Dict[int, Tuple[int, Any]]]:
        folds = 0
        while True:
            seen: Dict[Tuple[int, int], Tuple[int, Any]] = {}
            clash = None
            for edge in sorted(half, key=lambda e: (e[0], letter_key(e[1]), e[2])):
                u, a, v, lab = edge
                if (u, a) in seen:
                    clash = (u, a, seen[(u, a)], (v, lab))
                    break
                seen[(u, a)] = (v, lab)
            if clash is None:
                break
            folds += 1
            u, a, (v1, l1), (v2, l2) = clash
            if v1 == v2:
                if self.labels is not None and l1 != l2:
                    raise InjectivityError(
                        f"subgroup element {self.labels.format(self._mul(l1, self._inv(l2)))} maps to the identity"
                    )
                half.discard((u, a, v2, l2))
                half.discard((v2, -a, u, self._inv(l2)))
                continue
            if v2 == 0:
                v1, l1, v2, l2 = v2, l2, v1, l1
            delta = self._mul(self._inv(l1), l2)
            merged = set()
            for x, b, y, lab in half:
                if x == v2:
                    x, lab = v1, self._mul(delta, lab)
                if y == v2:
                    y, lab = v1, self._mul(lab, self._inv(delta))
                merged.add((x, b, y, lab))
            half = merged
        logger.debug(f"Folded graph over {self.group.name} after {folds} folds")
        out: Dict[int, Dict[int, Tuple[int, Any]]] = {0: {}}
        for u, a, v, lab in half:
            out.setdefault(u, {})[a] = (v, lab)
            out.setdefault(v, {})
        return out

    def _shortlex_tree(self) -> Dict[int, Tuple[List[int], Any]]:
        tree = {0: ([], self._identity())}
        queue = deque([0])
        while queue:
            u = queue.popleft()
            path, lab = tree[u]
            for a in sorted(self.out[u], key=letter_key):
                v, edge_lab = self.out[u][a]
                if v not in tree:
                    tree[v] = (path + [a], self._mul(lab, edge_lab))
                    queue.append(v)
        return tree

    def is_rose(self) -> bool:
        """True when the folded graph is one vertex carrying every letter, i.e. the words generate."""
        letters = {a for i in range(1, self.group.rank + 1) for a in (i, -i)}
        return self.vertices == [0] and set(self.out[0]) == letters

    def read(self, letters: List[int]) -> Tuple[int, List[int], Any]:
        u, lab = 0, self._identity()
        for k, a in enumerate(letters):
            if a not in self.out[u]:
                return u, letters[k:], lab
            u, edge_lab = self.out[u][a]
            lab = self._mul(lab, edge_lab)
        return u, [], lab

    def spanning_path(self, vertex: int) -> Tuple[List[int], Any]:
        return self._spanning[vertex]


class Transversal:
    """Right-coset representatives of the image of an injective homomorphism."""

    def __init__(self, hom: Homomorphism):
        self.hom = hom
        self.subgroup = hom.source
        self.ambient = hom.target
        self._graph: Optional[FoldedGraph] = None
        self._lattice: Optional[Tuple[List[List[int]], List[List[int]], List[int]]] = None
        self._preimages: Dict[BaseElement, BaseElement] = {}
        kind = self.ambient.kind
        if kind == GroupKind.FINITE:
            if not self.subgroup.is_finite:
                raise InjectivityError(f"{self.subgroup.name} is infinite and cannot embed in {self.ambient.name}")
            for h in self.subgroup.elements():
                self._preimages[hom.apply(h)] = h
        elif kind == GroupKind.FREE:
            words = []
            for symbol in self.subgroup.generators:
                image = hom.images[symbol]
                words.append((self.ambient.letters(image), self.subgroup.letter(symbol)))
            self._graph = FoldedGraph(self.ambient, words, labels=self.subgroup)
        elif kind == GroupKind.FREE_ABELIAN:
            if self.subgroup.kind == GroupKind.FREE and self.subgroup.rank >= 2:
                raise InjectivityError(f"free {self.subgroup.name} of rank {self.subgroup.rank} cannot embed in {self.ambient.name}")
            if self.subgroup.kind == GroupKind.FINITE:
                if self.subgroup.order != 1:
                    raise InjectivityError(f"finite {self.subgroup.name} cannot embed in {self.ambient.name}")
                rows = []
            else:
                rows = [list(self.ambient.exponents(hom.images[s])) for s in self.subgroup.generators]
            H, U, pivots = hermite_rows(rows, self.ambient.rank)
            if len(pivots) < len(rows):
                raise InjectivityError(f"images of {self.subgroup.name} under {hom.name} are linearly dependent")
            self._lattice = (H, U, pivots)
        logger.debug(f"Transversal for {hom.name} ready ({kind.value} ambient)")

    def factor(self, g: BaseElement) -> Tuple[BaseElement, BaseElement]:
        """Return (h, r) with g = hom(h)·r and r the canonical representative of hom(H)·g."""
        self.ambient._check(g)
        kind = self.ambient.kind
        if kind == GroupKind.TRIVIAL:
            return self.subgroup.identity(), g
        if kind == GroupKind.FINITE:
            coset = [self.ambient.op(s, g) for s in self._preimages]
            r = min(coset, key=lambda x: x.word[0])
            return self._preimages[self.ambient.op(g, self.ambient.invert(r))], r
        if kind == GroupKind.FREE:
            graph = self._graph
            vertex, rest, label = graph.read(self.ambient.letters(g))
            path, path_label = graph.spanning_path(vertex)
            r = self.ambient.from_letters(path + rest)
            return self.subgroup.op(label, self.subgroup.invert(path_label)), r
        H, U, pivots = self._lattice
        vector = list(g.word)
        coefficients = [0] * len(pivots)
        for i, c in enumerate(pivots):
            q = vector[c] // H[i][c]
            if q:
                vector = [x - q * y for x, y in zip(vector, H[i])]
                coefficients[i] = q
        source = [sum(coefficients[i] * U[i][j] for i in range(len(pivots))) for j in range(len(U))]
        return self.subgroup.from_exponents(source), BaseElement(self.ambient.name, tuple(vector))

    def representative(self, g: BaseElement) -> BaseElement:
        return self.factor(g)[1]

    def contains(self, g: BaseElement) -> bool:
        return self.ambient.is_identity(self.representative(g))

    def preimage(self, g: BaseElement) -> BaseElement:
        h, r = self.factor(g)
        if not self.ambient.is_identity(r):
            raise StructuralError(f"{self.ambient.format(g)} is not in the image of {self.hom.name}")
        return h


def generates(group: BaseGroup, elements: Sequence[BaseElement]) -> bool:
    """Subgroup test: do the elements generate the whole group?"""
    if group.kind == GroupKind.TRIVIAL:
        return True
    if group.kind == GroupKind.FINITE:
        seen = {group.identity()}
        queue = deque(seen)
        while queue:
            x = queue.popleft()
            for s in elements:
                y = group.op(x, s)
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
        return len(seen) == group.order
    if group.kind == GroupKind.FREE:
        graph = FoldedGraph(group, [(group.letters(s), None) for s in elements])
        return graph.is_rose()
    rows = [list(s.word) for s in elements]
    H, _, pivots = hermite_rows(rows, group.rank)
    return len(pivots) == group.rank and all(H[i][c] == 1 for i, c in enumerate(pivots))
