import logging
from collections import defaultdict
from dataclasses import dataclass
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Set, Tuple

from typing_extensions import Protocol, runtime_checkable

from src.amalgam import CosetKey, CosetKind, NormalForm, Presentation
from src.errors import StructuralError
from src.groups import BaseGroup, GroupKind

logger = logging.getLogger(__name__)


@runtime_checkable
class GroupLike(Protocol):
    """What a group ring needs from its group: base groups and presentations both qualify."""

    name: str

    def identity(self) -> Any: ...

    def multiply(self, a: Any, b: Any) -> Any: ...

    def invert(self, a: Any) -> Any: ...

    def sort_key(self, a: Any) -> Tuple: ...

    def format(self, a: Any) -> str: ...

    def parse(self, text: str) -> Any: ...


@dataclass(frozen=True)
class RingElement:
    ring: str
    # (group element, nonzero coefficient), in shortlex order of the elements
    terms: Tuple[Tuple[Any, int], ...] = ()

    def __bool__(self) -> bool:
        return bool(self.terms)


@dataclass(frozen=True)
class RingMatrix:
    ring: str
    rows: int
    cols: int
    entries: Tuple[Tuple[RingElement, ...], ...] = ()

    @property
    def shape(self) -> Tuple[int, int]:
        return self.rows, self.cols

    def __getitem__(self, index: Tuple[int, int]) -> RingElement:
        i, j = index
        return self.entries[i][j]


class GroupRing:
    def __init__(self, group: GroupLike, tag: Optional[str] = None, member: Optional[Callable[[Any], bool]] = None):
        if not isinstance(group, GroupLike):
            raise StructuralError(f"{group!r} does not provide group operations")
        self.group = group
        self.tag = tag or group.name
        self._member = member

    def __repr__(self) -> str:
        return f"GroupRing(Z[{self.tag}])"

    def _check(self, *items: RingElement):
        for a in items:
            if a.ring != self.tag:
                raise StructuralError(f"element of Z[{a.ring}] used in Z[{self.tag}]")

    def contains_group_element(self, g: Any) -> bool:
        return self._member is None or self._member(g)

    # construction

    def element(self, coefficients: Dict[Any, int]) -> RingElement:
        terms = [(g, c) for g, c in coefficients.items() if c != 0]
        terms.sort(key=lambda term: self.group.sort_key(term[0]))
        return RingElement(self.tag, tuple(terms))

    def zero(self) -> RingElement:
        return RingElement(self.tag, ())

    def one(self) -> RingElement:
        return self.scalar(1)

    def scalar(self, n: int) -> RingElement:
        return self.element({self.group.identity(): n})

    def from_group(self, g: Any, coefficient: int = 1) -> RingElement:
        if not self.contains_group_element(g):
            raise StructuralError(f"{self.group.format(g)} does not lie in {self.tag}")
        return self.element({g: coefficient})

    def parse(self, terms: Iterable[Tuple[int, str]]) -> RingElement:
        coefficients: Dict[Any, int] = defaultdict(int)
        for coefficient, word in terms:
            g = self.group.parse(word)
            if not self.contains_group_element(g):
                raise StructuralError(f"{word!r} does not lie in {self.tag}")
            coefficients[g] += int(coefficient)
        return self.element(coefficients)

    def serialize(self, a: RingElement) -> List[Tuple[int, str]]:
        self._check(a)
        return [(c, self.group.format(g)) for g, c in a.terms]

    def format(self, a: RingElement) -> str:
        if not a.terms:
            return "0"
        parts = []
        for g, c in a.terms:
            word = self.group.format(g)
            if word == "1":
                body = str(abs(c))
            else:
                body = word if abs(c) == 1 else f"{abs(c)}·{word}"
            parts.append(("- " if c < 0 else "+ ") + body)
        text = " ".join(parts)
        return text[2:] if text.startswith("+ ") else "-" + text[2:]

    # arithmetic

    def add(self, a: RingElement, b: RingElement) -> RingElement:
        self._check(a, b)
        coefficients: Dict[Any, int] = defaultdict(int)
        for g, c in a.terms + b.terms:
            coefficients[g] += c
        return self.element(coefficients)

    def negate(self, a: RingElement) -> RingElement:
        self._check(a)
        return RingElement(self.tag, tuple((g, -c) for g, c in a.terms))

    def sub(self, a: RingElement, b: RingElement) -> RingElement:
        return self.add(a, self.negate(b))

    def scale(self, a: RingElement, n: int) -> RingElement:
        self._check(a)
        if n == 0:
            return self.zero()
        return RingElement(self.tag, tuple((g, n * c) for g, c in a.terms))

    def multiply(self, a: RingElement, b: RingElement) -> RingElement:
        self._check(a, b)
        coefficients: Dict[Any, int] = defaultdict(int)
        for g, c in a.terms:
            for h, d in b.terms:
                coefficients[self.group.multiply(g, h)] += c * d
        return self.element(coefficients)

    def left_translate(self, g: Any, a: RingElement) -> RingElement:
        """g·a for a group element g."""
        return self.element({self.group.multiply(g, h): c for h, c in a.terms})

    def right_translate(self, a: RingElement, g: Any) -> RingElement:
        return self.element({self.group.multiply(h, g): c for h, c in a.terms})

    def support(self, a: RingElement) -> List[Any]:
        self._check(a)
        return [g for g, _ in a.terms]

    def coefficient(self, a: RingElement, g: Any) -> int:
        for h, c in a.terms:
            if h == g:
                return c
        return 0

    def augmentation(self, a: RingElement) -> int:
        self._check(a)
        return sum(c for _, c in a.terms)

    def map_through(self, a: RingElement, fn: Callable[[Any], Any], target: "GroupRing") -> RingElement:
        """Extend a group homomorphism (given on elements) linearly to the group rings."""
        self._check(a)
        coefficients: Dict[Any, int] = defaultdict(int)
        for g, c in a.terms:
            coefficients[fn(g)] += c
        return target.element(coefficients)

    # matrices

    def matrix(self, grid: Sequence[Sequence[RingElement]], rows: Optional[int] = None, cols: Optional[int] = None) -> RingMatrix:
        rows = len(grid) if rows is None else rows
        cols = (len(grid[0]) if grid else 0) if cols is None else cols
        if len(grid) != rows or any(len(row) != cols for row in grid):
            raise StructuralError(f"matrix over Z[{self.tag}] is not {rows}x{cols}")
        for row in grid:
            self._check(*row)
        return RingMatrix(self.tag, rows, cols, tuple(tuple(row) for row in grid))

    def parse_matrix(self, grid: Sequence[Sequence[Iterable[Tuple[int, str]]]], rows: int, cols: int) -> RingMatrix:
        return self.matrix([[self.parse(entry) for entry in row] for row in grid], rows, cols)

    def serialize_matrix(self, A: RingMatrix) -> List[List[List[Tuple[int, str]]]]:
        return [[self.serialize(x) for x in row] for row in A.entries]

    def zero_matrix(self, rows: int, cols: int) -> RingMatrix:
        z = self.zero()
        return RingMatrix(self.tag, rows, cols, tuple((z,) * cols for _ in range(rows)))

    def identity_matrix(self, n: int) -> RingMatrix:
        one, z = self.one(), self.zero()
        return RingMatrix(self.tag, n, n, tuple(tuple(one if i == j else z for j in range(n)) for i in range(n)))

    def _check_matrix(self, *items: RingMatrix):
        for A in items:
            if A.ring != self.tag:
                raise StructuralError(f"matrix over Z[{A.ring}] used in Z[{self.tag}]")

    def matmul(self, A: RingMatrix, B: RingMatrix) -> RingMatrix:
        self._check_matrix(A, B)
        if A.cols != B.rows:
            raise StructuralError(f"cannot multiply {A.rows}x{A.cols} by {B.rows}x{B.cols} over Z[{self.tag}]")
        grid = []
        for i in range(A.rows):
            row = []
            for j in range(B.cols):
                coefficients: Dict[Any, int] = defaultdict(int)
                for k in range(A.cols):
                    for g, c in A.entries[i][k].terms:
                        for h, d in B.entries[k][j].terms:
                            coefficients[self.group.multiply(g, h)] += c * d
                row.append(self.element(coefficients))
            grid.append(row)
        return RingMatrix(self.tag, A.rows, B.cols, tuple(tuple(row) for row in grid))

    def madd(self, A: RingMatrix, B: RingMatrix) -> RingMatrix:
        self._check_matrix(A, B)
        if A.shape != B.shape:
            raise StructuralError(f"cannot add {A.rows}x{A.cols} and {B.rows}x{B.cols} over Z[{self.tag}]")
        return self.mapped(A, lambda x, i, j: self.add(x, B.entries[i][j]))

    def mneg(self, A: RingMatrix) -> RingMatrix:
        return self.mapped(A, lambda x, i, j: self.negate(x))

    def msub(self, A: RingMatrix, B: RingMatrix) -> RingMatrix:
        return self.madd(A, self.mneg(B))

    def mscale(self, A: RingMatrix, n: int) -> RingMatrix:
        return self.mapped(A, lambda x, i, j: self.scale(x, n))

    def mapped(self, A: RingMatrix, fn: Callable[[RingElement, int, int], RingElement], target: Optional["GroupRing"] = None) -> RingMatrix:
        target = target or self
        grid = tuple(tuple(fn(A.entries[i][j], i, j) for j in range(A.cols)) for i in range(A.rows))
        return RingMatrix(target.tag, A.rows, A.cols, grid)

    def left_translate_matrix(self, g: Any, A: RingMatrix) -> RingMatrix:
        return self.mapped(A, lambda x, i, j: self.left_translate(g, x))

    def block(self, blocks: Sequence[Sequence[RingMatrix]]) -> RingMatrix:
        """Assemble a block matrix; every block in a block row shares its row count and so on."""
        row_heights = [row[0].rows for row in blocks]
        col_widths = [b.cols for b in blocks[0]] if blocks else []
        grid: List[List[RingElement]] = []
        for bi, row in enumerate(blocks):
            if len(row) != len(col_widths):
                raise StructuralError("ragged block matrix")
            for b in row:
                self._check_matrix(b)
            for b, width in zip(row, col_widths):
                if b.rows != row_heights[bi] or b.cols != width:
                    raise StructuralError(f"block {b.rows}x{b.cols} does not fit {row_heights[bi]}x{width}")
            for i in range(row_heights[bi]):
                grid.append([x for b in row for x in b.entries[i]])
        return RingMatrix(self.tag, sum(row_heights), sum(col_widths), tuple(tuple(row) for row in grid))

    def is_zero_matrix(self, A: RingMatrix) -> bool:
        return all(not x.terms for row in A.entries for x in row)

    def first_nonzero(self, A: RingMatrix) -> Optional[Tuple[int, int]]:
        for i, row in enumerate(A.entries):
            for j, x in enumerate(row):
                if x.terms:
                    return i, j
        return None

    def fox_derivative(self, word: Any, generator: int) -> RingElement:
        """Fox derivative ∂w/∂x_generator in Z[F] of a free-group element (generator is 1-based)."""
        group = self.group
        if not isinstance(group, BaseGroup) or group.kind != GroupKind.FREE:
            raise StructuralError(f"Fox derivatives need a free group, not {self.tag}")
        coefficients: Dict[Any, int] = defaultdict(int)
        prefix: List[int] = []
        for a in group.letters(word):
            if a == generator:
                coefficients[group.from_letters(prefix)] += 1
            elif a == -generator:
                coefficients[group.from_letters(prefix + [a])] -= 1
            prefix.append(a)
        return self.element(coefficients)


# rings of a presentation: G and its subgroups G1, G2, H, all over normal forms of G

def presentation_ring(p: Presentation, tag: str = "G") -> GroupRing:
    if tag == "G":
        return GroupRing(p, "G")
    kind = CosetKind(tag)
    if kind == CosetKind.G2 and not p.is_amalgam:
        raise StructuralError(f"presentation {p.name} has no G2")

    def member(g: NormalForm) -> bool:
        try:
            p.to_factor(g, kind)
        except StructuralError:
            return False
        return True

    return GroupRing(p, tag, member)


def support_cosets(p: Presentation, x: RingElement, kind: CosetKind) -> Set[CosetKey]:
    return {p.coset_key(g, kind) for g, _ in x.terms}


def restrict_component(p: Presentation, x: RingElement, c: CosetKey, target: GroupRing) -> RingElement:
    """Σ coeff·γ over the terms g = γ·rep(c) of x lying in the coset c."""
    inverse = p.nf_invert(c.rep)
    coefficients: Dict[Any, int] = defaultdict(int)
    for g, coefficient in x.terms:
        if p.coset_key(g, c.kind) == c:
            coefficients[p.nf_multiply(g, inverse)] += coefficient
    return target.element(coefficients)


def induce(p: Presentation, y: RingElement, c: CosetKey, ring: GroupRing) -> RingElement:
    return ring.element({p.nf_multiply(g, c.rep): coefficient for g, coefficient in y.terms})


def decompose(p: Presentation, x: RingElement, kind: CosetKind, target: GroupRing) -> Dict[CosetKey, RingElement]:
    components = {c: restrict_component(p, x, c, target) for c in support_cosets(p, x, kind)}
    logger.debug(f"Decomposed element with {len(x.terms)} terms over {len(components)} {CosetKind(kind).value}-cosets")
    return components
