from pydantic import BaseModel, Field
from typing import Optional, List, Dict, Any, Literal, Tuple


# Session documents

class GroupSpec(BaseModel):
    name: str
    kind: Literal["trivial", "finite", "free", "free_abelian"]
    generators: List[str] = []
    elements: Optional[List[str]] = None
    table: Optional[List[List[int]]] = None


class HomomorphismSpec(BaseModel):
    name: str
    source: str
    target: str
    images: Dict[str, str]


class PresentationSpec(BaseModel):
    name: str
    kind: Literal["amalgam", "hnn"]
    G1: str
    H: str
    i1: str
    i2: str
    G2: Optional[str] = None
    stable_letter: str = "t"


# A ring element is a list of (coefficient, word) terms; a matrix is a row-major grid of them.
Term = Tuple[int, str]
MatrixDoc = List[List[List[Term]]]


class ComplexSpec(BaseModel):
    name: str
    ring: str
    ranks: List[int]
    # differentials[r - 1] is d_r, a ranks[r] x ranks[r - 1] matrix
    differentials: List[MatrixDoc] = []


class CWSpec(BaseModel):
    name: str
    complex: str
    cells: List[List[str]]
    base_cell: Optional[str] = None


class WitnessSpec(BaseModel):
    # h'_j: lifts of the generators of the target group, as words in the source
    lifts: Dict[str, str]
    # v_i: images of the source generators written in the target generators
    images: Dict[str, str]
    # w_k: relator words in the target generators
    relators: List[str] = []


class PlusSpec(BaseModel):
    name: str
    hom: str
    complex: Optional[str] = None
    kernel_words: Optional[List[str]] = None
    witnesses: Optional[WitnessSpec] = None


class RefineSpec(BaseModel):
    name: str
    cw: str
    y: PlusSpec
    x1: PlusSpec
    x2: Optional[PlusSpec] = None
    # homomorphisms from the source group of y into the source groups of x1 / x2
    maps: Dict[str, str] = {}


class SessionDocument(BaseModel):
    name: str = "session"
    groups: List[GroupSpec]
    homomorphisms: List[HomomorphismSpec] = []
    presentation: Optional[PresentationSpec] = None
    complexes: List[ComplexSpec] = []
    cw_complexes: List[CWSpec] = []
    plus: List[PlusSpec] = []
    refinements: List[RefineSpec] = []


# Splitting documents written by `split` and re-read by `verify`

class SubtreeDoc(BaseModel):
    vertices: List[str]
    edges: List[str]


class ComplexDoc(BaseModel):
    ring: str
    ranks: List[int]
    differentials: List[MatrixDoc] = []


class SplittingDoc(BaseModel):
    presentation: str
    complex: str
    subtrees: List[SubtreeDoc]
    D: ComplexDoc
    C1: ComplexDoc
    C2: Optional[ComplexDoc] = None
    # per degree r = 0..n
    e1: List[MatrixDoc]
    e2: List[MatrixDoc]
    f1: List[MatrixDoc]
    f2: Optional[List[MatrixDoc]] = None


# Reports

class Violation(BaseModel):
    kind: Literal["subtree", "realization", "complex", "chain_map", "composition", "rank", "incidence", "exactness"]
    degree: Optional[int] = None
    detail: str


class VerificationReport(BaseModel):
    passed: bool = True
    violations: List[Violation] = []
    notes: Dict[str, Any] = {}

    def add(self, kind: str, detail: str, degree: Optional[int] = None):
        self.violations.append(Violation(kind=kind, degree=degree, detail=detail))
        self.passed = False

    def extend(self, other: "VerificationReport", degree: Optional[int] = None):
        for violation in other.violations:
            self.add(violation.kind, violation.detail, violation.degree if violation.degree is not None else degree)

    @property
    def first(self) -> Optional[Violation]:
        return self.violations[0] if self.violations else None


class Verdict(BaseModel):
    verdict: Literal["acyclic", "not_acyclic", "inconclusive"]
    window: int
    radius: int
    margin: int
    detail: str = ""
    failing_degrees: List[int] = []


class CommandReport(BaseModel):
    command: str
    session: str
    passed: bool
    data: Dict[str, Any] = Field(default_factory=dict)
    violations: List[Violation] = []
