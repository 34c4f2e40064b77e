import json
import logging
from typing import Dict, Optional

from pydantic import ValidationError

from src.amalgam import CosetKind, Presentation
from src.chain import ChainComplex
from src.cwsplit import EquivariantCW, KernelData
from src.errors import SessionError, TransversalityError
from src.groupring import GroupRing, presentation_ring
from src.groups import BaseGroup, Homomorphism
from src.models.schemas import ComplexSpec, PlusSpec, RefineSpec, SessionDocument
from src.tree import BassSerreTree, FiniteSubtree

logger = logging.getLogger(__name__)

PRESENTATION_RINGS = ("G", "G1", "G2", "H")


def _json_path(loc) -> str:
    path = "$"
    for part in loc:
        path += f"[{part}]" if isinstance(part, int) else f".{part}"
    return path


def parse_session(text: str) -> SessionDocument:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise SessionError("$", f"invalid JSON at line {e.lineno} column {e.colno}: {e.msg}")
    try:
        return SessionDocument.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        raise SessionError(_json_path(first["loc"]), first["msg"])


def dump_session(doc: SessionDocument) -> str:
    return json.dumps(doc.model_dump(mode="json", exclude_none=True), sort_keys=True, indent=2)


class Session:
    """A session document with every name resolved to groups, maps, rings and complexes."""

    def __init__(self, document: SessionDocument, path: str = "<session>"):
        self.document = document
        self.path = path
        self.groups: Dict[str, BaseGroup] = {}
        self.homomorphisms: Dict[str, Homomorphism] = {}
        self.presentation: Optional[Presentation] = None
        self.rings: Dict[str, GroupRing] = {}
        self.complexes: Dict[str, ChainComplex] = {}
        self.cw: Dict[str, EquivariantCW] = {}
        self.plus: Dict[str, PlusSpec] = {}
        self.refinements: Dict[str, RefineSpec] = {}
        self._resolve()
        logger.info(
            f"Loaded session {document.name}: {len(self.groups)} groups, {len(self.complexes)} complexes, "
            f"{len(self.cw)} CW complexes"
        )

    def __repr__(self) -> str:
        return f"Session({self.document.name})"

    def _group(self, name: str, where: str) -> BaseGroup:
        if name not in self.groups:
            raise SessionError(where, f"undeclared group {name!r}")
        return self.groups[name]

    def _hom(self, name: str, where: str) -> Homomorphism:
        if name not in self.homomorphisms:
            raise SessionError(where, f"undeclared homomorphism {name!r}")
        return self.homomorphisms[name]

    def _resolve(self):
        doc = self.document
        for i, spec in enumerate(doc.groups):
            where = f"$.groups[{i}]"
            if spec.name in self.groups:
                raise SessionError(f"{where}.name", f"group {spec.name!r} declared twice")
            try:
                group = BaseGroup(spec.name, spec.kind, spec.generators, spec.elements, spec.table)
            except TransversalityError as e:
                raise SessionError(where, str(e))
            problems = group.validate()
            if problems:
                raise SessionError(f"{where}.table", problems[0])
            self.groups[spec.name] = group

        for i, spec in enumerate(doc.homomorphisms):
            where = f"$.homomorphisms[{i}]"
            source = self._group(spec.source, f"{where}.source")
            target = self._group(spec.target, f"{where}.target")
            images = {}
            for symbol, word in spec.images.items():
                try:
                    images[symbol] = target.parse(word)
                except TransversalityError as e:
                    raise SessionError(f"{where}.images.{symbol}", str(e))
            try:
                self.homomorphisms[spec.name] = Homomorphism(spec.name, source, target, images)
            except TransversalityError as e:
                raise SessionError(where, str(e))

        if doc.presentation is not None:
            spec = doc.presentation
            where = "$.presentation"
            G1 = self._group(spec.G1, f"{where}.G1")
            H = self._group(spec.H, f"{where}.H")
            G2 = self._group(spec.G2, f"{where}.G2") if spec.G2 is not None else None
            i1, i2 = self._hom(spec.i1, f"{where}.i1"), self._hom(spec.i2, f"{where}.i2")
            try:
                self.presentation = Presentation(spec.name, spec.kind, G1, H, i1, i2, G2, spec.stable_letter)
            except TransversalityError as e:
                raise SessionError(where, str(e))
            for tag in PRESENTATION_RINGS:
                if tag != "G2" or self.presentation.is_amalgam:
                    self.rings[tag] = presentation_ring(self.presentation, tag)

        for i, spec in enumerate(doc.complexes):
            self.complexes[spec.name] = self._complex(spec, f"$.complexes[{i}]")

        for i, spec in enumerate(doc.cw_complexes):
            where = f"$.cw_complexes[{i}]"
            if spec.complex not in self.complexes:
                raise SessionError(f"{where}.complex", f"undeclared complex {spec.complex!r}")
            complex_ = self.complexes[spec.complex]
            if complex_.ring != "G":
                raise SessionError(f"{where}.complex", f"CW complexes need a complex over Z[G], not Z[{complex_.ring}]")
            cells = tuple(tuple(names) for names in spec.cells)
            base = spec.base_cell or (cells[0][0] if cells and cells[0] else "")
            self.cw[spec.name] = EquivariantCW(spec.name, complex_, cells, base)

        for i, spec in enumerate(doc.plus):
            self._plus_spec(spec, f"$.plus[{i}]")
            self.plus[spec.name] = spec

        for i, spec in enumerate(doc.refinements):
            where = f"$.refinements[{i}]"
            if spec.cw not in self.cw:
                raise SessionError(f"{where}.cw", f"undeclared CW complex {spec.cw!r}")
            for part in ("y", "x1", "x2"):
                piece = getattr(spec, part)
                if piece is not None:
                    self._plus_spec(piece, f"{where}.{part}")
            for end, name in spec.maps.items():
                if end not in ("X1", "X2"):
                    raise SessionError(f"{where}.maps", f"unknown end {end!r}, expected X1 or X2")
                self._hom(name, f"{where}.maps.{end}")
            self.refinements[spec.name] = spec

    def _ring(self, tag: str, where: str) -> GroupRing:
        if tag in self.rings:
            return self.rings[tag]
        if tag in PRESENTATION_RINGS:
            raise SessionError(where, f"ring Z[{tag}] needs a presentation")
        ring = GroupRing(self._group(tag, where))
        self.rings[tag] = ring
        return ring

    def _complex(self, spec: ComplexSpec, where: str) -> ChainComplex:
        if spec.name in self.complexes:
            raise SessionError(f"{where}.name", f"complex {spec.name!r} declared twice")
        ring = self._ring(spec.ring, f"{where}.ring")
        if not spec.ranks or any(r < 0 for r in spec.ranks):
            raise SessionError(f"{where}.ranks", "ranks must be a nonempty list of nonnegative integers")
        if len(spec.differentials) != len(spec.ranks) - 1:
            raise SessionError(f"{where}.differentials", f"{len(spec.ranks)} ranks need {len(spec.ranks) - 1} differentials")
        diffs = []
        for r, grid in enumerate(spec.differentials, start=1):
            try:
                diffs.append(ring.parse_matrix(grid, spec.ranks[r], spec.ranks[r - 1]))
            except TransversalityError as e:
                raise SessionError(f"{where}.differentials[{r - 1}]", str(e))
        return ChainComplex(ring.tag, tuple(spec.ranks), tuple(diffs))

    def _plus_spec(self, spec: PlusSpec, where: str):
        hom = self._hom(spec.hom, f"{where}.hom")
        if spec.complex is not None:
            if spec.complex not in self.complexes:
                raise SessionError(f"{where}.complex", f"undeclared complex {spec.complex!r}")
            if self.complexes[spec.complex].ring != hom.source.name:
                raise SessionError(f"{where}.complex", f"complex is not over Z[{hom.source.name}]")

    # lookups used by the commands

    def require_presentation(self) -> Presentation:
        if self.presentation is None:
            raise SessionError("$.presentation", "this command needs a presentation")
        return self.presentation

    def complex(self, name: Optional[str] = None) -> ChainComplex:
        if name is None:
            over_g = [n for n, c in self.complexes.items() if c.ring == "G"]
            if not over_g:
                raise SessionError("$.complexes", "no complex over Z[G]")
            name = over_g[0]
        if name not in self.complexes:
            raise SessionError("$.complexes", f"undeclared complex {name!r}")
        return self.complexes[name]

    def complex_name(self, complex_: ChainComplex) -> str:
        return next(n for n, c in self.complexes.items() if c is complex_)

    def cw_complex(self, name: Optional[str] = None) -> EquivariantCW:
        if name is None:
            if not self.cw:
                raise SessionError("$.cw_complexes", "no CW complex declared")
            name = next(iter(self.cw))
        if name not in self.cw:
            raise SessionError("$.cw_complexes", f"undeclared CW complex {name!r}")
        return self.cw[name]

    def kernel_data(self, spec: PlusSpec) -> KernelData:
        words = tuple(spec.kernel_words) if spec.kernel_words is not None else None
        return KernelData(self.homomorphisms[spec.hom], words, spec.witnesses)

    def seed(self, text: Optional[str]) -> Optional[FiniteSubtree]:
        """`default`, or comma-separated items `vertex:G1:<word>`, `vertex:G2:<word>`, `edge:<word>`."""
        if text is None or text.strip() == "default":
            return None
        p = self.require_presentation()
        items = []
        for raw in text.split(","):
            head, _, rest = raw.strip().partition(":")
            try:
                if head == "vertex":
                    kind, _, word = rest.partition(":")
                    if kind not in ("G1", "G2"):
                        raise SessionError("--seed", f"vertex kind must be G1 or G2, not {kind!r}")
                    items.append(p.coset_key(p.reduce(word), CosetKind(kind)))
                elif head == "edge":
                    items.append(p.coset_key(p.reduce(rest), CosetKind.H))
                else:
                    raise SessionError("--seed", f"malformed seed item {raw.strip()!r}")
            except SessionError:
                raise
            except TransversalityError as e:
                raise SessionError("--seed", str(e))
        return BassSerreTree(p).hull(items)


def load_session(path: str) -> Session:
    try:
        with open(path, encoding="utf-8") as handle:
            text = handle.read()
    except OSError as e:
        raise SessionError("$", f"cannot read {path}: {e.strerror}")
    except UnicodeDecodeError as e:
        raise SessionError("$", f"{path} is not valid UTF-8 (byte {e.start})")
    return Session(parse_session(text), path)


def kernel_specs(session: Session, spec: RefineSpec) -> Dict[str, KernelData]:
    pieces = {"Y": spec.y, "X1": spec.x1}
    if spec.x2 is not None:
        pieces["X2"] = spec.x2
    return {name: session.kernel_data(piece) for name, piece in pieces.items()}


def refine_maps(session: Session, spec: RefineSpec) -> Dict[str, Homomorphism]:
    return {end: session.homomorphisms[name] for end, name in spec.maps.items()}
