import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Tuple

from src.errors import StructuralError, WordParseError
from src.groups import BaseElement, BaseGroup, GroupKind, Homomorphism, Transversal, tokenize

logger = logging.getLogger(__name__)


class PresentationKind(str, Enum):
    AMALGAM = "amalgam"
    HNN = "hnn"


class CosetKind(str, Enum):
    G1 = "G1"
    G2 = "G2"
    H = "H"


Syllable = Tuple[int, BaseElement]


@dataclass(frozen=True)
class NormalForm:
    """g = head·s1⋯sn.

    Amalgam: head in H, each syllable (factor tag 1|2, nontrivial right-coset representative)
    with alternating tags. HNN: head in G1, each syllable (exponent ±1, representative)
    standing for t^ε·s, no pinches.
    """

    presentation: str
    head: BaseElement
    syllables: Tuple[Syllable, ...] = ()

    @property
    def length(self) -> int:
        return len(self.syllables)


@dataclass(frozen=True)
class CosetKey:
    kind: CosetKind
    rep: NormalForm

    @property
    def is_vertex(self) -> bool:
        return self.kind != CosetKind.H


class Presentation:
    def __init__(
        self,
        name: str,
        kind: PresentationKind,
        G1: BaseGroup,
        H: BaseGroup,
        i1: Homomorphism,
        i2: Homomorphism,
        G2: Optional[BaseGroup] = None,
        stable_letter: str = "t",
    ):
        self.name = name
        self.kind = PresentationKind(kind)
        self.G1, self.G2, self.H = G1, G2, H
        self.i1, self.i2 = i1, i2
        self.stable_letter = stable_letter
        if self.kind == PresentationKind.AMALGAM and G2 is None:
            raise StructuralError(f"presentation {name}: an amalgam needs G2")
        second = G2 if self.kind == PresentationKind.AMALGAM else G1
        if i1.source is not H or i2.source is not H:
            raise StructuralError(f"presentation {name}: i1 and i2 must start at {H.name}")
        if i1.target is not G1 or i2.target is not second:
            raise StructuralError(f"presentation {name}: i1 must land in {G1.name} and i2 in {second.name}")
        i1.check_injective()
        i2.check_injective()
        self.T1 = Transversal(i1)
        self.T2 = Transversal(i2)
        self._symbols = self._symbol_table()
        logger.info(
            f"Presentation {name} ({self.kind.value}): G1={G1.name}, H={H.name}"
            + (f", G2={G2.name}" if G2 is not None else f", stable letter {stable_letter}")
            + f"; injectivity i1={i1.injectivity.value}, i2={i2.injectivity.value}"
        )

    def __repr__(self) -> str:
        return f"Presentation({self.name}, {self.kind.value})"

    @property
    def is_amalgam(self) -> bool:
        return self.kind == PresentationKind.AMALGAM

    def _symbol_table(self) -> Dict[str, Optional[int]]:
        table: Dict[str, Optional[int]] = {}
        factors = [(1, self.G1)] + ([(2, self.G2)] if self.is_amalgam else [])
        for tag, group in factors:
            for symbol in group.symbols():
                if symbol in table:
                    previous = self.G1 if table[symbol] == 1 else self.G2
                    both_identity = previous.is_identity(previous.letter(symbol)) and group.is_identity(group.letter(symbol))
                    if not both_identity:
                        raise StructuralError(f"presentation {self.name}: symbol {symbol!r} is used by both factors")
                    table[symbol] = None
                else:
                    table[symbol] = tag
        if not self.is_amalgam:
            if self.stable_letter in table:
                raise StructuralError(f"presentation {self.name}: stable letter {self.stable_letter!r} clashes with {self.G1.name}")
            table[self.stable_letter] = 0
        return table

    # factor plumbing

    def factor_group(self, tag: int) -> BaseGroup:
        return self.G1 if tag == 1 else self.G2

    def _transversal(self, tag: int) -> Transversal:
        # amalgam: factor tag; HNN: exponent of the preceding stable letter
        if self.is_amalgam:
            return self.T1 if tag == 1 else self.T2
        return self.T2 if tag == 1 else self.T1

    def _inclusion(self, tag: int) -> Homomorphism:
        return self.i1 if tag == 1 else self.i2

    def _check(self, *items: NormalForm):
        for g in items:
            if g.presentation != self.name:
                raise StructuralError(f"normal form of {g.presentation} used in presentation {self.name}")

    # elements

    def identity(self) -> NormalForm:
        head = self.H.identity() if self.is_amalgam else self.G1.identity()
        return NormalForm(self.name, head, ())

    def embed(self, kind: CosetKind, g: BaseElement) -> NormalForm:
        kind = CosetKind(kind)
        if kind == CosetKind.H:
            self.H._check(g)
            if self.is_amalgam:
                return NormalForm(self.name, g, ())
            return NormalForm(self.name, self.i1.apply(g), ())
        if kind == CosetKind.G2 and not self.is_amalgam:
            raise StructuralError(f"presentation {self.name} has no G2 factor")
        tag = 1 if kind == CosetKind.G1 else 2
        self.factor_group(tag)._check(g)
        if not self.is_amalgam:
            return NormalForm(self.name, g, ())
        return self._amalgam_prepend(tag, g, self.identity())

    def stable(self, exponent: int = 1) -> NormalForm:
        if self.is_amalgam:
            raise StructuralError(f"presentation {self.name} has no stable letter")
        result = self.identity()
        for _ in range(abs(exponent)):
            result = self._hnn_prepend_stable(1 if exponent > 0 else -1, result)
        return result

    def to_factor(self, g: NormalForm, kind: CosetKind) -> BaseElement:
        """The base element of G1, G2 or H that g is, or a structural error."""
        self._check(g)
        kind = CosetKind(kind)
        if kind == CosetKind.H:
            if g.syllables:
                raise StructuralError(f"{self.format(g)} is not in {self.H.name}")
            if self.is_amalgam:
                return g.head
            return self.T1.preimage(g.head)
        if not self.is_amalgam:
            if kind != CosetKind.G1 or g.syllables:
                raise StructuralError(f"{self.format(g)} is not in {self.G1.name}")
            return g.head
        tag = 1 if kind == CosetKind.G1 else 2
        group = self.factor_group(tag)
        base = self._inclusion(tag).apply(g.head)
        if not g.syllables:
            return base
        if len(g.syllables) == 1 and g.syllables[0][0] == tag:
            return group.op(base, g.syllables[0][1])
        raise StructuralError(f"{self.format(g)} is not in {group.name}")

    # amalgam moves

    def _amalgam_prepend(self, tag: int, gamma: BaseElement, g: NormalForm) -> NormalForm:
        group = self.factor_group(tag)
        x = group.op(gamma, self._inclusion(tag).apply(g.head))
        rest = g.syllables
        if rest and rest[0][0] == tag:
            x = group.op(x, rest[0][1])
            rest = rest[1:]
        h, s = self._transversal(tag).factor(x)
        if not group.is_identity(s):
            rest = ((tag, s),) + rest
        return NormalForm(self.name, h, rest)

    def _amalgam_append(self, g: NormalForm, tag: int, gamma: BaseElement) -> NormalForm:
        group = self.factor_group(tag)
        syllables = list(g.syllables)
        x = gamma
        if syllables and syllables[-1][0] == tag:
            x = group.op(syllables.pop()[1], gamma)
        h, s = self._transversal(tag).factor(x)
        tail = [] if group.is_identity(s) else [(tag, s)]
        for k in reversed(range(len(syllables))):
            tag_k, s_k = syllables[k]
            y = self.factor_group(tag_k).op(s_k, self._inclusion(tag_k).apply(h))
            h, s_new = self._transversal(tag_k).factor(y)
            syllables[k] = (tag_k, s_new)
        return NormalForm(self.name, self.H.op(g.head, h), tuple(syllables + tail))

    # HNN moves; relation i1(h)·t = t·i2(h)

    def _hnn_prepend_g1(self, gamma: BaseElement, g: NormalForm) -> NormalForm:
        return NormalForm(self.name, self.G1.op(gamma, g.head), g.syllables)

    def _hnn_prepend_stable(self, eps: int, g: NormalForm) -> NormalForm:
        h, s = self._transversal(eps).factor(g.head)
        head = (self.i1 if eps == 1 else self.i2).apply(h)
        rest = g.syllables
        if self.G1.is_identity(s) and rest and rest[0][0] == -eps:
            return NormalForm(self.name, self.G1.op(head, rest[0][1]), rest[1:])
        return NormalForm(self.name, head, ((eps, s),) + rest)

    def _hnn_append_g1(self, g: NormalForm, gamma: BaseElement) -> NormalForm:
        syllables = list(g.syllables)
        if not syllables:
            return NormalForm(self.name, self.G1.op(g.head, gamma), ())
        eps, s = syllables.pop()
        h, s_new = self._transversal(eps).factor(self.G1.op(s, gamma))
        tail = [(eps, s_new)]
        carry = (self.i1 if eps == 1 else self.i2).apply(h)
        for k in reversed(range(len(syllables))):
            eps_k, s_k = syllables[k]
            h, s_k_new = self._transversal(eps_k).factor(self.G1.op(s_k, carry))
            syllables[k] = (eps_k, s_k_new)
            carry = (self.i1 if eps_k == 1 else self.i2).apply(h)
        return NormalForm(self.name, self.G1.op(g.head, carry), tuple(syllables + tail))

    def _hnn_append_stable(self, g: NormalForm, eps: int) -> NormalForm:
        syllables = g.syllables
        if syllables and syllables[-1][0] == -eps and self.G1.is_identity(syllables[-1][1]):
            return NormalForm(self.name, g.head, syllables[:-1])
        return NormalForm(self.name, g.head, syllables + ((eps, self.G1.identity()),))

    # group operations

    def nf_multiply(self, a: NormalForm, b: NormalForm) -> NormalForm:
        self._check(a, b)
        result = b
        if self.is_amalgam:
            for tag, s in reversed(a.syllables):
                result = self._amalgam_prepend(tag, s, result)
            return NormalForm(self.name, self.H.op(a.head, result.head), result.syllables)
        for eps, s in reversed(a.syllables):
            result = self._hnn_prepend_g1(s, result)
            result = self._hnn_prepend_stable(eps, result)
        return self._hnn_prepend_g1(a.head, result)

    def nf_invert(self, a: NormalForm) -> NormalForm:
        self._check(a)
        if self.is_amalgam:
            result = NormalForm(self.name, self.H.invert(a.head), ())
            for tag, s in a.syllables:
                result = self._amalgam_prepend(tag, self.factor_group(tag).invert(s), result)
            return result
        result = NormalForm(self.name, self.G1.invert(a.head), ())
        for eps, s in a.syllables:
            result = self._hnn_prepend_stable(-eps, result)
            result = self._hnn_prepend_g1(self.G1.invert(s), result)
        return result

    # GroupLike surface for group rings
    multiply = nf_multiply
    invert = nf_invert

    def _letters(self, word: str) -> List[Tuple[int, BaseElement]]:
        letters = []
        for symbol, exponent in tokenize(word):
            if symbol not in self._symbols:
                raise WordParseError(f"unknown generator {symbol!r} in presentation {self.name}")
            tag = self._symbols[symbol]
            if tag is None:
                continue
            if tag == 0:
                letters.extend([(0, 1 if exponent > 0 else -1)] * abs(exponent))
            else:
                letters.append((tag, self.factor_group(tag).letter(symbol, exponent)))
        return letters

    def reduce(self, word: str, strategy: str = "prepend") -> NormalForm:
        """Normal form of a word over the factor alphabets and t^±1.

        "prepend" absorbs letters at the left end (the working strategy); "append" absorbs
        them at the right end with a leftward cascade and serves as an independent check.
        """
        letters = self._letters(word)
        result = self.identity()
        if strategy == "prepend":
            for tag, value in reversed(letters):
                if tag == 0:
                    result = self._hnn_prepend_stable(value, result)
                elif self.is_amalgam:
                    result = self._amalgam_prepend(tag, value, result)
                else:
                    result = self._hnn_prepend_g1(value, result)
        elif strategy == "append":
            for tag, value in letters:
                if tag == 0:
                    result = self._hnn_append_stable(result, value)
                elif self.is_amalgam:
                    result = self._amalgam_append(result, tag, value)
                else:
                    result = self._hnn_append_g1(result, value)
        else:
            raise StructuralError(f"unknown reduction strategy {strategy!r}")
        return result

    parse = reduce

    def coset_key(self, g: NormalForm, kind: CosetKind) -> CosetKey:
        self._check(g)
        kind = CosetKind(kind)
        syllables = g.syllables
        if self.is_amalgam:
            if kind != CosetKind.H and syllables and syllables[0][0] == (1 if kind == CosetKind.G1 else 2):
                syllables = syllables[1:]
            return CosetKey(kind, NormalForm(self.name, self.H.identity(), syllables))
        if kind == CosetKind.G2:
            raise StructuralError(f"presentation {self.name} has no G2 cosets")
        if kind == CosetKind.G1:
            return CosetKey(kind, NormalForm(self.name, self.G1.identity(), syllables))
        return CosetKey(kind, NormalForm(self.name, self.T1.representative(g.head), syllables))

    def syllable_length(self, g: NormalForm) -> int:
        return g.length

    length = syllable_length

    def sort_key(self, g: NormalForm) -> Tuple:
        head_group = self.H if self.is_amalgam else self.G1
        if self.is_amalgam:
            body = tuple((tag, self.factor_group(tag).sort_key(s)) for tag, s in g.syllables)
        else:
            body = tuple((eps < 0, self.G1.sort_key(s)) for eps, s in g.syllables)
        return (len(g.syllables), body, head_group.sort_key(g.head))

    def key_sort(self, key: CosetKey) -> Tuple:
        return (list(CosetKind).index(key.kind), self.sort_key(key.rep))

    def format(self, g: NormalForm) -> str:
        self._check(g)
        if self.is_amalgam:
            parts = [self.G1.format(self.i1.apply(g.head))]
            parts += [self.factor_group(tag).format(s) for tag, s in g.syllables]
        else:
            parts = [self.G1.format(g.head)]
            for eps, s in g.syllables:
                parts.append(self.stable_letter if eps == 1 else f"{self.stable_letter}^-1")
                parts.append(self.G1.format(s))
        parts = [p for p in parts if p != "1"]
        return " ".join(parts) if parts else "1"

    def format_key(self, key: CosetKey) -> str:
        return f"{key.kind.value}·{self.format(key.rep)}"

    def parse_key(self, text: str) -> CosetKey:
        kind, _, word = text.partition("·")
        return self.coset_key(self.reduce(word), CosetKind(kind))
