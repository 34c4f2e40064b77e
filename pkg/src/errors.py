class TransversalityError(Exception):
    pass


class StructuralError(TransversalityError):
    """Operands belong to different groups, presentations or rings, or have mismatched shapes."""


class WordParseError(TransversalityError):
    pass


class InjectivityError(TransversalityError):
    pass


class RealizationError(TransversalityError):
    def __init__(self, degree: int, vertex: str, coset: str):
        self.degree = degree
        self.vertex = vertex
        self.coset = coset
        super().__init__(
            f"degree {degree}: vertex {vertex} sends cells to coset {coset} outside the next subtree"
        )


class CertificateNotFoundError(TransversalityError):
    pass


class WitnessError(TransversalityError):
    def __init__(self, word: str, reason: str):
        self.word = word
        super().__init__(f"{reason}: {word}")


class ContainmentError(TransversalityError):
    pass


class SessionError(TransversalityError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")
