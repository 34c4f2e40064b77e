import logging
from collections import deque
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.chain import ChainComplex, ChainMap, CylinderData, differential, map_at, mapping_cone
from src.groupring import GroupRing, RingMatrix
from src.groups import xgcd
from src.models.schemas import Verdict, VerificationReport
from src.tree import BassSerreTree, FiniteSubtree

logger = logging.getLogger(__name__)


def integer_matrix(rows: Sequence[Sequence[int]], shape: Optional[Tuple[int, int]] = None) -> np.ndarray:
    if shape is not None and shape[0] * shape[1] == 0:
        return np.zeros(shape, dtype=object)
    return np.array([[int(x) for x in row] for row in rows], dtype=object).reshape(shape if shape else (len(rows), len(rows[0]) if rows else 0))


def _eye(n: int) -> np.ndarray:
    eye = np.zeros((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            eye[i, j] = 1 if i == j else 0
    return eye


class SmithForm:
    """Smith normal form D = L·M·R of an integer matrix, L and R unimodular.

    Exact: numpy object arrays of Python integers, elimination by extended gcd.
    """

    def __init__(self, M: np.ndarray):
        self.M = np.array(M, dtype=object)
        if self.M.ndim != 2:
            self.M = self.M.reshape((0, 0))
        m, n = self.M.shape
        self.D = self.M.copy()
        self.left = _eye(m)
        self.right = _eye(n)
        self._reduce()

    @property
    def shape(self) -> Tuple[int, int]:
        return self.M.shape

    def _pivot(self, s: int) -> Optional[Tuple[int, int]]:
        best = None
        m, n = self.D.shape
        for i in range(s, m):
            for j in range(s, n):
                x = self.D[i, j]
                if x != 0 and (best is None or abs(x) < abs(self.D[best])):
                    best = (i, j)
        return best

    def _row_op(self, i: int, k: int, a, b, c, d):
        # rows (i, k) <- (a·i + b·k, c·i + d·k)
        for A in (self.D, self.left):
            ri, rk = A[i].copy(), A[k].copy()
            A[i] = a * ri + b * rk
            A[k] = c * ri + d * rk

    def _col_op(self, j: int, k: int, a, b, c, d):
        for A in (self.D, self.right):
            cj, ck = A[:, j].copy(), A[:, k].copy()
            A[:, j] = a * cj + b * ck
            A[:, k] = c * cj + d * ck

    def _reduce(self):
        m, n = self.D.shape
        s = 0
        while s < min(m, n):
            pivot = self._pivot(s)
            if pivot is None:
                break
            i, j = pivot
            if i != s:
                self._row_op(s, i, 0, 1, 1, 0)
            if j != s:
                self._col_op(s, j, 0, 1, 1, 0)
            while True:
                for i in range(s + 1, m):
                    if self.D[i, s] != 0:
                        a, b = self.D[s, s], self.D[i, s]
                        g, x, y = xgcd(a, b)
                        self._row_op(s, i, x, y, -b // g, a // g)
                for j in range(s + 1, n):
                    if self.D[s, j] != 0:
                        a, b = self.D[s, s], self.D[s, j]
                        g, x, y = xgcd(a, b)
                        self._col_op(s, j, x, y, -b // g, a // g)
                if any(self.D[i, s] != 0 for i in range(s + 1, m)):
                    continue
                # divisibility: fold a non-divisible entry into the pivot row
                bad = next(
                    ((i, j) for i in range(s + 1, m) for j in range(s + 1, n) if self.D[i, j] % self.D[s, s] != 0),
                    None,
                )
                if bad is None:
                    break
                self._row_op(s, bad[0], 1, 1, 0, 1)
            if self.D[s, s] < 0:
                self.D[s] = -self.D[s]
                self.left[s] = -self.left[s]
            s += 1

    @property
    def invariant_factors(self) -> List[int]:
        m, n = self.D.shape
        return [int(self.D[i, i]) for i in range(min(m, n)) if self.D[i, i] != 0]

    @property
    def rank(self) -> int:
        return len(self.invariant_factors)

    def left_kernel(self) -> List[np.ndarray]:
        """Rows x with x·M = 0, a Z-basis."""
        return [self.left[i] for i in range(self.rank, self.D.shape[0])]

    def self_check(self) -> bool:
        if 0 in self.M.shape:
            return True
        return bool((self.left.dot(self.M).dot(self.right) == self.D).all())


def smith(M: np.ndarray) -> Tuple[int, List[int]]:
    form = SmithForm(M)
    if not form.self_check():
        raise ArithmeticError("Smith form transforms do not reproduce the matrix")
    return form.rank, form.invariant_factors


class SparseLattice:
    """Row lattice in echelon form over Z, rows stored as {column: value} dicts."""

    def __init__(self, track: bool = False):
        self.pivots: Dict[Any, Tuple[Dict[Any, int], Dict[Any, int]]] = {}
        self.track = track
        self.kernel: List[Dict[Any, int]] = []
        self._order: Dict[Any, int] = {}

    def _lead(self, v: Dict[Any, int]):
        return min(v, key=self._order.__getitem__)

    @staticmethod
    def _combine(a: Dict[Any, int], x: int, b: Dict[Any, int], y: int) -> Dict[Any, int]:
        out = {k: x * c for k, c in a.items()} if x else {}
        if y:
            for k, c in b.items():
                out[k] = out.get(k, 0) + y * c
        return {k: c for k, c in out.items() if c != 0}

    def order_columns(self, columns: Sequence[Any]):
        for c in columns:
            self._order.setdefault(c, len(self._order))

    def insert(self, v: Dict[Any, int], label: Any = None):
        v = {k: c for k, c in v.items() if c != 0}
        t = {label: 1} if self.track else {}
        while v:
            c = self._lead(v)
            if c not in self.pivots:
                self.pivots[c] = (v, t)
                return
            p, pt = self.pivots[c]
            if v[c] % p[c] == 0:
                q = v[c] // p[c]
                v, t = self._combine(v, 1, p, -q), self._combine(t, 1, pt, -q)
                continue
            g, s, u = xgcd(p[c], v[c])
            a, b = p[c] // g, v[c] // g
            new_p, new_pt = self._combine(p, s, v, u), self._combine(pt, s, t, u)
            v, t = self._combine(v, a, p, -b), self._combine(t, a, pt, -b)
            self.pivots[c] = (new_p, new_pt)
        if self.track and t:
            self.kernel.append(t)

    def contains(self, v: Dict[Any, int]) -> bool:
        v = {k: c for k, c in v.items() if c != 0}
        while v:
            c = self._lead(v)
            if c not in self.pivots:
                return False
            p, _ = self.pivots[c]
            if v[c] % p[c] != 0:
                return False
            v = self._combine(v, 1, p, -(v[c] // p[c]))
        return True


def integer_complex(ring: GroupRing, C: ChainComplex) -> List[np.ndarray]:
    """ℤ ⊗ C: the augmentation applied entrywise; element r-1 is ∂_r."""
    mats = []
    for r in range(1, C.top + 1):
        d = C.differentials[r - 1]
        mats.append(integer_matrix([[ring.augmentation(x) for x in row] for row in d.entries], d.shape))
    return mats


def integer_homology(ranks: Sequence[int], boundaries: Sequence[np.ndarray]) -> Dict[int, Dict[str, Any]]:
    """Betti numbers and torsion of an integer complex; boundaries[r - 1] is ∂_r (rank_r x rank_{r-1})."""
    forms = [SmithForm(b) for b in boundaries]
    homology = {}
    for r, c in enumerate(ranks):
        out_rank = forms[r - 1].rank if 1 <= r <= len(forms) else 0
        incoming = forms[r] if r < len(forms) else None
        in_rank = incoming.rank if incoming is not None else 0
        torsion = [d for d in (incoming.invariant_factors if incoming is not None else []) if abs(d) > 1]
        homology[r] = {"betti": c - out_rank - in_rank, "torsion": torsion}
    return homology


def integer_exactness(ranks: Sequence[int], boundaries: Sequence[np.ndarray]) -> bool:
    return all(h["betti"] == 0 and not h["torsion"] for h in integer_homology(ranks, boundaries).values())


def tree_exactness(tree: BassSerreTree, U: FiniteSubtree, c: int = 1, degree: Optional[int] = None) -> VerificationReport:
    """0 -> Z^{|E|c} -> Z^{|V|c} -> Z^c -> 0, boundary then augmentation, checked by Smith forms."""
    report = VerificationReport()
    p = tree.p
    vertices = sorted(U.vertices, key=p.key_sort)
    edges = sorted(U.edges, key=p.key_sort)
    index = {v: i for i, v in enumerate(vertices)}
    nv, ne = len(vertices), len(edges)
    boundary = np.zeros((ne * c, nv * c), dtype=object)
    for i, e in enumerate(edges):
        a, b = tree.endpoints(e)
        if a not in index or b not in index:
            report.add("exactness", f"edge {p.format_key(e)} leaves the subtree", degree)
            return report
        for k in range(c):
            boundary[i * c + k, index[a] * c + k] += -1
            boundary[i * c + k, index[b] * c + k] += 1
    augmentation = np.zeros((nv * c, c), dtype=object)
    for i in range(nv):
        for k in range(c):
            augmentation[i * c + k, k] = 1
    if ne and c and not (boundary.dot(augmentation) == 0).all():
        report.add("exactness", "boundary followed by augmentation is nonzero", degree)
    b_form, a_form = SmithForm(boundary), SmithForm(augmentation)
    if b_form.rank != ne * c or any(d != 1 for d in b_form.invariant_factors):
        report.add("exactness", f"boundary has rank {b_form.rank} of {ne * c} or a nontrivial invariant factor", degree)
    if a_form.rank != c or any(d != 1 for d in a_form.invariant_factors):
        report.add("exactness", f"augmentation onto Z^{c} is not surjective", degree)
    if nv * c != ne * c + c:
        report.add("exactness", f"ranks {ne * c}, {nv * c}, {c} do not balance", degree)
    return report


def _cayley_ball(ring: GroupRing, steps: List[Any], radius: int) -> Tuple[List[List[Any]], bool]:
    """Spheres S_0..S_radius of the word metric over `steps`; True when the ball closed up."""
    group = ring.group
    seen = {group.identity()}
    spheres = [[group.identity()]]
    for _ in range(radius):
        grown = []
        for x in spheres[-1]:
            for s in steps:
                y = group.multiply(x, s)
                if y not in seen:
                    seen.add(y)
                    grown.append(y)
        if not grown:
            return spheres, True
        spheres.append(grown)
    # one more layer tells whether the ball is already the whole group
    closed = all(group.multiply(x, s) in seen for x in spheres[-1] for s in steps)
    return spheres, closed


def _window_rows(ring: GroupRing, d: RingMatrix, ball: List[Any]) -> List[Tuple[Tuple[int, Any], Dict[Tuple[int, Any], int]]]:
    rows = []
    for g in ball:
        for i in range(d.rows):
            row: Dict[Tuple[int, Any], int] = {}
            for j in range(d.cols):
                for s, coefficient in d.entries[i][j].terms:
                    key = (j, ring.group.multiply(g, s))
                    row[key] = row.get(key, 0) + coefficient
            rows.append(((i, g), {k: v for k, v in row.items() if v}))
    return rows


def acyclic_cone(ring: GroupRing, f: ChainMap, window: int) -> Verdict:
    """Acyclicity of cone(f) over Z[G], certified on a finite window of the group.

    Negative evidence is sound: an inexact augmented cone over Z means not acyclic. Positive
    evidence checks that every cycle supported in the inner ball bounds within the full ball.
    """
    cone = mapping_cone(ring, f)
    nonzero = [r for r in range(cone.top + 1) if cone.rank(r)]
    radius = len(nonzero)
    if not nonzero:
        return Verdict(verdict="acyclic", window=window, radius=0, margin=window, detail="zero cone")

    ranks = list(cone.ranks)
    if not integer_exactness(ranks, integer_complex(ring, cone)):
        logger.info(f"Cone over Z[{ring.tag}] has nonzero homology after augmentation")
        return Verdict(verdict="not_acyclic", window=window, radius=radius, margin=window - radius, detail="augmented cone over Z is not exact")

    if window < radius:
        logger.warning(f"Window {window} is below the interaction radius {radius}")
        return Verdict(verdict="inconclusive", window=window, radius=radius, margin=window - radius, detail="window smaller than interaction radius")

    group = ring.group
    steps_set = {}
    for d in cone.differentials:
        for row in d.entries:
            for x in row:
                for g, _ in x.terms:
                    for s in (g, group.invert(g)):
                        steps_set[s] = None
    steps = sorted(steps_set, key=group.sort_key)
    spheres, closed = _cayley_ball(ring, steps, window)
    inner_radius = len(spheres) - 1 if closed else window - radius
    inner = [g for sphere in spheres[: inner_radius + 1] for g in sphere]
    outer_rows = [g for sphere in spheres[: max(len(spheres) - 1, 1)] for g in sphere] if not closed else [g for sphere in spheres for g in sphere]
    full = [g for sphere in spheres for g in sphere]

    failing = []
    for r in nonzero:
        # cycles of degree r supported on the inner ball
        if r >= 1:
            lattice = SparseLattice(track=True)
            rows = _window_rows(ring, cone.differentials[r - 1], inner)
            lattice.order_columns([(j, g) for g in full for j in range(cone.rank(r - 1))])
            for label, row in rows:
                lattice.insert(row, label)
            cycles = lattice.kernel
        else:
            cycles = [{(i, g): 1} for g in inner for i in range(cone.rank(0))]
        if not cycles:
            continue
        if r + 1 > cone.top:
            failing.append(r)
            continue
        boundaries = SparseLattice()
        boundaries.order_columns([(j, g) for g in full for j in range(cone.rank(r))])
        for _, row in _window_rows(ring, cone.differentials[r], outer_rows):
            if all(k in boundaries._order for k in row):
                boundaries.insert(row)
        if not all(boundaries.contains(z) for z in cycles):
            failing.append(r)
    logger.debug(f"Cone window over Z[{ring.tag}]: {len(full)} elements, closed={closed}, failing degrees {failing}")

    if not failing:
        return Verdict(verdict="acyclic", window=window, radius=radius, margin=window - radius,
                       detail="finite group, exact on the whole group" if closed else f"cycles on the ball of radius {inner_radius} bound")
    if closed:
        return Verdict(verdict="not_acyclic", window=window, radius=radius, margin=window - radius, detail="homology on the whole group", failing_degrees=failing)
    logger.warning(f"Cone acyclicity inconclusive in degrees {failing} at window {window}")
    return Verdict(verdict="inconclusive", window=window, radius=radius, margin=window - radius, detail="a cycle of the inner ball does not bound inside the window", failing_degrees=failing)


def homotopy_identities(ring: GroupRing, cyl: CylinderData) -> VerificationReport:
    """p∘incl = 1 and h·d + d·h = incl∘p − 1, as exact matrix identities."""
    report = VerificationReport()
    M = cyl.complex
    W = cyl.inclusion.source
    for r in range(W.top + 1):
        composite = ring.matmul(map_at(ring, cyl.inclusion, r), map_at(ring, cyl.projection, r))
        if composite != ring.identity_matrix(W.rank(r)):
            report.add("chain_map", "projection after inclusion is not the identity", r)
    for r in range(M.top + 1):
        h_r = cyl.homotopy[r]
        d_next = differential(ring, M, r + 1)
        left = ring.matmul(h_r, d_next)
        if r >= 1:
            left = ring.madd(left, ring.matmul(differential(ring, M, r), cyl.homotopy[r - 1]))
        right = ring.msub(ring.matmul(map_at(ring, cyl.projection, r), map_at(ring, cyl.inclusion, r)), ring.identity_matrix(M.rank(r)))
        if ring.first_nonzero(ring.msub(left, right)) is not None:
            report.add("chain_map", "homotopy identity h·d + d·h = incl∘p − 1 fails", r)
    return report
