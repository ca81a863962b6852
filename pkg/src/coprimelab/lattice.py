"""Lattice constructions, the binary Golay code, and Cayley-structure checkers.

Everything here is exact integer arithmetic: Hermite normal forms, adjugate
solves and codeword enumeration never touch floating point.  The named
lattices (triangular model, D_d, E_8, Leech) come with their minimal-vector
generating sets and with decidable checkers for the two structural conditions
used by the percolation arguments: coordinate-crossing adjacency, and
connectivity of coordinate slices of the Cayley graph.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import DomainError
from .rng import substream

# ---------------------------------------------------------------------------
# the extended binary Golay code, built from the icosahedron

# Vertex labels: 0 = top, 1..5 = upper pentagon (cyclic), 6..10 = lower
# pentagon (cyclic, vertex 5+i below the gap between i and i+1), 11 = bottom.
_ICOSAHEDRON_EDGES = (
    [(0, i) for i in range(1, 6)]
    + [(i, i % 5 + 1) for i in range(1, 6)]
    + [(11, i) for i in range(6, 11)]
    + [(5 + i, 5 + i % 5 + 1) for i in range(1, 6)]
    + [(i, 5 + i) for i in range(1, 6)]
    + [(i, 5 + i % 5 + 1) for i in range(1, 6)]
)


def _icosahedron_adjacency() -> list[list[int]]:
    adj = [[0] * 12 for _ in range(12)]
    for u, v in _ICOSAHEDRON_EDGES:
        adj[u][v] = 1
        adj[v][u] = 1
    degrees = [sum(row) for row in adj]
    if degrees != [5] * 12:
        raise AssertionError(f"bad icosahedron table, degrees {degrees}")
    return adj


@dataclass(frozen=True)
class GolayCode:
    """The [24,12,8] extended binary Golay code, words as 24-bit integers."""

    generators: tuple[int, ...]
    codewords: tuple[int, ...]
    octads: tuple[int, ...]
    dodecads: tuple[int, ...]

    def __contains__(self, word: int) -> bool:
        return word in self._word_set

    @property
    def _word_set(self) -> frozenset[int]:
        return _golay_word_set()

    def generator_lines(self) -> list[str]:
        return [format(g, "024b")[::-1] for g in self.generators]


@lru_cache(maxsize=1)
def build_golay() -> GolayCode:
    """Construct the code as the row space of [I | J - A] over F2, where A is
    the icosahedron adjacency matrix: parity coordinate v of a word x is the
    sum of x_u over the u NOT adjacent to v, u = v included."""
    adj = _icosahedron_adjacency()
    generators = []
    for i in range(12):
        word = 1 << i
        for v in range(12):
            if i == v or not adj[i][v]:
                word |= 1 << (12 + v)
        generators.append(word)

    codewords = [0]
    for g in generators:
        codewords += [w ^ g for w in codewords]
    if len(set(codewords)) != 4096:
        raise AssertionError("generator rows are not independent")

    by_weight: dict[int, list[int]] = {}
    for w in codewords:
        by_weight.setdefault(w.bit_count(), []).append(w)
    expected = {0: 1, 8: 759, 12: 2576, 16: 759, 24: 1}
    counts = {k: len(v) for k, v in by_weight.items()}
    if counts != expected:
        raise AssertionError(f"weight distribution {counts}, wanted {expected}")

    return GolayCode(
        generators=tuple(generators),
        codewords=tuple(sorted(codewords)),
        octads=tuple(sorted(by_weight[8])),
        dodecads=tuple(sorted(by_weight[12])),
    )


@lru_cache(maxsize=1)
def _golay_word_set() -> frozenset[int]:
    return frozenset(build_golay().codewords)


@lru_cache(maxsize=1)
def _octad_set() -> frozenset[int]:
    return frozenset(build_golay().octads)


def dodecad_decomposition(code: GolayCode, dodecad: int) -> tuple[int, int]:
    """Write a weight-12 codeword as the symmetric difference of two octads.

    The returned octads always overlap in exactly 2 positions (weights force
    8 + 8 - 2*|overlap| = 12).
    """
    if dodecad not in code or dodecad.bit_count() != 12:
        raise DomainError("not a dodecad of this code")
    octads = _octad_set()
    for o1 in code.octads:
        o2 = o1 ^ dodecad
        if o2 in octads:
            if (o1 & o2).bit_count() != 2:
                raise AssertionError("octad pair with unexpected overlap")
            return (o1, o2) if o1 < o2 else (o2, o1)
    raise AssertionError("dodecad admits no octad-pair decomposition")


# ---------------------------------------------------------------------------
# exact integer linear algebra


def _det_bareiss(matrix: list[list[int]]) -> int:
    """Fraction-free determinant."""
    m = [row[:] for row in matrix]
    n = len(m)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for r in range(k + 1, n):
                if m[r][k] != 0:
                    m[k], m[r] = m[r], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
            m[i][k] = 0
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def _adjugate(matrix: list[list[int]]) -> list[list[int]]:
    """Integer adjugate, so adj(M) @ M = det(M) * I.

    Computed through an exact rational inverse: adj = det * M^-1, and every
    entry of that product is an integer.
    """
    n = len(matrix)
    det = _det_bareiss(matrix)
    if det == 0:
        raise DomainError("singular matrix has no adjugate inverse")
    aug = [[Fraction(matrix[i][j]) for j in range(n)]
           + [Fraction(1 if j == i else 0) for j in range(n)]
           for i in range(n)]
    for col in range(n):
        pivot_row = next(r for r in range(col, n) if aug[r][col])
        aug[col], aug[pivot_row] = aug[pivot_row], aug[col]
        inv_p = 1 / aug[col][col]
        aug[col] = [e * inv_p for e in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                factor = aug[r][col]
                aug[r] = [e - factor * p for e, p in zip(aug[r], aug[col])]
    adj = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            entry = aug[i][n + j] * det
            if entry.denominator != 1:
                raise AssertionError("adjugate entry not integral")
            adj[i][j] = entry.numerator
    return adj


class _HnfAccumulator:
    """Running row-style Hermite form of the integer span of added vectors.

    Tracks one pivot row per leading column; the product of pivot entries is
    the index of the span inside Z^d once the rank is full.
    """

    def __init__(self, dim: int):
        self.dim = dim
        self.pivots: dict[int, list[int]] = {}

    def add(self, vector) -> None:
        w = list(vector)
        for j in range(self.dim):
            if w[j] == 0:
                continue
            if j not in self.pivots:
                if w[j] < 0:
                    w = [-t for t in w]
                self.pivots[j] = w
                return
            r = self.pivots[j]
            g = math.gcd(r[j], w[j])
            a, b = _bezout(r[j], w[j])
            new_r = [a * ri + b * wi for ri, wi in zip(r, w)]
            u, v = r[j] // g, w[j] // g
            w = [u * wi - v * ri for ri, wi in zip(r, w)]
            self.pivots[j] = new_r
        # w reduced to zero: already in the span

    @property
    def full_rank(self) -> bool:
        return len(self.pivots) == self.dim

    def index(self) -> int | None:
        if not self.full_rank:
            return None
        out = 1
        for j, row in self.pivots.items():
            out *= abs(row[j])
        return out

    def rows(self) -> list[list[int]]:
        """Normalized HNF rows (pivot-positive, entries above pivots reduced)."""
        cols = sorted(self.pivots)
        rows = [self.pivots[j][:] for j in cols]
        for idx in range(len(rows) - 1, -1, -1):
            j = cols[idx]
            p = rows[idx][j]
            for upper in rows[:idx]:
                q = upper[j] // p
                if q:
                    for c in range(self.dim):
                        upper[c] -= q * rows[idx][c]
        return rows


def _bezout(a: int, b: int) -> tuple[int, int]:
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    return old_s, old_t


def _basis_from_generators(generators, dim: int, expected_det: int):
    """Square basis for the integer span of the generators.

    The returned tuple lists the basis vectors (the HNF rows); the absolute
    determinant is asserted against the expected lattice covolume.
    """
    acc = _HnfAccumulator(dim)
    for g in generators:
        acc.add(g)
    if not acc.full_rank:
        raise AssertionError("generators do not span full rank")
    det = acc.index()
    if det != expected_det:
        raise AssertionError(f"lattice determinant {det}, expected {expected_det}")
    return tuple(tuple(row) for row in acc.rows())


# ---------------------------------------------------------------------------
# lattice specifications


@dataclass(frozen=True)
class LatticeSpec:
    """An integer lattice: a basis (columns) plus a direct membership rule.

    form is the norm convention for minimal-vector searches: "euclidean", or
    "hexagonal" for the integer model of the triangular lattice.
    """

    name: str
    dim: int
    columns: tuple[tuple[int, ...], ...]
    membership_id: str
    form: str = "euclidean"

    @property
    def determinant(self) -> int:
        # covolume of the lattice; basis column order must not leak a sign
        return abs(_det_bareiss(self.matrix_rows()))

    def matrix_rows(self) -> list[list[int]]:
        return [[self.columns[j][i] for j in range(self.dim)] for i in range(self.dim)]


@dataclass(frozen=True)
class GenSet:
    """A finite symmetric generating set, vectors sorted lexicographically."""

    vectors: tuple[tuple[int, ...], ...]

    @staticmethod
    def from_iterable(vectors) -> "GenSet":
        vs = sorted({tuple(int(c) for c in v) for v in vectors})
        return GenSet(tuple(vs))

    @property
    def dim(self) -> int:
        return len(self.vectors[0])

    def __len__(self) -> int:
        return len(self.vectors)

    def __iter__(self):
        return iter(self.vectors)

    def is_symmetric(self) -> bool:
        s = set(self.vectors)
        return all(tuple(-c for c in v) in s for v in s)

    def has_zero(self) -> bool:
        return any(all(c == 0 for c in v) for v in self.vectors)


def norm_sq(spec: LatticeSpec, v) -> int:
    if spec.form == "hexagonal":
        a, b = v
        return a * a - a * b + b * b
    return sum(c * c for c in v)


def _identity_columns(d: int) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(1 if i == j else 0 for i in range(d)) for j in range(d))


def _d_lattice_columns(d: int) -> tuple[tuple[int, ...], ...]:
    cols = []
    for i in range(d - 1):
        col = [0] * d
        col[i] = 1
        col[i + 1] = -1
        cols.append(tuple(col))
    last = [0] * d
    last[d - 2] = 1
    last[d - 1] = 1
    cols.append(tuple(last))
    return tuple(cols)


@lru_cache(maxsize=1)
def _e8_spec() -> LatticeSpec:
    gens = []
    for col in _d_lattice_columns(8):
        gens.append([2 * c for c in col])
    gens.append([1] * 7 + [-3])
    columns = _basis_from_generators(gens, 8, 256)
    spec = LatticeSpec("E8", 8, columns, "e8")
    for col in columns:
        if not contains(spec, col):
            raise AssertionError("E8 basis column fails the direct membership rule")
    return spec


@lru_cache(maxsize=1)
def _leech_spec() -> LatticeSpec:
    code = build_golay()
    gens = []
    for g in code.generators:
        gens.append([2 * (g >> i & 1) for i in range(24)])
    for col in _d_lattice_columns(24):
        gens.append([4 * c for c in col])
    gens.append([-3] + [1] * 23)
    columns = _basis_from_generators(gens, 24, 8**12)
    spec = LatticeSpec("Leech", 24, columns, "leech")
    for col in columns:
        if not contains(spec, col):
            raise AssertionError("Leech basis column fails the digit conditions")
    return spec


def contains(spec: LatticeSpec, v) -> bool:
    """Direct membership test against the spec's rule."""
    v = tuple(int(c) for c in v)
    if len(v) != spec.dim:
        raise DomainError(f"vector of length {len(v)} in dimension {spec.dim}")
    rule = spec.membership_id
    if rule == "all":
        return True
    if rule == "sum-even":
        return sum(v) % 2 == 0
    if rule == "e8":
        parities = {c & 1 for c in v}
        return len(parities) == 1 and sum(v) % 4 == 0
    if rule == "leech":
        return leech_contains(v, build_golay())
    if rule == "basis":
        return basis_coordinates(spec, v) is not None
    raise DomainError(f"unknown membership rule {rule!r}")


@lru_cache(maxsize=32)
def _adjugate_and_det(spec: LatticeSpec):
    rows = spec.matrix_rows()
    det = _det_bareiss(rows)
    if det == 0:
        raise DomainError("singular basis")
    return _adjugate(rows), det


def basis_coordinates(spec: LatticeSpec, v) -> tuple[int, ...] | None:
    """Integer coordinates of v in the spec's basis, or None if v is outside."""
    adj, det = _adjugate_and_det(spec)
    coords = []
    for i in range(spec.dim):
        s = sum(adj[i][j] * v[j] for j in range(spec.dim))
        if s % det:
            return None
        coords.append(s // det)
    return tuple(coords)


def standard_lattice(kind: str, d: int | None = None, norm: str = "inf",
                     alpha: int = 1) -> tuple[LatticeSpec, GenSet]:
    """A named lattice together with its standard generating set.

    kinds: "triangular", "hypercubic" (alias "square" when d=2), "D", "E8",
    "Leech", "spread_out" (hypercubic points of norm <= alpha).
    """
    kind_l = kind.lower().replace("-", "_")
    if kind_l == "triangular":
        spec = LatticeSpec("triangular", 2, _identity_columns(2), "all", "hexagonal")
        return spec, minimal_vectors(spec)
    if kind_l in ("hypercubic", "square"):
        dd = 2 if kind_l == "square" else d
        if dd is None or dd < 1:
            raise DomainError("hypercubic lattice needs a dimension")
        spec = LatticeSpec(f"Z{dd}", dd, _identity_columns(dd), "all")
        return spec, minimal_vectors(spec)
    if kind_l == "d":
        if d is None or d < 2:
            raise DomainError("D-lattice needs dimension >= 2")
        spec = LatticeSpec(f"D{d}", d, _d_lattice_columns(d), "sum-even")
        return spec, minimal_vectors(spec)
    if kind_l == "e8":
        spec = _e8_spec()
        return spec, minimal_vectors(spec)
    if kind_l == "leech":
        spec = _leech_spec()
        return spec, minimal_vectors(spec)
    if kind_l == "spread_out":
        if d is None or d < 1 or alpha < 1:
            raise DomainError("spread_out needs dimension and alpha >= 1")
        spec = LatticeSpec(f"Z{d}", d, _identity_columns(d), "all")
        vectors = []
        for v in itertools.product(range(-alpha, alpha + 1), repeat=d):
            if all(c == 0 for c in v):
                continue
            if norm in ("inf", "linf"):
                inside = max(abs(c) for c in v) <= alpha
            elif norm in ("1", "l1"):
                inside = sum(abs(c) for c in v) <= alpha
            elif norm in ("2", "l2"):
                inside = sum(c * c for c in v) <= alpha * alpha
            else:
                raise DomainError(f"unknown norm {norm!r}")
            if inside:
                vectors.append(v)
        return spec, GenSet.from_iterable(vectors)
    raise DomainError(f"unknown lattice kind {kind!r}")


def minimal_vectors(spec: LatticeSpec) -> GenSet:
    """All nonzero lattice vectors of minimal norm.

    Triangular, hypercubic, D_d (d <= 8) and E_8 are found by exhaustive
    search over a box that provably contains every candidate; the Leech set
    is built from its three shape families and verified by membership and
    norm (completeness of the three families is classical).
    """
    if spec.name == "Leech":
        return _leech_minimal_vectors()
    if spec.name.startswith("D") and spec.dim > 8:
        # box search gets expensive; the minimal shape (two entries +-1) is
        # forced since any entry of size >= 2 already exceeds norm 2
        vectors = []
        for i, j in itertools.combinations(range(spec.dim), 2):
            for si, sj in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
                v = [0] * spec.dim
                v[i] = si
                v[j] = sj
                vectors.append(tuple(v))
        return GenSet.from_iterable(vectors)
    if spec.name.startswith("Z") or spec.name == "triangular":
        reach = 1
    elif spec.name.startswith("D") or spec.name == "E8":
        reach = 2
    else:
        raise DomainError(f"no feasible enumeration for {spec.name!r}")

    best: int | None = None
    found: list[tuple[int, ...]] = []
    for v in itertools.product(range(-reach, reach + 1), repeat=spec.dim):
        if all(c == 0 for c in v) or not contains(spec, v):
            continue
        q = norm_sq(spec, v)
        if best is None or q < best:
            best = q
            found = [v]
        elif q == best:
            found.append(v)
    if best is None:
        raise AssertionError("no nonzero vectors found")
    return GenSet.from_iterable(found)


@lru_cache(maxsize=1)
def _leech_minimal_vectors() -> GenSet:
    code = build_golay()
    vectors: list[tuple[int, ...]] = []

    for i, j in itertools.combinations(range(24), 2):
        for si, sj in ((4, 4), (4, -4), (-4, 4), (-4, -4)):
            v = [0] * 24
            v[i] = si
            v[j] = sj
            vectors.append(tuple(v))

    for octad in code.octads:
        support = [i for i in range(24) if octad >> i & 1]
        for signs in range(128):
            v = [0] * 24
            minus = 0
            for k, pos in enumerate(support[:-1]):
                if signs >> k & 1:
                    v[pos] = -2
                    minus += 1
                else:
                    v[pos] = 2
            v[support[-1]] = -2 if minus % 2 else 2
            vectors.append(tuple(v))

    for word in code.codewords:
        base = [-1 if word >> i & 1 else 1 for i in range(24)]
        for j in range(24):
            v = base[:]
            v[j] = base[j] - 4 * base[j]  # flip across 0 by 4: +-1 -> -+3
            vectors.append(tuple(v))

    if len(set(vectors)) != 196_560:
        raise AssertionError(f"built {len(set(vectors))} Leech vectors, wanted 196560")
    arr = np.array(vectors, dtype=np.int64)
    if not bool(leech_contains_bulk(arr, code).all()):
        raise AssertionError("constructed vector fails the digit conditions")
    if not bool(((arr * arr).sum(axis=1) == 32).all()):
        raise AssertionError("constructed vector has wrong norm")
    return GenSet.from_iterable(vectors)


# ---------------------------------------------------------------------------
# Leech membership via binary digits


def leech_contains(x, code: GolayCode) -> bool:
    """Digit-condition membership test for the integer Leech model.

    Bits of negative entries follow two's complement (bit k of x is
    (x >> k) & 1 with arithmetic shift): every entry shares bit 0; the bit-1
    pattern is a codeword; the bit-2 sum has the parity of the entries.
    """
    x = [int(c) for c in x]
    if len(x) != 24:
        raise DomainError("Leech vectors have 24 coordinates")
    b0 = x[0] & 1
    if any(c & 1 != b0 for c in x):
        return False
    word = 0
    for i, c in enumerate(x):
        word |= (c >> 1 & 1) << i
    if word not in code:
        return False
    return sum(c >> 2 & 1 for c in x) % 2 == b0


def leech_contains_bulk(arr: np.ndarray, code: GolayCode) -> np.ndarray:
    """Vectorized membership for an (n, 24) integer array."""
    arr = np.asarray(arr, dtype=np.int64)
    b0 = arr[:, :1] & 1
    ok = (arr & 1 == b0).all(axis=1)
    bit1 = (arr >> 1) & 1
    words = (bit1 << np.arange(24, dtype=np.int64)).sum(axis=1)
    word_table = np.array(sorted(_golay_word_set()), dtype=np.int64)
    pos = np.searchsorted(word_table, words)
    pos = np.clip(pos, 0, len(word_table) - 1)
    ok &= word_table[pos] == words
    bit2 = (arr >> 2) & 1
    ok &= bit2.sum(axis=1) % 2 == b0[:, 0]
    return ok


# ---------------------------------------------------------------------------
# span index and coordinate normalization


def span_index(vectors, spec: LatticeSpec) -> int:
    """Index inside the lattice of the subgroup the vectors generate.

    Exact HNF arithmetic on basis coordinates; stops early once the index
    reaches 1.  Raises if some vector is outside the lattice or the span
    never reaches full rank (infinite index).
    """
    acc = _HnfAccumulator(spec.dim)
    for v in vectors:
        coords = basis_coordinates(spec, v)
        if coords is None:
            raise DomainError(f"vector {tuple(v)} is not in the lattice")
        acc.add(coords)
        if acc.full_rank and acc.index() == 1:
            return 1
    idx = acc.index()
    if idx is None:
        raise DomainError("vectors do not span the lattice's full rank")
    return idx


def coordinate_scales(spec: LatticeSpec) -> tuple[int, ...]:
    """k_i = positive generator of the image of the i-th coordinate map."""
    rows = spec.matrix_rows()
    return tuple(math.gcd(*(abs(e) for e in row)) for row in rows)


def normalize_coordinates(spec: LatticeSpec, S: GenSet):
    """Divide coordinate i by k_i so every coordinate map becomes onto Z.

    Returns (new spec, new generating set, the scale factors).  Lattices that
    are already coordinate-onto come back unchanged.
    """
    ks = coordinate_scales(spec)
    if all(k == 1 for k in ks):
        return spec, S, ks
    columns = tuple(
        tuple(c // k for c, k in zip(col, ks)) for col in spec.columns
    )
    new_spec = LatticeSpec(spec.name + "/normalized", spec.dim, columns, "basis", spec.form)
    new_vectors = [tuple(c // k for c, k in zip(v, ks)) for v in S]
    return new_spec, GenSet.from_iterable(new_vectors), ks


def _require_normalized(spec: LatticeSpec) -> None:
    ks = coordinate_scales(spec)
    if any(k != 1 for k in ks):
        raise DomainError(
            f"coordinates not normalized (scales {ks}); run normalize_coordinates"
        )


def _point_with_coordinate(spec: LatticeSpec, axis: int, value: int) -> tuple[int, ...]:
    """Some lattice point whose axis-th coordinate equals value."""
    rows = spec.matrix_rows()
    row = rows[axis]
    # running extended gcd across the row gives coefficients with combo = gcd
    g = 0
    coeff = [0] * spec.dim
    for j, e in enumerate(row):
        if e == 0:
            continue
        if g == 0:
            g = abs(e)
            coeff = [0] * spec.dim
            coeff[j] = 1 if e > 0 else -1
        else:
            a, b = _bezout(g, e)
            coeff = [a * c for c in coeff]
            coeff[j] += b
            g = math.gcd(g, e)
    if g != 1:
        raise DomainError("coordinate map not onto; normalize first")
    point = [0] * spec.dim
    for j, c in enumerate(coeff):
        for i in range(spec.dim):
            point[i] += value * c * spec.columns[j][i]
    return tuple(point)


# ---------------------------------------------------------------------------
# crossing-adjacency checker (exact finite reduction)


@dataclass(frozen=True)
class CrossingAdjacency:
    """Exact verdict for one axis: can a sign change in coordinate i always
    be repaired through a neighbour in the zero slice (strict), or is every
    sign change forced through the slice itself (weak)."""

    axis: int
    mode: str
    passed: bool
    witness: dict | None = None


def check_crossing_adjacency(spec: LatticeSpec, S: GenSet, axis: int,
                             mode: str = "strict") -> CrossingAdjacency:
    """Decide the axis-crossing condition by finite reduction.

    Only the i-th coordinates matter: for an adjacent pair x, z = x + s with
    x_i = a < 0 < z_i, a neighbour of x (of z) in the slice exists iff -a
    (resp. -(a+s_i)) is an attainable i-th coordinate of a generator.  The
    weak mode instead demands no generator ever jumps the slice, i.e. every
    |s_i| <= 1.
    """
    if mode not in ("strict", "weak"):
        raise DomainError(f"unknown mode {mode!r}")
    if not 0 <= axis < spec.dim:
        raise DomainError(f"axis {axis} out of range")
    _require_normalized(spec)
    proj = {v[axis] for v in S}
    if mode == "weak":
        for v in S:
            if abs(v[axis]) > 1:
                s = v if v[axis] >= 2 else tuple(-c for c in v)
                x = _point_with_coordinate(spec, axis, -1)
                z = tuple(xi + si for xi, si in zip(x, s))
                return CrossingAdjacency(axis, mode, False,
                                         {"s": s, "a": -1, "x": x, "z": z})
        return CrossingAdjacency(axis, mode, True)
    for s in S:
        si = s[axis]
        if si < 2:
            continue
        for b in range(1, si):  # b = -x_i for the crossing offsets
            if b in proj or si - b in proj:
                continue
            x = _point_with_coordinate(spec, axis, -b)
            z = tuple(xi + ci for xi, ci in zip(x, s))
            return CrossingAdjacency(axis, mode, False,
                                     {"s": s, "a": -b, "x": x, "z": z})
    return CrossingAdjacency(axis, mode, True)


# ---------------------------------------------------------------------------
# slice-connectivity checker


@dataclass(frozen=True)
class SliceCertificate:
    """Bounded connectivity certificate for the zero slice of one axis.

    passed=True certifies every slice point of the inner box is reachable
    from the origin through slice points of the search box; it never decides
    the infinite statement.  method records how the certificate was obtained.
    """

    axis: int
    certify_radius: int
    search_radius: int
    passed: bool
    method: str
    points_certified: int
    detail: str = ""
    unreached: tuple[int, ...] | None = None


def _enumerate_box_points(spec: LatticeSpec, radius: int) -> np.ndarray:
    """All lattice points with every coordinate in [-radius, radius]."""
    side = 2 * radius + 1
    if spec.dim * math.log(side) > math.log(4e7):
        raise DomainError("box too large to enumerate pointwise")
    grids = np.meshgrid(*([np.arange(-radius, radius + 1)] * spec.dim), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    rule = spec.membership_id
    if rule == "all":
        return pts
    if rule == "sum-even":
        return pts[pts.sum(axis=1) % 2 == 0]
    if rule == "e8":
        parity_ok = (pts & 1 == (pts[:, :1] & 1)).all(axis=1)
        return pts[parity_ok & (pts.sum(axis=1) % 4 == 0)]
    if rule == "leech":
        return pts[leech_contains_bulk(pts, build_golay())]
    keep = [i for i, p in enumerate(map(tuple, pts)) if contains(spec, p)]
    return pts[keep]


def _bfs_slice_certificate(spec: LatticeSpec, S: GenSet, axis: int,
                           certify_radius: int, search_radius: int) -> SliceCertificate:
    gens = np.array([v for v in S if v[axis] == 0], dtype=np.int64)
    pts = _enumerate_box_points(spec, certify_radius)
    targets = pts[pts[:, axis] == 0]
    R = search_radius
    base = 2 * R + 1
    if spec.dim * math.log(base) > 62 * math.log(2):
        raise DomainError("search box too large for integer point encoding")
    weights = base ** np.arange(spec.dim, dtype=np.int64)

    def encode(a: np.ndarray) -> np.ndarray:
        return (a + R) @ weights

    target_codes = np.sort(encode(targets))
    origin = np.zeros((1, spec.dim), dtype=np.int64)
    visited = encode(origin)
    frontier = origin
    remaining = target_codes[~np.isin(target_codes, visited)]
    while len(frontier) and len(remaining):
        nxt = (frontier[:, None, :] + gens[None, :, :]).reshape(-1, spec.dim)
        inside = (np.abs(nxt) <= R).all(axis=1)
        nxt = nxt[inside]
        codes = encode(nxt)
        codes, first = np.unique(codes, return_index=True)
        new_mask = ~np.isin(codes, visited)
        codes = codes[new_mask]
        frontier = nxt[first[new_mask]]
        visited = np.sort(np.concatenate([visited, codes]))
        remaining = remaining[~np.isin(remaining, codes)]
    if len(remaining):
        missing_code = int(remaining[0])
        digs = []
        for _ in range(spec.dim):
            digs.append(missing_code % base - R)
            missing_code //= base
        return SliceCertificate(axis, certify_radius, search_radius, False, "bfs",
                                len(targets) - len(remaining),
                                unreached=tuple(digs))
    return SliceCertificate(axis, certify_radius, search_radius, True, "bfs",
                            len(targets))


@lru_cache(maxsize=1)
def _leech_slice_tables():
    code = build_golay()
    octads = code.octads
    octad_set = set(octads)
    # for each dodecad, the 66 decompositions indexed by the 2-point overlap
    decomps: dict[int, list[tuple[int, int]]] = {}
    for dd in code.dodecads:
        pairs = []
        for o1 in octads:
            o2 = o1 ^ dd
            if o1 < o2 and o2 in octad_set:
                pairs.append((o1, o2))
        decomps[dd] = pairs
    # weight-16 words split into disjoint octads
    sixteens: dict[int, list[tuple[int, int]]] = {}
    all_ones = (1 << 24) - 1
    for o in octads:
        c = all_ones ^ o
        parts = []
        for o1 in octads:
            o2 = o1 ^ c
            if o1 < o2 and o1 & c == o1 and o2 in octad_set:
                parts.append((o1, o2))
        sixteens[c] = parts
    return decomps, sixteens


def _signed_support_vector(support_bits: int, minus_bits: int) -> tuple[int, ...]:
    return tuple(
        (-2 if minus_bits >> i & 1 else 2) if support_bits >> i & 1 else 0
        for i in range(24)
    )


@lru_cache(maxsize=1)
def _leech_octad_layer_verified() -> int:
    """Every even-minus signed octad vector is a minimal vector: verified
    exhaustively once (the per-axis certificates use the subset avoiding
    their axis).  Returns the number of vectors checked."""
    code = build_golay()
    s_set = set(_leech_minimal_vectors().vectors)
    count = 0
    for o in code.octads:
        support = [i for i in range(24) if o >> i & 1]
        for signs in range(1 << 7):
            minus = 0
            parity = 0
            for k in range(7):
                if signs >> k & 1:
                    minus |= 1 << support[k]
                    parity ^= 1
            if parity:
                minus |= 1 << support[7]
            if _signed_support_vector(o, minus) not in s_set:
                raise AssertionError("signed octad vector missing from the minimal set")
            count += 1
    return count


def _leech_slice_certificate(S: GenSet, axis: int, rng_seed: int = 7) -> SliceCertificate:
    """Structured radius-2 connectivity certificate for a Leech slice.

    Slice points of the [-2,2] box are exactly the even-signed codeword
    vectors 2*sigma*chi_C with C avoiding the axis (no odd point fits the box
    since all codeword weights are multiples of 4).  Octad supports are single
    generator steps; dodecad supports split through two octads overlapping
    outside the support; weight-16 supports split into two disjoint octads
    with a final +-4 pair step fixing sign parity.  All decompositions are
    verified exhaustively per support; explicit sample paths are replayed
    point-by-point as an extra guard.
    """
    code = build_golay()
    if S.vectors != _leech_minimal_vectors().vectors:
        raise DomainError("the structured certificate requires the minimal-vector set")
    s_set = set(S.vectors)
    rng = substream(rng_seed, "leech-slice", axis)

    # digit sanity for the box characterization: codeword weights mod 4
    if any(w.bit_count() % 4 for w in code.codewords):
        raise AssertionError("codeword weight not a multiple of 4")

    checked = 1  # origin
    bit = 1 << axis

    # octad supports avoiding the axis are single generator steps; the full
    # signed family is membership-checked once, globally
    _leech_octad_layer_verified()
    oct_avoid = [o for o in code.octads if not o & bit]
    checked += len(oct_avoid) << 7

    decomps, sixteens = _leech_slice_tables()

    # dodecad supports: need a decomposition with both octads avoiding the axis,
    # whose overlap can absorb either sign parity (the overlap is outside the
    # support, so each part's minus count is adjustable by the overlap signs)
    dodecad_pairs: dict[int, tuple[int, int]] = {}
    for dd in code.dodecads:
        if dd & bit:
            continue
        for o1, o2 in decomps[dd]:
            if not (o1 | o2) & bit:
                if o1 ^ o2 != dd or (o1 & o2).bit_count() != 2:
                    raise AssertionError("bad decomposition table")
                dodecad_pairs[dd] = (o1, o2)
                break
        else:
            return SliceCertificate(axis, 2, 2, False, "structured", checked,
                                    detail=f"dodecad {dd:#x} has no axis-avoiding split")
        checked += 1 << 11

    # weight-16 supports: disjoint octad splits stay inside the support, so
    # avoiding the axis is automatic; sign parity is repaired by a +-4 pair
    sixteen_pairs: dict[int, tuple[int, int]] = {}
    for c, parts in sixteens.items():
        if c & bit:
            continue
        if not parts:
            return SliceCertificate(axis, 2, 2, False, "structured", checked,
                                    detail=f"16-support {c:#x} has no disjoint split")
        sixteen_pairs[c] = parts[0]
        checked += 1 << 15

    # replay explicit sample paths point-by-point
    def verify_path(target, steps):
        pos = (0,) * 24
        for step in steps:
            if step not in s_set or step[axis] != 0:
                raise AssertionError("path step is not a slice generator")
            pos = tuple(p + q for p, q in zip(pos, step))
            if max(abs(c) for c in pos) > 2:
                raise AssertionError("path leaves the certified box")
        if pos != target:
            raise AssertionError("path misses its target")

    for dd, (o1, o2) in dodecad_pairs.items():
        support = [i for i in range(24) if dd >> i & 1]
        overlap = [i for i in range(24) if (o1 & o2) >> i & 1]
        for _ in range(8):
            minus_positions = [p for p in support if rng.below(2)]
            if len(minus_positions) % 2:
                minus_positions = minus_positions[1:]
            minus = 0
            for p in minus_positions:
                minus |= 1 << p
            target = _signed_support_vector(dd, minus)
            # choose overlap signs for the first octad to even out its count
            m1_base = (minus & o1 & ~o2).bit_count()
            t = overlap[0:1] if m1_base % 2 else []
            m1 = (minus & o1 & ~o2)
            for p in t:
                m1 |= 1 << p
            step1 = _signed_support_vector(o1, m1)
            # second octad must cancel the overlap entries of step1
            m2 = (minus & o2 & ~o1)
            for p in overlap:
                if not m1 >> p & 1:
                    m2 |= 1 << p
            step2 = _signed_support_vector(o2, m2)
            verify_path(target, [step1, step2])

    for c, (o1, o2) in sixteen_pairs.items():
        support = [i for i in range(24) if c >> i & 1]
        for _ in range(8):
            minus_positions = [p for p in support if rng.below(2)]
            if len(minus_positions) % 2:
                minus_positions = minus_positions[1:]
            minus = 0
            for p in minus_positions:
                minus |= 1 << p
            target = _signed_support_vector(c, minus)
            m1 = minus & o1
            m2 = minus & o2
            steps = []
            if m1.bit_count() % 2 == 0:
                steps = [_signed_support_vector(o1, m1), _signed_support_vector(o2, m2)]
            else:
                j1 = next(i for i in range(24) if o1 >> i & 1)
                j2 = next(i for i in range(24) if o2 >> i & 1)
                m1f = m1 ^ (1 << j1)
                m2f = m2 ^ (1 << j2)
                fix = [0] * 24
                fix[j1] = 4 if m1f >> j1 & 1 else -4
                fix[j2] = 4 if m2f >> j2 & 1 else -4
                steps = [
                    _signed_support_vector(o1, m1f),
                    _signed_support_vector(o2, m2f),
                    tuple(fix),
                ]
            verify_path(target, steps)

    return SliceCertificate(
        axis, 2, 2, True, "structured", checked,
        detail="octad layer exhaustive; dodecad/16 supports split-verified "
               "with sampled path replay",
    )


def check_slice_connectivity(spec: LatticeSpec, S: GenSet, axis: int,
                             certify_radius: int, search_radius: int | None = None,
                             ) -> SliceCertificate:
    """Certify that slice points near the origin are reachable inside a box.

    Generic lattices get a breadth-first search over the boxed slice; the
    Leech lattice gets a structured certificate (its radius-2 slice holds
    about 11 million points, far beyond pointwise search).
    """
    if not 0 <= axis < spec.dim:
        raise DomainError(f"axis {axis} out of range")
    if certify_radius < 1:
        raise DomainError("certify_radius >= 1 required")
    _require_normalized(spec)
    if spec.name == "Leech":
        if certify_radius != 2:
            raise DomainError("the structured Leech certificate covers radius 2")
        return _leech_slice_certificate(S, axis)
    if search_radius is None:
        search_radius = 2 * certify_radius
    if search_radius < certify_radius:
        raise DomainError("search_radius must cover certify_radius")
    return _bfs_slice_certificate(spec, S, axis, certify_radius, search_radius)


# ---------------------------------------------------------------------------
# aggregate hypothesis report


@dataclass(frozen=True)
class HypothesisReport:
    """Per-axis checker results for one of the two structural hypotheses.

    theorem "setup" pairs strict crossing-adjacency with slice connectivity;
    "setupblack" uses the weak (no-jump) crossing condition instead.  The
    overall verdict is pass-bounded at best because slice connectivity is
    only ever certified to a radius.
    """

    lattice: str
    theorem: str
    adjacency: tuple[CrossingAdjacency, ...]
    slices: tuple[SliceCertificate, ...]
    verdict: str

    @property
    def passed(self) -> bool:
        return self.verdict.startswith("pass")


def hypothesis_report(spec: LatticeSpec, S: GenSet, theorem: str,
                      certify_radius: int, search_radius: int | None = None,
                      ) -> HypothesisReport:
    if theorem not in ("setup", "setupblack"):
        raise DomainError(f"unknown theorem tag {theorem!r}")
    if S.has_zero():
        raise DomainError("generating set contains 0")
    if not S.is_symmetric():
        raise DomainError("generating set is not symmetric")
    idx = span_index(S.vectors, spec)
    if idx != 1:
        raise DomainError(f"generating set spans a sublattice of index {idx}")
    mode = "strict" if theorem == "setup" else "weak"
    adjacency = []
    slices = []
    for axis in range(spec.dim):
        adjacency.append(check_crossing_adjacency(spec, S, axis, mode))
        slices.append(check_slice_connectivity(spec, S, axis, certify_radius,
                                               search_radius))
    if all(a.passed for a in adjacency) and all(s.passed for s in slices):
        verdict = "pass-bounded"
    else:
        verdict = "fail"
    return HypothesisReport(spec.name, theorem, tuple(adjacency), tuple(slices), verdict)
