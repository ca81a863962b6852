"""Sampling and evaluating truncated random coprime colourings on windows.

A configuration picks, independently for every prime p up to a truncation
bound P, a uniform coset of p times the lattice; a point is white when it
avoids every chosen coset.  Windows are dense boxes; colours live in a boolean
array whose last axis is the first coordinate (C order, axis 1 fastest).
The gcd oracle gives the exact infinite-prime colouring relative to a base
point, which is what the truncated sampler converges to.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce

import numpy as np

from .arith import primes_up_to
from .errors import DomainError, ParseError
from .lattice import LatticeSpec, basis_coordinates, standard_lattice
from .rng import RNG_ID, substream

_U64 = (1 << 64) - 1


# ---------------------------------------------------------------------------
# lattice registry for serialized ids


def lattice_from_id(lattice_id: str) -> LatticeSpec:
    m = re.fullmatch(r"Z(\d+)", lattice_id)
    if m:
        return standard_lattice("hypercubic", int(m.group(1)))[0]
    m = re.fullmatch(r"D(\d+)", lattice_id)
    if m:
        return standard_lattice("D", int(m.group(1)))[0]
    if lattice_id == "E8":
        return standard_lattice("E8")[0]
    if lattice_id == "Leech":
        return standard_lattice("Leech")[0]
    if lattice_id == "triangular":
        return standard_lattice("triangular")[0]
    raise DomainError(f"unknown lattice id {lattice_id!r}")


# ---------------------------------------------------------------------------
# types


@dataclass(frozen=True)
class CosetConfig:
    """One truncated scenery: a coset representative of pΓ for every p <= P.

    Representatives are coefficient vectors in the lattice basis, entries in
    [0, p); for the hypercubic lattices these are plain coordinates mod p.
    """

    lattice_id: str
    P: int
    seed: int
    rng_id: str
    reps: dict[int, tuple[int, ...]] = field(compare=True)

    def rep(self, p: int) -> tuple[int, ...]:
        return self.reps[p]


@dataclass(frozen=True)
class Window:
    """Axis-aligned box of lattice sites: origin corner plus per-axis extents."""

    origin: tuple[int, ...]
    extents: tuple[int, ...]

    def __post_init__(self):
        if len(self.origin) != len(self.extents):
            raise DomainError("origin and extents disagree on dimension")
        if any(e < 1 for e in self.extents):
            raise DomainError("extents must be >= 1")

    @property
    def dim(self) -> int:
        return len(self.extents)

    @property
    def point_count(self) -> int:
        return math.prod(self.extents)

    def array_shape(self) -> tuple[int, ...]:
        return self.extents[::-1]

    def contains_point(self, v) -> bool:
        return all(o <= c < o + e for c, o, e in zip(v, self.origin, self.extents))


@dataclass
class Colouring:
    """White/black bits over a window, plus where they came from.

    white[..., j2, j1] is the point origin + (j1, j2, ...).  For windows on a
    proper sublattice, in_lattice marks which grid positions are actual
    lattice points; elsewhere it is None and every position is a point.
    """

    window: Window
    white: np.ndarray
    lattice_id: str
    provenance: str
    in_lattice: np.ndarray | None = None

    def white_at(self, v) -> bool:
        idx = tuple(c - o for c, o in zip(v, self.window.origin))[::-1]
        if self.in_lattice is not None and not self.in_lattice[idx]:
            raise DomainError(f"{tuple(v)} is not a lattice point of this window")
        return bool(self.white[idx])

    def white_fraction(self) -> float:
        if self.in_lattice is None:
            return float(self.white.mean())
        n = int(self.in_lattice.sum())
        return float((self.white & self.in_lattice).sum() / n) if n else float("nan")


# ---------------------------------------------------------------------------
# sampling


def sample_coset_config(spec: LatticeSpec, P: int, seed: int) -> CosetConfig:
    """Independent uniform coset per prime p <= P, reproducible from the seed.

    Each prime gets its own derived stream, so the result does not depend on
    evaluation order or on which other primes are sampled.
    """
    if P < 2:
        raise DomainError(f"need P >= 2, got {P}")
    reps: dict[int, tuple[int, ...]] = {}
    for p in primes_up_to(P):
        stream = substream(seed, "coset", p)
        reps[p] = tuple(stream.below(p) for _ in range(spec.dim))
    return CosetConfig(spec.name, P, seed & _U64, RNG_ID, reps)


def colour_window(config: CosetConfig, window: Window) -> Colouring:
    """Evaluate the truncated colouring on a window.

    A point is black when its basis-coefficient vector matches some prime's
    representative mod p.  Hypercubic lattices take the fast dense path;
    other lattices enumerate their points inside the box through the basis.
    """
    spec = lattice_from_id(config.lattice_id)
    if window.dim != spec.dim:
        raise DomainError(f"window dimension {window.dim} != lattice dimension {spec.dim}")
    provenance = (
        f"config lattice={config.lattice_id} P={config.P} "
        f"seed={config.seed} rng={config.rng_id}"
    )
    if config.lattice_id.startswith("Z"):
        white = np.ones(window.array_shape(), dtype=bool)
        for p, rep in config.reps.items():
            idx = tuple(
                slice((rep[k] - window.origin[k]) % p, None, p)
                for k in reversed(range(window.dim))
            )
            white[idx] = False
        return Colouring(window, white, config.lattice_id, provenance)
    return _colour_sublattice_window(spec, config, window, provenance)


def _coefficient_box(spec: LatticeSpec, window: Window):
    """Integer bounds on basis coefficients of lattice points in the window."""
    from .lattice import _adjugate_and_det  # exact inverse pieces

    adj, det = _adjugate_and_det(spec)
    d = spec.dim
    corners = []
    for mask in range(1 << d):
        corner = [
            window.origin[i] + (window.extents[i] - 1 if mask >> i & 1 else 0)
            for i in range(d)
        ]
        corners.append(corner)
    los, his = [], []
    for i in range(d):
        vals = [
            Fraction(sum(adj[i][j] * corner[j] for j in range(d)), det)
            for corner in corners
        ]
        los.append(math.ceil(min(vals)))
        his.append(math.floor(max(vals)))
    return los, his


def _colour_sublattice_window(spec, config, window, provenance) -> Colouring:
    import itertools

    shape = window.array_shape()
    white = np.zeros(shape, dtype=bool)
    in_lattice = np.zeros(shape, dtype=bool)
    los, his = _coefficient_box(spec, window)
    d = spec.dim
    cols = spec.columns
    primes = sorted(config.reps)
    for coeff in itertools.product(*(range(lo, hi + 1) for lo, hi in zip(los, his))):
        v = tuple(sum(coeff[j] * cols[j][i] for j in range(d)) for i in range(d))
        if not window.contains_point(v):
            continue
        idx = tuple(c - o for c, o in zip(v, window.origin))[::-1]
        in_lattice[idx] = True
        black = any(
            all((c - r) % p == 0 for c, r in zip(coeff, config.reps[p]))
            for p in primes
        )
        white[idx] = not black
    return Colouring(window, white, config.lattice_id, provenance, in_lattice)


def oracle_from_origin(X, window: Window) -> Colouring:
    """Exact infinite-prime colouring: white iff v - X has coprime coordinates.

    The base point itself has gcd 0 and is black, matching the convention
    that visibility relates distinct points.
    """
    X = tuple(int(c) for c in X)
    if len(X) != window.dim:
        raise DomainError("base point dimension mismatch")
    axes = np.indices(window.array_shape(), dtype=np.int64)
    g = np.zeros(window.array_shape(), dtype=np.int64)
    for k in range(window.dim):
        coord = axes[window.dim - 1 - k] + (window.origin[k] - X[k])
        g = np.gcd(g, coord)
    white = g == 1
    provenance = "oracle X=" + ",".join(str(c) for c in X)
    return Colouring(window, white, f"Z{window.dim}", provenance)


def truncation_error_bound(window: Window, P: int, d: int | None = None) -> Fraction:
    """Upper bound on the chance any window point is wrongly white at cutoff P.

    Union bound: |window| * sum over p > P of p^-d, enclosed by the integral
    bound |window| * P^(1-d) / (d-1).
    """
    if d is None:
        d = window.dim
    if d != window.dim:
        raise DomainError("dimension argument disagrees with the window")
    if d < 2:
        raise DomainError("need dimension >= 2")
    if P < 2:
        raise DomainError("need P >= 2")
    return Fraction(window.point_count, (d - 1) * P ** (d - 1))


# ---------------------------------------------------------------------------
# inference


@dataclass(frozen=True)
class InferResult:
    """Per-prime candidate residues that could be the hidden coset."""

    candidates: dict[int, list[tuple[int, ...]]]
    truncation_warning: bool


def infer_cosets(colouring: Colouring, p_max: int) -> InferResult:
    """All residues r mod p whose entire class is black in the window, p <= p_max.

    When the colouring came from a config, the true representative is always
    among the candidates for p <= its truncation bound; beyond that bound the
    result carries a warning flag.
    """
    if colouring.in_lattice is not None:
        raise DomainError("inference implemented for full-grid windows")
    import itertools

    window = colouring.window
    d = window.dim
    candidates: dict[int, list[tuple[int, ...]]] = {}
    for p in primes_up_to(p_max):
        found = []
        for r in itertools.product(range(p), repeat=d):
            idx = tuple(
                slice((r[k] - window.origin[k]) % p, None, p)
                for k in reversed(range(d))
            )
            if not colouring.white[idx].any():
                found.append(r)
        candidates[p] = found
    warning = False
    m = re.search(r"\bP=(\d+)", colouring.provenance)
    if m and p_max > int(m.group(1)):
        warning = True
    return InferResult(candidates, warning)


# ---------------------------------------------------------------------------
# block invariant helper


def has_full_white_block(colouring: Colouring, side: int = 2) -> bool:
    """Whether some axis-aligned side^d block of the window is entirely white."""
    W = colouring.white
    if colouring.in_lattice is not None:
        W = W & colouring.in_lattice
    if any(n < side for n in W.shape):
        return False
    import itertools

    views = []
    for offsets in itertools.product(range(side), repeat=W.ndim):
        views.append(W[tuple(slice(o, n - side + 1 + o) for o, n in zip(offsets, W.shape))])
    return bool(reduce(np.logical_and, views).any())


# ---------------------------------------------------------------------------
# config files


def save_config(config: CosetConfig, path) -> None:
    lines = [
        f"coprime-config v1 lattice={config.lattice_id} P={config.P} "
        f"seed={config.seed} rng={config.rng_id}"
    ]
    for p in sorted(config.reps):
        lines.append(f"{p} " + " ".join(str(r) for r in config.reps[p]))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


_CONFIG_HEADER = re.compile(
    r"coprime-config v1 lattice=(\S+) P=(\d+) seed=(\d+) rng=(\S+)\s*$"
)


def load_config(path) -> CosetConfig:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseError("empty config file", line=1)
    m = _CONFIG_HEADER.match(lines[0])
    if not m:
        raise ParseError("bad header", line=1)
    lattice_id, P, seed, rng_id = m.group(1), int(m.group(2)), int(m.group(3)), m.group(4)
    spec = lattice_from_id(lattice_id)
    expected = list(primes_up_to(P))
    reps: dict[int, tuple[int, ...]] = {}
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        parts = raw.split()
        try:
            values = [int(t) for t in parts]
        except ValueError:
            raise ParseError(f"non-integer token in {raw!r}", line=lineno) from None
        p, rep = values[0], tuple(values[1:])
        if len(rep) != spec.dim:
            raise ParseError(
                f"expected {spec.dim} residues for p={p}, got {len(rep)}", line=lineno
            )
        if reps and p <= max(reps):
            raise ParseError("primes out of order", line=lineno)
        if any(not 0 <= r < p for r in rep):
            raise ParseError(f"residue out of range [0,{p}) for p={p}", line=lineno)
        reps[p] = rep
    if sorted(reps) != expected:
        raise ParseError(
            f"config lists {len(reps)} primes, header promises {len(expected)}",
            line=len(lines),
        )
    return CosetConfig(lattice_id, P, seed, rng_id, reps)


# ---------------------------------------------------------------------------
# colouring files (binary PGM)


def save_colouring(colouring: Colouring, path) -> None:
    """Write a 2-D full-grid colouring as binary PGM, white = 255.

    Raster rows run along increasing axis-2 coordinate, columns along axis 1.
    """
    if colouring.window.dim != 2:
        raise DomainError("PGM export is two-dimensional")
    if colouring.in_lattice is not None:
        raise DomainError("PGM export covers full-grid windows only")
    window = colouring.window
    header = (
        b"P5\n"
        + f"# origin={window.origin[0]} {window.origin[1]}\n".encode()
        + f"# extents={window.extents[0]} {window.extents[1]}\n".encode()
        + f"# provenance={colouring.provenance}\n".encode()
        + f"{window.extents[0]} {window.extents[1]}\n255\n".encode()
    )
    raster = np.where(colouring.white, 255, 0).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(raster.tobytes())


def load_colouring(path) -> Colouring:
    with open(path, "rb") as fh:
        data = fh.read()
    pos = 0

    def take_line(lineno):
        nonlocal pos
        end = data.find(b"\n", pos)
        if end < 0:
            raise ParseError("truncated header", line=lineno)
        out = data[pos:end]
        pos = end + 1
        return out

    if take_line(1) != b"P5":
        raise ParseError("not a binary PGM", line=1)
    meta = {}
    lineno = 1
    while True:
        lineno += 1
        line = take_line(lineno)
        if line.startswith(b"#"):
            text = line[1:].strip().decode("utf-8")
            key, _, value = text.partition("=")
            meta[key.strip()] = value
            continue
        dims = line.split()
        if len(dims) != 2:
            raise ParseError("expected width and height", line=lineno)
        width, height = int(dims[0]), int(dims[1])
        break
    lineno += 1
    if take_line(lineno) != b"255":
        raise ParseError("expected maxval 255", line=lineno)
    raster = data[pos:]
    if len(raster) != width * height:
        raise ParseError(
            f"raster holds {len(raster)} bytes, expected {width * height}", line=lineno
        )
    if "origin" not in meta or "extents" not in meta:
        raise ParseError("missing origin/extents comments", line=2)
    origin = tuple(int(t) for t in meta["origin"].split())
    extents = tuple(int(t) for t in meta["extents"].split())
    if extents != (width, height):
        raise ParseError("extents comment disagrees with raster size", line=2)
    arr = np.frombuffer(raster, dtype=np.uint8).reshape(height, width)
    bad = (arr != 0) & (arr != 255)
    if bad.any():
        raise ParseError("raster contains values other than 0 and 255", line=lineno)
    window = Window(origin, extents)
    provenance = meta.get("provenance", "unknown")
    guess = re.search(r"lattice=(\S+)", provenance)
    lattice_id = guess.group(1) if guess else f"Z{window.dim}"
    return Colouring(window, arr == 255, lattice_id, provenance)
