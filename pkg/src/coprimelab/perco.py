"""Cluster labeling, crossing events and the Monte Carlo estimation harness.

Events are always evaluated on finite windows of the truncated model; the
estimators derive one independent RNG substream per trial from the master
seed, so success counts are plain integer sums and results are identical for
any worker count.  Truncating the prime set only ever adds white points,
which keeps the estimated crossing probabilities on the safe side of the
second-moment upper bounds.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

try:
    from scipy import ndimage as _ndimage
except ImportError:  # pragma: no cover - scipy is a hard dependency
    _ndimage = None

from .arith import decimal_str, primes_up_to
from .colouring import Colouring, Window, colour_window, sample_coset_config
from .errors import DomainError
from .lattice import GenSet, standard_lattice
from .rng import stream_seed, substream

WILSON_Z = 1.959963984540054  # two-sided 95%

MC_CSV_HEADER = "experiment,n,x,P,trials,successes,estimate,ci_lo,ci_hi,seed"


def trial_seed(master_seed: int, index: int) -> int:
    """Seed of the index-th trial's private substream family."""
    return stream_seed(master_seed, "trial", index)


def wilson_interval(successes: int, trials: int) -> tuple[float, float]:
    if trials < 1 or not 0 <= successes <= trials:
        raise DomainError("need 0 <= successes <= trials, trials >= 1")
    z = WILSON_Z
    phat = successes / trials
    denom = 1 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


@dataclass(frozen=True)
class McStats:
    """One Monte Carlo experiment: integer counts plus a Wilson 95% interval."""

    experiment: str
    n: int
    x: int
    P: int
    trials: int
    successes: int
    seed: int

    @property
    def estimate(self) -> float:
        return self.successes / self.trials

    @property
    def ci(self) -> tuple[float, float]:
        return wilson_interval(self.successes, self.trials)

    @property
    def std_error(self) -> float:
        p = self.estimate
        return math.sqrt(max(p * (1 - p), 1 / self.trials) / self.trials)

    def csv_row(self) -> str:
        lo, hi = self.ci
        return ",".join(
            [
                self.experiment,
                str(self.n),
                str(self.x),
                str(self.P),
                str(self.trials),
                str(self.successes),
                decimal_str(Fraction(self.successes, self.trials)),
                decimal_str(Fraction(lo)),
                decimal_str(Fraction(hi)),
                str(self.seed),
            ]
        )


# ---------------------------------------------------------------------------
# cluster labeling


@dataclass
class ClusterLabels:
    """Connected components of one colour under a generating-set adjacency.

    labels holds a component id per grid position (-1 where the position has
    the other colour or is not a lattice point); ids are assigned in raster
    order of first appearance.  touches[c, k] tells whether component c meets
    the low/high window face along coordinate axis k.
    """

    window: Window
    colour: str
    labels: np.ndarray
    count: int
    sizes: np.ndarray
    touches: np.ndarray

    def boundary_components(self) -> np.ndarray:
        return np.nonzero(self.touches.any(axis=(1, 2)))[0]


def _first_visit_remap(raw: np.ndarray, count: int) -> tuple[np.ndarray, int]:
    flat = raw.ravel()
    uniq, first = np.unique(flat, return_index=True)
    keep = uniq > 0
    uniq, first = uniq[keep], first[keep]
    order = np.argsort(first, kind="stable")
    remap = np.full(count + 1, -1, dtype=np.int64)
    remap[uniq[order]] = np.arange(len(uniq))
    out = np.where(raw > 0, remap[raw], -1)
    return out, len(uniq)


def _labels_ndimage(mask: np.ndarray, S: GenSet) -> tuple[np.ndarray, int]:
    d = mask.ndim
    structure = np.zeros((3,) * d, dtype=bool)
    structure[(1,) * d] = True
    for s in S:
        structure[tuple(c + 1 for c in reversed(s))] = True
    raw, count = _ndimage.label(mask, structure=structure)
    return _first_visit_remap(raw, count)


class _DisjointSet:
    def __init__(self, size: int):
        self.parent = list(range(size))

    def find(self, a: int) -> int:
        p = self.parent
        while p[a] != a:
            p[a] = p[p[a]]
            a = p[a]
        return a

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def _labels_unionfind(mask: np.ndarray, S: GenSet) -> tuple[np.ndarray, int]:
    shape = mask.shape
    d = mask.ndim
    total = mask.size
    dsu = _DisjointSet(total)
    flat = mask.ravel()
    half = [s for s in S if s > tuple(-c for c in s)]
    strides = np.cumprod((1,) + shape[:0:-1])[::-1]
    for s in half:
        offset = tuple(reversed(s))  # array-axis order
        src = tuple(
            slice(max(0, -o), n - max(0, o)) for o, n in zip(offset, shape)
        )
        dst = tuple(
            slice(max(0, o), n - max(0, -o)) for o, n in zip(offset, shape)
        )
        both = mask[src] & mask[dst]
        if not both.any():
            continue
        base = np.nonzero(both)
        a_idx = np.zeros(len(base[0]), dtype=np.int64)
        b_idx = np.zeros(len(base[0]), dtype=np.int64)
        for ax in range(d):
            a_idx += (base[ax] + src[ax].start) * strides[ax]
            b_idx += (base[ax] + dst[ax].start) * strides[ax]
        for a, b in zip(a_idx.tolist(), b_idx.tolist()):
            dsu.union(a, b)
    raw = np.zeros(total, dtype=np.int64)
    next_label = 0
    roots: dict[int, int] = {}
    on = np.nonzero(flat)[0]
    for i in on.tolist():
        r = dsu.find(i)
        if r not in roots:
            next_label += 1
            roots[r] = next_label
        raw[i] = roots[r]
    return np.where(raw > 0, raw - 1, -1).reshape(shape), next_label


def label_clusters(colouring: Colouring, S: GenSet, colour: str = "white") -> ClusterLabels:
    """Union-find components of one colour; ids in raster first-visit order.

    Generating sets inside the unit box go through the fast ndimage path; any
    other symmetric set falls back to explicit union-find over offsets.
    """
    if colour not in ("white", "black"):
        raise DomainError(f"colour must be white or black, got {colour!r}")
    if S.dim != colouring.window.dim:
        raise DomainError("generating set dimension mismatch")
    if not S.is_symmetric() or S.has_zero():
        raise DomainError("adjacency needs a symmetric generating set without 0")
    mask = colouring.white if colour == "white" else ~colouring.white
    if colouring.in_lattice is not None:
        mask = mask & colouring.in_lattice
    unit_range = all(all(abs(c) <= 1 for c in s) for s in S)
    if unit_range and _ndimage is not None:
        labels, count = _labels_ndimage(mask, S)
    else:
        labels, count = _labels_unionfind(mask, S)
    sizes = np.bincount(labels[labels >= 0], minlength=count).astype(np.int64)
    d = colouring.window.dim
    touches = np.zeros((count, d, 2), dtype=bool)
    for k in range(d):
        ax = d - 1 - k  # array axis for coordinate k
        for side, index in ((0, 0), (1, -1)):
            face = np.take(labels, index, axis=ax)
            ids = np.unique(face[face >= 0])
            touches[ids, k, side] = True
    return ClusterLabels(colouring.window, colour, labels, count, sizes, touches)


# ---------------------------------------------------------------------------
# crossing events


@dataclass(frozen=True)
class CrossingResult:
    """Outcome of scanning a rectangle for fully-white lines."""

    kind: str
    rect: tuple[int, int, int, int]
    crossed: bool
    line_count: int
    witness: int | None


def crossing(colouring: Colouring, rect: tuple[int, int, int, int],
             kind: str = "horizontal") -> CrossingResult:
    """Count fully-white rows (kind=horizontal) or columns (vertical) of rect.

    rect = (i1, i2, j1, j2), axis-1 range then axis-2 range, inclusive, in
    lattice coordinates.
    """
    if kind not in ("horizontal", "vertical"):
        raise DomainError(f"kind must be horizontal or vertical, got {kind!r}")
    if colouring.window.dim != 2:
        raise DomainError("crossing events are two-dimensional")
    if colouring.in_lattice is not None:
        raise DomainError("crossing events need full-grid windows")
    i1, i2, j1, j2 = rect
    if i1 > i2 or j1 > j2:
        raise DomainError("empty rectangle")
    window = colouring.window
    if not (window.contains_point((i1, j1)) and window.contains_point((i2, j2))):
        raise DomainError("rectangle leaves the window")
    oi, oj = window.origin
    sub = colouring.white[j1 - oj : j2 - oj + 1, i1 - oi : i2 - oi + 1]
    axis = 1 if kind == "horizontal" else 0
    full = sub.all(axis=axis)
    count = int(full.sum())
    if count == 0:
        return CrossingResult(kind, rect, False, 0, None)
    first = int(np.argmax(full))
    witness = (j1 if kind == "horizontal" else i1) + first
    return CrossingResult(kind, rect, True, count, witness)


@dataclass(frozen=True)
class AnnulusResult:
    """A white circuit around the central box, as four witness lines."""

    k: int
    occurred: bool
    left_column: int | None = None
    right_column: int | None = None
    bottom_row: int | None = None
    top_row: int | None = None

    def witness_lines(self) -> list[str]:
        if not self.occurred:
            return []
        k = self.k
        return [
            f"vertical x={self.left_column} y={-k}..{k}",
            f"vertical x={self.right_column} y={-k}..{k}",
            f"horizontal y={self.bottom_row} x={-k}..{k}",
            f"horizontal y={self.top_row} x={-k}..{k}",
        ]


def annulus_event(colouring: Colouring, k: int) -> AnnulusResult:
    """White circuit event at scale k: four crossings surrounding [-k/3, k/3]^2.

    The two vertical strips [-k,-k/3] and [k/3,k] must contain a fully-white
    column over [-k,k], the two horizontal strips a fully-white row.
    """
    if k < 3 or k % 3:
        raise DomainError(f"annulus scale must be a positive multiple of 3, got {k}")
    m = k // 3
    left = crossing(colouring, (-k, -m, -k, k), "vertical")
    right = crossing(colouring, (m, k, -k, k), "vertical")
    bottom = crossing(colouring, (-k, k, -k, -m), "horizontal")
    top = crossing(colouring, (-k, k, m, k), "horizontal")
    if left.crossed and right.crossed and bottom.crossed and top.crossed:
        return AnnulusResult(k, True, left.witness, right.witness,
                             bottom.witness, top.witness)
    return AnnulusResult(k, False)


def check_annulus_consequences(colouring: Colouring, k: int) -> None:
    """Assert the structural consequences of a positive annulus event.

    No black component may reach from the central box to the window boundary,
    and all white components joining the central box to the boundary must be
    one and the same (the circuit's component).  Raises AssertionError with
    the offending component otherwise.
    """
    m = k // 3
    S = GenSet.from_iterable([(1, 0), (-1, 0), (0, 1), (0, -1)])
    window = colouring.window
    oi, oj = window.origin

    def central_ids(labels: np.ndarray) -> np.ndarray:
        sub = labels[-m - oj : m - oj + 1, -m - oi : m - oi + 1]
        return np.unique(sub[sub >= 0])

    black = label_clusters(colouring, S, "black")
    bad = np.intersect1d(central_ids(black.labels), black.boundary_components())
    if len(bad):
        raise AssertionError(f"black component {bad[0]} escapes the annulus")
    white = label_clusters(colouring, S, "white")
    escaping = np.intersect1d(central_ids(white.labels), white.boundary_components())
    if len(escaping) > 1:
        raise AssertionError(f"white components {escaping.tolist()} all escape")


# ---------------------------------------------------------------------------
# staircase


@dataclass(frozen=True)
class StaircaseResult:
    n_min: int
    n_max: int
    witnesses: tuple[tuple[int, str, int], ...]  # (n, kind, line coordinate)
    path: tuple[tuple[int, int], ...] | None

    @property
    def succeeded(self) -> bool:
        return self.path is not None


def _segment(a: tuple[int, int], b: tuple[int, int]) -> list[tuple[int, int]]:
    """Unit-step walk from a to b along the one axis where they differ."""
    (ax, ay), (bx, by) = a, b
    if ax == bx:
        step = 1 if by > ay else -1
        return [(ax, y) for y in range(ay, by + step, step)]
    if ay == by:
        step = 1 if bx > ax else -1
        return [(x, ay) for x in range(ax, bx + step, step)]
    raise AssertionError("segment endpoints differ in both axes")


def staircase(colouring: Colouring, n_min: int, n_max: int) -> StaircaseResult:
    """Check the alternating dyadic crossings and concatenate their witnesses.

    Stage n uses the rectangle [0, 2^(n+1)] x [0, 2^n], crossed horizontally
    for even n and with the roles of the axes swapped for odd n.  On success
    the witness lines are joined at their pairwise intersections into one
    explicit white path, verified point by point.
    """
    if n_min < 0 or n_min > n_max:
        raise DomainError("need 0 <= n_min <= n_max")
    witnesses = []
    for n in range(n_min, n_max + 1):
        long_side, short_side = 2 ** (n + 1), 2**n
        if n % 2 == 0:
            res = crossing(colouring, (0, long_side, 0, short_side), "horizontal")
        else:
            res = crossing(colouring, (0, short_side, 0, long_side), "vertical")
        if not res.crossed:
            return StaircaseResult(n_min, n_max, tuple(witnesses), None)
        witnesses.append((n, res.kind, res.witness))

    points: list[tuple[int, int]] = []
    n0, kind0, c0 = witnesses[0]
    cursor = (0, c0) if kind0 == "horizontal" else (c0, 0)
    points.append(cursor)
    for (na, kind_a, ca), (_, kind_b, cb) in zip(witnesses, witnesses[1:]):
        meet = (cb, ca) if kind_a == "horizontal" else (ca, cb)
        points.extend(_segment(cursor, meet)[1:])
        cursor = meet
    n_last, kind_last, c_last = witnesses[-1]
    far = 2 ** (n_last + 1)
    end = (far, c_last) if kind_last == "horizontal" else (c_last, far)
    points.extend(_segment(cursor, end)[1:])

    for p, q in zip(points, points[1:]):
        if abs(p[0] - q[0]) + abs(p[1] - q[1]) != 1:
            raise AssertionError(f"path break between {p} and {q}")
    for p in points:
        if not colouring.white_at(p):
            raise AssertionError(f"path point {p} is not white")
    return StaircaseResult(n_min, n_max, tuple(witnesses), tuple(points))


# ---------------------------------------------------------------------------
# spanning


@dataclass(frozen=True)
class SpanningStats:
    points: int
    all_white: bool


def spanning_stats(colouring: Colouring) -> SpanningStats:
    """Whether the whole window (typically a 1x1xL column) is white."""
    if colouring.in_lattice is not None:
        raise DomainError("spanning summary needs full-grid windows")
    return SpanningStats(colouring.window.point_count, bool(colouring.white.all()))


# ---------------------------------------------------------------------------
# Monte Carlo estimators


def _crossing_trial(seed: int, n: int, x: int, P: int) -> bool:
    """One crossing trial on [1,x] x [1,n] without materializing the window.

    Row j is blackened by prime p iff the row's class matches rep_2 and the
    first x columns meet the rep_1 class; only the row survival vector is
    needed.  Draw order per prime matches sample_coset_config exactly.
    """
    white_rows = np.ones(n, dtype=bool)
    for p in primes_up_to(P):
        stream = substream(seed, "coset", p)
        r1 = stream.below(p)
        r2 = stream.below(p)
        if p <= x or (r1 - 1) % p < x:
            white_rows[(r2 - 1) % p :: p] = False
            if not white_rows.any():
                return False
    return bool(white_rows.any())


def _crossing_chunk(args) -> int:
    master_seed, n, x, P, lo, hi = args
    return sum(_crossing_trial(trial_seed(master_seed, t), n, x, P) for t in range(lo, hi))


def _sum_chunks(fn, worker_args, workers: int) -> int:
    if workers <= 1:
        return sum(fn(a) for a in worker_args)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return sum(pool.map(fn, worker_args))


def _chunk_ranges(trials: int, pieces: int):
    step = max(1, math.ceil(trials / pieces))
    return [(lo, min(trials, lo + step)) for lo in range(0, trials, step)]


def estimate_crossing(n: int, x: int, trials: int, P: int, master_seed: int,
                      workers: int = 1) -> McStats:
    """Monte Carlo estimate of the horizontal crossing probability P(x-by-n).

    The per-trial configs are the ones sample_coset_config would produce for
    seed trial_seed(master_seed, t); successes only depend on trial indices,
    so any worker count gives the identical count.
    """
    if n < 1 or x < 1 or trials < 1 or P < 2:
        raise DomainError("need n,x >= 1, trials >= 1, P >= 2")
    args = [(master_seed, n, x, P, lo, hi) for lo, hi in _chunk_ranges(trials, max(workers, 1) * 4)]
    successes = _sum_chunks(_crossing_chunk, args, workers)
    return McStats("crossing", n, x, P, trials, successes, master_seed)


def _event_trial(seed: int, kind: str, param: int, P: int) -> bool:
    spec, _ = standard_lattice("square")
    config = sample_coset_config(spec, P, seed)
    if kind == "annulus":
        k = param
        window = Window((-k, -k), (2 * k + 1, 2 * k + 1))
        return annulus_event(colour_window(config, window), k).occurred
    if kind == "staircase":
        n_max = param
        side = 2 ** (n_max + 1) + 1
        window = Window((0, 0), (side, side))
        return staircase(colour_window(config, window), 0, n_max).succeeded
    raise DomainError(f"unknown event kind {kind!r}")


def _event_chunk(args) -> int:
    master_seed, kind, param, P, lo, hi = args
    return sum(
        _event_trial(trial_seed(master_seed, t), kind, param, P)
        for t in range(lo, hi)
    )


def _estimate_event(kind: str, param: int, n: int, x: int, trials: int, P: int,
                    master_seed: int, workers: int) -> McStats:
    args = [
        (master_seed, kind, param, P, lo, hi)
        for lo, hi in _chunk_ranges(trials, max(workers, 1) * 4)
    ]
    successes = _sum_chunks(_event_chunk, args, workers)
    return McStats(kind, n, x, P, trials, successes, master_seed)


def estimate_annulus(k: int, trials: int, P: int, master_seed: int,
                     workers: int = 1) -> McStats:
    """Frequency of the white-circuit event at scale k."""
    if k < 3 or k % 3:
        raise DomainError("annulus scale must be a positive multiple of 3")
    return _estimate_event("annulus", k, k, k, trials, P, master_seed, workers)


def estimate_staircase(n_max: int, trials: int, P: int, master_seed: int,
                       workers: int = 1) -> McStats:
    """Frequency of all dyadic staircase stages 0..n_max holding at once."""
    if n_max < 0:
        raise DomainError("n_max >= 0 required")
    side = 2 ** (n_max + 1)
    return _estimate_event("staircase", n_max, side, side, trials, P,
                           master_seed, workers)


def estimate_spanning(L: int, trials: int, P: int, master_seed: int,
                      workers: int = 1) -> McStats:
    """Frequency of an all-white vertical column {0}^2 x [0, L] in dimension 3."""
    if L < 1:
        raise DomainError("column length >= 1 required")
    args = [
        (master_seed, "spanning", L, P, lo, hi)
        for lo, hi in _chunk_ranges(trials, max(workers, 1) * 4)
    ]
    successes = _sum_chunks(_spanning_chunk, args, workers)
    return McStats("spanning", L, 1, P, trials, successes, master_seed)


def _spanning_trial(seed: int, L: int, P: int) -> bool:
    spec, _ = standard_lattice("hypercubic", 3)
    config = sample_coset_config(spec, P, seed)
    window = Window((0, 0, 0), (1, 1, L + 1))
    return spanning_stats(colour_window(config, window)).all_white


def _spanning_chunk(args) -> int:
    master_seed, _kind, L, P, lo, hi = args
    return sum(_spanning_trial(trial_seed(master_seed, t), L, P) for t in range(lo, hi))
