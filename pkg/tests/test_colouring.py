"""Colouring semantics against per-point brute force.

The module paints windows with slice arithmetic; every test here recomputes
the expected colour point by point from the residue definition, or from gcd
in the oracle case.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from coprimelab.arith import primes_up_to
from coprimelab.colouring import (
    Colouring,
    CosetConfig,
    Window,
    colour_window,
    has_full_white_block,
    infer_cosets,
    lattice_from_id,
    load_colouring,
    load_config,
    oracle_from_origin,
    sample_coset_config,
    save_colouring,
    save_config,
    truncation_error_bound,
)
from coprimelab.errors import DomainError, ParseError
from coprimelab.rng import RNG_ID

Z2 = lattice_from_id("Z2")

CONFIG_GOLDEN = """\
coprime-config v1 lattice=Z2 P=7 seed=12345 rng=splitmix64/sha256-streams/v1
2 1 1
3 0 1
5 2 4
7 1 5
"""


def brute_white(config, window):
    """Straight loop over points and primes."""
    d = window.dim
    out = np.ones(window.array_shape(), dtype=bool)
    for idx in np.ndindex(*window.array_shape()):
        point = tuple(window.origin[k] + idx[d - 1 - k] for k in range(d))
        for p, rep in config.reps.items():
            if all((point[k] - rep[k]) % p == 0 for k in range(d)):
                out[idx] = False
                break
    return out


def test_lattice_registry():
    assert lattice_from_id("Z3").dim == 3
    assert lattice_from_id("D4").dim == 4
    assert lattice_from_id("Leech").dim == 24
    assert lattice_from_id("triangular").form == "hexagonal"
    with pytest.raises(DomainError):
        lattice_from_id("Q17")


def test_window_validation():
    with pytest.raises(DomainError):
        Window((0, 0), (4, 0))
    with pytest.raises(DomainError):
        Window((0, 0, 0), (4, 4))
    w = Window((-2, 3), (4, 5))
    assert w.point_count == 20
    assert w.array_shape() == (5, 4)
    assert w.contains_point((-2, 3)) and w.contains_point((1, 7))
    assert not w.contains_point((2, 3))


def test_sample_config_shapes_and_determinism():
    a = sample_coset_config(Z2, 31, 77)
    b = sample_coset_config(Z2, 31, 77)
    assert a == b
    assert sorted(a.reps) == list(primes_up_to(31).primes)
    for p, rep in a.reps.items():
        assert len(rep) == 2 and all(0 <= r < p for r in rep)
    assert a.rng_id == RNG_ID


def test_reps_do_not_depend_on_cutoff():
    lo = sample_coset_config(Z2, 31, 123)
    hi = sample_coset_config(Z2, 97, 123)
    for p in lo.reps:
        assert lo.reps[p] == hi.reps[p]


def test_rep_uniformity_chi_square():
    counts = np.zeros((5, 5), dtype=np.int64)
    for seed in range(20000):
        r = sample_coset_config(Z2, 5, seed).rep(5)
        counts[r[0], r[1]] += 1
    _, pvalue = stats.chisquare(counts.ravel())
    assert pvalue > 1e-3


@settings(max_examples=40, deadline=None)
@given(
    seed=st.integers(0, 2**64 - 1),
    P=st.sampled_from([2, 3, 7, 31]),
    ox=st.integers(-9, 9),
    oy=st.integers(-9, 9),
    w=st.integers(1, 9),
    h=st.integers(1, 9),
)
def test_colour_window_matches_brute_force(seed, P, ox, oy, w, h):
    config = sample_coset_config(Z2, P, seed)
    window = Window((ox, oy), (w, h))
    col = colour_window(config, window)
    assert np.array_equal(col.white, brute_white(config, window))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**64 - 1), d=st.sampled_from([2, 3]))
def test_no_full_white_block_property(seed, d):
    spec = lattice_from_id(f"Z{d}")
    config = sample_coset_config(spec, 31, seed)
    extents = (16,) * d
    col = colour_window(config, Window((-7,) * d, extents))
    assert not has_full_white_block(col, side=2)


def test_white_at_respects_coordinates():
    config = sample_coset_config(Z2, 7, 3)
    window = Window((-5, 2), (11, 8))
    col = colour_window(config, window)
    for point in ((-5, 2), (0, 5), (5, 9)):
        expected = all(
            any((point[k] - rep[k]) % p for k in range(2))
            for p, rep in config.reps.items()
        )
        assert col.white_at(point) == expected


def test_oracle_matches_gcd_loop():
    X = (3, 5)
    window = Window((-4, -4), (12, 12))
    col = oracle_from_origin(X, window)
    for idx in np.ndindex(*window.array_shape()):
        point = (window.origin[0] + idx[1], window.origin[1] + idx[0])
        g = math.gcd(point[0] - X[0], point[1] - X[1])
        assert col.white_at(point) == (g == 1)
    assert not col.white_at(X)  # gcd 0 counts as black


def test_sublattice_window_membership():
    d2 = lattice_from_id("D2")
    config = sample_coset_config(d2, 5, 11)
    window = Window((-3, -3), (7, 7))
    col = colour_window(config, window)
    assert col.in_lattice is not None
    expected = np.zeros((7, 7), dtype=bool)
    for idx in np.ndindex(7, 7):
        x, y = idx[1] - 3, idx[0] - 3
        expected[idx] = (x + y) % 2 == 0
    assert np.array_equal(col.in_lattice, expected)
    assert int(col.in_lattice.sum()) == 25


def test_infer_recovers_truth():
    config = sample_coset_config(Z2, 97, 4242)
    col = colour_window(config, Window((0, 0), (150, 150)))
    result = infer_cosets(col, 13)
    assert not result.truncation_warning
    for p in (2, 3, 5, 7, 11, 13):
        assert config.rep(p) in result.candidates[p]


def test_infer_warns_beyond_cutoff():
    config = sample_coset_config(Z2, 13, 1)
    col = colour_window(config, Window((0, 0), (60, 60)))
    assert infer_cosets(col, 31).truncation_warning


def test_truncation_error_bound_values():
    from fractions import Fraction

    window = Window((0, 0), (100, 100))
    assert truncation_error_bound(window, 997) == Fraction(10000, 997)
    w3 = Window((0, 0, 0), (10, 10, 10))
    assert truncation_error_bound(w3, 11) == Fraction(500, 121)


def test_config_round_trip_and_golden(tmp_path):
    config = sample_coset_config(Z2, 7, 12345)
    path = tmp_path / "c.txt"
    save_config(config, path)
    assert path.read_text() == CONFIG_GOLDEN
    assert load_config(path) == config


@pytest.mark.parametrize(
    "mutation,message",
    [
        (lambda t: t.replace("3 0 1\n", ""), "promises 4"),
        (lambda t: t.replace("3 0 1", "3 3 1"), "residue out of range"),
        (lambda t: t.replace("coprime-config v1", "coprime-config v2"), "header"),
        (lambda t: t + "11 0 0\n", "promises 4"),
        (lambda t: t.replace("5 2 4", "5 2"), "expected 2 residues"),
    ],
)
def test_config_parse_errors(tmp_path, mutation, message):
    bad = tmp_path / "bad.txt"
    bad.write_text(mutation(CONFIG_GOLDEN))
    with pytest.raises(ParseError, match=message):
        load_config(bad)


def test_config_parse_error_carries_line_number(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text(CONFIG_GOLDEN.replace("3 0 1", "3 9 1"))
    with pytest.raises(ParseError, match=r"line 3"):
        load_config(bad)


def test_pgm_round_trip(tmp_path):
    config = sample_coset_config(Z2, 31, 9)
    col = colour_window(config, Window((-3, 4), (20, 15)))
    path = tmp_path / "w.pgm"
    save_colouring(col, path)
    data = path.read_bytes()
    assert data.startswith(b"P5\n# origin=-3 4\n# extents=20 15\n")
    again = load_colouring(path)
    assert again.window == col.window
    assert np.array_equal(again.white, col.white)
    assert again.provenance == col.provenance
    save_colouring(again, tmp_path / "w2.pgm")
    assert (tmp_path / "w2.pgm").read_bytes() == data


def test_pgm_load_errors(tmp_path):
    config = sample_coset_config(Z2, 7, 2)
    col = colour_window(config, Window((0, 0), (6, 6)))
    path = tmp_path / "w.pgm"
    save_colouring(col, path)
    data = path.read_bytes()
    (tmp_path / "trunc.pgm").write_bytes(data[:-5])
    with pytest.raises(ParseError):
        load_colouring(tmp_path / "trunc.pgm")
    (tmp_path / "magic.pgm").write_bytes(b"P2" + data[2:])
    with pytest.raises(ParseError):
        load_colouring(tmp_path / "magic.pgm")
    (tmp_path / "maxval.pgm").write_bytes(data.replace(b"\n255\n", b"\n65535\n"))
    with pytest.raises(ParseError):
        load_colouring(tmp_path / "maxval.pgm")


def test_pgm_rejects_non_full_grid(tmp_path):
    d2 = lattice_from_id("D2")
    col = colour_window(sample_coset_config(d2, 5, 1), Window((0, 0), (6, 6)))
    with pytest.raises(DomainError):
        save_colouring(col, tmp_path / "no.pgm")


def test_coupling_disagreements_match_direct_scan():
    X = (7, 11)
    P = 97
    primes = primes_up_to(P).primes
    reps = {p: (X[0] % p, X[1] % p) for p in primes}
    config = CosetConfig("Z2", P, 0, RNG_ID, reps)
    window = Window((0, 0), (120, 120))
    coupled = colour_window(config, window)
    oracle = oracle_from_origin(X, window)
    disagreements = set()
    for idx in np.ndindex(*window.array_shape()):
        point = (idx[1], idx[0])
        if coupled.white_at(point) != oracle.white_at(point):
            disagreements.add(point)
    expected = set()
    for idx in np.ndindex(*window.array_shape()):
        point = (idx[1], idx[0])
        g = math.gcd(point[0] - X[0], point[1] - X[1])
        if g > 1 and min(q for q in range(2, g + 1) if g % q == 0) > P:
            expected.add(point)
    assert disagreements == expected
