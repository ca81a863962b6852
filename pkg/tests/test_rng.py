import collections

import pytest

from coprimelab.rng import RNG_ID, SplitMix64, stream_seed, substream

# Published splitmix64 reference outputs for seed 0.
SPLITMIX_SEED0 = (
    0xE220A8397B1DCDAF,
    0x6E789E6AA1B965F4,
    0x06C45D188009454F,
)

# Frozen derivations; any change to the stream labelling scheme breaks
# reproducibility of every stored artifact, so these must never move.
FROZEN_STREAM_SEEDS = {
    (0, "trial", 0): 4910280602053377850,
    (42, "coset", 7): 5065727035724076861,
}


def test_splitmix_reference_vectors():
    g = SplitMix64(0)
    assert tuple(g.next_u64() for _ in range(3)) == SPLITMIX_SEED0


def test_stream_seed_frozen():
    for (master, tag, index), expect in FROZEN_STREAM_SEEDS.items():
        assert stream_seed(master, tag, index) == expect


def test_rng_id_frozen():
    assert RNG_ID == "splitmix64/sha256-streams/v1"


def test_determinism_and_stream_separation():
    a = substream(9, "coset", 5)
    b = substream(9, "coset", 5)
    assert [a.next_u64() for _ in range(8)] == [b.next_u64() for _ in range(8)]
    c = substream(9, "coset", 7)
    d = substream(9, "trial", 5)
    head = [substream(9, "coset", 5).next_u64()]
    assert c.next_u64() not in head
    assert d.next_u64() not in head


def test_below_range_and_rough_uniformity():
    g = substream(123, "t", 0)
    counts = collections.Counter(g.below(5) for _ in range(20000))
    assert set(counts) == {0, 1, 2, 3, 4}
    for v in counts.values():
        assert 3600 < v < 4400


def test_below_rejects_bad_bound():
    g = SplitMix64(1)
    with pytest.raises(ValueError):
        g.below(0)


def test_uniform_unit_interval():
    g = substream(5, "u", 1)
    xs = [g.uniform() for _ in range(1000)]
    assert all(0.0 <= x < 1.0 for x in xs)
    assert 0.4 < sum(xs) / len(xs) < 0.6
