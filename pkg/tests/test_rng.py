import numpy as np

from dmmjump.rng import MASK64, Stream, mix64, run_seed

# Reference outputs of SplitMix64 seeded with 1234567 (widely published test vector).
SPLITMIX_1234567 = [6457827717110365317, 3203168211198807973, 9817491932198370423,
                    4593380528125082431, 16408922859458223821]


def _splitmix_sequential(seed, k):
    out, state = [], seed
    for _ in range(k):
        state = (state + 0x9E3779B97F4A7C15) & MASK64
        out.append(mix64(state))
    return out


def test_stream_matches_published_vector():
    assert Stream(1234567).u64(5).tolist() == SPLITMIX_1234567


def test_stream_blocks_equal_sequential_generator():
    s = Stream(99)
    got = s.u64(3).tolist() + s.u64(4).tolist()
    assert got == _splitmix_sequential(99, 7)


def test_uniform_range_and_below():
    s = Stream(5)
    u = s.uniform(10_000)
    assert u.min() >= 0 and u.max() < 1
    b = Stream(5).below(7, 10_000)
    assert b.min() == 0 and b.max() == 6
    assert np.all(np.bincount(b) > 1200)


def test_permutation_is_a_permutation():
    p = Stream(3).permutation(100)
    assert sorted(p.tolist()) == list(range(100))


def test_run_seed_golden_vector():
    # frozen once; any change to the mixing constants breaks reproducibility
    assert run_seed(0, 0, 0) == 6235967106033911276
    assert run_seed(2024, 7, 1) == 15521119298880783952


def test_run_seed_deterministic_and_distinct():
    assert run_seed(11, 3, 4) == run_seed(11, 3, 4)
    rng = np.random.default_rng(0)
    masters = rng.integers(0, 2**63, size=10_000, dtype=np.int64).tolist()
    assert all(run_seed(s, 0, 0) != run_seed(s, 0, 1) for s in masters)
    seeds = {run_seed(12345, i, r) for i in range(2000) for r in range(5)}
    assert len(seeds) == 10_000
