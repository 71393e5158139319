"""The deterministic stream primitives everything else leans on."""

import pytest

from parnas.rng import MASK64, SplitMix64, mix64, worker_stream

M64 = (1 << 64) - 1


def finalizer_reference(z):
    # independent transcription of the published splitmix64 finalizer
    z &= M64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & M64
    return (z ^ (z >> 31)) & M64


def test_mix64_matches_reference():
    probes = [0, 1, 2, 0x9E3779B97F4A7C15, M64, 123456789, 2**63]
    for z in probes:
        assert mix64(z) == finalizer_reference(z)


def test_mix64_frozen_values():
    assert mix64(0) == 0
    assert mix64(1) == 6238072747940578789
    assert mix64(2) == 15839785061582574730
    assert mix64(M64) == 13029008266876403067


def test_stream_matches_reference():
    rng = SplitMix64(1234567)
    got = [rng.next_u64() for _ in range(5)]
    assert got == [
        6457827717110365317,
        3203168211198807973,
        9817491932198370423,
        4593380528125082431,
        16408922859458223821,
    ]


def test_stream_restarts_identically():
    a = SplitMix64(99)
    b = SplitMix64(99)
    assert [a.next_u64() for _ in range(100)] == [b.next_u64() for _ in range(100)]


def test_next_below_range_and_determinism():
    rng = SplitMix64(5)
    values = [rng.next_below(7) for _ in range(10000)]
    assert all(0 <= v < 7 for v in values)
    rng2 = SplitMix64(5)
    assert values == [rng2.next_below(7) for _ in range(10000)]


def test_next_below_rejects_bad_bounds():
    rng = SplitMix64(0)
    with pytest.raises(ValueError):
        rng.next_below(0)


def test_next_below_uniform():
    # 7 does not divide 2**64, so this also exercises the rejection path
    scipy_stats = pytest.importorskip("scipy.stats")
    rng = SplitMix64(2024)
    counts = [0] * 7
    n = 10**5
    for _ in range(n):
        counts[rng.next_below(7)] += 1
    result = scipy_stats.chisquare(counts)
    assert result.pvalue > 0.001


def test_next_float_unit_interval():
    rng = SplitMix64(17)
    values = [rng.next_float() for _ in range(10000)]
    assert all(0.0 <= v < 1.0 for v in values)
    assert max(values) > 0.9 and min(values) < 0.1


def test_worker_stream_derivation():
    # stream for worker w starts from the mixed (seed + 0x100 + w) state
    ws = worker_stream(9, 3)
    expected = SplitMix64(finalizer_reference(9 + 0x100 + 3))
    assert [ws.next_u64() for _ in range(4)] == [expected.next_u64() for _ in range(4)]


def test_worker_streams_distinct():
    firsts = {worker_stream(0, w).next_u64() for w in range(16)}
    assert len(firsts) == 16


def test_mask_constant():
    assert MASK64 == M64
