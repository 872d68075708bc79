import random

from hypothesis import given
from hypothesis import strategies as st

from flowercase.ids import CROCKFORD, IdFactory, decode_id, is_id


def test_shape():
    factory = IdFactory()
    new = factory.new_id()
    assert len(new) == 26
    assert all(c in CROCKFORD for c in new)
    assert is_id(new)


def test_excluded_letters_absent_from_alphabet():
    for letter in "ILOU":
        assert letter not in CROCKFORD


def test_monotonic_within_factory():
    factory = IdFactory(clock=lambda: 0.0, rng=random.Random(7))
    ids = [factory.new_id() for _ in range(500)]
    assert ids == sorted(ids)
    assert len(set(ids)) == len(ids)


def test_monotonic_across_restart_via_observe():
    first = IdFactory(clock=lambda: 0.0, rng=random.Random(1))
    issued = [first.new_id() for _ in range(10)]
    second = IdFactory(clock=lambda: 0.0, rng=random.Random(99))
    for existing in issued:
        second.observe(existing)
    assert second.new_id() > max(issued)


def test_time_component_orders_ids():
    factory = IdFactory(clock=lambda: 10.0)
    early = factory.new_id()
    factory._clock = lambda: 20.0
    late = factory.new_id()
    assert early < late
    ms_early, _ = decode_id(early)
    ms_late, _ = decode_id(late)
    assert ms_early == 10_000 and ms_late == 20_000


def test_decode_roundtrip():
    factory = IdFactory(clock=lambda: 1234.567, rng=random.Random(3))
    new = factory.new_id()
    ms, rand = decode_id(new)
    assert ms == 1_234_567
    assert 0 <= rand < (1 << 80)


@given(st.integers(min_value=0, max_value=2**31), st.integers(min_value=1, max_value=50))
def test_any_seeded_stream_is_sorted_and_unique(seed, count):
    factory = IdFactory(clock=lambda: 0.0, rng=random.Random(seed))
    ids = [factory.new_id() for _ in range(count)]
    assert ids == sorted(ids) and len(set(ids)) == count


def test_is_id_rejects_junk():
    assert not is_id("attacker")
    assert not is_id("")
    assert not is_id("0" * 25)
    assert not is_id("I" + "0" * 25)  # I is not in the alphabet
    assert not is_id(12345)
