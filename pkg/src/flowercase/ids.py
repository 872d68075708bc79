"""Time-ordered opaque identifiers.

Ids are 26-character Crockford base32 strings built from a 48-bit millisecond
timestamp and 80 bits of randomness, generated monotonically: within one
factory (and, via ``observe``, within one journal across restarts) sorting
ids lexicographically equals sorting by creation order. Ids are assigned
once, written into journal payloads, and never regenerated on replay.
"""

from __future__ import annotations

import random
import time
from typing import Callable

CROCKFORD = "0123456789ABCDEFGHJKMNPQRSTVWXYZ"
_DECODE = {c: i for i, c in enumerate(CROCKFORD)}

ID_LENGTH = 26
_TIME_CHARS = 10  # 48 bits
_RAND_BITS = 80
_MAX_RAND = (1 << _RAND_BITS) - 1
_MAX_MS = (1 << 48) - 1


def _encode(value: int, length: int) -> str:
    chars = []
    for _ in range(length):
        chars.append(CROCKFORD[value & 0x1F])
        value >>= 5
    return "".join(reversed(chars))


def _decode(text: str) -> int:
    value = 0
    for char in text:
        value = (value << 5) | _DECODE[char]
    return value


def is_id(value: object) -> bool:
    return (
        isinstance(value, str)
        and len(value) == ID_LENGTH
        and all(c in _DECODE for c in value)
    )


def decode_id(value: str) -> tuple[int, int]:
    """Split an id into (milliseconds, randomness)."""
    if not is_id(value):
        raise ValueError(f"not a valid id: {value!r}")
    return _decode(value[:_TIME_CHARS]), _decode(value[_TIME_CHARS:])


class IdFactory:
    """Monotonic id generator.

    ``clock`` returns seconds since the epoch; ``rng`` supplies the random
    component. Both are injectable so tests (and the FLOWER_SEED knob) can
    make id streams fully deterministic.
    """

    def __init__(
        self,
        clock: Callable[[], float] = time.time,
        rng: random.Random | None = None,
    ):
        self._clock = clock
        self._rng = rng or random.SystemRandom()
        self._last_ms = -1
        self._last_rand = 0

    def observe(self, existing_id: str) -> None:
        """Raise the monotonic floor to an already-issued id."""
        ms, rand = decode_id(existing_id)
        if (ms, rand) > (self._last_ms, self._last_rand):
            self._last_ms, self._last_rand = ms, rand

    def new_id(self) -> str:
        ms = int(self._clock() * 1000)
        if ms > _MAX_MS:
            raise OverflowError("timestamp out of id range")
        if ms <= self._last_ms:
            # Same-or-earlier tick: bump the random component to stay ordered.
            ms = self._last_ms
            rand = self._last_rand + 1
            if rand > _MAX_RAND:
                ms += 1
                rand = self._rng.getrandbits(_RAND_BITS)
        else:
            rand = self._rng.getrandbits(_RAND_BITS)
        self._last_ms, self._last_rand = ms, rand
        return _encode(ms, _TIME_CHARS) + _encode(rand, ID_LENGTH - _TIME_CHARS)
