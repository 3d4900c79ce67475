"""Reproducible random streams and exact multinomial sampling.

A stream is identified by a root seed and a path of ``(label, index)``
pairs.  The pair is hashed into a 128-bit Philox key, so any substream can be
built directly from its path: no stream ever depends on how much a sibling
consumed, and results do not depend on which worker ran which replicate.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass

import numpy as np

from .config import U64_MAX
from .errors import InvalidConfig
from .simplex import CountVector

_KEY_PERSON = b"equivboot:key"
_SEED_PERSON = b"equivboot:seed"


def _encode(root_seed: int, path) -> bytes:
    parts = [struct.pack("<Q", root_seed)]
    for label, index in path:
        raw = label.encode("utf-8")
        parts.append(struct.pack("<I", len(raw)))
        parts.append(raw)
        parts.append(struct.pack("<Q", index))
    return b"".join(parts)


@dataclass(frozen=True)
class RngStream:
    root_seed: int
    path: tuple = ()

    def __post_init__(self):
        if not 0 <= int(self.root_seed) <= U64_MAX:
            raise InvalidConfig(f"seed must be an unsigned 64-bit integer, got {self.root_seed!r}")
        object.__setattr__(self, "root_seed", int(self.root_seed))
        object.__setattr__(self, "path", tuple((str(l), int(i)) for l, i in self.path))

    def derive(self, label: str, index: int = 0) -> "RngStream":
        if not 0 <= int(index) <= U64_MAX:
            raise InvalidConfig(f"stream index out of range: {index!r}")
        return RngStream(self.root_seed, self.path + ((label, int(index)),))

    def key(self) -> np.ndarray:
        digest = hashlib.blake2b(_encode(self.root_seed, self.path), digest_size=16, person=_KEY_PERSON).digest()
        return np.frombuffer(digest, dtype="<u8").astype(np.uint64)

    def child_keys(self, label: str, count: int):
        """Keys of ``derive(label, i)`` for ``i < count``, without building streams."""
        raw = label.encode("utf-8")
        prefix = _encode(self.root_seed, self.path) + struct.pack("<I", len(raw)) + raw
        for i in range(count):
            digest = hashlib.blake2b(prefix + struct.pack("<Q", i), digest_size=16, person=_KEY_PERSON).digest()
            yield np.frombuffer(digest, dtype="<u8").astype(np.uint64)

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(key=self.key()))

    def as_seed(self) -> int:
        """A 64-bit seed that names this stream, for handing to ``RngStream(seed)``."""
        digest = hashlib.blake2b(_encode(self.root_seed, self.path), digest_size=8, person=_SEED_PERSON).digest()
        return struct.unpack("<Q", digest)[0]


def derive_stream(parent: RngStream, label: str, index: int) -> RngStream:
    return parent.derive(label, index)


class _Seat:
    """One Philox generator re-keyed in place.

    Building a fresh ``Generator`` costs several times more than resetting a
    bit generator's state, and the bootstrap loop re-keys once per replicate.
    Output is identical to ``stream.generator()``.
    """

    def __init__(self):
        self.bit = np.random.Philox(key=0)
        self.gen = np.random.Generator(self.bit)
        self._state = self.bit.state

    def seat(self, stream: RngStream) -> np.random.Generator:
        return self.seat_key(stream.key())

    def seat_key(self, key: np.ndarray) -> np.random.Generator:
        st = self._state
        st["state"] = {"counter": np.zeros(4, dtype=np.uint64), "key": key}
        st["buffer"] = np.zeros(4, dtype=np.uint64)
        st["buffer_pos"] = 4
        st["has_uint32"] = 0
        st["uinteger"] = 0
        self.bit.state = st
        return self.gen


class MultinomialSampler:
    """Sequential conditional-binomial draws from a fixed ``p``.

    Class ``i`` receives ``Binomial(remaining, p_i / mass_left)``; the last
    class with positive probability takes what remains, so zero-probability
    classes can never receive a count.
    """

    def __init__(self, p):
        p = np.asarray(p, dtype=float)
        self.k = p.size
        positive = np.flatnonzero(p > 0)
        self.last = int(positive[-1])
        tails = np.cumsum(p[::-1])[::-1]
        self.steps = []
        for i in positive[:-1].tolist():
            ratio = p[i] / tails[i]
            self.steps.append((i, min(1.0, float(ratio))))

    def draw(self, gen: np.random.Generator, n: int) -> np.ndarray:
        out = np.zeros(self.k, dtype=np.int64)
        left = int(n)
        binomial = gen.binomial
        for i, ratio in self.steps:
            if left == 0:
                break
            c = int(binomial(left, ratio))
            out[i] = c
            left -= c
        out[self.last] += left
        return out


def multinomial_sample(n: int, p, stream) -> CountVector:
    """Draw ``Multi(n, p)``; ``stream`` is an :class:`RngStream` or a Generator."""
    if int(n) != n or n < 1:
        raise InvalidConfig(f"number of trials must be a positive integer, got {n!r}")
    gen = stream.generator() if isinstance(stream, RngStream) else stream
    return CountVector(MultinomialSampler(p).draw(gen, int(n)))


def parse_seed(text) -> int:
    """Accept a decimal or ``0x``-prefixed hexadecimal unsigned 64-bit integer."""
    s = str(text).strip().lower().replace("_", "")
    try:
        value = int(s, 16) if s.startswith("0x") else int(s, 10)
    except ValueError:
        raise InvalidConfig(f"invalid seed {text!r}: expected decimal or 0x-hex") from None
    if not 0 <= value <= U64_MAX:
        raise InvalidConfig(f"seed {text!r} is outside the unsigned 64-bit range")
    return value
