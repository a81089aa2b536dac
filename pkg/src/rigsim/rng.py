"""Counter-addressable random streams.

Every stream is a Philox4x64-10 generator whose 128-bit key is the
BLAKE2b-128 digest of ``(seed, purpose_tag, *index)``.  Output therefore
depends only on that tuple, never on the order in which streams are opened.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass

import numpy as np

ALGORITHM = "philox4x64-10; key=blake2b-128(seed,tag,index...)"


def stream_key(seed: int, tag: str, *index: int) -> np.ndarray:
    h = hashlib.blake2b(digest_size=16)
    h.update(struct.pack("<Q", int(seed) & 0xFFFFFFFFFFFFFFFF))
    h.update(tag.encode("utf-8"))
    h.update(b"\x00")
    for i in index:
        h.update(struct.pack("<Q", int(i) & 0xFFFFFFFFFFFFFFFF))
    return np.frombuffer(h.digest(), dtype="<u8").copy()


def stream(seed: int, tag: str, *index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=stream_key(seed, tag, *index)))


def derive_seed(seed: int, tag: str, *index: int) -> int:
    """A child 64-bit seed, for handing a sub-task its own namespace."""
    return int(stream_key(seed, tag, *index)[0])


@dataclass(frozen=True)
class RngStream:
    seed: int
    purpose_tag: str
    index: tuple[int, ...] = ()

    def generator(self) -> np.random.Generator:
        return stream(self.seed, self.purpose_tag, *self.index)
