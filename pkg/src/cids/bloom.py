"""Bloom filters for compact intrusion-signature exchange.

Double hashing: one SHA-256 of the item yields two 64-bit lanes (h1, h2),
and bit index i is (h1 + i*h2) mod m. h2 is forced odd so the stride never
degenerates. No false negatives; the false-positive rate for n inserted
items is the standard (1 - e^(-kn/m))^k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .encoding import Reader, encode_u64, sha256
from .errors import MalformedBytes, ShapeMismatch

MAX_K = 16
HEADER_LEN = 24  # m_bits, k_hashes, n_inserted as u64


def positions(m_bits: int, k_hashes: int, item: bytes) -> list[int]:
    """Bit indices probed for `item` in an (m, k) filter."""
    if m_bits < 8:
        raise ValueError("m_bits must be >= 8")
    if not 1 <= k_hashes <= MAX_K:
        raise ValueError(f"k_hashes must be in [1, {MAX_K}]")
    digest = sha256(item)
    h1 = int.from_bytes(digest[0:8], "big")
    h2 = int.from_bytes(digest[8:16], "big") | 1
    return [(h1 + i * h2) % m_bits for i in range(k_hashes)]


def analytic_fpr(m_bits: int, k_hashes: int, n_items: int) -> float:
    """Closed-form false-positive probability after n inserts."""
    if m_bits < 1 or k_hashes < 1 or n_items < 0:
        raise ValueError("m_bits >= 1, k_hashes >= 1, n_items >= 0 required")
    if n_items == 0:
        return 0.0
    return (1.0 - math.exp(-k_hashes * n_items / m_bits)) ** k_hashes


def optimal_k(m_bits: int, n_items: int) -> int:
    """k minimizing the FPR for m bits and n items, clamped to [1, 16]."""
    if m_bits < 1 or n_items < 1:
        raise ValueError("m_bits >= 1 and n_items >= 1 required")
    k = round((m_bits / n_items) * math.log(2))
    return max(1, min(MAX_K, k))


@dataclass
class BloomFilter:
    m_bits: int
    k_hashes: int
    bits: bytearray = field(default_factory=bytearray)
    n_inserted: int = 0

    def __post_init__(self):
        if self.m_bits < 8:
            raise ValueError("m_bits must be >= 8")
        if not 1 <= self.k_hashes <= MAX_K:
            raise ValueError(f"k_hashes must be in [1, {MAX_K}]")
        nbytes = (self.m_bits + 7) // 8
        if not self.bits:
            self.bits = bytearray(nbytes)
        elif len(self.bits) != nbytes:
            raise ValueError("bit array length does not match m_bits")

    def insert(self, item: bytes) -> None:
        for idx in positions(self.m_bits, self.k_hashes, item):
            self.bits[idx >> 3] |= 1 << (idx & 7)
        self.n_inserted += 1

    def query(self, item: bytes) -> bool:
        return all(
            self.bits[idx >> 3] & (1 << (idx & 7))
            for idx in positions(self.m_bits, self.k_hashes, item)
        )

    def merge(self, other: BloomFilter) -> BloomFilter:
        """Bitwise OR; n_inserted sums as an upper bound on distinct items."""
        if self.m_bits != other.m_bits or self.k_hashes != other.k_hashes:
            raise ShapeMismatch(
                f"cannot merge ({self.m_bits},{self.k_hashes}) "
                f"with ({other.m_bits},{other.k_hashes})"
            )
        merged = bytearray(a | b for a, b in zip(self.bits, other.bits))
        return BloomFilter(self.m_bits, self.k_hashes, merged, self.n_inserted + other.n_inserted)

    def popcount(self) -> int:
        return sum(bin(b).count("1") for b in self.bits)

    def copy(self) -> BloomFilter:
        return BloomFilter(self.m_bits, self.k_hashes, bytearray(self.bits), self.n_inserted)

    def serialize(self) -> bytes:
        return (
            encode_u64(self.m_bits)
            + encode_u64(self.k_hashes)
            + encode_u64(self.n_inserted)
            + bytes(self.bits)
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, BloomFilter):
            return NotImplemented
        return (
            self.m_bits == other.m_bits
            and self.k_hashes == other.k_hashes
            and self.n_inserted == other.n_inserted
            and self.bits == other.bits
        )


def deserialize(data: bytes) -> BloomFilter:
    r = Reader(data)
    m_bits = r.u64()
    k_hashes = r.u64()
    n_inserted = r.u64()
    if m_bits < 8 or not 1 <= k_hashes <= MAX_K:
        raise MalformedBytes(f"invalid filter parameters m={m_bits} k={k_hashes}")
    payload = r.take((m_bits + 7) // 8)
    r.expect_done()
    f = BloomFilter(m_bits, k_hashes, bytearray(payload), n_inserted)
    if n_inserted == 0 and f.popcount() != 0:
        raise MalformedBytes("n_inserted is 0 but bits are set")
    return f


def serialized_size(m_bits: int) -> int:
    """Wire size of a filter with m_bits, independent of contents."""
    return HEADER_LEN + (m_bits + 7) // 8
