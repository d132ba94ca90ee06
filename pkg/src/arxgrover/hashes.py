"""Classical reference implementations of the two toy ARX hashes.

Both hashes operate on a 2x2 matrix of 4-bit words. The sponge variant
absorbs an 8-bit message into the rate half of a 16-bit state and squeezes
an 8-bit digest after an iterated quarter-round permutation. The BLAKE-style
variant compresses a 16-bit message block into an 8-bit digest through a
round function that mixes scheduled message words into the working vector.

These functions are the ground truth for every quantum experiment: the
circuit builders are verified bit-for-bit against them, and preimage sets
enumerated here drive the search-instance bookkeeping.

Conventions: words are little-endian nibbles of packed integers
(``state = v0 | v1 << 4 | v2 << 8 | v3 << 12``), rotations are cyclic on
4 bits, and additions are mod 16.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

WORD_BITS = 4
WORD_MASK = 0xF

# Rate occupies words v0, v1 (low byte); capacity is v2, v3 (high byte).
RATE_BITS = 8
STATE_BITS = 16

SPONGE_ROUNDS = 10
BLAKE_ROUNDS = 12

# Fixed public constants of the BLAKE-style toy compression.
BLAKE_IV = (0x8, 0xB)
BLAKE_H0_TWEAK = 0x2

# Per-round message-word schedule: round r reads d[s[0]]..d[s[3]] with
# s[i] = (i + r) mod 4. Any bijective schedule preserves the construction;
# this one is shared verbatim by the quantum builder (as register wiring).
BLAKE_SCHEDULE = tuple(tuple((i + r) % 4 for i in range(4)) for r in range(4))


def rotl4(x: int, r: int) -> int:
    """Cyclic left rotation of a 4-bit word."""
    r %= WORD_BITS
    return ((x << r) | (x >> (WORD_BITS - r))) & WORD_MASK


def rotr4(x: int, r: int) -> int:
    """Cyclic right rotation of a 4-bit word."""
    return rotl4(x, WORD_BITS - (r % WORD_BITS))


def unpack_words(value: int, count: int = 4) -> tuple[int, ...]:
    return tuple((value >> (WORD_BITS * i)) & WORD_MASK for i in range(count))


def pack_words(words) -> int:
    value = 0
    for i, w in enumerate(words):
        value |= (w & WORD_MASK) << (WORD_BITS * i)
    return value


def qr_sponge(a: int, b: int) -> tuple[int, int]:
    """Quarter round of the sponge permutation (left rotations)."""
    a = (a + b) & WORD_MASK
    b = rotl4(b ^ a, 2)
    a = (a + b) & WORD_MASK
    b = rotl4(b ^ a, 1)
    return a, b


def chacha_pi(state: int, rounds: int = SPONGE_ROUNDS) -> int:
    """Iterated column/diagonal quarter-round permutation on a 16-bit state.

    One round applies the quarter round to the columns (v0,v2), (v1,v3) and
    then to the diagonals (v0,v3), (v1,v2) of the 2x2 word matrix.
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    v0, v1, v2, v3 = unpack_words(state)
    for _ in range(rounds):
        v0, v2 = qr_sponge(v0, v2)
        v1, v3 = qr_sponge(v1, v3)
        v0, v3 = qr_sponge(v0, v3)
        v1, v2 = qr_sponge(v1, v2)
    return pack_words((v0, v1, v2, v3))


def sponge_hash(message: int, iv: int = 0, rounds: int = SPONGE_ROUNDS) -> int:
    """Single-block sponge digest of an 8-bit message.

    The message is XORed into the rate byte of the initial state, the
    permutation runs, and the rate byte of the result is the digest.
    """
    if not 0 <= message < (1 << RATE_BITS):
        raise ValueError("message must fit in 8 bits")
    state = (iv & ((1 << STATE_BITS) - 1)) ^ message
    return chacha_pi(state, rounds) & 0xFF


def g_blake(a: int, b: int, x: int, y: int) -> tuple[int, int]:
    """Mixing function of the BLAKE-style toy hash (right rotations)."""
    a = (a + b + x) & WORD_MASK
    b = rotr4(b ^ a, 2)
    a = (a + b + y) & WORD_MASK
    b = rotr4(b ^ a, 1)
    return a, b


def blake_initial_vector(t: int = 0, is_last: bool = True) -> tuple[int, int, int, int]:
    """Working-vector initialisation from the fixed IV and block counter.

    ``v2`` is bit-inverted for the final block. The counter enters through
    its low and high nibbles, mirroring the full-size counter XOR.
    """
    h0 = BLAKE_IV[0] ^ BLAKE_H0_TWEAK
    h1 = BLAKE_IV[1]
    v0 = h0 ^ (t & WORD_MASK)
    v1 = h1 ^ ((t >> WORD_BITS) & WORD_MASK)
    v2 = BLAKE_IV[0]
    v3 = BLAKE_IV[1]
    if is_last:
        v2 = (~v2) & WORD_MASK
    return v0, v1, v2, v3


def blake_compress(d: int, t: int = 0, is_last: bool = True,
                   rho: int = BLAKE_ROUNDS) -> int:
    """Compression of one 16-bit message block into an 8-bit digest.

    Each round mixes scheduled message words into the columns and then the
    diagonals of the working vector; the digest is read from v0 and v1.
    """
    if rho < 1:
        raise ValueError("rho must be >= 1")
    if not 0 <= d < (1 << STATE_BITS):
        raise ValueError("message block must fit in 16 bits")
    dw = unpack_words(d)
    v0, v1, v2, v3 = blake_initial_vector(t, is_last)
    for r in range(rho):
        s = BLAKE_SCHEDULE[r % len(BLAKE_SCHEDULE)]
        v0, v2 = g_blake(v0, v2, dw[s[0]], dw[s[1]])
        v1, v3 = g_blake(v1, v3, dw[s[2]], dw[s[3]])
        v0, v3 = g_blake(v0, v3, dw[s[0]], dw[s[1]])
        v1, v2 = g_blake(v1, v2, dw[s[2]], dw[s[3]])
    return pack_words((v0, v1))


# ---------------------------------------------------------------------------
# Vectorised variants for bulk enumeration. Same arithmetic on uint16 arrays;
# the scalar functions above stay the readable reference and the two are
# cross-checked in the test suite.

def _rotl4_np(x, r):
    r %= WORD_BITS
    return ((x << r) | (x >> (WORD_BITS - r))) & WORD_MASK


def _qr_np(a, b, left: bool):
    a = (a + b) & WORD_MASK
    b = _rotl4_np(b ^ a, 2 if left else WORD_BITS - 2)
    a = (a + b) & WORD_MASK
    b = _rotl4_np(b ^ a, 1 if left else WORD_BITS - 1)
    return a, b


def chacha_pi_bulk(states: np.ndarray, rounds: int = SPONGE_ROUNDS) -> np.ndarray:
    states = np.asarray(states, dtype=np.uint16)
    v = [(states >> (WORD_BITS * i)) & WORD_MASK for i in range(4)]
    for _ in range(rounds):
        v[0], v[2] = _qr_np(v[0], v[2], True)
        v[1], v[3] = _qr_np(v[1], v[3], True)
        v[0], v[3] = _qr_np(v[0], v[3], True)
        v[1], v[2] = _qr_np(v[1], v[2], True)
    out = v[0] | (v[1] << 4) | (v[2] << 8) | (v[3] << 12)
    return out.astype(np.uint16)


def sponge_hash_bulk(messages: np.ndarray, iv: int = 0,
                     rounds: int = SPONGE_ROUNDS) -> np.ndarray:
    messages = np.asarray(messages, dtype=np.uint16)
    out = chacha_pi_bulk(messages ^ np.uint16(iv & 0xFFFF), rounds)
    return (out & 0xFF).astype(np.uint16)


def _g_np(a, b, x, y):
    a = (a + b + x) & WORD_MASK
    b = _rotl4_np(b ^ a, WORD_BITS - 2)
    a = (a + b + y) & WORD_MASK
    b = _rotl4_np(b ^ a, WORD_BITS - 1)
    return a, b


def blake_compress_bulk(blocks: np.ndarray, t: int = 0, is_last: bool = True,
                        rho: int = BLAKE_ROUNDS) -> np.ndarray:
    blocks = np.asarray(blocks, dtype=np.uint16)
    dw = [(blocks >> (WORD_BITS * i)) & WORD_MASK for i in range(4)]
    init = blake_initial_vector(t, is_last)
    v = [np.full(blocks.shape, w, dtype=np.uint16) for w in init]
    for r in range(rho):
        s = BLAKE_SCHEDULE[r % len(BLAKE_SCHEDULE)]
        v[0], v[2] = _g_np(v[0], v[2], dw[s[0]], dw[s[1]])
        v[1], v[3] = _g_np(v[1], v[3], dw[s[2]], dw[s[3]])
        v[0], v[3] = _g_np(v[0], v[3], dw[s[0]], dw[s[1]])
        v[1], v[2] = _g_np(v[1], v[2], dw[s[2]], dw[s[3]])
    return (v[0] | (v[1] << 4)).astype(np.uint16)


# ---------------------------------------------------------------------------
# Preimage enumeration.

MAX_ENUM_BITS = 20


@dataclass(frozen=True)
class HashInstance:
    """A search instance: target digest plus its exhaustive preimage set."""

    digest: int
    preimages: frozenset[int] = field(default_factory=frozenset)
    message_bits: int = RATE_BITS
    kind: str = "sponge"
    iv: int = 0

    @property
    def num_preimages(self) -> int:
        return len(self.preimages)

    @property
    def space_size(self) -> int:
        return 1 << self.message_bits

    def is_preimage(self, message: int) -> bool:
        return message in self.preimages


def enumerate_preimages(digest: int, hash_fn: Callable[[int], int],
                        message_bits: int) -> frozenset[int]:
    """Exact preimage set of ``digest`` by exhaustive evaluation."""
    if message_bits > MAX_ENUM_BITS:
        raise ValueError(
            f"message space 2^{message_bits} exceeds the 2^{MAX_ENUM_BITS} "
            "exhaustive-search limit")
    return frozenset(m for m in range(1 << message_bits) if hash_fn(m) == digest)


def sponge_digest_table(iv: int = 0, rounds: int = SPONGE_ROUNDS) -> np.ndarray:
    """Digest of every 8-bit message under the sponge hash, as one array."""
    return sponge_hash_bulk(np.arange(1 << RATE_BITS), iv, rounds)


def sponge_instance(digest: int, iv: int = 0,
                    rounds: int = SPONGE_ROUNDS) -> HashInstance:
    table = sponge_digest_table(iv, rounds)
    preimages = frozenset(int(m) for m in np.nonzero(table == digest)[0])
    return HashInstance(digest=digest, preimages=preimages,
                        message_bits=RATE_BITS, kind="sponge", iv=iv)


def blake_digest_table(t: int = 0, is_last: bool = True,
                       rho: int = BLAKE_ROUNDS) -> np.ndarray:
    return blake_compress_bulk(np.arange(1 << STATE_BITS), t, is_last, rho)


def blake_instance(digest: int, t: int = 0, is_last: bool = True,
                   rho: int = BLAKE_ROUNDS) -> HashInstance:
    table = blake_digest_table(t, is_last, rho)
    preimages = frozenset(int(m) for m in np.nonzero(table == digest)[0])
    return HashInstance(digest=digest, preimages=preimages,
                        message_bits=STATE_BITS, kind="blake", iv=0)


def preimage_histogram(iv: int = 0, rounds: int = SPONGE_ROUNDS) -> dict[int, int]:
    """Map from digest to preimage count for the sponge hash."""
    table = sponge_digest_table(iv, rounds)
    values, counts = np.unique(table, return_counts=True)
    return {int(v): int(c) for v, c in zip(values, counts)}


def instances_by_count(iv: int = 0, rounds: int = SPONGE_ROUNDS) -> dict[int, list[HashInstance]]:
    """Sponge instances grouped by preimage count, digests ascending."""
    table = sponge_digest_table(iv, rounds)
    groups: dict[int, list[HashInstance]] = {}
    for digest in range(256):
        preimages = frozenset(int(m) for m in np.nonzero(table == digest)[0])
        if not preimages:
            continue
        inst = HashInstance(digest=digest, preimages=preimages,
                            message_bits=RATE_BITS, kind="sponge", iv=iv)
        groups.setdefault(len(preimages), []).append(inst)
    return groups
