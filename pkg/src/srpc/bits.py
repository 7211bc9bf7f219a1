"""Bit packing helpers for sign (+1/-1) matrices.

Rows are packed one bit per entry into little-endian uint64 words: bit
``j % 64`` of word ``j // 64`` is 1 when the entry is +1 and 0 when it is
-1.  Padding bits past the row length are always 0, so XOR-based popcount
inner products never see them.
"""

from __future__ import annotations

import numpy as np

WORD_BITS = 64


def words_per_row(n: int) -> int:
    return (n + WORD_BITS - 1) // WORD_BITS


def pack_sign_rows(signs: np.ndarray) -> np.ndarray:
    """Pack a 2-D array of +-1 values into uint64 words.

    Args:
        signs: Array of shape (m, n) with values in {+1, -1}.

    Returns:
        Packed array of shape (m, words_per_row(n)), dtype uint64.
    """
    signs = np.atleast_2d(np.asarray(signs))
    m, n = signs.shape
    width = words_per_row(n) * WORD_BITS
    bits = np.zeros((m, width), dtype=np.uint8)
    bits[:, :n] = signs > 0
    packed = np.packbits(bits, axis=1, bitorder="little")
    return packed.view(np.uint64)


def unpack_sign_rows(packed: np.ndarray, n: int) -> np.ndarray:
    """Inverse of :func:`pack_sign_rows`; returns int8 values in {+1, -1}."""
    packed = np.atleast_2d(packed)
    bits = np.unpackbits(packed.view(np.uint8), axis=1, bitorder="little")[:, :n]
    return (bits.astype(np.int8) * 2) - 1


def popcount(words: np.ndarray) -> np.ndarray:
    return np.bitwise_count(words)


def pad_mask(n: int) -> np.ndarray:
    """Per-word AND mask that zeroes the padding bits of a packed row."""
    width = words_per_row(n)
    mask = np.full(width, ~np.uint64(0), dtype=np.uint64)
    rem = n % WORD_BITS
    if rem:
        mask[-1] = (np.uint64(1) << np.uint64(rem)) - np.uint64(1)
    return mask


def hadamard_pack(packed_rows: np.ndarray, n: int) -> np.ndarray:
    """Entrywise product of sign rows, staying in the packed domain.

    The product of an odd number of signs is +1 exactly when the XOR of
    their bits is 1; for an even number it is the complement, which must
    be re-masked so padding bits stay 0.
    """
    packed_rows = np.atleast_2d(packed_rows)
    out = packed_rows[0].copy()
    for row in packed_rows[1:]:
        out ^= row
    if packed_rows.shape[0] % 2 == 0:
        out = ~out & pad_mask(n)
    return out


def sign_inner_popcount(packed_a: np.ndarray, packed_b: np.ndarray, n: int,
                        chunk: int = 64) -> np.ndarray:
    """All pairwise inner products between two packed sign-row stacks.

    Returns the int32 table T with T[i, j] = <a_i, b_j> = n - 2 * popcount(
    a_i XOR b_j).  Word-parallel; ``chunk`` bounds the temporary XOR block.
    """
    packed_a = np.atleast_2d(packed_a)
    packed_b = np.atleast_2d(packed_b)
    m = packed_a.shape[0]
    out = np.empty((m, packed_b.shape[0]), dtype=np.int32)
    for start in range(0, m, chunk):
        block = packed_a[start:start + chunk]
        xored = block[:, None, :] ^ packed_b[None, :, :]
        out[start:start + chunk] = n - 2 * popcount(xored).sum(
            axis=2, dtype=np.int32)
    return out
