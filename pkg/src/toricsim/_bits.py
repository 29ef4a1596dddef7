"""Packed-bit helpers shared by the Pauli and tableau code.

Bit vectors over GF(2) are stored as little-endian uint64 words: bit q of a
length-n vector lives in word q >> 6 at position q & 63. Small linear-algebra
routines work on arbitrary-precision Python ints instead, one int per row.
"""

from __future__ import annotations

import numpy as np

WORD = 64


def n_words(n: int) -> int:
    return (n + WORD - 1) // WORD


def zeros(n: int) -> np.ndarray:
    return np.zeros(n_words(n), dtype=np.uint64)


def get_bit(words: np.ndarray, q: int) -> int:
    return int(words[q >> 6] >> np.uint64(q & 63)) & 1


def set_bit(words: np.ndarray, q: int, value: int) -> None:
    mask = np.uint64(1) << np.uint64(q & 63)
    if value:
        words[q >> 6] |= mask
    else:
        words[q >> 6] &= ~mask


def pack(bits) -> np.ndarray:
    """Pack an iterable of 0/1 into uint64 words."""
    bits = np.asarray(bits, dtype=np.uint8)
    out = zeros(len(bits))
    for q in np.nonzero(bits)[0]:
        set_bit(out, int(q), 1)
    return out


def unpack(words: np.ndarray, n: int) -> np.ndarray:
    """Expand packed words into a length-n uint8 array of bits."""
    out = np.empty(n, dtype=np.uint8)
    for q in range(n):
        out[q] = get_bit(words, q)
    return out


def popcount(words: np.ndarray) -> int:
    return int(np.bitwise_count(words).sum())


def parity(words: np.ndarray) -> int:
    return popcount(words) & 1


def mask_for(qubits, n: int) -> np.ndarray:
    """Packed mask with bits set on the given qubit indices."""
    out = zeros(n)
    for q in qubits:
        if not 0 <= q < n:
            raise ValueError(f"qubit index {q} out of range for n={n}")
        set_bit(out, q, 1)
    return out


def to_int(words: np.ndarray) -> int:
    """Packed words as one arbitrary-precision integer (for GF(2) elimination)."""
    val = 0
    for i, w in enumerate(words):
        val |= int(w) << (WORD * i)
    return val


def rref_gf2(rows: list[int], n_cols: int) -> tuple[list[int], list[int]]:
    """Reduced row echelon form of GF(2) rows given as ints.

    Returns (nonzero reduced rows, pivot column per row).
    """
    rows = list(rows)
    pivot_cols: list[int] = []
    r = 0
    for col in range(n_cols):
        mask = 1 << col
        pivot = next((i for i in range(r, len(rows)) if rows[i] & mask), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        for i in range(len(rows)):
            if i != r and (rows[i] & mask):
                rows[i] ^= rows[r]
        pivot_cols.append(col)
        r += 1
    return rows[:r], pivot_cols


def rank_gf2(rows: list[int], n_cols: int | None = None) -> int:
    if n_cols is None:
        n_cols = max((r.bit_length() for r in rows), default=0)
    return len(rref_gf2(rows, n_cols)[0])


def solve_gf2(rows: list[int], rhs: list[int], n_cols: int) -> int | None:
    """One solution x of M x = b over GF(2), or None if inconsistent.

    Free variables are set to zero, so the result is deterministic.
    """
    aug = [rows[i] | ((rhs[i] & 1) << n_cols) for i in range(len(rows))]
    red, pivot_cols = rref_gf2(aug, n_cols + 1)
    x = 0
    for row, col in zip(red, pivot_cols):
        if col == n_cols:
            return None  # pivot in the augmented column: 0 = 1
        if row >> n_cols:
            x |= 1 << col
    return x


def kernel_gf2(rows: list[int], n_cols: int) -> list[int]:
    """Basis of the null space of M (rows over n_cols columns) as column masks."""
    red, pivot_cols = rref_gf2(rows, n_cols)
    pivot_set = set(pivot_cols)
    basis = []
    for free in range(n_cols):
        if free in pivot_set:
            continue
        vec = 1 << free
        for row, col in zip(red, pivot_cols):
            if (row >> free) & 1:
                vec |= 1 << col
        basis.append(vec)
    return basis
