"""Bit-packed GF(2) linear algebra kernels.

Binary vectors are packed into uint64 words, 64 bits per word, bit ``k`` of
word ``k // 64`` holding component ``k``.  The compiled kernels below are the
hot path of the whole package: every gate, measurement and entropy query runs
through them.
"""

import numpy as np
from numba import njit

_ONE = np.uint64(1)


def pack_rows(matrix):
    """Pack a 0/1 matrix into a (rows, words) uint64 array, one row per row."""
    mat = np.ascontiguousarray(np.asarray(matrix, dtype=np.uint8) & 1)
    if mat.ndim != 2:
        raise ValueError("expected a 2-d binary matrix")
    n_rows, n_cols = mat.shape
    n_words = max(1, (n_cols + 63) // 64)
    padded = np.zeros((n_rows, n_words * 64), dtype=np.uint8)
    padded[:, :n_cols] = mat
    packed = np.zeros((n_rows, n_words), dtype=np.uint64)
    for w in range(n_words):
        chunk = padded[:, 64 * w : 64 * (w + 1)].astype(np.uint64)
        packed[:, w] = (chunk << np.arange(64, dtype=np.uint64)).sum(axis=1)
    return packed


def unpack_rows(packed, n_cols):
    """Inverse of :func:`pack_rows`; returns a (rows, n_cols) uint8 matrix."""
    packed = np.asarray(packed, dtype=np.uint64)
    n_rows = packed.shape[0]
    out = np.zeros((n_rows, n_cols), dtype=np.uint8)
    for c in range(n_cols):
        out[:, c] = (packed[:, c >> 6] >> np.uint64(c & 63)) & _ONE
    return out


@njit(cache=True)
def rank_packed(rows, n_bits):
    """Rank over GF(2) of packed bit-rows.  Destroys ``rows``."""
    m, n_words = rows.shape
    rank = 0
    for col in range(n_bits):
        w = col >> 6
        mask = np.uint64(1) << np.uint64(col & 63)
        pivot = -1
        for r in range(rank, m):
            if rows[r, w] & mask:
                pivot = r
                break
        if pivot < 0:
            continue
        if pivot != rank:
            for k in range(n_words):
                tmp = rows[pivot, k]
                rows[pivot, k] = rows[rank, k]
                rows[rank, k] = tmp
        for r in range(rank + 1, m):
            if rows[r, w] & mask:
                for k in range(n_words):
                    rows[r, k] ^= rows[rank, k]
        rank += 1
        if rank == m:
            break
    return rank


def rank_gf2(matrix):
    """Rank of a 0/1 matrix over GF(2).  The input is not mutated."""
    mat = np.asarray(matrix)
    if mat.ndim != 2:
        raise ValueError("expected a 2-d binary matrix")
    if mat.shape[0] == 0 or mat.shape[1] == 0:
        return 0
    return int(rank_packed(pack_rows(mat), mat.shape[1]))


@njit(cache=True)
def rank_of_columns(cols, n_bits):
    """Rank of a stack of packed column vectors without mutating the input."""
    scratch = cols.copy()
    return rank_packed(scratch, n_bits)


@njit(cache=True)
def basis_insert(basis, pivots, vec, n_bits):
    """Reduce ``vec`` against a pivoted basis, inserting it if independent.

    ``basis`` is an (n_bits, words) scratch array holding one reduced vector
    per pivot bit; ``pivots`` marks which slots are occupied.  Returns 1 when
    the vector enlarged the basis, 0 when it reduced to zero.
    """
    n_words = basis.shape[1]
    work = vec.copy()
    for col in range(n_bits):
        w = col >> 6
        mask = np.uint64(1) << np.uint64(col & 63)
        if not (work[w] & mask):
            continue
        if pivots[col]:
            for k in range(n_words):
                work[k] ^= basis[col, k]
        else:
            for k in range(n_words):
                basis[col, k] = work[k]
            pivots[col] = True
            return 1
    return 0


@njit(cache=True)
def apply_two_qubit_gates(cols, n, idx_i, idx_j, gates):
    """Apply a batch of 4x4 symplectic gates to packed tableau columns.

    ``cols`` is the (2n, words) column-major tableau; gate ``k`` acts on the
    column 4-vector (x_i, x_j, z_i, z_j) of qubits ``idx_i[k]``, ``idx_j[k]``.
    Pairs within one batch must be disjoint.
    """
    n_words = cols.shape[1]
    n_gates = idx_i.shape[0]
    old = np.empty((4, n_words), dtype=np.uint64)
    for k in range(n_gates):
        i = idx_i[k]
        j = idx_j[k]
        c0 = i
        c1 = j
        c2 = n + i
        c3 = n + j
        for w in range(n_words):
            old[0, w] = cols[c0, w]
            old[1, w] = cols[c1, w]
            old[2, w] = cols[c2, w]
            old[3, w] = cols[c3, w]
        for a in range(4):
            if a == 0:
                target = c0
            elif a == 1:
                target = c1
            elif a == 2:
                target = c2
            else:
                target = c3
            for w in range(n_words):
                acc = np.uint64(0)
                if gates[k, a, 0]:
                    acc ^= old[0, w]
                if gates[k, a, 1]:
                    acc ^= old[1, w]
                if gates[k, a, 2]:
                    acc ^= old[2, w]
                if gates[k, a, 3]:
                    acc ^= old[3, w]
                cols[target, w] = acc


@njit(cache=True)
def measure_many_packed(cols, n, qubits):
    """Measure a list of qubits in order with the default pivot rule."""
    for t in range(qubits.shape[0]):
        measure_z_packed(cols, n, qubits[t], -1)


@njit(cache=True)
def measure_z_packed(cols, n, q, forced_pivot):
    """Sign-free Z measurement update on packed columns.

    Returns 0 when the outcome is deterministic (no row anticommutes, state
    untouched) and 1 when it is random, in which case the pivot row is XORed
    into every other anticommuting row and then replaced by Z_q.  A
    nonnegative ``forced_pivot`` overrides the default lowest-index pivot and
    must point at an anticommuting row.
    """
    n_words = cols.shape[1]
    one = np.uint64(1)
    p = -1
    if forced_pivot >= 0:
        p = forced_pivot
    else:
        for w in range(n_words):
            word = cols[q, w]
            if word:
                b = 0
                while not (word >> np.uint64(b)) & one:
                    b += 1
                p = 64 * w + b
                break
    if p < 0:
        return 0
    wp = p >> 6
    bp = np.uint64(p & 63)
    if not (cols[q, wp] >> bp) & one:
        return -1
    flip = np.empty(n_words, dtype=np.uint64)
    for w in range(n_words):
        flip[w] = cols[q, w]
    flip[wp] &= ~(one << bp)
    for c in range(2 * n):
        if (cols[c, wp] >> bp) & one:
            for w in range(n_words):
                cols[c, w] ^= flip[w]
            cols[c, wp] &= ~(one << bp)
    cols[n + q, wp] |= one << bp
    return 1
