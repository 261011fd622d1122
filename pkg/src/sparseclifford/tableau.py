"""Sign-free stabilizer tableau with bit-packed column storage.

A pure stabilizer state on ``n`` qubits is held as the binary matrix whose
row ``l`` encodes the generator ``g_l = prod_i X_i^{x_i} Z_i^{z_i}`` as the
bit string ``(x_0..x_{n-1}, z_0..z_{n-1})``.  Phases are deliberately not
tracked: every observable exposed here (GF(2) ranks, Renyi-2 entropies and
the mutual informations built from them) is independent of generator signs,
and Z measurements update the stabilizer group without sampling an outcome.

Storage is column-major: column ``c`` of the matrix is packed into uint64
words over the row index, so the single-qubit and two-qubit gate rules
(column swaps and column XORs) are whole-word operations, and entropy
queries gather the packed columns of a region directly.
"""

import enum
from dataclasses import dataclass

import numpy as np

from . import gf2

_SYMPLECTIC_FORM_4 = np.array(
    [[0, 0, 1, 0],
     [0, 0, 0, 1],
     [1, 0, 0, 0],
     [0, 1, 0, 0]], dtype=np.uint8)

_GROUP_CACHE = None


class MeasurementKind(enum.Enum):
    DETERMINISTIC = "deterministic"
    RANDOM = "random"


def is_symplectic_4(matrix):
    """True iff the 4x4 binary matrix preserves the x/z pairing form."""
    m = np.asarray(matrix, dtype=np.uint8) & 1
    if m.shape != (4, 4):
        return False
    return bool(np.array_equal((m.T @ _SYMPLECTIC_FORM_4 @ m) % 2, _SYMPLECTIC_FORM_4))


@dataclass(frozen=True)
class TwoQubitSymplectic:
    """A 4x4 binary matrix acting on the column vector (x_i, x_j, z_i, z_j)."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.ascontiguousarray(np.asarray(self.matrix, dtype=np.uint8) & 1)
        if not is_symplectic_4(m):
            raise ValueError("matrix does not preserve the symplectic form over GF(2)")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)


def two_qubit_symplectic_group():
    """All 720 elements of Sp(4, GF(2)) as a (720, 4, 4) uint8 array.

    Enumerated by brute force over the 2^16 binary 4x4 matrices; cached after
    the first call.  Row order is the numeric order of the 16-bit packing, so
    it is stable across runs.
    """
    global _GROUP_CACHE
    if _GROUP_CACHE is None:
        codes = np.arange(1 << 16, dtype=np.uint32)
        mats = ((codes[:, None] >> np.arange(16, dtype=np.uint32)) & 1).astype(np.uint8)
        mats = mats.reshape(-1, 4, 4)
        prod = np.einsum("nji,jk,nkl->nil", mats, _SYMPLECTIC_FORM_4, mats) % 2
        keep = (prod == _SYMPLECTIC_FORM_4[None]).all(axis=(1, 2))
        group = np.ascontiguousarray(mats[keep])
        group.setflags(write=False)
        _GROUP_CACHE = group
    return _GROUP_CACHE


def sample_two_qubit_clifford(rng):
    """Draw a uniformly random element of the 720-element group Sp(4, GF(2))."""
    group = two_qubit_symplectic_group()
    return TwoQubitSymplectic(group[int(rng.integers(len(group)))])


def cnot_symplectic():
    """Symplectic matrix of CNOT with control i, target j."""
    return TwoQubitSymplectic(np.array(
        [[1, 0, 0, 0],
         [1, 1, 0, 0],
         [0, 0, 1, 1],
         [0, 0, 0, 1]], dtype=np.uint8))


def _region_indices(region):
    indices = getattr(region, "indices", region)
    return [int(i) for i in indices]


class Tableau:
    """Pure stabilizer state on ``n_qubits`` qubits, signs untracked."""

    __slots__ = ("n_qubits", "_cols", "_n_words")

    def __init__(self, n_qubits):
        if n_qubits < 1:
            raise ValueError("n_qubits must be >= 1")
        self.n_qubits = int(n_qubits)
        self._n_words = (self.n_qubits + 63) // 64
        self._cols = np.zeros((2 * self.n_qubits, self._n_words), dtype=np.uint64)
        for l in range(self.n_qubits):
            self._cols[self.n_qubits + l, l >> 6] |= np.uint64(1) << np.uint64(l & 63)

    def copy(self):
        dup = Tableau.__new__(Tableau)
        dup.n_qubits = self.n_qubits
        dup._n_words = self._n_words
        dup._cols = self._cols.copy()
        return dup

    def _check_index(self, i):
        if not 0 <= i < self.n_qubits:
            raise IndexError(f"qubit index {i} out of range for {self.n_qubits} qubits")

    # -- gates ---------------------------------------------------------

    def apply_hadamard(self, i):
        """H on qubit i: exchange the X and Z columns of qubit i."""
        self._check_index(i)
        n = self.n_qubits
        self._cols[[i, n + i]] = self._cols[[n + i, i]]

    def apply_phase(self, i):
        """P on qubit i: Z column of i gets XORed with the X column of i."""
        self._check_index(i)
        self._cols[self.n_qubits + i] ^= self._cols[i]

    def apply_cnot(self, i, j):
        """CNOT with control i and target j."""
        self._check_index(i)
        self._check_index(j)
        if i == j:
            raise ValueError("control and target must differ")
        n = self.n_qubits
        self._cols[j] ^= self._cols[i]
        self._cols[n + i] ^= self._cols[n + j]

    def apply_two_qubit(self, i, j, gate):
        """Apply a TwoQubitSymplectic to the (x_i, x_j, z_i, z_j) columns."""
        self._check_index(i)
        self._check_index(j)
        if i == j:
            raise ValueError("two-qubit gate needs distinct qubits")
        gf2.apply_two_qubit_gates(
            self._cols, self.n_qubits,
            np.array([i], dtype=np.int64), np.array([j], dtype=np.int64),
            np.ascontiguousarray(gate.matrix[None, :, :]))

    def apply_two_qubit_batch(self, idx_i, idx_j, gate_matrices):
        """Apply many two-qubit gates at once; pairs must be disjoint."""
        gf2.apply_two_qubit_gates(
            self._cols, self.n_qubits,
            np.asarray(idx_i, dtype=np.int64), np.asarray(idx_j, dtype=np.int64),
            np.ascontiguousarray(gate_matrices, dtype=np.uint8))

    # -- measurement ----------------------------------------------------

    def measure_z(self, q, pivot=None):
        """Project qubit q onto the Z basis, sign-free.

        Returns MeasurementKind.DETERMINISTIC when Z_q already lies in the
        stabilizer group (state unchanged) and MeasurementKind.RANDOM when an
        update was performed.  The pivot row defaults to the lowest-index
        anticommuting row; ``pivot`` overrides it (used by tests to check
        pivot independence).
        """
        self._check_index(q)
        forced = -1 if pivot is None else int(pivot)
        result = gf2.measure_z_packed(self._cols, self.n_qubits, q, forced)
        if result < 0:
            raise ValueError(f"row {pivot} does not anticommute with Z_{q}")
        return MeasurementKind.RANDOM if result else MeasurementKind.DETERMINISTIC

    def measure_many(self, qubits):
        """Measure several qubits in the given order (outcome kinds discarded)."""
        qs = np.asarray(list(qubits), dtype=np.int64)
        for q in qs:
            self._check_index(q)
        gf2.measure_many_packed(self._cols, self.n_qubits, qs)

    def anticommuting_rows(self, q):
        """Row indices whose generator anticommutes with Z_q (x_q bit set)."""
        self._check_index(q)
        col = self._cols[q]
        rows = []
        for l in range(self.n_qubits):
            if (col[l >> 6] >> np.uint64(l & 63)) & np.uint64(1):
                rows.append(l)
        return rows

    # -- entropy --------------------------------------------------------

    def region_rank(self, region):
        """GF(2) rank of the tableau restricted to the X,Z columns of a region."""
        indices = _region_indices(region)
        n = self.n_qubits
        for i in indices:
            self._check_index(i)
        if len(set(indices)) != len(indices):
            raise ValueError("region indices must be distinct")
        if not indices:
            return 0
        cols = np.fromiter(
            (c for i in indices for c in (i, n + i)), dtype=np.int64, count=2 * len(indices))
        sub = np.ascontiguousarray(self._cols[cols])
        return int(gf2.rank_packed(sub, n))

    def renyi_entropy_bits(self, region):
        """Renyi-2 entropy of a region in bits: rank of its columns minus |A|."""
        indices = _region_indices(region)
        return self.region_rank(indices) - len(indices)

    # -- introspection ---------------------------------------------------

    def binary_matrix(self):
        """The full (n, 2n) 0/1 generator matrix (row l = generator l)."""
        return gf2.unpack_rows(self._cols, self.n_qubits).T.copy()

    def packed_columns(self):
        """Read-only view of the packed column storage; column c is row c."""
        view = self._cols.view()
        view.setflags(write=False)
        return view

    def is_valid(self):
        """Check the pure-state invariants: full rank and commuting rows."""
        mat = self.binary_matrix()
        n = self.n_qubits
        if gf2.rank_gf2(mat) != n:
            return False
        x, z = mat[:, :n].astype(np.int64), mat[:, n:].astype(np.int64)
        sym = (x @ z.T + z @ x.T) % 2
        return not sym.any()


def new_product_state(n_qubits):
    """Tableau for |0...0>: row l is the generator Z_l."""
    return Tableau(n_qubits)
