"""Linear (periodic Euclidean) and treelike (2-adic) site geometry.

Sites live on a periodic chain of ``n_sites = 2**n`` qubits.  The linear
metric is the usual shortest wrap-around distance.  The treelike metric comes
from the 2-adic norm of the site difference: two sites are close when their
difference is divisible by a large power of two, which is the distance
induced by the depth of the smallest binary subtree containing both.  The
Monna map (binary digit reversal) converts between the two orderings: sites
that are adjacent after the Monna reordering are exactly the pairs at the
smallest nonzero 2-adic separation.
"""

import enum
from dataclasses import dataclass
from fractions import Fraction


class GeometryKind(enum.Enum):
    LINEAR = "linear"
    TREELIKE = "treelike"


@dataclass(frozen=True)
class Region:
    """Ordered set of distinct qubit indices with a geometry tag."""

    indices: tuple
    geometry: str = "arbitrary"

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if len(set(idx)) != len(idx):
            raise ValueError("region indices must be distinct")
        if any(i < 0 for i in idx):
            raise ValueError("region indices must be non-negative")
        object.__setattr__(self, "indices", idx)

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)


def _check_power_of_two(n_sites):
    if n_sites < 2 or n_sites & (n_sites - 1):
        raise ValueError(f"n_sites must be a power of two >= 2, got {n_sites}")


def _check_site(i, n_sites):
    if not 0 <= i < n_sites:
        raise ValueError(f"site {i} out of range [0, {n_sites})")


def linear_distance(i, j, n_sites):
    """Shortest periodic distance: min(|i-j|, n_sites - |i-j|)."""
    _check_site(i, n_sites)
    _check_site(j, n_sites)
    d = abs(i - j)
    return min(d, n_sites - d)


def monna(x, n_sites):
    """Binary digit reversal of x in log2(n_sites) bits; an involution."""
    _check_power_of_two(n_sites)
    _check_site(x, n_sites)
    n_bits = n_sites.bit_length() - 1
    out = 0
    for _ in range(n_bits):
        out = (out << 1) | (x & 1)
        x >>= 1
    return out


def two_adic_valuation(i, j, n_sites):
    """Dyadic valuation v2(i - j) of the integer site difference; None if i == j.

    Well defined modulo n_sites because 0 < |i - j| < n_sites keeps the
    valuation below log2(n_sites).
    """
    _check_power_of_two(n_sites)
    _check_site(i, n_sites)
    _check_site(j, n_sites)
    if i == j:
        return None
    d = abs(i - j)
    return (d & -d).bit_length() - 1


def two_adic_norm(i, j, n_sites):
    """2-adic norm 2**(-v2(i-j)) of the site difference, exactly; 0 for i == j."""
    v = two_adic_valuation(i, j, n_sites)
    if v is None:
        return Fraction(0)
    return Fraction(1, 1 << v)


def tree_distance(i, j, n_sites):
    """Edges of the regular binary tree between sites i and j: 2*(log2 N - v2)."""
    v = two_adic_valuation(i, j, n_sites)
    if v is None:
        return 0
    return 2 * (n_sites.bit_length() - 1 - v)


def two_adic_norm_from_tree(i, j, n_sites):
    """Tree-depth form of the norm, 2**(d_tree/2) / N; equals two_adic_norm.

    Kept as a separate accessor because the two formulas look unrelated at
    first sight; on integer sites mod N they coincide identically.
    """
    if i == j:
        return Fraction(0)
    return Fraction(1 << (tree_distance(i, j, n_sites) // 2), n_sites)


def make_region(kind, anchor, size, n_sites):
    """Contiguous region of ``size`` sites anchored at ``anchor``.

    Linear regions are the cyclic interval [anchor, anchor+size) mod N.
    Treelike regions are the Monna images of that interval, i.e. cyclic
    intervals in the Monna-reordered chain.
    """
    kind = GeometryKind(kind)
    _check_power_of_two(n_sites)
    _check_site(anchor, n_sites)
    if not 1 <= size <= n_sites:
        raise ValueError(f"region size must be in [1, {n_sites}], got {size}")
    span = [(anchor + k) % n_sites for k in range(size)]
    if kind is GeometryKind.LINEAR:
        return Region(tuple(span), geometry="linear")
    return Region(tuple(monna(y, n_sites) for y in span), geometry="treelike")


def is_contiguous(region, kind, n_sites):
    """True iff the region is one cyclic interval in the ordering of ``kind``.

    Under the identity ordering (linear) or the Monna ordering (treelike)
    this is equivalent to the bipartition criterion: however the region is
    split in two, some pair straddling the split sits at the minimal metric
    distance.
    """
    kind = GeometryKind(kind)
    _check_power_of_two(n_sites)
    indices = tuple(getattr(region, "indices", region))
    for i in indices:
        _check_site(i, n_sites)
    if len(indices) <= 1 or len(indices) == n_sites:
        return True
    if kind is GeometryKind.TREELIKE:
        positions = sorted(monna(i, n_sites) for i in indices)
    else:
        positions = sorted(indices)
    gaps = 0
    for a, b in zip(positions, positions[1:] + [positions[0] + n_sites]):
        if b - a > 1:
            gaps += 1
    return gaps <= 1
