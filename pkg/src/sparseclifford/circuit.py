"""Sparse nonlocal bricklayer circuit with a tunable interaction exponent.

Qubits on a periodic chain of N = 2**n sites interact only at power-of-two
separations r = 2**(m-1), m = 1..log2 N.  Gates are arranged in alternating
even and odd bricklayer blocks: at distance scale m the even block admits a
gate on (i, i + 2**(m-1)) iff floor(i / 2**(m-1)) is even, the odd block iff
it is odd.  Each admitted gate fires independently with probability
p(r, s) = r**s / normalization(N, s), so negative s favours short gates and
positive s favours long ones, with the normalization chosen so that one gate
per site fires on average during each timestep (one even block followed by
one odd block).

At the top scale m = log2 N the even and odd brick conditions select the
same set of pairs, so that layer is applied once per timestep (in the even
block); this is what makes the per-site average come out to exactly one gate
per block pair.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from .tableau import two_qubit_symplectic_group

logger = logging.getLogger(__name__)

_PARITY = {"even": 0, "odd": 1, 0: 0, 1: 1}
_CLAMP_WARNED = set()


def log2_int(n):
    """log2 of a positive power of two, as an int."""
    if n < 1 or n & (n - 1):
        raise ValueError(f"expected a power of two, got {n}")
    return n.bit_length() - 1


@dataclass(frozen=True)
class CircuitConfig:
    """Ensemble parameters: system size, exponent, seeding and duration."""

    n_sites: int
    s: float
    seed: int = 0
    trajectories: int = 1
    t_max: int = 10

    def __post_init__(self):
        if self.n_sites < 4 or self.n_sites & (self.n_sites - 1):
            raise ValueError("n_sites must be a power of two >= 4")
        if self.trajectories < 1:
            raise ValueError("trajectories must be >= 1")
        if self.t_max < 0:
            raise ValueError("t_max must be >= 0")


def normalization(n_sites, s):
    """Normalization constant of the sparse gate distribution.

    Equals ((N/2)**s + 2 * sum_{k=0}^{log2 N - 2} 2**(k s)) / 2, i.e. half
    the expected number of admitted distances weighted by r**s, so that the
    firing probabilities r**s / normalization put one gate per site per
    timestep on average.
    """
    n_exp = log2_int(n_sites)
    if n_exp < 2:
        raise ValueError("n_sites must be >= 4")
    ks = np.arange(n_exp - 1, dtype=float)
    return 0.5 * ((n_sites / 2.0) ** s + 2.0 * float(np.exp2(ks * s).sum()))


def gate_probability(r, s, n_sites):
    """Firing probability p(r, s) = r**s / normalization for power-of-two r.

    Zero for separations that are not a power of two.  Values above 1 (deep
    in the |s| extremes at small N) are clamped to 1 with a warning, since
    each candidate position is a Bernoulli trial.
    """
    if not 1 <= r <= n_sites // 2:
        raise ValueError(f"separation {r} out of range [1, {n_sites // 2}]")
    if r & (r - 1):
        return 0.0
    p = float(r) ** s / normalization(n_sites, s)
    if p > 1.0:
        key = (r, s, n_sites)
        if key not in _CLAMP_WARNED:
            _CLAMP_WARNED.add(key)
            logger.warning(
                "gate probability %.3g > 1 at r=%d, s=%g, N=%d; clamping to 1",
                p, r, s, n_sites)
        return 1.0
    return p


def candidate_pairs(n_sites, m, parity):
    """Admitted gate positions at distance scale m for one brick parity.

    Pairs are (i, (i + 2**(m-1)) mod N) over the sites i whose brick index
    floor(i / 2**(m-1)) has the requested parity; within one layer no qubit
    appears twice.
    """
    n_exp = log2_int(n_sites)
    if not 1 <= m <= n_exp:
        raise ValueError(f"distance scale m={m} out of range [1, {n_exp}]")
    par = _PARITY[parity]
    d = 1 << (m - 1)
    return [(i, (i + d) % n_sites) for i in range(n_sites) if (i // d) % 2 == par]


def block_distance_scales(n_sites, parity):
    """Distance scales m applied in one block, in increasing order.

    The odd block omits the top scale m = log2 N because its brick pattern
    there coincides with the even block's; the layer runs once per timestep.
    """
    n_exp = log2_int(n_sites)
    par = _PARITY[parity]
    return list(range(1, n_exp + 1)) if par == 0 else list(range(1, n_exp))


def apply_block(tab, parity, s, n_sites, rng, fired_log=None):
    """Apply one bricklayer block in place; returns the number of gates fired.

    Layers run in increasing distance order.  Each candidate position draws
    an independent Bernoulli with gate_probability, and every fired position
    gets a fresh uniformly random two-qubit Clifford.  The rng consumption
    order (per layer: one uniform per candidate, then one gate index per
    fired position) pins the whole trajectory to the seed.  ``fired_log``,
    when given, collects one (m, i, j) entry per fired gate.
    """
    group = two_qubit_symplectic_group()
    fired_total = 0
    for m in block_distance_scales(n_sites, parity):
        pairs = candidate_pairs(n_sites, m, parity)
        p = gate_probability(1 << (m - 1), s, n_sites)
        fires = rng.random(len(pairs)) < p
        n_fired = int(fires.sum())
        if not n_fired:
            continue
        gate_idx = rng.integers(len(group), size=n_fired)
        chosen = np.array([pr for pr, f in zip(pairs, fires) if f], dtype=np.int64)
        tab.apply_two_qubit_batch(chosen[:, 0], chosen[:, 1], group[gate_idx])
        fired_total += n_fired
        if fired_log is not None:
            fired_log.extend((m, int(i), int(j)) for i, j in chosen)
    return fired_total


def step(tab, config, rng):
    """One timestep: an even block followed by an odd block.  Returns gates fired."""
    fired = apply_block(tab, "even", config.s, config.n_sites, rng)
    fired += apply_block(tab, "odd", config.s, config.n_sites, rng)
    return fired


def expected_gates_per_site_per_step(n_sites, s):
    """Predicted mean number of gate endpoints touching one site per timestep.

    Every site sits in exactly one candidate pair per (layer, block), so the
    prediction is 2 * sum_{k=0}^{log2 N - 2} p(2**k) + p(N/2); with the
    unclamped probabilities this evaluates to exactly 2.
    """
    n_exp = log2_int(n_sites)
    total = 0.0
    for k in range(n_exp - 1):
        total += 2.0 * gate_probability(1 << k, s, n_sites)
    total += gate_probability(n_sites // 2, s, n_sites)
    return total
