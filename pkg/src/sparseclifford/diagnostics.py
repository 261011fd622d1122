"""Entanglement diagnostics: mutual informations, scans, thresholds and fits.

All information quantities are reported in nats.  For a single stabilizer
state they are integer multiples of ln 2; ensemble means are not.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import gf2
from .geometry import GeometryKind, Region, make_region, monna

LN2 = math.log(2.0)


@dataclass
class ObservableSeries:
    """Per-timestep ensemble statistics for one named observable."""

    name: str
    times: np.ndarray
    mean: np.ndarray
    sem: np.ndarray
    n_traj: int

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.mean = np.asarray(self.mean, dtype=float)
        self.sem = np.asarray(self.sem, dtype=float)
        if not (len(self.times) == len(self.mean) == len(self.sem)):
            raise ValueError("times, mean and sem must have equal lengths")
        if len(self.times) > 1 and not (np.diff(self.times) > 0).all():
            raise ValueError("times must be strictly increasing")
        if (self.sem < 0).any():
            raise ValueError("sem must be non-negative")


@dataclass
class FitResult:
    """Least-squares fit of a scaling model; residual is the sum of squares."""

    model: str
    params: tuple
    residual: float


def _check_disjoint(*regions):
    seen = set()
    for r in regions:
        idx = set(getattr(r, "indices", r))
        if seen & idx:
            raise ValueError("regions must be disjoint")
        seen |= idx


def _union(*regions):
    out = []
    for r in regions:
        out.extend(getattr(r, "indices", r))
    return out


def mutual_information(tab, region_a, region_b):
    """I(A;B) = S_A + S_B - S_AB in nats; non-negative for stabilizer states."""
    _check_disjoint(region_a, region_b)
    s_a = tab.renyi_entropy_bits(region_a)
    s_b = tab.renyi_entropy_bits(region_b)
    s_ab = tab.renyi_entropy_bits(_union(region_a, region_b))
    return (s_a + s_b - s_ab) * LN2


def tripartite_mutual_information(tab, region_a, region_b, region_c):
    """I(A:B:C) = I(A;B) + I(A;C) - I(A;BC) in nats; negative when scrambled."""
    _check_disjoint(region_a, region_b, region_c)
    bits = (
        tab.renyi_entropy_bits(region_a)
        + tab.renyi_entropy_bits(region_b)
        + tab.renyi_entropy_bits(region_c)
        - tab.renyi_entropy_bits(_union(region_a, region_b))
        - tab.renyi_entropy_bits(_union(region_a, region_c))
        - tab.renyi_entropy_bits(_union(region_b, region_c))
        + tab.renyi_entropy_bits(_union(region_a, region_b, region_c))
    )
    return bits * LN2


def entropy_scan(tab, kind, anchor=0, n_sites=None):
    """S_A in nats for contiguous regions of every size 1..N-1 at one anchor.

    Sizes grow by extending the same anchored interval, so the scan runs one
    incremental GF(2) elimination instead of N-1 independent ranks.
    """
    kind = GeometryKind(kind)
    n = tab.n_qubits if n_sites is None else n_sites
    order = [(anchor + k) % n for k in range(n)]
    if kind is GeometryKind.TREELIKE:
        order = [monna(y, n) for y in order]
    cols = tab.packed_columns()
    n_rows = tab.n_qubits
    basis = np.zeros((n_rows, cols.shape[1]), dtype=np.uint64)
    pivots = np.zeros(n_rows, dtype=np.bool_)
    rank = 0
    out = []
    for size, site in enumerate(order[:-1], start=1):
        rank += gf2.basis_insert(basis, pivots, cols[site], n_rows)
        rank += gf2.basis_insert(basis, pivots, cols[tab.n_qubits + site], n_rows)
        out.append((size, (rank - size) * LN2))
    return out


def expected_scrambled_entropy(n_sites, size):
    """Mean region entropy of a fully scrambled state: (|A| - 2**(2|A|-N)) ln 2.

    Large-N random-matrix asymptotics; sizes above N/2 use the pure-state
    complement symmetry.
    """
    if not 0 <= size <= n_sites:
        raise ValueError("size out of range")
    a = min(size, n_sites - size)
    return max(0.0, (a - 2.0 ** (2 * a - n_sites)) * LN2)


def rank_deficiency_probability(n_sites, size, deficiency, cutoff=64):
    """P(rank of a random N x 2|A| binary matrix = 2|A| - deficiency).

    Evaluates 2**(-eps (N - 2|A| + eps)) * prod_{i>eps} (1 - 2**-i)
    * prod_{i=1}^{N-2|A|+eps} (1 - 2**-i)**-1 with the infinite product
    truncated after ``cutoff`` factors.
    """
    eps = deficiency
    if eps < 0 or 2 * size - eps > n_sites:
        raise ValueError("deficiency incompatible with matrix shape")
    excess = n_sites - 2 * size + eps
    log2p = -float(eps) * excess
    for i in range(eps + 1, eps + 1 + cutoff):
        log2p += math.log2(1.0 - 2.0 ** (-i))
    for i in range(1, excess + 1):
        log2p -= math.log2(1.0 - 2.0 ** (-i))
    return 2.0 ** log2p


def first_threshold_time(series, threshold):
    """Earliest time the mean crosses a threshold, linearly interpolated.

    The crossing direction is set by which side of the threshold the series
    starts on; returns None when the mean never reaches the other side.  A
    series starting exactly at the threshold crosses at its first time.
    """
    times = np.asarray(series.times, dtype=float)
    mean = np.asarray(series.mean, dtype=float)
    if len(times) == 0:
        return None
    delta = mean - threshold
    if delta[0] == 0.0:
        return float(times[0])
    start = math.copysign(1.0, delta[0])
    for k in range(1, len(times)):
        if delta[k] == 0.0 or math.copysign(1.0, delta[k]) != start:
            frac = delta[k - 1] / (delta[k - 1] - delta[k])
            return float(times[k - 1] + frac * (times[k] - times[k - 1]))
    return None


_FIT_MODELS = ("linear-in-N", "log-in-N", "power-law")


def fit_scaling(sizes, values, model):
    """Least-squares fit of times against system size.

    Models: 'linear-in-N' (y = a N + b), 'log-in-N' (y = a ln N + b) and
    'power-law' (y = c N**a, fitted in log-log space).  params is (a, b) with
    b the intercept (ln c for the power law); residual is the sum of squared
    residuals in the fitted space.
    """
    if model not in _FIT_MODELS:
        raise ValueError(f"unknown model {model!r}; expected one of {_FIT_MODELS}")
    x = np.asarray(sizes, dtype=float)
    y = np.asarray(values, dtype=float)
    if len(x) != len(y) or len(x) < 3:
        raise ValueError("need at least 3 (size, value) points")
    if model == "linear-in-N":
        fx, fy = x, y
    elif model == "log-in-N":
        fx, fy = np.log(x), y
    else:
        if (y <= 0).any():
            raise ValueError("power-law fit needs positive values")
        fx, fy = np.log(x), np.log(y)
    design = np.stack([fx, np.ones_like(fx)], axis=1)
    params, res, _, _ = np.linalg.lstsq(design, fy, rcond=None)
    residual = float(res[0]) if len(res) else float(((design @ params - fy) ** 2).sum())
    return FitResult(model=model, params=(float(params[0]), float(params[1])),
                     residual=residual)


def _common_grid(curve1, curve2):
    t1, t2 = np.asarray(curve1.times, float), np.asarray(curve2.times, float)
    lo, hi = max(t1[0], t2[0]), min(t1[-1], t2[-1])
    if lo > hi:
        raise ValueError("curves do not overlap in time")
    grid = np.unique(np.concatenate([t1, t2]))
    grid = grid[(grid >= lo) & (grid <= hi)]
    m1 = np.interp(grid, t1, np.asarray(curve1.mean, float))
    m2 = np.interp(grid, t2, np.asarray(curve2.mean, float))
    e1 = np.interp(grid, t1, np.asarray(curve1.sem, float))
    e2 = np.interp(grid, t2, np.asarray(curve2.sem, float))
    return grid, m1 - m2, np.hypot(e1, e2)


def curve_crossing(curve1, curve2, min_sigma=0.0, min_run=None):
    """Earliest time where the two means stop being ordered one way.

    The difference mean1 - mean2 must first hold one sign over a run of
    ``min_run`` samples; the crossing is the interpolated zero between the
    end of that run and the following sample, whether the curves invert or
    merely merge there.  Returns None when no ordered run ever ends inside
    the overlap (curves identical, never separated, or separated through the
    end).

    With ``min_sigma`` > 0, "ordered" means the difference exceeds that many
    combined standard errors, so statistical jitter between equal curves is
    not a separation and noisy excursions do not fake crossings; min_run
    then defaults to 2 consecutive significant samples (1 in the exact
    sem-free case).
    """
    grid, diff, sigma = _common_grid(curve1, curve2)
    if min_run is None:
        min_run = 2 if min_sigma > 0 else 1
    if min_sigma > 0:
        significant = np.abs(diff) > min_sigma * sigma
    else:
        significant = diff != 0.0
    signs = np.sign(diff)
    n = len(grid)
    k = 0
    while k < n:
        if not significant[k]:
            k += 1
            continue
        run_sign = signs[k]
        j = k
        while j + 1 < n and significant[j + 1] and signs[j + 1] == run_sign:
            j += 1
        if j - k + 1 >= min_run and j + 1 < n:
            a, b = j, j + 1
            if diff[a] == diff[b]:
                return float(grid[b])
            t = grid[a] + diff[a] / (diff[a] - diff[b]) * (grid[b] - grid[a])
            return float(min(max(t, grid[a]), grid[b]))
        k = j + 1
    return None
