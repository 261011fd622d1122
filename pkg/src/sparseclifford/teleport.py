"""Teleportation-based lightcone probe.

A reference qubit R is maximally entangled with a chosen input site before
the circuit runs.  The teleportation fidelity toward an output site j at
time t is the mutual information I(R; j) evaluated after projectively
measuring every other system qubit in the Z basis; it is 2 ln 2 when the
input qubit can be recovered at j and 0 when it cannot.  Because signs are
untracked the conditional state depends only on the measured set, not on
outcomes or measurement order, so one trajectory serves every output by
forking copies.
"""

from dataclasses import dataclass

import numpy as np

from .circuit import CircuitConfig, apply_block
from .diagnostics import LN2, ObservableSeries, curve_crossing
from .geometry import GeometryKind, linear_distance, monna, two_adic_norm
from .tableau import Tableau


@dataclass(frozen=True)
class TeleportTask:
    """Lightcone-map request: where the qubit goes in and where it is sought."""

    config: CircuitConfig
    input_site: int = 0
    output_sites: tuple = ()
    measure_times: tuple = ()

    def __post_init__(self):
        n = self.config.n_sites
        sites = tuple(int(j) % n for j in self.output_sites) or (self.input_site,)
        times = tuple(self.measure_times) or tuple(range(self.config.t_max + 1))
        if not 0 <= self.input_site < n:
            raise ValueError("input site out of range")
        if any(t < 0 for t in times) or list(times) != sorted(set(times)):
            raise ValueError("measure_times must be increasing and non-negative")
        object.__setattr__(self, "output_sites", sites)
        object.__setattr__(self, "measure_times", times)


def prepare_with_reference(n_sites, input_site):
    """|0..0> on N+1 qubits with the reference (index N) Bell-paired to the input."""
    tab = Tableau(n_sites + 1)
    ref = n_sites
    if not 0 <= input_site < n_sites:
        raise IndexError("input site out of range")
    tab.apply_hadamard(ref)
    tab.apply_cnot(ref, input_site)
    return tab


def _pair_mi_nats(tab, a, b):
    bits = (tab.renyi_entropy_bits([a]) + tab.renyi_entropy_bits([b])
            - tab.renyi_entropy_bits([a, b]))
    return bits * LN2


def conditional_mutual_information(tab, j, n_sites=None):
    """I(R; j) after Z-measuring every qubit except the reference and j.

    Operates on a fork; the input tableau is untouched.  The result is an
    integer multiple of ln 2 in [0, 2 ln 2].
    """
    n = (tab.n_qubits - 1) if n_sites is None else n_sites
    ref = tab.n_qubits - 1
    if j == ref:
        raise ValueError("output must differ from the reference qubit")
    work = tab.copy()
    work.measure_many([q for q in range(n) if q != j])
    return _pair_mi_nats(work, ref, j)


def fidelity_profile(tab, n_sites, outputs):
    """I(R; j) for every output j, sharing the common spectator measurements.

    Spectators outside the output set are measured once; each output then
    forks and measures the remaining outputs.  Order independence of the
    sign-free measurement update makes this exactly equivalent to measuring
    all-but-(R, j) from scratch.
    """
    ref = tab.n_qubits - 1
    base = tab.copy()
    outset = set(outputs)
    base.measure_many([q for q in range(n_sites) if q not in outset])
    result = np.empty(len(outputs), dtype=float)
    for k, j in enumerate(outputs):
        work = base.copy()
        work.measure_many([q for q in outputs if q != j])
        result[k] = _pair_mi_nats(work, ref, j)
    return result


def run_lightcone_trajectory(n_sites, s, input_site, outputs, measure_times, rng):
    """One trajectory of the lightcone probe: fidelities at each measure time.

    Returns (len(measure_times), len(outputs)) nats.  Sampling happens before
    the step to time t+1, so row 0 at measure time 0 is circuit-free.
    """
    tab = prepare_with_reference(n_sites, input_site)
    times = list(measure_times)
    out = np.zeros((len(times), len(outputs)), dtype=float)
    cursor = 0
    t = 0
    while True:
        if cursor < len(times) and times[cursor] == t:
            out[cursor] = fidelity_profile(tab, n_sites, outputs)
            cursor += 1
        if cursor >= len(times):
            break
        apply_block(tab, "even", s, n_sites, rng)
        apply_block(tab, "odd", s, n_sites, rng)
        t += 1
    return out


@dataclass
class LightconeMap:
    """Ensemble-averaged fidelity over (time, output site) with both axes."""

    times: np.ndarray
    outputs: tuple
    mean: np.ndarray
    sem: np.ndarray
    input_site: int
    n_sites: int
    n_traj: int

    def linear_distances(self):
        return [linear_distance(self.input_site, j, self.n_sites) for j in self.outputs]

    def two_adic_distances(self):
        return [float(two_adic_norm(self.input_site, j, self.n_sites)) for j in self.outputs]

    def monna_positions(self):
        """Output sites in the treelike (digit-reversed) axis ordering."""
        return [monna(j, self.n_sites) for j in self.outputs]

    def support_boundary(self, threshold, metric="linear"):
        """Largest distance with mean fidelity above threshold, per time."""
        dists = (self.linear_distances() if metric == "linear"
                 else self.two_adic_distances())
        dists = np.asarray(dists, dtype=float)
        out = np.zeros(len(self.times))
        for k in range(len(self.times)):
            hot = self.mean[k] > threshold
            out[k] = dists[hot].max() if hot.any() else 0.0
        return out


def lightcone_map(task, workers=None):
    """Ensemble-averaged I(R; j) over outputs and measure times (a Fig-style map)."""
    from . import ensemble

    return ensemble.run_lightcone(task, workers=workers)


def target_fidelity_value(profile_row, outputs, input_site, n_sites, geometry):
    """Collapse one fidelity profile to the maximally-separated target value.

    Linear geometry reads the antipodal site; treelike geometry averages the
    two linear neighbours (the pair at maximal 2-adic distance from the
    input).
    """
    kind = GeometryKind(geometry)
    lookup = {j: k for k, j in enumerate(outputs)}
    if kind is GeometryKind.LINEAR:
        j = (input_site + n_sites // 2) % n_sites
        return profile_row[lookup[j]]
    left = (input_site - 1) % n_sites
    right = (input_site + 1) % n_sites
    return 0.5 * (profile_row[lookup[left]] + profile_row[lookup[right]])


def critical_targets(input_site, n_sites, geometry):
    """Output sites needed for the maximally-separated teleportation target."""
    kind = GeometryKind(geometry)
    if kind is GeometryKind.LINEAR:
        return ((input_site + n_sites // 2) % n_sites,)
    return ((input_site - 1) % n_sites, (input_site + 1) % n_sites)


@dataclass
class CriticalTimeResult:
    """Crossing analysis of teleportation fidelity across system sizes."""

    t_c: float
    pair_crossings: dict
    ci_low: float
    ci_high: float
    curves: dict

    @property
    def ci_width(self):
        return self.ci_high - self.ci_low


def critical_time(s, sizes, geometry, trajectories=1000, t_max=10, seed=0,
                  workers=None, min_sigma=2.0):
    """Median fidelity-curve crossing time across consecutive sizes, or None.

    A crossing between adjacent system sizes requires the two mean curves to
    first hold a statistically significant ordering (min_sigma combined
    standard errors over consecutive samples) and then meet; pairs that stay
    statistically indistinguishable, or stay ordered through the whole run,
    report no transition, as happens in the strongly local regimes.

    The meeting points must be resolved to a fraction of a timestep for the
    size-drift test to mean anything, which in practice needs ensembles of
    order 10^4 trajectories.
    """
    result = critical_time_analysis(
        s, sizes, geometry, trajectories=trajectories, t_max=t_max, seed=seed,
        workers=workers, min_sigma=min_sigma, bootstrap=0)
    return None if result is None else result.t_c


_MAX_CROSSING_DRIFT = 0.5  # timesteps across the size ladder


def critical_time_analysis(s, sizes, geometry, trajectories=1000, t_max=10,
                           seed=0, workers=None, min_sigma=2.0, bootstrap=200):
    """critical_time plus per-pair crossings and a bootstrap confidence interval.

    A finite-time transition is declared only when every consecutive size
    pair crosses and the crossing times agree to within half a timestep
    across the whole ladder.  Pairs that merge only as each size saturates
    (the local regimes) produce crossing times that drift upward with N and
    are rejected; a genuine critical point is size-independent.
    """
    from . import ensemble

    sizes = sorted(int(n) for n in sizes)
    if len(sizes) < 2:
        raise ValueError("need at least two system sizes")
    curves = {}
    samples = {}
    for n in sizes:
        per_traj, series = ensemble.run_critical_target(
            n, s, geometry, trajectories, t_max, seed, workers=workers)
        curves[n] = series
        samples[n] = per_traj
    crossings = _consistent_crossings(curves, sizes, min_sigma)
    if crossings is None:
        return None
    t_c = float(np.median(list(crossings.values())))
    ci_low = ci_high = t_c
    if bootstrap:
        boot = _bootstrap_crossings(samples, sizes, min_sigma, bootstrap, seed)
        if boot:
            ci_low, ci_high = np.percentile(boot, [2.5, 97.5])
    return CriticalTimeResult(
        t_c=t_c, pair_crossings=crossings,
        ci_low=float(ci_low), ci_high=float(ci_high), curves=curves)


def _consistent_crossings(curves, sizes, min_sigma):
    """Consecutive-pair crossings, or None when absent or drifting with N."""
    out = {}
    for small, large in zip(sizes, sizes[1:]):
        t = curve_crossing(curves[small], curves[large], min_sigma=min_sigma)
        if t is None:
            return None
        out[(small, large)] = t
    times = list(out.values())
    if len(times) >= 2 and max(times) - min(times) >= _MAX_CROSSING_DRIFT:
        return None
    return out


def _bootstrap_crossings(samples, sizes, min_sigma, n_boot, seed):
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(0xB007,)))
    boot = []
    for _ in range(n_boot):
        curves = {}
        for n in sizes:
            data = samples[n]  # (n_traj, T)
            pick = rng.integers(data.shape[0], size=data.shape[0])
            sub = data[pick]
            mean = sub.mean(axis=0)
            sem = sub.std(axis=0, ddof=1) / np.sqrt(sub.shape[0])
            curves[n] = ObservableSeries(
                name=f"fidelity[N={n}]", times=np.arange(sub.shape[1], dtype=float),
                mean=mean, sem=sem, n_traj=sub.shape[0])
        crossings = _consistent_crossings(curves, sizes, min_sigma)
        if crossings:
            boot.append(float(np.median(list(crossings.values()))))
    return boot
