"""Acceptance suite: one test per criterion, one printed PASS/FAIL line each.

Run with ``pytest -s tests/test_acceptance.py`` to see the per-criterion
lines as they complete.  The full suite takes tens of minutes on two cores;
the heavy ensembles (t0 scaling, golden ratio, teleportation transition)
dominate.

Statistical checks run at fixed seeds, so every run is reproducible
bit-for-bit.  Known defect: the deep-circuit TMI criterion compares against
the asymptotic value -(N/2) ln 2, which ignores an O(1) rank-deficiency
offset of about 2.55 bits; see the companion test and notes/decisions.md.
"""

import itertools
import math
import time

import numpy as np
import pytest

import sparseclifford as sc
from sparseclifford.circuit import block_distance_scales
from sparseclifford.diagnostics import LN2, ObservableSeries
from sparseclifford.ensemble import (run_critical_target, run_entropy_scan,
                                     run_lightcone, run_tripartite,
                                     trajectory_rng, _parallel_map)
from sparseclifford.teleport import TeleportTask, critical_time_analysis
from oracle import DenseState, symplectic_word_table, word_for

PHI = (1 + math.sqrt(5)) / 2


def _report(name, ok, detail=""):
    print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def _spec(kind, n, s, seed, trajectories, t_max, geometry="linear"):
    return sc.ExperimentSpec(
        kind=kind, geometry=geometry,
        config=sc.CircuitConfig(n_sites=n, s=s, seed=seed,
                                trajectories=trajectories, t_max=t_max))


# ---------------------------------------------------------------------------
# 1. Oracle equivalence: 500 random programs on N <= 8 qubits, every region
#    entropy matches the dense statevector Renyi-2 oracle exactly.
# ---------------------------------------------------------------------------

def test_acceptance_oracle_equivalence():
    start = time.time()
    table = symplectic_word_table()
    rng = np.random.default_rng(2024)
    programs = 500
    checked_regions = 0
    for trial in range(programs):
        n = int(rng.integers(2, 9))
        tab = sc.Tableau(n)
        dense = DenseState(n)
        n_ops = int(rng.integers(10, 10 + 5 * n))
        for _ in range(n_ops):
            op = rng.integers(5)
            if op == 0:
                q = int(rng.integers(n))
                tab.apply_hadamard(q)
                dense.hadamard(q)
            elif op == 1:
                q = int(rng.integers(n))
                tab.apply_phase(q)
                dense.phase(q)
            elif op == 2:
                i, j = map(int, rng.choice(n, size=2, replace=False))
                tab.apply_cnot(i, j)
                dense.cnot(i, j)
            elif op == 3:
                i, j = map(int, rng.choice(n, size=2, replace=False))
                gate = sc.sample_two_qubit_clifford(rng)
                tab.apply_two_qubit(i, j, gate)
                dense.apply_word(word_for(table, gate.matrix), i, j)
            else:
                q = int(rng.integers(n))
                kind = tab.measure_z(q)
                assert kind.value == dense.measure_z(q), (trial, q)
        for r in range(n + 1):
            for region in itertools.combinations(range(n), r):
                assert tab.renyi_entropy_bits(region) == dense.renyi2_bits(
                    list(region)), (trial, region)
                checked_regions += 1
    elapsed = time.time() - start
    _report("oracle-equivalence", elapsed < 60,
            f"{programs} programs, {checked_regions} region comparisons, "
            f"all exact, {elapsed:.1f}s (< 60s)")


# ---------------------------------------------------------------------------
# 2. Geometry properties, exhaustive for N <= 64.
# ---------------------------------------------------------------------------

def test_acceptance_geometry_properties():
    start = time.time()
    for n in (4, 8, 16, 32, 64):
        # Monna involution / bijection
        images = [sc.monna(x, n) for x in range(n)]
        assert sorted(images) == list(range(n))
        assert all(sc.monna(images[x], n) == x for x in range(n))

        # distance matrices through the public functions
        lin = np.array([[sc.linear_distance(i, j, n) for j in range(n)]
                        for i in range(n)], dtype=float)
        tree = np.array([[sc.tree_distance(i, j, n) for j in range(n)]
                         for i in range(n)], dtype=float)
        norm = np.array([[float(sc.two_adic_norm(i, j, n)) for j in range(n)]
                         for i in range(n)])

        for d in (lin, tree, norm):
            assert np.array_equal(d, d.T)
            assert np.all(np.diag(d) == 0)
            off = d + np.eye(n)  # diagonal exclusion for positivity
            assert np.all(off > 0)
            # triangle inequality over all (i, j, k)
            assert np.all(d[:, None, :] <= d[:, :, None] + d[None, :, :] + 1e-12)

        # ultrametric strengthening for the 2-adic norm
        two_sided = np.maximum(norm[:, :, None], norm[None, :, :])
        assert np.all(norm[:, None, :] <= two_sided + 1e-12)

        # treelike translation invariance
        rolled = np.roll(np.roll(tree, 1, axis=0), 1, axis=1)
        assert np.array_equal(tree, rolled)
    elapsed = time.time() - start
    _report("geometry-properties", elapsed < 10,
            f"exhaustive over N in (4..64): Monna involution, metric axioms, "
            f"ultrametric inequality, translation invariance; {elapsed:.1f}s (< 10s)")


# ---------------------------------------------------------------------------
# 3. Gate statistics at (N, s) = (64, -1), (64, 0), (64, +1) over 1e4 blocks
#    of each parity: pooled per-distance firing rates within 3 sigma, no
#    single position beyond 4.5 sigma, per-site incident rate within 1%.
# ---------------------------------------------------------------------------

def test_acceptance_gate_statistics():
    n, steps = 64, 10_000
    details = []
    for s in (-1.0, 0.0, 1.0):
        rng = trajectory_rng(4242, 0)
        tab = sc.Tableau(n)
        log = []
        total = 0
        for _ in range(steps):
            total += sc.apply_block(tab, "even", s, n, rng, fired_log=log)
            total += sc.apply_block(tab, "odd", s, n, rng, fired_log=log)
        counts = {}
        for m, i, j in log:
            counts[(m, i, j)] = counts.get((m, i, j), 0) + 1

        worst_pos = 0.0
        for parity in ("even", "odd"):
            for m in block_distance_scales(n, parity):
                pairs = sc.candidate_pairs(n, m, parity)
                p = sc.gate_probability(1 << (m - 1), s, n)
                per_pos = [counts.get((m, i, j), 0) for i, j in pairs]
                pooled_rate = sum(per_pos) / (steps * len(pairs))
                sigma_pool = math.sqrt(p * (1 - p) / (steps * len(pairs)))
                assert abs(pooled_rate - p) < 3 * sigma_pool, (
                    s, parity, m, pooled_rate, p)
                sigma_pos = math.sqrt(p * (1 - p) / steps)
                for c in per_pos:
                    worst_pos = max(worst_pos, abs(c / steps - p) / sigma_pos)
        assert worst_pos < 4.5, f"position outlier {worst_pos:.2f} sigma at s={s}"

        rate = 2.0 * total / (n * steps)
        predicted = sc.expected_gates_per_site_per_step(n, s)
        assert predicted == pytest.approx(2.0)
        assert abs(rate - predicted) / predicted < 0.01, (s, rate)
        details.append(f"s={s:+.0f}: rate={rate:.4f}")
    _report("gate-statistics",
            True, "pooled rates within 3 sigma, positions within 4.5 sigma, "
            "per-site rate within 1% of 2.0 (" + "; ".join(details) + ")")


# ---------------------------------------------------------------------------
# 4. Scrambling limit at s = 0, t = 50, 1e3 trajectories, N in {16, 32, 64}.
# ---------------------------------------------------------------------------

def _deep_scramble_results(n):
    spec = _spec("tripartite", n, 0.0, seed=505, trajectories=1000, t_max=50)
    tmi = run_tripartite(spec, workers=2)
    scan_spec = _spec("entropy-scan", n, 0.0, seed=606, trajectories=1000, t_max=50)
    scan = run_entropy_scan(scan_spec, workers=2)
    return tmi, scan


_DEEP_CACHE = {}


def _deep(n):
    if n not in _DEEP_CACHE:
        _DEEP_CACHE[n] = _deep_scramble_results(n)
    return _DEEP_CACHE[n]


def _mean_half_cut_deficiency_bits():
    """<eps> at a square random GF(2) matrix, from the closed-form tail."""
    return sum(eps * sc.rank_deficiency_probability(64, 32, eps)
               for eps in range(12))


def test_acceptance_scrambling_limit_tmi_asymptote():
    """Criterion as stated: ensemble TMI within 5% of -(N/2) ln 2.

    This is known to be unattainable: the stationary ensemble carries an
    O(1) offset of ~3 half-cut rank deficiencies (~2.55 bits), which the
    asymptotic target ignores and which exceeds 5% of (N/2) ln 2 for every
    listed size.  The companion test below pins the simulator against the
    finite-size prediction built from this package's own
    rank_deficiency_probability.  Analysis: notes/decisions.md.
    """
    deviations = []
    ok = True
    for n in (16, 32, 64):
        tmi, _ = _deep(n)
        value = tmi.tmi_series("linear").mean[-1]
        target = -(n / 2) * LN2
        rel = abs(value - target) / abs(target)
        deviations.append(f"N={n}: TMI={value / LN2:.2f} bits vs {target / LN2:.0f} "
                          f"({100 * rel:.1f}%)")
        ok = ok and rel <= 0.05
    _report("scrambling-limit-tmi[asymptotic-target]", ok, "; ".join(deviations))


def test_acceptance_scrambling_limit_tmi_finite_size():
    """Same data against -(N/2 - 3<eps>) ln 2 with <eps> from the package's
    rank-deficiency distribution; this is the attainable form of the claim."""
    offset = 3 * _mean_half_cut_deficiency_bits()
    details = []
    for n in (16, 32, 64):
        tmi, _ = _deep(n)
        series = tmi.tmi_series("linear")
        value, sem = series.mean[-1], series.sem[-1]
        target = -(n / 2 - offset) * LN2
        z = abs(value - target) / sem
        details.append(f"N={n}: {value / LN2:.2f} vs {target / LN2:.2f} bits ({z:.1f} sigma)")
        assert z < 3.0, details[-1]
    _report("scrambling-limit-tmi[finite-size-target]", True, "; ".join(details))


def _deficiency_std_bits(n, size):
    """Ensemble std of the entropy deficiency from the closed-form tail.

    At sizes where a deficiency is too rare to appear in the ensemble the
    sample std collapses to zero, so the theoretical value is the honest
    sigma estimate.
    """
    a = min(size, n - size)
    probs = [sc.rank_deficiency_probability(n, a, eps) for eps in range(12)]
    mean = sum(eps * p for eps, p in enumerate(probs))
    var = sum(eps * eps * p for eps, p in enumerate(probs)) - mean ** 2
    return math.sqrt(max(var, 0.0))


def test_acceptance_scrambling_limit_entropy_scan():
    """Scan means within 2 ensemble standard deviations of the closed form."""
    details = []
    for n in (16, 32, 64):
        _, scan = _deep(n)
        worst = 0.0
        for size in range(1, n):
            series = scan.entropy_series("linear", size)
            mean, sem = series.mean[-1], series.sem[-1]
            std = max(sem * math.sqrt(scan.n_traj),
                      _deficiency_std_bits(n, size) * LN2)
            expected = sc.expected_scrambled_entropy(n, size)
            tol = 2 * std
            assert abs(mean - expected) <= tol, (n, size, mean / LN2, expected / LN2)
            worst = max(worst, abs(mean - expected) / tol)
        details.append(f"N={n}: worst |dev|/2sigma = {worst:.2f}")
    _report("scrambling-limit-entropy-scan", True, "; ".join(details))


# ---------------------------------------------------------------------------
# 5. Area-law / volume-law dichotomy at N = 64, t = 6, 1e2 trajectories.
# ---------------------------------------------------------------------------

def _scattered_worker(payload):
    n, s, seed, idx, t_max, sizes, n_sets = payload
    rng = trajectory_rng(seed, idx)
    cfg = sc.CircuitConfig(n_sites=n, s=s, seed=seed, t_max=t_max)
    tab = sc.Tableau(n)
    for _ in range(t_max):
        sc.step(tab, cfg, rng)
    set_rng = np.random.default_rng(777)
    out = np.zeros(len(sizes))
    for si, size in enumerate(sizes):
        vals = [tab.renyi_entropy_bits(set_rng.choice(n, size=size, replace=False).tolist())
                for _ in range(n_sets)]
        out[si] = np.mean(vals) * LN2
    return out


def test_acceptance_area_volume_dichotomy():
    n, t_max, traj = 64, 6, 100
    window = np.arange(16, 49)
    scattered_sizes = (2, 4, 8, 12, 16, 20, 24, 28, 32)
    details = []
    for s, kind in ((-2.0, "linear"), (2.0, "treelike")):
        res = run_entropy_scan(_spec("entropy-scan", n, s, 909, traj, t_max,
                                     geometry=kind), workers=2)
        scan = res.mean[kind][t_max]
        plateau = scan[window - 1]
        slope = np.polyfit(window, plateau, 1)[0]

        payloads = [(n, s, 909, k, t_max, scattered_sizes, 4) for k in range(traj)]
        rows = np.stack(_parallel_map(_scattered_worker, payloads, 2))
        scattered = rows.mean(axis=0)
        scattered_slope = np.polyfit(scattered_sizes, scattered, 1)[0]

        # area law: no extensive growth across |A| in [16, 48], and the
        # plateau sits far below the scattered (volume-law) level
        assert abs(slope) <= 0.1 * LN2, (s, kind, slope / LN2)
        assert plateau.max() <= 0.5 * scattered[-1], (s, kind)
        # volume law for scattered regions of the same sizes
        assert scattered_slope >= 0.5 * LN2, (s, kind, scattered_slope / LN2)
        details.append(f"s={s:+.0f} {kind}: plateau slope {slope / LN2:+.3f} ln2/site, "
                       f"scattered slope {scattered_slope / LN2:.2f} ln2/site")
    _report("area-volume-dichotomy", True, "; ".join(details))


# ---------------------------------------------------------------------------
# 6. Threshold-time scaling of t0 (one bit of TMI negativity).
# ---------------------------------------------------------------------------

def _t0_of(n, s, geometry, trajectories, t_max, seed):
    spec = _spec("tripartite", n, s, seed, trajectories, t_max, geometry=geometry)
    res = run_tripartite(spec, workers=2)
    value = sc.first_threshold_time(res.tmi_series(geometry), -LN2)
    assert value is not None, f"no t0 crossing at N={n}, s={s}"
    return value


def test_acceptance_t0_scaling_linear():
    sizes = (32, 64, 128, 256)
    t_maxes = (12, 16, 28, 48)
    values = [_t0_of(n, -1.5, "linear", 1000, tm, 1111)
              for n, tm in zip(sizes, t_maxes)]
    fit = sc.fit_scaling(sizes, values, "power-law")
    exponent = fit.params[0]
    _report("t0-scaling[linear s=-1.5]", 0.8 <= exponent <= 1.2,
            f"t0={[f'{v:.2f}' for v in values]} exponent={exponent:.3f} in [0.8, 1.2]")


def test_acceptance_t0_scaling_treelike():
    # the asymptotic power law resolves from N = 64 up (the N = 32 point
    # still carries a strong transient); exponent target is s + 0.1 = 1.6
    sizes = (64, 128, 256)
    t_maxes = (26, 60, 170)
    values = [_t0_of(n, 1.5, "treelike", 1000, tm, 2222)
              for n, tm in zip(sizes, t_maxes)]
    fit = sc.fit_scaling(sizes, values, "power-law")
    exponent = fit.params[0]
    _report("t0-scaling[treelike s=+1.5]", 1.3 <= exponent <= 1.9,
            f"t0={[f'{v:.2f}' for v in values]} exponent={exponent:.3f} in [1.3, 1.9]")


def test_acceptance_t0_fast_scrambling_limit():
    sizes = (64, 128, 256, 512)
    t0_max = []
    for n in sizes:
        spec = _spec("tripartite", n, 0.0, 3333, 1000, 6, geometry="both")
        res = run_tripartite(spec, workers=2)
        t0_max.append(max(
            sc.first_threshold_time(res.tmi_series("linear"), -LN2),
            sc.first_threshold_time(res.tmi_series("treelike"), -LN2)))
    ok = all(v <= 2.0 for v in t0_max)
    ok = ok and all(b <= a + 0.02 for a, b in zip(t0_max, t0_max[1:]))
    ok = ok and t0_max[-1] < t0_max[0]
    _report("t0-scaling[s=0 fast scrambling]", ok,
            f"t0_max={[f'{v:.3f}' for v in t0_max]} all <= 2, decreasing toward 1")


# ---------------------------------------------------------------------------
# 7. Golden-ratio recursion of quarter TMI at t = 1, s = 0.
# ---------------------------------------------------------------------------

def test_acceptance_golden_ratio_recursion():
    sizes = (64, 128, 256, 512, 1024)
    traj = 16_000
    means, sems = {}, {}
    for n in sizes:
        spec = _spec("tripartite", n, 0.0, 20, traj, 1)
        res = run_tripartite(spec, workers=2, keep_trajectories=True)
        stack = res.metadata["trajectories_raw"]["linear"][:, 1]
        means[n] = stack.mean()
        sems[n] = stack.std(ddof=1) / math.sqrt(traj)
    ratios, errs = [], []
    for n in sizes[1:]:
        r = means[n] / means[n // 2]
        ratios.append(r)
        errs.append(abs(r) * math.hypot(sems[n] / means[n], sems[n // 2] / means[n // 2]))
    # monotone approach toward phi, with a 2-sigma allowance per step and a
    # significant overall rise
    ok = all(b >= a - 2 * math.hypot(ea, eb)
             for (a, ea), (b, eb) in zip(zip(ratios, errs), zip(ratios[1:], errs[1:])))
    ok = ok and ratios[-1] - ratios[0] > 2 * math.hypot(errs[0], errs[-1])
    ok = ok and all(r < PHI for r in ratios)
    final_gap = abs(ratios[-1] - PHI)
    ok = ok and final_gap < 0.15
    _report("golden-ratio-recursion", ok,
            f"ratios={[f'{r:.3f}' for r in ratios]} rising toward phi, "
            f"|ratio(1024) - phi| = {final_gap:.3f} < 0.15")


# ---------------------------------------------------------------------------
# 8. Teleportation lightcones at N = 128, 2e3 trajectories.
# ---------------------------------------------------------------------------

def test_acceptance_lightcone_linear_velocity():
    n, t_max, traj = 128, 4, 2000
    window = tuple(d % n for d in range(-10, 10))
    task = TeleportTask(
        config=sc.CircuitConfig(n_sites=n, s=-1.0, seed=41, trajectories=traj,
                                t_max=t_max),
        input_site=0, output_sites=window, measure_times=tuple(range(t_max + 1)))
    lc = run_lightcone(task, workers=2)
    boundary = lc.support_boundary(0.1 * LN2)
    slope = float(np.polyfit(lc.times, boundary, 1)[0])
    _report("lightcone[linear s=-1 velocity]", 2.0 <= slope <= 4.0,
            f"support boundary {boundary.tolist()} over t<= {t_max}, "
            f"slope {slope:.2f} in 3.0 +- 1.0")


def test_acceptance_lightcone_treelike_monotone():
    n, t_max, traj = 128, 4, 2000
    outputs = (0, 64, 32, 96, 16, 48, 80, 112, 8, 24, 40, 4, 12, 2, 6, 1, 3, 5)
    task = TeleportTask(
        config=sc.CircuitConfig(n_sites=n, s=1.0, seed=43, trajectories=traj,
                                t_max=t_max),
        input_site=0, output_sites=outputs, measure_times=tuple(range(t_max + 1)))
    lc = run_lightcone(task, workers=2)
    dists = np.asarray(lc.two_adic_distances())
    classes = sorted(set(dists))
    threshold = 0.1 * LN2
    for ti in range(len(lc.times)):
        class_means = [lc.mean[ti][dists == d].mean() for d in classes]
        supported = [m > threshold for m in class_means]
        # support must be a downward-closed set of 2-adic distance classes
        first_off = next((k for k, s_ in enumerate(supported) if not s_),
                         len(supported))
        assert not any(supported[first_off:]), (ti, class_means)
    _report("lightcone[treelike s=+1 support]", True,
            f"support is a 2-adic ball at every t <= {t_max} "
            f"({len(classes)} distance classes)")


# ---------------------------------------------------------------------------
# 9. Teleportation transition: finite t_c at s = 0 with a tight bootstrap
#    CI; no crossings in the local regimes s = +-1.5 up to t = 10.
# ---------------------------------------------------------------------------

def test_acceptance_teleport_transition_s0():
    analysis = critical_time_analysis(
        0.0, (32, 64, 128), "linear", trajectories=30_000, t_max=6, seed=17,
        workers=2)
    ok = analysis is not None
    detail = "no crossing found"
    if ok:
        width = analysis.ci_width
        ok = math.isfinite(analysis.t_c) and width < 1.0
        detail = (f"t_c={analysis.t_c:.2f}, 95% CI "
                  f"[{analysis.ci_low:.2f}, {analysis.ci_high:.2f}] "
                  f"width={width:.2f} < 1; pairs={analysis.pair_crossings}")
    _report("teleport-transition[s=0]", ok, detail)


def test_acceptance_teleport_transition_local_regimes():
    details = []
    ok = True
    for s, geometry in ((-1.5, "linear"), (1.5, "treelike")):
        t_c = sc.critical_time(s, (32, 64, 128), geometry, trajectories=15_000,
                               t_max=10, seed=17, workers=2)
        ok = ok and t_c is None
        details.append(f"s={s:+.1f} {geometry}: t_c={t_c}")
    _report("teleport-transition[|s|=1.5 no crossing]", ok, "; ".join(details))
