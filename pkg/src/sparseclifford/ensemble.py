"""Trajectory-ensemble runner with deterministic seeding and CSV/JSON output.

Every trajectory draws its own random stream from (master seed, trajectory
index), so results depend only on the experiment parameters and the seed,
never on worker count or scheduling.  Aggregation reduces in fixed
trajectory order.
"""

import json
import math
import os
import subprocess
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import circuit, diagnostics, teleport
from .circuit import CircuitConfig, expected_gates_per_site_per_step
from .diagnostics import (LN2, ObservableSeries, expected_scrambled_entropy,
                          first_threshold_time, fit_scaling)
from .geometry import make_region
from .tableau import Tableau

EXPERIMENT_KINDS = ("entropy-scan", "tripartite", "teleport-lightcone",
                    "teleport-critical", "scaling-study")

CSV_HEADERS = {
    "entropy-scan": ["t", "size", "geometry", "s", "N",
                     "entropy_mean_nats", "entropy_sem", "n_traj"],
    "tripartite": ["t", "s", "N", "geometry", "tmi_mean_nats", "tmi_sem", "n_traj"],
    "teleport": ["t", "j", "linear_distance", "two_adic_distance", "s", "N",
                 "fidelity_mean_nats", "fidelity_sem", "n_traj"],
    "scaling": ["N", "s", "observable", "value", "value_err", "model",
                "fit_param_1", "fit_param_2", "residual"],
}


@dataclass
class ExperimentSpec:
    """A complete, runnable experiment description."""

    kind: str
    config: CircuitConfig
    geometry: str = "linear"
    out_path: str = ""
    input_site: int = 0
    output_sites: tuple = ()
    sizes: tuple = ()
    observable: str = "t0"
    model: str = "power-law"

    def __post_init__(self):
        if self.kind not in EXPERIMENT_KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        if self.geometry not in ("linear", "treelike", "both"):
            raise ValueError("geometry must be linear, treelike or both")
        if self.kind in ("teleport-critical", "scaling-study"):
            if len(self.sizes) < (2 if self.kind == "teleport-critical" else 3):
                raise ValueError(f"{self.kind} needs a list of system sizes")
            if self.geometry == "both":
                raise ValueError(f"{self.kind} needs a single geometry")
        if self.kind == "scaling-study" and self.observable not in ("t0", "t_vol", "v_s"):
            raise ValueError("observable must be one of t0, t_vol, v_s")

    def geometries(self):
        if self.geometry == "both":
            return ("linear", "treelike")
        return (self.geometry,)


# -- seeding and parallel plumbing ---------------------------------------

def trajectory_rng(seed, index):
    """Independent, order-insensitive stream for one trajectory."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def _warm_kernels():
    tab = Tableau(4)
    tab.apply_hadamard(0)
    tab.apply_cnot(0, 1)
    tab.measure_many([0])
    tab.renyi_entropy_bits([0, 1])
    diagnostics.entropy_scan(tab, "linear")


def resolve_workers(workers):
    if workers is None:
        workers = os.cpu_count() or 1
    return max(1, int(workers))


def _parallel_map(fn, payloads, workers):
    workers = resolve_workers(workers)
    if workers == 1 or len(payloads) <= 1:
        return [fn(p) for p in payloads]
    _warm_kernels()
    chunk = max(1, len(payloads) // (workers * 8))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, payloads, chunksize=chunk))


def _mean_sem(stack):
    stack = np.asarray(stack, dtype=float)
    mean = stack.mean(axis=0)
    if stack.shape[0] > 1:
        sem = stack.std(axis=0, ddof=1) / math.sqrt(stack.shape[0])
    else:
        sem = np.zeros_like(mean)
    return mean, sem


# -- per-trajectory workers (top level so they pickle) --------------------

def _quarter_regions(n, kind):
    q = n // 4
    return (make_region(kind, 0, q, n), make_region(kind, q, q, n),
            make_region(kind, 2 * q, q, n))


def _traj_entropy_scan(payload):
    n, s, seed, idx, t_max, kinds, anchor = payload
    rng = trajectory_rng(seed, idx)
    cfg = CircuitConfig(n_sites=n, s=s, seed=seed, t_max=t_max)
    tab = Tableau(n)
    scans = {k: np.zeros((t_max + 1, n - 1)) for k in kinds}
    gates = 0
    for t in range(t_max + 1):
        for k in kinds:
            scans[k][t] = [e for _, e in diagnostics.entropy_scan(tab, k, anchor=anchor)]
        if t < t_max:
            gates += circuit.step(tab, cfg, rng)
    return gates, scans


def _traj_tripartite(payload):
    n, s, seed, idx, t_max, kinds = payload
    rng = trajectory_rng(seed, idx)
    cfg = CircuitConfig(n_sites=n, s=s, seed=seed, t_max=t_max)
    tab = Tableau(n)
    regions = {k: _quarter_regions(n, k) for k in kinds}
    tmi = {k: np.zeros(t_max + 1) for k in kinds}
    gates = 0
    for t in range(t_max + 1):
        for k in kinds:
            tmi[k][t] = diagnostics.tripartite_mutual_information(tab, *regions[k])
        if t < t_max:
            gates += circuit.step(tab, cfg, rng)
    return gates, tmi


def _traj_lightcone(payload):
    n, s, seed, idx, input_site, outputs, measure_times = payload
    rng = trajectory_rng(seed, idx)
    grid = teleport.run_lightcone_trajectory(
        n, s, input_site, outputs, measure_times, rng)
    return 0, grid


def _traj_critical(payload):
    n, s, seed, idx, geometry, t_max = payload
    rng = trajectory_rng(seed, idx)
    outputs = teleport.critical_targets(0, n, geometry)
    grid = teleport.run_lightcone_trajectory(
        n, s, 0, outputs, tuple(range(t_max + 1)), rng)
    series = np.array([
        teleport.target_fidelity_value(row, outputs, 0, n, geometry)
        for row in grid])
    return 0, series


# -- experiment drivers ----------------------------------------------------

@dataclass
class EnsembleResult:
    """Aggregated ensemble output plus run metadata and CSV-ready tables."""

    kind: str
    config: CircuitConfig
    geometries: tuple
    n_traj: int
    metadata: dict
    mean: dict = field(default_factory=dict)
    sem: dict = field(default_factory=dict)
    lightcone: object = None
    rows: list = field(default_factory=list)
    header: list = field(default_factory=list)

    def tmi_series(self, geometry):
        mean = self.mean[geometry]
        return ObservableSeries(
            name=f"tmi[{geometry}]", times=np.arange(len(mean), dtype=float),
            mean=mean, sem=self.sem[geometry], n_traj=self.n_traj)

    def entropy_series(self, geometry, size):
        mean = self.mean[geometry][:, size - 1]
        sem = self.sem[geometry][:, size - 1]
        return ObservableSeries(
            name=f"entropy[{geometry}][{size}]",
            times=np.arange(mean.shape[0], dtype=float),
            mean=mean, sem=sem, n_traj=self.n_traj)


def _base_metadata(spec, gates_per_traj):
    cfg = spec.config
    meta = {
        "kind": spec.kind,
        "N": cfg.n_sites,
        "s": cfg.s,
        "seed": cfg.seed,
        "trajectories": cfg.trajectories,
        "t_max": cfg.t_max,
        "geometry": spec.geometry,
        "units": "nats",
        "git_revision": _git_revision(),
    }
    if gates_per_traj and cfg.t_max > 0:
        measured = 2.0 * float(np.mean(gates_per_traj)) / (cfg.n_sites * cfg.t_max)
        meta["measured_gates_per_site_per_step"] = measured
        meta["predicted_gates_per_site_per_step"] = expected_gates_per_site_per_step(
            cfg.n_sites, cfg.s)
    return meta


def _git_revision():
    try:
        out = subprocess.run(
            ["git", "rev-parse", "HEAD"], capture_output=True, text=True,
            timeout=5, check=False)
        rev = out.stdout.strip()
        return rev if out.returncode == 0 and rev else "unknown"
    except OSError:
        return "unknown"


def run_entropy_scan(spec, workers=None):
    cfg = spec.config
    kinds = spec.geometries()
    payloads = [(cfg.n_sites, cfg.s, cfg.seed, k, cfg.t_max, kinds, spec.input_site)
                for k in range(cfg.trajectories)]
    results = _parallel_map(_traj_entropy_scan, payloads, workers)
    gates = [g for g, _ in results]
    res = EnsembleResult(
        kind=spec.kind, config=cfg, geometries=kinds, n_traj=cfg.trajectories,
        metadata=_base_metadata(spec, gates), header=CSV_HEADERS["entropy-scan"])
    for kind in kinds:
        stack = np.stack([r[kind] for _, r in results])
        res.mean[kind], res.sem[kind] = _mean_sem(stack)
        for t in range(cfg.t_max + 1):
            for size in range(1, cfg.n_sites):
                res.rows.append([t, size, kind, cfg.s, cfg.n_sites,
                                 float(res.mean[kind][t, size - 1]),
                                 float(res.sem[kind][t, size - 1]),
                                 cfg.trajectories])
    return res


def run_tripartite(spec, workers=None, keep_trajectories=False):
    cfg = spec.config
    kinds = spec.geometries()
    payloads = [(cfg.n_sites, cfg.s, cfg.seed, k, cfg.t_max, kinds)
                for k in range(cfg.trajectories)]
    results = _parallel_map(_traj_tripartite, payloads, workers)
    gates = [g for g, _ in results]
    res = EnsembleResult(
        kind=spec.kind, config=cfg, geometries=kinds, n_traj=cfg.trajectories,
        metadata=_base_metadata(spec, gates), header=CSV_HEADERS["tripartite"])
    res.metadata["per_trajectory_t0_median"] = {}
    for kind in kinds:
        stack = np.stack([r[kind] for _, r in results])
        res.mean[kind], res.sem[kind] = _mean_sem(stack)
        if keep_trajectories:
            res.metadata.setdefault("trajectories_raw", {})[kind] = stack
        res.metadata["per_trajectory_t0_median"][kind] = _per_traj_threshold_median(
            stack, -LN2)
        for t in range(cfg.t_max + 1):
            res.rows.append([t, cfg.s, cfg.n_sites, kind,
                             float(res.mean[kind][t]), float(res.sem[kind][t]),
                             cfg.trajectories])
    return res


def _per_traj_threshold_median(stack, threshold):
    """Median over trajectories of each trajectory's own crossing time."""
    times = np.arange(stack.shape[1], dtype=float)
    crossings = []
    for row in stack:
        series = ObservableSeries(name="traj", times=times, mean=row,
                                  sem=np.zeros_like(row), n_traj=1)
        t = first_threshold_time(series, threshold)
        if t is not None:
            crossings.append(t)
    return float(np.median(crossings)) if crossings else None


def run_lightcone(task, workers=None):
    cfg = task.config
    payloads = [(cfg.n_sites, cfg.s, cfg.seed, k, task.input_site,
                 task.output_sites, task.measure_times)
                for k in range(cfg.trajectories)]
    results = _parallel_map(_traj_lightcone, payloads, workers)
    stack = np.stack([grid for _, grid in results])
    mean, sem = _mean_sem(stack)
    return teleport.LightconeMap(
        times=np.asarray(task.measure_times, dtype=float),
        outputs=task.output_sites, mean=mean, sem=sem,
        input_site=task.input_site, n_sites=cfg.n_sites, n_traj=cfg.trajectories)


def run_teleport(spec, workers=None):
    cfg = spec.config
    outputs = spec.output_sites or _default_window(spec.input_site, cfg.n_sites)
    task = teleport.TeleportTask(
        config=cfg, input_site=spec.input_site, output_sites=outputs,
        measure_times=tuple(range(cfg.t_max + 1)))
    lc = run_lightcone(task, workers=workers)
    res = EnsembleResult(
        kind=spec.kind, config=cfg, geometries=(spec.geometry,),
        n_traj=cfg.trajectories, metadata=_base_metadata(spec, []),
        lightcone=lc, header=CSV_HEADERS["teleport"])
    lin = lc.linear_distances()
    two = lc.two_adic_distances()
    for ti, t in enumerate(task.measure_times):
        for ji, j in enumerate(task.output_sites):
            res.rows.append([int(t), int(j), lin[ji], two[ji], cfg.s, cfg.n_sites,
                             float(lc.mean[ti, ji]), float(lc.sem[ti, ji]),
                             cfg.trajectories])
    return res


def _default_window(input_site, n_sites, half_width=10):
    return tuple((input_site + d) % n_sites for d in range(-half_width, half_width))


def run_critical_target(n, s, geometry, trajectories, t_max, seed, workers=None):
    """Per-trajectory fidelity series at the maximally separated target."""
    payloads = [(n, s, seed, k, geometry, t_max) for k in range(trajectories)]
    results = _parallel_map(_traj_critical, payloads, workers)
    stack = np.stack([series for _, series in results])
    mean, sem = _mean_sem(stack)
    series = ObservableSeries(
        name=f"fidelity[{geometry}][N={n}]",
        times=np.arange(t_max + 1, dtype=float), mean=mean, sem=sem,
        n_traj=trajectories)
    return stack, series


def run_teleport_critical(spec, workers=None):
    cfg = spec.config
    analysis = teleport.critical_time_analysis(
        cfg.s, spec.sizes, spec.geometry, trajectories=cfg.trajectories,
        t_max=cfg.t_max, seed=cfg.seed, workers=workers)
    res = EnsembleResult(
        kind=spec.kind, config=cfg, geometries=(spec.geometry,),
        n_traj=cfg.trajectories, metadata=_base_metadata(spec, []),
        header=CSV_HEADERS["scaling"])
    res.metadata["sizes"] = list(spec.sizes)
    if analysis is None:
        res.metadata["t_c"] = None
        return res
    res.metadata["t_c"] = analysis.t_c
    res.metadata["t_c_ci"] = [analysis.ci_low, analysis.ci_high]
    for (small, large), t in sorted(analysis.pair_crossings.items()):
        res.rows.append([large, cfg.s, "t_c_pair", float(t), 0.0,
                         "crossing", float(small), float(large), 0.0])
    res.rows.append([max(spec.sizes), cfg.s, "t_c", analysis.t_c,
                     0.5 * analysis.ci_width, "crossing-median",
                     analysis.ci_low, analysis.ci_high, 0.0])
    return res


def run_scaling_study(spec, workers=None, bootstrap=200):
    cfg = spec.config
    geometry = spec.geometry
    values, errors = [], []
    for n in spec.sizes:
        value, err = _scaling_observable(
            n, cfg.s, geometry, spec.observable, cfg.trajectories, cfg.t_max,
            cfg.seed, workers, bootstrap)
        values.append(value)
        errors.append(err)
    fit = fit_scaling(spec.sizes, values, spec.model)
    res = EnsembleResult(
        kind=spec.kind, config=cfg, geometries=(geometry,),
        n_traj=cfg.trajectories, metadata=_base_metadata(spec, []),
        header=CSV_HEADERS["scaling"])
    res.metadata["fit"] = {"model": fit.model, "params": list(fit.params),
                           "residual": fit.residual}
    res.metadata["sizes"] = list(spec.sizes)
    for n, value, err in zip(spec.sizes, values, errors):
        res.rows.append([int(n), cfg.s, spec.observable, float(value), float(err),
                         fit.model, fit.params[0], fit.params[1], fit.residual])
    return res


def _scaling_observable(n, s, geometry, observable, trajectories, t_max, seed,
                        workers, bootstrap):
    if observable == "t0":
        sub = ExperimentSpec(
            kind="tripartite", geometry=geometry,
            config=CircuitConfig(n_sites=n, s=s, seed=seed,
                                 trajectories=trajectories, t_max=t_max))
        res = run_tripartite(sub, workers=workers, keep_trajectories=True)
        stack = res.metadata["trajectories_raw"][geometry]
        series = res.tmi_series(geometry)
        value = first_threshold_time(series, -LN2)
        if value is None:
            raise ValueError(f"TMI never reached one bit of negativity at N={n}; "
                             "increase t_max")
        return value, _bootstrap_threshold(stack, -LN2, bootstrap, seed)
    if observable == "t_vol":
        sub = ExperimentSpec(
            kind="entropy-scan", geometry=geometry,
            config=CircuitConfig(n_sites=n, s=s, seed=seed,
                                 trajectories=trajectories, t_max=t_max))
        res = run_entropy_scan(sub, workers=workers)
        series = res.entropy_series(geometry, n // 2)
        threshold = 0.95 * expected_scrambled_entropy(n, n // 2)
        value = first_threshold_time(series, threshold)
        if value is None:
            raise ValueError(f"half-system entropy never reached the volume-law "
                             f"threshold at N={n}; increase t_max")
        return value, 0.0
    # v_s: linear growth rate of the fidelity support boundary
    window = _default_window(0, n, half_width=min(16, n // 4))
    task = teleport.TeleportTask(
        config=CircuitConfig(n_sites=n, s=s, seed=seed,
                             trajectories=trajectories, t_max=t_max),
        input_site=0, output_sites=window,
        measure_times=tuple(range(t_max + 1)))
    lc = run_lightcone(task, workers=workers)
    boundary = lc.support_boundary(0.1 * LN2)
    keep = boundary < max(lc.linear_distances())
    times = lc.times[keep]
    if keep.sum() < 2:
        raise ValueError("support boundary saturated immediately; reduce t_max")
    slope = float(np.polyfit(times, boundary[keep], 1)[0])
    return slope, 0.0


def _bootstrap_threshold(stack, threshold, n_boot, seed):
    if not n_boot:
        return 0.0
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(0xB005,)))
    times = np.arange(stack.shape[1], dtype=float)
    out = []
    for _ in range(n_boot):
        pick = rng.integers(stack.shape[0], size=stack.shape[0])
        mean = stack[pick].mean(axis=0)
        series = ObservableSeries(name="boot", times=times, mean=mean,
                                  sem=np.zeros_like(mean), n_traj=stack.shape[0])
        t = first_threshold_time(series, threshold)
        if t is not None:
            out.append(t)
    return float(np.std(out)) if len(out) > 1 else 0.0


_RUNNERS = {
    "entropy-scan": run_entropy_scan,
    "tripartite": run_tripartite,
    "teleport-lightcone": run_teleport,
    "teleport-critical": run_teleport_critical,
    "scaling-study": run_scaling_study,
}


def run_ensemble(spec, workers=None):
    """Run the experiment described by ``spec`` and aggregate statistics."""
    return _RUNNERS[spec.kind](spec, workers=workers)


# -- serialization ---------------------------------------------------------

def _format_cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path, header, rows):
    """Write rows atomically; a failed write leaves no partial file behind."""
    lines = [",".join(header)]
    lines.extend(",".join(_format_cell(v) for v in row) for row in rows)
    _write_text_atomic(path, "\n".join(lines) + "\n")


def write_json(path, header, rows, metadata):
    payload = {
        "metadata": _json_safe(metadata),
        "columns": list(header),
        "rows": [[_json_safe(v) for v in row] for row in rows],
    }
    _write_text_atomic(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _json_safe(value):
    if isinstance(value, dict):
        return {str(k): _json_safe(v) for k, v in value.items()
                if k != "trajectories_raw"}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    return value


def _write_text_atomic(path, text):
    tmp = f"{path}.tmp"
    try:
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def write_result(res, path, fmt="csv"):
    if fmt == "csv":
        write_csv(path, res.header, res.rows)
    elif fmt == "json":
        write_json(path, res.header, res.rows, res.metadata)
    else:
        raise ValueError(f"unknown format {fmt!r}")
