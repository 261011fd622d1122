#!/usr/bin/env python3
"""Tripartite-mutual-information scrambling times across the exponent range.

For each s the TMI of contiguous quarters stays on a plateau near zero
until the relevant lightcone spans the system, then drops toward the
scrambled value -(N/2 - 3<eps>) ln 2.  The crossing of one bit of negativity
defines t0; near s = 0 it is system-size independent (fast scrambling).
"""

import math

import sparseclifford as sc
from sparseclifford.diagnostics import LN2

N, TRAJ = 128, 60

print(f"N = {N}, {TRAJ} trajectories per point\n")
print(f"{'s':>6} {'geometry':>9} {'t0 (dt)':>8}   TMI(t)/ln2 at t = 0, 2, 4, ...")
for s, geometry, t_max in ((-1.5, "linear", 40), (-0.5, "linear", 12),
                           (0.0, "linear", 8), (0.0, "treelike", 8),
                           (0.5, "treelike", 14), (1.5, "treelike", 60)):
    spec = sc.ExperimentSpec(
        kind="tripartite", geometry=geometry,
        config=sc.CircuitConfig(n_sites=N, s=s, seed=3, trajectories=TRAJ,
                                t_max=t_max))
    res = sc.run_ensemble(spec)
    series = res.tmi_series(geometry)
    t0 = sc.first_threshold_time(series, -LN2)
    trace = " ".join(f"{v / LN2:7.1f}" for v in series.mean[::2][:8])
    print(f"{s:>6.1f} {geometry:>9} {t0:>8.2f}   {trace}")

print("\nt0 grows with |s| in both geometries and collapses to ~1 near s = 0.")
