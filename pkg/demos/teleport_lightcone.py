#!/usr/bin/env python3
"""Mapping the many-body lightcone with the teleportation probe.

A reference qubit is Bell-paired with site 0; after t timesteps all other
qubits are measured in the Z basis and the remaining mutual information
I(0;j|m) tells whether the input can be teleported to j.  At s = -1 the
support spreads ballistically in linear distance; at s = +1 it fills 2-adic
balls instead, which the Monna reordering turns back into a cone.  Writes
teleport CSVs for the figure tool (figures lightcone --reorder monna ...).
"""

import math

import sparseclifford as sc
from sparseclifford.ensemble import write_result
from sparseclifford.teleport import TeleportTask

LN2 = math.log(2)
N, T, TRAJ = 128, 4, 300

for s in (-1.0, 1.0):
    outputs = tuple(d % N for d in range(-10, 10)) if s < 0 else (
        0, 64, 32, 96, 16, 48, 8, 24, 4, 12, 2, 6, 1, 3)
    spec = sc.ExperimentSpec(
        kind="teleport-lightcone",
        config=sc.CircuitConfig(n_sites=N, s=s, seed=9, trajectories=TRAJ, t_max=T),
        input_site=0, output_sites=outputs)
    res = sc.run_ensemble(spec)
    out = f"lightcone_s{s:+.0f}.csv"
    write_result(res, out)
    lc = res.lightcone
    print(f"\ns = {s:+.1f} -> {out}")
    if s < 0:
        boundary = lc.support_boundary(0.1 * LN2)
        print(f"  linear support boundary b(t) = {boundary.tolist()}")
    else:
        dists = lc.two_adic_distances()
        for ti in range(T + 1):
            by_class = {}
            for d, v in zip(dists, lc.mean[ti]):
                by_class.setdefault(d, []).append(v / LN2)
            row = {f"{d:.4g}": f"{sum(v) / len(v):.2f}"
                   for d, v in sorted(by_class.items())}
            print(f"  t={ti}: fidelity (bits) by 2-adic distance {row}")
