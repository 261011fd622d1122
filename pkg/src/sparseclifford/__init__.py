"""Sparse nonlocal Clifford circuits with tunable linear/treelike geometry."""

from .circuit import (CircuitConfig, apply_block, candidate_pairs,
                      expected_gates_per_site_per_step, gate_probability,
                      normalization, step)
from .diagnostics import (FitResult, ObservableSeries, curve_crossing,
                          entropy_scan, expected_scrambled_entropy,
                          first_threshold_time, fit_scaling,
                          mutual_information, rank_deficiency_probability,
                          tripartite_mutual_information)
from .ensemble import ExperimentSpec, run_ensemble
from .geometry import (GeometryKind, Region, is_contiguous, linear_distance,
                       make_region, monna, tree_distance, two_adic_norm,
                       two_adic_valuation)
from .gf2 import rank_gf2
from .tableau import (MeasurementKind, Tableau, TwoQubitSymplectic,
                      cnot_symplectic, new_product_state,
                      sample_two_qubit_clifford, two_qubit_symplectic_group)
from .teleport import (TeleportTask, conditional_mutual_information,
                       critical_time, critical_time_analysis, lightcone_map,
                       prepare_with_reference)

__version__ = "0.1.0"
