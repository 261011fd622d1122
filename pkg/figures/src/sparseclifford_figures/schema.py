"""CSV schemas shared with the simulation package, and strict validation.

The figure tool is a pure consumer: every plotted number must come from a
CSV cell, so a mismatched table is rejected up front with a column diff
rather than silently mis-plotted.
"""

import pandas as pd

SCHEMAS = {
    "entropy-scan": ["t", "size", "geometry", "s", "N",
                     "entropy_mean_nats", "entropy_sem", "n_traj"],
    "tripartite": ["t", "s", "N", "geometry", "tmi_mean_nats", "tmi_sem", "n_traj"],
    "teleport": ["t", "j", "linear_distance", "two_adic_distance", "s", "N",
                 "fidelity_mean_nats", "fidelity_sem", "n_traj"],
    "scaling": ["N", "s", "observable", "value", "value_err", "model",
                "fit_param_1", "fit_param_2", "residual"],
}


class SchemaError(ValueError):
    pass


def load_table(path, kind):
    """Read a CSV and insist on the exact column schema for ``kind``."""
    expected = SCHEMAS[kind]
    try:
        frame = pd.read_csv(path)
    except pd.errors.EmptyDataError:
        raise SchemaError(f"{path}: empty CSV, nothing to plot") from None
    got = list(frame.columns)
    if got != expected:
        missing = [c for c in expected if c not in got]
        extra = [c for c in got if c not in expected]
        raise SchemaError(
            f"{path}: columns do not match the {kind} schema\n"
            f"  expected: {expected}\n"
            f"  got:      {got}\n"
            f"  missing:  {missing}\n"
            f"  extra:    {extra}")
    if frame.empty:
        raise SchemaError(f"{path}: CSV has a header but no data rows")
    return frame
