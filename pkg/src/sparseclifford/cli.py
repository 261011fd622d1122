"""Command-line interface for running trajectory ensembles.

Subcommands mirror the experiment kinds; every run writes one CSV (or JSON)
table with a fixed schema.  A key=value config file can hold any long flag
(without the leading dashes); explicit flags win over the file.
"""

import argparse
import sys

from .circuit import CircuitConfig
from .ensemble import ExperimentSpec, resolve_workers, run_ensemble, write_result

_COMMON = {
    "n": dict(type=int, help="number of sites (power of two)"),
    "s": dict(type=float, help="interaction exponent"),
    "seed": dict(type=int, help="master RNG seed (default 0)"),
    "trajectories": dict(type=int, help="ensemble size (default 100)"),
    "t-max": dict(type=int, help="number of timesteps (default 10)"),
    "geometry": dict(choices=["linear", "treelike", "both"],
                     help="region geometry (default linear)"),
    "out": dict(type=str, help="output file path"),
    "threads": dict(type=int, help="worker processes (default: all cores)"),
    "format": dict(choices=["csv", "json"], help="output format (default csv)"),
    "config": dict(type=str, help="key=value file mirroring the flags"),
}

_DEFAULTS = {
    "n": 64, "s": 0.0, "seed": 0, "trajectories": 100, "t_max": 10,
    "geometry": "linear", "out": "", "threads": None, "format": "csv",
}


def _add_common(parser, *names):
    for name in names:
        parser.add_argument(f"--{name}", default=None, **_COMMON[name])


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sparseclifford",
        description="Sparse nonlocal Clifford circuit ensembles")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("entropy-scan", help="region entropy vs size and time")
    _add_common(p, "n", "s", "seed", "trajectories", "t-max", "geometry",
                "out", "threads", "format", "config")
    p.add_argument("--anchor", type=int, default=None,
                   help="anchor site of the scanned regions (default 0)")

    p = sub.add_parser("tripartite", help="tripartite mutual information vs time")
    _add_common(p, "n", "s", "seed", "trajectories", "t-max", "geometry",
                "out", "threads", "format", "config")

    p = sub.add_parser("teleport", help="teleportation-fidelity lightcone map")
    _add_common(p, "n", "s", "seed", "trajectories", "t-max", "out",
                "threads", "format", "config")
    p.add_argument("--input-site", type=int, default=None,
                   help="site carrying the reference-entangled qubit (default 0)")
    p.add_argument("--outputs", type=str, default=None,
                   help="comma-separated output sites (default: input±10 window)")

    p = sub.add_parser("critical-time", help="fidelity-crossing transition time")
    _add_common(p, "s", "seed", "trajectories", "t-max", "geometry", "out",
                "threads", "format", "config")
    p.add_argument("--sizes", type=str, default=None,
                   help="comma-separated system sizes (default 32,64,128)")

    p = sub.add_parser("scaling", help="threshold-time scaling fits vs system size")
    _add_common(p, "s", "seed", "trajectories", "t-max", "geometry", "out",
                "threads", "format", "config")
    p.add_argument("--sizes", type=str, default=None,
                   help="comma-separated system sizes (default 32,64,128,256)")
    p.add_argument("--observable", choices=["t0", "t_vol", "v_s"], default=None,
                   help="which timescale to extract (default t0)")
    p.add_argument("--model", choices=["linear-in-N", "log-in-N", "power-law"],
                   default=None, help="scaling model to fit (default power-law)")
    return parser


def _load_config_file(path):
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            for sep in ("=", ":"):
                if sep in line:
                    key, _, value = line.partition(sep)
                    break
            else:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def _merge(args, file_values):
    merged = {}
    for key, fallback in _DEFAULTS.items():
        cli_value = getattr(args, key, None)
        if cli_value is not None:
            merged[key] = cli_value
        elif key in file_values:
            merged[key] = file_values[key]
        else:
            merged[key] = fallback
    for key in ("anchor", "input_site", "outputs", "sizes", "observable", "model"):
        cli_value = getattr(args, key, None)
        merged[key] = cli_value if cli_value is not None else file_values.get(key)
    for key in ("n", "seed", "trajectories", "t_max"):
        merged[key] = int(merged[key])
    merged["s"] = float(merged["s"])
    if merged["threads"] is not None:
        merged["threads"] = int(merged["threads"])
    return merged


def _parse_sizes(text, default):
    if text is None:
        return tuple(default)
    return tuple(int(v) for v in str(text).split(",") if v.strip())


def _build_spec(command, opts):
    def cfg(n_sites, t_max=None):
        return CircuitConfig(
            n_sites=n_sites, s=opts["s"], seed=opts["seed"],
            trajectories=opts["trajectories"],
            t_max=opts["t_max"] if t_max is None else t_max)

    if command == "entropy-scan":
        return ExperimentSpec(kind="entropy-scan", config=cfg(opts["n"]),
                              geometry=opts["geometry"],
                              input_site=int(opts.get("anchor") or 0))
    if command == "tripartite":
        return ExperimentSpec(kind="tripartite", config=cfg(opts["n"]),
                              geometry=opts["geometry"])
    if command == "teleport":
        outputs = ()
        if opts.get("outputs"):
            outputs = tuple(int(v) for v in str(opts["outputs"]).split(","))
        return ExperimentSpec(kind="teleport-lightcone", config=cfg(opts["n"]),
                              geometry="linear",
                              input_site=int(opts.get("input_site") or 0),
                              output_sites=outputs)
    if command == "critical-time":
        sizes = _parse_sizes(opts.get("sizes"), (32, 64, 128))
        geometry = opts["geometry"] if opts["geometry"] != "both" else "linear"
        return ExperimentSpec(kind="teleport-critical", config=cfg(max(sizes)),
                              geometry=geometry, sizes=sizes)
    if command == "scaling":
        sizes = _parse_sizes(opts.get("sizes"), (32, 64, 128, 256))
        geometry = opts["geometry"] if opts["geometry"] != "both" else "linear"
        return ExperimentSpec(kind="scaling-study", config=cfg(max(sizes)),
                              geometry=geometry, sizes=sizes,
                              observable=opts.get("observable") or "t0",
                              model=opts.get("model") or "power-law")
    raise ValueError(f"unknown command {command!r}")


def cli_main(argv=None):
    """Entry point; returns a process exit code instead of raising SystemExit."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        file_values = _load_config_file(args.config) if getattr(args, "config", None) else {}
        opts = _merge(args, file_values)
        spec = _build_spec(args.command, opts)
        result = run_ensemble(spec, workers=resolve_workers(opts["threads"]))
        out_path = opts["out"] or f"{args.command}.{opts['format']}"
        write_result(result, out_path, fmt=opts["format"])
        _print_summary(result, out_path)
        return 0
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _print_summary(result, out_path):
    print(f"{result.kind}: {len(result.rows)} rows -> {out_path}")
    rate = result.metadata.get("measured_gates_per_site_per_step")
    if rate is not None:
        print(f"measured gates per site per step: {rate:.4f}")
    if "t_c" in result.metadata:
        t_c = result.metadata["t_c"]
        if t_c is None:
            print("no fidelity crossing found (no finite-time transition)")
        else:
            lo, hi = result.metadata["t_c_ci"]
            print(f"t_c = {t_c:.3f} (95% CI [{lo:.3f}, {hi:.3f}])")
    if "fit" in result.metadata:
        fit = result.metadata["fit"]
        print(f"fit {fit['model']}: params={fit['params']} residual={fit['residual']:.4g}")


def main():
    raise SystemExit(cli_main())


if __name__ == "__main__":
    main()
