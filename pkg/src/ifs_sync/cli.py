"""Command line: ``ifs-sync run|validate|schema``.

Exit codes: 0 success, 2 configuration error, 3 computation error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from dataclasses import dataclass, field
from importlib import metadata
from pathlib import Path

import numpy as np

from . import analysis, driving, measures
from . import rng as rngmod
from ._parallel import THREADS_ENV, worker_count
from .config import SCHEMA, ConfigError, ExperimentConfig, parse_config
from .diffeos import noise_from_dict
from .geometry import CIRCLE

EXIT_OK, EXIT_CONFIG, EXIT_COMPUTE = 0, 2, 3


def toolkit_version() -> str:
    try:
        return metadata.version("ifs-sync")
    except metadata.PackageNotFoundError:
        return "0+unknown"


class ComputationError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"{stage}: {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class RunManifest:
    config: dict
    version: str
    duration: float = 0.0
    files: list = field(default_factory=list)
    defaults: list = field(default_factory=list)
    status: str = "ok"
    error: dict | None = None

    def to_dict(self):
        return {
            "config": self.config,
            "version": self.version,
            "duration_seconds": self.duration,
            "files": self.files,
            "defaults_filled": self.defaults,
            "status": self.status,
            "error": self.error,
        }


# ---------------------------------------------------------------- emission


def _plain(obj):
    """Convert numpy scalars and arrays to JSON types; non-finite floats become null."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def dumps(obj) -> str:
    """Sorted keys, shortest round-trip floats, trailing newline."""
    return json.dumps(_plain(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def emit_report(report: dict, prefix: str | Path, tables: dict | None = None) -> list[str]:
    """Write ``<prefix>.report.json`` and one ``<prefix>.<name>.csv`` per table.

    ``tables`` maps a name to ``(header, rows)``. Returns the written paths.
    """
    prefix = Path(prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    path = prefix.with_name(prefix.name + ".report.json")
    path.write_text(dumps(report))
    files = [str(path)]
    for name, (header, rows) in (tables or {}).items():
        p = prefix.with_name(f"{prefix.name}.{name}.csv")
        write_csv(p, header, rows)
        files.append(str(p))
    return files


def _float_rows(rows):
    return ([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row] for row in rows)


def _histogram_table(h: measures.UlamHistogram):
    return ["cell_index", "mass"], _float_rows(enumerate(h.mass))


# ---------------------------------------------------------------- experiment kinds


def _run_lyapunov(cfg, system, threads):
    e = cfg.experiment
    x0 = None if "x0" not in e else (float(e["x0"]) if system.manifold == CIRCLE else np.asarray(e["x0"], float))
    fn = analysis.lyapunov_top if cfg.kind == "lyapunov" else analysis.lyapunov_spectrum
    est = fn(system, e["n"], e["burn"], e["blocks"], rngmod.stream(cfg.seed, 0), x0)
    report = est.to_dict()
    if e["bound_samples"] > 0:
        m = measures.stationary_mc(system, e["burn"], e["bound_samples"], rngmod.stream(cfg.seed, 1))
        report["upper_bound"] = analysis.lyapunov_upper_bound(system, m)
    return report, {}


def _run_stationary(cfg, system, threads):
    e = cfg.experiment
    part = measures.make_partition(system.manifold, e["resolution"])
    tables = {}
    report = {"method": e["method"], "cells": part.cells}
    if e["method"] == "ulam":
        M = measures.ulam_matrix(system, part, e["samples_per_cell"], rngmod.stream(cfg.seed, 0), threads)
        h = measures.stationary_power(M, tol=e["tol"], partition=part)
        report["residual"] = float(np.abs(h.mass @ M - h.mass).sum())
        report["row_sum_error"] = float(np.abs(M.sum(axis=1) - 1.0).max())
        tables["matrix"] = (["cell_index"] + list(range(part.cells)), _float_rows([i, *row] for i, row in enumerate(M)))
    else:
        m = measures.stationary_mc(system, e["n_burn"], e["n_keep"], rngmod.stream(cfg.seed, 0))
        h = m.histogram(part)
    report["tv_to_uniform"] = measures.tv_distance(h, measures.UlamHistogram.uniform(part))
    report["support_coverage"] = measures.support_coverage(h, e["floor"])
    tables["histogram"] = _histogram_table(h)
    return report, tables


def _run_pullback(cfg, system, threads):
    e = cfg.experiment
    m = measures.stationary_mc(system, e["n_burn"], e["ensemble"] * e["thin"], rngmod.stream(cfg.seed, 0))
    ens = measures.EmpiricalMeasure(system.manifold, m.points[:: e["thin"]][: e["ensemble"]])
    rep = analysis.pullback_atoms(system, ens, e["depth"], e["cluster_radius"], rngmod.stream(cfg.seed, 1))
    return rep.to_dict(), {}


def _run_sync(cfg, system, threads):
    e = cfg.experiment
    rep = analysis.sync_experiment(system, e["pairs"], e["n"], e["tol"], rngmod.stream(cfg.seed, 0), threads=threads)
    steps = np.arange(rep.traces.shape[1])
    rows = ((i, int(s), repr(float(d))) for i, tr in enumerate(rep.traces) for s, d in zip(steps, tr))
    return rep.to_dict(), {"traces": (["pair_id", "step", "distance"], rows)}


def _run_minimality(cfg, system, threads):
    e = cfg.experiment
    rep = analysis.reachability_cover(system, e["x0"], 1.0 / e["resolution"], e["T"])
    return rep.to_dict(), {}


def _run_baker(cfg, system, threads):
    e = cfg.experiment
    p = system.p
    g = rngmod.stream(cfg.seed, 0)
    one, two = 0.0, 0.0
    for _ in range(e["words"]):
        w = driving.sample_word(p, e["length"], g)
        past = driving.sample_word(p, e["length"], g)
        one = max(one, driving.semiconjugacy_residual(w, p))
        two = max(two, driving.full_semiconjugacy_residual(past, w, p))
    report = {
        "words": e["words"],
        "length": e["length"],
        "max_residual": one,
        "max_full_residual": two,
        "threshold": e["threshold"],
        "pass": max(one, two) <= e["threshold"],
    }
    return report, {}


def _run_isolate(cfg, system, threads):
    e = cfg.experiment
    noise = noise_from_dict(cfg.system["noise"])
    ok = analysis.isolating_check(system.base, noise, e["U"], e["n_samples"], rngmod.stream(cfg.seed, 0))
    return {"U": e["U"], "n_samples": e["n_samples"], "isolating": ok}, {}


def _run_unique(cfg, system, threads):
    e = cfg.experiment
    inits = [measures.InitialLaw(i["kind"], tuple(i.get("params", ()))) for i in e["inits"]]
    d = analysis.uniqueness_probe(
        system, inits, e["n_burn"], e["n_keep"], rngmod.stream(cfg.seed, 0), e["resolution"], threads
    )
    metric = "wasserstein1" if system.manifold == CIRCLE else "total_variation"
    return {"max_distance": d, "metric": metric, "inits": len(inits)}, {}


RUNNERS = {
    "lyapunov": _run_lyapunov,
    "spectrum": _run_lyapunov,
    "stationary": _run_stationary,
    "pullback": _run_pullback,
    "sync": _run_sync,
    "minimality": _run_minimality,
    "baker-verify": _run_baker,
    "isolate": _run_isolate,
    "unique": _run_unique,
}


def run_experiment(cfg: ExperimentConfig, threads: int | None = None) -> RunManifest:
    """Run one experiment and write its report, tables and manifest.

    The report depends only on the configuration; timing and file lists go to
    the manifest. On failure the manifest records the failing stage and a
    :class:`ComputationError` is raised.
    """
    manifest = RunManifest(cfg.to_dict(), toolkit_version(), defaults=list(cfg.defaults))
    prefix = Path(cfg.output)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    manifest_path = prefix.with_name(prefix.name + ".manifest.json")
    start = time.perf_counter()
    stage = "setup"
    try:
        sys_ = cfg.build_system()
        stage = "compute"
        body, tables = RUNNERS[cfg.kind](cfg, sys_, threads)
        stage = "emit"
        report = {"kind": cfg.kind, "seed": cfg.seed, "manifold": sys_.manifold, "result": body}
        manifest.files = emit_report(report, prefix, tables)
    except Exception as exc:
        manifest.status = "error"
        manifest.error = {"stage": stage, "type": type(exc).__name__, "message": str(exc)}
        manifest.duration = time.perf_counter() - start
        manifest_path.write_text(dumps(manifest.to_dict()))
        raise ComputationError(stage, exc) from exc
    manifest.duration = time.perf_counter() - start
    manifest.files.append(str(manifest_path))
    manifest_path.write_text(dumps(manifest.to_dict()))
    return manifest


# ---------------------------------------------------------------- entry point


def _load(path: str) -> ExperimentConfig:
    try:
        text = Path(path).read_bytes()
    except OSError as e:
        raise ConfigError("", f"cannot read {path}: {e.strerror}") from None
    return parse_config(text)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="ifs-sync", description="Random IFS synchronization experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run the experiment described by a config file")
    run.add_argument("config")
    run.add_argument("--threads", type=int, default=None, help=f"worker cap (default: ${THREADS_ENV} or all cores)")
    val = sub.add_parser("validate", help="check a config file without running it")
    val.add_argument("config")
    sub.add_parser("schema", help="print the config JSON schema")
    args = parser.parse_args(argv)

    if args.command == "schema":
        sys.stdout.write(dumps(SCHEMA))
        return EXIT_OK
    try:
        cfg = _load(args.config)
        threads = worker_count(args.threads) if args.command == "run" else None
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as e:
        print(f"config error: {THREADS_ENV}: {e}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "validate":
        print(f"ok: {cfg.kind} on the {cfg.manifold}")
        return EXIT_OK
    try:
        manifest = run_experiment(cfg, threads)
    except ComputationError as e:
        print(f"computation error: {e}", file=sys.stderr)
        return EXIT_COMPUTE
    for f in manifest.files:
        print(f)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
