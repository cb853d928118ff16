"""Experiment runners behind the command line.

Each runner writes ``manifest.json`` before any work, then its CSV tables
and a JSON summary.  Grid points get independent seeds spawned from the
config seed, and results are gathered in input order, so a single-worker
rerun reproduces the files byte for byte.
"""
from __future__ import annotations

import csv
import json
import math
import platform
import time
from importlib import metadata
from pathlib import Path

import numpy as np

from .channels import ChannelSpec, apply_channel_dense, apply_channels, classify_symmetry, \
    dense_symmetry_check, one_form_generators, zero_form_generator
from .classical import P_C2, P_CINF, couplings_from_errors, ising_model
from .cluster_state import projector_state_dense, pure_state_expansion
from .config import ExperimentConfig
from .diagnostics import (
    DiagnosticsReport, correlation_length, phase_call, relative_entropy, strange_correlator,
    tripartite_negativity,
)
from .lattice import build_lattice, partition_disk, rectangular_loop
from .montecarlo import chain_seeds, free_energy_difference, locate_critical_point
from .oracles import identity_suite

FLOAT_FMT = "{:.12g}"


def code_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        return FLOAT_FMT.format(float(v))
    return str(v)


def write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


def write_json(path: Path, obj):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    return str(o)


def write_manifest(cfg: ExperimentConfig, out: Path, seeds) -> None:
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "manifest.json", {
        "config": cfg.to_dict(),
        "code_version": code_version(),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "seeds": list(seeds),
        "status": "started",
    })


def _finish_manifest(out: Path, status: str, elapsed: float):
    path = out / "manifest.json"
    data = json.loads(path.read_text())
    data["status"] = status
    data["elapsed_seconds"] = round(elapsed, 3)
    write_json(path, data)


# -- runners ---------------------------------------------------------------------

def run_oracle_suite(cfg: ExperimentConfig, out: Path, workers: int = 1) -> int:
    checks = identity_suite(p_x_grid=cfg.p_grid, p_z_grid=sorted({0.0, cfg.p_z}))
    write_csv(out / "oracle.csv", ["identity", "p_x", "p_z", "quantum", "classical", "rel_err", "passed", "detail"],
              [(c.identity, c.p_x, c.p_z, c.quantum, c.classical, c.rel_err, c.passed, c.detail) for c in checks])
    failed = sorted({c.identity for c in checks if not c.passed})
    write_json(out / "oracle.json", {"checks": len(checks), "failed_identities": failed})
    return 1 if failed else 0


def figure3_point(N, p, w, h, n_points, sweeps, therm, seed, method):
    lat = build_lattice(N)
    loop = rectangular_loop(lat, (N // 2 - h // 2, N // 2 - w // 2), w, h)
    est = strange_correlator(lat, p, loop, "mc", n_points=n_points, n_meas=sweeps, n_therm=therm,
                             seed=seed, method=method).flags["estimate"]
    J = couplings_from_errors(p)[0]
    return est.value, est.standard_error, len(loop.edges) * math.log(math.cosh(J))


def run_figure3(cfg: ExperimentConfig, out: Path, workers: int = 1) -> int:
    from .montecarlo import run_parallel
    N = cfg.lattice["N"]
    jobs = []
    seeds = chain_seeds(cfg.seed, len(cfg.loops) * len(cfg.p_grid))
    for i, (w, h) in enumerate(cfg.loops):
        for j, p in enumerate(cfg.p_grid):
            jobs.append((N, float(p), w, h, cfg.schedule.points, cfg.schedule.sweeps,
                         cfg.schedule.thermalization, seeds[i * len(cfg.p_grid) + j], cfg.schedule.method))
    results = run_parallel(figure3_point, jobs, workers)
    summary = []
    for i, (w, h) in enumerate(cfg.loops):
        rows = []
        for j, p in enumerate(cfg.p_grid):
            v, e, ref = results[i * len(cfg.p_grid) + j]
            rows.append((p, v, e))
            summary.append({"loop": f"{w}x{h}", "p_x": p, "delta_F": v, "sigma": e,
                            "high_temperature_reference": ref, "seed": seeds[i * len(cfg.p_grid) + j]})
        write_csv(out / f"figure3_loop{w}x{h}.csv", ["p_x", "delta_F", "sigma"], rows)
    write_json(out / "figure3.json", {"points": summary})
    return 0


def _family(kind):
    def plain(L, p):
        return ising_model(build_lattice(L), p)

    def decoupled(L, p):
        return ising_model(build_lattice(L), p, n=2, decoupled=True)

    return plain if kind == "plain" else decoupled


def run_critical_scan(cfg: ExperimentConfig, out: Path, workers: int = 1) -> int:
    est = locate_critical_point(_family(cfg.family), cfg.sizes, cfg.p_grid, n_meas=cfg.schedule.sweeps,
                                n_therm=cfg.schedule.thermalization, seed=cfg.seed,
                                method=cfg.schedule.method, workers=workers)
    write_csv(out / "binder.csv", ["L", "p_x", "U4", "sigma"], est.table)
    ref = P_C2 if cfg.family == "plain" else P_CINF
    write_json(out / "critical.json", {**est.to_dict(), "family": cfg.family, "reference": ref})
    return 0 if est.in_range else 2


def run_diagnostics_scan(cfg: ExperimentConfig, out: Path, workers: int = 1) -> int:
    reports = []
    seeds = chain_seeds(cfg.seed, len(cfg.p_grid))
    sched = cfg.schedule
    mc = {} if cfg.mode == "exact" else {"n_meas": sched.sweeps, "n_therm": sched.thermalization}
    for p, seed in zip(cfg.p_grid, seeds):
        p = float(p)
        rep = DiagnosticsReport(p, cfg.p_z, dict(cfg.lattice),
                                provenance="oracle" if cfg.mode == "exact" else "monte-carlo")
        # relative entropy on an open lattice along the top edge
        # exact: the largest open lattice whose replica model stays enumerable
        No = cfg.partition.get("N", 10) if cfg.mode == "mc" else (4 if cfg.replica == 2 else 3)
        lat_o = build_lattice(No, "open")
        st = apply_channels(pure_state_expansion(lat_o), [ChannelSpec("x", p, "B"), ChannelSpec("z", cfg.p_z, "A")])
        for d in cfg.separations:
            if d >= No:
                continue
            route = "classical" if cfg.mode == "exact" else "mc"
            kw = {} if route == "classical" else {**mc, "seed": seed + d}
            v = relative_entropy(st, 0, d, cfg.replica, route, **kw)
            rep.relative_entropy.append((d, v.value, v.error))
        # strange correlator on the torus
        Np = cfg.lattice["N"] if cfg.mode == "mc" else 4
        lat_p = build_lattice(Np)
        for w, h in cfg.loops:
            if w >= Np or h >= Np:
                continue
            loop = rectangular_loop(lat_p, (0, 0), w, h)
            kw = {} if cfg.mode == "exact" else {"n_meas": sched.sweeps, "n_therm": sched.thermalization,
                                                 "n_points": sched.points, "seed": seed + 100 * w}
            v = strange_correlator(lat_p, p, loop, cfg.mode, **kw)
            rep.strange_correlator.append((len(loop.edges), v.value, v.flags.get("log", math.log(v.value)),
                                           v.flags.get("log_error", 0.0)))
        # tripartite negativity
        if cfg.mode == "mc":
            lat_n = build_lattice(cfg.partition.get("N", 10), "open")
            part = partition_disk(lat_n, tuple(cfg.partition.get("cuts", (3, 7))))
            stn = apply_channels(pure_state_expansion(lat_n), [ChannelSpec("x", p, "B")])
            xi = correlation_length(p) if p > 0 else 0.0
            v = tripartite_negativity(stn, part, 2 * cfg.replica, "mc", xi=xi, seed=seed, **mc)
            rep.negativities = {k: (v.flags[k], 0.0) for k in ("LM", "MR", "M", "LMR")}
            rep.negativities["N"] = (v.value, v.error)
        rep.phase = phase_call(rep)
        reports.append(rep)
    rows = [r for rep in reports for r in rep.csv_rows()]
    write_csv(out / "diagnostics.csv", ["diagnostic", "p_x", "p_z", "key", "value", "error", "provenance"],
              [(r["diagnostic"], r["p_x"], r["p_z"], r["key"], r["value"], r["error"], r["provenance"])
               for r in rows])
    write_json(out / "diagnostics.json", {"reports": [json.loads(r.to_json()) for r in reports]})
    return 0


SYMMETRY_PLACEMENTS = (
    ("bit-flip all", ChannelSpec("x", 0.2, "all")),
    ("phase-flip A", ChannelSpec("z", 0.2, "A")),
    ("phase-flip B", ChannelSpec("z", 0.2, "B")),
)


def symmetry_table(N: int = 2, dense: bool = True) -> list[dict]:
    """Verdicts per placement from Kraus commutation and, at small N, from the
    decohered density matrix itself."""
    lat = build_lattice(N)
    rho0 = projector_state_dense(lat) if dense else None
    rows = []
    for name, spec in SYMMETRY_PLACEMENTS:
        v = classify_symmetry(lat, spec)
        row = {"placement": name, "zero_form": v.zero_form, "one_form": v.one_form}
        if dense:
            rho = apply_channel_dense(rho0, spec, lat)
            zero = dense_symmetry_check(rho, zero_form_generator(lat))
            ones = [dense_symmetry_check(rho, g) for g in one_form_generators(lat)]
            row["zero_form_dense"] = zero
            row["one_form_dense"] = "average" if "average" in ones else ("broken" if "broken" in ones else "exact")
        rows.append(row)
    return rows


def run_symmetry_table(cfg: ExperimentConfig, out: Path, workers: int = 1) -> int:
    rows = symmetry_table(min(cfg.lattice["N"], 2))
    keys = list(rows[0])
    write_csv(out / "symmetry.csv", keys, [[r[k] for k in keys] for r in rows])
    agree = all(r["zero_form"] == r["zero_form_dense"] and r["one_form"] == r["one_form_dense"] for r in rows)
    write_json(out / "symmetry.json", {"rows": rows, "kraus_matches_dense": agree})
    return 0 if agree else 1


RUNNERS = {
    "oracle-suite": run_oracle_suite,
    "figure3": run_figure3,
    "critical-scan": run_critical_scan,
    "diagnostics-scan": run_diagnostics_scan,
    "symmetry-table": run_symmetry_table,
}


def run(cfg: ExperimentConfig, workers: int = 1) -> int:
    """Validate, write the manifest, dispatch; returns the exit status."""
    cfg.validate()
    out = Path(cfg.out)
    write_manifest(cfg, out, [cfg.seed])
    t0 = time.time()
    try:
        status = RUNNERS[cfg.kind](cfg, out, workers)
    except Exception:
        _finish_manifest(out, "failed", time.time() - t0)
        raise
    _finish_manifest(out, "ok" if status == 0 else f"exit {status}", time.time() - t0)
    return status
