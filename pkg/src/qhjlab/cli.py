"""Command-line front end.

    qhjlab solve CONFIG        basis.csv (+ basis.json)
    qhjlab eigen CONFIG        eigenvalues.json
    qhjlab action CONFIG       action.csv (+ action.json, decomposition.json)
    qhjlab trajectory CONFIG   trajectory.csv (+ trajectory.json)
    qhjlab microstates CONFIG  trajectory_nu<k>.csv per nu, family.json
    qhjlab field3d CONFIG      field3d.json, plane_wave_B.csv
    qhjlab verify [CONFIG]     verify.json; exit 1 if any check fails

Exit status: 0 on success, 2 for configuration errors, 1 for numerical
failures (the error is also written as JSON to ``error.json`` in the output
directory and to stderr).
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, load_config
from .field3d import (Grid3, contract_to_current, continuity_check, curl, plane_wave_potential,
                      tensor_from_potential, write_vector_csv)
from .io import to_jsonable, write_action, write_basis, write_json, write_trajectory
from .microstates import decompose
from .reduced_action import reduced_action
from .schrodinger import find_eigenvalues, solve_basis, wronskian_drift
from .trajectories import family_distances, jacobi_time, microstate_family
from .verification import random_smooth_field, run_suite

__all__ = ["main", "build_parser", "run"]


def _needs(cfg: RunConfig, *what):
    for w in what:
        cfg.require(w)


def _resolve_microstate(cfg: RunConfig, out: Path):
    """Microstate from the config, decomposing coefficients when given."""
    if cfg.coefficients is not None:
        d = decompose(cfg.coefficients, cfg.nu_free)
        write_json(out / "decomposition.json", d.as_dict())
        return d.microstate, d
    cfg.require("microstate")
    return cfg.microstate, None


def cmd_solve(cfg: RunConfig, out: Path):
    _needs(cfg, "potential", "grid", "energy")
    b = solve_basis(cfg.potential, cfg.energy, cfg.grid, cfg.x0, cfg.constants)
    write_basis(out / "basis.csv", b, {"wronskian_drift": wronskian_drift(b),
                                       "wronskian_drift_relative": wronskian_drift(b, True),
                                       "config": cfg.echo()})
    return {"files": ["basis.csv", "basis.json"]}


def cmd_eigen(cfg: RunConfig, out: Path):
    _needs(cfg, "potential", "grid", "e_range")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        ev = find_eigenvalues(cfg.potential, cfg.grid, cfg.e_range, cfg.count, cfg.constants)
    write_json(out / "eigenvalues.json", {
        "E": ev, "requested": cfg.count, "range": list(cfg.e_range),
        "warnings": [str(w.message) for w in caught], "config": cfg.echo()})
    return {"files": ["eigenvalues.json"], "E": ev}


def cmd_action(cfg: RunConfig, out: Path):
    _needs(cfg, "potential", "grid", "energy")
    ms, d = _resolve_microstate(cfg, out)
    b = solve_basis(cfg.potential, cfg.energy, cfg.grid, cfg.x0, cfg.constants)
    f = reduced_action(b, ms, cfg.constants)
    meta = {"config": cfg.echo()}
    if d is not None:
        meta["decomposition"] = d.as_dict()
    write_action(out / "action.csv", f, meta)
    files = ["action.csv", "action.json"] + (["decomposition.json"] if d is not None else [])
    return {"files": files}


def cmd_trajectory(cfg: RunConfig, out: Path):
    _needs(cfg, "potential", "grid", "energy")
    ms, d = _resolve_microstate(cfg, out)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        tr = jacobi_time(cfg.potential, ms, cfg.energy, cfg.grid, cfg.dE, cfg.constants,
                         cfg.x0, d, cfg.basis_scaling)
    write_trajectory(out / "trajectory.csv", tr, {"config": cfg.echo()})
    return {"files": ["trajectory.csv", "trajectory.json"], "consistency": tr.consistency}


def cmd_microstates(cfg: RunConfig, out: Path):
    _needs(cfg, "potential", "grid", "energy")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        fam = microstate_family(cfg.potential, cfg.family_mu, cfg.nu_list, cfg.energy,
                                cfg.grid, cfg.constants, cfg.x0, cfg.dE, cfg.basis_scaling)
    files = []
    for k, tr in enumerate(fam):
        name = f"trajectory_nu{k}.csv"
        write_trajectory(out / name, tr, {"nu": cfg.nu_list[k]})
        files += [name, name.replace(".csv", ".json")]
    dist = family_distances(fam)
    summary = {
        "E": cfg.energy, "nu_list": list(cfg.nu_list),
        "microstates": [tr.microstate.as_dict() for tr in fam],
        "pairwise_sup_distance": dist,
        "min_pairwise_sup_distance": float(dist[np.triu_indices(len(fam), 1)].min())
        if len(fam) > 1 else None,
        "files": files,
        "warnings": sorted({str(w.message) for w in caught}),
        "config": cfg.echo(),
    }
    write_json(out / "family.json", summary)
    return {"files": files + ["family.json"]}


def cmd_field3d(cfg: RunConfig, out: Path):
    f3 = cfg.field3d
    g = Grid3.cube(f3["half_width"], f3["n"])
    B = plane_wave_potential(f3["k"], f3["A0"], g, cfg.constants)
    J = curl(B)
    s = cfg.constants.hbar * f3["A0"] ** 2
    target = np.array(f3["k"]) * s
    rng = np.random.default_rng(cfg.seed)
    dc = con = 0.0
    for _ in range(f3["random_fields"]):
        R = random_smooth_field(rng, g)
        JR = curl(R)
        dc = max(dc, float(np.abs(continuity_check(JR)).max()))
        con = max(con, contract_to_current(tensor_from_potential(R)).max_abs_diff(JR))
    report = {
        "grid": {"n": f3["n"], "half_width": f3["half_width"]},
        "plane_wave": {"k": f3["k"], "A0": f3["A0"],
                       "curl_error": max(float(np.abs(J[i] - target[i]).max()) for i in range(3)),
                       "divergence": float(np.abs(continuity_check(J)).max()),
                       "contraction_vs_curl":
                           contract_to_current(tensor_from_potential(B)).max_abs_diff(J)},
        "random_fields": {"count": f3["random_fields"], "seed": cfg.seed,
                          "max_div_curl": dc, "max_contraction_vs_curl": con},
    }
    write_vector_csv(out / "plane_wave_B.csv", B, meta={"current": target.tolist()})
    write_json(out / "field3d.json", report)
    return {"files": ["field3d.json", "plane_wave_B.csv", "plane_wave_B.csv.json"]}


def cmd_verify(cfg: RunConfig, out: Path, stream=None):
    stream = sys.stdout if stream is None else stream
    print(f"seed = {cfg.seed}", file=stream, flush=True)
    report = run_suite(cfg.seed, cfg.tolerances,
                       progress=lambda r: print(r.line(), file=stream, flush=True))
    n_ok = sum(r.passed for r in report.results)
    print(f"{n_ok}/{len(report.results)} passed", file=stream)
    write_json(out / "verify.json", report.as_dict())
    return {"files": ["verify.json"], "passed": report.passed}


COMMANDS = {
    "solve": cmd_solve, "eigen": cmd_eigen, "action": cmd_action,
    "trajectory": cmd_trajectory, "microstates": cmd_microstates,
    "field3d": cmd_field3d, "verify": cmd_verify,
}


def build_parser():
    ap = argparse.ArgumentParser(prog="qhjlab", description=__doc__.split("\n\n")[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("config", nargs="?" if name in ("verify", "field3d") else None,
                        help="TOML run configuration")
        sp.add_argument("-o", "--output", help="output directory (overrides the config)")
        if name == "verify":
            sp.add_argument("--seed", type=int, help="seed for the randomised draws")
    return ap


def _error_payload(command, exc):
    return {"error": type(exc).__name__, "message": str(exc), "command": command}


def run(command, cfg: RunConfig, out: Path):
    """Run one subcommand; returns ``(exit_status, summary)``."""
    out.mkdir(parents=True, exist_ok=True)
    try:
        summary = COMMANDS[command](cfg, out)
    except ConfigError:
        raise
    except (ArithmeticError, ValueError, RuntimeError) as exc:
        payload = _error_payload(command, exc)
        write_json(out / "error.json", payload)
        print(json.dumps(to_jsonable(payload)), file=sys.stderr)
        return 1, payload
    if command == "verify" and not summary["passed"]:
        return 1, summary
    return 0, summary


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
        if getattr(args, "seed", None) is not None:
            cfg = replace(cfg, seed=args.seed)
        out = Path(args.output) if args.output else cfg.output_dir
        status, _ = run(args.command, cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
