"""Command-line front end: ``chemoflux <mode> --config <path> [--out <dir>] [--set k=v ...]``.

Exit codes: 0 success, 2 configuration or assumption error, 3 numerical failure
(divergence, no steady state, ill-conditioned solve), 4 a check suite failed.
"""
from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import output
from .analysis import (AverageDynamics, SteadyProfileParams, bbar_exact, steady_order0,
                       steady_residuals, ubar_exact)
from .checks import run_checks
from .config import MODES, RunConfig, dump_config, parse_config
from .diagnostics import boundedness_report, positivity_verdict
from .errors import AssumptionError, ChemofluxError, ConfigError, MeshError
from .mesh import Mesh
from .model import validate
from .picard import run_contraction_study
from .solver import simulate

log = logging.getLogger("chemoflux")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_CHECK = 0, 2, 3, 4
MONOTONE_TOL = 1e-10


def _schema(kind: str) -> str:
    return f"chemoflux.{kind}/1"


def aggregation_verdict(traj) -> dict:
    """Did the cells move to x = 1 and do the chemicals increase towards it?"""
    first, last = traj.diagnostics[0], traj.diagnostics[-1]
    final = traj.final
    n = traj.mesh.n_cells
    return {
        "argmax_u_cell": int(np.argmax(final.u)),
        "argmax_v_cell": int(np.argmax(final.v)),
        "u_max_in_last_cell": int(np.argmax(final.u)) == n - 1,
        "v_max_in_last_cell": int(np.argmax(final.v)) == n - 1,
        "right_mass_u_initial": first.right_mass_u,
        "right_mass_u_final": last.right_mass_u,
        "right_mass_v_initial": first.right_mass_v,
        "right_mass_v_final": last.right_mass_v,
        "right_mass_u_increased": last.right_mass_u > first.right_mass_u,
        "right_mass_v_increased": last.right_mass_v > first.right_mass_v,
        "a_nondecreasing": bool(np.all(np.diff(final.a) >= -MONOTONE_TOL)),
        "b_nondecreasing": bool(np.all(np.diff(final.b) >= -MONOTONE_TOL)),
    }


def simulation_summary(config: RunConfig, traj) -> dict:
    report = validate(config.params, config.functions, waivers=config.waivers)
    return {
        "schema": _schema("summary"),
        "mode": "simulate",
        "config": config.to_dict(),
        "run": {
            "steps": traj.steps,
            "t_final": traj.final.t,
            "n_cells": traj.mesh.n_cells,
            "dt_min": traj.dt_min,
            "dt_max_used": traj.dt_max_used,
            "snapshots": len(traj.snapshots),
            "diagnostics": len(traj.diagnostics),
        },
        "initial": traj.diagnostics[0].to_dict(),
        "final": traj.diagnostics[-1].to_dict(),
        "verdicts": {
            "positivity": positivity_verdict(traj, config.solver.positivity_tol).to_dict(),
            "boundedness": boundedness_report(traj).to_dict(),
            "aggregation": aggregation_verdict(traj),
            "validation": {
                "passed": report.passed,
                "violations": [v.__dict__ for v in report.violations],
                "waived": [v.__dict__ for v in report.waived],
            },
        },
    }


# ---------------------------------------------------------------------------
# modes


def _run_simulate(config: RunConfig, out: Path) -> int:
    mesh = Mesh(config.n_cells)
    traj = simulate(config.params, config.functions, config.initial, config.solver, mesh=mesh)
    fmts = config.output.formats
    if "csv" in fmts:
        output.write_fields_csv(out / "fields.csv", traj.snapshots)
        output.write_diagnostics_csv(out / "diagnostics.csv", traj.diagnostics)
    if "json" in fmts:
        output.write_json(out / "summary.json", simulation_summary(config, traj))
    if "svg" in fmts:
        x = mesh.cell_centers
        final = traj.final
        output.write_svg(out / "profiles.svg", {k: (x, final.fields[k]) for k in "uvab"},
                         title=f"profiles at t = {final.t:g}")
        t = [r.t for r in traj.diagnostics]
        output.write_svg(out / "averages.svg",
                         {k: (t, [getattr(r, k) for r in traj.diagnostics])
                          for k in ("ubar", "vbar", "abar", "bbar")},
                         title="spatial averages", xlabel="t")
    return EXIT_OK


def _run_picard(config: RunConfig, out: Path) -> int:
    pc = config.picard
    reports = run_contraction_study(config.params, config.functions, config.initial,
                                    pc.horizons, pc.iterations, Mesh(config.n_cells),
                                    time_steps=pc.time_steps, scheme=pc.scheme)
    if "json" in config.output.formats:
        output.write_json(out / "picard.json", {
            "schema": _schema("picard"), "mode": "picard", "config": config.to_dict(),
            "reports": [r.to_dict() for r in reports],
        })
    return EXIT_OK


def _steady_params(config: RunConfig) -> SteadyProfileParams:
    s = config.steady
    return SteadyProfileParams(gamma=s.gamma, delta=s.delta, P=s.P, K1=s.K1, x0=s.x0,
                               C=s.C, D=s.D)


def _run_steady(config: RunConfig, out: Path) -> int:
    spp = _steady_params(config)
    profiles = steady_order0(spp, Mesh(config.n_cells))
    report = steady_residuals(spp, profiles, n_points=config.steady.n_points,
                              fd_step=config.steady.fd_step)
    x = profiles.mesh.cell_centers
    if "csv" in config.output.formats:
        output.write_rows(out / "profiles.csv", ("x", "u", "v", "a", "b"),
                          zip(x, profiles.u, profiles.v, profiles.a, profiles.b))
    if "json" in config.output.formats:
        output.write_json(out / "steady.json", {
            "schema": _schema("steady"), "mode": "steady", "config": config.to_dict(),
            "residuals": report.to_dict(),
        })
    if "svg" in config.output.formats:
        output.write_svg(out / "profiles.svg", {k: (x, profiles.fields[k]) for k in "uvab"},
                         title="lowest-order steady profiles")
    return EXIT_OK


def _run_averages(config: RunConfig, out: Path) -> int:
    mesh = Mesh(config.n_cells)
    p = config.params
    init = config.initial.evaluate(mesh)
    dyn = AverageDynamics.from_state(init, p, config.functions.g)
    t = np.linspace(0.0, config.solver.t_end, config.averages.samples)
    ubar = ubar_exact(t, dyn)
    bbar = bbar_exact(t, dyn)
    decay = dyn.ubar0 * np.exp(-p.mu * t)
    doc = {"schema": _schema("averages"), "mode": "averages", "config": config.to_dict(),
           "initial_means": {"ubar0": dyn.ubar0, "vbar0": dyn.vbar0, "abar0": dyn.abar0,
                             "bbar0": dyn.bbar0}}
    if config.averages.compare_simulation:
        traj = simulate(p, config.functions, init, config.solver)
        ts = np.array([r.t for r in traj.diagnostics])
        su = np.array([r.ubar for r in traj.diagnostics])
        sb = np.array([r.bbar for r in traj.diagnostics])
        eu = np.abs(su - ubar_exact(ts, dyn))
        eb = np.abs(sb - bbar_exact(ts, dyn))
        doc["comparison"] = {"times": len(ts), "max_ubar_error": float(eu.max()),
                             "max_bbar_error": float(eb.max())}
        if "csv" in config.output.formats:
            output.write_rows(out / "averages_simulated.csv",
                              ("t", "ubar", "bbar", "ubar_error", "bbar_error"),
                              zip(ts, su, sb, eu, eb))
    if "csv" in config.output.formats:
        output.write_rows(out / "averages.csv", ("t", "ubar", "bbar", "ubar0_exp_mu_t"),
                          zip(t, ubar, bbar, decay))
    if "json" in config.output.formats:
        output.write_json(out / "averages.json", doc)
    if "svg" in config.output.formats:
        output.write_svg(out / "averages.svg", {"ubar": (t, ubar), "bbar": (t, bbar)},
                         title="closed-form averages", xlabel="t")
    return EXIT_OK


def _run_check(config: RunConfig, out: Path) -> int:
    results = run_checks(config.check.suites, seed=config.check.seed)
    passed = all(r.passed for r in results)
    for r in results:
        log.info("check %-13s %s", r.name, "PASS" if r.passed else "FAIL")
    if "json" in config.output.formats:
        output.write_json(out / "check.json", {
            "schema": _schema("check"), "mode": "check", "passed": passed,
            "config": config.to_dict(), "suites": [r.to_dict() for r in results],
        })
    return EXIT_OK if passed else EXIT_CHECK


RUNNERS = {"simulate": _run_simulate, "picard": _run_picard, "steady": _run_steady,
           "averages": _run_averages, "check": _run_check}


def run(config: RunConfig, out_dir=None, argv=None) -> int:
    """Execute ``config`` and write its files into ``out_dir`` (default ``output.dir``)."""
    started = time.perf_counter()
    out = Path(out_dir if out_dir is not None else config.output.dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.yaml").write_text(dump_config(config), encoding="utf-8")
    status = RUNNERS[config.mode](config, out)
    output.write_provenance(out / "provenance.json", argv=argv, started=started,
                            extra={"mode": config.mode, "exit_status": status})
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chemoflux", description=__doc__.splitlines()[0])
    parser.add_argument("mode", choices=MODES)
    parser.add_argument("--config", required=True, help="YAML run configuration")
    parser.add_argument("--out", default=None, help="output directory (default: output.dir)")
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="override a dotted config key; repeatable")
    parser.add_argument("-q", "--quiet", action="store_true")
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(name)s: %(message)s")
    try:
        config = parse_config(args.config, overrides=args.overrides, mode=args.mode)
    except (ConfigError, AssumptionError, MeshError) as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    try:
        status = run(config, args.out, argv=["chemoflux", *argv])
    except (ConfigError, AssumptionError, MeshError) as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except ChemofluxError as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERICAL
    log.info("%s finished with status %d; outputs in %s", config.mode, status,
             args.out or config.output.dir)
    return status


if __name__ == "__main__":
    sys.exit(main())
