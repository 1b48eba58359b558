"""Built-in verification suites behind ``chemoflux check``.

Each suite is a small, self-contained numerical experiment returning a SuiteResult.
Suites are independent and run concurrently in a thread pool capped by the
``CHEMOFLUX_THREADS`` environment variable; results come back in a fixed order.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .analysis import (AverageDynamics, SteadyProfileParams, bbar_exact, bvp_oracle,
                       green_solve, steady_residuals, ubar_exact)
from .config import CHECK_SUITES
from .diagnostics import positivity_verdict
from .mesh import Mesh
from .model import (Constant, ConstantInit, GaussianInit, InitialData, Logistic,
                    ModelFunctions, Parameters, Ramp, Saturating, State, Zero,
                    figure1_preset)
from .picard import contraction_report, run_picard
from .solver import SolverConfig, cfl_dt, simulate, step


@dataclass
class SuiteResult:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "details": self.details}


def _random_parameters(rng) -> Parameters:
    vals = 10.0 ** rng.uniform(-2, 2, size=12)
    return Parameters(*vals)


def positivity_suite(seed: int = 0, cases: int = 8) -> SuiteResult:
    """Random log-uniform parameters and nonnegative data under upwind fluxes."""
    rng = np.random.default_rng(seed)
    worst = math.inf
    for k in range(cases):
        params = _random_parameters(rng)
        c = 10.0 ** rng.uniform(-2, 2, size=4)
        funcs = ModelFunctions(rho=Saturating(c[0]), f=Logistic(c[1], params.k_capacity),
                               h=Saturating(c[2]), g=Ramp(c[3], 1.0))
        mesh = Mesh(40)
        fields_ = [rng.uniform(0, 2, size=40) * (rng.uniform(size=40) < 0.7) for _ in range(4)]
        state = State(0.0, *fields_, mesh=mesh)
        traj = simulate(params, funcs, state, SolverConfig(dt_max=1e-2, t_end=0.2))
        verdict = positivity_verdict(traj)
        worst = min(worst, verdict.worst)
        if not verdict:
            return SuiteResult("positivity", False, {"case": k, **verdict.to_dict()})
    return SuiteResult("positivity", True, {"cases": cases, "worst_min": worst})


def mass_balance_suite() -> SuiteResult:
    """Per-step discrete balances of the u and b totals on the aggregation preset."""
    params, funcs, init = figure1_preset()
    mesh = Mesh(100)
    config = SolverConfig(dt_max=1e-3, t_end=0.5)
    state = init.evaluate(mesh)
    worst_u = worst_b = 0.0
    while state.t < config.t_end - 1e-12:
        dt = min(cfl_dt(state, params, config), config.t_end - state.t)
        new = step(state, params, funcs, config, dt)
        u0, u1 = mesh.integrate(state.u), mesh.integrate(new.u)
        b0, b1 = mesh.integrate(state.b), mesh.integrate(new.b)
        ru = (1 + params.mu * dt) * u1 - u0 - dt * params.d1 * float(funcs.g(new.t))
        rb = (1 + params.mu_b * dt) * b1 - b0 - dt * params.beta2 * u0
        worst_u = max(worst_u, abs(ru) / max(u1, 1e-300))
        worst_b = max(worst_b, abs(rb) / max(b1, 1e-300))
        state = new
    ok = worst_u <= 1e-12 and worst_b <= 1e-12
    return SuiteResult("mass_balance", ok, {"u_relative": worst_u, "b_relative": worst_b})


def conservation_suite() -> SuiteResult:
    """No death, no influx, no reaction: the u and v totals are conserved step by step."""
    params = Parameters(1.0, 0.5, 1.0, 1.0, 5.0, 3.0, 1.0, 1.0, 0.0, 1.0, 1.0)
    funcs = ModelFunctions(rho=Constant(1.0), f=Zero(), h=Zero(), g=Zero())
    init = InitialData(GaussianInit(0.3, 0.1, 1.0), GaussianInit(0.7, 0.1, 1.0),
                       ConstantInit(0.0), ConstantInit(0.0))
    traj = simulate(params, funcs, init, SolverConfig(dt_max=1e-3, t_end=0.5), mesh=Mesh(100))
    u = [r.ubar for r in traj.diagnostics]
    v = [r.vbar for r in traj.diagnostics]
    drift = max(max(abs(x - u[0]) for x in u), max(abs(x - v[0]) for x in v))
    return SuiteResult("conservation", drift <= 1e-12 * traj.steps,
                       {"max_drift": drift, "steps": traj.steps})


def symmetry_suite() -> SuiteResult:
    """Swapping (u, a) with (v, b) and the matching parameters swaps the solution exactly."""
    p = Parameters(d1=0.3, d2=0.7, d3=1.1, d4=0.9, alpha1=2.0, alpha2=3.0, beta1=1.5,
                   beta2=0.5, mu=0.0, mu_a=0.4, mu_b=0.8)
    q = Parameters(d1=p.d2, d2=p.d1, d3=p.d4, d4=p.d3, alpha1=p.alpha2, alpha2=p.alpha1,
                   beta1=p.beta2, beta2=p.beta1, mu=0.0, mu_a=p.mu_b, mu_b=p.mu_a)
    funcs = ModelFunctions(rho=Constant(1.0), f=Zero(), h=Zero(), g=Zero())
    g1, g2 = GaussianInit(0.3, 0.1, 1.0), GaussianInit(0.6, 0.2, 0.5)
    c1, c2 = GaussianInit(0.8, 0.2, 0.2), ConstantInit(0.1)
    config = SolverConfig(dt_max=1e-3, t_end=0.3)
    mesh = Mesh(64)
    one = simulate(p, funcs, InitialData(g1, g2, c1, c2), config, mesh=mesh).final
    two = simulate(q, funcs, InitialData(g2, g1, c2, c1), config, mesh=mesh).final
    exact = (np.array_equal(one.u, two.v) and np.array_equal(one.v, two.u)
             and np.array_equal(one.a, two.b) and np.array_equal(one.b, two.a))
    diff = max(float(np.max(np.abs(one.u - two.v))), float(np.max(np.abs(one.a - two.b))))
    return SuiteResult("symmetry", exact, {"max_difference": diff})


def averages_suite() -> SuiteResult:
    """Simulated means of u and b against the closed forms."""
    params, funcs, init = figure1_preset()
    params = params.replace(alpha1=1.0, alpha2=1.0, mu=0.5)
    mesh = Mesh(50)
    traj = simulate(params, funcs, init, SolverConfig(dt_max=1e-4, t_end=0.5), mesh=mesh)
    dyn = AverageDynamics.from_state(traj.snapshots[0], params, funcs.g)
    rec = traj.diagnostics[-1]
    err_u = abs(rec.ubar - ubar_exact(rec.t, dyn))
    err_b = abs(rec.bbar - bbar_exact(rec.t, dyn))
    return SuiteResult("averages", max(err_u, err_b) <= 1e-3,
                       {"ubar_error": err_u, "bbar_error": err_b})


def green_suite(seed: int = 0) -> SuiteResult:
    """Green's-function quadrature against a finite-difference solve of the same problem."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for eta in (0.5, 1.0, math.sqrt(7.0)):
        c = rng.normal(size=3)
        src = lambda s, c=c: 1.0 + c[0] * np.cos(np.pi * s) + c[1] * s**2 + c[2] * np.sin(3 * s)
        x, ref = bvp_oracle(src, eta, n=1000, richardson=True)
        idx = np.arange(0, x.size, 50)
        val = green_solve(src, eta, x[idx], nodes=200)
        worst = max(worst, float(np.max(np.abs(val - ref[idx]))))
    const = green_solve(lambda s: np.full_like(s, 2.0), 1.5, np.linspace(0, 1, 11), nodes=200)
    const_err = float(np.max(np.abs(const - 2.0 / 1.5**2)))
    return SuiteResult("green", worst <= 1e-6 and const_err <= 1e-8,
                       {"max_error": worst, "constant_source_error": const_err})


def steady_suite(spp: SteadyProfileParams | None = None) -> SuiteResult:
    spp = spp or SteadyProfileParams(gamma=2.0, delta=1.0, P=1.0, K1=1.0)
    report = steady_residuals(spp)
    return SuiteResult("steady", report.max <= 1e-8, report.to_dict())


def picard_suite() -> SuiteResult:
    """Short-horizon contraction and agreement of the limit with the direct solver."""
    params, funcs, init = figure1_preset()
    mesh = Mesh(50)
    T, m = 0.025, 50
    last, norms = run_picard(params, funcs, init, mesh, T, m, 6)
    report = contraction_report(norms, T, m, mesh.n_cells)
    traj = simulate(params, funcs, init, SolverConfig(dt_max=T / m, t_end=T), mesh=mesh)
    final = traj.final
    gap = max(float(np.max(np.abs(last.u[-1] - final.u))),
              float(np.max(np.abs(last.b[-1] - final.b))))
    return SuiteResult("picard", report.contractive and gap <= 1e-10,
                       {"ratios": report.ratios, "gap_to_direct": gap})


SUITES = {
    "positivity": positivity_suite,
    "mass_balance": mass_balance_suite,
    "conservation": conservation_suite,
    "symmetry": symmetry_suite,
    "averages": averages_suite,
    "green": green_suite,
    "steady": steady_suite,
    "picard": picard_suite,
}
assert tuple(SUITES) == CHECK_SUITES


def thread_cap(default: int | None = None) -> int:
    raw = os.environ.get("CHEMOFLUX_THREADS")
    if raw:
        try:
            n = int(raw)
        except ValueError:
            n = 0
        if n >= 1:
            return n
    return default or os.cpu_count() or 1


def _run_one(name, seed):
    fn = SUITES[name]
    kwargs = {"seed": seed} if name in ("positivity", "green") else {}
    try:
        return fn(**kwargs)
    except Exception as exc:  # a crashing suite is a failed suite
        return SuiteResult(name, False, {"error": f"{type(exc).__name__}: {exc}"})


def run_checks(suites=CHECK_SUITES, seed: int = 0, threads: int | None = None) -> list:
    unknown = [s for s in suites if s not in SUITES]
    if unknown:
        raise ValueError(f"unknown suites {unknown}")
    workers = max(1, min(threads or thread_cap(), len(suites) or 1))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda s: _run_one(s, seed), suites))
