import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chemoflux.analysis import SteadyProfileParams, steady_order0
from chemoflux.diagnostics import (DiagnosticsRecord, boundedness_report, positivity_verdict,
                                   record)
from chemoflux.mesh import Mesh
from chemoflux.model import (Constant, ConstantInit, CosineInit, GaussianInit, InitialData, Logistic,
                             ModelFunctions, Parameters, Ramp, Saturating, State, TableInit,
                             Zero, figure1_preset)
from chemoflux.solver import SolverConfig, simulate

ZERO_FUNCS = ModelFunctions(rho=Constant(1.0), f=Zero(), h=Zero(), g=Zero())


def test_zero_state_record():
    m = Mesh(10)
    z = np.zeros(10)
    p, funcs, _ = figure1_preset()
    rec = record(State(0.0, z, z, z, z, mesh=m), p, funcs)
    for key in ("min_u", "min_v", "min_a", "min_b", "ubar", "vbar", "abar", "bbar",
                "l2_u", "l2_v", "h1_a", "h1_b", "energy", "right_mass_u"):
        assert getattr(rec, key) == 0.0


def test_record_values():
    m = Mesh(100)
    x = m.cell_centers
    s = State(0.5, 1 + x, 2 * np.ones(100), x**2, 3 * x, mesh=m)
    p, funcs, _ = figure1_preset()
    rec = record(s, p, funcs)
    assert rec.ubar == pytest.approx(1.5)
    assert rec.l2_v == pytest.approx(2.0)
    assert rec.h1_b == pytest.approx(3.0, abs=0.05)
    assert rec.energy == pytest.approx(rec.l2_u**2 + rec.l2_v**2 + rec.h1_a**2 + rec.h1_b**2)
    assert rec.u_right == s.u[-1] and rec.v_left == 2.0 and rec.b_left == s.b[0]
    assert rec.flux_u == pytest.approx(0.1 * (1 - math.exp(-0.5)))
    assert rec.flux_v == pytest.approx(0.1 * s.b[0])
    assert rec.argmax_u == x[-1]
    assert rec.min_u == s.u[0] and rec.imin_u == 0
    assert set(rec.to_dict()) == set(DiagnosticsRecord.columns())


def test_cosh_profile_peaks_in_last_cell():
    m = Mesh(64)
    s = steady_order0(SteadyProfileParams(gamma=2.0, delta=1.0, P=1.0, K1=1.0), m)
    rec = record(s, *figure1_preset()[:2])
    assert rec.argmax_u == m.cell_centers[-1] and rec.argmax_v == m.cell_centers[-1]


@pytest.mark.parametrize("n", [10, 37, 200])
def test_uniform_right_mass(n):
    m = Mesh(n)
    s = State(0.0, np.full(n, 3.0), np.ones(n), np.zeros(n), np.zeros(n), mesh=m)
    rec = record(s, *figure1_preset()[:2])
    assert abs(rec.right_mass_u - 0.2) <= m.dx
    assert abs(rec.right_mass_v - 0.2) <= m.dx


def test_positivity_passes_on_zero_run():
    init = InitialData(*(ConstantInit(0.0) for _ in range(4)))
    p = figure1_preset()[0]
    traj = simulate(p, ZERO_FUNCS, init, SolverConfig(dt_max=1e-2, t_end=0.1), mesh=Mesh(8))
    verdict = positivity_verdict(traj)
    assert verdict and verdict.field is None


def _sharp_run(scheme):
    p = Parameters(d1=2e-2, d2=2e-2, d3=1, d4=1, alpha1=20, alpha2=20, beta1=1, beta2=1,
                   mu=0.1, mu_a=1, mu_b=1)
    init = InitialData(GaussianInit(0.3, 0.03, 1.0), GaussianInit(0.6, 0.03, 1.0),
                       TableInit((0, 1)), TableInit((1, 0)))
    return simulate(p, ZERO_FUNCS, init,
                    SolverConfig(dt_max=1e-3, t_end=0.01, advection_scheme=scheme),
                    mesh=Mesh(50))


def test_central_undershoot_is_located():
    verdict = positivity_verdict(_sharp_run("central"))
    assert not verdict
    assert verdict.field in "uv" and verdict.cell is not None and verdict.t > 0
    assert verdict.worst < -1e-12
    assert _sharp_run("upwind").diagnostics  # same data, upwind
    assert positivity_verdict(_sharp_run("upwind"))


def test_figure1_upwind_positive():
    p, funcs, init = figure1_preset()
    traj = simulate(p, funcs, init, SolverConfig(dt_max=1e-3, t_end=2.0, diagnostics_every=10),
                    mesh=Mesh(100))
    assert positivity_verdict(traj, 1e-12)
    report = boundedness_report(traj)
    assert report.finite and not report.warnings


def test_decoupled_decay_sups_at_start():
    p = Parameters(1, 1, 1, 1, 0, 0, 0, 0, 1, 1, 1)
    init = InitialData(GaussianInit(0.5, 0.1, 1.0), GaussianInit(0.2, 0.1, 1.0),
                       GaussianInit(0.7, 0.1, 1.0), GaussianInit(0.4, 0.1, 1.0))
    traj = simulate(p, ZERO_FUNCS, init, SolverConfig(dt_max=1e-3, t_end=0.2), mesh=Mesh(50))
    report = boundedness_report(traj)
    first = traj.diagnostics[0]
    for key, value in report.sups.items():
        # v has no decay term here, so its mean only stays put up to rounding
        assert value <= getattr(first, key) * (1 + 1e-12)
    assert report.finite and report.energy_growth <= 1 + 1e-12


def test_blow_up_warning_is_advisory():
    p = Parameters(d1=1e-3, d2=1e-3, d3=1.0, d4=1.0, alpha1=10.0, alpha2=10.0,
                   beta1=1e3, beta2=1e3, mu=1e-3, mu_a=1e-2, mu_b=1e-2)
    init = InitialData(CosineInit(0.05, 0.01), CosineInit(0.05, 0.01),
                       ConstantInit(0.0), ConstantInit(0.0))
    traj = simulate(p, ZERO_FUNCS, init, SolverConfig(dt_max=1e-2, t_end=0.2), mesh=Mesh(50))
    report = boundedness_report(traj)
    assert report.finite
    assert report.energy_growth > 1e3
    assert any("blow-up" in w for w in report.warnings)
    assert not boundedness_report(traj, growth_factor=10 * report.energy_growth).warnings


def test_ubar_nonincreasing_without_influx():
    p = Parameters(0.1, 0.1, 1, 1, 5, 5, 1, 1, 0.3, 1, 1)
    init = InitialData(GaussianInit(0.5, 0.1, 1.0), ConstantInit(1.0), ConstantInit(0.0),
                       ConstantInit(0.0))
    traj = simulate(p, ZERO_FUNCS, init, SolverConfig(dt_max=1e-3, t_end=0.5), mesh=Mesh(40))
    ubar = [r.ubar for r in traj.diagnostics]
    assert all(b < a for a, b in zip(ubar, ubar[1:]))
    ratio = ubar[1] / ubar[0]
    assert ratio == pytest.approx(1 / (1 + 0.3e-3), rel=1e-12)


@settings(max_examples=15)
@given(st.integers(0, 2**31))
def test_min_b_follows_min_u(seed):
    rng = np.random.default_rng(seed)
    p = Parameters(*(10 ** rng.uniform(-1, 1, 12)))
    funcs = ModelFunctions(rho=Saturating(1.0), f=Logistic(1.0, p.k_capacity),
                           h=Saturating(1.0), g=Ramp(1.0, 1.0))
    m = Mesh(24)
    s = State(0.0, *(rng.uniform(0, 2, 24) for _ in range(4)), mesh=m)
    traj = simulate(p, funcs, s, SolverConfig(dt_max=1e-2, t_end=0.2))
    for rec in traj.diagnostics:
        assert rec.min_u >= -1e-12
        assert rec.min_b >= 0.0
        assert rec.energy >= 0.0 and rec.ubar >= 0.0
