import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from chemoflux.errors import DivergenceError
from chemoflux.mesh import Mesh
from chemoflux.model import (Constant, ConstantInit, GaussianInit, InitialData, ModelFunctions,
                             Parameters, Saturating, Zero, figure1_preset)
from chemoflux.picard import (PicardIterate, _ratio, composite_norm, contraction_report,
                              iterate_distance, picard_step, run_contraction_study, run_picard,
                              seed_iterate)
from chemoflux.solver import SolverConfig, simulate


def test_zero_is_a_fixed_point():
    p = figure1_preset()[0]
    funcs = ModelFunctions(rho=Constant(1.0), f=Zero(), h=Zero(), g=Zero())
    init = InitialData(*(ConstantInit(0.0) for _ in range(4)))
    seed = seed_iterate(init, Mesh(10), 0.1, 5)
    nxt = picard_step(seed, p, funcs)
    for k in "uvab":
        assert np.all(getattr(nxt, k) == 0.0)
    assert nxt.index == 1 and nxt.previous.index == 0


def test_decoupled_converges_in_one_step():
    p = Parameters(0.5, 0.5, 1, 1, 0, 0, 0, 0, 0.2, 1, 1)
    funcs = ModelFunctions(rho=Constant(1.0), f=Zero(), h=Saturating(1.0), g=Constant(0.0))
    init = InitialData(GaussianInit(0.3, 0.1, 1.0), GaussianInit(0.7, 0.1, 1.0),
                       GaussianInit(0.5, 0.2, 1.0), ConstantInit(0.5))
    _, norms = run_picard(p, funcs, init, Mesh(20), 0.1, 10, 4)
    assert norms[0] > 0
    assert max(norms[1:]) <= 1e-14 * norms[0]
    report = contraction_report(norms, 0.1, 10, 20)
    assert report.contractive and report.max_ratio <= 1e-12


def test_figure1_norms_decrease_after_second_iterate():
    p, funcs, init = figure1_preset()
    _, norms = run_picard(p, funcs, init, Mesh(100), 0.05, 100, 6)
    assert all(b < a for a, b in zip(norms[1:], norms[2:]))
    report = contraction_report(norms, 0.05, 100, 100)
    assert report.contractive
    # Cauchy envelope with the largest observed ratio
    r = report.max_ratio
    for n in range(2, len(norms)):
        assert norms[n] <= norms[1] * r ** (n - 1) * (1 + 1e-12)


def test_limit_equals_direct_solver():
    p, funcs, init = figure1_preset()
    mesh = Mesh(40)
    T, m = 0.025, 50
    last, norms = run_picard(p, funcs, init, mesh, T, m, 8)
    traj = simulate(p, funcs, init, SolverConfig(dt_max=T / m, t_end=T), mesh=mesh)
    for k in "uvab":
        np.testing.assert_allclose(getattr(last, k)[-1], getattr(traj.final, k),
                                   rtol=1e-12, atol=1e-14)


def test_large_horizon_is_reported_not_raised():
    p, funcs, init = figure1_preset()
    reports = run_contraction_study(p, funcs, init, [10.0], 4, Mesh(20), time_steps=20)
    assert reports[0].verdict in ("contractive", "not-contractive-at-this-T")
    assert len(reports[0].norms) == 4


def test_contraction_study_shapes():
    p, funcs, init = figure1_preset()
    reports = run_contraction_study(p, funcs, init, [0.05, 0.025], 4, Mesh(20), time_steps=10)
    assert [r.horizon for r in reports] == [0.05, 0.025]
    for r in reports:
        assert len(r.norms) == 4 and len(r.ratios) == 3
        assert r.ratio_threshold == 1.0 and r.reference_ratio == 0.5
        assert all(x >= 0 for x in r.ratios)
        assert "max_ratio" in r.to_dict()


def test_study_requires_four_iterations():
    p, funcs, init = figure1_preset()
    with pytest.raises(ValueError):
        run_contraction_study(p, funcs, init, [0.1], 3, Mesh(10))


def test_ratio_edge_cases():
    assert _ratio(0.0, 0.0) == 0.0
    assert _ratio(1.0, 0.0) == math.inf
    assert _ratio(math.inf, math.inf) == math.inf
    assert _ratio(1.0, 4.0) == 0.25


def test_verdict_threshold():
    assert contraction_report([1.0, 0.5, 0.4, 0.3], 1.0, 1, 4).contractive
    # the first ratio is not part of the verdict
    assert contraction_report([1.0, 2.0, 1.0, 0.5], 1.0, 1, 4).contractive
    assert not contraction_report([1.0, 0.5, 0.6, 0.3], 1.0, 1, 4).contractive


def test_composite_norm_examples():
    m = Mesh(16)
    z = np.zeros((3, 16))
    assert composite_norm(z, z, z, z, m) == 0.0
    assert composite_norm(np.full((3, 16), 2.0), z, z, z, m) == pytest.approx(2.0)


@given(arrays(np.float64, (4, 3, 12), elements=st.floats(-5, 5)))
def test_composite_norm_brute_force(diffs):
    m = Mesh(12)
    du, dv, da, db = diffs
    expect = 0.0
    for j in range(3):
        expect = max(expect, m.l2_norm(du[j]), m.l2_norm(dv[j]), m.h1_seminorm(da[j]),
                     m.h1_seminorm(db[j]))
    assert composite_norm(du, dv, da, db, m) == pytest.approx(expect, rel=1e-12, abs=1e-300)


def test_composite_norm_shape_check():
    with pytest.raises(ValueError):
        composite_norm(np.zeros(5), np.zeros(5), np.zeros(5), np.zeros(5), Mesh(4))


def test_iterate_validation():
    m = Mesh(4)
    ok = np.zeros((3, 4))
    with pytest.raises(ValueError):
        PicardIterate(0, ok, ok, ok, np.zeros((2, 4)), 1.0, m)
    bad = ok.copy()
    bad[1, 2] = np.nan
    with pytest.raises(DivergenceError):
        PicardIterate(0, ok, bad, ok, ok, 1.0, m)
    it = PicardIterate(0, ok, ok, ok, ok, 1.0, m)
    assert it.time_steps == 2
    np.testing.assert_allclose(it.times, [0.0, 0.5, 1.0])
    assert it.slice(1).t == 0.5


def test_seed_and_step_errors():
    _, funcs, init = figure1_preset()
    with pytest.raises(ValueError):
        seed_iterate(init, Mesh(4), 1.0, 0)
    with pytest.raises(ValueError):
        seed_iterate(init, Mesh(4), 0.0, 3)
    seed = seed_iterate(init, Mesh(4), 1.0, 3)
    with pytest.raises(ValueError):
        picard_step(seed, figure1_preset()[0], funcs, scheme="weno")


def test_distance_is_symmetric():
    p, funcs, init = figure1_preset()
    seed = seed_iterate(init, Mesh(10), 0.1, 5)
    nxt = picard_step(seed, p, funcs)
    assert iterate_distance(seed, nxt) == iterate_distance(nxt, seed) > 0
