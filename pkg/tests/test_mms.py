import math

import numpy as np
import pytest
import sympy as sp

from chemoflux.mesh import Mesh
from chemoflux.mms import (AA, AB, AU, AV, ManufacturedSolution, mms_error,
                           spatial_convergence, temporal_convergence)


@pytest.fixture(scope="module")
def symbolic():
    """The exact fields and forcing rebuilt symbolically from scratch."""
    ms = ManufacturedSolution()
    p = ms.params
    x, t = sp.symbols("x t", real=True)
    g = ms.g0 * (1 - sp.exp(-t / ms.tau))
    b = 1 + AB * sp.cos(sp.pi * x) * sp.exp(-t / 2)
    b_left = b.subs(x, 0)
    H = ms.h0 * b_left / (1 + b_left)
    u = 1 + AU * sp.cos(sp.pi * x) * sp.exp(-t) + g * x**2 / 2
    v = sp.Rational(6, 5) - AV * sp.cos(sp.pi * x) * sp.exp(-t) + H * (1 - x) ** 2 / 2
    a = 1 + AA * sp.cos(sp.pi * x) * sp.cos(t)
    rho = ms.rho0 * b / (1 + b)
    f = ms.f_rate * v * (1 - v / p.k_capacity)
    forcing = {
        "u": sp.diff(u, t) - p.d1 * sp.diff(u, x, 2)
        + p.alpha1 * sp.diff(u * sp.diff(a, x), x) + p.mu * u,
        "v": sp.diff(v, t) - p.d2 * sp.diff(v, x, 2)
        + p.alpha2 * sp.diff(v * sp.diff(b, x), x) - rho * f,
        "a": sp.diff(a, t) - p.d3 * sp.diff(a, x, 2) - p.beta1 * v + p.mu_a * a,
        "b": sp.diff(b, t) - p.d4 * sp.diff(b, x, 2) - p.beta2 * u + p.mu_b * b,
    }
    fields = {"u": u, "v": v, "a": a, "b": b}
    return ms, x, t, fields, forcing, g, H


def test_exact_fields_match_symbolic(symbolic):
    ms, x, t, fields, _, _, _ = symbolic
    xs = np.linspace(0, 1, 13)
    for tv in (0.0, 0.37, 1.9):
        num = ms.exact(tv, xs)
        for k, expr in fields.items():
            fn = sp.lambdify(x, expr.subs(t, tv), "numpy")
            np.testing.assert_allclose(num[k], fn(xs) * np.ones_like(xs), rtol=1e-13, atol=1e-13)


def test_forcing_matches_symbolic(symbolic):
    ms, x, t, _, forcing, _, _ = symbolic
    xs = np.linspace(0, 1, 17)
    for tv in (0.0, 0.25, 1.3):
        num = ms.forcing(tv, xs)
        for k, expr in forcing.items():
            fn = sp.lambdify(x, expr.subs(t, tv), "numpy")
            np.testing.assert_allclose(num[k], fn(xs) * np.ones_like(xs), rtol=1e-12,
                                       atol=1e-12)


def test_boundary_conditions_hold(symbolic):
    ms, x, t, fields, _, g, H = symbolic
    for tv in (0.0, 0.5, 2.0):
        ux = sp.diff(fields["u"], x)
        vx = sp.diff(fields["v"], x)
        assert float((ux.subs({x: 1, t: tv}) - g.subs(t, tv))) == pytest.approx(0, abs=1e-14)
        assert float(ux.subs({x: 0, t: tv})) == pytest.approx(0, abs=1e-14)
        assert float(vx.subs({x: 1, t: tv})) == pytest.approx(0, abs=1e-14)
        assert float(-vx.subs({x: 0, t: tv}) - H.subs(t, tv)) == pytest.approx(0, abs=1e-14)
        for k in "ab":
            d = sp.diff(fields[k], x)
            assert float(d.subs({x: 0, t: tv})) == pytest.approx(0, abs=1e-14)
            assert float(d.subs({x: 1, t: tv})) == pytest.approx(0, abs=1e-14)


def test_exact_state_is_positive():
    ms = ManufacturedSolution()
    for tv in (0.0, 1.0, 5.0):
        st = ms.exact_state(tv, Mesh(64))
        assert all(np.all(st.fields[k] > 0) for k in "uvab")


def test_error_is_small_and_shrinks():
    ms = ManufacturedSolution()
    coarse = mms_error(ms, 20, 0.5 / 400, 0.05)
    fine = mms_error(ms, 40, 0.5 / 1600, 0.05)
    assert coarse < 1e-2
    assert 3.0 < coarse / fine < 5.0


def test_quick_spatial_orders():
    res = spatial_convergence(cells=(10, 20, 40), t_end=0.05)
    assert res.kind == "space" and len(res.orders) == 2
    assert res.min_order > 1.8
    up = spatial_convergence(cells=(20, 40, 80), scheme="upwind", t_end=0.05)
    assert up.min_order > 0.8
    d = up.to_dict()
    assert d["min_order"] == up.min_order and d["scheme"] == "upwind"


def test_quick_temporal_orders():
    res = temporal_convergence(dts=(0.04, 0.02, 0.01), n_cells=200, t_end=0.2)
    assert res.kind == "time"
    assert res.min_order > 0.85
    assert math.isfinite(res.fitted_order)
