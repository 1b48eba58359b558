"""Manufactured solutions for convergence testing of the full nonlinear scheme.

The exact quadruple is built so that every boundary condition holds identically:
``u_x(1) = g(t)`` through a ``g(t) x^2 / 2`` term, ``-v_x(0) = h(b(0, t))`` through
``H(t) (1 - x)^2 / 2`` with ``H(t) = h(b(0, t))``, and cosine modes elsewhere. The
forcing is whatever is left over when the exact fields are substituted into the PDEs;
it is written out by hand here and cross-checked symbolically in the test suite.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .mesh import Mesh
from .model import Logistic, ModelFunctions, Parameters, Ramp, Saturating, State
from .solver import SolverConfig, step

# amplitudes of the cosine modes
AU, AV, AA, AB = 0.3, 0.25, 0.5, 0.4


def default_parameters() -> Parameters:
    return Parameters(d1=0.5, d2=0.4, d3=1.0, d4=0.8, alpha1=0.6, alpha2=0.5,
                      beta1=1.0, beta2=0.7, mu=0.3, mu_a=1.0, mu_b=0.5, k_capacity=2.0)


@dataclass(frozen=True)
class ManufacturedSolution:
    params: Parameters = field(default_factory=default_parameters)
    g0: float = 1.0
    tau: float = 1.0
    h0: float = 0.5
    rho0: float = 1.0
    f_rate: float = 1.0

    @property
    def funcs(self) -> ModelFunctions:
        return ModelFunctions(rho=Saturating(self.rho0),
                              f=Logistic(self.f_rate, self.params.k_capacity),
                              h=Saturating(self.h0), g=Ramp(self.g0, self.tau))

    # time profiles
    def _g(self, t):
        return -self.g0 * math.expm1(-t / self.tau), self.g0 / self.tau * math.exp(-t / self.tau)

    def _H(self, t):
        b0 = 1.0 + AB * math.exp(-t / 2)
        b0_t = -0.5 * AB * math.exp(-t / 2)
        H = self.h0 * b0 / (1.0 + b0)
        return H, self.h0 / (1.0 + b0) ** 2 * b0_t

    def _fields(self, t, x):
        """Values and derivatives of the exact fields: name -> (f, f_t, f_x, f_xx)."""
        x = np.asarray(x, dtype=np.float64)
        c, s = np.cos(np.pi * x), np.sin(np.pi * x)
        pi = np.pi
        eu = math.exp(-t)
        g, g_t = self._g(t)
        H, H_t = self._H(t)
        eb = math.exp(-t / 2)
        ca, sa = math.cos(t), math.sin(t)
        return {
            "u": (1 + AU * c * eu + g * x**2 / 2,
                  -AU * c * eu + g_t * x**2 / 2,
                  -AU * pi * s * eu + g * x,
                  -AU * pi**2 * c * eu + g),
            "v": (1.2 - AV * c * eu + H * (1 - x) ** 2 / 2,
                  AV * c * eu + H_t * (1 - x) ** 2 / 2,
                  AV * pi * s * eu - H * (1 - x),
                  AV * pi**2 * c * eu + H),
            "a": (1 + AA * c * ca,
                  -AA * c * sa,
                  -AA * pi * s * ca,
                  -AA * pi**2 * c * ca),
            "b": (1 + AB * c * eb,
                  -0.5 * AB * c * eb,
                  -AB * pi * s * eb,
                  -AB * pi**2 * c * eb),
        }

    def exact(self, t: float, x) -> dict:
        return {k: v[0] for k, v in self._fields(t, x).items()}

    def exact_state(self, t: float, mesh: Mesh) -> State:
        e = self.exact(t, mesh.cell_centers)
        return State(t, e["u"], e["v"], e["a"], e["b"], mesh=mesh)

    def forcing(self, t: float, x) -> dict:
        p = self.params
        F = self._fields(t, x)
        u, u_t, u_x, u_xx = F["u"]
        v, v_t, v_x, v_xx = F["v"]
        a, a_t, a_x, a_xx = F["a"]
        b, b_t, b_x, b_xx = F["b"]
        funcs = self.funcs
        return {
            "u": u_t - p.d1 * u_xx + p.alpha1 * (u_x * a_x + u * a_xx) + p.mu * u,
            "v": v_t - p.d2 * v_xx + p.alpha2 * (v_x * b_x + v * b_xx) - funcs.rho(b) * funcs.f(v),
            "a": a_t - p.d3 * a_xx - p.beta1 * v + p.mu_a * a,
            "b": b_t - p.d4 * b_xx - p.beta2 * u + p.mu_b * b,
        }


def mms_error(ms: ManufacturedSolution, n_cells: int, dt: float, t_end: float,
              scheme: str = "central") -> float:
    """Largest discrete L2 error over the four fields at ``t_end`` with a fixed step."""
    steps = max(1, round(t_end / dt))
    dt = t_end / steps
    mesh = Mesh(n_cells)
    config = SolverConfig(dt_max=dt, t_end=t_end, advection_scheme=scheme)
    state = ms.exact_state(0.0, mesh)
    funcs = ms.funcs
    for k in range(steps):
        state = step(state, ms.params, funcs, config, dt, forcing=ms.forcing, step_index=k + 1)
    exact = ms.exact(t_end, mesh.cell_centers)
    return max(mesh.l2_norm(getattr(state, k) - exact[k]) for k in "uvab")


@dataclass
class ConvergenceResult:
    kind: str
    scheme: str
    steps: list
    errors: list
    orders: list
    fitted_order: float

    @property
    def min_order(self) -> float:
        return min(self.orders)

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["min_order"] = self.min_order
        return d


def _orders(h, err):
    orders = [math.log(e0 / e1) / math.log(h0 / h1)
              for h0, h1, e0, e1 in zip(h, h[1:], err, err[1:])]
    fitted = float(np.polyfit(np.log(h), np.log(err), 1)[0])
    return orders, fitted


def spatial_convergence(ms: ManufacturedSolution | None = None, cells=(20, 40, 80, 160),
                        scheme: str = "central", t_end: float = 0.1,
                        dt_factor: float | None = None) -> ConvergenceResult:
    """Refine the mesh with ``dt`` tied to it so the time error shrinks at the spatial rate.

    Central fluxes are second order in space, so ``dt = dt_factor * dx^2``; upwind is
    first order and uses ``dt = dt_factor * dx``.
    """
    ms = ms or ManufacturedSolution()
    second = scheme == "central"
    if dt_factor is None:
        dt_factor = 0.5 if second else 0.05
    dxs = [1.0 / n for n in cells]
    errors = [mms_error(ms, n, dt_factor * (dx**2 if second else dx), t_end, scheme)
              for n, dx in zip(cells, dxs)]
    orders, fitted = _orders(dxs, errors)
    return ConvergenceResult("space", scheme, dxs, errors, orders, fitted)


def temporal_convergence(ms: ManufacturedSolution | None = None,
                         dts=(0.04, 0.02, 0.01, 0.005), n_cells: int = 400,
                         scheme: str = "central", t_end: float = 0.4) -> ConvergenceResult:
    """Refine ``dt`` on a mesh fine enough that the spatial error is negligible."""
    ms = ms or ManufacturedSolution()
    errors = [mms_error(ms, n_cells, dt, t_end, scheme) for dt in dts]
    orders, fitted = _orders(list(dts), errors)
    return ConvergenceResult("time", scheme, list(dts), errors, orders, fitted)
