"""Closed-form and semi-analytic companions of the simulator.

* averages: exact traces of the spatial means of u and b, the mean-difference decay
  between two runs, the v-mean balance residual and its growth envelopes;
* Green's functions of the Neumann problem ``-a'' + eta^2 a = s`` with a quadrature
  solver and a finite-difference oracle;
* the cosh^2 family of lowest-order steady profiles, their residuals, and a
  pseudo-time relaxation that finds actual steady states of the scaled system.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import AssumptionError, BoundUnavailableError, NoSteadyStateError
from .mesh import Mesh
from .model import (Constant, InitialData, Linear, ModelFunctions, Parameters, Ramp, State,
                    Table, Zero)

QUAD_TOL = 1e-10


# ---------------------------------------------------------------------------
# quadrature


def adaptive_simpson(func, lo: float, hi: float, tol: float = QUAD_TOL,
                     max_depth: int = 50) -> float:
    """Adaptive Simpson rule with absolute tolerance ``tol`` (Richardson-corrected)."""
    if hi == lo:
        return 0.0
    if hi < lo:
        return -adaptive_simpson(func, hi, lo, tol, max_depth)

    def simpson(a, fa, b, fb):
        m = 0.5 * (a + b)
        fm = func(m)
        return m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    fa, fb = func(lo), func(hi)
    m, fm, whole = simpson(lo, fa, hi, fb)
    total = 0.0
    stack = [(lo, fa, hi, fb, m, fm, whole, tol, 0)]
    while stack:
        a, fa, b, fb, m, fm, whole, eps, depth = stack.pop()
        lm, flm, left = simpson(a, fa, m, fm)
        rm, frm, right = simpson(m, fm, b, fb)
        delta = left + right - whole
        if depth >= max_depth or abs(delta) <= 15.0 * eps:
            total += left + right + delta / 15.0
        else:
            stack.append((a, fa, m, fm, lm, flm, left, eps / 2.0, depth + 1))
            stack.append((m, fm, b, fb, rm, frm, right, eps / 2.0, depth + 1))
    return total


def _breakpoints(g, lo, hi):
    points = [lo]
    if isinstance(g, Table):
        points += [x for x in g.xs if lo < x < hi]
    return points + [hi]


def _integrate(func, g, lo, hi, tol=QUAD_TOL):
    pts = _breakpoints(g, lo, hi)
    pieces = len(pts) - 1
    return sum(adaptive_simpson(func, a, b, tol / pieces) for a, b in zip(pts, pts[1:]))


def phi(c: float, t):
    """``(exp(c t) - 1) / c``, continued by ``t`` at c = 0."""
    t = np.asarray(t, dtype=np.float64)
    if c == 0.0:
        return t
    return np.expm1(c * t) / c


# ---------------------------------------------------------------------------
# scaling


@dataclass(frozen=True)
class ScaledSystem:
    delta: float
    gamma: float
    g1: float
    g2: float
    mu_a: float
    mu_b: float
    k: float
    time_scale: float

    def to_dict(self) -> dict:
        return asdict(self)


def scale_system(params: Parameters, U: float, V: float, A: float, B: float,
                 L: float = 1.0) -> ScaledSystem:
    """Dimensionless groups for equal chemical diffusivities and D1 = D2 = k D3."""
    for name, value in zip("UVABL", (U, V, A, B, L)):
        if not value > 0:
            raise ValueError(f"scale {name} must be > 0, got {value}")
    if not math.isclose(params.d3, params.d4, rel_tol=1e-12):
        raise AssumptionError(f"scaling needs d3 == d4, got {params.d3} and {params.d4}")
    if not math.isclose(params.d1, params.d2, rel_tol=1e-12):
        raise AssumptionError(f"scaling needs d1 == d2, got {params.d1} and {params.d2}")
    if params.d3 <= 0 or params.d1 <= 0:
        raise AssumptionError("scaling needs positive diffusivities")
    k = params.d1 / params.d3
    T = L * L / params.d3
    return ScaledSystem(
        delta=params.alpha1 * A / (k * params.d3),
        gamma=params.alpha2 * B / (k * params.d3),
        g1=params.beta1 * T * V / A,
        g2=params.beta2 * T * U / B,
        mu_a=params.mu_a * T,
        mu_b=params.mu_b * T,
        k=k,
        time_scale=T,
    )


# ---------------------------------------------------------------------------
# averages


@dataclass(frozen=True)
class AverageDynamics:
    ubar0: float
    vbar0: float
    abar0: float
    bbar0: float
    params: Parameters
    g: object

    def __post_init__(self):
        for name in ("ubar0", "vbar0", "abar0", "bbar0"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    @classmethod
    def from_state(cls, state: State, params: Parameters, g) -> "AverageDynamics":
        m = state.mesh
        return cls(m.integrate(state.u), m.integrate(state.v), m.integrate(state.a),
                   m.integrate(state.b), params, g)


def _scalar_or_array(fn, t):
    t_arr = np.asarray(t, dtype=np.float64)
    if np.any(t_arr < 0):
        raise ValueError("t must be >= 0")
    out = np.array([fn(float(s)) for s in t_arr.ravel()]).reshape(t_arr.shape)
    return float(out) if out.ndim == 0 else out


def _forced_u(t: float, mu: float, g) -> float:
    """``int_0^t exp(-mu (t - s)) g(s) ds``."""
    if t == 0.0 or isinstance(g, Zero):
        return 0.0
    if isinstance(g, Constant):
        return g.c * float(phi(-mu, t))
    if isinstance(g, Ramp):
        return g.g0 * (float(phi(-mu, t))
                       - math.exp(-mu * t) * float(phi(mu - 1.0 / g.tau, t)))
    if isinstance(g, Linear):
        # int_0^t e^{-mu (t-s)} s ds = (t - phi(-mu, t)) / mu, or t^2 / 2 at mu = 0
        if mu == 0.0:
            return g.coef * t * t / 2.0
        return g.coef * (t - float(phi(-mu, t))) / mu
    return _integrate(lambda s: math.exp(-mu * (t - s)) * float(g(s)), g, 0.0, t)


def ubar_exact(t, dyn: AverageDynamics):
    """Mean of u: ``ubar0 e^{-mu t} + D1 int_0^t e^{-mu (t-s)} g(s) ds``."""
    p = dyn.params
    return _scalar_or_array(
        lambda s: dyn.ubar0 * math.exp(-p.mu * s) + p.d1 * _forced_u(s, p.mu, dyn.g), t)


def bbar_exact(t, dyn: AverageDynamics):
    """Mean of b, driven by the exact mean of u."""
    p = dyn.params
    mu, mub = p.mu, p.mu_b

    def kernel(r):
        return math.exp(-mub * r) * float(phi(mub - mu, r))

    def one(s):
        value = dyn.bbar0 * math.exp(-mub * s)
        value += p.beta2 * dyn.ubar0 * kernel(s)
        if p.beta2 != 0.0 and p.d1 != 0.0 and not isinstance(dyn.g, Zero) and s > 0:
            value += p.beta2 * p.d1 * _integrate(
                lambda q: float(dyn.g(q)) * kernel(s - q), dyn.g, 0.0, s)
        return value

    return _scalar_or_array(one, t)


def _linear_source_weights(c: float, h: float):
    """Exact weights for ``int_0^h e^{-c (h - q)} (w0 (1 - q/h) + w1 q/h) dq``."""
    A = float(phi(-c, h))
    ch = c * h
    if abs(ch) < 1e-4:
        B = h * (0.5 - ch / 6.0 + ch * ch / 24.0)
    else:
        B = (h - A) / ch
    return A - B, B


def abar_exact(t, dyn: AverageDynamics, vbar_times, vbar_values):
    """Mean of a, driven by a supplied v-mean trace taken as piecewise linear in time."""
    p = dyn.params
    times = np.asarray(vbar_times, dtype=np.float64)
    values = np.asarray(vbar_values, dtype=np.float64)
    if times.ndim != 1 or times.shape != values.shape or times.size < 2:
        raise ValueError("vbar trace needs matching 1-D times and values (>= 2 points)")
    if np.any(np.diff(times) <= 0) or times[0] != 0.0:
        raise ValueError("vbar trace times must start at 0 and increase strictly")
    t_arr = np.asarray(t, dtype=np.float64)
    if np.any(t_arr < 0) or np.any(t_arr > times[-1]):
        raise ValueError("t must lie inside the vbar trace")
    grid = np.union1d(times, t_arr.ravel())
    v = np.interp(grid, times, values)
    a = np.empty_like(grid)
    a[0] = dyn.abar0
    for k in range(grid.size - 1):
        h = grid[k + 1] - grid[k]
        w0, w1 = _linear_source_weights(p.mu_a, h)
        a[k + 1] = math.exp(-p.mu_a * h) * a[k] + p.beta1 * (w0 * v[k] + w1 * v[k + 1])
    out = np.interp(t_arr, grid, a)
    return float(out) if out.ndim == 0 else out


def average_difference_decay(t, du0: float, db0: float, params: Parameters):
    """Mean differences (u~, b~) between two runs that differ only in initial data."""
    mu, mub, beta2 = params.mu, params.mu_b, params.beta2
    t = np.asarray(t, dtype=np.float64)
    du = du0 * np.exp(-mu * t)
    db = db0 * np.exp(-mub * t) + beta2 * du0 * np.exp(-mu * t) * phi(mu - mub, t)
    if du.ndim == 0:
        return float(du), float(db)
    return du, db


def difference_decay_envelope(t, du0: float, db0: float, params: Parameters):
    """``C0 (e^{-mu t} + e^{-mu_b t})`` bounding |b~| with C0 from the formula's coefficients.

    For mu == mu_b the formula is ``(db0 + beta2 du0 t) e^{-mu t}``; then C0 uses
    sup_t (1 + beta2 |du0| t e^{-mu t} / |.|) via the peak value 1 / (e mu).
    """
    mu, mub, beta2 = params.mu, params.mu_b, params.beta2
    t = np.asarray(t, dtype=np.float64)
    if mu != mub:
        c = beta2 * du0 / (mu - mub)
        c0 = max(abs(db0 + c), abs(c))
        return c0 * (np.exp(-mu * t) + np.exp(-mub * t))
    if mu == 0.0:
        return np.full_like(t, math.inf)
    # t e^{-mu t} <= 2/(e mu) e^{-mu t / 2}; keep a pure e^{-mu t} bound on a half-rate
    return (abs(db0) + beta2 * abs(du0) * 2.0 / (math.e * mu)) * 2.0 * np.exp(-mu * t / 2.0)


@dataclass
class ResidualTrace:
    times: np.ndarray
    residuals: np.ndarray

    @property
    def max(self) -> float:
        return float(np.max(np.abs(self.residuals)))


def vbar_residual(traj, params: Parameters, funcs: ModelFunctions) -> ResidualTrace:
    """Central-difference rate of the v-mean minus its balance ``D2 h(b(0)) + int rho f``."""
    snaps = traj.snapshots
    if len(snaps) < 3:
        raise ValueError("vbar_residual needs at least 3 snapshots")
    mesh = snaps[0].mesh
    t = np.array([s.t for s in snaps])
    vbar = np.array([mesh.integrate(s.v) for s in snaps])
    times, res = [], []
    for k in range(1, len(snaps) - 1):
        rate = (vbar[k + 1] - vbar[k - 1]) / (t[k + 1] - t[k - 1])
        s = snaps[k]
        rhs = params.d2 * float(funcs.h(s.b[0])) + mesh.integrate(funcs.rho(s.b) * funcs.f(s.v))
        times.append(t[k])
        res.append(rate - rhs)
    return ResidualTrace(np.array(times), np.array(res))


def _sup(preset, name):
    value = preset.sup
    if not math.isfinite(value):
        raise BoundUnavailableError(f"{name} preset {preset.kind!r} has no finite bound")
    return value


@dataclass(frozen=True)
class GrowthBounds:
    vbar: float
    abar: float
    abar_corrected: float


def vbar_abar_growth_bounds(t, params: Parameters, funcs: ModelFunctions,
                            vbar0: float = 0.0, abar0: float = 0.0) -> GrowthBounds:
    """Linear envelope of the v-mean and quadratic envelope of the a-mean.

    ``abar`` is the envelope ``abar0 + (D2 h_M + rho_M f_M) t^2 / 2``.
    ``abar_corrected`` integrates ``abar' <= beta1 vbar`` against the v envelope, which
    adds the beta1 factor and the ``vbar0 t`` term.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    rate = params.d2 * _sup(funcs.h, "h") + _sup(funcs.rho, "rho") * _sup(funcs.f, "f")
    vb = vbar0 + rate * t
    ab = abar0 + 0.5 * rate * t * t
    corrected = abar0 + params.beta1 * (vbar0 * t + 0.5 * rate * t * t)
    return GrowthBounds(vb, ab, corrected)


def g_l2_norm(g) -> float:
    """L2 norm of g over (0, inf); inf unless g vanishes at infinity."""
    if isinstance(g, Zero):
        return 0.0
    if isinstance(g, Table):
        if g.ys[-1] != 0.0:
            return math.inf
        total = 0.0
        xs = (0.0,) + g.xs if g.xs[0] > 0 else g.xs
        ys = (g.ys[0],) + g.ys if g.xs[0] > 0 else g.ys
        for x0, x1, y0, y1 in zip(xs, xs[1:], ys, ys[1:]):
            if x1 <= 0:
                continue
            lo = max(x0, 0.0)
            y_lo = np.interp(lo, (x0, x1), (y0, y1))
            total += (x1 - lo) * (y_lo * y_lo + y_lo * y1 + y1 * y1) / 3.0
        return math.sqrt(total)
    if isinstance(g, (Constant,)) and g.c == 0.0:
        return 0.0
    if isinstance(g, Ramp) and g.g0 == 0.0:
        return 0.0
    if isinstance(g, Linear) and g.coef == 0.0:
        return 0.0
    return math.inf


def ubar_time_invariant_bound(dyn: AverageDynamics) -> float:
    """``ubar0 + D1 |g|_{L2(0,inf)} / sqrt(2 mu)`` (Cauchy-Schwarz on the convolution)."""
    p = dyn.params
    norm = g_l2_norm(dyn.g)
    if norm == 0.0:
        return dyn.ubar0
    if p.mu <= 0:
        return math.inf
    return dyn.ubar0 + p.d1 * norm / math.sqrt(2.0 * p.mu)


# ---------------------------------------------------------------------------
# Green's functions


def _check_eta(eta):
    if not (eta > 0 and math.isfinite(eta)):
        raise ValueError(f"eta must be > 0, got {eta}")


def greens_function_neumann(x, s, eta: float):
    """Kernel of ``-a'' + eta^2 a = src`` on (0, 1) with ``a'(0) = a'(1) = 0``."""
    _check_eta(eta)
    x = np.asarray(x, dtype=np.float64)
    s = np.asarray(s, dtype=np.float64)
    lo = np.minimum(x, s)
    hi = np.maximum(x, s)
    return np.cosh(eta * lo) * np.cosh(eta * (1.0 - hi)) / (eta * math.sinh(eta))


def greens_function_printed(x, s, eta: float):
    """The piecewise kernel as typeset in the source derivation, kept for comparison only.

    It does not solve the Neumann problem; see tests/test_analysis.py.
    """
    _check_eta(eta)
    x = np.asarray(x, dtype=np.float64)
    s = np.asarray(s, dtype=np.float64)
    th = math.tanh(eta)

    def branch(p, q):
        sh = np.sinh(eta * p)
        return ((np.cosh(eta * p) - th * sh) / (eta * th * (sh * sh - sh + 1.0))
                * np.cosh(eta * q))

    return np.where(x < s, branch(s, x), branch(x, s))


def greens_function(x, s, eta: float, form: str = "neumann"):
    if form == "neumann":
        return greens_function_neumann(x, s, eta)
    if form == "printed":
        return greens_function_printed(x, s, eta)
    raise ValueError(f"unknown Green's function form {form!r}")


def green_solve(source, eta: float, x, nodes: int = 2000, scale: float = 1.0,
                form: str = "neumann"):
    """``scale * int_0^1 G(x, s) source(s) ds`` by Gauss-Legendre split at the kink s = x.

    ``nodes`` is the total node count, half on each side of x.
    """
    _check_eta(eta)
    if nodes < 4:
        raise ValueError("nodes must be >= 4")
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    z, w = np.polynomial.legendre.leggauss(nodes // 2)
    out = np.empty_like(x)
    for i, xi in enumerate(x):
        total = 0.0
        for lo, hi in ((0.0, xi), (xi, 1.0)):
            if hi <= lo:
                continue
            s = 0.5 * (hi - lo) * z + 0.5 * (hi + lo)
            total += 0.5 * (hi - lo) * np.dot(w, greens_function(xi, s, eta, form) * source(s))
        out[i] = scale * total
    return out


def bvp_oracle(source, eta: float, n: int = 2000, scale: float = 1.0,
               richardson: bool = False):
    """Node-based second-order finite differences for ``-a'' + eta^2 a = scale * source``.

    Returns (nodes, values) on ``n + 1`` equally spaced nodes; Neumann ends use
    mirrored ghost nodes. With ``richardson`` the solve is repeated on 2n intervals
    and the two are combined to cancel the h^2 error term.
    """
    _check_eta(eta)
    x, coarse = _fd_neumann(source, eta, n, scale)
    if not richardson:
        return x, coarse
    _, fine = _fd_neumann(source, eta, 2 * n, scale)
    return x, (4.0 * fine[::2] - coarse) / 3.0


def _fd_neumann(source, eta, n, scale):
    from .solver import solve_tridiagonal

    h = 1.0 / n
    x = np.linspace(0.0, 1.0, n + 1)
    diag = np.full(n + 1, 2.0 / h**2 + eta**2)
    lower = np.full(n + 1, -1.0 / h**2)
    upper = np.full(n + 1, -1.0 / h**2)
    upper[0] = -2.0 / h**2
    lower[-1] = -2.0 / h**2
    return x, solve_tridiagonal(lower, diag, upper, scale * source(x))


# ---------------------------------------------------------------------------
# lowest-order steady profiles


@dataclass(frozen=True)
class SteadyProfileParams:
    gamma: float
    delta: float
    P: float
    K1: float
    x0: float = 0.0
    C: float = 1.0
    D: float = 1.0
    G1: float = 1.0
    G2: float = 1.0
    eta_a: float = 1.0
    eta_b: float = 1.0
    Q: float = 0.0

    def __post_init__(self):
        for name in ("gamma", "delta", "P", "K1", "C", "D"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be > 0, got {value}")

    @property
    def R(self) -> float:
        return self.gamma * self.P

    @property
    def theta_b(self) -> float:
        return self.gamma * math.sqrt(self.P / 2.0)

    @property
    def theta_a(self) -> float:
        return self.delta * math.sqrt(self.K1 / 2.0)

    def to_dict(self) -> dict:
        return asdict(self)


def steady_profiles(spp: SteadyProfileParams, x) -> dict:
    """Pointwise closed forms of u, v, a, b (the v amplitude uses the b phase theta_b)."""
    y = np.asarray(x, dtype=np.float64) + spp.x0
    ca = np.cosh(spp.theta_a * y)
    cb = np.cosh(spp.theta_b * y)
    return {
        "u": spp.C * ca * ca,
        "v": spp.D * cb * cb,
        "a": (2.0 / spp.delta) * np.log(ca),
        "b": (2.0 / spp.gamma) * np.log(cb),
    }


def steady_order0(spp: SteadyProfileParams, mesh: Mesh) -> State:
    prof = steady_profiles(spp, mesh.cell_centers)
    return State(0.0, prof["u"], prof["v"], prof["a"], prof["b"], mesh=mesh)


@dataclass
class SteadyResidualReport:
    b_ode: float
    a_ode: float
    b_first_integral: float
    a_first_integral: float
    u_exponential: float
    v_exponential: float
    n_points: int
    fd_step: float
    profile_u_exponential: float | None = None
    profile_v_exponential: float | None = None

    @property
    def max(self) -> float:
        values = [self.b_ode, self.a_ode, self.b_first_integral, self.a_first_integral,
                  self.u_exponential, self.v_exponential]
        values += [v for v in (self.profile_u_exponential, self.profile_v_exponential)
                   if v is not None]
        return max(values)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["max"] = self.max
        return d


def _fd_derivatives(fn, x, h):
    """Fourth-order central first and second derivatives of a pointwise function."""
    f = {k: fn(x + k * h) for k in (-2, -1, 0, 1, 2)}
    d1 = (f[-2] - 8.0 * f[-1] + 8.0 * f[1] - f[2]) / (12.0 * h)
    d2 = (-f[-2] + 16.0 * f[-1] - 30.0 * f[0] + 16.0 * f[1] - f[2]) / (12.0 * h * h)
    return f[0], d1, d2


def steady_residuals(spp: SteadyProfileParams, profiles: State | None = None,
                     n_points: int = 10_000, fd_step: float = 2e-3) -> SteadyResidualReport:
    """Residuals of the auxiliary ODEs, first integrals and exponential relations.

    Derivatives come from five-point stencils of the closed forms on ``n_points``
    equally spaced points of [0, 1]. If ``profiles`` is given, the exponential
    relations are also checked on its cell values.
    """
    x = np.linspace(0.0, 1.0, n_points)
    b, b1, b2 = _fd_derivatives(lambda z: steady_profiles(spp, z)["b"], x, fd_step)
    a, a1, a2 = _fd_derivatives(lambda z: steady_profiles(spp, z)["a"], x, fd_step)
    prof = steady_profiles(spp, x)
    g, d = spp.gamma, spp.delta
    report = SteadyResidualReport(
        b_ode=float(np.max(np.abs(b2 - spp.R * np.exp(-g * b)))),
        a_ode=float(np.max(np.abs(a2 - d * spp.K1 * np.exp(-d * a)))),
        b_first_integral=float(np.max(np.abs(0.5 * b1**2 + spp.P * np.exp(-g * b) - spp.P))),
        a_first_integral=float(np.max(np.abs(0.5 * a1**2 + spp.K1 * np.exp(-d * a) - spp.K1))),
        u_exponential=float(np.max(np.abs(prof["u"] - spp.C * np.exp(d * prof["a"]))
                                   / prof["u"])),
        v_exponential=float(np.max(np.abs(prof["v"] - spp.D * np.exp(g * prof["b"]))
                                   / prof["v"])),
        n_points=n_points,
        fd_step=fd_step,
    )
    if profiles is not None:
        report.profile_u_exponential = float(np.max(
            np.abs(profiles.u - spp.C * np.exp(d * profiles.a)) / np.abs(profiles.u)))
        report.profile_v_exponential = float(np.max(
            np.abs(profiles.v - spp.D * np.exp(g * profiles.b)) / np.abs(profiles.v)))
    return report


# ---------------------------------------------------------------------------
# relaxation to steady state


@dataclass(frozen=True)
class RelaxConfig:
    dt_max: float = 1e-2
    tol: float = 1e-10
    max_steps: int = 5_000_000
    cfl_safety: float = 0.5
    advection_scheme: str = "central"
    window: float = 1.0
    fix_mass: bool = True

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class RelaxResult:
    state: State
    steps: int
    pseudo_time: float
    rate: float

    def to_dict(self) -> dict:
        return {"steps": self.steps, "pseudo_time": self.pseudo_time, "rate": self.rate}


def relax_parameters(scaled: ScaledSystem, epsilon: float = 0.0,
                     mu_tilde: float = 0.0) -> Parameters:
    return Parameters(
        d1=1.0, d2=1.0, d3=1.0, d4=1.0,
        alpha1=scaled.delta, alpha2=scaled.gamma,
        beta1=scaled.g1, beta2=scaled.g2,
        mu=epsilon * mu_tilde, mu_a=scaled.mu_a, mu_b=scaled.mu_b,
    )


def steady_relax(scaled: ScaledSystem, init, mesh: Mesh, epsilon: float = 0.0,
                 Q: float = 0.0, config: RelaxConfig = RelaxConfig(),
                 mu_tilde: float = 0.0, rho_tilde: float = 0.0) -> RelaxResult:
    """March the scaled evolution system in pseudo-time until it stops changing.

    The march is the solver's step sequence run in a compiled loop (see
    ``relax_reference`` for the same march through ``solver.step``). Unit diffusivities, affinities (Delta, Gamma), productions (G1, G2), decays
    (mu_a, mu_b), death ``epsilon * mu_tilde`` for u and linear growth
    ``epsilon * rho_tilde`` for v. The u flux at x = 1 is the constant Q and the v flux
    at x = 0 is zero. Converged when the largest field change across a pseudo-time
    window of at least ``config.window``, divided by the window length, is <= tol.
    A per-step rate would stall at the roundoff floor of the implicit solve, which
    grows like 1/dx^2. When the u or v total is invariant (no death, no influx, no
    growth) it is restored after every step (``config.fix_mass``); otherwise rounding
    bias drifts the total and, close to a bifurcation, the profile with it.
    """
    from . import _kernels
    from .errors import DivergenceError
    from .solver import SCHEMES

    if Q < 0:
        raise ValueError("Q must be >= 0")
    if config.advection_scheme not in SCHEMES:
        raise ValueError(f"unknown advection scheme {config.advection_scheme!r}")
    params = relax_parameters(scaled, epsilon, mu_tilde)
    state = init.evaluate(mesh) if isinstance(init, InitialData) else init
    d = np.array([params.d1, params.d2, params.d3, params.d4])
    u, v, a, b, steps, t, rate = _kernels.relax_march(
        *(np.array(state.fields[k], dtype=np.float64) for k in "uvab"),
        mesh.dx, d, params.alpha1, params.alpha2, params.beta1, params.beta2,
        params.mu, params.mu_a, params.mu_b, epsilon * rho_tilde, float(Q),
        config.dt_max, config.cfl_safety, config.advection_scheme == "upwind",
        config.tol, config.max_steps, config.window,
        config.fix_mass and params.mu == 0.0 and Q == 0.0,
        config.fix_mass and epsilon * rho_tilde == 0.0,
    )
    if steps < 0:
        raise DivergenceError(f"relaxation diverged at pseudo-step {-steps}", step=-steps, t=t)
    if not rate <= config.tol:
        raise NoSteadyStateError(
            f"no steady state after {config.max_steps} pseudo-steps (rate {rate:.3g})"
        )
    return RelaxResult(State(state.t + t, u, v, a, b, mesh=mesh), steps, t, rate)


def relax_reference(scaled: ScaledSystem, init, mesh: Mesh, steps: int, epsilon: float = 0.0,
                    Q: float = 0.0, config: RelaxConfig = RelaxConfig(),
                    mu_tilde: float = 0.0, rho_tilde: float = 0.0) -> State:
    """``steps`` pseudo-steps of the relaxation system through ``solver.step``.

    No mass restoration is applied, so this matches ``steady_relax`` run with
    ``fix_mass=False``.
    """
    from .solver import SolverConfig, cfl_dt, step

    params = relax_parameters(scaled, epsilon, mu_tilde)
    funcs = ModelFunctions(rho=Constant(1.0), f=Linear(epsilon * rho_tilde), h=Zero(),
                           g=Constant(Q))
    cfg = SolverConfig(dt_max=config.dt_max, t_end=1.0, cfl_safety=config.cfl_safety,
                       advection_scheme=config.advection_scheme)
    state = init.evaluate(mesh) if isinstance(init, InitialData) else init
    for k in range(steps):
        state = step(state, params, funcs, cfg, cfl_dt(state, params, cfg), step_index=k + 1)
    return state


def exponential_relation_error(state: State, delta: float) -> float:
    """``max |u - u(0) exp(delta (a - a(0)))|`` with u(0), a(0) taken from the first cell."""
    return float(np.max(np.abs(state.u - state.u[0] * np.exp(delta * (state.a - state.a[0])))))
