"""Finite-volume IMEX time stepping for the cross-chemotaxis system.

Every field goes through one transport kernel: implicit diffusion and linear decay
(one tridiagonal solve with ghost-cell Neumann rows), explicit chemotactic flux in
conservative form, explicit sources and boundary influx. Because the two
cell/chemical pairs share that kernel, swapping (u, a) with (v, b) under a matching
parameter swap reproduces the swapped solution bit for bit.
"""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _kernels
from .errors import DivergenceError, IllConditionedError, MeshError
from .mesh import Mesh
from .model import InitialData, ModelFunctions, Parameters, State

log = logging.getLogger(__name__)

SCHEMES = ("upwind", "central")
VELOCITY_FLOOR = 1e-14


@dataclass(frozen=True)
class SolverConfig:
    dt_max: float
    t_end: float
    cfl_safety: float = 0.5
    advection_scheme: str = "upwind"
    positivity_tol: float = 1e-12
    snapshot_every: int = 1
    diagnostics_every: int = 1

    def __post_init__(self):
        if not (self.dt_max > 0 and math.isfinite(self.dt_max)):
            raise ValueError(f"dt_max must be > 0, got {self.dt_max}")
        if not (self.t_end > 0 and math.isfinite(self.t_end)):
            raise ValueError(f"t_end must be > 0, got {self.t_end}")
        if not 0 < self.cfl_safety <= 1:
            raise ValueError(f"cfl_safety must lie in (0, 1], got {self.cfl_safety}")
        if self.advection_scheme not in SCHEMES:
            raise ValueError(f"advection_scheme must be one of {SCHEMES}")
        if self.positivity_tol < 0:
            raise ValueError("positivity_tol must be >= 0")
        for name in ("snapshot_every", "diagnostics_every"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ValueError(f"{name} must be an integer >= 1, got {value}")
            object.__setattr__(self, name, int(value))

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Trajectory:
    snapshots: list
    diagnostics: list
    params: Parameters
    funcs: ModelFunctions
    config: SolverConfig
    steps: int = 0
    dt_min: float = math.inf
    dt_max_used: float = 0.0

    @property
    def final(self) -> State:
        return self.snapshots[-1]

    @property
    def mesh(self) -> Mesh:
        return self.snapshots[0].mesh


# ---------------------------------------------------------------------------
# linear algebra


def _offdiag(x, n, name):
    x = np.asarray(x, dtype=np.float64)
    if x.shape == (n,):
        return x
    if x.shape == (n - 1,):
        return x
    raise ValueError(f"{name} must have length {n - 1} or {n}")


def solve_tridiagonal(lower, diag, upper, rhs) -> np.ndarray:
    """Solve ``T x = rhs`` for a diagonally dominant tridiagonal ``T``.

    Every row must be weakly dominant and every irreducible block (rows linked by
    nonzero off-diagonals) must contain a strictly dominant row; this covers the
    backward-Euler Neumann matrices and guarantees a nonsingular ``T`` for which the
    unpivoted Thomas sweep is stable. ``lower`` and ``upper`` hold the sub- and
    super-diagonal, either with length n - 1 or padded to length n (``lower[0]`` and
    ``upper[-1]`` are then ignored).
    """
    diag = np.asarray(diag, dtype=np.float64)
    rhs = np.asarray(rhs, dtype=np.float64)
    n = diag.size
    if rhs.shape != (n,):
        raise ValueError("rhs must match diag in length")
    lower = _offdiag(lower, n, "lower")
    upper = _offdiag(upper, n, "upper")
    sub = lower[1:] if lower.size == n else lower
    sup = upper[:-1] if upper.size == n else upper

    off = np.zeros(n)
    off[1:] += np.abs(sub)
    off[:-1] += np.abs(sup)
    if not _dominant(diag, sub, sup, off):
        raise IllConditionedError("tridiagonal matrix is not diagonally dominant")
    if n == 1:
        return rhs / diag
    x = _thomas(sub, diag, sup, rhs)
    residual = diag * x
    residual[1:] += sub * x[:-1]
    residual[:-1] += sup * x[1:]
    residual -= rhs
    # normwise backward error: |T x - rhs| <= tol (|T| |x| + |rhs|)
    scale = float(np.max(np.abs(diag) + off)) * float(np.max(np.abs(x)))
    scale = max(scale + float(np.max(np.abs(rhs))), np.finfo(float).tiny)
    if np.max(np.abs(residual)) > 1e-10 * scale:
        raise IllConditionedError("tridiagonal solve residual exceeds tolerance")
    return x


def _dominant(diag, sub, sup, off) -> bool:
    if not (np.all(np.isfinite(diag)) and np.all(np.isfinite(off))):
        return False
    mag = np.abs(diag)
    if np.any(mag < off):
        return False
    strict = mag > off
    # blocks end where the coupling to the next row vanishes in both directions
    cut = np.flatnonzero((sub == 0) & (sup == 0)) + 1
    return all(block.any() for block in np.split(strict, cut))


def _thomas(sub, diag, sup, rhs):
    return _kernels.thomas(sub, diag, sup, rhs)


# ---------------------------------------------------------------------------
# discrete operators


def chemotactic_face_flux(density, chemical, alpha: float, mesh: Mesh,
                          scheme: str = "upwind") -> np.ndarray:
    """Face flux ``alpha * c * chemical_x``; boundary faces carry zero flux."""
    density = mesh.check(density, "density")
    chemical = mesh.check(chemical, "chemical")
    return _face_flux(density, chemical, alpha, mesh.dx, scheme)


def _face_flux(c, chem, alpha, dx, scheme):
    flux = np.zeros(c.size + 1)
    if alpha == 0.0:
        return flux
    w = (chem[1:] - chem[:-1]) / dx
    left = c[:-1]
    right = c[1:]
    mean = 0.5 * (left + right)
    if scheme == "upwind":
        face = np.where(w > 0, left, np.where(w < 0, right, mean))
    elif scheme == "central":
        face = mean
    else:
        raise ValueError(f"unknown advection scheme {scheme!r}")
    flux[1:-1] = alpha * w * face
    return flux


def transport_step(c, dt, dx, diffusivity, *, decay=0.0, implicit_rate=None,
                   chemical=None, alpha=0.0, scheme="upwind", source=None,
                   influx_left=0.0, influx_right=0.0) -> np.ndarray:
    """One IMEX update of a single field.

    Solves ``(I - dt D L + dt (decay + implicit_rate)) c_new = c + dt * explicit`` where
    ``L`` is the three-point Neumann Laplacian and ``explicit`` collects the negative
    divergence of the chemotactic flux, ``source`` and the boundary influx per unit length.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown advection scheme {scheme!r}")
    empty = _kernels.EMPTY
    return _kernels.transport(
        np.ascontiguousarray(c, dtype=np.float64), float(dt), float(dx), float(diffusivity),
        float(decay),
        empty if implicit_rate is None else np.ascontiguousarray(implicit_rate, dtype=np.float64),
        empty if chemical is None else np.ascontiguousarray(chemical, dtype=np.float64),
        float(alpha), scheme == "upwind",
        empty if source is None else np.ascontiguousarray(source, dtype=np.float64),
        float(influx_left), float(influx_right),
    )


def split_reaction(v, rate):
    """Split ``rate`` (the kinetic term evaluated at ``v``) into an explicit production
    part and an implicit per-capita loss so that the update stays nonnegative."""
    v = np.ascontiguousarray(v, dtype=np.float64)
    rate = np.asarray(rate, dtype=np.float64)
    if rate.shape != v.shape:
        rate = np.broadcast_to(rate, v.shape)
    rate = np.ascontiguousarray(rate)
    return _kernels.split_reaction(v, rate)


# ---------------------------------------------------------------------------
# time stepping


def cfl_dt(state: State, params: Parameters, config: SolverConfig) -> float:
    dx = state.mesh.dx
    vmax = VELOCITY_FLOOR
    if params.alpha1 != 0.0:
        vmax = max(vmax, params.alpha1 * _kernels.max_abs_diff(state.a) / dx)
    if params.alpha2 != 0.0:
        vmax = max(vmax, params.alpha2 * _kernels.max_abs_diff(state.b) / dx)
    return min(config.dt_max, config.cfl_safety * dx / vmax)


def step(state: State, params: Parameters, funcs: ModelFunctions, config: SolverConfig,
         dt: float, forcing=None, step_index: int | None = None) -> State:
    """Advance ``state`` by ``dt``.

    ``forcing``, if given, is a callable ``(t, x) -> dict`` of extra explicit sources per
    field (used for manufactured solutions).
    """
    mesh = state.mesh
    dx = mesh.dx
    t_new = state.t + dt
    scheme = config.advection_scheme
    u, v, a, b = state.u, state.v, state.a, state.b

    extra = forcing(t_new, mesh.cell_centers) if forcing is not None else {}
    reaction = funcs.rho(b) * funcs.f(v)
    production, loss_rate = split_reaction(v, reaction)
    if "v" in extra:
        production = production + _as_source(extra["v"], mesh)

    upwind = scheme == "upwind"
    empty = _kernels.EMPTY
    u_src = _as_source(extra.get("u"), mesh)
    u_new = _kernels.transport(u, dt, dx, params.d1, params.mu, empty, a, params.alpha1,
                               upwind, u_src, 0.0, params.d1 * float(funcs.g(t_new)))
    v_new = _kernels.transport(v, dt, dx, params.d2, 0.0, loss_rate, b, params.alpha2,
                               upwind, production, params.d2 * float(funcs.h(b[0])), 0.0)
    a_src = params.beta1 * v
    b_src = params.beta2 * u
    if "a" in extra:
        a_src = a_src + extra["a"]
    if "b" in extra:
        b_src = b_src + extra["b"]
    a_new = _kernels.transport(a, dt, dx, params.d3, params.mu_a, empty, empty, 0.0,
                               upwind, a_src, 0.0, 0.0)
    b_new = _kernels.transport(b, dt, dx, params.d4, params.mu_b, empty, empty, 0.0,
                               upwind, b_src, 0.0, 0.0)

    # a single sum is finite iff every entry is (short of overflow, which is divergence too)
    with np.errstate(over="ignore", invalid="ignore"):
        total = float(u_new.sum() + v_new.sum() + a_new.sum() + b_new.sum())
    if not math.isfinite(total):
        for name, arr in (("u", u_new), ("v", v_new), ("a", a_new), ("b", b_new)):
            if not np.all(np.isfinite(arr)):
                raise DivergenceError(
                    f"non-finite {name} at step {step_index} (t={t_new:.6g})",
                    field=name, step=step_index, t=t_new,
                )
        raise DivergenceError(f"field overflow at step {step_index} (t={t_new:.6g})",
                              step=step_index, t=t_new)
    return State.trusted(t_new, u_new, v_new, a_new, b_new, mesh)


def _as_source(values, mesh):
    if values is None:
        return _kernels.EMPTY
    return np.ascontiguousarray(np.broadcast_to(values, (mesh.n_cells,)), dtype=np.float64)


def simulate(params: Parameters, funcs: ModelFunctions, init, config: SolverConfig,
             mesh: Mesh | None = None, forcing=None, record=None) -> Trajectory:
    """Integrate from ``init`` (InitialData on ``mesh``, or a State) to ``config.t_end``.

    The step size is ``cfl_dt`` every step, and the last step is clipped to land on
    ``t_end``. Snapshots and diagnostics are taken at step 0, every configured number
    of steps, and at the final time.
    """
    from .diagnostics import record as default_record

    record = record or default_record
    if isinstance(init, InitialData):
        if mesh is None:
            raise MeshError("simulate needs a mesh when given InitialData")
        state = init.evaluate(mesh)
    else:
        state = init
    traj = Trajectory([state], [record(state, params, funcs)], params, funcs, config)

    t_end = config.t_end
    k = 0
    while state.t < t_end:
        dt = cfl_dt(state, params, config)
        remaining = t_end - state.t
        last = remaining <= dt * (1.0 + 1e-9)
        if last:
            dt = remaining
        try:
            state = step(state, params, funcs, config, dt, forcing=forcing, step_index=k + 1)
        except DivergenceError as exc:
            exc.t = state.t + dt
            raise
        k += 1
        if last:
            state = State.trusted(t_end, state.u, state.v, state.a, state.b, state.mesh)
        traj.dt_min = min(traj.dt_min, dt) if not last else traj.dt_min
        traj.dt_max_used = max(traj.dt_max_used, dt)
        if last or k % config.snapshot_every == 0:
            traj.snapshots.append(state)
        if last or k % config.diagnostics_every == 0:
            traj.diagnostics.append(record(state, params, funcs))
    traj.steps = k
    if traj.dt_min == math.inf:
        traj.dt_min = traj.dt_max_used
    return traj
