"""Successive approximation on a fixed space-time grid.

Each iterate holds the four fields at ``time_steps + 1`` equally spaced times on
[0, T]. One Picard step solves two decoupled linear problems per time step:

* the chemicals ``a``, ``b`` with sources built from ``v``, ``u`` of the previous iterate;
* the cells ``u``, ``v`` drifting along the freshly computed ``a``, ``b``, with the
  kinetic term ``rho(b_new) f(v_prev)``.

Every linear solve goes through the solver's transport kernel, so a fixed point of the
iteration is exactly the direct solver's trajectory for the same constant ``dt``.
Memory use is ``4 * (time_steps + 1) * n_cells`` doubles per iterate.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .errors import DivergenceError
from .mesh import Mesh
from .model import InitialData, ModelFunctions, Parameters, State
from .solver import SCHEMES, split_reaction, transport_step

RATIO_THRESHOLD = 1.0
REFERENCE_RATIO = 0.5


@dataclass(frozen=True)
class PicardIterate:
    index: int
    u: np.ndarray
    v: np.ndarray
    a: np.ndarray
    b: np.ndarray
    horizon: float
    mesh: Mesh
    previous: "PicardIterate | None" = field(default=None, repr=False)

    def __post_init__(self):
        shape = self.u.shape
        if len(shape) != 2 or shape[1] != self.mesh.n_cells or shape[0] < 2:
            raise ValueError("iterate arrays must have shape (time_steps + 1, n_cells)")
        for name in "uvab":
            arr = getattr(self, name)
            if arr.shape != shape:
                raise ValueError(f"field {name} has shape {arr.shape}, expected {shape}")
            if not np.all(np.isfinite(arr)):
                raise DivergenceError(f"non-finite {name} in Picard iterate {self.index}",
                                      field=name)

    @property
    def time_steps(self) -> int:
        return self.u.shape[0] - 1

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.time_steps + 1)

    def slice(self, k: int) -> State:
        t = self.horizon * k / self.time_steps
        return State(t, self.u[k], self.v[k], self.a[k], self.b[k], mesh=self.mesh)


def seed_iterate(init, mesh: Mesh, horizon: float, time_steps: int) -> PicardIterate:
    """Constant-in-time extension of the initial data."""
    if time_steps < 1:
        raise ValueError("time_steps must be >= 1")
    if not horizon > 0:
        raise ValueError("horizon must be > 0")
    state = init.evaluate(mesh) if isinstance(init, InitialData) else init
    arrays = {k: np.tile(getattr(state, k), (time_steps + 1, 1)) for k in "uvab"}
    return PicardIterate(0, horizon=horizon, mesh=mesh, **arrays)


def picard_step(prev: PicardIterate, params: Parameters, funcs: ModelFunctions,
                scheme: str = "upwind") -> PicardIterate:
    """Next iterate on the grid of ``prev``; the initial slice is carried over."""
    if scheme not in SCHEMES:
        raise ValueError(f"unknown advection scheme {scheme!r}")
    mesh = prev.mesh
    dx = mesh.dx
    m = prev.time_steps
    dt = prev.horizon / m
    out = {k: np.empty_like(getattr(prev, k)) for k in "uvab"}
    for k in "uvab":
        out[k][0] = getattr(prev, k)[0]

    for j in range(m):
        out["a"][j + 1] = transport_step(out["a"][j], dt, dx, params.d3, decay=params.mu_a,
                                         source=params.beta1 * prev.v[j])
        out["b"][j + 1] = transport_step(out["b"][j], dt, dx, params.d4, decay=params.mu_b,
                                         source=params.beta2 * prev.u[j])
    for j in range(m):
        t_new = (j + 1) * dt
        a_j, b_j = out["a"][j], out["b"][j]
        out["u"][j + 1] = transport_step(
            out["u"][j], dt, dx, params.d1, decay=params.mu, chemical=a_j,
            alpha=params.alpha1, scheme=scheme,
            influx_right=params.d1 * float(funcs.g(t_new)),
        )
        v_prev = prev.v[j]
        production, loss_rate = split_reaction(v_prev, funcs.rho(b_j) * funcs.f(v_prev))
        out["v"][j + 1] = transport_step(
            out["v"][j], dt, dx, params.d2, implicit_rate=loss_rate, chemical=b_j,
            alpha=params.alpha2, scheme=scheme, source=production,
            influx_left=params.d2 * float(funcs.h(b_j[0])),
        )
    return PicardIterate(prev.index + 1, horizon=prev.horizon, mesh=mesh,
                         previous=replace(prev, previous=None), **out)


def composite_norm(du, dv, da, db, mesh: Mesh) -> float:
    """Max over time slices of max(|da_x|, |db_x|, |du|, |dv|) for space-time differences."""
    arrays = [np.atleast_2d(np.asarray(x, dtype=np.float64)) for x in (du, dv, da, db)]
    if any(x.shape[-1] != mesh.n_cells for x in arrays):
        raise ValueError("difference arrays must have n_cells columns")
    du, dv, da, db = arrays
    l2 = lambda x: np.sqrt(mesh.dx * np.sum(x * x, axis=1))
    h1 = lambda x: np.sqrt(mesh.dx * np.sum((np.diff(x, axis=1) / mesh.dx) ** 2, axis=1))
    per_slice = np.maximum.reduce([h1(da), h1(db), l2(du), l2(dv)])
    return float(np.max(per_slice))


def iterate_distance(x: PicardIterate, y: PicardIterate) -> float:
    return composite_norm(x.u - y.u, x.v - y.v, x.a - y.a, x.b - y.b, x.mesh)


@dataclass
class ContractionReport:
    horizon: float
    time_steps: int
    n_cells: int
    norms: list
    ratios: list
    verdict: str
    ratio_threshold: float = RATIO_THRESHOLD
    reference_ratio: float = REFERENCE_RATIO
    warnings: list = field(default_factory=list)

    @property
    def contractive(self) -> bool:
        return self.verdict == "contractive"

    @property
    def max_ratio(self) -> float:
        tail = self.ratios[1:]
        return max(tail) if tail else math.nan

    def to_dict(self) -> dict:
        d = asdict(self)
        d["max_ratio"] = self.max_ratio
        return d


def _ratio(num, den):
    if math.isinf(num):
        return math.inf
    if den == 0.0:
        return 0.0 if num == 0.0 else math.inf
    return num / den


def contraction_report(norms, horizon, time_steps, n_cells,
                       threshold: float = RATIO_THRESHOLD) -> ContractionReport:
    ratios = [_ratio(norms[i], norms[i - 1]) for i in range(1, len(norms))]
    ok = all(r <= threshold for r in ratios[1:])
    verdict = "contractive" if ok else "not-contractive-at-this-T"
    return ContractionReport(horizon, time_steps, n_cells, list(norms), ratios, verdict,
                             ratio_threshold=threshold)


def run_picard(params, funcs, init, mesh: Mesh, horizon: float, time_steps: int,
               iterations: int, scheme: str = "upwind"):
    """Iterate ``iterations`` times from the seed; returns (last iterate, difference norms).

    If an iterate stops being finite the remaining norms are recorded as inf and the
    last finite iterate is returned.
    """
    current = seed_iterate(init, mesh, horizon, time_steps)
    norms = []
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(iterations):
            try:
                nxt = picard_step(current, params, funcs, scheme=scheme)
            except DivergenceError:
                norms.extend([math.inf] * (iterations - len(norms)))
                break
            norms.append(iterate_distance(nxt, current))
            current = nxt
    return current, norms


def run_contraction_study(params: Parameters, funcs: ModelFunctions, init, horizons,
                          iterations: int, mesh: Mesh, time_steps: int = 100,
                          scheme: str = "upwind") -> list:
    """One ContractionReport per horizon, each on a grid of ``time_steps`` steps.

    A warning is attached when a shorter horizon ends with a larger terminal ratio
    than a longer one; small-T contraction is only guaranteed to exist, not to be
    monotone in T.
    """
    if iterations < 4:
        raise ValueError("iterations must be >= 4")
    reports = []
    for T in horizons:
        _, norms = run_picard(params, funcs, init, mesh, float(T), time_steps, iterations, scheme)
        reports.append(contraction_report(norms, float(T), time_steps, mesh.n_cells))
    ordered = sorted(reports, key=lambda r: r.horizon)
    for short, long in zip(ordered, ordered[1:]):
        if short.ratios[-1] > long.ratios[-1]:
            short.warnings.append(
                f"terminal ratio {short.ratios[-1]:.3g} at T={short.horizon:g} exceeds "
                f"{long.ratios[-1]:.3g} at T={long.horizon:g}"
            )
    return reports
