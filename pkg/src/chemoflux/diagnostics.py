"""Per-state monitors: positivity, L1 averages, norms, energy and aggregation metrics."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .model import ModelFunctions, Parameters, State

RIGHT_REGION = 0.8


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    min_u: float
    min_v: float
    min_a: float
    min_b: float
    imin_u: int
    imin_v: int
    imin_a: int
    imin_b: int
    ubar: float
    vbar: float
    abar: float
    bbar: float
    l2_u: float
    l2_v: float
    h1_a: float
    h1_b: float
    energy: float
    u_right: float
    v_left: float
    b_left: float
    flux_u: float
    flux_v: float
    argmax_u: float
    argmax_v: float
    right_mass_u: float
    right_mass_v: float

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def columns(cls) -> list:
        return [f.name for f in fields(cls)]


def _right_fraction(mesh, values):
    total = mesh.integrate(values)
    if total == 0.0:
        return 0.0
    return mesh.interval_integral(values, RIGHT_REGION, 1.0) / total


def record(state: State, params: Parameters, funcs: ModelFunctions) -> DiagnosticsRecord:
    mesh = state.mesh
    x = mesh.cell_centers
    iu, iv, ia, ib = (int(np.argmin(arr)) for arr in (state.u, state.v, state.a, state.b))
    l2_u = mesh.l2_norm(state.u)
    l2_v = mesh.l2_norm(state.v)
    h1_a = mesh.h1_seminorm(state.a)
    h1_b = mesh.h1_seminorm(state.b)
    b_left = float(state.b[0])
    return DiagnosticsRecord(
        t=float(state.t),
        min_u=float(state.u[iu]), min_v=float(state.v[iv]),
        min_a=float(state.a[ia]), min_b=float(state.b[ib]),
        imin_u=iu, imin_v=iv, imin_a=ia, imin_b=ib,
        ubar=mesh.integrate(state.u), vbar=mesh.integrate(state.v),
        abar=mesh.integrate(state.a), bbar=mesh.integrate(state.b),
        l2_u=l2_u, l2_v=l2_v, h1_a=h1_a, h1_b=h1_b,
        energy=l2_u**2 + l2_v**2 + h1_a**2 + h1_b**2,
        u_right=float(state.u[-1]), v_left=float(state.v[0]), b_left=b_left,
        flux_u=params.d1 * float(funcs.g(state.t)),
        flux_v=params.d2 * float(funcs.h(b_left)),
        argmax_u=float(x[np.argmax(state.u)]),
        argmax_v=float(x[np.argmax(state.v)]),
        right_mass_u=_right_fraction(mesh, state.u),
        right_mass_v=_right_fraction(mesh, state.v),
    )


@dataclass
class PositivityVerdict:
    passed: bool
    tol: float
    worst: float
    field: str | None = None
    cell: int | None = None
    x: float | None = None
    t: float | None = None

    def __bool__(self):
        return self.passed

    def to_dict(self) -> dict:
        return asdict(self)


def positivity_verdict(traj, tol: float = 1e-12) -> PositivityVerdict:
    """Pass iff every recorded field minimum is >= -tol; reports the first violation."""
    worst = math.inf
    for rec in traj.diagnostics:
        for name in "uvab":
            value = getattr(rec, f"min_{name}")
            worst = min(worst, value)
    for rec in traj.diagnostics:
        for name in "uvab":
            value = getattr(rec, f"min_{name}")
            if value < -tol:
                cell = getattr(rec, f"imin_{name}")
                return PositivityVerdict(
                    False, tol, worst, field=name, cell=cell,
                    x=float(traj.mesh.cell_centers[cell]), t=rec.t,
                )
    return PositivityVerdict(True, tol, worst)


NORM_KEYS = ("ubar", "vbar", "abar", "bbar", "l2_u", "l2_v", "h1_a", "h1_b", "energy")


@dataclass
class BoundednessReport:
    sups: dict
    argsup_t: dict
    finite: bool
    energy_growth: float
    warnings: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def boundedness_report(traj, growth_factor: float = 1e3) -> BoundednessReport:
    """Suprema over the recorded diagnostics and an advisory blow-up flag.

    A warning is attached when the energy grows by more than ``growth_factor`` relative
    to its initial value; it never turns into a failure.
    """
    recs = traj.diagnostics
    sups, argsup = {}, {}
    for key in NORM_KEYS:
        values = np.array([getattr(r, key) for r in recs])
        i = int(np.argmax(values))
        sups[key] = float(values[i])
        argsup[key] = float(recs[i].t)
    finite = all(math.isfinite(v) for v in sups.values())
    e0 = recs[0].energy
    emax = sups["energy"]
    growth = emax / e0 if e0 > 0 else (math.inf if emax > 0 else 1.0)
    warnings = []
    if not finite:
        warnings.append("non-finite norm recorded")
    if growth > growth_factor:
        warnings.append(
            f"possible blow-up: energy grew by a factor {growth:.3g} (> {growth_factor:g})"
        )
    return BoundednessReport(sups, argsup, finite, growth, warnings)
