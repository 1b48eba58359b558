"""Parameters, model-function presets, initial data and the simulation state.

Model functions are closed tagged presets (plus a piecewise-linear table) rather than
arbitrary callables so that they can be validated against the standing assumptions
and serialized losslessly.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields
from typing import ClassVar

import numpy as np

from .errors import AssumptionError, ConfigError
from .mesh import Mesh

PARAM_NAMES = (
    "d1", "d2", "d3", "d4", "alpha1", "alpha2", "beta1", "beta2",
    "mu", "mu_a", "mu_b", "k_capacity",
)


@dataclass(frozen=True)
class Parameters:
    """Rate and diffusion constants of the four-field system.

    Negative or non-finite values are rejected at construction. Zeros are allowed so
    that decoupled or conservative variants can be built; ``validate`` reports them.
    """

    d1: float
    d2: float
    d3: float
    d4: float
    alpha1: float
    alpha2: float
    beta1: float
    beta2: float
    mu: float
    mu_a: float
    mu_b: float
    k_capacity: float = 1.0

    def __post_init__(self):
        for name in PARAM_NAMES:
            value = float(getattr(self, name))
            if not math.isfinite(value) or value < 0:
                raise AssumptionError(
                    f"assumption (1): parameter {name} must be a finite nonnegative number, got {value}"
                )
            object.__setattr__(self, name, value)

    def replace(self, **changes) -> "Parameters":
        return Parameters(**{**asdict(self), **changes})

    def to_dict(self) -> dict:
        return asdict(self)


# ---------------------------------------------------------------------------
# function presets


_PRESETS: dict[str, type] = {}


def _register(cls):
    _PRESETS[cls.kind] = cls
    return cls


class Preset:
    kind: ClassVar[str]

    def __call__(self, x):
        raise NotImplementedError

    @property
    def sup(self) -> float:
        """Supremum over x >= 0 (positive part for kinetic functions)."""
        raise NotImplementedError

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        for f in fields(self):
            value = getattr(self, f.name)
            d[f.name] = list(value) if isinstance(value, tuple) else value
        return d

    def _nonnegative(self, *names):
        for name in names:
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise AssumptionError(f"{self.kind} preset: {name} must be >= 0, got {value}")


@_register
@dataclass(frozen=True)
class Zero(Preset):
    kind: ClassVar[str] = "zero"

    def __call__(self, x):
        return np.zeros_like(np.asarray(x, dtype=np.float64))

    @property
    def sup(self):
        return 0.0


@_register
@dataclass(frozen=True)
class Constant(Preset):
    kind: ClassVar[str] = "constant"
    c: float

    def __post_init__(self):
        self._nonnegative("c")

    def __call__(self, x):
        return np.full_like(np.asarray(x, dtype=np.float64), self.c)

    @property
    def sup(self):
        return self.c


@_register
@dataclass(frozen=True)
class Linear(Preset):
    """``coef * x``; unbounded for coef > 0."""

    kind: ClassVar[str] = "linear"
    coef: float

    def __post_init__(self):
        self._nonnegative("coef")

    def __call__(self, x):
        return self.coef * np.asarray(x, dtype=np.float64)

    @property
    def sup(self):
        return math.inf if self.coef > 0 else 0.0


@_register
@dataclass(frozen=True)
class Saturating(Preset):
    """``coef * x / (1 + x)``, increasing to ``coef`` as x grows."""

    kind: ClassVar[str] = "saturating"
    coef: float

    def __post_init__(self):
        self._nonnegative("coef")

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        return self.coef * x / (1.0 + x)

    @property
    def sup(self):
        return self.coef


@_register
@dataclass(frozen=True)
class Logistic(Preset):
    """Verhulst kinetics ``rho0 * v * (1 - v / K)``."""

    kind: ClassVar[str] = "logistic"
    rho0: float
    K: float

    def __post_init__(self):
        self._nonnegative("rho0")
        if not math.isfinite(self.K) or self.K <= 0:
            raise AssumptionError(f"logistic preset: K must be > 0, got {self.K}")

    def __call__(self, v):
        v = np.asarray(v, dtype=np.float64)
        return self.rho0 * v * (1.0 - v / self.K)

    @property
    def sup(self):
        return self.rho0 * self.K / 4.0


@_register
@dataclass(frozen=True)
class Ramp(Preset):
    """``g0 * (1 - exp(-t / tau))``."""

    kind: ClassVar[str] = "ramp"
    g0: float
    tau: float

    def __post_init__(self):
        self._nonnegative("g0")
        if not math.isfinite(self.tau) or self.tau <= 0:
            raise AssumptionError(f"ramp preset: tau must be > 0, got {self.tau}")

    def __call__(self, t):
        t = np.asarray(t, dtype=np.float64)
        return -self.g0 * np.expm1(-t / self.tau)

    @property
    def sup(self):
        return self.g0


@_register
@dataclass(frozen=True)
class Table(Preset):
    """Piecewise-linear interpolation with constant extrapolation."""

    kind: ClassVar[str] = "table"
    xs: tuple
    ys: tuple

    def __post_init__(self):
        xs = tuple(float(x) for x in self.xs)
        ys = tuple(float(y) for y in self.ys)
        if len(xs) != len(ys) or len(xs) < 2:
            raise AssumptionError("table preset needs matching xs, ys with at least two points")
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise AssumptionError("table preset xs must be strictly increasing")
        if not all(map(math.isfinite, xs + ys)):
            raise AssumptionError("table preset values must be finite")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    def __call__(self, x):
        return np.interp(np.asarray(x, dtype=np.float64), self.xs, self.ys)

    @property
    def sup(self):
        return max(max(self.ys), 0.0)


def preset_from_dict(d: dict) -> Preset:
    d = dict(d)
    kind = d.pop("kind", None)
    if kind not in _PRESETS:
        raise ConfigError(f"unknown function preset {kind!r}; known: {sorted(_PRESETS)}")
    cls = _PRESETS[kind]
    names = {f.name for f in fields(cls)}
    unknown = set(d) - names
    if unknown:
        raise ConfigError(f"unknown keys for preset {kind!r}: {sorted(unknown)}")
    missing = names - set(d)
    if missing:
        raise ConfigError(f"missing keys for preset {kind!r}: {sorted(missing)}")
    try:
        return cls(**d)
    except TypeError as exc:
        raise ConfigError(f"bad preset {kind!r}: {exc}") from exc


def preset_zero() -> Zero:
    return Zero()


def preset_logistic_f(rho0: float = 1.0, K: float = 1.0) -> Logistic:
    return Logistic(rho0, K)


def preset_linear_f(rho0: float) -> Linear:
    return Linear(rho0)


def preset_saturating(h0: float) -> Saturating:
    return Saturating(h0)


def preset_constant_rho(rho0: float) -> Constant:
    return Constant(rho0)


def preset_saturating_rho(rho0: float) -> Saturating:
    return Saturating(rho0)


def preset_ramp_g(g0: float, tau: float) -> Ramp:
    return Ramp(g0, tau)


@dataclass(frozen=True)
class ModelFunctions:
    rho: Preset
    f: Preset
    h: Preset
    g: Preset

    def to_dict(self) -> dict:
        return {name: getattr(self, name).to_dict() for name in ("rho", "f", "h", "g")}

    @classmethod
    def from_dict(cls, d: dict) -> "ModelFunctions":
        unknown = set(d) - {"rho", "f", "h", "g"}
        if unknown:
            raise ConfigError(f"unknown function slots: {sorted(unknown)}")
        missing = {"rho", "f", "h", "g"} - set(d)
        if missing:
            raise ConfigError(f"missing function slots: {sorted(missing)}")
        return cls(**{k: preset_from_dict(v) for k, v in d.items()})


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Violation:
    assumption: int
    message: str
    point: float | None = None


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)
    waived: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.passed


WAIVERS = {
    # The Figure 1 run replaces rho(b) f(v) by 0.001 v and linearizes -v_x(0) = b(0),
    # so f has no carrying capacity and h is unbounded.
    "figure1": {3, 4},
}


def _finite(values, name):
    values = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise AssumptionError(f"{name} returned a non-finite value")
    return values


def validate(params: Parameters, funcs: ModelFunctions, sample_count: int = 1000,
             waivers=()) -> ValidationReport:
    """Check the standing assumptions by sampling the model functions.

    ``v`` is sampled on [0, 10 K]; ``b`` and ``t`` on [0, 100]. Violations are collected,
    not raised. A waiver name from ``WAIVERS`` moves the matching violations to
    ``report.waived``.
    """
    if sample_count < 100:
        raise ValueError("sample_count must be >= 100")
    waived_ids = set()
    for name in waivers:
        if name not in WAIVERS:
            raise ValueError(f"unknown waiver {name!r}")
        waived_ids |= WAIVERS[name]

    found: list[Violation] = []
    for name in PARAM_NAMES:
        if getattr(params, name) <= 0:
            found.append(Violation(1, f"parameter {name} must be > 0", getattr(params, name)))

    K = params.k_capacity
    b = np.linspace(0.0, 100.0, sample_count)
    t = np.linspace(0.0, 100.0, sample_count)
    v = np.union1d(np.linspace(0.0, 10.0 * K, sample_count), [K])

    rho = _finite(funcs.rho(b), "rho")
    if np.any(rho < 0):
        i = int(np.argmax(rho < 0))
        found.append(Violation(2, "rho must be nonnegative", float(b[i])))
    if not math.isfinite(funcs.rho.sup):
        found.append(Violation(2, "rho must be bounded"))
    elif np.any(rho > funcs.rho.sup * (1 + 1e-12)):
        i = int(np.argmax(rho > funcs.rho.sup))
        found.append(Violation(2, "rho exceeds its declared bound", float(b[i])))

    fv = _finite(funcs.f(v), "f")
    above = (v >= K) & (fv > 0)
    below = (v < K) & (fv < 0)
    if np.any(above):
        found.append(Violation(3, "f(v) must be <= 0 for v >= K", float(v[np.argmax(above)])))
    if np.any(below):
        found.append(Violation(3, "f(v) must be >= 0 for v < K", float(v[np.argmax(below)])))

    hb = _finite(funcs.h(b), "h")
    if hb[0] != 0.0:
        found.append(Violation(4, "h(0) must be 0", 0.0))
    if np.any(hb < 0):
        found.append(Violation(4, "h must be nonnegative", float(b[np.argmax(hb < 0)])))
    if not math.isfinite(funcs.h.sup):
        found.append(Violation(4, "h must be bounded"))

    gt = _finite(funcs.g(t), "g")
    if gt[0] != 0.0:
        found.append(Violation(5, "g(0) must be 0", 0.0))
    if np.any(gt < 0):
        found.append(Violation(5, "g must be nonnegative", float(t[np.argmax(gt < 0)])))

    report = ValidationReport()
    for item in found:
        (report.waived if item.assumption in waived_ids else report.violations).append(item)
    return report


# ---------------------------------------------------------------------------
# state and initial data


@dataclass(frozen=True)
class State:
    t: float
    u: np.ndarray
    v: np.ndarray
    a: np.ndarray
    b: np.ndarray
    mesh: Mesh

    def __post_init__(self):
        for name in ("u", "v", "a", "b"):
            arr = np.array(self.mesh.check(getattr(self, name), name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def trusted(cls, t, u, v, a, b, mesh) -> "State":
        """Wrap freshly computed float64 arrays of the right length without copying."""
        obj = object.__new__(cls)
        for name, value in (("t", t), ("mesh", mesh), ("u", u), ("v", v), ("a", a), ("b", b)):
            if isinstance(value, np.ndarray):
                value.setflags(write=False)
            object.__setattr__(obj, name, value)
        return obj

    @property
    def fields(self) -> dict:
        return {"u": self.u, "v": self.v, "a": self.a, "b": self.b}


_INITS: dict[str, type] = {}


def _register_init(cls):
    _INITS[cls.kind] = cls
    return cls


class InitProfile:
    kind: ClassVar[str]

    def evaluate(self, mesh: Mesh) -> np.ndarray:
        raise NotImplementedError

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        for f in fields(self):
            value = getattr(self, f.name)
            d[f.name] = list(value) if isinstance(value, tuple) else value
        return d


@_register_init
@dataclass(frozen=True)
class ConstantInit(InitProfile):
    kind: ClassVar[str] = "constant"
    c: float

    def evaluate(self, mesh):
        return np.full(mesh.n_cells, float(self.c))


@_register_init
@dataclass(frozen=True)
class GaussianInit(InitProfile):
    kind: ClassVar[str] = "gaussian"
    center: float
    width: float
    amplitude: float
    offset: float = 0.0

    def evaluate(self, mesh):
        x = mesh.cell_centers
        return self.offset + self.amplitude * np.exp(-(((x - self.center) / self.width) ** 2))


@_register_init
@dataclass(frozen=True)
class CosineInit(InitProfile):
    """``mean + amplitude * cos(k pi x)``; nonnegative when |amplitude| <= mean."""

    kind: ClassVar[str] = "cosine_mode"
    mean: float
    amplitude: float
    k: int = 1

    def evaluate(self, mesh):
        return self.mean + self.amplitude * np.cos(self.k * np.pi * mesh.cell_centers)


@_register_init
@dataclass(frozen=True)
class TableInit(InitProfile):
    """Cell values; resampled linearly over [0, 1] if the length differs from the mesh."""

    kind: ClassVar[str] = "table"
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(x) for x in self.values))

    def evaluate(self, mesh):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.size == mesh.n_cells:
            return vals.copy()
        if vals.size < 2:
            return np.full(mesh.n_cells, vals[0] if vals.size else 0.0)
        return np.interp(mesh.cell_centers, np.linspace(0.0, 1.0, vals.size), vals)


def init_from_dict(d: dict) -> InitProfile:
    d = dict(d)
    kind = d.pop("kind", None)
    if kind not in _INITS:
        raise ConfigError(f"unknown initial-data kind {kind!r}; known: {sorted(_INITS)}")
    try:
        return _INITS[kind](**d)
    except TypeError as exc:
        raise ConfigError(f"bad initial-data block {kind!r}: {exc}") from exc


@dataclass(frozen=True)
class InitialData:
    u: InitProfile
    v: InitProfile
    a: InitProfile
    b: InitProfile

    def evaluate(self, mesh: Mesh, t: float = 0.0) -> State:
        return State(t, *(getattr(self, k).evaluate(mesh) for k in "uvab"), mesh=mesh)

    def to_dict(self) -> dict:
        return {k: getattr(self, k).to_dict() for k in "uvab"}

    @classmethod
    def from_dict(cls, d: dict) -> "InitialData":
        unknown = set(d) - set("uvab")
        if unknown:
            raise ConfigError(f"unknown initial-data fields: {sorted(unknown)}")
        missing = set("uvab") - set(d)
        if missing:
            raise ConfigError(f"missing initial-data fields: {sorted(missing)}")
        return cls(**{k: init_from_dict(d[k]) for k in "uvab"})


def figure1_preset() -> tuple[Parameters, ModelFunctions, InitialData]:
    """Parameter set of the aggregation figure.

    The caption prints ``mu+0.001``; it is read as mu = 0.001. The caption gives no
    boundary flux g, initial data or final time. Here g ramps to 1 with unit time
    scale, the chemicals start at zero, v starts at 0.1 and u at 0.01. With u and v both
    at 0.1 the v influx at x = 0 (driven by b(0)) outgrows the u influx at x = 1 and the
    cells collapse onto the left wall instead.
    """
    params = Parameters(
        d1=0.1, d2=0.1, d3=1.0, d4=7.0,
        alpha1=10.0, alpha2=10.0,
        beta1=1.0, beta2=10.0,
        mu=0.001, mu_a=1.0, mu_b=1.0,
        k_capacity=1.0,
    )
    funcs = ModelFunctions(
        rho=Constant(1.0),
        f=Linear(0.001),
        h=Linear(1.0),
        g=Ramp(1.0, 1.0),
    )
    init = InitialData(ConstantInit(0.01), ConstantInit(0.1), ConstantInit(0.0), ConstantInit(0.0))
    return params, funcs, init
