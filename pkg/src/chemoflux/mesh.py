"""Uniform cell-centered mesh on [0, 1] and the discrete calculus used everywhere else.

Fields are plain float64 numpy arrays of length ``n_cells``; face quantities have
length ``n_cells + 1`` with the two boundary faces at the ends.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import MeshError

MIN_CELLS = 4


@dataclass(frozen=True)
class Mesh:
    n_cells: int
    dx: float = field(init=False)
    cell_centers: np.ndarray = field(init=False, repr=False, compare=False)
    faces: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.n_cells) != self.n_cells or self.n_cells < MIN_CELLS:
            raise MeshError(f"n_cells must be an integer >= {MIN_CELLS}, got {self.n_cells}")
        n = int(self.n_cells)
        object.__setattr__(self, "n_cells", n)
        object.__setattr__(self, "dx", 1.0 / n)
        centers = (np.arange(n) + 0.5) / n
        centers.setflags(write=False)
        faces = np.arange(n + 1) / n
        faces.setflags(write=False)
        object.__setattr__(self, "cell_centers", centers)
        object.__setattr__(self, "faces", faces)

    def check(self, values, name="field") -> np.ndarray:
        arr = np.asarray(values, dtype=np.float64)
        if arr.shape != (self.n_cells,):
            raise MeshError(f"{name} has shape {arr.shape}, expected ({self.n_cells},)")
        return arr

    def integrate(self, f) -> float:
        """Midpoint quadrature of a cell field over [0, 1]."""
        return float(self.dx * np.sum(self.check(f)))

    def l1_norm(self, f) -> float:
        return float(self.dx * np.sum(np.abs(self.check(f))))

    def l2_norm(self, f) -> float:
        f = self.check(f)
        return float(np.sqrt(self.dx * np.dot(f, f)))

    def face_gradient(self, f) -> np.ndarray:
        """Centered difference at interior faces; boundary faces are left at 0."""
        f = self.check(f)
        g = np.zeros(self.n_cells + 1)
        g[1:-1] = np.diff(f) / self.dx
        return g

    def h1_seminorm(self, f) -> float:
        g = self.face_gradient(f)[1:-1]
        return float(np.sqrt(self.dx * np.dot(g, g)))

    def interval_integral(self, f, lo: float, hi: float) -> float:
        """Integral of the piecewise-constant reconstruction of ``f`` over [lo, hi]."""
        f = self.check(f)
        left = self.faces[:-1]
        right = self.faces[1:]
        overlap = np.clip(np.minimum(right, hi) - np.maximum(left, lo), 0.0, None)
        return float(np.dot(overlap, f))


def build_mesh(n_cells: int) -> Mesh:
    return Mesh(n_cells)
