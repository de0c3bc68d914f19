"""Uniform periodic grids, sampled fields, and quadrature primitives.

Everything downstream works on a uniform grid over [-L, L) with the left
endpoint included and the right endpoint identified with the left.  Fields
carry a reference to their grid so that operations can check compatibility,
and their value arrays are frozen after construction: every operation returns
a new Field.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np


class GridError(ValueError):
    """Invalid grid construction or incompatible grid/field combination."""


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic grid on [-half_width, half_width).

    Parameters
    ----------
    n : int
        Number of points; must be even and at least 8 so that spectral
        multipliers have a well-defined Nyquist mode.
    half_width : float
        Half the domain length L; points are x_j = -L + j * (2L/n).
    """

    n: int
    half_width: float
    x: np.ndarray = field(init=False, repr=False, compare=False)
    wavenumbers: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.n < 8 or self.n % 2 != 0:
            raise GridError(f"grid size must be an even integer >= 8, got {self.n}")
        if not (self.half_width > 0 and math.isfinite(self.half_width)):
            raise GridError(f"half_width must be positive and finite, got {self.half_width}")
        x = -self.half_width + self.spacing * np.arange(self.n)
        # Angular frequencies pi*k/L for k = -n/2 .. n/2-1, in FFT layout.
        xi = 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.spacing)
        x.setflags(write=False)
        xi.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "wavenumbers", xi)

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.n

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Grid1D):
            return NotImplemented
        return self.n == other.n and self.half_width == other.half_width

    def __hash__(self) -> int:
        return hash((self.n, self.half_width))


def build_grid(n: int, half_width: float) -> Grid1D:
    """Construct a uniform periodic grid on [-half_width, half_width)."""
    return Grid1D(n=n, half_width=half_width)


@dataclass(frozen=True)
class Field:
    """Real-valued samples on a Grid1D.  Immutable after construction."""

    grid: Grid1D
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.n,):
            raise GridError(
                f"field length {values.shape} does not match grid size {self.grid.n}"
            )
        if not np.all(np.isfinite(values)):
            bad = int(np.flatnonzero(~np.isfinite(values))[0])
            raise GridError(f"non-finite field value at index {bad} (x={self.grid.x[bad]:g})")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def with_values(self, values: np.ndarray) -> "Field":
        return Field(self.grid, values)

    # Pointwise arithmetic (returns new fields; scalars broadcast).
    def _coerce(self, other) -> np.ndarray:
        if isinstance(other, Field):
            if other.grid != self.grid:
                raise GridError("field arithmetic requires identical grids")
            return other.values
        return np.asarray(other, dtype=float)

    def __add__(self, other) -> "Field":
        return Field(self.grid, self.values + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other) -> "Field":
        return Field(self.grid, self.values - self._coerce(other))

    def __rsub__(self, other) -> "Field":
        return Field(self.grid, self._coerce(other) - self.values)

    def __mul__(self, other) -> "Field":
        return Field(self.grid, self.values * self._coerce(other))

    __rmul__ = __mul__

    def __neg__(self) -> "Field":
        return Field(self.grid, -self.values)


def as_field(grid: Grid1D, values) -> Field:
    """Wrap an array (or callable evaluated on grid.x) as a Field."""
    if callable(values):
        values = values(grid.x)
    return Field(grid, np.asarray(values, dtype=float))


def integrate(f: Field) -> float:
    """Domain integral by the periodic trapezoid (= rectangle) rule, h * sum."""
    return float(f.grid.spacing * f.values.sum())


def lp_norm(f: Field, p: float) -> float:
    """Discrete L^p norm over the domain; p = inf gives max |f|."""
    if p == np.inf or p == math.inf:
        return float(np.abs(f.values).max())
    if not p >= 1:
        raise ValueError(f"lp_norm requires p >= 1 or p = inf, got {p}")
    h = f.grid.spacing
    return float((h * (np.abs(f.values) ** p).sum()) ** (1.0 / p))


def antiderivative(f: Field) -> Field:
    """Cumulative trapezoid integral g with g(x_0) = 0.

    Satisfies g(x_{j+1}) - g(x_j) = h * (f_j + f_{j+1}) / 2.  For a field with
    mean m the result contains a non-periodic ramp m * (x + L); callers that
    need a periodic result must remove the mean first.
    """
    h = f.grid.spacing
    g = np.empty(f.grid.n)
    g[0] = 0.0
    np.cumsum(0.5 * h * (f.values[:-1] + f.values[1:]), out=g[1:])
    return Field(f.grid, g)


def support_margin(f: Field, rel_tol: float = 1e-12) -> float:
    """Distance from the numerical support of f to the domain boundary.

    The support is where |f| exceeds rel_tol * max|f|.  Returns half_width
    for an identically-zero field.
    """
    amax = float(np.abs(f.values).max())
    if amax == 0.0:
        return f.grid.half_width
    idx = np.flatnonzero(np.abs(f.values) > rel_tol * amax)
    left = f.grid.x[idx[0]] - (-f.grid.half_width)
    right = f.grid.half_width - f.grid.x[idx[-1]]
    return float(min(left, right))


def write_field_csv(path, f: Field) -> None:
    """Serialize a field as two-column CSV with header '# x,value'."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# x,value\n")
        for x, v in zip(f.grid.x, f.values):
            fh.write(f"{x:.17g},{v:.17g}\n")


def read_field_csv(path, grid: Grid1D | None = None) -> Field:
    """Read a two-column CSV written by write_field_csv.

    If ``grid`` is given, the x-column must match its points to 1e-12.
    Otherwise a grid is reconstructed from the x-column (which must be a
    uniform [-L, L) lattice).
    """
    data = np.loadtxt(path, delimiter=",", comments="#")
    if data.ndim != 2 or data.shape[1] != 2:
        raise GridError(f"{path}: expected two columns 'x,value'")
    x, v = data[:, 0], data[:, 1]
    if grid is None:
        n = x.size
        spacing = np.diff(x)
        if n < 8 or not np.allclose(spacing, spacing[0], rtol=0, atol=1e-10):
            raise GridError(f"{path}: x column is not a uniform grid")
        grid = build_grid(n, -float(x[0]))
    if not np.allclose(x, grid.x, rtol=0, atol=1e-12 * max(1.0, grid.half_width)):
        raise GridError(f"{path}: x column does not match the target grid")
    return Field(grid, v)
