"""
Uniform meshes of $[0, \\pi_p]$, continuous piecewise-linear functions on them, and per-cell quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
import math
import typing as t

import numpy
from numpy.typing import NDArray, ArrayLike

from .types import FloatArray, RealLike, to_float_array, unwrap
from .util import DomainError, DegenerateError

if t.TYPE_CHECKING:
    from .ptrig import ExponentContext


GAUSS_ORDER: int = 6
"""Default number of Gauss-Legendre points per cell."""


@dataclass(frozen=True)
class Mesh:
    """Uniform mesh of `n` cells on `[0, length]`."""

    n: int
    """Number of cells"""
    length: float
    """Interval length (usually `pi_p`)"""

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise DomainError(f"Mesh needs an integer number of cells >= 2, got n={self.n!r}")
        if not (math.isfinite(self.length) and self.length > 0.):
            raise DomainError(f"Invalid mesh length {self.length!r}")
        object.__setattr__(self, 'n', int(self.n))
        object.__setattr__(self, 'length', float(self.length))

    @classmethod
    def for_context(cls, ctx: ExponentContext, n: int) -> Mesh:
        """Mesh of `[0, pi_p]` with `n` cells."""
        return cls(n, ctx.pi_p)

    @property
    def h(self) -> float:
        """Cell width"""
        return self.length / self.n

    @cached_property
    def nodes(self) -> FloatArray:
        nodes = numpy.linspace(0., self.length, self.n + 1)
        nodes.flags.writeable = False
        return nodes

    def nearest_node(self, x: float, interior: bool = True) -> int:
        """Index of the node nearest `x`. If `interior`, clamp to `[1, n-1]`."""
        i = int(numpy.rint(float(x) / self.h))
        if interior:
            return min(max(i, 1), self.n - 1)
        return min(max(i, 0), self.n)

    def quadrature(self, order: int = GAUSS_ORDER, breakpoints: t.Iterable[float] = ()) -> QuadratureRule:
        """
        Gauss-Legendre rule with `order` points on every cell.

        Cells containing one of `breakpoints` are split there first, so integrands with
        kinks at `breakpoints` are integrated piecewise-smoothly.
        """
        bounds = self.nodes
        extra = numpy.array([b for b in breakpoints if 0. < b < self.length], dtype=numpy.float64)
        if len(extra):
            bounds = numpy.unique(numpy.concatenate([bounds, extra]))

        (a, b) = (bounds[:-1], bounds[1:])
        mid = 0.5 * (a + b)
        cell = numpy.clip(numpy.searchsorted(self.nodes, mid, side='right') - 1, 0, self.n - 1)

        (xs, ws) = numpy.polynomial.legendre.leggauss(order)
        points = (mid[:, None] + 0.5 * (b - a)[:, None] * xs).ravel()
        weights = (0.5 * (b - a)[:, None] * ws).ravel()
        cell = numpy.repeat(cell, order)
        xi = (points - self.nodes[cell]) / self.h
        return QuadratureRule(self, points, weights, cell, xi)


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """
    Quadrature points on a [`Mesh`][plaplib.mesh.Mesh], each tagged with its cell and local coordinate.

    Lets integrals of functions of a piecewise-linear `u` (and their derivatives with
    respect to the node values) be computed without forming per-cell loops.
    """

    mesh: Mesh
    points: FloatArray
    weights: FloatArray
    cell: NDArray[numpy.intp]
    """Index of the left node of each point's cell"""
    xi: FloatArray
    """Local coordinate of each point in its cell, `[0, 1]`"""

    def __len__(self) -> int:
        return len(self.points)

    def evaluate(self, values: FloatArray) -> FloatArray:
        """Evaluate the piecewise-linear interpolant of node `values` at the quadrature points."""
        return (1. - self.xi) * values[self.cell] + self.xi * values[self.cell + 1]

    def integrate(self, f: FloatArray) -> float:
        """Integrate a function given by its values at the quadrature points."""
        return float(numpy.dot(self.weights, f))

    def scatter(self, f: FloatArray) -> FloatArray:
        """
        Return $\\int f \\phi_i$ for each nodal hat function $\\phi_i$, given `f` at the quadrature points.
        """
        wf = self.weights * f
        m = self.mesh.n + 1
        return (numpy.bincount(self.cell, (1. - self.xi) * wf, minlength=m)
                + numpy.bincount(self.cell + 1, self.xi * wf, minlength=m))

    def bands(self, f: FloatArray) -> t.Tuple[FloatArray, FloatArray]:
        """
        Return the tridiagonal matrix $\\int f \\phi_i \\phi_j$ as `(diagonal, off_diagonal)`.

        `off_diagonal[i]` couples nodes `i` and `i+1`.
        """
        wf = self.weights * f
        (n, xi) = (self.mesh.n, self.xi)
        diag = (numpy.bincount(self.cell, (1. - xi)**2 * wf, minlength=n + 1)
                + numpy.bincount(self.cell + 1, xi**2 * wf, minlength=n + 1))
        off = numpy.bincount(self.cell, xi * (1. - xi) * wf, minlength=n)
        return (diag, off)

    def weighted(self, w: FloatArray) -> QuadratureRule:
        """Fold a weight function (given at the quadrature points) into the rule."""
        return QuadratureRule(self.mesh, self.points, self.weights * w, self.cell, self.xi)


@dataclass(frozen=True, eq=False)
class DiscreteFunction:
    """
    Continuous piecewise-linear function on a [`Mesh`][plaplib.mesh.Mesh],
    vanishing at both ends of the interval.

    `values` is copied and made read-only on construction.
    """

    mesh: Mesh
    values: FloatArray
    """Value at each of the `n + 1` nodes"""

    def __post_init__(self):
        values = numpy.array(self.values, dtype=numpy.float64)
        if values.shape != (self.mesh.n + 1,):
            raise ValueError(f"Expected {self.mesh.n + 1} node values, got shape {values.shape}")
        if not numpy.all(numpy.isfinite(values)):
            raise DomainError("Node values must be finite")
        if values[0] != 0. or values[-1] != 0.:
            raise DomainError(f"Boundary values must vanish, got u(0)={values[0]!r}, u(L)={values[-1]!r}")
        values.flags.writeable = False
        object.__setattr__(self, 'values', values)

    @classmethod
    def zeros(cls, mesh: Mesh) -> DiscreteFunction:
        return cls(mesh, numpy.zeros(mesh.n + 1))

    @classmethod
    def from_interior(cls, mesh: Mesh, interior: ArrayLike) -> DiscreteFunction:
        """Build from the `n - 1` interior node values."""
        values = numpy.zeros(mesh.n + 1)
        values[1:-1] = interior
        return cls(mesh, values)

    def with_values(self, values: ArrayLike) -> DiscreteFunction:
        return DiscreteFunction(self.mesh, t.cast(FloatArray, values))

    @property
    def interior(self) -> FloatArray:
        return self.values[1:-1]

    @property
    def slopes(self) -> FloatArray:
        """Derivative on each cell (constant per cell)."""
        return numpy.diff(self.values) / self.mesh.h

    def __call__(self, x: RealLike) -> t.Any:
        arr = to_float_array(x)
        return unwrap(numpy.interp(arr, self.mesh.nodes, self.values), x)

    def __mul__(self, other: float) -> DiscreteFunction:
        return self.with_values(self.values * float(other))

    __rmul__ = __mul__

    def reflect(self) -> DiscreteFunction:
        """Return `u(L - x)`."""
        return self.with_values(self.values[::-1])

    def max_abs(self) -> float:
        """Maximum of `|u|` (attained at a node)."""
        return float(numpy.max(numpy.abs(self.values)))

    def argmax_abs(self) -> int:
        return int(numpy.argmax(numpy.abs(self.values)))

    def is_zero(self) -> bool:
        return not numpy.any(self.values)

    def normalized(self) -> DiscreteFunction:
        """Scale to unit max-norm, with a nonnegative value at the maximum."""
        i = self.argmax_abs()
        m = self.values[i]
        if m == 0.:
            raise DegenerateError("Can't normalize the null function")
        return self.with_values(self.values / m)

    def __repr__(self) -> str:
        return f"DiscreteFunction(n={self.mesh.n}, max_abs={self.max_abs():.6g})"


def interpolate(mesh: Mesh, f: t.Callable[[FloatArray], ArrayLike]) -> DiscreteFunction:
    """
    Sample `f` at the nodes of `mesh`, forcing zero boundary values.

    `f` is called once, with the array of nodes.
    """
    values = numpy.array(numpy.broadcast_to(f(mesh.nodes), (mesh.n + 1,)), dtype=numpy.float64)
    values[0] = values[-1] = 0.
    return DiscreteFunction(mesh, values)


@dataclass(frozen=True)
class TentProfile:
    """
    Triangular bump $r_\\delta(x) = \\max(0, \\delta - |x - c|) / \\delta^2$.

    Height `1/delta` at `c`, support `[c - delta, c + delta]`, unit integral.
    """

    c: float
    """Center"""
    delta: float
    """Half-width"""

    def __post_init__(self):
        if not (math.isfinite(self.delta) and self.delta > 0.):
            raise DomainError(f"Tent half-width must be positive, got delta={self.delta!r}")
        if not (math.isfinite(self.c) and self.c - self.delta > 0.):
            raise DomainError(f"Tent support must lie inside (0, L), got c={self.c!r}, delta={self.delta!r}")

    @classmethod
    def centered(cls, length: float, delta: float) -> TentProfile:
        """Tent at the midpoint of `[0, length]`."""
        tent = cls(0.5 * length, delta)
        tent.check_within(length)
        return tent

    def check_within(self, length: float):
        """Raise [`DomainError`][plaplib.util.DomainError] unless the support lies inside `(0, length)`."""
        if not self.c + self.delta < length:
            raise DomainError(f"Tent support [{self.c - self.delta:.6g}, {self.c + self.delta:.6g}] "
                              f"must lie inside (0, {length:.6g})")

    @property
    def kinks(self) -> t.Tuple[float, float, float]:
        return (self.c - self.delta, self.c, self.c + self.delta)

    @property
    def height(self) -> float:
        return 1. / self.delta

    def integral(self) -> float:
        return 1.

    def __call__(self, x: RealLike) -> t.Any:
        arr = to_float_array(x)
        return unwrap(numpy.maximum(0., self.delta - numpy.abs(arr - self.c)) / self.delta**2, x)


__all__ = [
    'GAUSS_ORDER', 'Mesh', 'QuadratureRule', 'DiscreteFunction', 'TentProfile', 'interpolate',
]
