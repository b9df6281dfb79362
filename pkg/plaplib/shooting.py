"""
Shooting for the one-dimensional p-Laplacian eigenvalue problem

$$-(|u'|^{p-2}u')' = (\\lambda + r(x))|u|^{p-2}u, \\quad u(0) = u(\\pi_p) = 0.$$

The equation is integrated as the first-order system in $(u, v)$, $v = |u'|^{p-2}u'$:

$$u' = |v|^{q-2}v, \\quad v' = -(\\lambda + r(x))|u|^{p-2}u,$$

with classical Runge-Kutta from $(u, v) = (0, 1)$ on a uniform grid. Where $|u|^{p-2}u$ or
$|v|^{q-2}v$ is not smooth, steps near zeros of $u$ or $v$ are split into graded substeps, which
keeps fourth order convergence for every $p$. Since the system is
p-homogeneous, a shot with $u(\\pi_p) = 0$ certifies a nontrivial solution.
"""

from __future__ import annotations

import abc
from dataclasses import dataclass
import math
import logging
import typing as t

import numpy
import polars
from scipy import integrate

from .ptrig import ExponentContext
from .lyapunov import SpectralShift, lyapunov_constant
from .mesh import Mesh, TentProfile
from .types import FloatArray, RealLike, to_float_array, unwrap
from .util import DomainError, IntegrationOverflowError


DEFAULT_BOUND: float = 1e100
"""Default bound on `|u|` before an [`IntegrationOverflowError`][plaplib.util.IntegrationOverflowError] is raised."""

MIN_STEPS: int = 100


class PotentialSpec(abc.ABC):
    """A potential $r \\in C[0, L]$."""

    kind: t.ClassVar[str]

    @abc.abstractmethod
    def _eval(self, x: FloatArray) -> FloatArray:
        ...

    def __call__(self, x: RealLike) -> t.Any:
        arr = to_float_array(x)
        return unwrap(numpy.broadcast_to(self._eval(arr), arr.shape).astype(numpy.float64), x)

    @abc.abstractmethod
    def positive_part_l1(self, length: float) -> float:
        """$\\|r_+\\|_{L^1(0, L)}$"""
        ...


@dataclass(frozen=True)
class ZeroPotential(PotentialSpec):
    kind: t.ClassVar[str] = 'zero'

    def _eval(self, x: FloatArray) -> FloatArray:
        return numpy.zeros_like(x)

    def positive_part_l1(self, length: float) -> float:
        return 0.


@dataclass(frozen=True)
class ConstantPotential(PotentialSpec):
    value: float
    kind: t.ClassVar[str] = 'constant'

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise DomainError(f"Potential must be finite, got {self.value!r}")

    def _eval(self, x: FloatArray) -> FloatArray:
        return numpy.full_like(x, self.value)

    def positive_part_l1(self, length: float) -> float:
        return max(self.value, 0.) * length


@dataclass(frozen=True)
class TentPotential(PotentialSpec):
    """`amplitude * r_delta`, with unit-integral tent `r_delta`."""

    tent: TentProfile
    amplitude: float
    kind: t.ClassVar[str] = 'tent'

    def __post_init__(self):
        if not (math.isfinite(self.amplitude) and self.amplitude >= 0.):
            raise DomainError(f"Tent amplitude must be nonnegative, got {self.amplitude!r}")

    def _eval(self, x: FloatArray) -> FloatArray:
        return self.amplitude * self.tent(x)

    def positive_part_l1(self, length: float) -> float:
        self.tent.check_within(length)
        return self.amplitude * self.tent.integral()


@dataclass(frozen=True, eq=False)
class TabulatedPotential(PotentialSpec):
    """Potential given at mesh nodes, interpolated piecewise-linearly."""

    mesh: Mesh
    values: FloatArray
    kind: t.ClassVar[str] = 'tabulated'

    def __post_init__(self):
        values = numpy.array(self.values, dtype=numpy.float64)
        if values.shape != (self.mesh.n + 1,):
            raise ValueError(f"Expected {self.mesh.n + 1} potential values, got shape {values.shape}")
        if not numpy.all(numpy.isfinite(values)):
            raise DomainError("Tabulated potential values must be finite")
        values.flags.writeable = False
        object.__setattr__(self, 'values', values)

    def _eval(self, x: FloatArray) -> FloatArray:
        return numpy.interp(x, self.mesh.nodes, self.values)

    def positive_part_l1(self, length: float) -> float:
        (a, b) = (self.values[:-1], self.values[1:])
        h = self.mesh.h
        both = h * 0.5 * (numpy.maximum(a, 0.) + numpy.maximum(b, 0.))
        # cells where the sign changes: triangle above zero
        cross = (a * b < 0.)
        with numpy.errstate(divide='ignore', invalid='ignore'):
            tri = h * numpy.maximum(a, b)**2 / (2. * numpy.abs(a - b))
        return float(numpy.sum(numpy.where(cross, tri, both)))


@dataclass(frozen=True)
class ShootingState:
    x: float
    u: float
    v: float
    """$|u'|^{p-2}u'$"""

    def du(self, ctx: ExponentContext) -> float:
        """Recover $u' = |v|^{q-2}v$."""
        return math.copysign(abs(self.v)**(ctx.q - 1.), self.v)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """A shot, sampled at every integration step."""

    x: FloatArray
    u: FloatArray
    v: FloatArray
    p: float
    lam: float

    def __len__(self) -> int:
        return len(self.x)

    def __getitem__(self, i: int) -> ShootingState:
        return ShootingState(float(self.x[i]), float(self.u[i]), float(self.v[i]))

    def __iter__(self) -> t.Iterator[ShootingState]:
        return (self[i] for i in range(len(self)))

    @property
    def q(self) -> float:
        return self.p / (self.p - 1.)

    @property
    def du(self) -> FloatArray:
        return numpy.sign(self.v) * numpy.abs(self.v)**(self.q - 1.)

    @property
    def miss(self) -> float:
        """Terminal value `u(L)`"""
        return float(self.u[-1])

    def to_frame(self) -> polars.DataFrame:
        return polars.DataFrame({'x': self.x, 'u': self.u, 'v': self.v, 'du': self.du})


def _lam_value(ctx: ExponentContext, lam: t.Union[SpectralShift, float]) -> float:
    if isinstance(lam, SpectralShift):
        if lam.p != ctx.p:
            raise DomainError(f"Spectral shift was built for p={lam.p!r}, not p={ctx.p!r}")
        return lam.lam
    lam = float(lam)
    if not math.isfinite(lam):
        raise DomainError(f"lambda must be finite, got {lam!r}")
    return lam


def _grading_exponent(e: float) -> t.Optional[float]:
    # |z|^(e-2) z is smooth when e - 1 is an odd integer; elsewhere RK4 loses order near z = 0
    if e >= 5. or (e - 1.) % 2. == 1.:
        return None
    return 1. - e / 5.


def _distance(z: float, dz: float) -> float:
    # linear estimate of the distance to the next zero of z
    return abs(z) / abs(dz) if dz != 0. else math.inf


def _step_fraction(dist: float, exponent: t.Optional[float]) -> float:
    if exponent is None or dist >= 1.:
        return 1.
    return dist**exponent


def integrate_ivp(ctx: ExponentContext, lam: t.Union[SpectralShift, float],
                  potential: PotentialSpec = ZeroPotential(), steps: int = 20000, *,
                  v0: float = 1., length: t.Optional[float] = None,
                  bound: float = DEFAULT_BOUND) -> Trajectory:
    """
    Integrate from `(u, v) = (0, v0)` at `x = 0` to `x = length` (default `pi_p`) in `steps` RK4 steps.

    A step within `length / 4` of a zero of `u` (or `v`) is subdivided with substeps shrinking like
    a power of the distance to the zero, unless the corresponding power term is a polynomial.

    `lam` may be any real (the initial value problem doesn't need `lambda < lambda1`).
    Raises [`IntegrationOverflowError`][plaplib.util.IntegrationOverflowError] if `|u|` exceeds `bound`.
    """
    lam = _lam_value(ctx, lam)
    if steps < MIN_STEPS:
        raise DomainError(f"Need at least {MIN_STEPS} steps, got {steps}")
    length = ctx.pi_p if length is None else float(length)
    (p, q) = (ctx.p, ctx.q)
    (ep, eq) = (p - 1., q - 1.)
    h = length / steps

    # potential at every node and midpoint
    half_x = numpy.linspace(0., length, 2 * steps + 1)
    coeff = (lam + potential(half_x)).tolist()

    us = numpy.empty(steps + 1)
    vs = numpy.empty(steps + 1)
    (u, v) = (0., float(v0))
    us[0] = u
    vs[0] = v

    def fu(v: float) -> float:
        return math.copysign(abs(v)**eq, v)

    def fv(c: float, u: float) -> float:
        return -c * math.copysign(abs(u)**ep, u)

    def rk4(u: float, v: float, dt: float, c0: float, c1: float, c2: float) -> t.Tuple[float, float]:
        k1u = fu(v)
        k1v = fv(c0, u)
        k2u = fu(v + 0.5 * dt * k1v)
        k2v = fv(c1, u + 0.5 * dt * k1u)
        k3u = fu(v + 0.5 * dt * k2v)
        k3v = fv(c1, u + 0.5 * dt * k2u)
        k4u = fu(v + dt * k3v)
        k4v = fv(c2, u + dt * k3u)
        return (u + dt / 6. * (k1u + 2. * k2u + 2. * k3u + k4u),
                v + dt / 6. * (k1v + 2. * k2v + 2. * k3v + k4v))

    grade_u = _grading_exponent(p)
    grade_v = _grading_exponent(q)
    graded = [e for (e, g) in ((p, grade_u), (q, grade_v)) if g is not None]
    # a single substep across a zero of u or v has local error O(min_dt^e) = O(h^5)
    min_dt = h**(5. / min(graded)) if graded else h
    scale = 0.25 * length

    for i in range(steps):
        (c0, c1, c2) = (coeff[2 * i], coeff[2 * i + 1], coeff[2 * i + 2])
        if not graded:
            (u, v) = rk4(u, v, h, c0, c1, c2)
        else:
            # quadratic through the node, midpoint and node values of lambda + r
            (b1, b2) = (4. * c1 - 3. * c0 - c2, 2. * (c0 - 2. * c1 + c2))

            def c_at(s: float) -> float:
                return c0 + (b1 + b2 * (s / h)) * (s / h)

            s = 0.
            while s < h and math.isfinite(u):
                c = c_at(s)
                frac = min(_step_fraction(_distance(u, fu(v)) / scale, grade_u),
                           _step_fraction(_distance(v, fv(c, u)) / scale, grade_v))
                dt = min(h - s, max(min_dt, h * frac))
                if dt == h:
                    (u, v) = rk4(u, v, h, c0, c1, c2)
                else:
                    (u, v) = rk4(u, v, dt, c, c_at(s + 0.5 * dt), c_at(s + dt))
                s = h if dt == h - s else s + dt

        if not abs(u) <= bound:
            raise IntegrationOverflowError((i + 1) * h, u, bound)
        us[i + 1] = u
        vs[i + 1] = v

    return Trajectory(half_x[::2].copy(), us, vs, p, lam)


def miss_distance(ctx: ExponentContext, lam: t.Union[SpectralShift, float],
                  potential: PotentialSpec = ZeroPotential(), steps: int = 20000) -> float:
    """
    Return `u(pi_p)` of the normalized shot `u(0) = 0, v(0) = 1`.

    A zero miss certifies a nontrivial solution of the boundary value problem.
    """
    return integrate_ivp(ctx, lam, potential, steps).miss


def verify_lyapunov_threshold(ctx: ExponentContext, shift: SpectralShift, tent: TentProfile,
                              amplitudes: t.Sequence[float], steps: int = 20000,
                              tol: float = 1e-3) -> polars.DataFrame:
    """
    Shoot with potentials `a * r_delta` for each amplitude `a`.

    Returns a frame with columns `amplitude`, `r_plus_l1` ($\\|(a r_\\delta)_+\\|_1 = a$), `miss`,
    `abs_miss`, `solves` (`|miss| < tol`), `above_constant` (`a > C(p, lambda)`), and
    `consistent`. A solution can only exist above the sharp constant, so `consistent`
    should hold in every row.
    """
    amplitudes = [float(a) for a in amplitudes]
    if any(b < a for (a, b) in zip(amplitudes, amplitudes[1:])):
        raise DomainError("Amplitudes must be sorted in ascending order")
    tent.check_within(ctx.pi_p)
    constant = lyapunov_constant(ctx, shift).value

    rows: t.List[t.Dict[str, t.Any]] = []
    for a in amplitudes:
        potential = TentPotential(tent, a)
        miss = miss_distance(ctx, shift, potential, steps)
        solves = abs(miss) < tol
        above = a > constant
        logging.debug(f"amplitude {a:.9g}: miss {miss:.3e}")
        rows.append({
            'amplitude': a,
            'r_plus_l1': potential.positive_part_l1(ctx.pi_p),
            'miss': miss,
            'abs_miss': abs(miss),
            'solves': solves,
            'above_constant': above,
            'consistent': above or not solves,
        })

    return polars.DataFrame(rows, schema={
        'amplitude': polars.Float64, 'r_plus_l1': polars.Float64, 'miss': polars.Float64,
        'abs_miss': polars.Float64, 'solves': polars.Boolean, 'above_constant': polars.Boolean,
        'consistent': polars.Boolean,
    })


def energy_identity_residual(ctx: ExponentContext, trajectory: Trajectory,
                             potential: PotentialSpec = ZeroPotential()) -> float:
    """
    Residual of the energy identity $\\int |u'|^p - \\int (\\lambda + r)|u|^p = u(L) v(L)$
    along a shot, relative to $\\int |u'|^p$.

    Obtained by multiplying the equation by `u` and integrating by parts.
    For a shot with zero miss, this says $J(u) = \\int r |u|^p$.
    """
    p = ctx.p
    (x, u) = (trajectory.x, trajectory.u)
    grad = integrate.simpson(numpy.abs(trajectory.du)**p, x=x)
    pot = integrate.simpson((trajectory.lam + potential(x)) * numpy.abs(u)**p, x=x)
    boundary = u[-1] * trajectory.v[-1]
    return float(abs(grad - pot - boundary) / grad)


def first_integral_residual(ctx: ExponentContext, trajectory: Trajectory) -> float:
    """
    Maximum drift of the first integral $|v|^q + \\lambda |u|^p / (p-1)$ along a shot with `r = 0`.

    At `lambda = p - 1` this is the identity $|\\cos_p x|^p + |\\sin_p x|^p = 1$.
    """
    (p, q) = (ctx.p, ctx.q)
    e = numpy.abs(trajectory.v)**q + trajectory.lam / (p - 1.) * numpy.abs(trajectory.u)**p
    return float(numpy.max(numpy.abs(e - e[0])))


def step_halving_ratio(ctx: ExponentContext, lam: t.Union[SpectralShift, float],
                       potential: PotentialSpec = ZeroPotential(), steps: int = 200) -> float:
    """
    Return `|m(N) - m(2N)| / |m(2N) - m(4N)|` for miss distances `m` at `N = steps`.

    About 16 for a fourth-order method on a smooth problem.
    """
    (m1, m2, m4) = (miss_distance(ctx, lam, potential, n) for n in (steps, 2 * steps, 4 * steps))
    denom = abs(m2 - m4)
    if denom == 0.:
        return math.inf
    return abs(m1 - m2) / denom


__all__ = [
    'PotentialSpec', 'ZeroPotential', 'ConstantPotential', 'TentPotential', 'TabulatedPotential',
    'ShootingState', 'Trajectory',
    'integrate_ivp', 'miss_distance', 'verify_lyapunov_threshold',
    'energy_identity_residual', 'first_integral_residual', 'step_halving_ratio',
]
