"""
Numerical invariant suites.

Each suite returns a [`polars.DataFrame`][polars.DataFrame] with one row per check and columns
`check`, `p`, `max_residual`, `tolerance`, and `passed`.
"""

from __future__ import annotations

import logging
import math
import typing as t

import numpy
import polars
from scipy import integrate

from .ptrig import ExponentContext, pi_p_quadrature, arcsin_p, sin_p, cos_p, cot_p
from .ptrig import arcsinh_p, sinh_p, cosh_p, coth_p
from .lyapunov import SpectralShift, lyapunov_constant, F_closed
from .lyapunov import int_cos_p_pow, int_sin_p_pow, int_cosh_p_pow, int_sinh_p_pow
from .shooting import integrate_ivp, first_integral_residual, step_halving_ratio
from .util import DomainError


SuiteName = t.Literal['identities', 'integrals', 'ivp', 'reduction', 'lyapunov']

DEFAULT_PS: t.Dict[str, t.Tuple[float, ...]] = {
    'identities': (1.2, 1.5, 2., 3., 5.),
    'integrals': (1.2, 1.5, 2., 3., 5.),
    'ivp': (1.5, 2., 3.),
    'reduction': (2.,),
    'lyapunov': (1.5, 2., 3., 4.),
}

SCHEMA = {
    'check': polars.Utf8, 'p': polars.Float64, 'max_residual': polars.Float64,
    'tolerance': polars.Float64, 'passed': polars.Boolean,
}


class _Checks:
    def __init__(self):
        self.rows: t.List[t.Dict[str, t.Any]] = []

    def add(self, check: str, p: float, residual: t.Any, tolerance: float):
        residual = float(numpy.max(numpy.abs(residual)))
        passed = bool(residual <= tolerance)
        if not passed:
            logging.warning(f"Check '{check}' failed for p={p}: residual {residual:.3e} > {tolerance:.1e}")
        self.rows.append({'check': check, 'p': float(p), 'max_residual': residual,
                          'tolerance': tolerance, 'passed': passed})

    def frame(self) -> polars.DataFrame:
        return polars.DataFrame(self.rows, schema=SCHEMA)


def identities(ps: t.Optional[t.Sequence[float]] = None, points: int = 1000, seed: int = 0) -> polars.DataFrame:
    """Identities, symmetries, derivatives and round trips of the generalized trig functions."""
    checks = _Checks()
    rng = numpy.random.default_rng(seed)
    for p in ps or DEFAULT_PS['identities']:
        ctx = ExponentContext(p)
        xs = rng.uniform(-3. * ctx.pi_p, 3. * ctx.pi_p, size=points)
        checks.add('p_pythagorean', p, numpy.abs(cos_p(ctx, xs))**p + numpy.abs(sin_p(ctx, xs))**p - 1., 1e-12)

        # rounding in cosh_p^p grows with sinh_p^p
        xs = rng.uniform(-2., 2., size=points)
        checks.add('hyperbolic_identity', p, cosh_p(ctx, xs)**p - numpy.abs(sinh_p(ctx, xs))**p - 1., 1e-11)

        xs = rng.uniform(-2. * ctx.pi_p, 2. * ctx.pi_p, size=points // 10)
        s = sin_p(ctx, xs)
        residual = numpy.concatenate([
            sin_p(ctx, ctx.pi_p - xs) - s,
            sin_p(ctx, -xs) + s,
            sin_p(ctx, xs + 2. * ctx.pi_p) - s,
        ])
        checks.add('sin_p_symmetry', p, residual, 1e-12)

        h = 1e-5
        xs = (numpy.arange(200) + 0.5) * 2. * ctx.pi_p / 200.
        checks.add('sin_p_derivative', p, (sin_p(ctx, xs + h) - sin_p(ctx, xs - h)) / (2. * h) - cos_p(ctx, xs), 1e-6)
        xs = numpy.linspace(-3., 3., 200)
        diff = (sinh_p(ctx, xs + h) - sinh_p(ctx, xs - h)) / (2. * h)
        checks.add('sinh_p_derivative', p, (diff - cosh_p(ctx, xs)) / cosh_p(ctx, xs), 1e-6)

        # sin_p' vanishes at pi_p/2, so the round trip is taken from the arcsin_p side
        ss = numpy.linspace(0., 1., 100)
        checks.add('arcsin_p_round_trip', p, sin_p(ctx, arcsin_p(ctx, ss)) - ss, 1e-12)
        xs = numpy.linspace(0., 20., 100)
        checks.add('arcsinh_p_round_trip', p, arcsinh_p(ctx, sinh_p(ctx, xs)) - xs, 1e-9)

        checks.add('pi_p_quadrature', p, ctx.pi_p - pi_p_quadrature(p), 1e-10)
    return checks.frame()


def _cumulative_quad(f: t.Callable[[numpy.ndarray], numpy.ndarray], zs: numpy.ndarray,
                     breaks: t.Sequence[float] = ()) -> numpy.ndarray:
    # integrate f from 0 to each z, over pieces between consecutive knots, with no break inside a piece
    breaks = numpy.asarray(breaks, dtype=numpy.float64)
    knots = numpy.unique(numpy.concatenate([[0.], breaks[breaks < zs.max()], zs]))
    (start, width) = (knots[:-1], numpy.diff(knots))

    def integrand(tau: float) -> numpy.ndarray:
        return width * f(start + width * tau)

    (pieces, _) = integrate.quad_vec(integrand, 0., 1., epsabs=1e-12, epsrel=1e-12, norm='max', limit=2000)
    total = numpy.concatenate([numpy.zeros(pieces.shape[:-1] + (1,)), numpy.cumsum(pieces, axis=-1)], axis=-1)
    return total[..., numpy.searchsorted(knots, zs)]


def integrals(ps: t.Optional[t.Sequence[float]] = None, count: int = 100, seed: int = 0) -> polars.DataFrame:
    """Closed-form integrals of powers of the generalized trig functions, against quadrature."""
    checks = _Checks()
    rng = numpy.random.default_rng(seed)
    for p in ps or DEFAULT_PS['integrals']:
        ctx = ExponentContext(p)
        zs = rng.uniform(0., 2. * ctx.pi_p, size=count)
        i1 = int_cos_p_pow(ctx, zs)
        i2 = int_sin_p_pow(ctx, zs)
        # |cos_p|^p and |sin_p|^p are only piecewise smooth, with breaks at multiples of pi_p/2
        quarters = 0.5 * ctx.pi_p * numpy.arange(1, 5)
        (q1, q2) = _cumulative_quad(lambda x: numpy.stack([
            numpy.abs(cos_p(ctx, x))**p, numpy.abs(sin_p(ctx, x))**p
        ]), zs, quarters)
        checks.add('int_cos_p_pow', p, i1 - q1, 1e-9)
        checks.add('int_sin_p_pow', p, i2 - q2, 1e-9)
        checks.add('trig_sum_identity', p, i1 + i2 - zs, 1e-10)

        zs = rng.uniform(0., 3., size=count)
        i1 = int_cosh_p_pow(ctx, zs)
        i2 = int_sinh_p_pow(ctx, zs)
        (q1, q2) = _cumulative_quad(lambda x: numpy.stack([
            cosh_p(ctx, x)**p, numpy.abs(sinh_p(ctx, x))**p
        ]), zs)
        checks.add('int_cosh_p_pow', p, (i1 - q1) / numpy.maximum(1., i1), 1e-9)
        checks.add('int_sinh_p_pow', p, (i2 - q2) / numpy.maximum(1., i1), 1e-9)
        checks.add('hyperbolic_difference_identity', p, (i1 - i2 - zs) / numpy.maximum(1., i1), 1e-10)
    return checks.frame()


def ivp(ps: t.Optional[t.Sequence[float]] = None, steps: int = 20000) -> polars.DataFrame:
    """Shooting trajectories at `lambda = +-(p - 1)` against `sin_p` and `sinh_p`."""
    checks = _Checks()
    for p in ps or DEFAULT_PS['ivp']:
        ctx = ExponentContext(p)
        traj = integrate_ivp(ctx, ctx.lambda1, steps=steps)
        # v = 0 at the quarter period, where u' = |v|^(q-2) v is only Holder for p > 2
        tol = 1e-6 if p <= 2. else 1e-5
        checks.add('sin_p_trajectory', p, traj.u - sin_p(ctx, traj.x), tol)
        checks.add('sin_p_miss', p, traj.miss, tol)
        checks.add('first_integral', p, first_integral_residual(ctx, traj), 1e-8 if p <= 2. else 1e-5)

        traj = integrate_ivp(ctx, -ctx.lambda1, steps=steps)
        expected = sinh_p(ctx, traj.x)
        checks.add('sinh_p_trajectory', p, (traj.u - expected) / numpy.max(expected), 1e-6)

        # report the shortfall below 8x error reduction
        for (name, lam) in (('lambda1', ctx.lambda1), ('-lambda1', -ctx.lambda1)):
            ratio = step_halving_ratio(ctx, lam, steps=200)
            checks.add(f'step_halving({name})', p, max(0., 8. - ratio), 0.)
    return checks.frame()


def reduction(ps: t.Optional[t.Sequence[float]] = None) -> polars.DataFrame:
    """At `p = 2`, every function reduces to its classical counterpart."""
    checks = _Checks()
    p = 2.
    ctx = ExponentContext(p)
    xs = numpy.linspace(-10., 10., 100)
    checks.add('sin_p', p, sin_p(ctx, xs) - numpy.sin(xs), 1e-10)
    checks.add('cos_p', p, cos_p(ctx, xs) - numpy.cos(xs), 1e-10)
    checks.add('sinh_p', p, (sinh_p(ctx, xs) - numpy.sinh(xs)) / numpy.cosh(xs), 1e-10)
    checks.add('cosh_p', p, (cosh_p(ctx, xs) - numpy.cosh(xs)) / numpy.cosh(xs), 1e-10)

    xs = numpy.linspace(0.05, 3., 100)
    checks.add('cot_p', p, (cot_p(ctx, xs) - 1. / numpy.tan(xs)) / numpy.maximum(1., 1. / numpy.abs(numpy.tan(xs))), 1e-10)
    checks.add('coth_p', p, (coth_p(ctx, xs) - 1. / numpy.tanh(xs)) / numpy.maximum(1., 1. / numpy.tanh(xs)), 1e-10)
    xs = numpy.linspace(0., 1., 100)
    checks.add('arcsin_p', p, arcsin_p(ctx, xs) - numpy.arcsin(xs), 1e-10)
    xs = numpy.linspace(0., 30., 100)
    checks.add('arcsinh_p', p, arcsinh_p(ctx, xs) - numpy.arcsinh(xs), 1e-10)
    checks.add('pi_p', p, ctx.pi_p - math.pi, 1e-14)

    for lam in (-4., -1., 0., 0.25, 0.81):
        checks.add(f'lyapunov_constant(lambda={lam:g})', p,
                   lyapunov_constant(ctx, SpectralShift(lam, p)).value - classical_constant(lam), 1e-10)
    return checks.frame()


def classical_constant(lam: float) -> float:
    """The constant for `p = 2`, in terms of elementary functions."""
    if lam > 0.:
        k = math.sqrt(lam)
        return 2. * k / math.tan(k * math.pi / 2.)
    if lam < 0.:
        k = math.sqrt(-lam)
        return 2. * k / math.tanh(k * math.pi / 2.)
    return 4. / math.pi


def lyapunov(ps: t.Optional[t.Sequence[float]] = None) -> polars.DataFrame:
    """Branch formulas, their continuity at `lambda = 0`, and the minimum of `F`."""
    checks = _Checks()
    for p in ps or DEFAULT_PS['lyapunov']:
        ctx = ExponentContext(p)
        c0 = lyapunov_constant(ctx, SpectralShift(0., p)).value
        checks.add('zero_branch', p, c0 - 2.**p / ctx.pi_p**(p - 1.), 1e-12)
        for lam in (1e-8, -1e-8):
            checks.add(f'continuity(lambda={lam:g})', p, lyapunov_constant(ctx, SpectralShift(lam, p)).value - c0, 1e-5)

        for lam in (-2. * ctx.lambda1, 0., 0.5 * ctx.lambda1):
            shift = SpectralShift(lam, p)
            c = lyapunov_constant(ctx, shift).value
            checks.add(f'F_minimum(lambda={lam:g})', p, F_closed(ctx, shift, 0.5 * ctx.pi_p) - c, 1e-12)
            ys = numpy.linspace(0.05, 1., 40) * 0.5 * ctx.pi_p
            # F is decreasing: report any increase
            checks.add(f'F_decreasing(lambda={lam:g})', p, numpy.maximum(numpy.diff(F_closed(ctx, shift, ys)), 0.), 0.)
    return checks.frame()


SUITES: t.Dict[str, t.Callable[..., polars.DataFrame]] = {
    'identities': identities,
    'integrals': integrals,
    'ivp': ivp,
    'reduction': reduction,
    'lyapunov': lyapunov,
}


def run_suite(name: str, ps: t.Optional[t.Sequence[float]] = None) -> polars.DataFrame:
    """Run suite `name`, over the exponents `ps` (or the suite's default grid)."""
    try:
        suite = SUITES[name]
    except KeyError:
        raise DomainError(f"Unknown suite '{name}'. Expected one of {', '.join(SUITES)}") from None
    return suite(ps)


def all_passed(frame: polars.DataFrame) -> bool:
    return bool(frame['passed'].all())


__all__ = [
    'SUITES', 'DEFAULT_PS', 'identities', 'integrals', 'ivp', 'reduction', 'lyapunov',
    'classical_constant', 'run_suite', 'all_passed',
]
