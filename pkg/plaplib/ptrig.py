r"""
Generalized trigonometric and hyperbolic functions.

For an exponent $1 < p < \infty$, the generalized sine $\sin_p$ is the inverse of

$$\arcsin_p x = \int_0^x \frac{dt}{(1 - t^p)^{1/p}}, \quad 0 \le x \le 1,$$

extended to $\mathbb{R}$ by $\sin_p x = \sin_p(\pi_p - x)$ and oddness. Its half-period is

$$\pi_p = 2 \arcsin_p 1 = \frac{2\pi}{p \sin(\pi/p)},$$

and $\cos_p = \sin_p'$ satisfies $|\cos_p x|^p + |\sin_p x|^p = 1$.
The hyperbolic family is built the same way from
$\operatorname{arcsinh}_p x = \int_0^x (1 + t^p)^{-1/p} dt$, with
$(\cosh_p x)^p - |\sinh_p x|^p = 1$.

All functions accept scalars or arrays, and return a `float` for scalar input.
They are pure functions of an immutable [`ExponentContext`][plaplib.ptrig.ExponentContext],
so they may be called concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
import logging
import math
import typing as t

import numpy
from scipy import special, integrate

from .types import FloatArray, RealLike, to_float_array, unwrap
from .util import DomainError, PoleError


P_MIN: float = 1. + 1e-8
"""Smallest accepted exponent. `pi_p` diverges as `p -> 1`."""
EPS: float = float(numpy.finfo(numpy.float64).eps)


def _check_p(p: float) -> float:
    try:
        p = float(p)
    except (TypeError, ValueError):
        raise DomainError(f"Invalid exponent p='{p!r}'") from None
    if not math.isfinite(p) or p <= P_MIN:
        raise DomainError(f"Exponent must be finite and greater than 1 (+1e-8), got p={p!r}")
    return p


def pi_p(p: float) -> float:
    """
    Return the generalized $\\pi_p = 2\\pi / (p \\sin(\\pi/p))$, the half-period of `sin_p`.

    # Examples
    ```python
    >>> pi_p(2.)
    3.141592653589793
    >>> round(pi_p(3.), 12)
    2.418399152312
    ```
    """
    p = _check_p(p)
    return 2. * math.pi / (p * math.sin(math.pi / p))


def pi_p_quadrature(p: float) -> float:
    """
    Compute $\\pi_p = 2 \\int_0^1 (1 - t^p)^{-1/p} dt$ by adaptive quadrature.

    The algebraic endpoint singularity at `t = 1` is handed to QUADPACK as a weight function.
    Used to cross-check the closed form [`pi_p`][plaplib.ptrig.pi_p].
    """
    p = _check_p(p)

    def smooth_part(s: float) -> float:
        # (1 - s^p)^(-1/p) / (1 - s)^(-1/p)
        if s >= 1.:
            return (1. / p)**(1. / p)
        return ((1. - s) / -math.expm1(p * math.log(s)))**(1. / p) if s > 0. else 1.

    val, _ = integrate.quad(smooth_part, 0., 1., weight='alg', wvar=(0., -1. / p),
                            epsabs=1e-14, epsrel=1e-14, limit=200)
    return 2. * val


@dataclass(frozen=True)
class ExponentContext:
    """
    An exponent `p` together with its derived quantities.

    Construction rejects `p <= 1 + 1e-8`. `fast` selects a looser inversion
    tolerance for parameter sweeps.
    """

    p: float
    """Exponent, `p > 1`"""
    fast: bool = False
    """Trade accuracy (~1e-9) for speed in inversions and quadratures."""

    q: float = field(init=False)
    """Conjugate exponent `p / (p - 1)`"""
    lambda1: float = field(init=False)
    """First Dirichlet eigenvalue on `(0, pi_p)`, `p - 1`"""
    pi_p: float = field(init=False)
    """Generalized pi"""

    def __post_init__(self):
        p = _check_p(self.p)
        object.__setattr__(self, 'p', p)
        object.__setattr__(self, 'q', p / (p - 1.))
        object.__setattr__(self, 'lambda1', p - 1.)
        object.__setattr__(self, 'pi_p', pi_p(p))

    @property
    def tol(self) -> float:
        """Absolute/relative tolerance used by inversions."""
        return 1e-9 if self.fast else 4e-16

    @property
    def max_iter(self) -> int:
        return 30 if self.fast else 100

    @property
    def quad_eps(self) -> float:
        return 1e-10 if self.fast else 1e-14

    @cached_property
    def arcsinh_p_one(self) -> float:
        """`arcsinh_p(1)`"""
        a = 1. / self.p
        return float(special.hyp2f1(a, a, 1. + a, -1.))

    @cached_property
    def beta_p(self) -> float:
        """
        Asymptotic offset $\\beta_p = \\lim_{t \\to \\infty} (\\operatorname{arcsinh}_p t - \\ln t)$.

        Computed once per context by quadrature of the tail.
        """
        tail, _ = integrate.quad(_tail_integrand, 0., 1., args=(self.p,),
                                 epsabs=self.quad_eps, epsrel=self.quad_eps, limit=200)
        beta = self.arcsinh_p_one + tail
        logging.debug(f"beta_p(p={self.p}) = {beta!r}")
        return beta

    def __repr__(self) -> str:
        return f"ExponentContext(p={self.p!r}, fast={self.fast!r})"


def _tail_integrand(w: float, p: float) -> float:
    # ((1 + w^p)^(-1/p) - 1) / w, regular at w = 0 for p > 1
    if w <= 0.:
        return 0.
    return math.expm1(-math.log1p(w**p) / p) / w


def _tail_series(y: FloatArray, p: float) -> FloatArray:
    """
    $G(y) = \\int_0^y ((1 + w^p)^{-1/p} - 1) / w \\, dw$ as a binomial series, for `0 <= y <= 1/2`.
    """
    z = y**p
    a = 1. / p
    coeff = numpy.ones_like(z)
    power = numpy.ones_like(z)
    total = numpy.zeros_like(z)
    for k in range(1, 400):
        coeff = coeff * (-a - k + 1.) / k
        power = power * z
        term = coeff * power / (p * k)
        total += term
        if numpy.all(numpy.abs(term) < 1e-18):
            break
    return total


def _solve_increasing(f: t.Callable[[FloatArray], FloatArray],
                      fprime: t.Callable[[FloatArray], FloatArray],
                      target: FloatArray, lo: FloatArray, hi: FloatArray, x0: FloatArray,
                      tol: float, max_iter: int) -> FloatArray:
    """
    Solve `f(x) = target` for increasing `f`, elementwise, given a bracket `[lo, hi]`.

    Newton steps are taken when they land strictly inside the (shrinking) bracket,
    bisection steps otherwise. `f` and `fprime` are only evaluated on unconverged entries.
    """
    shape = target.shape
    target = target.ravel()
    lo = numpy.array(lo, dtype=numpy.float64).ravel()
    hi = numpy.array(hi, dtype=numpy.float64).ravel()
    x = numpy.clip(numpy.ravel(x0), lo, hi)
    active = hi > lo

    for _ in range(max_iter):
        if not numpy.any(active):
            break
        idx = numpy.flatnonzero(active)
        xa = x[idx]
        fa = f(xa) - target[idx]
        lo_a = numpy.where(fa <= 0., xa, lo[idx])
        hi_a = numpy.where(fa >= 0., xa, hi[idx])

        with numpy.errstate(divide='ignore', invalid='ignore', over='ignore'):
            x_new = xa - fa / fprime(xa)
        bad = ~numpy.isfinite(x_new) | (x_new <= lo_a) | (x_new >= hi_a)
        x_new = numpy.where(bad, 0.5 * (lo_a + hi_a), x_new)
        x_new = numpy.where(fa == 0., xa, x_new)

        scale = numpy.maximum(1., numpy.abs(xa))
        done = (fa == 0.) | (numpy.abs(x_new - xa) <= tol * scale) | (hi_a - lo_a <= tol * scale)

        x[idx] = x_new
        lo[idx] = lo_a
        hi[idx] = hi_a
        active[idx[done]] = False
    else:
        if numpy.any(active):
            logging.warning(f"Inversion didn't converge for {numpy.count_nonzero(active)} value(s)")

    return x.reshape(shape)


def _arcsin_p(ctx: ExponentContext, x: FloatArray) -> FloatArray:
    p = ctx.p
    a = 1. / p
    with numpy.errstate(divide='ignore'):
        log_x = numpy.log(x)
    w = numpy.exp(p * log_x)
    # 1 - x^p without cancellation near x = 1
    w_c = -numpy.expm1(p * log_x)
    return 0.5 * ctx.pi_p * numpy.where(
        w > 0.5, 1. - special.betainc(1. - a, a, w_c), special.betainc(a, 1. - a, w)
    )


def arcsin_p(ctx: ExponentContext, x: RealLike) -> t.Any:
    """
    Generalized arcsine $\\arcsin_p x = \\int_0^x (1 - t^p)^{-1/p} dt$, for `0 <= x <= 1`.

    Substituting `s = t^p` turns the integral into an incomplete beta function,
    $\\arcsin_p x = \\frac{\\pi_p}{2} I_{x^p}(1/p, 1 - 1/p)$, which removes the
    endpoint singularity at `x = 1`. Above `x^p = 1/2`, the complementary function
     - I_{1 - x^p}(1 - 1/p, 1/p) used, with `1 - x^p` formed by `expm1`.
    """
    arr = to_float_array(x)
    if numpy.any((arr < 0.) | (arr > 1.)):
        raise DomainError(f"arcsin_p is defined on [0, 1], got x={x!r}")
    return unwrap(_arcsin_p(ctx, arr), x)


def _sin_p_quadrant(ctx: ExponentContext, r: FloatArray) -> FloatArray:
    """`sin_p` on `[0, pi_p/2]`."""
    p = ctx.p
    w = numpy.clip(r / (0.5 * ctx.pi_p), 0., 1.)
    # incomplete beta inverse as the starting point, polished by Newton
    x0 = special.betaincinv(1. / p, 1. - 1. / p, w)**(1. / p)

    def darcsin(s: FloatArray) -> FloatArray:
        return (-numpy.expm1(p * numpy.log(s)))**(-1. / p)

    return _solve_increasing(lambda s: _arcsin_p(ctx, s), darcsin, r,
                             numpy.zeros_like(r), numpy.ones_like(r), x0,
                             ctx.tol, ctx.max_iter)


def _reduce_sin(ctx: ExponentContext, x: FloatArray) -> t.Tuple[FloatArray, FloatArray]:
    """Reduce `x` to `r` in `[0, pi_p/2]` and a sign, with `sin_p(x) = sign * sin_p(r)`."""
    half = ctx.pi_p
    sign = numpy.where(x < 0., -1., 1.)
    r = numpy.mod(numpy.abs(x), 2. * half)
    # sin_p(x + pi_p) = -sin_p(x)
    upper = r > half
    sign = numpy.where(upper, -sign, sign)
    r = numpy.where(upper, r - half, r)
    # sin_p(pi_p - x) = sin_p(x)
    r = numpy.where(r > 0.5 * half, half - r, r)
    return (numpy.clip(r, 0., 0.5 * half), sign)


def _reduce_cos(ctx: ExponentContext, x: FloatArray) -> t.Tuple[FloatArray, FloatArray]:
    """Reduce `x` to `r` in `[0, pi_p/2]` and a sign, with `cos_p(x) = sign * cos_p(r)`."""
    half = ctx.pi_p
    r = numpy.mod(numpy.abs(x), 2. * half)
    # even and 2 pi_p periodic
    r = numpy.where(r > half, 2. * half - r, r)
    # cos_p(pi_p - x) = -cos_p(x)
    lower = r > 0.5 * half
    sign = numpy.where(lower, -1., 1.)
    r = numpy.where(lower, half - r, r)
    return (numpy.clip(r, 0., 0.5 * half), sign)


def _sin_p(ctx: ExponentContext, x: FloatArray) -> FloatArray:
    r, sign = _reduce_sin(ctx, x)
    return sign * _sin_p_quadrant(ctx, r)


def _cos_p(ctx: ExponentContext, x: FloatArray) -> FloatArray:
    r, sign = _reduce_cos(ctx, x)
    s = _sin_p_quadrant(ctx, r)
    return sign * numpy.maximum(-numpy.expm1(ctx.p * numpy.log(numpy.maximum(s, 1e-300))), 0.)**(1. / ctx.p)


def sin_p(ctx: ExponentContext, x: RealLike) -> t.Any:
    """
    Generalized sine. Odd, `2 pi_p`-periodic, and the inverse of
    [`arcsin_p`][plaplib.ptrig.arcsin_p] on `[0, pi_p/2]`.
    """
    arr = to_float_array(x)
    return unwrap(_sin_p(ctx, arr), x)


def cos_p(ctx: ExponentContext, x: RealLike) -> t.Any:
    """
    Generalized cosine $\\cos_p = \\sin_p'$.

    Computed as $(1 - |\\sin_p x|^p)^{1/p}$ on the fundamental quadrant. The sign is positive on
    $(-\\pi_p/2, \\pi_p/2)$ and negative on the complementary half-period (modulo $2\\pi_p$).
    """
    arr = to_float_array(x)
    return unwrap(_cos_p(ctx, arr), x)


def cot_p(ctx: ExponentContext, x: RealLike) -> t.Any:
    """
    Generalized cotangent `cos_p(x) / sin_p(x)`. Raises [`PoleError`][plaplib.util.PoleError]
    at integer multiples of `pi_p`.
    """
    arr = to_float_array(x)
    (r, _) = _reduce_sin(ctx, arr)
    # reduction of |x| >= pi_p/2 is only exact to a few ulps of |x|
    near_pole = (r == 0.) | ((numpy.abs(arr) >= 0.5 * ctx.pi_p) & (r <= 8. * EPS * numpy.abs(arr)))
    if numpy.any(near_pole):
        raise PoleError(f"cot_p has a pole at multiples of pi_p={ctx.pi_p!r}, got x={x!r}")
    return unwrap(_cos_p(ctx, arr) / _sin_p(ctx, arr), x)


def _arcsinh_p(ctx: ExponentContext, x: FloatArray) -> FloatArray:
    p = ctx.p
    a = 1. / p
    out = numpy.empty_like(x)

    small = x <= 1.
    mid = (x > 1.) & (x < 2.)
    large = x >= 2.

    if numpy.any(small):
        xs = x[small]
        out[small] = xs * special.hyp2f1(a, a, 1. + a, -xs**p)

    if numpy.any(mid):
        def integrand(s: float) -> float:
            return (1. + s**p)**-a

        out[mid] = [
            ctx.arcsinh_p_one + integrate.quad(integrand, 1., float(xm), epsabs=ctx.quad_eps,
                                               epsrel=ctx.quad_eps)[0]
            for xm in x[mid]
        ]

    if numpy.any(large):
        # logarithmic tail: the integrand behaves like 1/t
        xl = x[large]
        out[large] = ctx.beta_p + numpy.log(xl) - _tail_series(1. / xl, p)

    return out


def arcsinh_p(ctx: ExponentContext, x: RealLike) -> t.Any:
    """
    Generalized inverse hyperbolic sine $\\int_0^x (1 + t^p)^{-1/p} dt$, for `x >= 0`.

    Odd extension is left to [`sinh_p`][plaplib.ptrig.sinh_p].
    For large `x` this is evaluated as $\\beta_p + \\ln x - G(1/x)$, where $G$ is a
    binomial series for the deviation of the integrand from $1/t$.
    """
    arr = to_float_array(x)
    if numpy.any(arr < 0.):
        raise DomainError(f"arcsinh_p is defined for x >= 0, got x={x!r}")
    return unwrap(_arcsinh_p(ctx, arr), x)


def _sinh_p(ctx: ExponentContext, x: FloatArray) -> FloatArray:
    p = ctx.p
    ax = numpy.abs(x)
    big = ax > 1.
    with numpy.errstate(over='ignore'):
        # arcsinh_p(t) <= min(t, 1 + ln t) and arcsinh_p(t) >= ln(1 + t)
        lo = numpy.where(big, numpy.exp(ax - 1.), ax)
        hi = numpy.expm1(ax)
        x0 = numpy.where(big, numpy.exp(ax - ctx.beta_p), ax) if numpy.any(big) else ax

    def darcsinh(s: FloatArray) -> FloatArray:
        return numpy.exp(-numpy.log1p(s**p) / p)

    s = _solve_increasing(lambda s: _arcsinh_p(ctx, s), darcsinh, ax, lo, hi, x0,
                          ctx.tol, ctx.max_iter)
    return numpy.copysign(s, x)


def _cosh_p_from_sinh(ctx: ExponentContext, s: FloatArray) -> FloatArray:
    a = numpy.abs(s)
    p = ctx.p
    with numpy.errstate(divide='ignore', over='ignore', invalid='ignore'):
        # a * (1 + a^-p)^(1/p) avoids overflow for large a
        return numpy.where(
            a > 1., a * numpy.exp(numpy.log1p(a**-p) / p), numpy.exp(numpy.log1p(a**p) / p)
        )


def sinh_p(ctx: ExponentContext, x: RealLike) -> t.Any:
    """
    Generalized hyperbolic sine. Odd and strictly increasing, the inverse of
    [`arcsinh_p`][plaplib.ptrig.arcsinh_p] on `[0, inf)`.
    """
    arr = to_float_array(x)
    return unwrap(_sinh_p(ctx, arr), x)


def cosh_p(ctx: ExponentContext, x: RealLike) -> t.Any:
    """Generalized hyperbolic cosine $(1 + |\\sinh_p x|^p)^{1/p} = \\sinh_p'$. Even, `>= 1`."""
    arr = to_float_array(x)
    return unwrap(_cosh_p_from_sinh(ctx, _sinh_p(ctx, arr)), x)


def coth_p(ctx: ExponentContext, x: RealLike) -> t.Any:
    """
    Generalized hyperbolic cotangent `cosh_p(x) / sinh_p(x)`.
    Raises [`PoleError`][plaplib.util.PoleError] at `x = 0`.
    """
    arr = to_float_array(x)
    if numpy.any(arr == 0.):
        raise PoleError(f"coth_p has a pole at 0, got x={x!r}")
    s = _sinh_p(ctx, arr)
    return unwrap(_cosh_p_from_sinh(ctx, s) / s, x)


__all__ = [
    'ExponentContext', 'P_MIN', 'pi_p', 'pi_p_quadrature',
    'arcsin_p', 'sin_p', 'cos_p', 'cot_p',
    'arcsinh_p', 'sinh_p', 'cosh_p', 'coth_p',
]
