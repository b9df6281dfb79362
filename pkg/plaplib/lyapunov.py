r"""
Sharp Lyapunov-type constants for the one-dimensional p-Laplacian.

For $\lambda < \lambda_1 = p - 1$, a nontrivial solution of

$$-(|u'|^{p-2}u')' = (\lambda + r(x))|u|^{p-2}u \text{ on } (0, \pi_p), \quad u(0) = u(\pi_p) = 0$$

can only exist if $\|r_+\|_1 > C(p, \lambda)$, where

$$C(p, \lambda) = \begin{cases}
2K^{p-1} \cot_p(K\pi_p/2)^{p-1} & 0 < \lambda < \lambda_1, \quad K = (\lambda/\lambda_1)^{1/p} \\
2^p / \pi_p^{p-1} & \lambda = 0 \\
2K^{p-1} \coth_p(K\pi_p/2)^{p-1} & \lambda < 0, \quad K = (-\lambda/\lambda_1)^{1/p}
\end{cases}$$

and the constant can't be improved. Equivalently,
$J(u) = \int |u'|^p - \lambda \int |u|^p \ge C(p, \lambda) \|u\|_\infty^p$ for every $u \in W^{1,p}_0$.

$C(p, \lambda)$ is the minimum over $y \in (0, \pi_p/2]$ of
$F(y) = \min \{J(u) : u(y) = 1\}$, which is attained by an explicit profile $u_y$.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import enum
import math
import typing as t

import numpy

from .ptrig import ExponentContext, sin_p, cos_p, cot_p, sinh_p, cosh_p, coth_p
from .types import FloatArray, RealLike, to_float_array, unwrap
from .util import DomainError, PoleError, DegenerateError

if t.TYPE_CHECKING:
    from .mesh import DiscreteFunction


class Branch(enum.Enum):
    """Sign regime of the spectral shift `lambda`."""

    POSITIVE_SUBCRITICAL = 'positive'
    """`0 < lambda < lambda1`"""
    ZERO = 'zero'
    NEGATIVE = 'negative'

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class SpectralShift:
    """
    A shift `lambda < lambda1 = p - 1`, with its branch and $K = (|\\lambda|/\\lambda_1)^{1/p}$.

    The [`Branch.ZERO`][plaplib.lyapunov.Branch.ZERO] branch is selected only for `lambda == 0` exactly.
    """

    lam: float
    """Shift $\\lambda$"""
    p: float
    """Exponent this shift was checked against"""

    branch: Branch = field(init=False)
    K: float = field(init=False)

    def __post_init__(self):
        lam = float(self.lam)
        p = float(self.p)
        if not math.isfinite(lam):
            raise DomainError(f"lambda must be finite, got {self.lam!r}")
        lambda1 = p - 1.
        if not lam < lambda1:
            raise DomainError(f"lambda must be below the first eigenvalue lambda1 = p - 1 = {lambda1:.6g}, got lambda={lam!r}")

        if lam > 0.:
            branch = Branch.POSITIVE_SUBCRITICAL
        elif lam < 0.:
            branch = Branch.NEGATIVE
        else:
            branch = Branch.ZERO

        object.__setattr__(self, 'lam', lam)
        object.__setattr__(self, 'p', p)
        object.__setattr__(self, 'branch', branch)
        object.__setattr__(self, 'K', (abs(lam) / lambda1)**(1. / p))

    @classmethod
    def for_context(cls, ctx: ExponentContext, lam: float) -> SpectralShift:
        return cls(lam, ctx.p)

    @property
    def lambda_plus(self) -> float:
        return max(self.lam, 0.)

    @property
    def lambda_minus(self) -> float:
        return min(self.lam, 0.)


@dataclass(frozen=True)
class LyapunovConstant:
    """The sharp constant $C(p, \\lambda)$, with the parameters that produced it."""

    value: float
    p: float
    lam: float
    branch: Branch

    def __float__(self) -> float:
        return self.value


def _check_shift(ctx: ExponentContext, shift: SpectralShift):
    if shift.p != ctx.p:
        raise DomainError(f"Spectral shift was built for p={shift.p!r}, not p={ctx.p!r}")


def _signed_pow(x: FloatArray, e: float) -> FloatArray:
    # |x|^(e-1) x, finite at x = 0
    return numpy.sign(x) * numpy.abs(x)**e


def lyapunov_constant(ctx: ExponentContext, shift: SpectralShift) -> LyapunovConstant:
    """Return the sharp constant $C(p, \\lambda)$ for the branch of `shift`."""
    _check_shift(ctx, shift)
    (p, K) = (ctx.p, shift.K)
    half = 0.5 * K * ctx.pi_p

    if shift.branch == Branch.POSITIVE_SUBCRITICAL:
        value = 2. * K**(p - 1.) * cot_p(ctx, half)**(p - 1.)
    elif shift.branch == Branch.NEGATIVE:
        value = 2. * K**(p - 1.) * coth_p(ctx, half)**(p - 1.)
    else:
        value = 2.**p / ctx.pi_p**(p - 1.)

    return LyapunovConstant(float(value), p, shift.lam, shift.branch)


def cot_power_profile(ctx: ExponentContext, shift: SpectralShift, x: RealLike) -> t.Any:
    """
    $f(x) = K^{p-1} |\\cot_p Kx|^{p-2} \\cot_p Kx$ on $(0, \\pi_p/K)$, for `0 < lambda < lambda1`.

    Decreasing, and odd about $\\pi_p / (2K)$. Raises [`PoleError`][plaplib.util.PoleError]
    at the endpoints.
    """
    arr = _check_profile_arg(ctx, shift, x, Branch.POSITIVE_SUBCRITICAL)
    (p, K) = (ctx.p, shift.K)
    return unwrap(K**(p - 1.) * _signed_pow(cot_p(ctx, K * arr), p - 1.), x)


def cot_power_profile_derivative(ctx: ExponentContext, shift: SpectralShift, x: RealLike) -> t.Any:
    """$f'(x) = -(p-1) K^p / (\\sin_p Kx)^p$"""
    arr = _check_profile_arg(ctx, shift, x, Branch.POSITIVE_SUBCRITICAL)
    (p, K) = (ctx.p, shift.K)
    return unwrap(-(p - 1.) * K**p / numpy.abs(sin_p(ctx, K * arr))**p, x)


def coth_power_profile(ctx: ExponentContext, shift: SpectralShift, x: RealLike) -> t.Any:
    """
    $f(x) = K^{p-1} (\\coth_p Kx)^{p-1}$ on $(0, \\infty)$, for `lambda < 0`. Decreasing and convex.
    """
    arr = _check_profile_arg(ctx, shift, x, Branch.NEGATIVE)
    (p, K) = (ctx.p, shift.K)
    return unwrap(K**(p - 1.) * coth_p(ctx, K * arr)**(p - 1.), x)


def coth_power_profile_derivative(ctx: ExponentContext, shift: SpectralShift, x: RealLike) -> t.Any:
    """$f'(x) = -(p-1) K^p / (\\sinh_p Kx)^p$"""
    arr = _check_profile_arg(ctx, shift, x, Branch.NEGATIVE)
    (p, K) = (ctx.p, shift.K)
    return unwrap(-(p - 1.) * K**p / sinh_p(ctx, K * arr)**p, x)


def _check_profile_arg(ctx: ExponentContext, shift: SpectralShift, x: RealLike, branch: Branch) -> FloatArray:
    _check_shift(ctx, shift)
    if shift.branch != branch:
        raise DomainError(f"Profile requires the '{branch}' branch, got lambda={shift.lam!r}")
    arr = to_float_array(x)
    upper = ctx.pi_p / shift.K if branch == Branch.POSITIVE_SUBCRITICAL else math.inf
    if numpy.any((arr == 0.) | (arr == upper)):
        raise PoleError(f"Profile has a pole at x={x!r}")
    if numpy.any((arr < 0.) | (arr > upper)):
        raise DomainError(f"Profile is defined on (0, {upper:.6g}), got x={x!r}")
    return arr


def _power_profile(ctx: ExponentContext, shift: SpectralShift, x: FloatArray) -> FloatArray:
    # energy of the minimizing profile on an interval of length x with u = 0 at one end and u = 1 at the other
    p = ctx.p
    if shift.branch == Branch.ZERO:
        return x**(1. - p)
    if shift.branch == Branch.NEGATIVE:
        return coth_power_profile(ctx, shift, x)
    return cot_power_profile(ctx, shift, x)


def _power_profile_derivative(ctx: ExponentContext, shift: SpectralShift, x: FloatArray) -> FloatArray:
    p = ctx.p
    if shift.branch == Branch.ZERO:
        return -(p - 1.) * x**-p
    if shift.branch == Branch.NEGATIVE:
        return coth_power_profile_derivative(ctx, shift, x)
    return cot_power_profile_derivative(ctx, shift, x)


def _check_y(ctx: ExponentContext, y: RealLike) -> FloatArray:
    arr = to_float_array(y)
    if numpy.any((arr <= 0.) | (arr > 0.5 * ctx.pi_p)):
        raise DomainError(f"y must lie in (0, pi_p/2] = (0, {0.5 * ctx.pi_p:.6g}], got y={y!r}")
    return arr


def F_closed(ctx: ExponentContext, shift: SpectralShift, y: RealLike) -> t.Any:
    """
    Closed form of $F(y) = \\min \\{J(u) : u(y) = 1\\}$, for $y \\in (0, \\pi_p/2]$.

    $F(y) = f(y) + f(\\pi_p - y)$, where $f$ is the branch's power profile
    ([`cot_power_profile`][plaplib.lyapunov.cot_power_profile], $x^{1-p}$, or
    [`coth_power_profile`][plaplib.lyapunov.coth_power_profile]).
    $F$ is decreasing, with minimum $F(\\pi_p/2) = C(p, \\lambda)$.
    """
    _check_shift(ctx, shift)
    arr = _check_y(ctx, y)
    return unwrap(_power_profile(ctx, shift, arr) + _power_profile(ctx, shift, ctx.pi_p - arr), y)


def F_derivative(ctx: ExponentContext, shift: SpectralShift, y: RealLike) -> t.Any:
    """$F'(y) = f'(y) - f'(\\pi_p - y)$. Negative on $(0, \\pi_p/2)$, zero at $\\pi_p/2$."""
    _check_shift(ctx, shift)
    arr = _check_y(ctx, y)
    return unwrap(_power_profile_derivative(ctx, shift, arr)
                  - _power_profile_derivative(ctx, shift, ctx.pi_p - arr), y)


def _profile_basis(ctx: ExponentContext, shift: SpectralShift) -> t.Tuple[
    t.Callable[[FloatArray], FloatArray], t.Callable[[FloatArray], FloatArray]
]:
    """Solution of the unconstrained Euler-Lagrange equation vanishing at 0, and its derivative."""
    K = shift.K
    if shift.branch == Branch.POSITIVE_SUBCRITICAL:
        return (lambda x: sin_p(ctx, K * x), lambda x: K * cos_p(ctx, K * x))
    if shift.branch == Branch.NEGATIVE:
        return (lambda x: sinh_p(ctx, K * x), lambda x: K * cosh_p(ctx, K * x))
    return (lambda x: x, lambda x: numpy.ones_like(x))


def _check_profile_x(ctx: ExponentContext, x: RealLike) -> FloatArray:
    arr = to_float_array(x)
    if numpy.any((arr < 0.) | (arr > ctx.pi_p)):
        raise DomainError(f"x must lie in [0, pi_p] = [0, {ctx.pi_p:.6g}], got x={x!r}")
    return arr


def minimizer_profile(ctx: ExponentContext, shift: SpectralShift, y: float, x: RealLike) -> t.Any:
    """
    Evaluate the minimizer $u_y$ of $J$ over $\\{u : u(y) = 1\\}$ at `x`.

    Left of `y`, $u_y = g(x) / g(y)$, right of `y`, $u_y = g(\\pi_p - x) / g(\\pi_p - y)$,
    where $g$ is $\\sin_p K\\cdot$, the identity, or $\\sinh_p K\\cdot$ depending on the branch.
    """
    _check_shift(ctx, shift)
    y = float(_check_y(ctx, y))
    arr = _check_profile_x(ctx, x)
    (g, _) = _profile_basis(ctx, shift)
    right = ctx.pi_p - y
    out = numpy.where(arr < y, g(arr) / g(numpy.float64(y)), g(ctx.pi_p - arr) / g(numpy.float64(right)))
    return unwrap(out, x)


def minimizer_profile_derivative(ctx: ExponentContext, shift: SpectralShift, y: float, x: RealLike) -> t.Any:
    """Derivative $u_y'(x)$. At `x == y` the right derivative is returned."""
    _check_shift(ctx, shift)
    y = float(_check_y(ctx, y))
    arr = _check_profile_x(ctx, x)
    (g, dg) = _profile_basis(ctx, shift)
    right = ctx.pi_p - y
    out = numpy.where(arr < y, dg(arr) / g(numpy.float64(y)), -dg(ctx.pi_p - arr) / g(numpy.float64(right)))
    return unwrap(out, x)


def overshoot_threshold(ctx: ExponentContext, shift: SpectralShift) -> t.Optional[float]:
    """
    Return $(1 - 1/(2K))\\pi_p$ when `0 < lambda < lambda1` and $K > 1/2$, otherwise `None`.

    For `y` below this abscissa, $u_y$ peaks there with a value above 1,
    so it doesn't attain its maximum at the pinned point.
    """
    _check_shift(ctx, shift)
    if shift.branch != Branch.POSITIVE_SUBCRITICAL or shift.K <= 0.5:
        return None
    return (1. - 1. / (2. * shift.K)) * ctx.pi_p


def profile_maximum(ctx: ExponentContext, shift: SpectralShift, y: float) -> t.Tuple[float, float]:
    """Return `(argmax, max)` of $u_y$ on $[0, \\pi_p]$."""
    _check_shift(ctx, shift)
    y = float(_check_y(ctx, y))
    x_star = overshoot_threshold(ctx, shift)
    if x_star is not None and y < x_star:
        return (x_star, 1. / sin_p(ctx, shift.K * (ctx.pi_p - y)))
    return (y, 1.)


def int_cos_p_pow(ctx: ExponentContext, z: RealLike) -> t.Any:
    """$\\int_0^z |\\cos_p t|^p dt = ((p-1)z + |\\cos_p z|^{p-2}\\cos_p z \\sin_p z) / p$"""
    arr = to_float_array(z)
    p = ctx.p
    return unwrap(((p - 1.) * arr + _signed_pow(cos_p(ctx, arr), p - 1.) * sin_p(ctx, arr)) / p, z)


def int_sin_p_pow(ctx: ExponentContext, z: RealLike) -> t.Any:
    """$\\int_0^z |\\sin_p t|^p dt = (z - |\\cos_p z|^{p-2}\\cos_p z \\sin_p z) / p$"""
    arr = to_float_array(z)
    p = ctx.p
    return unwrap((arr - _signed_pow(cos_p(ctx, arr), p - 1.) * sin_p(ctx, arr)) / p, z)


def int_cosh_p_pow(ctx: ExponentContext, z: RealLike) -> t.Any:
    """$\\int_0^z (\\cosh_p t)^p dt = ((p-1)z + (\\cosh_p z)^{p-1} \\sinh_p z) / p$"""
    arr = to_float_array(z)
    p = ctx.p
    return unwrap(((p - 1.) * arr + cosh_p(ctx, arr)**(p - 1.) * sinh_p(ctx, arr)) / p, z)


def int_sinh_p_pow(ctx: ExponentContext, z: RealLike) -> t.Any:
    """$\\int_0^z |\\sinh_p t|^p dt = (-z + (\\cosh_p z)^{p-1} \\sinh_p z) / p$"""
    arr = to_float_array(z)
    p = ctx.p
    return unwrap((-arr + cosh_p(ctx, arr)**(p - 1.) * sinh_p(ctx, arr)) / p, z)


def sandwich_bounds(ctx: ExponentContext, shift: SpectralShift, u: DiscreteFunction) -> t.Tuple[float, float]:
    """
    Return bounds `(lo, hi)` with `lo <= J(u) <= hi`:
    $(1 - \\lambda_+/\\lambda_1) \\int |u'|^p \\le J(u) \\le (1 - \\lambda_-/\\lambda_1) \\int |u'|^p$.
    """
    from .variational import dirichlet_energy

    _check_shift(ctx, shift)
    d = dirichlet_energy(ctx, u)
    return ((1. - shift.lambda_plus / ctx.lambda1) * d, (1. - shift.lambda_minus / ctx.lambda1) * d)


class SobolevGap(t.NamedTuple):
    gap: float
    """$J(u) - C(p, \\lambda) \\|u\\|_\\infty^p$"""
    slack: float
    """Discretization slack. The gap is guaranteed `>= -slack`."""


def sobolev_gap(ctx: ExponentContext, shift: SpectralShift, u: DiscreteFunction) -> SobolevGap:
    """
    Return the gap in the Sobolev-type inequality $J(u) \\ge C(p, \\lambda) \\|u\\|_\\infty^p$.

    The slack is `10/n * max|u|^p`, which covers the quadrature error of the $|u|^p$ term.
    """
    from .variational import evaluate_J

    _check_shift(ctx, shift)
    if u.is_zero():
        raise DegenerateError("Sobolev gap is undefined for the null function")
    norm_p = u.max_abs()**ctx.p
    c = lyapunov_constant(ctx, shift).value
    gap = evaluate_J(ctx, shift, u) - c * norm_p
    return SobolevGap(gap, 10. / u.mesh.n * norm_p)


__all__ = [
    'Branch', 'SpectralShift', 'LyapunovConstant', 'SobolevGap',
    'lyapunov_constant', 'F_closed', 'F_derivative',
    'minimizer_profile', 'minimizer_profile_derivative', 'overshoot_threshold', 'profile_maximum',
    'int_cos_p_pow', 'int_sin_p_pow', 'int_cosh_p_pow', 'int_sinh_p_pow',
    'cot_power_profile', 'cot_power_profile_derivative',
    'coth_power_profile', 'coth_power_profile_derivative',
    'sandwich_bounds', 'sobolev_gap',
]
