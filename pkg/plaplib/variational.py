"""
Discretized minimization of $J(u) = \\int |u'|^p - \\lambda \\int |u|^p$ over continuous
piecewise-linear functions on $[0, \\pi_p]$.

The gradient term is integrated exactly (slopes are constant per cell), and $|u|^p$ by
Gauss-Legendre quadrature on each cell. Minimization uses a descent method preconditioned with
the (tridiagonal) Hessian of the convex part of the objective, with Armijo backtracking.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import functools
import logging
import math
import typing as t

import numpy
from numpy.typing import NDArray
from scipy import linalg

from .ptrig import ExponentContext
from .lyapunov import Branch, SpectralShift
from .mesh import GAUSS_ORDER, Mesh, QuadratureRule, DiscreteFunction, TentProfile, interpolate
from .types import FloatArray
from .util import DomainError, DegenerateError, MeshTooCoarseError, proc_seed


@dataclass(frozen=True)
class PinConstraint:
    """Constraint `u(nodes[y_index]) = pinned_value`."""

    y_index: int
    pinned_value: float = 1.

    def check(self, mesh: Mesh):
        if not 0 < self.y_index < mesh.n:
            raise DomainError(f"Pinned node must be interior, got index {self.y_index} on a mesh with {mesh.n} cells")

    @classmethod
    def nearest(cls, mesh: Mesh, y: float) -> PinConstraint:
        """Pin at the interior node nearest `y`."""
        return cls(mesh.nearest_node(y))

    def y(self, mesh: Mesh) -> float:
        return float(mesh.nodes[self.y_index])


@dataclass(frozen=True)
class MinimizeOptions:
    tol: float = 1e-10
    """Stop when the predicted decrease falls below `tol * max(1, |objective|)`."""
    max_iter: int = 500
    restarts: int = 4
    """Randomly perturbed restarts, used when the objective is nonconvex (`lambda > 0`)."""
    seed: t.Optional[object] = 0
    """Seed for restarts. `None` for a random seed."""
    perturbation: float = 0.25
    """Amplitude of restart perturbations, relative to the starting point's max-norm."""
    gauss_order: int = GAUSS_ORDER

    def __post_init__(self):
        if not self.tol > 0.:
            raise DomainError(f"Tolerance must be positive, got {self.tol!r}")
        if self.max_iter < 1:
            raise DomainError(f"max_iter must be >= 1, got {self.max_iter!r}")
        if self.restarts < 0:
            raise DomainError(f"restarts must be >= 0, got {self.restarts!r}")


@dataclass(frozen=True)
class MinimizeResult:
    minimizer: DiscreteFunction
    objective: float
    iterations: int
    """Iterations of the best run"""
    converged: bool
    restarts_used: int


@dataclass(frozen=True)
class QuotientResult:
    """Minimum of a scale-invariant quotient, with its normalized minimizer."""

    value: float
    minimizer: DiscreteFunction
    """Minimizer, normalized to max-norm 1"""
    iterations: int
    converged: bool

    def __float__(self) -> float:
        return self.value


class EigenResult(t.NamedTuple):
    eigenvalue: float
    eigenfunction: DiscreteFunction
    iterations: int
    converged: bool


@dataclass(frozen=True)
class GlobalEstimate:
    """Minimum of the pinned objective over a grid of pinning points."""

    value: float
    y: float
    """Pinning point attaining `value`"""
    ys: FloatArray
    objectives: FloatArray
    converged: bool

    def __float__(self) -> float:
        return self.value


@functools.lru_cache(maxsize=64)
def _rule(mesh: Mesh, order: int) -> QuadratureRule:
    return mesh.quadrature(order)


@functools.lru_cache(maxsize=64)
def _tent_rule(mesh: Mesh, order: int, tent: TentProfile) -> QuadratureRule:
    rule = mesh.quadrature(order, tent.kinks)
    return rule.weighted(tent(rule.points))


def _signed_pow(x: FloatArray, e: float) -> FloatArray:
    return numpy.sign(x) * numpy.abs(x)**e


def _floored_pow(a: FloatArray, e: float) -> FloatArray:
    # |a|^e with |a| floored relative to its maximum, for use in preconditioners
    a = numpy.abs(a)
    top = float(numpy.max(a)) if a.size else 0.
    floor = 1e-3 * top if top > 0. else 1.
    return numpy.maximum(a, floor)**e


def _dirichlet(values: FloatArray, h: float, p: float) -> float:
    return h * float(numpy.sum(numpy.abs(numpy.diff(values) / h)**p))


def _dirichlet_grad(values: FloatArray, h: float, p: float) -> FloatArray:
    flux = p * _signed_pow(numpy.diff(values) / h, p - 1.)
    g = numpy.zeros_like(values)
    g[1:] += flux
    g[:-1] -= flux
    return g


def _dirichlet_bands(values: FloatArray, h: float, p: float) -> t.Tuple[FloatArray, FloatArray]:
    c = p * (p - 1.) * _floored_pow(numpy.diff(values) / h, p - 2.) / h
    diag = numpy.zeros_like(values)
    diag[1:] += c
    diag[:-1] += c
    return (diag, -c)


def _lp(values: FloatArray, rule: QuadratureRule, p: float) -> float:
    return rule.integrate(numpy.abs(rule.evaluate(values))**p)


def _lp_grad(values: FloatArray, rule: QuadratureRule, p: float) -> FloatArray:
    return rule.scatter(p * _signed_pow(rule.evaluate(values), p - 1.))


def _lp_bands(values: FloatArray, rule: QuadratureRule, p: float) -> t.Tuple[FloatArray, FloatArray]:
    return rule.bands(p * (p - 1.) * _floored_pow(rule.evaluate(values), p - 2.))


def dirichlet_energy(ctx: ExponentContext, u: DiscreteFunction) -> float:
    """$\\int |u'|^p$, exact for piecewise-linear `u`."""
    return _dirichlet(u.values, u.mesh.h, ctx.p)


def lp_energy(ctx: ExponentContext, u: DiscreteFunction, order: int = GAUSS_ORDER) -> float:
    """$\\int |u|^p$, by Gauss-Legendre quadrature of `order` points per cell."""
    return _lp(u.values, _rule(u.mesh, order), ctx.p)


def weighted_energy(ctx: ExponentContext, u: DiscreteFunction, tent: TentProfile,
                    order: int = GAUSS_ORDER) -> float:
    """$\\int r_\\delta |u|^p$, with cells split at the kinks of the tent."""
    return _lp(u.values, _tent_rule(u.mesh, order, tent), ctx.p)


def evaluate_J(ctx: ExponentContext, shift: SpectralShift, u: DiscreteFunction,
               order: int = GAUSS_ORDER) -> float:
    """$J(u) = \\int |u'|^p - \\lambda \\int |u|^p$"""
    if shift.lam == 0.:
        return dirichlet_energy(ctx, u)
    return dirichlet_energy(ctx, u) - shift.lam * lp_energy(ctx, u, order)


def gradient_J(ctx: ExponentContext, shift: SpectralShift, u: DiscreteFunction,
               order: int = GAUSS_ORDER) -> FloatArray:
    """
    Gradient of [`evaluate_J`][plaplib.variational.evaluate_J] with respect to all `n + 1` node values.

    Boundary (and pinned) entries are included; callers project them out.
    """
    g = _dirichlet_grad(u.values, u.mesh.h, ctx.p)
    if shift.lam != 0.:
        g -= shift.lam * _lp_grad(u.values, _rule(u.mesh, order), ctx.p)
    return g


def _solve_tridiagonal(diag: FloatArray, off: FloatArray, rhs: FloatArray) -> FloatArray:
    ab = numpy.zeros((3, len(diag)))
    ab[0, 1:] = off
    ab[1] = diag
    ab[2, :-1] = off
    return linalg.solve_banded((1, 1), ab, rhs, check_finite=False)


def _restrict_bands(diag: FloatArray, off: FloatArray,
                    free: NDArray[numpy.intp]) -> t.Tuple[FloatArray, FloatArray]:
    # off[i] couples nodes i and i+1. Free nodes separated by a fixed node are uncoupled.
    adjacent = numpy.diff(free) == 1
    return (diag[free], numpy.where(adjacent, off[free[:-1]], 0.))


class _Stats(t.NamedTuple):
    x: FloatArray
    f: float
    iterations: int
    converged: bool


def _descend(phi: t.Callable[[FloatArray], float],
             grad: t.Callable[[FloatArray], FloatArray],
             bands: t.Callable[[FloatArray], t.Tuple[FloatArray, FloatArray]],
             x0: FloatArray, opts: MinimizeOptions,
             normalize: t.Optional[t.Callable[[FloatArray], FloatArray]] = None) -> _Stats:
    """
    Preconditioned descent with Armijo backtracking.

    `bands(x)` returns a symmetric positive definite tridiagonal preconditioner.
    `normalize`, if given, rescales each iterate (for scale-invariant objectives).
    """
    x = numpy.array(x0, dtype=numpy.float64)
    f = phi(x)
    if not math.isfinite(f):
        raise DegenerateError("Objective isn't finite at the starting point")

    converged = False
    i = 0
    for i in range(1, opts.max_iter + 1):
        g = grad(x)
        (diag, off) = bands(x)
        d = -_solve_tridiagonal(diag, off, g)
        slope = float(numpy.dot(g, d))
        if not (math.isfinite(slope) and slope < 0.):
            # preconditioner failed, fall back to steepest descent
            d = -g
            slope = -float(numpy.dot(g, g))

        scale = max(1., abs(f))
        if -slope <= opts.tol * scale:
            converged = True
            break

        step = 1.
        while step >= 1e-14:
            x_new = x + step * d
            f_new = phi(x_new)
            if math.isfinite(f_new) and f_new <= f + 1e-4 * step * slope:
                break
            step *= 0.5
        else:
            # no further progress at double precision
            converged = -slope <= math.sqrt(opts.tol) * scale
            break

        if normalize is not None:
            x_new = normalize(x_new)
            f_new = phi(x_new)

        logging.debug(f"iter {i}: objective {f_new:.15g}, step {step:.3g}, decrement {-slope:.3g}")
        (x, f) = (x_new, f_new)

    return _Stats(x, f, i, converged)


def pinned_hat(mesh: Mesh, pin: PinConstraint) -> DiscreteFunction:
    """Piecewise-linear hat through `(0, 0)`, `(y, pinned_value)`, `(L, 0)`."""
    y = pin.y(mesh)
    return interpolate(mesh, lambda x: pin.pinned_value * numpy.where(
        x < y, x / y, (mesh.length - x) / (mesh.length - y)
    ))


def _random_modes(rng: numpy.random.Generator, mesh: Mesh, n_modes: int = 8) -> FloatArray:
    x = mesh.nodes / mesh.length
    k = numpy.arange(1, n_modes + 1)
    amps = rng.normal(size=n_modes) / k
    return numpy.sin(numpy.pi * numpy.outer(x, k)) @ amps


def minimize_pinned(ctx: ExponentContext, shift: SpectralShift, pin: PinConstraint,
                    init: DiscreteFunction,
                    opts: MinimizeOptions = MinimizeOptions()) -> MinimizeResult:
    """
    Minimize `J` over discrete functions with `u(y) = pinned_value`.

    Starts from `init` ([`pinned_hat`][plaplib.variational.pinned_hat] is a reasonable choice).
    For `lambda > 0`, `J` is nonconvex, and `opts.restarts` additional runs are started from
    randomly perturbed copies of `init`. The best run is returned.
    Non-convergence is reported through `converged`, not raised.
    """
    mesh = init.mesh
    pin.check(mesh)
    if init.values[pin.y_index] != pin.pinned_value:
        raise DomainError(f"Initial function must satisfy the pin, got u(y)={init.values[pin.y_index]!r}")

    (p, h, lam) = (ctx.p, mesh.h, shift.lam)
    rule = _rule(mesh, opts.gauss_order)
    free = numpy.setdiff1d(numpy.arange(1, mesh.n), [pin.y_index])

    def full(v: FloatArray, base: FloatArray) -> FloatArray:
        out = base.copy()
        out[free] = v
        return out

    def run(start: FloatArray) -> _Stats:
        def phi(v: FloatArray) -> float:
            u = full(v, start)
            return _dirichlet(u, h, p) - lam * _lp(u, rule, p)

        def grad(v: FloatArray) -> FloatArray:
            u = full(v, start)
            return (_dirichlet_grad(u, h, p) - lam * _lp_grad(u, rule, p))[free]

        def bands(v: FloatArray) -> t.Tuple[FloatArray, FloatArray]:
            u = full(v, start)
            (diag, off) = _dirichlet_bands(u, h, p)
            if lam < 0.:
                (m_diag, m_off) = _lp_bands(u, rule, p)
                (diag, off) = (diag - lam * m_diag, off - lam * m_off)
            return _restrict_bands(diag, off, free)

        return _descend(phi, grad, bands, start[free], opts)

    starts = [init.values]
    if shift.branch == Branch.POSITIVE_SUBCRITICAL and opts.restarts > 0:
        rng = numpy.random.default_rng(proc_seed(opts.seed, ['minimize_pinned', mesh.n, pin.y_index]))
        amp = opts.perturbation * init.max_abs()
        for _ in range(opts.restarts):
            values = init.values + amp * _random_modes(rng, mesh)
            values[[0, -1]] = 0.
            values[pin.y_index] = pin.pinned_value
            starts.append(values)

    best: t.Optional[t.Tuple[_Stats, FloatArray]] = None
    for start in starts:
        stats = run(start)
        if best is None or stats.f < best[0].f:
            best = (stats, start)

    assert best is not None
    (stats, start) = best
    minimizer = DiscreteFunction(mesh, full(stats.x, start))
    objective = evaluate_J(ctx, shift, minimizer, opts.gauss_order)
    if not stats.converged:
        logging.warning(f"Pinned minimization (p={p}, lambda={lam}, y={pin.y(mesh):.6g}) "
                        f"didn't converge in {opts.max_iter} iterations")
    return MinimizeResult(minimizer, objective, stats.iterations, stats.converged, len(starts) - 1)


def pinned_minimizer_in_max_class(result: MinimizeResult, pin: PinConstraint, slack: float = 1e-6) -> bool:
    """
    Check whether a pinned minimizer attains its max-norm at the pinned node,
    i.e. whether it lies in $M(y) = \\{u : \\|u\\|_\\infty = u(y) = 1\\}$.
    """
    values = result.minimizer.values
    return bool(numpy.max(numpy.abs(values)) <= values[pin.y_index] + slack)


def y_grid(mesh: Mesh, count: int) -> t.List[int]:
    """Node indices nearest an evenly spaced grid of `count` points in `(0, L/2]`."""
    if count < 1:
        raise DomainError(f"Need at least one pinning point, got {count}")
    idxs = [mesh.nearest_node(k * 0.5 * mesh.length / count) for k in range(1, count + 1)]
    return sorted(set(idxs))


def global_constant_estimate(ctx: ExponentContext, shift: SpectralShift, mesh: Mesh,
                             y_grid_count: int = 8, opts: MinimizeOptions = MinimizeOptions(),
                             jobs: int = 1) -> GlobalEstimate:
    """
    Estimate $C(p, \\lambda) = \\min_y F(y)$ by pinned minimization at `y_grid_count` pinning points.

    Runs are independent, and are spread over `jobs` threads. Results are in grid order.
    """
    if y_grid_count < 3:
        raise DomainError(f"y_grid_count must be >= 3, got {y_grid_count}")
    pins = [PinConstraint(i) for i in y_grid(mesh, y_grid_count)]

    def run(pin: PinConstraint) -> MinimizeResult:
        return minimize_pinned(ctx, shift, pin, pinned_hat(mesh, pin), opts)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run, pins))
    else:
        results = list(map(run, pins))

    objectives = numpy.array([r.objective for r in results])
    ys = numpy.array([pin.y(mesh) for pin in pins])
    i = int(numpy.argmin(objectives))
    return GlobalEstimate(float(objectives[i]), float(ys[i]), ys, objectives,
                          all(r.converged for r in results))


def _minimize_quotient(numerator: t.Callable[[FloatArray], t.Tuple[float, FloatArray, t.Tuple[FloatArray, FloatArray]]],
                       denominator: t.Callable[[FloatArray], t.Tuple[float, FloatArray]],
                       init: DiscreteFunction, opts: MinimizeOptions) -> QuotientResult:
    """
    Minimize `N(u) / D(u)` over nonzero discrete functions, by descending `log N - log D`.

    `numerator(values)` returns `(N, grad N, hessian bands of N)`, `denominator(values)` returns `(D, grad D)`.
    Iterates are normalized to unit max-norm.
    """
    mesh = init.mesh
    interior = numpy.arange(1, mesh.n)

    def full(v: FloatArray) -> FloatArray:
        out = numpy.zeros(mesh.n + 1)
        out[1:-1] = v
        return out

    def phi(v: FloatArray) -> float:
        u = full(v)
        (num, _, _) = numerator(u)
        (den, _) = denominator(u)
        if not (num > 0. and den > 0.):
            return math.nan
        return math.log(num) - math.log(den)

    def grad(v: FloatArray) -> FloatArray:
        u = full(v)
        (num, g_num, _) = numerator(u)
        (den, g_den) = denominator(u)
        return (g_num / num - g_den / den)[1:-1]

    def bands(v: FloatArray) -> t.Tuple[FloatArray, FloatArray]:
        u = full(v)
        (num, _, (diag, off)) = numerator(u)
        return _restrict_bands(diag / num, off / num, interior)

    def normalize(v: FloatArray) -> FloatArray:
        i = int(numpy.argmax(numpy.abs(v)))
        return v / v[i]

    stats = _descend(phi, grad, bands, normalize(init.interior), opts, normalize)
    minimizer = DiscreteFunction.from_interior(mesh, stats.x)
    return QuotientResult(math.exp(stats.f), minimizer, stats.iterations, stats.converged)


def rayleigh_first_eigen(ctx: ExponentContext, mesh: Mesh,
                         opts: MinimizeOptions = MinimizeOptions()) -> EigenResult:
    """
    First Dirichlet eigenvalue of the p-Laplacian on `[0, L]`, as the minimum of the
    Rayleigh quotient $\\int |u'|^p / \\int |u|^p$.

    The eigenfunction is normalized to max-norm 1. On `[0, pi_p]`, the eigenvalue is `p - 1`
    and the eigenfunction is `sin_p`.
    """
    (p, h) = (ctx.p, mesh.h)
    rule = _rule(mesh, opts.gauss_order)

    def numerator(u: FloatArray):
        return (_dirichlet(u, h, p), _dirichlet_grad(u, h, p), _dirichlet_bands(u, h, p))

    def denominator(u: FloatArray):
        return (_lp(u, rule, p), _lp_grad(u, rule, p))

    init = interpolate(mesh, lambda x: numpy.sin(numpy.pi * x / mesh.length))
    result = _minimize_quotient(numerator, denominator, init, opts)
    if not result.converged:
        logging.warning(f"Rayleigh quotient minimization (p={p}, n={mesh.n}) didn't converge")
    return EigenResult(result.value, result.minimizer, result.iterations, result.converged)


def alpha_delta(ctx: ExponentContext, shift: SpectralShift, tent: TentProfile, mesh: Mesh,
                opts: MinimizeOptions = MinimizeOptions()) -> QuotientResult:
    """
    Compute $\\alpha(\\delta) = \\inf_\\phi J(\\phi) / \\int r_\\delta |\\phi|^p$ for a tent potential $r_\\delta$.

    With $r = \\alpha(\\delta) r_\\delta$, the minimizer solves the boundary value problem,
    so $\\alpha(\\delta) > C(p, \\lambda)$, approaching it as the tent narrows.

    Raises [`MeshTooCoarseError`][plaplib.util.MeshTooCoarseError] unless `h < delta/4`.
    """
    tent.check_within(mesh.length)
    if not mesh.h < tent.delta / 4.:
        raise MeshTooCoarseError(mesh.h, tent.delta, 4.)

    (p, h, lam) = (ctx.p, mesh.h, shift.lam)
    rule = _rule(mesh, opts.gauss_order)
    weighted = _tent_rule(mesh, opts.gauss_order, tent)

    def numerator(u: FloatArray):
        val = _dirichlet(u, h, p)
        g = _dirichlet_grad(u, h, p)
        (diag, off) = _dirichlet_bands(u, h, p)
        if lam != 0.:
            val -= lam * _lp(u, rule, p)
            g = g - lam * _lp_grad(u, rule, p)
        if lam < 0.:
            (m_diag, m_off) = _lp_bands(u, rule, p)
            (diag, off) = (diag - lam * m_diag, off - lam * m_off)
        return (val, g, (diag, off))

    def denominator(u: FloatArray):
        return (_lp(u, weighted, p), _lp_grad(u, weighted, p))

    init = pinned_hat(mesh, PinConstraint.nearest(mesh, tent.c))
    result = _minimize_quotient(numerator, denominator, init, opts)
    if not result.converged:
        logging.warning(f"alpha(delta={tent.delta}) minimization (p={p}, lambda={lam}) didn't converge")
    return result


__all__ = [
    'PinConstraint', 'MinimizeOptions', 'MinimizeResult', 'QuotientResult', 'EigenResult', 'GlobalEstimate',
    'dirichlet_energy', 'lp_energy', 'weighted_energy', 'evaluate_J', 'gradient_J',
    'interpolate', 'pinned_hat', 'minimize_pinned', 'pinned_minimizer_in_max_class', 'y_grid',
    'global_constant_estimate', 'rayleigh_first_eigen', 'alpha_delta',
]
