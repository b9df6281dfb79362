from __future__ import annotations
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import update_wrapper
from pathlib import Path
import json
import logging
import time
import typing as t

from typing_extensions import ParamSpec, Concatenate
import numpy
import polars
import click

from .ptrig import ExponentContext, sin_p
from .lyapunov import SpectralShift, lyapunov_constant, F_closed
from .lyapunov import minimizer_profile, overshoot_threshold, profile_maximum
from .mesh import Mesh, TentProfile, interpolate
from .variational import MinimizeOptions, PinConstraint, QuotientResult
from .variational import pinned_hat, minimize_pinned, pinned_minimizer_in_max_class
from .variational import global_constant_estimate, rayleigh_first_eigen, alpha_delta
from .shooting import verify_lyapunov_threshold
from .verify import SUITES, run_suite, all_passed
from .record import ResultRecord, OutputFormat, FORMATS, record_schema
from .util import DomainError, DegenerateError, MeshTooCoarseError, IntegrationOverflowError, parse_key_value


P = ParamSpec('P')

MIN_MESH_N: int = 16
DEFAULT_DELTAS: t.Tuple[float, ...] = (0.4, 0.2, 0.1, 0.05)


class DomainUsageError(click.ClickException):
    """A parameter outside the domain of the requested computation."""
    exit_code = 2


@dataclass
class RunConfig:
    """Parameters shared by every command."""

    p: float = 2.
    lam: float = 0.
    mesh_n: int = 1024
    steps: int = 20000
    seed: int = 0
    format: OutputFormat = 'text'
    output: t.Optional[Path] = None
    """Output file. Relative paths are resolved against `output_dir`."""
    output_dir: t.Optional[Path] = None
    timing: bool = False
    allow_nonconverged: bool = False
    jobs: int = 1

    def __post_init__(self):
        if self.mesh_n < MIN_MESH_N:
            raise DomainError(f"mesh_n must be >= {MIN_MESH_N}, got {self.mesh_n}")
        if self.jobs < 1:
            raise DomainError(f"jobs must be >= 1, got {self.jobs}")

    def context(self) -> ExponentContext:
        return ExponentContext(self.p)

    def shift(self) -> SpectralShift:
        return SpectralShift(self.lam, self.p)

    def mesh(self, ctx: ExponentContext) -> Mesh:
        return Mesh.for_context(ctx, self.mesh_n)

    def options(self) -> MinimizeOptions:
        return MinimizeOptions(seed=self.seed)

    def output_path(self) -> t.Optional[Path]:
        if self.output is None or str(self.output) == '-':
            return None
        if self.output_dir is not None and not self.output.is_absolute():
            return self.output_dir / self.output
        return self.output

    def inputs(self) -> t.Dict[str, t.Any]:
        return {'p': self.p, 'lambda': self.lam}


def init_logging(verbose: int = 0):
    if verbose == 0:
        log_fmt = "{message}"
        log_level = logging.INFO
    else:
        log_fmt = "{asctime}: {levelname} {message}"
        if verbose > 1:
            log_fmt += "\n  at {funcName} in {filename}:{lineno}"
        log_level = logging.DEBUG
    logging.basicConfig(format=log_fmt, style="{", level=log_level, datefmt='%Y-%m-%d %H:%M:%S', stream=sys.stderr)


def load_config(ctx: click.Context, param: click.Parameter, value: t.Optional[Path]) -> t.Optional[Path]:
    """Seed every subcommand's defaults from a `key=value` file."""
    if value is None:
        return None
    with open(value, 'r', encoding='utf-8') as f:
        try:
            values: t.Dict[str, t.Any] = parse_key_value(f)
        except ValueError as e:
            raise click.BadParameter(str(e), ctx=ctx, param=param) from None
    if 'lambda' in values:
        values['lam'] = values.pop('lambda')
    group = t.cast(click.Group, ctx.command)
    ctx.default_map = {name: dict(values) for name in group.commands}
    return value


@click.group()
@click.option('-v', '--verbose', count=True)
@click.option('--config', type=click.Path(exists=True, dir_okay=False, path_type=Path),
              callback=load_config, is_eager=True, expose_value=False,
              help="File of 'key=value' defaults for every command")
def cli(verbose: int = 0):
    init_logging(verbose)


def problem_options(f: t.Callable[P, t.Any]) -> t.Callable[P, t.Any]:
    f = click.option('--lambda', 'lam', type=float, default=0., show_default=True, help="Spectral shift lambda")(f)
    f = click.option('--p', 'p', type=float, default=2., show_default=True, help="Exponent p > 1")(f)
    return f


def numeric_options(f: t.Callable[P, t.Any]) -> t.Callable[P, t.Any]:
    f = click.option('--allow-nonconverged', is_flag=True, help="Exit 0 even if a minimization didn't converge")(f)
    f = click.option('--jobs', type=click.IntRange(min=1), default=1, show_default=True,
                     help="Threads for independent sub-runs")(f)
    f = click.option('--seed', type=int, default=0, show_default=True)(f)
    f = click.option('--steps', type=int, default=20000, show_default=True, help="Shooting steps")(f)
    f = click.option('--mesh-n', 'mesh_n', type=int, default=1024, show_default=True, help="Mesh cells")(f)
    return f


def output_options(f: t.Callable[P, t.Any]) -> t.Callable[P, t.Any]:
    f = click.option('--timing', is_flag=True, help="Include wall time in the output")(f)
    f = click.option('--output-dir', type=click.Path(file_okay=False, path_type=Path), envvar='PLAPLIB_OUTPUT_DIR',
                     help="Directory for relative output paths")(f)
    f = click.option('-o', '--output', type=click.Path(dir_okay=False, allow_dash=True, path_type=Path),
                     help="Output file (default stdout)")(f)
    f = click.option('-f', '--format', 'format', type=click.Choice(FORMATS, case_sensitive=False),
                     default='text', show_default=True)(f)
    return f


_CONFIG_KEYS = ('p', 'lam', 'mesh_n', 'steps', 'seed', 'format', 'output', 'output_dir',
                'timing', 'allow_nonconverged', 'jobs')


def record_command(f: t.Callable[Concatenate[RunConfig, P], ResultRecord]) -> t.Callable[P, None]:
    """
    Wrap a function returning a [`ResultRecord`][plaplib.record.ResultRecord] as a command body.

    Builds the [`RunConfig`][plaplib.cli.RunConfig], maps domain errors to exit code 2,
    emits the record, and exits with code 1 on failed checks or non-convergence.
    """
    def wrapped(*args: P.args, **kwargs: P.kwargs):
        config_kwargs = {k: kwargs.pop(k) for k in _CONFIG_KEYS if k in kwargs}
        start = time.perf_counter()
        try:
            config = RunConfig(**config_kwargs)  # type: ignore
            record = f(config, *args, **kwargs)
        except (DomainError, DegenerateError, MeshTooCoarseError) as e:
            raise DomainUsageError(str(e)) from None
        except IntegrationOverflowError as e:
            raise click.ClickException(str(e)) from None
        record.wall_time = time.perf_counter() - start
        logging.debug(f"'{record.command}' finished in {record.wall_time:.3f} s")

        path = config.output_path()
        if path is None:
            click.echo(record.encode(config.format, config.timing), nl=False)
        else:
            path.parent.mkdir(parents=True, exist_ok=True)
            record.write(path, config.format, config.timing)
            logging.info(f"Wrote '{record.command}' output to '{path}'")

        if record.scalars.get('passed') is False:
            logging.error(f"'{record.command}': checks failed")
            click.get_current_context().exit(1)
        if not record.all_converged() and not config.allow_nonconverged:
            logging.error(f"'{record.command}': computation didn't converge (pass --allow-nonconverged to ignore)")
            click.get_current_context().exit(1)

    return update_wrapper(wrapped, f)  # type: ignore


def _pin_node(ctx: ExponentContext, mesh: Mesh, y: t.Optional[float]) -> PinConstraint:
    y = 0.5 * ctx.pi_p if y is None else y
    if not 0. < y <= 0.5 * ctx.pi_p:
        raise DomainError(f"y must lie in (0, pi_p/2] = (0, {0.5 * ctx.pi_p:.6g}], got y={y!r}")
    return PinConstraint.nearest(mesh, y)


@cli.command('constant')
@problem_options
@output_options
@record_command
def constant(config: RunConfig) -> ResultRecord:
    """Sharp constant C(p, lambda)."""
    ctx = config.context()
    shift = config.shift()
    c = lyapunov_constant(ctx, shift)
    return ResultRecord('constant', config.inputs(), {
        'branch': str(c.branch), 'K': shift.K, 'pi_p': ctx.pi_p, 'lambda1': ctx.lambda1, 'C': c.value,
    })


@cli.command('verify')
@click.argument('suite', type=click.Choice(tuple(SUITES), case_sensitive=False))
@click.option('--p', 'ps', type=float, multiple=True, help="Exponent to check (repeatable, default: the suite's grid)")
@output_options
@record_command
def verify(config: RunConfig, suite: str, ps: t.Sequence[float] = ()) -> ResultRecord:
    """Run a suite of numerical invariant checks."""
    frame = run_suite(suite, ps or None)
    passed = all_passed(frame)
    return ResultRecord('verify', {'suite': suite, 'p': ','.join(f"{p:g}" for p in ps) or None}, {
        'checks': frame.height,
        'failed': int((~frame['passed']).sum()),
        'max_residual': float(frame['max_residual'].max()),  # type: ignore
        'passed': passed,
    }, frame)


@cli.command('minimize')
@problem_options
@click.option('--y', type=float, help="Pinning point in (0, pi_p/2] (default pi_p/2)")
@click.option('--profile', is_flag=True, help="Emit the minimizer and the exact profile")
@numeric_options
@output_options
@record_command
def minimize(config: RunConfig, y: t.Optional[float] = None, profile: bool = False) -> ResultRecord:
    """Minimize J(u) subject to u(y) = 1."""
    ctx = config.context()
    shift = config.shift()
    mesh = config.mesh(ctx)
    pin = _pin_node(ctx, mesh, y)
    y_node = pin.y(mesh)

    result = minimize_pinned(ctx, shift, pin, pinned_hat(mesh, pin), config.options())
    f = F_closed(ctx, shift, y_node)
    table = None
    if profile:
        table = polars.DataFrame({
            'x': mesh.nodes, 'u': result.minimizer.values,
            'u_y': minimizer_profile(ctx, shift, y_node, mesh.nodes),
        })
    return ResultRecord('minimize', {**config.inputs(), 'mesh_n': mesh.n, 'y': y, 'seed': config.seed}, {
        'y_node': y_node, 'objective': result.objective, 'F': f,
        'rel_error': abs(result.objective - f) / abs(f),
        'in_max_class': pinned_minimizer_in_max_class(result, pin),
        'iterations': result.iterations, 'restarts_used': result.restarts_used,
    }, table, {'minimize': result.converged})


@cli.command('sweep')
@problem_options
@click.option('--y-count', type=click.IntRange(min=3), default=8, show_default=True, help="Number of pinning points")
@numeric_options
@output_options
@record_command
def sweep(config: RunConfig, y_count: int = 8) -> ResultRecord:
    """Estimate C(p, lambda) by pinned minimization over a grid of pinning points."""
    ctx = config.context()
    shift = config.shift()
    mesh = config.mesh(ctx)
    est = global_constant_estimate(ctx, shift, mesh, y_count, config.options(), config.jobs)
    c = lyapunov_constant(ctx, shift).value
    table = polars.DataFrame({'y': est.ys, 'objective': est.objectives, 'F': F_closed(ctx, shift, est.ys)})
    return ResultRecord('sweep', {**config.inputs(), 'mesh_n': mesh.n, 'y_count': y_count, 'seed': config.seed}, {
        'estimate': est.value, 'y_argmin': est.y, 'C': c, 'rel_error': abs(est.value - c) / c,
        'argmin_at_center': bool(abs(est.y - 0.5 * ctx.pi_p) <= mesh.h),
    }, table, {'sweep': est.converged})


def _alphas(config: RunConfig, ctx: ExponentContext, shift: SpectralShift,
            tents: t.Sequence[TentProfile], mesh: Mesh) -> t.List[QuotientResult]:
    def run(tent: TentProfile) -> QuotientResult:
        return alpha_delta(ctx, shift, tent, mesh, config.options())

    if config.jobs > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            return list(pool.map(run, tents))
    return list(map(run, tents))


def _tent(ctx: ExponentContext, delta: float, center: t.Optional[float]) -> TentProfile:
    tent = TentProfile(0.5 * ctx.pi_p if center is None else center, delta)
    tent.check_within(ctx.pi_p)
    return tent


@cli.command('sharpness')
@problem_options
@click.argument('deltas', type=float, nargs=-1)
@click.option('--center', type=float, help="Tent center (default pi_p/2)")
@numeric_options
@output_options
@record_command
def sharpness(config: RunConfig, deltas: t.Sequence[float] = (), center: t.Optional[float] = None) -> ResultRecord:
    """Compute alpha(delta) for tent potentials of half-width DELTAS."""
    ctx = config.context()
    shift = config.shift()
    mesh = config.mesh(ctx)
    deltas = tuple(deltas) or DEFAULT_DELTAS
    c = lyapunov_constant(ctx, shift).value

    results = _alphas(config, ctx, shift, [_tent(ctx, d, center) for d in deltas], mesh)
    alphas = numpy.array([r.value for r in results])
    table = polars.DataFrame({
        'delta': list(deltas), 'alpha': alphas, 'gap': alphas - c,
        'converged': [r.converged for r in results],
    })
    # widest tent first
    order = numpy.argsort(deltas)[::-1]
    gaps = alphas[order] - c
    return ResultRecord('sharpness', {**config.inputs(), 'mesh_n': mesh.n, 'center': center, 'seed': config.seed}, {
        'C': c,
        'all_above_constant': bool(numpy.all(alphas > c)),
        'decreasing': bool(numpy.all(numpy.diff(alphas[order]) < 0.)),
        'gap_ratio': float(gaps[0] / gaps[-1]) if gaps[-1] != 0. else None,
    }, table, {f'delta={d:g}': r.converged for (d, r) in zip(deltas, results)})


@cli.command('shoot')
@problem_options
@click.argument('amplitudes', type=float, nargs=-1)
@click.option('--delta', type=float, default=0.05, show_default=True, help="Tent half-width")
@click.option('--center', type=float, help="Tent center (default pi_p/2)")
@click.option('--alpha', 'with_alpha', is_flag=True, help="Also shoot at amplitude alpha(delta)")
@click.option('--tol', type=float, default=1e-3, show_default=True, help="Miss distance counted as a solution")
@numeric_options
@output_options
@record_command
def shoot(config: RunConfig, amplitudes: t.Sequence[float] = (), delta: float = 0.05,
          center: t.Optional[float] = None, with_alpha: bool = False, tol: float = 1e-3) -> ResultRecord:
    """
    Shoot with tent potentials of the given AMPLITUDES (default 0.9 C(p, lambda)).

    A zero miss distance is only possible for amplitudes above C(p, lambda).
    """
    ctx = config.context()
    shift = config.shift()
    tent = _tent(ctx, delta, center)
    c = lyapunov_constant(ctx, shift).value

    amps = list(amplitudes) or [0.9 * c]
    converged: t.Dict[str, bool] = {}
    scalars: t.Dict[str, t.Any] = {'C': c}
    if with_alpha:
        result = alpha_delta(ctx, shift, tent, config.mesh(ctx), config.options())
        amps.append(result.value)
        scalars['alpha'] = result.value
        converged['alpha'] = result.converged

    report = verify_lyapunov_threshold(ctx, shift, tent, sorted(amps), config.steps, tol)
    scalars['passed'] = bool(report['consistent'].all())
    inputs = {**config.inputs(), 'delta': delta, 'center': center, 'steps': config.steps, 'tol': tol}
    if with_alpha:
        inputs['mesh_n'] = config.mesh_n
    return ResultRecord('shoot', inputs, scalars, report, converged)


@cli.command('fig4')
@problem_options
@click.option('--k', 'k', type=float, help="Set lambda = K^p (p - 1), for 0 < K < 1")
@click.option('--y', type=float, help="Pinning point (default: half the overshoot abscissa, or pi_p/4)")
@click.option('--points', type=click.IntRange(min=3), default=401, show_default=True)
@output_options
@record_command
def fig4(config: RunConfig, k: t.Optional[float] = None, y: t.Optional[float] = None, points: int = 401) -> ResultRecord:
    """Sample the pinned minimizer u_y on [0, pi_p]."""
    if k is not None:
        if not 0. < k < 1.:
            raise DomainError(f"K must lie in (0, 1), got {k!r}")
        config.lam = k**config.p * (config.p - 1.)
    ctx = config.context()
    shift = config.shift()
    x_star = overshoot_threshold(ctx, shift)
    if y is None:
        y = 0.5 * x_star if x_star is not None else 0.25 * ctx.pi_p

    xs = numpy.linspace(0., ctx.pi_p, points)
    extra = [y] if x_star is None else [y, x_star]
    xs = numpy.unique(numpy.concatenate([xs, extra]))
    us = minimizer_profile(ctx, shift, y, xs)
    (argmax, peak) = profile_maximum(ctx, shift, y)

    return ResultRecord('fig4', {**config.inputs(), 'K': shift.K, 'y': y, 'points': points}, {
        'overshoot_x': x_star,
        'u_at_overshoot_x': None if x_star is None else minimizer_profile(ctx, shift, y, x_star),
        'argmax': argmax, 'max': peak,
        'exceeds_one': bool(peak > 1.),
    }, polars.DataFrame({'x': xs, 'u_y': us}))


@cli.command('eigen')
@click.option('--p', 'p', type=float, default=2., show_default=True, help="Exponent p > 1")
@numeric_options
@output_options
@record_command
def eigen(config: RunConfig) -> ResultRecord:
    """First Dirichlet eigenvalue by Rayleigh quotient minimization."""
    ctx = config.context()
    mesh = config.mesh(ctx)
    result = rayleigh_first_eigen(ctx, mesh, config.options())
    deviation = numpy.max(numpy.abs(result.eigenfunction.values - interpolate(mesh, lambda x: sin_p(ctx, x)).values))
    return ResultRecord('eigen', {'p': config.p, 'mesh_n': mesh.n}, {
        'eigenvalue': result.eigenvalue, 'lambda1': ctx.lambda1,
        'rel_error': abs(result.eigenvalue - ctx.lambda1) / ctx.lambda1,
        'sin_p_deviation': float(deviation),
        'iterations': result.iterations,
    }, None, {'eigen': result.converged})


@cli.command('schema')
def schema():
    """Print the JSON schema of result records."""
    click.echo(json.dumps(record_schema(), indent=2))
