import math
import warnings

import numpy
from numpy.testing import assert_allclose, assert_array_equal
import pytest
from scipy import integrate

from .ptrig import ExponentContext, pi_p, pi_p_quadrature, arcsin_p, sin_p, cos_p, cot_p
from .ptrig import arcsinh_p, sinh_p, cosh_p, coth_p
from .util import DomainError, PoleError


PS = [1.2, 1.5, 2., 3., 5.]


@pytest.fixture(scope='module', params=PS)
def ctx(request) -> ExponentContext:
    return ExponentContext(request.param)


@pytest.fixture(scope='module')
def ctx2() -> ExponentContext:
    return ExponentContext(2.)


@pytest.mark.parametrize(('p', 'expected'), [
    (2., math.pi),
    (3., 2.418399152312290),
    (1.5, 4.836798304624581),
])
def test_pi_p(p, expected):
    assert pi_p(p) == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize('p', [1., 0.5, -2., float('inf'), float('nan'), 1. + 1e-9])
def test_pi_p_domain(p):
    with pytest.raises(DomainError):
        pi_p(p)
    with pytest.raises(DomainError):
        ExponentContext(p)


def test_context_invariants(ctx: ExponentContext):
    assert 1. / ctx.p + 1. / ctx.q == pytest.approx(1., abs=1e-14)
    assert ctx.lambda1 == ctx.p - 1.
    assert abs(ctx.pi_p - pi_p_quadrature(ctx.p)) < 1e-10


def test_arcsin_p(ctx: ExponentContext):
    assert arcsin_p(ctx, 0.) == 0.
    assert arcsin_p(ctx, 1.) == pytest.approx(ctx.pi_p / 2., abs=1e-14)

    xs = numpy.linspace(0., 0.95, 7)
    vals = arcsin_p(ctx, xs)
    assert numpy.all(numpy.diff(vals) > 0.)

    p = ctx.p
    for (x, val) in zip(xs, vals):
        expected, _ = integrate.quad(lambda t: (1. - t**p)**(-1. / p), 0., x, epsabs=1e-14, epsrel=1e-14)
        assert val == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize('p', [1.2, 2., 3.])
def test_arcsin_p_near_one(p):
    ctx = ExponentContext(p)
    for x in (1. - 1e-12, 1. - 1e-9, 1. - 1e-6, 0.9):
        # pi_p/2 minus the tail, with the endpoint singularity as a quadrature weight
        def smooth_part(t: float) -> float:
            if t >= 1.:
                return (1. / p)**(1. / p)
            return ((1. - t) / -math.expm1(p * math.log(t)))**(1. / p)

        tail, _ = integrate.quad(smooth_part, x, 1., weight='alg', wvar=(0., -1. / p), epsabs=1e-15, epsrel=1e-14)
        assert arcsin_p(ctx, x) == pytest.approx(0.5 * ctx.pi_p - tail, abs=1e-12)

    # sin_p inverts it there too
    x = 1. - 1e-12
    assert sin_p(ctx, arcsin_p(ctx, x)) == pytest.approx(x, abs=1e-14)


def test_arcsin_p_classical(ctx2: ExponentContext):
    assert arcsin_p(ctx2, 0.5) == pytest.approx(math.pi / 6., abs=1e-14)


@pytest.mark.parametrize('x', [-0.1, 1.0001, [0.5, 2.]])
def test_arcsin_p_domain(ctx2: ExponentContext, x):
    with pytest.raises(DomainError):
        arcsin_p(ctx2, x)


def test_nonfinite(ctx2: ExponentContext):
    with pytest.raises(DomainError):
        sin_p(ctx2, float('nan'))
    with pytest.raises(DomainError):
        sinh_p(ctx2, [0., float('inf')])


def test_sin_p_special_values(ctx: ExponentContext):
    assert sin_p(ctx, 0.) == 0.
    assert sin_p(ctx, ctx.pi_p / 2.) == pytest.approx(1., abs=1e-14)
    assert cos_p(ctx, 0.) == pytest.approx(1., abs=1e-14)
    assert cos_p(ctx, ctx.pi_p / 2.) == pytest.approx(0., abs=1e-7)
    assert cot_p(ctx, ctx.pi_p / 2.) == pytest.approx(0., abs=1e-7)


def test_sin_p_symmetries(ctx: ExponentContext):
    xs = numpy.linspace(-2. * ctx.pi_p, 2. * ctx.pi_p, 101)
    s = sin_p(ctx, xs)
    assert numpy.all(numpy.abs(s) <= 1.)
    assert_allclose(sin_p(ctx, ctx.pi_p - xs), s, rtol=0., atol=1e-12)
    assert_allclose(sin_p(ctx, -xs), -s, rtol=0., atol=1e-12)
    assert_allclose(sin_p(ctx, xs + 2. * ctx.pi_p), s, rtol=0., atol=1e-12)

    assert sin_p(ctx, 0.7 * ctx.pi_p) == pytest.approx(sin_p(ctx, ctx.pi_p - 0.7 * ctx.pi_p), abs=1e-12)


def test_cos_p_sign(ctx: ExponentContext):
    half = ctx.pi_p / 2.
    assert cos_p(ctx, 0.5 * half) > 0.
    assert cos_p(ctx, -0.5 * half) > 0.
    assert cos_p(ctx, 1.5 * half) < 0.
    assert cos_p(ctx, 2.5 * half) < 0.
    assert cos_p(ctx, 3.5 * half) > 0.


def test_p_pythagorean(ctx: ExponentContext):
    rng = numpy.random.default_rng(1234)
    xs = rng.uniform(-3. * ctx.pi_p, 3. * ctx.pi_p, size=200)
    p = ctx.p
    resid = numpy.abs(cos_p(ctx, xs))**p + numpy.abs(sin_p(ctx, xs))**p - 1.
    assert numpy.max(numpy.abs(resid)) < 1e-12


def test_hyperbolic_identity(ctx: ExponentContext):
    rng = numpy.random.default_rng(1235)
    xs = rng.uniform(-2., 2., size=200)
    p = ctx.p
    resid = cosh_p(ctx, xs)**p - numpy.abs(sinh_p(ctx, xs))**p - 1.
    assert numpy.max(numpy.abs(resid)) < 1e-11


def test_derivatives(ctx: ExponentContext):
    xs = (numpy.arange(200) + 0.5) * 2. * ctx.pi_p / 200.
    h = 1e-5
    diff = (sin_p(ctx, xs + h) - sin_p(ctx, xs - h)) / (2. * h)
    assert_allclose(diff, cos_p(ctx, xs), rtol=0., atol=1e-6)

    xs = numpy.linspace(-3., 3., 200)
    diff = (sinh_p(ctx, xs + h) - sinh_p(ctx, xs - h)) / (2. * h)
    assert_allclose(diff, cosh_p(ctx, xs), rtol=1e-6, atol=1e-6)


def test_round_trip(ctx: ExponentContext):
    ss = numpy.linspace(0., 1., 50)
    assert_allclose(sin_p(ctx, arcsin_p(ctx, ss)), ss, rtol=0., atol=1e-12)
    # away from pi_p/2, where sin_p' = cos_p doesn't vanish
    xs = numpy.linspace(0., 0.4 * ctx.pi_p, 50)
    assert_allclose(arcsin_p(ctx, sin_p(ctx, xs)), xs, rtol=0., atol=1e-12)

    xs = numpy.linspace(0., 20., 50)
    assert_allclose(arcsinh_p(ctx, sinh_p(ctx, xs)), xs, rtol=0., atol=1e-9)


def test_arcsinh_p(ctx: ExponentContext):
    assert arcsinh_p(ctx, 0.) == 0.
    assert arcsinh_p(ctx, 2.) > arcsinh_p(ctx, 1.)

    p = ctx.p
    # all three evaluation ranges
    for x in (0.3, 1., 1.5, 2., 7.5, 40.):
        expected, _ = integrate.quad(lambda t: (1. + t**p)**(-1. / p), 0., x, epsabs=1e-14, epsrel=1e-14, limit=200)
        assert arcsinh_p(ctx, x) == pytest.approx(expected, abs=1e-11)

    with pytest.raises(DomainError):
        arcsinh_p(ctx, -1.)


def test_beta_p(ctx: ExponentContext):
    t = 1e6
    assert arcsinh_p(ctx, t) - math.log(t) == pytest.approx(ctx.beta_p, abs=1e-5)


def test_sinh_cosh(ctx: ExponentContext):
    with warnings.catch_warnings():
        warnings.simplefilter('error')
        assert_array_equal(cosh_p(ctx, [0., -0.]), [1., 1.])
    assert sinh_p(ctx, 0.) == 0.
    assert cosh_p(ctx, 0.) == 1.

    xs = numpy.linspace(-10., 10., 41)
    s = sinh_p(ctx, xs)
    assert numpy.all(numpy.diff(s) > 0.)
    assert_allclose(sinh_p(ctx, -xs), -s, rtol=1e-14)
    assert_allclose(cosh_p(ctx, -xs), cosh_p(ctx, xs), rtol=1e-14)
    assert numpy.all(cosh_p(ctx, xs) >= 1.)


def test_coth_p(ctx: ExponentContext):
    assert coth_p(ctx, -0.8) == pytest.approx(-coth_p(ctx, 0.8), rel=1e-14)
    assert coth_p(ctx, 0.8) > 1.
    v = coth_p(ctx, 50.)
    # coth_p(50) - 1 is far below double precision
    assert 1. <= v < 1. + 1e-6

    with pytest.raises(PoleError):
        coth_p(ctx, 0.)


def test_cot_p_pole(ctx: ExponentContext):
    with pytest.raises(PoleError):
        cot_p(ctx, 0.)
    with pytest.raises(PoleError):
        cot_p(ctx, [1., -2. * ctx.pi_p])
    # multiples that don't reduce to exactly zero
    for k in (3, 5, 7, -9):
        with pytest.raises(PoleError):
            cot_p(ctx, k * ctx.pi_p)
    assert abs(cot_p(ctx, 3. * ctx.pi_p + 1e-6)) > 1e4
    # PoleError is a DomainError
    with pytest.raises(DomainError):
        cot_p(ctx, 0.)


def test_cot_p_composed():
    ctx = ExponentContext(3.)
    assert cot_p(ctx, 0.5) == pytest.approx(cos_p(ctx, 0.5) / sin_p(ctx, 0.5), rel=1e-14)


def test_classical_reduction(ctx2: ExponentContext):
    xs = numpy.linspace(-10., 10., 100)
    assert_allclose(sin_p(ctx2, xs), numpy.sin(xs), rtol=0., atol=1e-10)
    assert_allclose(cos_p(ctx2, xs), numpy.cos(xs), rtol=0., atol=1e-10)
    assert_allclose(sinh_p(ctx2, xs), numpy.sinh(xs), rtol=1e-10)
    assert_allclose(cosh_p(ctx2, xs), numpy.cosh(xs), rtol=1e-10)

    xs = numpy.linspace(0.05, 3., 100)
    assert_allclose(cot_p(ctx2, xs), 1. / numpy.tan(xs), rtol=1e-10, atol=1e-10)
    assert_allclose(coth_p(ctx2, xs), 1. / numpy.tanh(xs), rtol=1e-10)

    xs = numpy.linspace(0., 1., 100)
    assert_allclose(arcsin_p(ctx2, xs), numpy.arcsin(xs), rtol=0., atol=1e-10)
    xs = numpy.linspace(0., 30., 100)
    assert_allclose(arcsinh_p(ctx2, xs), numpy.arcsinh(xs), rtol=0., atol=1e-10)

    assert arcsinh_p(ctx2, 1.) == pytest.approx(math.log(1. + math.sqrt(2.)), abs=1e-14)
    assert sinh_p(ctx2, 1.) == pytest.approx(1.1752011936438014, rel=1e-12)
    assert cosh_p(ctx2, 1.) == pytest.approx(1.5430806348152437, rel=1e-12)
    assert coth_p(ctx2, math.pi) == pytest.approx(1.0037418731973213, rel=1e-12)
    assert cot_p(ctx2, math.pi / 4.) == pytest.approx(1., rel=1e-12)


def test_scalar_and_array(ctx2: ExponentContext):
    assert isinstance(sin_p(ctx2, 1.), float)
    assert isinstance(sinh_p(ctx2, 1), float)
    out = sin_p(ctx2, [[0., 1.], [2., 3.]])
    assert out.shape == (2, 2)
    assert_array_equal(sin_p(ctx2, numpy.zeros(3)), numpy.zeros(3))


def test_fast_mode():
    fast = ExponentContext(3., fast=True)
    exact = ExponentContext(3.)
    xs = numpy.linspace(-5., 5., 31)
    assert_allclose(sin_p(fast, xs), sin_p(exact, xs), rtol=0., atol=1e-8)
    assert_allclose(sinh_p(fast, xs), sinh_p(exact, xs), rtol=1e-8)
    assert repr(fast) == "ExponentContext(p=3.0, fast=True)"
