import logging
import math

import numpy
from numpy.testing import assert_allclose
import polars
import pytest

from .verify import SUITES, DEFAULT_PS, identities, integrals, ivp, reduction, lyapunov
from .verify import classical_constant, run_suite, all_passed, _Checks, _cumulative_quad
from .util import DomainError


COLUMNS = ['check', 'p', 'max_residual', 'tolerance', 'passed']


def test_classical_constant():
    assert classical_constant(0.) == pytest.approx(4. / math.pi)
    assert classical_constant(0.25) == pytest.approx(1.)
    assert classical_constant(-4.) == pytest.approx(4. / math.tanh(math.pi))


def test_checks(caplog: pytest.LogCaptureFixture):
    checks = _Checks()
    checks.add('ok', 2., [1e-14, -2e-14], 1e-12)
    with caplog.at_level(logging.WARNING):
        checks.add('bad', 3., 0.5, 1e-12)
    assert "Check 'bad' failed for p=3" in caplog.text

    frame = checks.frame()
    assert frame.columns == COLUMNS
    assert frame['passed'].to_list() == [True, False]
    assert frame['max_residual'].to_list() == [2e-14, 0.5]
    assert not all_passed(frame)


def test_empty_checks():
    frame = _Checks().frame()
    assert frame.height == 0
    assert frame.schema['passed'] == polars.Boolean


def test_run_suite():
    assert set(SUITES) == set(DEFAULT_PS) == {'identities', 'integrals', 'ivp', 'reduction', 'lyapunov'}
    with pytest.raises(DomainError):
        run_suite('nonexistent')

    frame = run_suite('reduction')
    assert frame.columns == COLUMNS
    assert frame['p'].unique().to_list() == [2.]


def test_cumulative_quad():
    # |x - 1|^(1/2) has its break inside [0, z] for most z
    zs = numpy.array([2.5, 0.5, 1., 1.5, 0.5])
    (a, b) = _cumulative_quad(lambda x: numpy.stack([numpy.abs(x - 1.)**0.5, numpy.ones_like(x)]), zs, [1.])
    expected = (2. / 3.) * (1. - numpy.sign(1. - zs) * numpy.abs(1. - zs)**1.5)
    assert_allclose(a, expected, atol=1e-10)
    assert_allclose(b, zs, atol=1e-14)


def test_reduction():
    frame = reduction()
    assert frame.height == 14
    assert all_passed(frame), frame.filter(~polars.col('passed'))


def test_identities():
    frame = identities()
    assert frame['p'].unique(maintain_order=True).to_list() == list(DEFAULT_PS['identities'])
    assert 'arcsin_p_round_trip' in frame['check'].to_list()
    assert all_passed(frame), frame.filter(~polars.col('passed'))


def test_integrals():
    frame = integrals()
    assert frame.height == 6 * len(DEFAULT_PS['integrals'])
    assert all_passed(frame), frame.filter(~polars.col('passed'))


def test_ivp():
    frame = ivp()
    assert frame['p'].unique(maintain_order=True).to_list() == [1.5, 2., 3.]
    checks = frame['check'].to_list()
    assert 'step_halving(lambda1)' in checks and 'step_halving(-lambda1)' in checks
    assert frame.filter(polars.col('check').str.starts_with('step_halving')).height == 6
    assert all_passed(frame), frame.filter(~polars.col('passed'))


def test_lyapunov():
    frame = lyapunov()
    assert frame['p'].unique(maintain_order=True).to_list() == list(DEFAULT_PS['lyapunov'])
    assert all_passed(frame), frame.filter(~polars.col('passed'))
