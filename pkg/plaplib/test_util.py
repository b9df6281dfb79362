from io import StringIO
from pathlib import Path

import numpy
import pytest

from .util import DomainError, PoleError, MeshTooCoarseError, IntegrationOverflowError
from .util import open_file, proc_seed, parse_key_value


def test_parse_key_value():
    lines = [
        "# run parameters",
        "p = 3",
        "",
        "mesh-n=512  # finer",
        "lambda = -2",
    ]
    assert parse_key_value(lines) == {'p': '3', 'mesh_n': '512', 'lambda': '-2'}

    with pytest.raises(ValueError, match="line 2"):
        parse_key_value(["p = 3", "steps"])


def test_errors():
    assert issubclass(PoleError, DomainError)
    assert issubclass(DomainError, ValueError)

    e = MeshTooCoarseError(0.1, 0.2, 4.)
    assert str(e) == "Mesh width h=0.1 doesn't resolve feature of size 0.2 (need h < 0.05)"
    assert isinstance(e, ValueError)

    e = IntegrationOverflowError(1.5, -2e6, 1e6)
    assert str(e) == "|u| = 2e+06 exceeded bound 1e+06 at x = 1.5"
    assert isinstance(e, ArithmeticError)


def test_proc_seed():
    assert proc_seed(None, 'a') is None
    a = proc_seed(0, 'minimize')
    assert a is not None and a.dtype == numpy.uint32
    numpy.testing.assert_array_equal(a, proc_seed(0, 'minimize'))
    assert not numpy.array_equal(a, proc_seed(0, 'other'))
    assert not numpy.array_equal(a, proc_seed(1, 'minimize'))


def test_open_file(tmp_path: Path):
    path = tmp_path / 'out.txt'
    with open_file(path, 'w') as f:
        f.write("line\n")
    with open_file(str(path)) as f:
        assert f.read() == "line\n"

    buf = StringIO()
    with open_file(buf, 'w') as f:
        f.write("x")
    assert not buf.closed
    assert buf.getvalue() == "x"

    buf.close()
    with pytest.raises(IOError):
        open_file(buf, 'w')
