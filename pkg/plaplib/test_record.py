import json
import math
from io import StringIO

import numpy
import polars
import pytest

from .record import ResultRecord, format_value, round_value, record_schema


def test_format_value():
    assert format_value(None) == ''
    assert format_value(True) == 'true'
    assert format_value(numpy.bool_(False)) == 'false'
    assert format_value(3) == '3'
    assert format_value(numpy.int64(-2)) == '-2'
    assert format_value(2.) == '2'
    assert format_value(-0.) == '0'
    assert format_value(math.pi) == '3.14159265358979'
    assert format_value(math.pi, 9) == '3.14159265'
    assert format_value(1e-20) == '1e-20'
    assert format_value(math.nan) == 'nan'
    assert format_value(-math.inf) == '-inf'
    assert format_value('zero') == 'zero'


def test_round_value():
    assert round_value(math.pi) == 3.14159265358979
    assert round_value(numpy.float64(0.1) + numpy.float64(0.2)) == 0.3
    assert round_value(math.inf) is None
    assert round_value(math.nan) is None
    v = round_value(-0.)
    assert v == 0. and math.copysign(1., v) == 1.
    assert round_value(numpy.bool_(True)) is True
    assert round_value(numpy.int32(4)) == 4
    assert round_value(None) is None


@pytest.fixture
def scalar_record() -> ResultRecord:
    return ResultRecord('constant', {'p': 2., 'lambda': 0.25}, {'branch': 'positive', 'C': 1.0000000000000002},
                        converged={}, wall_time=0.5)


@pytest.fixture
def table_record() -> ResultRecord:
    table = polars.DataFrame({'delta': [0.2, 0.1], 'alpha': [1.5, math.inf], 'converged': [True, False]})
    return ResultRecord('sharpness', {'p': 2.}, {'C': 1.}, table, {'delta=0.2': True, 'delta=0.1': False})


def test_json(scalar_record: ResultRecord):
    s = scalar_record.to_json()
    assert s.endswith("}\n")
    d = json.loads(s)
    assert d == {
        'command': 'constant', 'inputs': {'p': 2., 'lambda': 0.25},
        'scalars': {'branch': 'positive', 'C': 1.}, 'series': {}, 'converged': {},
    }
    assert list(d) == sorted(d)
    assert json.loads(scalar_record.to_json(timing=True))['wall_time'] == 0.5


def test_json_table(table_record: ResultRecord):
    d = json.loads(table_record.encode('json'))
    assert d['series'] == {'delta': [0.2, 0.1], 'alpha': [1.5, None], 'converged': [True, False]}
    assert d['converged'] == {'delta=0.2': True, 'delta=0.1': False}
    assert not table_record.all_converged()


def test_csv(scalar_record: ResultRecord, table_record: ResultRecord):
    assert scalar_record.to_csv() == "p,lambda,branch,C\n2,0.25,positive,1\n"
    assert table_record.to_csv() == "delta,alpha,converged\n0.2,1.5,true\n0.1,inf,false\n"


def test_text(scalar_record: ResultRecord, table_record: ResultRecord):
    assert scalar_record.to_text() == "constant:\n  p: 2\n  lambda: 0.25\n  branch: positive\n  C: 1\n"
    assert scalar_record.to_text(timing=True).endswith("  wall_time: 0.500 s\n")

    lines = table_record.to_text().splitlines()
    assert lines[:5] == [
        "sharpness:", "  p: 2", "  C: 1", "  converged[delta=0.2]: true", "  converged[delta=0.1]: false",
    ]
    assert lines[5:] == [
        "  delta  alpha  converged",
        "    0.2    1.5       true",
        "    0.1    inf      false",
    ]


def test_encode_invalid(scalar_record: ResultRecord):
    with pytest.raises(ValueError):
        scalar_record.encode('yaml')  # type: ignore


def test_write(scalar_record: ResultRecord):
    buf = StringIO()
    scalar_record.write(buf, 'csv')
    assert buf.getvalue() == scalar_record.to_csv()


def test_schema():
    schema = record_schema()
    assert schema['required'] == ['command', 'inputs', 'scalars', 'series', 'converged']
    assert 'wall_time' in schema['properties']
    assert 'constant' in schema['properties']['command']['enum']
