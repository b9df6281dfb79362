"""
Result records emitted by the command line interface, and their text, CSV and JSON encodings.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import json
import math
import typing as t

from importlib_resources import files
import numpy
import polars

from .util import FileOrPath, open_file


Scalar = t.Union[float, int, str, bool, None]

OutputFormat = t.Literal['text', 'csv', 'json']
FORMATS: t.Tuple[OutputFormat, ...] = ('text', 'csv', 'json')

MACHINE_DIGITS: int = 15
TEXT_DIGITS: int = 9

SCHEMA_PATH = files('plaplib.data') / 'record.schema.json'


def format_value(v: t.Any, digits: int = MACHINE_DIGITS) -> str:
    """Format a scalar for CSV or text output."""
    if v is None:
        return ''
    if isinstance(v, (bool, numpy.bool_)):
        return 'true' if v else 'false'
    if isinstance(v, (int, numpy.integer)):
        return str(int(v))
    if isinstance(v, (float, numpy.floating)):
        v = float(v)
        if math.isnan(v):
            return 'nan'
        if math.isinf(v):
            return 'inf' if v > 0 else '-inf'
        s = f"{v:.{digits}g}"
        # normalize negative zero
        return '0' if s == '-0' else s
    return str(v)


def round_value(v: t.Any, digits: int = MACHINE_DIGITS) -> t.Any:
    """Round floats to `digits` significant digits for JSON. Non-finite floats become `None`."""
    if isinstance(v, (bool, numpy.bool_)):
        return bool(v)
    if isinstance(v, (int, numpy.integer)):
        return int(v)
    if isinstance(v, (float, numpy.floating)):
        v = float(v)
        if not math.isfinite(v):
            return None
        v = float(f"{v:.{digits}g}")
        return 0. if v == 0. else v
    return v


@dataclass
class ResultRecord:
    """The inputs and outputs of a single command run."""

    command: str
    inputs: t.Dict[str, Scalar] = field(default_factory=dict)
    """Echo of the command's parameters"""
    scalars: t.Dict[str, Scalar] = field(default_factory=dict)
    """Named scalar outputs"""
    table: t.Optional[polars.DataFrame] = None
    """Array outputs, as named columns"""
    converged: t.Dict[str, bool] = field(default_factory=dict)
    """Convergence flags of the underlying computations"""
    wall_time: t.Optional[float] = None
    """Wall time in seconds. Only emitted when requested."""

    def all_converged(self) -> bool:
        return all(self.converged.values())

    def to_dict(self, timing: bool = False) -> t.Dict[str, t.Any]:
        out: t.Dict[str, t.Any] = {
            'command': self.command,
            'inputs': {k: round_value(v) for (k, v) in self.inputs.items()},
            'scalars': {k: round_value(v) for (k, v) in self.scalars.items()},
            'series': {} if self.table is None else {
                name: [round_value(v) for v in self.table[name].to_list()] for name in self.table.columns
            },
            'converged': {k: bool(v) for (k, v) in self.converged.items()},
        }
        if timing and self.wall_time is not None:
            out['wall_time'] = round_value(self.wall_time)
        return out

    def to_json(self, timing: bool = False) -> str:
        """
        Encode as JSON, with sorted keys and floats rounded to 15 significant digits.

        Without `timing`, the output depends only on the inputs.
        """
        return json.dumps(self.to_dict(timing), sort_keys=True, indent=2) + "\n"

    def csv_frame(self) -> polars.DataFrame:
        """
        Frame of pre-formatted strings written as CSV.

        The table if there is one, otherwise a single row of inputs and scalar outputs.
        """
        if self.table is not None:
            return polars.DataFrame({
                name: [format_value(v) for v in self.table[name].to_list()] for name in self.table.columns
            }, schema={name: polars.Utf8 for name in self.table.columns})

        row = {**self.inputs, **self.scalars}
        return polars.DataFrame({k: [format_value(v)] for (k, v) in row.items()},
                                schema={k: polars.Utf8 for k in row})

    def to_csv(self) -> str:
        return self.csv_frame().write_csv(line_terminator="\n")

    def to_text(self, timing: bool = False) -> str:
        lines = [f"{self.command}:"]
        for (k, v) in {**self.inputs, **self.scalars}.items():
            lines.append(f"  {k}: {format_value(v, TEXT_DIGITS)}")
        for (k, v) in self.converged.items():
            lines.append(f"  converged[{k}]: {format_value(v)}")
        if timing and self.wall_time is not None:
            lines.append(f"  wall_time: {self.wall_time:.3f} s")

        if self.table is not None and self.table.width > 0:
            cols = [[name] + [format_value(v, TEXT_DIGITS) for v in self.table[name].to_list()]
                    for name in self.table.columns]
            widths = [max(map(len, col)) for col in cols]
            for row in zip(*cols):
                lines.append("  " + "  ".join(s.rjust(w) for (s, w) in zip(row, widths)).rstrip())
        return "\n".join(lines) + "\n"

    def encode(self, fmt: OutputFormat, timing: bool = False) -> str:
        if fmt == 'json':
            return self.to_json(timing)
        if fmt == 'csv':
            return self.to_csv()
        if fmt == 'text':
            return self.to_text(timing)
        raise ValueError(f"Unknown output format '{fmt}'")

    def write(self, f: FileOrPath, fmt: OutputFormat, timing: bool = False):
        with open_file(f, 'w', newline='') as out:
            out.write(self.encode(fmt, timing))


def record_schema() -> t.Dict[str, t.Any]:
    """Return the JSON schema of encoded [`ResultRecord`][plaplib.record.ResultRecord]s."""
    return json.loads(SCHEMA_PATH.read_text(encoding='utf-8'))


__all__ = [
    'ResultRecord', 'OutputFormat', 'FORMATS', 'format_value', 'round_value', 'record_schema',
]
