import typing as t

from typing_extensions import TypeAlias
import numpy
from numpy.typing import NDArray, ArrayLike


FloatArray: TypeAlias = NDArray[numpy.float64]
"""Array of float64 values, of any shape."""

RealLike: TypeAlias = t.Union[float, int, ArrayLike]
"""Real scalar or array-like of reals. Functions taking a `RealLike` broadcast over arrays."""


def to_float_array(v: RealLike) -> FloatArray:
    """
    Coerce `v` to a float64 ndarray (0-d for scalars), rejecting non-finite values.
    """
    from .util import DomainError

    try:
        arr = numpy.asarray(v, dtype=numpy.float64)
    except (ValueError, TypeError):
        raise TypeError(f"Expected a real number or array of reals, got '{v!r}'.") from None
    if not numpy.all(numpy.isfinite(arr)):
        raise DomainError(f"Expected finite argument(s), got '{v!r}'.")
    return arr


def unwrap(arr: FloatArray, like: RealLike) -> t.Any:
    """Return a Python float if `like` was a scalar, otherwise the array `arr`."""
    if numpy.ndim(like) == 0:
        return float(arr)
    return arr


__all__ = [
    'FloatArray', 'RealLike',
    'to_float_array', 'unwrap',
]
