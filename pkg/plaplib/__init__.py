from __future__ import annotations

from .ptrig import ExponentContext
from .lyapunov import Branch, SpectralShift, LyapunovConstant, lyapunov_constant
from .mesh import Mesh, DiscreteFunction, TentProfile
from .record import ResultRecord

# pyright: reportImportCycles=false

from . import ptrig, lyapunov, mesh, variational, shooting, verify, record

__all__ = [
    'ptrig', 'lyapunov', 'mesh', 'variational', 'shooting', 'verify', 'record',
    'ExponentContext', 'Branch', 'SpectralShift', 'LyapunovConstant', 'lyapunov_constant',
    'Mesh', 'DiscreteFunction', 'TentProfile',
    'ResultRecord',
]
