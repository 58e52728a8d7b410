# -*- coding: utf-8 -*-
"""
Exception hierarchy for DM-Continuum

CLI exit codes are derived from these types:
- ConfigError        -> 1
- BlowUpError        -> 2
- acceptance failure -> 3 (not an exception, see cli.run)
"""

from typing import Any, Optional


class DmLimitError(Exception):
    """Base class for all package errors"""


class ConfigError(DmLimitError):
    """Malformed or out-of-range run configuration"""


class GridMismatchError(DmLimitError, ValueError):
    """Fields on different lattices, or grids that are not nested"""


class DecayError(DmLimitError, ValueError):
    """Initial datum does not decay at the periodic boundary"""


class BlowUpError(DmLimitError):
    """
    Trajectory left the healthy regime

    t: time of the failing step or stage (None when unknown)
    norm: offending H¹ value (None when the failure is non-finite data)
    trajectory: dmnls.Trajectory with the snapshots recorded before the abort
    """

    def __init__(
        self,
        message: str,
        t: Optional[float] = None,
        norm: Optional[float] = None,
        trajectory: Optional[Any] = None,
    ):
        super().__init__(message)
        self.t = t
        self.norm = norm
        self.trajectory = trajectory


class NonFiniteError(BlowUpError):
    """NaN or Inf appeared in a field"""


class ConvergenceStudyError(DmLimitError):
    """A member run of a convergence study aborted"""

    def __init__(self, message: str, h: float):
        super().__init__(message)
        self.h = h
