"""
Exception hierarchy for the kinetics library
"""

from typing import Optional

import numpy as np


class KineticsError(Exception):
    """Base class for every error raised by the kinetics package"""


class ParameterError(KineticsError, ValueError):
    """Invalid construction parameters (bounds, sizes, tolerances)"""


class SizeGuardError(ParameterError):
    """Requested combinatorial size exceeds the supported limit"""


class DomainError(KineticsError, ValueError):
    """Argument outside the mathematical domain of an operation"""


class FitError(KineticsError):
    """A regression could not be performed on the supplied data"""


class NotAsymptoticError(FitError):
    """The trajectory never entered the blow-up regime needed for a fit"""


class StatisticsError(KineticsError):
    """Monte-Carlo sampling produced too few admissible samples"""


class StepUnderflowError(KineticsError):
    """
    The adaptive step size dropped below dt_min.

    Carries the last accepted node values so callers can stop cleanly.
    """

    def __init__(self, message: str, values: Optional[np.ndarray] = None, dt: float = 0.0):
        super().__init__(message)
        self.values = values
        self.dt = dt
