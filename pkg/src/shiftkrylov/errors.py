"""Exception types shared across the solvers."""

import numpy as np


class InvalidInputError(ValueError):
    """Input that violates a precondition (shape, finiteness, empty shift list)."""


class SingularityError(np.linalg.LinAlgError):
    """A small dense problem is numerically singular.

    ``index`` names the offending column (least squares) or shift, when known.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class CycleSingularityError(SingularityError):
    """A shifted reduced problem is singular: the shift coincides with a
    (harmonic) Ritz value of the current cycle."""


class DeflationError(np.linalg.LinAlgError):
    """Harmonic Ritz extraction failed (H_m singular)."""


class NumericalFailure(np.linalg.LinAlgError):
    """Iteration failure inside a dense kernel."""


class DegenerateCorrectionError(np.linalg.LinAlgError):
    """Extra right-hand side correction with 1 - gamma ~ 0."""
