"""Exception hierarchy for the toolkit."""


class ToolkitError(Exception):
    """Base class for all toolkit errors."""


class WindowTooSmallError(ToolkitError):
    """A banded window is too small for the requested operation."""


class InvalidWeightError(ToolkitError):
    """A trigonometric weight violates its nonnegativity contract."""


class DomainError(ToolkitError):
    """An evaluation point lies outside the admissible domain."""


class NonpositiveDensityError(ToolkitError):
    """The a.c. density came out nonpositive; signals a bug or a resonance pathology."""


class QuadratureError(ToolkitError):
    """Adaptive quadrature did not reach the requested tolerance.

    Carries the best available value and the achieved error estimate.
    """

    def __init__(self, message, value=None, error_estimate=None, evaluations=None):
        super().__init__(message)
        self.value = value
        self.error_estimate = error_estimate
        self.evaluations = evaluations


class CompletenessMismatchError(ToolkitError):
    """Shooting eigenvalue count disagrees with the Sturm truncation oracle."""

    def __init__(self, message, side=None, shooting_count=None, sturm_count=None,
                 cutoff=None):
        super().__init__(message)
        self.side = side
        self.shooting_count = shooting_count
        self.sturm_count = sturm_count
        self.cutoff = cutoff


class HypothesisViolationError(ToolkitError):
    """The sign hypotheses of the requested sum-rule variant fail numerically."""


class HypothesisNotMetError(ToolkitError):
    """A diagnostic's standing hypothesis (e.g. cubic summability) fails."""


class ConfigError(ToolkitError):
    """Experiment configuration could not be parsed or validated."""

    def __init__(self, message, line=None, field=None):
        if line is not None:
            message = f"line {line}: {message}"
        if field is not None:
            message = f"{message} (field {field!r})"
        super().__init__(message)
        self.line = line
        self.field = field
