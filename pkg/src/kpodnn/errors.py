"""Exception types shared across the toolkit.

Two families matter for the CLI: validation errors (bad inputs, shapes,
configuration) map to exit code 2, numerical failures (instability,
divergence, degenerate spectra) map to exit code 3.
"""


class KpodnnError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(KpodnnError):
    """Bad inputs, shapes, or configuration."""


class NumericalError(KpodnnError):
    """A computation failed numerically."""


class DimensionMismatch(ValidationError):
    """Array shapes do not chain or do not match their metadata."""


class TooFewRows(ValidationError):
    """Dataset has fewer rows than the requested fold count."""


class CflViolation(NumericalError):
    """Courant number exceeds 1; the explicit scheme would be unstable."""


class ConvergenceFailure(NumericalError):
    """The eigensolver or SVD did not converge."""


class DegenerateSpectrum(NumericalError):
    """All kernel eigenvalues are numerically nonpositive."""


class ZeroTargetNorm(NumericalError):
    """A batch of regression targets has zero norm; the relative loss is undefined."""


class Diverged(NumericalError):
    """Training loss became non-finite."""


class ZeroNormSnapshot(NumericalError):
    """Every test snapshot has zero norm; no relative error can be formed."""
