"""Exception types shared across the package.

Plain ``ValueError`` is reserved for malformed arguments (bad shapes, out of
range options).  Everything that can go wrong *during* analysis derives from
:class:`GlotkitError` so callers can catch one base class.
"""


class GlotkitError(Exception):
    """Base class for analysis failures raised by this package."""


class DegenerateInputError(GlotkitError):
    """Input carries no usable information (all-zero pulse, empty region)."""


class NumericalDegeneracyError(GlotkitError):
    """A linear-algebra step lost rank or an eigensolver failed to converge."""


class DegenerateVtfError(GlotkitError):
    """No stable complex pole pairs remain to build a vocal-tract filter."""


class CepstrumError(GlotkitError):
    """Log-spectrum is ill-conditioned or the cepstral inverse failed."""


class SynthesisError(GlotkitError):
    """Pulse-model synthesis failed (implicit equation did not converge)."""


class FitError(GlotkitError):
    """Pulse-model fitting failed for every start point."""


class OpenQuotientError(GlotkitError):
    """A derived open quotient fell outside the plausible open interval."""


class AnalysisError(GlotkitError):
    """Pipeline-level failure (too few usable pulses, missing inputs)."""
