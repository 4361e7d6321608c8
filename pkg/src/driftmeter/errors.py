"""Exception hierarchy shared across the pipeline stages."""


class DriftmeterError(Exception):
    """Base class for every error raised by this package."""


class InputError(DriftmeterError):
    """Problem with data handed to the package (files, CSV rows, arguments)."""


class WavFormatError(InputError):
    """Malformed RIFF/WAVE container."""


class UnsupportedFormatError(InputError):
    """Well-formed WAV whose codec is not plain PCM or IEEE float."""


class PitchCsvError(InputError):
    """A pitch CSV could not be parsed.

    ``row`` is the 1-based physical line number, or ``None`` when the
    problem is not tied to one row.
    """

    def __init__(self, message, row=None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class EmptyTrackError(InputError):
    """The input contains no pitch frames at all."""


class InsufficientInputError(InputError):
    """Audio shorter than one analysis frame."""


class AnalysisError(DriftmeterError):
    """Failure inside one of the numerical stages."""


class EmptyHistogramError(AnalysisError):
    """No values to histogram and no explicit range to fall back on."""


class DegenerateRegressionError(AnalysisError):
    """All points share one x value, so a line is undefined."""


class EmptyReportError(AnalysisError):
    """No peaks survived, so there is nothing to cluster."""
