"""Exception types shared across the toolkit."""


class BlanclabError(Exception):
    """Base class for all toolkit errors."""


class BackendError(BlanclabError):
    """A model backend call failed (transport, protocol, or server error)."""


class CapabilityError(BackendError):
    """The selected backend does not support a required capability."""


class UnknownSessionError(BackendError):
    """A tuned-session handle is not (or no longer) known to the backend."""


class SampleSkippedError(BlanclabError):
    """One (text, summary) pair cannot be evaluated; carries the diagnostic."""


class SummaryTooLongError(SampleSkippedError):
    """The summary does not fit the backend input limit, leaving no room for text."""


class AllSamplesSkippedError(BlanclabError):
    """Every sample of a corpus was skipped, so no mean score exists."""


class DegenerateInputError(BlanclabError):
    """Statistic undefined for this input (zero variance, too few points, zero baseline)."""


class CorpusFormatError(BlanclabError):
    """A corpus file violates its schema; message names file, line and field."""
