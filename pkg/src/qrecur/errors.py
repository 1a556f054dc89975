"""Exception hierarchy shared by all qrecur modules.

The classes mirror the failure modes of the numerical pipeline: kernel
failures (``NoConvergence``, ``NotPositiveDefinite``), refused standing
hypotheses (``NotFaithful``, ``NotInvariant``, ``NotUnital``), and document
errors raised by the system-spec parser (``ParseError``,
``InvariantViolation``).  The CLI maps these onto exit codes, see
:mod:`qrecur.cli`.
"""


class QrecurError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(QrecurError):
    """Operands have incompatible shapes."""


class NotHermitian(QrecurError):
    """A matrix required to be Hermitian is not, within tolerance."""


class NotPositiveDefinite(QrecurError):
    """Cholesky pivot failure; ``pivot`` is the offending index."""

    def __init__(self, message, pivot=None):
        super().__init__(message)
        self.pivot = pivot


class NoConvergence(QrecurError):
    """An iterative or library eigenroutine failed to converge."""


class NotFaithful(QrecurError):
    """The state has (numerically) singular density matrix; no GNS space."""


class NotInvariant(QrecurError):
    """The state is not invariant under the channel within tolerance."""


class NotUnital(QrecurError):
    """The channel does not map the identity to the identity."""


class NotUnitary(QrecurError):
    """A matrix required to be unitary is not, within tolerance."""


class NotContraction(QrecurError):
    """An operator expected to be a contraction has norm above 1."""


class ContractionViolation(QrecurError):
    """The GNS image of the channel exceeds norm 1, i.e. the Schwarz
    hypothesis fails for this map/state pair."""


class BadParam(QrecurError):
    """A model or operation parameter is out of its admissible range."""


class EmptyKrausList(QrecurError):
    """A channel was requested from an empty list of Kraus operators."""


class DecayFailure(QrecurError):
    """Some candidate decaying basis elements do not decay within the
    horizon.  Carries the partial decomposition so reporting can proceed."""

    def __init__(self, message, non_decaying=(), decomposition=None):
        super().__init__(message)
        self.non_decaying = list(non_decaying)
        self.decomposition = decomposition


class InconsistentInputs(QrecurError):
    """Analysis inputs do not belong to the same operator/system."""


class ParseError(QrecurError):
    """A system-spec document is malformed; ``path`` locates the problem."""

    def __init__(self, message, path=""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class InvariantViolation(QrecurError):
    """A parsed value violates a structural invariant (trace, Hermiticity,
    positivity); ``path`` locates the offending field when known."""

    def __init__(self, message, path=""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
