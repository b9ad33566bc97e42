"""Exception hierarchy.

Every failure raised by the library derives from :class:`PContractError` so
callers (and the CLI exit-code mapping) can distinguish mathematical
invalidity, resource exhaustion and malformed input.
"""

from __future__ import annotations


class PContractError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(PContractError, ValueError):
    """Operands disagree in modulus, dimension or shape."""


class PrecisionError(PContractError):
    """A coefficient was requested that the inputs do not determine."""


class WindowOverflow(PContractError):
    """A degree left the configured window."""


class MembershipError(PContractError):
    """A vector does not lie in the subgroup an operation requires."""


class NotTidy(PContractError):
    """A compact open subgroup is not invariant under the shift."""


class NotCommuting(PContractError):
    """Two matrices expected to commute do not."""

    def __init__(self, message: str, pair: tuple[int, int]):
        super().__init__(message)
        self.pair = pair


class NotNilpotent(PContractError):
    """A matrix expected to be nilpotent is not."""


class InvalidRep(PContractError):
    """A representation failed validation."""


class BranchError(PContractError):
    """The solver was asked to run a construction outside its branch."""


class ResourceExhausted(PContractError):
    """A window, depth or search budget ran out.

    Failing for this reason never means the sought object does not exist.
    """

    def __init__(self, message: str, stage: str = "", diagnostics: dict | None = None):
        super().__init__(message)
        self.stage = stage
        self.diagnostics = diagnostics or {}


class CertificateError(PContractError):
    """A supplied convergence certificate is missing or violated."""


class FormatError(PContractError):
    """An instance or result file is malformed."""

    def __init__(self, message: str, location: str = ""):
        super().__init__(f"{location}: {message}" if location else message)
        self.location = location
