"""Exception hierarchy shared by the library and the CLI.

Each error carries the process exit code the CLI maps it to:
1 for I/O or parse problems, 2 for validation failures and 3 for
inputs the constructions do not cover.
"""


class GrassfactorError(Exception):
    """Base class for every error raised by grassfactor."""

    exit_code: int = 2

    def __init__(self, message: str = "", **context):
        super().__init__(message or self.__class__.__name__)
        self.context = context


# ─── I/O ─────────────────────────────────────────────────────────────────────

class DocumentError(GrassfactorError):
    """Unreadable or malformed matrix / factorization document."""

    exit_code = 1


# ─── Validation ──────────────────────────────────────────────────────────────

class BadDimensions(GrassfactorError):
    pass


class NotOrthogonal(GrassfactorError):
    pass


class NotUnitary(GrassfactorError):
    pass


class NotOrthonormal(GrassfactorError):
    pass


class InvalidPoint(GrassfactorError):
    pass


class BadSignature(GrassfactorError):
    pass


class BadPartition(GrassfactorError):
    pass


class NotStructured(GrassfactorError):
    pass


class NotMember(GrassfactorError):
    pass


class NotSpecialOrthogonal(GrassfactorError):
    pass


class NotAntiSpecial(GrassfactorError):
    pass


class NotSpecialOrAntiSpecial(GrassfactorError):
    pass


class NotSpecialUnitary(GrassfactorError):
    pass


class NotAntiSpecialUnitary(GrassfactorError):
    pass


class DeterminantMismatch(GrassfactorError):
    pass


class NotSymplectic(GrassfactorError):
    pass


class NotDiagonalSymplectic(GrassfactorError):
    pass


# ─── Not covered ─────────────────────────────────────────────────────────────

class ConvergenceFailure(GrassfactorError):
    exit_code = 3


class NoSolutionFound(GrassfactorError):
    exit_code = 3


class NonGeneric(GrassfactorError):
    exit_code = 3


class Unsupported(GrassfactorError):
    exit_code = 3
