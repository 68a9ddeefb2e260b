"""Exception hierarchy shared by every castnorm module."""

from __future__ import annotations


class CastNormError(Exception):
    """Base class for all castnorm errors."""


class ParseError(CastNormError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None,
                 source: str | None = None):
        self.message = message
        self.line = line
        self.column = column
        self.source = source
        super().__init__(self.location() + message)

    def location(self) -> str:
        parts = [p for p in (self.source, self.line, self.column) if p is not None]
        return ":".join(str(p) for p in parts) + ": " if parts else ""


class TypingError(CastNormError):
    """An expression or declaration that does not typecheck."""


class UndeclaredVariable(TypingError):
    pass


class IllTypedApplication(TypingError):
    pass


class InvalidCast(TypingError):
    pass


class DeclarationError(CastNormError):
    """Bad type, coercion, operator or variable declaration."""


class ClassifyError(CastNormError):
    def __init__(self, lhs_counts: tuple[int, int], rhs_counts: tuple[int, int],
                 name: str | None = None):
        self.lhs_counts = lhs_counts
        self.rhs_counts = rhs_counts
        self.name = name
        label = f"rule {name}: " if name else ""
        super().__init__(
            f"{label}cannot classify as elim/move/squash "
            f"(lhs HC={lhs_counts[0]} IC={lhs_counts[1]}, rhs HC={rhs_counts[0]} IC={rhs_counts[1]})"
        )


class DuplicateName(CastNormError):
    pass


class FuelExhausted(CastNormError):
    """Raised when a rewrite budget runs out.

    ``expr`` is the last expression reached and ``trace`` the partial trace
    leading to it (both may be None when raised from deep inside a pass).
    """

    def __init__(self, fuel: int, expr=None, trace=None):
        self.fuel = fuel
        self.expr = expr
        self.trace = trace
        super().__init__(f"rewrite fuel exhausted after {fuel} steps")


class RewriteFailed(CastNormError):
    def __init__(self, name: str, reason: str = "matches nowhere"):
        self.name = name
        super().__init__(f"rewrite with {name} failed: {reason}")


class OracleError(CastNormError):
    pass


class AbstractTypePresent(OracleError):
    pass


class UnknownUserOp(OracleError):
    pass


class InstantiationIllTyped(OracleError):
    pass
