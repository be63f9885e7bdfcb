"""Exception types raised by the kernel."""


class KernelError(Exception):
    """Base class for every error raised by mcdeform."""


class ContextError(KernelError):
    """Operands live in different truncation contexts, or a context is invalid."""


class ArgumentError(KernelError):
    pass


class DegreeError(KernelError):
    """An operation needed a homogeneous input or a specific degree."""


class MembershipError(KernelError):
    """A value falls outside the space an operation requires."""


class UnsupportedError(KernelError):
    pass


class MalformedMCError(KernelError):
    """A supposed Maurer-Cartan element has inconsistent arity or degree data."""


class PreconditionError(KernelError):
    pass


class ContractError(KernelError):
    """A series did not terminate inside the truncation."""


class ParseError(KernelError):
    def __init__(self, message, line=1, col=1):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col
        self.bare = message
