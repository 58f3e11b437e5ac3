"""Exception hierarchy shared by every module."""


class PosmodError(Exception):
    pass


class ParseError(PosmodError):
    def __init__(self, message, pos=None):
        self.pos = pos
        if pos is not None:
            message = f"{message} at line {pos[0]}, column {pos[1]}"
        super().__init__(message)


class SignatureError(PosmodError):
    """Unknown symbol, arity mismatch or two structures over different signatures."""


class StructureError(PosmodError):
    """A structure or construction violates its invariants."""


class NotAModel(PosmodError):
    def __init__(self, verdict):
        self.verdict = verdict
        w = verdict.witness
        detail = w.describe() if hasattr(w, "describe") else verdict.describe()
        super().__init__(f"structure is not a model of the theory: {detail}")


class PreconditionError(PosmodError):
    pass


class InconsistentPins(PosmodError):
    pass


class BudgetExceeded(PosmodError):
    def __init__(self, what, limit, partial=None):
        self.what = what
        self.limit = limit
        self.partial = partial
        super().__init__(f"resource budget exceeded: {what} > {limit}")


class Inconclusive(PosmodError):
    """The universe is too small to answer (e.g. no pc member at this bound)."""
