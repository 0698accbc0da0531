"""Exception types shared across the package."""


class HypecaError(Exception):
    """Base class for every error raised by hypeca."""


class MalformedLabel(HypecaError, ValueError):
    pass


class BoundaryCell(HypecaError):
    """A cell lacks a full neighbourhood inside the ball."""


class MalformedRule(HypecaError, ValueError):
    pass


class DuplicateId(HypecaError, ValueError):
    pass


class MissingRule(HypecaError):
    def __init__(self, cell, current, context, t=None):
        self.cell = cell
        self.current = current
        self.context = context
        self.t = t
        where = f" at t={t}" if t is not None else ""
        super().__init__(f"no rule for {cell}{where}: {current} {context}")


class MissingOrientation(HypecaError):
    pass


class BoundaryActivity(HypecaError):
    """A cell in the two outermost levels would change state."""


class UnresolvedLayout(HypecaError):
    pass


class PathBlocked(HypecaError):
    pass


class InconsistentTrace(HypecaError):
    def __init__(self, cell, t, msg=""):
        self.cell = cell
        self.t = t
        super().__init__(f"inconsistent trace at {cell}, t={t}" + (f": {msg}" if msg else ""))


class StaticConflict(HypecaError):
    def __init__(self, cell, msg=""):
        self.cell = cell
        super().__init__(f"static conflict at {cell}" + (f": {msg}" if msg else ""))


class InfeasibleOrientation(HypecaError):
    def __init__(self, cell, msg=""):
        self.cell = cell
        super().__init__(f"no feasible orientation for {cell}" + (f": {msg}" if msg else ""))


class MissingGolden(HypecaError):
    pass
