"""Exception hierarchy shared across the package.

Every error raised by the library derives from InteroceptError so callers
(CLI, service) can catch one base class at the boundary.
"""


class InteroceptError(Exception):
    """Base class for all library errors."""


# -- grid / hypergraph -------------------------------------------------------

class OutOfBounds(InteroceptError):
    def __init__(self, coord):
        super().__init__(f"cell {coord} is outside the grid")
        self.coord = coord


class CellIsObstacle(InteroceptError):
    def __init__(self, coord):
        super().__init__(f"cell {coord} is an obstacle")
        self.coord = coord


class InvalidMultiplier(InteroceptError):
    def __init__(self, value):
        super().__init__(f"terrain multiplier {value} < 1 would break heuristic admissibility")
        self.value = value


class UnknownVertex(InteroceptError):
    pass


class EmptyMembers(InteroceptError):
    pass


class NotAPrecondition(InteroceptError):
    pass


# -- planner -----------------------------------------------------------------

class NoPath(InteroceptError):
    """Goal unreachable under the current grid and task state."""


class InvalidEndpoint(InteroceptError):
    pass


class BrokenPath(InteroceptError):
    pass


# -- shared control ----------------------------------------------------------

class TickMismatch(InteroceptError):
    pass


# -- tracking ----------------------------------------------------------------

class InvalidRange(InteroceptError):
    pass


class EmptyPath(InteroceptError):
    pass


class DuplicateId(InteroceptError):
    pass


# -- semantics ---------------------------------------------------------------

class EmptyText(InteroceptError):
    pass


class MissingAnchor(InteroceptError):
    pass


# -- velocity replay ---------------------------------------------------------

class ProfileTooShort(InteroceptError):
    pass


class TooFewWindows(InteroceptError):
    pass


class DimensionMismatch(InteroceptError):
    pass


class NonFiniteInput(InteroceptError):
    pass


class EmptyTrainingSet(InteroceptError):
    pass


class DivergedLoss(InteroceptError):
    pass


class Misaligned(InteroceptError):
    pass


class UnknownContext(InteroceptError):
    pass


class DegenerateData(InteroceptError):
    pass


# -- simulation --------------------------------------------------------------

class InvalidPhase(InteroceptError):
    pass


class RobotOffPath(InteroceptError):
    pass


class EmptyBins(InteroceptError):
    pass


class InconsistentIds(InteroceptError):
    pass


class InvalidScenario(InteroceptError):
    pass


# -- service -----------------------------------------------------------------

class UnknownRobot(InteroceptError):
    pass


class MalformedCommand(InteroceptError):
    pass


class NoData(InteroceptError):
    pass


class BindFailure(InteroceptError):
    pass
