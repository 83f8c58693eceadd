"""Exception hierarchy shared by every module of the package."""


class ChainChaosError(Exception):
    """Base class for all library errors."""


class ConfigError(ChainChaosError, ValueError):
    """Bad user-facing configuration (CLI flags, config files)."""


class EmptySuccessor(ChainChaosError):
    pass


class MetricViolation(ChainChaosError):
    def __init__(self, message, triple=None):
        super().__init__(message)
        self.triple = triple


class DegenerateGrid(ChainChaosError, ValueError):
    pass


class EmptyShift(ChainChaosError):
    pass


class ExplodedStateSpace(ChainChaosError):
    pass


class NotStronglyConnected(ChainChaosError):
    pass


class NotAComponent(ChainChaosError):
    pass


class UnknownExample(ChainChaosError, KeyError):
    pass


class UnknownMap(ChainChaosError, KeyError):
    pass


class ParamFlavorMismatch(ChainChaosError, ValueError):
    pass


class BadThresholds(ChainChaosError, ValueError):
    pass


class BadDelta(ChainChaosError, ValueError):
    pass


class NoAdmissibleNeighbor(ChainChaosError):
    pass
