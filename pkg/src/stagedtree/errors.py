"""Exception hierarchy shared across the package."""


class StagedTreeError(ValueError):
    """Base class for all validation errors raised by this package."""


# tree construction
class VertexWithOneChild(StagedTreeError):
    pass


class StageOutDegreeMismatch(StagedTreeError):
    pass


class CycleDetected(StagedTreeError):
    pass


class DownwardEdgeInconsistentWithinStage(StagedTreeError):
    pass


# tree operations
class IndexOutOfRange(StagedTreeError):
    pass


class ZeroMass(StagedTreeError):
    pass


class NontrivialStaging(StagedTreeError):
    pass


class NotAStar(StagedTreeError):
    pass


# Bayesian-network bridge
class OrderInconsistentWithDAG(StagedTreeError):
    pass


# data ingestion and fitting
class UnknownCategory(StagedTreeError):
    pass


class RowDoesNotReachLeaf(StagedTreeError):
    pass


class ZeroStageTraffic(StagedTreeError):
    pass
