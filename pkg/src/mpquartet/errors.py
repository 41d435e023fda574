"""Exception types shared across the package."""


class QuartetError(Exception):
    """Base class for every error raised by mpquartet."""


class InvalidPartition(QuartetError, ValueError):
    """A taxon partition violates disjointness, coverage or the block-size rule."""


class MalformedSystem(QuartetError, ValueError):
    """A quartet system does not have the completeness structure its class requires."""


class Incompatible(QuartetError):
    """Verdict: no phylogenetic tree displays the quartet system.

    ``phase`` names the stage that detected the problem and ``witness`` holds
    whatever evidence that stage could produce (a 4-tuple, a sub-family, ...).
    """

    def __init__(self, message, phase=None, witness=None):
        super().__init__(message)
        self.phase = phase
        self.witness = witness


class NotLaminarizable(QuartetError):
    """Verdict: no choice of representatives makes the cut family laminar."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class DuplicateClass(QuartetError, ValueError):
    """Two members of a cut family fall into the same equivalence class."""


class NotLaminar(QuartetError, ValueError):
    pass


class DuplicateBipartition(QuartetError, ValueError):
    pass


class TrivialSplit(QuartetError, ValueError):
    pass


class InvalidTree(QuartetError, ValueError):
    pass


class NewickError(QuartetError, ValueError):
    pass


class MissingTable(QuartetError, KeyError):
    def __init__(self, i, j=None):
        where = f"block {i}" if j is None else f"blocks {i} and {j}"
        super().__init__(f"no distance table for {where}")
        self.blocks = (i, j)


class DistanceError(QuartetError, ValueError):
    """Asymmetric, negative or non-finite distance data."""


class CapExceeded(QuartetError):
    """An exhaustive routine was asked to run beyond its safety cap."""


class InvalidParams(QuartetError, ValueError):
    pass
