"""Exception types shared across the package."""


class WalkgapError(Exception):
    """Base class for all errors raised by this package."""


class InvalidFactorError(WalkgapError):
    """A factor index or factor order is out of range for the presentation."""


class InvalidWordError(WalkgapError):
    """A word string or syllable sequence cannot be interpreted."""


class InvalidMeasureError(WalkgapError):
    """Weights are not strictly positive rationals summing to one."""


class SupportCapError(WalkgapError):
    """A convolution support grew past the configured atom cap."""


class CostCapError(WalkgapError):
    """A dynamic program grew past the configured state cap."""


class NonSymmetricError(WalkgapError):
    """An operation requiring a symmetric operator got a non-symmetric one."""


class InfiniteIndexError(WalkgapError):
    """The subgroup automaton is incomplete, so the coset space is infinite."""


class DegenerateSplitError(WalkgapError):
    """A membership split has kappa = 0, leaving the inside part undefined."""


class NoWitnessFoundError(WalkgapError):
    """No even walk length up to the cap beat the spectral threshold.

    Inconclusive rather than negative: the relative spectral radius is a
    limit and only finite prefixes were examined.
    """

    def __init__(self, message, n_max=None, best_ratio=None):
        super().__init__(message)
        self.n_max = n_max
        self.best_ratio = best_ratio


class InvalidChainError(WalkgapError):
    """An action chain fails surjectivity, fiber-size, or equivariance checks."""


class InvalidActionError(WalkgapError):
    """A permutation table is not a valid action of the presentation."""


class ConfigError(WalkgapError):
    """A problem configuration file fails schema validation."""
