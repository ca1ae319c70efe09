"""Exception types shared across the package."""


class InvalidParameterError(ValueError):
    """Raised when a law or estimator is built with out-of-domain parameters."""


class PackingOverflowError(OverflowError):
    """A coordinate does not fit the per-coordinate bit budget of the packed key."""


class GridError(ValueError):
    """A time grid is not increasing or does not start at zero."""


class DimensionMismatchError(ValueError):
    """Two lattice objects of different ambient dimension were combined."""


class InsufficientPathError(ValueError):
    """A path-log operation asked for more steps than were recorded."""


class NonTransientLawError(ValueError):
    """Green-function machinery invoked for a law with no transience guarantee."""


class ToleranceUnreachableError(RuntimeError):
    """Quadrature refinement budget exhausted before the requested tolerance."""


class BoxTooSmallError(RuntimeError):
    """Convolution box leaks too much probability mass for the requested accuracy."""


class DisplacementRangeError(KeyError):
    """A Green evaluator cannot certify a value at the requested displacement."""


class SingularSystemError(RuntimeError):
    """Equilibrium system is numerically singular or not positive definite."""


class EquilibriumOutOfRangeError(RuntimeError):
    """An equilibrium weight left [0, 1] by more than the allowed slack."""


class OutOfRegimeError(ValueError):
    """A scaling envelope was evaluated outside its regime of validity."""


class DegenerateSampleError(ValueError):
    """A statistical report received a sample with zero variance."""


class InsufficientReplicasError(ValueError):
    """Too few replicas for the requested test; results would be inconclusive."""


class StopTimeError(ValueError):
    """A stopping rule needs process values beyond the sampled horizon."""


class ConfigError(ValueError):
    """Run configuration failed schema or consistency validation."""


class RegimeViolationError(ConfigError):
    """Experiment parameters violate the hypotheses the experiment relies on."""

    def __init__(self, hypothesis: str, detail: str):
        self.hypothesis = hypothesis
        super().__init__(f"regime violation ({hypothesis}): {detail}")
