"""Exception types shared across the package."""


class RnnLabError(Exception):
    """Base class for all package errors."""


class NonFiniteState(RnnLabError):
    """A simulated quantity became NaN/Inf. Carries the step index.

    Divergence is a finding, not a nuisance: callers that sweep over
    parameters catch this and record the offending point instead of
    clamping.
    """

    def __init__(self, step, what="state"):
        self.step = int(step)
        self.what = what
        super().__init__(f"non-finite {what} at step {self.step}")


class LengthMismatch(RnnLabError, ValueError):
    """Sequence containers disagree on length or width."""


class EmptyRegion(RnnLabError, ValueError):
    """A sampling region has no volume or no sample budget."""


class TooFewSamples(RnnLabError, ValueError):
    """Not enough steady-state samples to classify an attractor."""


class SingularMatrix(RnnLabError, ValueError):
    """A matrix required to be invertible is singular."""


class DivergentCost(RnnLabError):
    """Cost evaluation diverged at a sampled parameter point."""


class ConfigError(RnnLabError, ValueError):
    """Invalid or unknown configuration keys/values."""
