"""Exception types shared across the package."""


class InfeasibleConfigError(ValueError):
    """Scene configuration could not be realized within the sampling retry budget."""


class SolverError(RuntimeError):
    """A numerical kernel failed; carries whatever diagnostics were available."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class UnderDetectionError(RuntimeError):
    """Fewer candidate angles were located than active users expected."""


class ClusteringDegeneracyError(RuntimeError):
    """A cluster came out empty, so per-user steering matrices cannot be formed."""


class DegenerateInputError(ValueError):
    """A least-squares step received an all-zero system."""
