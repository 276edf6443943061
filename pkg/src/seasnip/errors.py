"""Exception types shared across the pipeline."""


class SimulationDivergence(RuntimeError):
    """Motion integration produced NaN/inf or left the validity envelope.

    ``first_bad_index`` is the sample index of the first invalid state.
    """

    def __init__(self, first_bad_index: int, message: str | None = None):
        self.first_bad_index = int(first_bad_index)
        super().__init__(
            message or f"simulation diverged at sample index {first_bad_index}"
        )


class TrainingDivergence(RuntimeError):
    """Training loss became NaN/inf. ``epoch`` is the offending epoch."""

    def __init__(self, epoch: int, message: str | None = None):
        self.epoch = int(epoch)
        super().__init__(message or f"training loss diverged at epoch {epoch}")


class UndefinedCorrelationError(ValueError):
    """Correlation requested for a sample with zero variance."""


class DegenerateSampleError(ValueError):
    """All samples identical; a density estimate would be a point mass."""


class ConfigError(ValueError):
    """Experiment configuration file is malformed or inconsistent."""


class ManifestError(RuntimeError):
    """Run manifest is missing, stale, or records a mismatching hash."""
