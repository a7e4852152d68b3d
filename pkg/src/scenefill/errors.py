"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, DataError -> 3,
ProviderError -> 4.
"""


class SceneFillError(Exception):
    pass


class ConfigError(SceneFillError):
    """Invalid or inconsistent configuration."""


class DataError(SceneFillError):
    """Broken input data, datasets, or checkpoints."""


class RegionTooLarge(DataError):
    """The missing region cannot fit inside a 10-50% area crop window."""


class CheckpointError(DataError):
    """Checkpoint missing, tampered, or incompatible."""


class ProviderError(SceneFillError):
    """A pluggable provider (detector, embedder, inpainting backend) failed."""
