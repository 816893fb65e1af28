"""Exception taxonomy shared across the package.

Three broad families map onto the CLI exit codes: configuration problems
(exit 2), data/corpus problems (exit 3) and numerical failures (exit 4).
Library code raises the most specific subclass it can.
"""


class StylesymError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(StylesymError):
    """Invalid or inconsistent run configuration."""


class DataError(StylesymError):
    """Corpus, file-format or checkpoint problem."""


class ImageFormatError(DataError):
    """Image file could not be decoded (bad magic, depth, truncation...)."""


class ManifestError(DataError):
    """Corpus manifest violates its contract."""


class CheckpointError(DataError):
    """Model checkpoint missing, truncated or inconsistent."""


class ContainerError(DataError):
    """Weights container missing, malformed or failing its checksums."""


class NumericError(StylesymError):
    """Numerical contract violation (non-finite values, impossible shapes...)."""


class RankDeficiencyError(NumericError):
    """Input columns were supposed to be linearly independent but are not."""
