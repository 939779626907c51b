"""Exception types raised across the engine.

Every failure mode the pipeline can signal is collected here so callers
(and the CLI exit-code mapping) have a single hierarchy to catch.
"""


class EngineError(Exception):
    """Base class for all engine errors."""


class ConfigError(EngineError):
    """Config file is malformed, has unknown keys, or invalid values."""


class EmptyDocument(EngineError):
    """Document text is empty or all whitespace."""


class EmptyCorpus(EngineError):
    """An operation requiring at least one chunk received none."""


class ProviderUnavailable(EngineError):
    """Remote provider failed after retries, or no provider is configured."""


class DimensionMismatch(EngineError):
    """Vector dimensionality or arity does not match the contract."""


class LengthMismatch(EngineError):
    """Aligned lists (chunks vs vectors) differ in length."""


class ZeroVector(EngineError):
    """Text produced no signal to embed (no tokens, or exact cancellation)."""


class FormatVersionMismatch(EngineError):
    """Index file uses an unsupported on-disk format version."""


class CorruptFile(EngineError):
    """Index file failed magic-byte or checksum validation."""


class BudgetTooSmall(EngineError):
    """Token budget admits zero chunks (floor(T/s) = 0)."""


class DegenerateInput(EngineError):
    """k-means asked for more clusters than there are distinct points."""


class PerplexityInfeasible(EngineError):
    """Bandwidth search cannot bracket the target perplexity."""


class MissingCluster(EngineError):
    """A cluster id has no keyword set to distribute."""


class NoContext(EngineError):
    """Not even the best-ranked chunk fits the context budget."""
