"""Exceptions raised by liquidgames."""


class LiquidGamesError(Exception):
    """Base class for every error raised on purpose by this package."""


class InvalidGameError(LiquidGamesError, ValueError):
    """A game, network, type model or profile violates its invariants."""


class UnsupportedTypeModelError(LiquidGamesError, ValueError):
    """The operation is only defined for another kind of type model."""


class InstanceTooLargeError(LiquidGamesError, ValueError):
    """The profile space is too large to scan exhaustively."""


class NoEquilibriumError(LiquidGamesError):
    """No pure Nash equilibrium exists for the game at hand."""


class GenerationError(LiquidGamesError, RuntimeError):
    """A random topology could not be generated within the retry budget."""


class ConfigError(LiquidGamesError, ValueError):
    """An experiment configuration or game file is malformed."""
