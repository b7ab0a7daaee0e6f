class HybridQssError(Exception):
    """Base class for scheme construction and execution failures."""


class InsufficientShares(HybridQssError):
    """A player subset cannot meet some layer's reconstruction requirement."""


class CapacityError(HybridQssError):
    """A dense simulation would exceed the configured size limits."""


class SchemeError(HybridQssError, ValueError):
    """A scheme cannot be built with the requested parameters."""
