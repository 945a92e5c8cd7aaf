"""Exception types shared across the package."""


class BirdCircuitError(Exception):
    """Base class for all package errors."""


class ParseError(BirdCircuitError):
    """Malformed input text; carries a 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class FormulaError(BirdCircuitError):
    """Structurally invalid formula or assignment."""


class CircuitError(BirdCircuitError):
    """Invalid circuit wiring or a propagation fault (loop cap, bad port)."""


class GadgetError(BirdCircuitError):
    """Invalid gadget parameters or a gadget too large to enumerate."""


class EngineError(BirdCircuitError):
    """Invalid shot, exhausted birds, or a strategy referencing unknown targets."""


class StrategyError(EngineError):
    """A scripted policy cannot produce a shot for the reached state."""


class CapExceeded(BirdCircuitError):
    """Search state cap hit; distinct from an unsolvable verdict."""
