"""
Error types raised by the synthesizer.
"""

from typing import Optional


class SatOracleError(Exception):
    """Base class for all synthesizer errors"""


class CnfFormatError(SatOracleError, ValueError):
    """Malformed DIMACS input or an invalid formula"""


class CircuitError(SatOracleError, ValueError):
    """Gate or circuit violates the IR contract"""


class GandError(SatOracleError):
    """Invalid GAND plan or misbehaving sub-oracle"""


class LoweringError(SatOracleError):
    """A gate cannot be lowered with the resources available"""


class SimulationError(SatOracleError):
    """The simulator met a gate sequence it cannot evaluate"""


class SweepSpecError(SatOracleError, ValueError):
    """Invalid benchmark sweep description"""


class InfeasibleConfigError(SatOracleError):
    """The ancilla budget cannot support the requested synthesis"""

    def __init__(self, message: str, minimal_ancillas: Optional[int] = None):
        self.minimal_ancillas = minimal_ancillas
        if minimal_ancillas is not None:
            message = f"{message} (requires ancillas >= {minimal_ancillas})"
        super().__init__(message)
