"""Exception hierarchy for spin parity simulations."""
from typing import Optional


class SpinParityError(Exception):
    """Base class for all simulator errors."""


class StateError(SpinParityError, ValueError):
    """Invalid spin state or gate arguments."""


class DeviceError(SpinParityError, ValueError):
    """Occupancy, coupling or addressing violation on the device."""


class ProtocolError(SpinParityError):
    """A protocol was invoked with inputs it cannot handle."""


class ZeroProbabilityOutcome(ProtocolError):
    """A forced outcome has zero Born probability."""

    def __init__(self, kind: str, outcome: int):
        super().__init__(f"Cannot force {kind} outcome {outcome}: probability is zero")
        self.kind = kind
        self.outcome = outcome


class BranchPending(SpinParityError):
    """Raised by a forced-path source that has no scripted bit left for a branch point."""

    def __init__(self, kind: str, p_zero: float):
        super().__init__(f"No forced outcome left for {kind} branch (p0={p_zero:.6g})")
        self.kind = kind
        self.p_zero = p_zero


class BranchDepthExceeded(ProtocolError):
    """Exhaustive enumeration needs more branch points than allowed."""


class ScenarioError(SpinParityError, ValueError):
    """Invalid scenario text; names the offending key and line when known."""

    def __init__(self, message: str, key: Optional[str] = None, line: Optional[int] = None):
        location = []
        if key is not None:
            location.append(f"key '{key}'")
        if line is not None:
            location.append(f"line {line}")
        text = f"{message} ({', '.join(location)})" if location else message
        super().__init__(text)
        self.message = message
        self.key = key
        self.line = line
