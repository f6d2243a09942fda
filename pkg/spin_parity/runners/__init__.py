"""Base runner interface."""
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Optional, Tuple

from spin_parity.device_model import DetectorSnapshot
from spin_parity.outcomes import OutcomeSource
from spin_parity.scenario import ScenarioConfig


@dataclass(frozen=True)
class TrialOutcome:
    """Summary of one protocol run, as the statistics layer sees it.

    Args:
        outcome: category counted in the outcome table (a Bell label, "success", ...)
        success: None for protocols without a success notion
        parity_checks: parity checks charged to the run
        failure_category: why an unsuccessful run failed
        snapshots: every detector snapshot the run produced
        fidelity: quality figure of the final state, if the protocol defines one
        record: the protocol's own record
    """

    outcome: str
    success: Optional[bool] = None
    parity_checks: int = 0
    failure_category: Optional[str] = None
    snapshots: Tuple[DetectorSnapshot, ...] = ()
    fidelity: Optional[float] = None
    record: Any = None


class BaseRunner(ABC):
    """Base class for all scenario runners."""

    def __init__(self, scenario: ScenarioConfig):
        self.scenario = scenario

    @abstractmethod
    def run_trial(self, outcome_source: OutcomeSource) -> TrialOutcome:
        """Run the protocol once.

        Args:
            outcome_source: supplies every binary branch of the run

        Returns:
            Trial summary
        """
        pass

    @abstractmethod
    def get_name(self) -> str:
        """Get runner name.

        Returns:
            Name of the protocol the runner drives
        """
        pass
