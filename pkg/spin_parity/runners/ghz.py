"""Runners for GHZ preparation."""
from typing import Optional

from spin_parity.device_model import read_log
from spin_parity.outcomes import OutcomeSource
from spin_parity.protocols.ghz import GhzRunRecord, ghz3_device, ghz3_prepare, ghz_normal_form, ghz_prepare
from spin_parity.runners import BaseRunner, TrialOutcome
from spin_parity.scenario import ScenarioConfig
from spin_parity.state_engine import fidelity_up_to_phase, ghz_state


def _ghz_fidelity(record: GhzRunRecord) -> Optional[float]:
    """Fidelity with the canonical GHZ state after local corrections; successful runs only."""
    if not record.success:
        return None
    if not record.final.is_ghz:
        return 0.0
    state = ghz_normal_form(record.final_state)
    return fidelity_up_to_phase(state, ghz_state(state.num_qubits))


def _summarize(record: GhzRunRecord) -> TrialOutcome:
    return TrialOutcome(
        outcome="success" if record.success else "failure",
        success=record.success,
        parity_checks=record.parity_checks,
        failure_category=record.failure,
        snapshots=tuple(read_log(record.device)) if record.device is not None else (),
        fidelity=_ghz_fidelity(record),
        record=record,
    )


class Ghz3Runner(BaseRunner):
    """Three-electron cascade with up to ``m`` comparisons."""

    def __init__(self, scenario: ScenarioConfig):
        super().__init__(scenario)
        self.device = ghz3_device(layout=scenario.device_layout())

    def get_name(self) -> str:
        return "ghz3"

    def run_trial(self, outcome_source: OutcomeSource) -> TrialOutcome:
        return _summarize(ghz3_prepare(self.scenario.m, self.device, outcome_source))


class GhzGrowthRunner(BaseRunner):
    """n-electron growth, sequential or by pair merging."""

    def __init__(self, scenario: ScenarioConfig):
        super().__init__(scenario)
        self.plan = scenario.growth_plan()
        self.layout = scenario.device_layout()

    def get_name(self) -> str:
        return "ghz_n"

    def run_trial(self, outcome_source: OutcomeSource) -> TrialOutcome:
        record = ghz_prepare(self.plan, outcome_source, salvage=self.scenario.salvage, layout=self.layout)
        return _summarize(record)
