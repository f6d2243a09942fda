"""Result documents: everything one command produced, in a stable order."""
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

from spin_parity import __version__
from spin_parity.montecarlo import ExactStats, RunStats
from spin_parity.protocols.bell import TABLE1_COLUMNS
from spin_parity.scenario import ScenarioConfig, render_scenario, scenario_to_dict
from spin_parity.state_engine import BellLabel

SAMPLED = "sampled"
EXACT = "exact"


@dataclass(frozen=True)
class ResultDocument:
    """Self-contained result; re-running ``scenario`` reproduces the statistics.

    Exactly one of ``stats`` (sampled mode) and ``exact`` (exact mode) is set.
    ``detector_table`` is present for the table1 protocol.
    """

    scenario: ScenarioConfig
    stats: Optional[RunStats] = None
    exact: Optional[ExactStats] = None
    detector_table: Optional[Dict[BellLabel, Tuple[str, str]]] = None
    version: str = __version__

    def __post_init__(self):
        if (self.stats is None) == (self.exact is None):
            raise ValueError("ResultDocument needs exactly one of stats or exact")

    @property
    def mode(self) -> str:
        return EXACT if self.exact is not None else SAMPLED

    @property
    def seed(self) -> int:
        return self.scenario.seed

    @property
    def scenario_text(self) -> str:
        return render_scenario(self.scenario)

    def outcome_rows(self) -> List[Dict[str, Any]]:
        """Per-outcome table, sorted by outcome name."""
        if self.exact is not None:
            return [{"outcome": outcome, "probability": probability}
                    for outcome, probability in self.exact.probabilities.items()]
        return [
            {
                "outcome": outcome,
                "count": count,
                "frequency": self.stats.frequencies[outcome],
                "ci_low": self.stats.intervals[outcome][0],
                "ci_high": self.stats.intervals[outcome][1],
            }
            for outcome, count in self.stats.counts.items()
        ]

    def table_rows(self) -> List[Dict[str, str]]:
        """Detector table as two rows, D(t) and D(2t), keyed by Bell symbol."""
        if self.detector_table is None:
            return []
        rows = []
        for step, name in enumerate(("D(t)", "D(2t)")):
            row = {"readout": name}
            for label in TABLE1_COLUMNS:
                row[label.symbol] = self.detector_table[label][step]
            rows.append(row)
        return rows

    def summary(self) -> Dict[str, Any]:
        """Headline numbers of the run."""
        if self.exact is not None:
            return {
                "paths": self.exact.path_count,
                "success_probability": self.exact.success_probability,
                "expected_parity_checks": self.exact.expected_parity_checks,
                "failures": dict(self.exact.failures),
                "anticorrelation_violations": self.exact.anticorrelation_violations,
                "min_fidelity": self.exact.min_fidelity,
            }
        stats = self.stats
        return {
            "trials": stats.n_trials,
            "confidence": stats.confidence,
            "success_rate": stats.success_rate,
            "success_interval": list(stats.success_interval) if stats.success_interval else None,
            "mean_parity_checks": stats.mean_parity_checks,
            "failures": dict(stats.failures),
            "parity_snapshots": stats.parity_snapshots,
            "anticorrelation_violations": stats.anticorrelation_violations,
            "mean_fidelity": stats.mean_fidelity,
            "min_fidelity": stats.min_fidelity,
        }

    def to_dict(self) -> Dict[str, Any]:
        result = {
            "version": self.version,
            "mode": self.mode,
            "seed": self.seed,
            "scenario": scenario_to_dict(self.scenario),
            "summary": self.summary(),
            "outcomes": self.outcome_rows(),
        }
        if self.detector_table is not None:
            result["detector_table"] = {label.value: list(self.detector_table[label]) for label in TABLE1_COLUMNS}
        return result
