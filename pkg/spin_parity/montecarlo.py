"""Trial execution and statistics.

Every trial draws from its own generator, derived from the master seed and
the trial index alone, so results do not depend on execution order or on
how trials are split across worker processes. Partial results are ``Tally``
objects whose merge is associative and commutative.
"""
import logging
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.stats import norm

from spin_parity.exceptions import BranchDepthExceeded, BranchPending, ProtocolError, ScenarioError
from spin_parity.outcomes import ForcedOutcomes, RandomOutcomes
from spin_parity.runners import BaseRunner, TrialOutcome
from spin_parity.runners.bell import BellGenerateRunner, BellQndRunner, Table1Runner
from spin_parity.runners.ghz import Ghz3Runner, GhzGrowthRunner
from spin_parity.scenario import ScenarioConfig

logger = logging.getLogger(__name__)

DEFAULT_CONFIDENCE = 0.99
DEFAULT_MAX_DEPTH = 24
PROBABILITY_CONSERVATION = 1e-9

_RUNNERS = {
    "bell_qnd": BellQndRunner,
    "bell_gen": BellGenerateRunner,
    "table1": Table1Runner,
    "ghz3": Ghz3Runner,
    "ghz_n": GhzGrowthRunner,
}


def build_runner(scenario: ScenarioConfig) -> BaseRunner:
    """Instantiate the runner for ``scenario.protocol``."""
    try:
        runner_class = _RUNNERS[scenario.protocol]
    except KeyError:
        raise ScenarioError(f"No runner for protocol '{scenario.protocol}'", key="protocol")
    return runner_class(scenario)


def trial_generator(seed: int, trial_index: int) -> np.random.Generator:
    """Independent stream for one trial; depends on nothing but (seed, trial_index)."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial_index,)))


@dataclass(frozen=True)
class TrialRecord:
    """One sampled trial and the branch bits that reproduce it."""

    trial_index: int
    outcome: TrialOutcome
    branch_trace: Tuple[int, ...]


@dataclass
class Tally:
    """Mergeable partial counts of a batch of trials."""

    n_trials: int = 0
    counts: Counter = field(default_factory=Counter)
    parity_checks: int = 0
    graded: int = 0
    successes: int = 0
    failures: Counter = field(default_factory=Counter)
    parity_snapshots: int = 0
    anticorrelation_violations: int = 0
    fidelities: List[float] = field(default_factory=list)

    def add(self, trial: TrialOutcome):
        self.n_trials += 1
        self.counts[trial.outcome] += 1
        self.parity_checks += trial.parity_checks
        if trial.success is not None:
            self.graded += 1
            self.successes += int(trial.success)
        if trial.failure_category is not None:
            self.failures[trial.failure_category] += 1
        for snapshot in trial.snapshots:
            self.parity_snapshots += 1
            if snapshot.anticorrelated is False:
                self.anticorrelation_violations += 1
        if trial.fidelity is not None:
            self.fidelities.append(trial.fidelity)

    def merge(self, other: "Tally") -> "Tally":
        return Tally(
            n_trials=self.n_trials + other.n_trials,
            counts=self.counts + other.counts,
            parity_checks=self.parity_checks + other.parity_checks,
            graded=self.graded + other.graded,
            successes=self.successes + other.successes,
            failures=self.failures + other.failures,
            parity_snapshots=self.parity_snapshots + other.parity_snapshots,
            anticorrelation_violations=self.anticorrelation_violations + other.anticorrelation_violations,
            fidelities=self.fidelities + other.fidelities,
        )


@dataclass(frozen=True)
class RunStats:
    n_trials: int
    counts: Dict[str, int]
    frequencies: Dict[str, float]
    intervals: Dict[str, Tuple[float, float]]
    mean_parity_checks: float
    success_rate: Optional[float]
    success_interval: Optional[Tuple[float, float]]
    failures: Dict[str, int]
    anticorrelation_violations: int
    parity_snapshots: int
    mean_fidelity: Optional[float]
    min_fidelity: Optional[float]
    confidence: float = DEFAULT_CONFIDENCE


@dataclass(frozen=True)
class BranchPath:
    """One fully forced path of the exhaustive enumeration."""

    trace: Tuple[int, ...]
    probability: float
    outcome: TrialOutcome


@dataclass(frozen=True)
class ExactStats:
    path_count: int
    probabilities: Dict[str, float]
    success_probability: Optional[float]
    expected_parity_checks: float
    failures: Dict[str, float]
    anticorrelation_violations: int
    min_fidelity: Optional[float]


def proportion_interval(count: int, n: int, confidence: float = DEFAULT_CONFIDENCE) -> Tuple[float, float]:
    """Normal-approximation interval for a proportion with a 1/(2n) continuity floor.

    Args:
        count: successes
        n: trials
        confidence: two-sided level, e.g. 0.99

    Returns:
        (low, high), clipped to [0, 1]
    """
    if n <= 0:
        raise ValueError(f"Interval needs n > 0, got {n}")
    if not 0.0 < confidence < 1.0:
        raise ValueError(f"Confidence must be in (0, 1), got {confidence}")
    q = count / n
    z = float(norm.ppf(1.0 - (1.0 - confidence) / 2.0))
    half_width = z * math.sqrt(q * (1.0 - q) / n) + 1.0 / (2.0 * n)
    return max(0.0, q - half_width), min(1.0, q + half_width)


def run_trial(scenario: ScenarioConfig, trial_index: int, seed: int,
              runner: Optional[BaseRunner] = None) -> TrialRecord:
    """Run (or replay) a single trial of ``scenario``."""
    runner = runner or build_runner(scenario)
    source = RandomOutcomes(trial_generator(seed, trial_index),
                            swap_override=scenario.swap_override,
                            parity_script=scenario.parity_bits)
    outcome = runner.run_trial(source)
    trace = tuple(record.outcome for record in source.trace if record.is_branch)
    return TrialRecord(trial_index, outcome, trace)


def _run_chunk(scenario: ScenarioConfig, start: int, stop: int, seed: int) -> Tally:
    runner = build_runner(scenario)
    tally = Tally()
    for index in range(start, stop):
        tally.add(run_trial(scenario, index, seed, runner).outcome)
    return tally


def _chunks(n_trials: int, workers: int) -> List[Tuple[int, int]]:
    size = math.ceil(n_trials / workers)
    return [(start, min(start + size, n_trials)) for start in range(0, n_trials, size)]


def summarize(tally: Tally, confidence: float = DEFAULT_CONFIDENCE) -> RunStats:
    """Turn raw counts into frequencies and intervals."""
    n = tally.n_trials
    outcomes = sorted(tally.counts)
    success_rate = tally.successes / tally.graded if tally.graded else None
    return RunStats(
        n_trials=n,
        counts={key: tally.counts[key] for key in outcomes},
        frequencies={key: tally.counts[key] / n for key in outcomes},
        intervals={key: proportion_interval(tally.counts[key], n, confidence) for key in outcomes},
        mean_parity_checks=tally.parity_checks / n,
        success_rate=success_rate,
        success_interval=(proportion_interval(tally.successes, tally.graded, confidence)
                          if tally.graded else None),
        failures={key: tally.failures[key] for key in sorted(tally.failures)},
        anticorrelation_violations=tally.anticorrelation_violations,
        parity_snapshots=tally.parity_snapshots,
        mean_fidelity=math.fsum(tally.fidelities) / len(tally.fidelities) if tally.fidelities else None,
        min_fidelity=min(tally.fidelities) if tally.fidelities else None,
        confidence=confidence,
    )


def run_trials(scenario: ScenarioConfig, n_trials: int, seed: int, workers: int = 1,
               confidence: float = DEFAULT_CONFIDENCE) -> RunStats:
    """Run ``n_trials`` independent trials and aggregate them.

    Args:
        scenario: validated scenario
        n_trials: number of trials, must be positive
        seed: master seed (64-bit unsigned)
        workers: processes to spread trial chunks over; the result does not depend on it
        confidence: interval level

    Returns:
        Aggregated statistics
    """
    if n_trials <= 0:
        raise ScenarioError(f"n_trials must be positive, got {n_trials}", key="trials")
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")

    logger.info("Running %d trials of %s (seed %d, %d workers)", n_trials, scenario.protocol, seed, workers)
    if workers == 1 or n_trials == 1:
        tally = _run_chunk(scenario, 0, n_trials, seed)
    else:
        chunks = _chunks(n_trials, workers)
        tally = Tally()
        with ProcessPoolExecutor(max_workers=workers) as executor:
            futures = [executor.submit(_run_chunk, scenario, start, stop, seed) for start, stop in chunks]
            for future in futures:
                tally = tally.merge(future.result())
    logger.info("Finished %d trials", tally.n_trials)
    return summarize(tally, confidence)


def exhaustive_branches(scenario: ScenarioConfig, max_depth: int = DEFAULT_MAX_DEPTH,
                        fold_interchangeable: bool = True) -> List[BranchPath]:
    """Enumerate every branch path of ``scenario`` with its exact probability.

    Paths are explored depth first, outcome 0 before 1. Draws that are
    certain, scripted by the scenario or (with ``fold_interchangeable``)
    physically indistinguishable are not branch points.

    Raises:
        BranchDepthExceeded: a path needs more than ``max_depth`` branch points
        ProtocolError: the path probabilities do not sum to 1
    """
    runner = build_runner(scenario)
    paths: List[BranchPath] = []
    pending: List[Tuple[int, ...]] = [()]
    while pending:
        path = pending.pop()
        source = ForcedOutcomes(path, swap_override=scenario.swap_override,
                                parity_script=scenario.parity_bits,
                                fold_interchangeable=fold_interchangeable)
        try:
            outcome = runner.run_trial(source)
        except BranchPending:
            if len(path) >= max_depth:
                raise BranchDepthExceeded(f"{scenario.protocol} needs more than {max_depth} branch points")
            pending.append(path + (1,))
            pending.append(path + (0,))
            continue
        if not source.exhausted:
            raise ProtocolError(f"{scenario.protocol} left forced path bits {path} unconsumed")
        paths.append(BranchPath(path, source.weight, outcome))

    total = math.fsum(path.probability for path in paths)
    if abs(total - 1.0) > PROBABILITY_CONSERVATION:
        raise ProtocolError(f"Branch probabilities sum to {total!r}, not 1")
    logger.info("Enumerated %d branch paths of %s", len(paths), scenario.protocol)
    return paths


def exact_stats(paths: List[BranchPath]) -> ExactStats:
    """Aggregate exhaustive paths into outcome probabilities."""
    probabilities: Dict[str, List[float]] = {}
    failures: Dict[str, List[float]] = {}
    success: List[float] = []
    graded = False
    violations = 0
    fidelities = []
    for path in paths:
        trial = path.outcome
        probabilities.setdefault(trial.outcome, []).append(path.probability)
        if trial.success is not None:
            graded = True
            if trial.success:
                success.append(path.probability)
        if trial.failure_category is not None:
            failures.setdefault(trial.failure_category, []).append(path.probability)
        violations += sum(1 for snapshot in trial.snapshots if snapshot.anticorrelated is False)
        if trial.fidelity is not None:
            fidelities.append(trial.fidelity)

    return ExactStats(
        path_count=len(paths),
        probabilities={key: math.fsum(probabilities[key]) for key in sorted(probabilities)},
        success_probability=math.fsum(success) if graded else None,
        expected_parity_checks=math.fsum(path.probability * path.outcome.parity_checks for path in paths),
        failures={key: math.fsum(failures[key]) for key in sorted(failures)},
        anticorrelation_violations=violations,
        min_fidelity=min(fidelities) if fidelities else None,
    )


def run_exact(scenario: ScenarioConfig, max_depth: int = DEFAULT_MAX_DEPTH,
              fold_interchangeable: bool = True) -> ExactStats:
    return exact_stats(exhaustive_branches(scenario, max_depth, fold_interchangeable))
