"""Tests for trial execution, exact enumeration and statistics."""
import math

import pytest

from conftest import statistical_tolerance
from spin_parity.exceptions import BranchDepthExceeded, ScenarioError, ZeroProbabilityOutcome
from spin_parity.montecarlo import (
    Tally,
    build_runner,
    exhaustive_branches,
    proportion_interval,
    run_exact,
    run_trial,
    run_trials,
    summarize,
)
from spin_parity.outcomes import ForcedOutcomes
from spin_parity.protocols.ghz import GrowthPlan, GrowthStrategy, success_probability
from spin_parity.runners import TrialOutcome
from spin_parity.scenario import ScenarioConfig

SAMPLED_TRIALS = 20000
ACCEPTANCE_TRIALS = 10000
LARGE_TRIALS = 100000

SINGLE_DETECTOR_PAIR = "{dots: [A, B], coupled_pairs: [[A, B]], detectors: {1: A}}"
SPARSE_CHAIN = "{dots: [L, M, R], coupled_pairs: [[L, M], [M, R]], detectors: {1: M}}"
SPARSE_FOUR = ("{dots: [Q1, Q2, Q3, Q4], coupled_pairs: [[Q1, Q2], [Q2, Q3], [Q3, Q4]], "
               "detectors: {1: Q2, 2: Q3}}")


def bell(protocol="bell_qnd", **kwargs):
    return ScenarioConfig(protocol=protocol, **kwargs)


class TestProportionInterval:

    def test_contains_estimate(self):
        low, high = proportion_interval(30, 100, 0.99)
        assert low < 0.3 < high

    def test_degenerate_proportion_keeps_width(self):
        low, high = proportion_interval(100, 100)
        assert high == 1.0
        assert low == pytest.approx(1.0 - 1.0 / 200)

    def test_wider_at_higher_confidence(self):
        narrow = proportion_interval(500, 1000, 0.9)
        wide = proportion_interval(500, 1000, 0.999)
        assert wide[0] < narrow[0] and wide[1] > narrow[1]

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            proportion_interval(0, 0)
        with pytest.raises(ValueError):
            proportion_interval(1, 2, 1.0)


class TestTally:

    def test_merge_matches_single_pass(self):
        trials = [TrialOutcome("success", True, 1), TrialOutcome("failure", False, 2, "cascade_exhausted"),
                  TrialOutcome("success", True, 1, fidelity=1.0)]
        whole = Tally()
        for trial in trials:
            whole.add(trial)
        first, second = Tally(), Tally()
        first.add(trials[0])
        second.add(trials[1])
        second.add(trials[2])
        assert first.merge(second) == whole
        assert second.merge(first).counts == whole.counts

    def test_summary(self):
        tally = Tally()
        for success in (True, True, False, True):
            tally.add(TrialOutcome("success" if success else "failure", success, 2))
        stats = summarize(tally)
        assert stats.frequencies == {"failure": 0.25, "success": 0.75}
        assert stats.success_rate == 0.75
        assert stats.mean_parity_checks == 2.0
        assert stats.mean_fidelity is None


class TestRunTrials:

    def test_bell_state_always_identified(self):
        stats = run_trials(bell(input="phi_plus"), 500, seed=3)
        assert stats.counts == {"PhiPlus": 500}
        assert stats.success_rate == 1.0
        assert stats.anticorrelation_violations == 0
        assert stats.parity_snapshots == 1000
        assert stats.min_fidelity == pytest.approx(1.0)

    def test_same_seed_same_statistics(self):
        scenario = ScenarioConfig(protocol="ghz3", m=3)
        assert run_trials(scenario, 300, seed=11) == run_trials(scenario, 300, seed=11)

    def test_different_seeds_differ(self):
        scenario = bell("bell_gen", input="up_up")
        first = [run_trial(scenario, index, seed=1).branch_trace for index in range(40)]
        second = [run_trial(scenario, index, seed=2).branch_trace for index in range(40)]
        assert first != second

    def test_worker_count_does_not_change_result(self):
        scenario = ScenarioConfig(protocol="ghz_n", n=4, strategy="pair_merge")
        assert run_trials(scenario, 200, seed=5, workers=2) == run_trials(scenario, 200, seed=5)

    def test_trial_count_must_be_positive(self):
        with pytest.raises(ScenarioError):
            run_trials(bell(input="phi_plus"), 0, seed=0)

    def test_forcing_impossible_parity(self):
        scenario = bell(input="phi_plus", force_parity=("antiparallel",))
        with pytest.raises(ZeroProbabilityOutcome):
            run_trials(scenario, 10, seed=0)

    def test_forced_swaps(self):
        stats = run_trials(bell(input="psi_minus", force_swap="on"), 50, seed=0)
        assert stats.counts == {"PsiMinus": 50}
        assert stats.success_rate == 1.0


class TestReplay:

    def test_branch_trace_reproduces_trial(self):
        scenario = ScenarioConfig(protocol="ghz3", m=3)
        runner = build_runner(scenario)
        for index in range(20):
            trial = run_trial(scenario, index, seed=99)
            replay = runner.run_trial(ForcedOutcomes(trial.branch_trace))
            assert replay.outcome == trial.outcome.outcome
            assert replay.parity_checks == trial.outcome.parity_checks
            assert replay.record.final_state.allclose(trial.outcome.record.final_state)

    def test_trial_depends_only_on_seed_and_index(self):
        scenario = bell("bell_gen", input="up_up")
        assert run_trial(scenario, 7, seed=4).branch_trace == run_trial(scenario, 7, seed=4).branch_trace


class TestExhaustive:

    def test_singlet_has_four_equal_paths(self):
        paths = exhaustive_branches(bell(input="psi_minus", trials=0))
        assert len(paths) == 4
        assert all(path.probability == pytest.approx(0.25) for path in paths)
        assert {path.trace for path in paths} == {(0, 0), (0, 1), (1, 0), (1, 1)}

    def test_symmetric_pair_is_a_single_path(self):
        paths = exhaustive_branches(bell(input="phi_plus", trials=0))
        assert len(paths) == 1
        assert paths[0].probability == 1.0

    def test_without_folding_swaps_branch(self):
        paths = exhaustive_branches(bell(input="phi_plus", trials=0), fold_interchangeable=False)
        assert len(paths) == 4
        assert run_exact(bell(input="phi_plus", trials=0), fold_interchangeable=False).probabilities == {
            "PhiPlus": pytest.approx(1.0)}

    @pytest.mark.parametrize("label", ["phi_plus", "phi_minus", "psi_plus", "psi_minus"])
    def test_bell_inputs_restored(self, label):
        stats = run_exact(bell(input=label, trials=0))
        assert stats.success_probability == pytest.approx(1.0)
        assert stats.anticorrelation_violations == 0
        assert stats.expected_parity_checks == pytest.approx(2.0)

    def test_up_up_generation(self):
        stats = run_exact(bell("bell_gen", input="up_up", trials=0))
        assert stats.probabilities == {"PhiMinus": pytest.approx(0.5), "PhiPlus": pytest.approx(0.5)}
        assert stats.min_fidelity == pytest.approx(1.0)

    def test_generation_follows_born_rule(self):
        amplitudes = (math.sqrt(0.4), math.sqrt(0.3), math.sqrt(0.2), math.sqrt(0.1))
        stats = run_exact(bell("bell_gen", amplitudes=amplitudes, trials=0))
        assert stats.probabilities["PhiPlus"] == pytest.approx(0.4)
        assert stats.probabilities["PhiMinus"] == pytest.approx(0.3)
        assert stats.probabilities["PsiPlus"] == pytest.approx(0.2)
        assert stats.probabilities["PsiMinus"] == pytest.approx(0.1)

    def test_non_bell_qnd_input_is_disturbed(self):
        amplitudes = (math.sqrt(0.5), 0, 0, math.sqrt(0.5))
        stats = run_exact(bell(amplitudes=amplitudes, trials=0))
        assert stats.success_probability == pytest.approx(0.0)
        assert stats.failures == {"state_disturbed": pytest.approx(1.0)}

    @pytest.mark.parametrize("m", [1, 2, 3, 4])
    def test_ghz3_cascade(self, m):
        stats = run_exact(ScenarioConfig(protocol="ghz3", m=m, trials=0))
        assert stats.success_probability == pytest.approx(1.0 - 0.5 ** m, abs=1e-12)
        assert stats.anticorrelation_violations == 0
        assert stats.min_fidelity == pytest.approx(1.0)

    def test_ghz3_each_round_succeeds_half_the_time(self):
        paths = exhaustive_branches(ScenarioConfig(protocol="ghz3", m=4, trials=0))
        for rounds in range(1, 5):
            reached = math.fsum(path.probability for path in paths
                                if path.outcome.record.rounds_used >= rounds)
            succeeded = math.fsum(path.probability for path in paths
                                  if path.outcome.success and path.outcome.record.rounds_used == rounds)
            assert succeeded / reached == pytest.approx(0.5)

    def test_ghz3_expected_checks(self):
        stats = run_exact(ScenarioConfig(protocol="ghz3", m=2, trials=0))
        assert stats.expected_parity_checks == pytest.approx(1.5)

    @pytest.mark.parametrize("n", [3, 4, 5, 6, 8])
    def test_pair_merge(self, n):
        stats = run_exact(ScenarioConfig(protocol="ghz_n", n=n, strategy="pair_merge", trials=0))
        expected = success_probability(GrowthPlan(GrowthStrategy.PAIR_MERGE, n))
        assert stats.success_probability == pytest.approx(expected, abs=1e-12)
        assert stats.min_fidelity == pytest.approx(1.0)

    def test_pair_merge_eight(self):
        stats = run_exact(ScenarioConfig(protocol="ghz_n", n=8, strategy="pair_merge", trials=0))
        assert stats.success_probability == pytest.approx(0.125, abs=1e-12)

    @pytest.mark.parametrize("n", [3, 4, 5])
    def test_sequential(self, n):
        stats = run_exact(ScenarioConfig(protocol="ghz_n", n=n, strategy="sequential", trials=0))
        assert stats.success_probability == pytest.approx(0.5 ** (n - 2), abs=1e-12)

    def test_table1_always_matches(self):
        stats = run_exact(ScenarioConfig(protocol="table1", trials=0))
        assert stats.probabilities == {"match": pytest.approx(1.0)}
        assert stats.anticorrelation_violations == 0

    def test_single_detector_bell_measurement(self):
        stats = run_exact(bell(input="psi_minus", trials=0, layout=SINGLE_DETECTOR_PAIR))
        assert stats.probabilities == {"PsiMinus": pytest.approx(1.0)}
        assert stats.success_probability == pytest.approx(1.0)
        assert stats.anticorrelation_violations == 0

    def test_single_detector_table1(self):
        stats = run_exact(ScenarioConfig(protocol="table1", trials=0, layout=SINGLE_DETECTOR_PAIR))
        assert stats.probabilities == {"match": pytest.approx(1.0)}

    def test_ghz3_on_sparse_chain(self):
        stats = run_exact(ScenarioConfig(protocol="ghz3", m=2, trials=0, layout=SPARSE_CHAIN))
        assert stats.success_probability == pytest.approx(0.75, abs=1e-12)
        assert stats.min_fidelity == pytest.approx(1.0)

    def test_pair_merge_on_sparse_chain(self):
        scenario = ScenarioConfig(protocol="ghz_n", n=4, strategy="pair_merge", trials=0, layout=SPARSE_FOUR)
        assert run_exact(scenario).success_probability == pytest.approx(0.5, abs=1e-12)

    def test_every_path_bit_is_consumed(self):
        scenario = ScenarioConfig(protocol="ghz3", m=3, trials=0)
        runner = build_runner(scenario)
        for path in exhaustive_branches(scenario):
            source = ForcedOutcomes(path.trace, fold_interchangeable=True)
            runner.run_trial(source)
            assert source.exhausted

    def test_depth_limit(self):
        with pytest.raises(BranchDepthExceeded):
            exhaustive_branches(ScenarioConfig(protocol="ghz3", m=4, trials=0), max_depth=2)


class TestSampledAgainstExact:

    @pytest.mark.parametrize("m", [1, 2, 3])
    def test_ghz3_success_rate(self, m):
        expected = 1.0 - 0.5 ** m
        stats = run_trials(ScenarioConfig(protocol="ghz3", m=m), SAMPLED_TRIALS, seed=2024)
        assert abs(stats.success_rate - expected) <= statistical_tolerance(expected, SAMPLED_TRIALS)
        assert stats.anticorrelation_violations == 0

    def test_up_up_generation(self):
        stats = run_trials(bell("bell_gen", input="up_up"), SAMPLED_TRIALS, seed=8)
        assert set(stats.counts) == {"PhiPlus", "PhiMinus"}
        assert abs(stats.frequencies["PhiPlus"] - 0.5) <= statistical_tolerance(0.5, SAMPLED_TRIALS)

    def test_pair_merge_four(self):
        stats = run_trials(ScenarioConfig(protocol="ghz_n", n=4, strategy="pair_merge"), SAMPLED_TRIALS, seed=17)
        assert abs(stats.success_rate - 0.5) <= statistical_tolerance(0.5, SAMPLED_TRIALS)
        assert stats.failures.keys() == {"merge_antiparallel"}

    @pytest.mark.slow
    def test_born_frequencies(self):
        trials = 100000
        amplitudes = (math.sqrt(0.4), math.sqrt(0.3), math.sqrt(0.2), math.sqrt(0.1))
        stats = run_trials(bell("bell_gen", amplitudes=amplitudes), trials, seed=31)
        for outcome, expected in (("PhiPlus", 0.4), ("PhiMinus", 0.3), ("PsiPlus", 0.2), ("PsiMinus", 0.1)):
            assert abs(stats.frequencies[outcome] - expected) <= statistical_tolerance(expected, trials)

    @pytest.mark.slow
    @pytest.mark.parametrize("m", [1, 2, 3, 4])
    def test_ghz3_large_sample(self, m):
        expected = 1.0 - 0.5 ** m
        stats = run_trials(ScenarioConfig(protocol="ghz3", m=m), LARGE_TRIALS, seed=77)
        assert abs(stats.success_rate - expected) <= statistical_tolerance(expected, LARGE_TRIALS)
        assert stats.anticorrelation_violations == 0

    @pytest.mark.slow
    @pytest.mark.parametrize("label,expected", [
        ("phi_plus", "PhiPlus"), ("phi_minus", "PhiMinus"), ("psi_plus", "PsiPlus"), ("psi_minus", "PsiMinus"),
    ])
    def test_bell_inputs_identified_and_restored(self, label, expected):
        stats = run_trials(bell(input=label), ACCEPTANCE_TRIALS, seed=41)
        assert stats.counts == {expected: ACCEPTANCE_TRIALS}
        assert stats.success_rate == 1.0
        assert stats.min_fidelity >= 1.0 - 1e-10
        assert stats.anticorrelation_violations == 0
        assert stats.parity_snapshots == 2 * ACCEPTANCE_TRIALS
