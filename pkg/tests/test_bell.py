"""Tests for QND Bell measurement and Bell-state generation."""
import itertools
import math

import pytest

from spin_parity.device_model import chain_layout, fig1_layout, layout_from_mapping, new_device
from spin_parity.exceptions import ProtocolError
from spin_parity.outcomes import ForcedOutcomes, RandomOutcomes
from spin_parity.protocols.bell import (
    TABLE1_COLUMNS,
    TABLE1_SIGNATURES,
    bell_device,
    bell_generate,
    bell_qnd,
    check_bell_layout,
    classify_detectors,
    classify_signature,
    classify_single_detector,
    detector_table,
    rotate_bell,
)
from spin_parity.state_engine import (
    BellLabel,
    ParityOutcome,
    bell_state,
    fidelity_up_to_phase,
    ghz_state,
    make_state,
    state_from_bell_coefficients,
)

PARALLEL = ParityOutcome.PARALLEL
ANTIPARALLEL = ParityOutcome.ANTIPARALLEL


class TestDetectorTable:

    def test_every_swap_branch_matches_reference(self):
        assert detector_table() == TABLE1_SIGNATURES

    def test_reference_values(self):
        assert TABLE1_SIGNATURES[BellLabel.PSI_PLUS] == ("01", "01")
        assert TABLE1_SIGNATURES[BellLabel.PSI_MINUS] == ("01", "10")
        assert TABLE1_SIGNATURES[BellLabel.PHI_PLUS] == ("10", "10")
        assert TABLE1_SIGNATURES[BellLabel.PHI_MINUS] == ("10", "01")

    def test_column_order(self):
        assert [label.symbol for label in TABLE1_COLUMNS] == ["Ψ+", "Ψ−", "Φ+", "Φ−"]


class TestBellQnd:

    @pytest.mark.parametrize("label,swaps", list(itertools.product(BellLabel, itertools.product((0, 1), repeat=2))))
    def test_swap_branches_agree(self, label, swaps):
        state = bell_state(label)
        record = bell_qnd(state, None, ForcedOutcomes(swaps))
        assert record.label is label
        assert record.restored
        assert record.swaps == tuple(bool(bit) for bit in swaps)
        assert record.signature == TABLE1_SIGNATURES[label]
        assert fidelity_up_to_phase(record.final_state, state) == pytest.approx(1.0, abs=1e-10)

    def test_snapshots_are_anticorrelated(self):
        for label in BellLabel:
            record = bell_qnd(bell_state(label), None, ForcedOutcomes((0, 0)))
            assert record.snapshot_t.anticorrelated
            assert record.snapshot_2t.anticorrelated
            assert (record.snapshot_t.step_label, record.snapshot_2t.step_label) == (1, 2)

    def test_outcomes_follow_parity(self):
        record = bell_qnd(bell_state(BellLabel.PSI_MINUS), None, ForcedOutcomes((0, 0)))
        assert record.outcomes == (ANTIPARALLEL, ANTIPARALLEL)

    def test_explicit_device(self):
        device = new_device(fig1_layout(), bell_state(BellLabel.PHI_PLUS), ("A", "B"))
        record = bell_qnd(bell_state(BellLabel.PHI_MINUS), device, ForcedOutcomes((0, 0)))
        assert record.label is BellLabel.PHI_MINUS

    def test_non_bell_input_is_projected(self):
        state = state_from_bell_coefficients(1, 0, 0, 1)
        record = bell_qnd(state, None, ForcedOutcomes((1, 0, 0)))
        assert record.label is BellLabel.PSI_MINUS
        assert not record.restored
        assert fidelity_up_to_phase(record.final_state, bell_state(BellLabel.PSI_MINUS)) == pytest.approx(1.0)

    def test_rejects_wrong_size(self):
        with pytest.raises(ProtocolError):
            bell_qnd(ghz_state(3), None, ForcedOutcomes(()))

    @pytest.mark.parametrize("label", list(BellLabel))
    def test_repeated_measurement_of_bell_state(self, label):
        first = bell_qnd(bell_state(label), None, ForcedOutcomes((0, 1)))
        second = bell_qnd(first.final_state, None, ForcedOutcomes((1, 0)))
        assert first.label is second.label is label
        assert fidelity_up_to_phase(second.final_state, bell_state(label)) == pytest.approx(1.0, abs=1e-10)

    def test_repeated_measurement_is_idempotent(self, rng, random_state):
        for _ in range(20):
            first = bell_qnd(random_state(2), None, RandomOutcomes(rng))
            second = bell_qnd(first.final_state, None, RandomOutcomes(rng))
            assert second.label is first.label
            assert second.restored
            assert fidelity_up_to_phase(second.final_state, first.final_state) == pytest.approx(1.0, abs=1e-10)


class TestSingleDetector:

    @pytest.fixture(params=["A", "B"])
    def layout(self, request):
        mapping = {"dots": ["A", "B"], "coupled_pairs": [["A", "B"]], "detectors": {1: request.param}}
        return layout_from_mapping(mapping)

    @pytest.mark.parametrize("label", list(BellLabel))
    @pytest.mark.parametrize("swaps", list(itertools.product((0, 1), repeat=2)))
    def test_identifies_every_bell_state(self, layout, label, swaps):
        state = bell_state(label)
        record = bell_qnd(state, bell_device(state, layout), ForcedOutcomes(swaps))
        assert record.label is label
        assert record.restored
        assert record.signature == TABLE1_SIGNATURES[label]
        assert len(record.snapshot_t.readings) == 1
        assert record.snapshot_t.anticorrelated is None

    def test_detector_table(self, layout):
        assert detector_table(layout) == TABLE1_SIGNATURES

    def test_generation(self, layout):
        state = make_state(2, [("↑↑", 1.0)])
        source = ForcedOutcomes((1,), fold_interchangeable=True)
        label, post = bell_generate(state, bell_device(state, layout), source)
        assert label is BellLabel.PHI_MINUS
        assert fidelity_up_to_phase(post, bell_state(BellLabel.PHI_MINUS)) == pytest.approx(1.0, abs=1e-10)


class TestBellLayout:

    def test_default_is_fig1(self):
        device = bell_device(bell_state(BellLabel.PHI_PLUS))
        assert device.layout == fig1_layout()
        assert device.charge.location == ("A", "B")

    def test_first_two_dots_are_used(self):
        device = bell_device(bell_state(BellLabel.PSI_PLUS), chain_layout(("L", "M", "R")))
        assert device.charge.location == ("L", "M")
        record = bell_qnd(bell_state(BellLabel.PSI_PLUS), device, ForcedOutcomes((0, 0)))
        assert record.label is BellLabel.PSI_PLUS

    @pytest.mark.parametrize("mapping", [
        {"dots": ["A"], "detectors": {1: "A"}},
        {"dots": ["A", "B"], "detectors": {1: "A"}},
        {"dots": ["A", "B"], "coupled_pairs": [["A", "B"]]},
    ])
    def test_unusable_layouts(self, mapping):
        with pytest.raises(ProtocolError):
            check_bell_layout(layout_from_mapping(mapping))


class TestBellGenerate:

    @pytest.mark.parametrize("path,expected", [((0,), BellLabel.PHI_PLUS), ((1,), BellLabel.PHI_MINUS)])
    def test_up_up(self, path, expected):
        source = ForcedOutcomes(path, fold_interchangeable=True)
        label, state = bell_generate(make_state(2, [("↑↑", 1.0)]), None, source)
        assert label is expected
        assert fidelity_up_to_phase(state, bell_state(expected)) == pytest.approx(1.0, abs=1e-10)
        assert source.weight == pytest.approx(0.5)

    def test_certain_for_single_coefficient(self):
        label, _ = bell_generate(state_from_bell_coefficients(0, 0, 0, 1), None,
                                 ForcedOutcomes((0, 0), fold_interchangeable=True))
        assert label is BellLabel.PSI_MINUS

    def test_branch_weight_is_born_probability(self):
        coefficients = (math.sqrt(0.4), math.sqrt(0.3), math.sqrt(0.2), math.sqrt(0.1))
        state = state_from_bell_coefficients(*coefficients)
        source = ForcedOutcomes((0, 1), fold_interchangeable=True)
        label, _ = bell_generate(state, None, source)
        assert label is BellLabel.PHI_MINUS
        assert source.weight == pytest.approx(0.3)


class TestClassification:

    def test_parity_pairs(self):
        assert classify_signature(PARALLEL, PARALLEL) is BellLabel.PHI_PLUS
        assert classify_signature(PARALLEL, ANTIPARALLEL) is BellLabel.PHI_MINUS
        assert classify_signature(ANTIPARALLEL, PARALLEL) is BellLabel.PSI_PLUS
        assert classify_signature(ANTIPARALLEL, ANTIPARALLEL) is BellLabel.PSI_MINUS

    def test_detector_pairs(self):
        for label, (first, second) in TABLE1_SIGNATURES.items():
            assert classify_detectors(first, second) is label

    def test_impossible_record(self):
        with pytest.raises(ProtocolError):
            classify_detectors("11", "00")

    def test_single_detector_is_sufficient(self):
        for label, (first, second) in TABLE1_SIGNATURES.items():
            assert classify_single_detector(int(first[0]), int(second[0])) is label


class TestRotateBell:

    @pytest.mark.parametrize("label,target", list(itertools.product(BellLabel, BellLabel)))
    def test_every_pair(self, label, target):
        out = rotate_bell(bell_state(label), label, target)
        assert fidelity_up_to_phase(out, bell_state(target)) == pytest.approx(1.0, abs=1e-12)

    def test_distinct_qubits(self):
        with pytest.raises(ProtocolError):
            rotate_bell(bell_state(BellLabel.PHI_PLUS), BellLabel.PHI_PLUS, BellLabel.PSI_PLUS, 1, 1)
