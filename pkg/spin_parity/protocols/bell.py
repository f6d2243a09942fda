"""Bell-state QND measurement and Bell-state generation on a two-dot device.

Sequence (both protocols share it): load both electrons into the first dot,
open the gate (first parity check, read at t), separate, rotate both spins
with Hadamards, reload into the dot the pair was read out in, open the gate
again (second parity check, read at 2t), separate, rotate back.

Reloading into the read-out dot is what makes the detector record match the
reference signature table: a Ψ pair sits in dot B after the first check, so a
parallel second result leaves it in B (``01``) and an antiparallel one moves
it to A (``10``).
"""
import itertools
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from spin_parity.device_model import (
    DetectorSnapshot,
    DeviceLayout,
    DeviceState,
    DotId,
    fig1_layout,
    new_device,
    parity_measure,
    separate_nonadiabatic,
    transfer,
)
from spin_parity.exceptions import DeviceError, ProtocolError
from spin_parity.outcomes import ForcedOutcomes, OutcomeSource
from spin_parity.state_engine import (
    BellLabel,
    ParityOutcome,
    PureState,
    apply_flip,
    apply_hadamard,
    apply_phase_flip,
    bell_state,
    fidelity_up_to_phase,
)

logger = logging.getLogger(__name__)

RESTORE_TOLERANCE = 1e-10

# Column order of the detector table.
TABLE1_COLUMNS = (BellLabel.PSI_PLUS, BellLabel.PSI_MINUS, BellLabel.PHI_PLUS, BellLabel.PHI_MINUS)

# (D1D2 at t, D1D2 at 2t) for each Bell state.
TABLE1_SIGNATURES = {
    BellLabel.PSI_PLUS: ("01", "01"),
    BellLabel.PSI_MINUS: ("01", "10"),
    BellLabel.PHI_PLUS: ("10", "10"),
    BellLabel.PHI_MINUS: ("10", "01"),
}
_LABEL_BY_SIGNATURE = {signature: label for label, signature in TABLE1_SIGNATURES.items()}

# Pauli corrections (gate, on first electron) taking each Bell state to Φ+ up to phase.
_TO_PHI_PLUS = {
    BellLabel.PHI_PLUS: (),
    BellLabel.PHI_MINUS: ("Z",),
    BellLabel.PSI_PLUS: ("X",),
    BellLabel.PSI_MINUS: ("Z", "X"),
}


@dataclass(frozen=True)
class BellQndRecord:
    """Result of one QND Bell measurement."""

    label: BellLabel
    snapshot_t: DetectorSnapshot
    snapshot_2t: DetectorSnapshot
    signature: Tuple[str, str]
    final_state: PureState
    restored: bool
    initial_state: PureState
    swaps: Tuple[bool, bool]
    outcomes: Tuple[ParityOutcome, ParityOutcome]
    device: DeviceState


@dataclass(frozen=True)
class _SequenceResult:
    device: DeviceState
    label: BellLabel
    snapshots: Tuple[DetectorSnapshot, DetectorSnapshot]
    signatures: Tuple[str, str]
    outcomes: Tuple[ParityOutcome, ParityOutcome]
    swaps: Tuple[bool, bool]


def classify_signature(first: ParityOutcome, second: ParityOutcome) -> BellLabel:
    """Bell label from the two parity results."""
    if first is ParityOutcome.PARALLEL:
        return BellLabel.PHI_PLUS if second is ParityOutcome.PARALLEL else BellLabel.PHI_MINUS
    return BellLabel.PSI_PLUS if second is ParityOutcome.PARALLEL else BellLabel.PSI_MINUS


def classify_detectors(signature_t: str, signature_2t: str) -> BellLabel:
    """Bell label from the two D1D2 readings, e.g. ('01', '10')."""
    try:
        return _LABEL_BY_SIGNATURE[(signature_t, signature_2t)]
    except KeyError:
        raise ProtocolError(f"Detector record ({signature_t}, {signature_2t}) matches no Bell state")


def classify_single_detector(d1_t: int, d1_2t: int) -> BellLabel:
    """Bell label from the detector on the first dot alone; the second dot is always its complement."""
    return classify_detectors(f"{d1_t}{1 - d1_t}", f"{d1_2t}{1 - d1_2t}")


def check_bell_layout(layout: DeviceLayout):
    """The first two dots of ``layout`` must share a gate and at least one of them a detector.

    Raises:
        ProtocolError: if the layout cannot host the Bell sequence
    """
    if len(layout.dots) < 2:
        raise ProtocolError(f"Bell protocols need two dots, layout has {len(layout.dots)}")
    first, second = layout.dots[:2]
    if not layout.is_coupled(first, second):
        raise ProtocolError(f"Dots '{first}' and '{second}' share no gate")
    if layout.detector_for(first) is None and layout.detector_for(second) is None:
        raise ProtocolError(f"Neither '{first}' nor '{second}' has a charge detector")


def bell_device(state: PureState, layout: Optional[DeviceLayout] = None) -> DeviceState:
    """Two-electron device with one electron in each of the first two dots (fig1 by default)."""
    layout = layout if layout is not None else fig1_layout()
    check_bell_layout(layout)
    if state.num_qubits != 2:
        raise ProtocolError(f"Bell protocols act on 2 electrons, got {state.num_qubits}")
    return new_device(layout, state, layout.dots[:2])


def _load_pair(dev: DeviceState, electrons: Tuple[int, int], dot: DotId) -> DeviceState:
    for electron in electrons:
        dev = transfer(dev, electron, dot)
    return dev


def _rotate_pair(dev: DeviceState, electrons: Tuple[int, int]) -> DeviceState:
    spins = dev.spins
    for electron in electrons:
        spins = apply_hadamard(spins, electron)
    return dev.with_spins(spins)


def _first_dot_charge(snapshot: DetectorSnapshot, detectors: Tuple[Optional[int], Optional[int]]) -> int:
    first, second = detectors
    if first is not None:
        return snapshot.reading(first)
    return 1 - snapshot.reading(second)


def _read_sequence(snapshot_t: DetectorSnapshot, snapshot_2t: DetectorSnapshot,
                   detectors: Tuple[Optional[int], Optional[int]]) -> Tuple[BellLabel, Tuple[str, str]]:
    """Label and two-dot signatures; one watched dot is enough."""
    if None not in detectors:
        signatures = (snapshot_t.signature(detectors), snapshot_2t.signature(detectors))
        return classify_detectors(*signatures), signatures
    charge_t = _first_dot_charge(snapshot_t, detectors)
    charge_2t = _first_dot_charge(snapshot_2t, detectors)
    signatures = (f"{charge_t}{1 - charge_t}", f"{charge_2t}{1 - charge_2t}")
    return classify_single_detector(charge_t, charge_2t), signatures


def run_bell_sequence(dev: DeviceState, outcome_source: OutcomeSource,
                      electrons: Tuple[int, int] = (0, 1),
                      dots: Optional[Tuple[DotId, DotId]] = None) -> _SequenceResult:
    """Run the two-check sequence on a pair embedded in any device.

    ``electrons`` must be in increasing order; the lower one ends in
    ``dots[0]``, the higher one in ``dots[1]``. ``dots`` defaults to the
    first two dots of the layout.
    """
    dots = dots if dots is not None else dev.layout.dots[:2]
    first_dot, second_dot = dots
    if electrons[0] >= electrons[1]:
        raise DeviceError(f"Electron pair must be increasing, got {electrons}")
    pair_detectors = (dev.layout.detector_for(first_dot), dev.layout.detector_for(second_dot))

    dev = _load_pair(dev, electrons, first_dot)
    dev, first, snapshot_t = parity_measure(dev, first_dot, second_dot, outcome_source)
    found = first_dot if first is ParityOutcome.PARALLEL else second_dot
    dev, swap_t = separate_nonadiabatic(dev, found, dots, outcome_source)
    dev = _rotate_pair(dev, electrons)

    other = second_dot if found == first_dot else first_dot
    dev = _load_pair(dev, electrons, found)
    dev, second, snapshot_2t = parity_measure(dev, found, other, outcome_source)
    found_2t = found if second is ParityOutcome.PARALLEL else other
    dev, swap_2t = separate_nonadiabatic(dev, found_2t, dots, outcome_source)
    dev = _rotate_pair(dev, electrons)

    label, signatures = _read_sequence(snapshot_t, snapshot_2t, pair_detectors)
    if label is not classify_signature(first, second):
        raise ProtocolError("Detector record disagrees with the parity outcomes")
    logger.debug("Bell sequence on %s -> %s", electrons, label.value)
    return _SequenceResult(dev, label, (snapshot_t, snapshot_2t), signatures, (first, second),
                           (swap_t, swap_2t))


def _two_electron_device(state: PureState, device: Optional[DeviceState]) -> DeviceState:
    if device is None:
        return bell_device(state)
    if state.num_qubits != 2:
        raise ProtocolError(f"Bell protocols act on 2 electrons, got {state.num_qubits}")
    return device.with_spins(state)


def bell_qnd(state: PureState, device: Optional[DeviceState],
             outcome_source: OutcomeSource) -> BellQndRecord:
    """Non-demolition Bell measurement.

    Args:
        state: two-electron input
        device: device whose first two dots host the pair (None builds one with ``bell_device``)
        outcome_source: branch source for parity and separation draws

    Returns:
        The detector record, identified label and final (restored) state
    """
    dev = _two_electron_device(state, device)
    result = run_bell_sequence(dev, outcome_source)
    final = result.device.spins
    restored = fidelity_up_to_phase(final, state) >= 1.0 - RESTORE_TOLERANCE
    return BellQndRecord(
        label=result.label,
        snapshot_t=result.snapshots[0],
        snapshot_2t=result.snapshots[1],
        signature=result.signatures,
        final_state=final,
        restored=restored,
        initial_state=state,
        swaps=result.swaps,
        outcomes=result.outcomes,
        device=result.device,
    )


def bell_generate(state: PureState, device: Optional[DeviceState],
                  outcome_source: OutcomeSource) -> Tuple[BellLabel, PureState]:
    """Project an arbitrary pair onto a Bell state.

    Returns:
        (label, post-protocol state equal to that Bell state up to phase)
    """
    dev = _two_electron_device(state, device)
    result = run_bell_sequence(dev, outcome_source)
    return result.label, result.device.spins


def rotate_bell(state: PureState, label: BellLabel, target: BellLabel,
                q1: int = 0, q2: int = 1) -> PureState:
    """Single-spin Pauli corrections turning Bell state ``label`` on (q1, q2) into ``target``."""
    if q1 == q2:
        raise ProtocolError("rotate_bell needs two distinct electrons")
    gates = list(_TO_PHI_PLUS[label]) + list(reversed(_TO_PHI_PLUS[target]))
    for gate in gates:
        state = apply_flip(state, q1) if gate == "X" else apply_phase_flip(state, q1)
    return state


def detector_table(layout: Optional[DeviceLayout] = None) -> Dict[BellLabel, Tuple[str, str]]:
    """Detector signatures of each Bell input over every forced separation branch.

    Signatures are two-dot charge strings even when ``layout`` watches a single dot.

    Raises:
        ProtocolError: if two branches of the same input disagree or a Bell
            input is not restored
    """
    table: Dict[BellLabel, Tuple[str, str]] = {}
    for label in TABLE1_COLUMNS:
        seen: List[Tuple[str, str]] = []
        for swaps in itertools.product((0, 1), repeat=2):
            state = bell_state(label)
            record = bell_qnd(state, bell_device(state, layout), ForcedOutcomes(swaps))
            if record.label is not label or not record.restored:
                raise ProtocolError(f"QND measurement of {label.value} failed on swap branch {swaps}")
            seen.append(record.signature)
        if len(set(seen)) != 1:
            raise ProtocolError(f"Signatures of {label.value} depend on the separation branch: {seen}")
        table[label] = seen[0]
    return table
