"""GHZ-state preparation by repeated spin parity checks.

Two growth strategies:

* sequential: a Bell pair is extended one electron at a time; each new
  electron is compared with its neighbour, retrying along the alternating
  cascade (j,k), (i,j), (j,k), ... up to ``max_rounds`` checks
* pair_merge: fresh Bell pairs are merged into the growing GHZ state by one
  boundary parity check each; odd targets start from a three-electron cascade

Only growth checks count in ``parity_checks``; the checks spent inside Bell
pair generation are reported as ``resource_checks``.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import reduce
from typing import List, Optional, Tuple

from spin_parity.device_model import (
    DeviceLayout,
    DeviceState,
    chain_layout,
    fig2_layout,
    new_device,
    parity_measure,
    separate_nonadiabatic,
    transfer,
)
from spin_parity.exceptions import ProtocolError
from spin_parity.outcomes import OutcomeSource
from spin_parity.protocols.bell import rotate_bell, run_bell_sequence
from spin_parity.state_engine import (
    DOWN,
    BellLabel,
    GhzClassResult,
    ParityOutcome,
    PureState,
    apply_flip,
    apply_phase,
    bell_state,
    fidelity_up_to_phase,
    is_ghz_class,
    make_state,
    plus_state,
    tensor_product,
)

logger = logging.getLogger(__name__)

PRECONDITION_TOLERANCE = 1e-10

CASCADE_EXHAUSTED = "cascade_exhausted"
MERGE_ANTIPARALLEL = "merge_antiparallel"


class GrowthStrategy(Enum):
    SEQUENTIAL = "sequential"
    PAIR_MERGE = "pair_merge"


@dataclass(frozen=True)
class GrowthPlan:
    """Target of an n-party preparation."""

    strategy: GrowthStrategy
    n: int
    max_rounds: int = 1

    def __post_init__(self):
        if not isinstance(self.strategy, GrowthStrategy):
            raise ProtocolError(f"Unknown growth strategy {self.strategy!r}")
        if self.n < 2:
            raise ProtocolError(f"GHZ preparation needs n >= 2, got {self.n}")
        if self.max_rounds < 1:
            raise ProtocolError(f"max_rounds must be >= 1, got {self.max_rounds}")

    def expected_checks(self) -> int:
        """Growth parity checks of a fully successful single-shot run."""
        if self.strategy is GrowthStrategy.SEQUENTIAL:
            return self.n - 2
        return self.n // 2 - 1 if self.n % 2 == 0 else (self.n + 1) // 2 - 1


@dataclass(frozen=True)
class CheckRecord:
    """One growth parity check: electrons compared, result, separation branch."""

    pair: Tuple[int, int]
    outcome: ParityOutcome
    swapped: Optional[bool]


@dataclass(frozen=True)
class GhzRunRecord:
    success: bool
    rounds_used: int
    parity_checks: int
    final: GhzClassResult
    outcome_trace: Tuple[CheckRecord, ...]
    final_state: PureState
    resource_checks: int = 0
    failure: Optional[str] = None
    device: Optional[DeviceState] = field(default=None, compare=False)


def _check_neighbours(dev: DeviceState, source: OutcomeSource, left: int, right: int
                      ) -> Tuple[DeviceState, ParityOutcome, bool]:
    """Load ``right`` into ``left``'s dot, measure, and separate back."""
    home = dev.location_of(left)
    partner = dev.location_of(right)
    dev = transfer(dev, right, home)
    dev, outcome, _ = parity_measure(dev, home, partner, source)
    found = home if outcome is ParityOutcome.PARALLEL else partner
    dev, swapped = separate_nonadiabatic(dev, found, (home, partner), source)
    return dev, outcome, swapped


def _cascade(dev: DeviceState, source: OutcomeSource, i: int, j: int, k: int, max_rounds: int,
             trace: List[CheckRecord]) -> Tuple[DeviceState, bool, int]:
    """Compare (j,k), then (i,j), then (j,k) ... until a parallel result or ``max_rounds`` checks."""
    schedule = ((j, k), (i, j))
    for round_index in range(max_rounds):
        left, right = schedule[round_index % 2]
        dev, outcome, swapped = _check_neighbours(dev, source, left, right)
        trace.append(CheckRecord((left, right), outcome, swapped))
        if outcome is ParityOutcome.PARALLEL:
            return dev, True, round_index + 1
    return dev, False, max_rounds


def _merge_on_device(dev: DeviceState, source: OutcomeSource, left: int, right: int,
                     salvage: bool, trace: List[CheckRecord]) -> Tuple[DeviceState, bool]:
    """Boundary parity check between two GHZ blocks that meet at (left, right)."""
    home = dev.location_of(left)
    partner = dev.location_of(right)
    dev = transfer(dev, right, home)
    dev, outcome, _ = parity_measure(dev, home, partner, source)
    if outcome is ParityOutcome.ANTIPARALLEL and not salvage:
        trace.append(CheckRecord((left, right), outcome, None))
        return dev, False
    found = home if outcome is ParityOutcome.PARALLEL else partner
    dev, swapped = separate_nonadiabatic(dev, found, (home, partner), source)
    trace.append(CheckRecord((left, right), outcome, swapped))
    if outcome is ParityOutcome.ANTIPARALLEL:
        logger.debug("salvaging antiparallel merge at (%d, %d)", left, right)
        return dev, is_ghz_class(dev.spins).is_ghz
    return dev, True


def _bell_pair_on_device(dev: DeviceState, source: OutcomeSource, first: int) -> DeviceState:
    """Generate a Bell pair on electrons (first, first+1) and rotate it to Φ+."""
    second = first + 1
    dots = (dev.location_of(first), dev.location_of(second))
    result = run_bell_sequence(dev, source, (first, second), dots)
    spins = rotate_bell(result.device.spins, result.label, BellLabel.PHI_PLUS, first, second)
    return result.device.with_spins(spins)


def check_chain_layout(layout: DeviceLayout, n: int):
    """``layout`` must be a chain of ``n`` dots, in order, with a detector beside every gate.

    Raises:
        ProtocolError: if the layout cannot host an n-electron preparation
    """
    if len(layout.dots) != n:
        raise ProtocolError(f"{n} electrons need a chain of {n} dots, layout has {len(layout.dots)}")
    for left, right in zip(layout.dots, layout.dots[1:]):
        if not layout.is_coupled(left, right):
            raise ProtocolError(f"Neighbouring dots '{left}' and '{right}' share no gate")
        if layout.detector_for(left) is None and layout.detector_for(right) is None:
            raise ProtocolError(f"Neither '{left}' nor '{right}' has a charge detector")


def ghz3_device(pair: Optional[PureState] = None, layout: Optional[DeviceLayout] = None) -> DeviceState:
    """Start on a three-dot chain (fig2 by default).

    Electrons i, j share the middle dot holding Φ+, electron k sits in the
    last dot in |+⟩.
    """
    pair = pair if pair is not None else bell_state(BellLabel.PHI_PLUS)
    layout = layout if layout is not None else fig2_layout()
    check_chain_layout(layout, 3)
    _, middle, last = layout.dots
    return new_device(layout, tensor_product(pair, plus_state()), (middle, middle, last))


def ghz3_prepare(max_rounds: int, device: Optional[DeviceState],
                 outcome_source: OutcomeSource) -> GhzRunRecord:
    """Three-electron GHZ cascade on a three-dot chain.

    Args:
        max_rounds: number of parity comparisons allowed (m)
        device: device from ``ghz3_device()`` (None builds it)
        outcome_source: branch source

    Returns:
        Run record; success iff some comparison found parallel spins
    """
    if max_rounds < 1:
        raise ProtocolError(f"max_rounds must be >= 1, got {max_rounds}")
    dev = device if device is not None else ghz3_device()
    expected = tensor_product(bell_state(BellLabel.PHI_PLUS), plus_state())
    if dev.electron_count != 3 or fidelity_up_to_phase(dev.spins, expected) < 1.0 - PRECONDITION_TOLERANCE:
        raise ProtocolError("ghz3_prepare needs electrons i, j in Φ+ and k in (|↑⟩+|↓⟩)/√2")

    i, j, k = 0, 1, 2
    if dev.location_of(i) == dev.location_of(j):
        # split the Φ+ pair out of the middle dot into the first two dots
        middle = dev.location_of(j)
        dev, _ = separate_nonadiabatic(dev, middle, (dev.layout.dots[0], middle), outcome_source)

    trace: List[CheckRecord] = []
    dev, success, rounds = _cascade(dev, outcome_source, i, j, k, max_rounds, trace)
    final = is_ghz_class(dev.spins)
    logger.debug("ghz3 m=%d -> success=%s after %d rounds", max_rounds, success, rounds)
    return GhzRunRecord(
        success=success,
        rounds_used=rounds,
        parity_checks=len(trace),
        final=final,
        outcome_trace=tuple(trace),
        final_state=dev.spins,
        failure=None if success else CASCADE_EXHAUSTED,
        device=dev,
    )


def ghz_merge(state_a: PureState, state_b: PureState, device: Optional[DeviceState],
              outcome_source: OutcomeSource, salvage: bool = False) -> Tuple[bool, PureState]:
    """Fuse two GHZ-class blocks by a parity check on one electron of each.

    Electrons of ``state_a`` come first; the boundary pair is the last
    electron of A and the first of B. An antiparallel result is a failure
    and the projected (unseparated) state is returned, unless ``salvage``.
    """
    for name, block in (("first", state_a), ("second", state_b)):
        if not is_ghz_class(block).is_ghz:
            raise ProtocolError(f"The {name} merge input is not GHZ-class")
    joint = tensor_product(state_a, state_b)
    n = joint.num_qubits
    if device is None:
        labels = tuple(f"Q{k + 1}" for k in range(n))
        dev = new_device(chain_layout(labels), joint, labels)
    else:
        dev = device.with_spins(joint)

    trace: List[CheckRecord] = []
    dev, success = _merge_on_device(dev, outcome_source, state_a.num_qubits - 1, state_a.num_qubits,
                                    salvage, trace)
    return success, dev.spins


def _initial_growth_device(plan: GrowthPlan, layout: Optional[DeviceLayout]) -> DeviceState:
    n = plan.n
    up = make_state(1, [("↑", 1.0)])
    if plan.strategy is GrowthStrategy.SEQUENTIAL:
        singles = [up, up] + [plus_state()] * (n - 2)
    elif n % 2 == 0:
        singles = [up] * n
    else:
        singles = [up, up, plus_state()] + [up] * (n - 3)
    spins = reduce(tensor_product, singles)
    if layout is None:
        layout = chain_layout(tuple(f"Q{k + 1}" for k in range(n)))
    check_chain_layout(layout, n)
    return new_device(layout, spins, layout.dots)


def ghz_prepare(plan: GrowthPlan, outcome_source: OutcomeSource, salvage: bool = False,
                layout: Optional[DeviceLayout] = None) -> GhzRunRecord:
    """Grow an n-electron GHZ state according to ``plan``.

    Bell pairs come from the Bell generation protocol applied to |↑↑⟩ and
    are rotated to Φ+. The run stops at the first failed growth step.
    Electron k sits in dot k of ``layout``, an n-dot chain (Q1..Qn by default).
    """
    dev = _initial_growth_device(plan, layout)
    trace: List[CheckRecord] = []
    resource_checks = 0
    rounds_used = 0
    success = True
    failure: Optional[str] = None

    dev = _bell_pair_on_device(dev, outcome_source, 0)
    resource_checks += 2

    if plan.strategy is GrowthStrategy.SEQUENTIAL:
        for new in range(2, plan.n):
            dev, success, rounds = _cascade(dev, outcome_source, new - 2, new - 1, new,
                                            plan.max_rounds, trace)
            rounds_used = max(rounds_used, rounds)
            if not success:
                failure = CASCADE_EXHAUSTED
                break
    else:
        size = 2
        if plan.n % 2 == 1:
            dev, success, rounds = _cascade(dev, outcome_source, 0, 1, 2, plan.max_rounds, trace)
            rounds_used = rounds
            size = 3
            failure = None if success else CASCADE_EXHAUSTED
        while success and size < plan.n:
            dev = _bell_pair_on_device(dev, outcome_source, size)
            resource_checks += 2
            dev, success = _merge_on_device(dev, outcome_source, size - 1, size, salvage, trace)
            if not success:
                failure = MERGE_ANTIPARALLEL
            rounds_used = max(rounds_used, 1)
            size += 2

    final = is_ghz_class(dev.spins)
    logger.debug("ghz_prepare %s n=%d -> success=%s, %d checks", plan.strategy.value, plan.n,
                 success, len(trace))
    return GhzRunRecord(
        success=success,
        rounds_used=rounds_used,
        parity_checks=len(trace),
        final=final,
        outcome_trace=tuple(trace),
        final_state=dev.spins,
        resource_checks=resource_checks,
        failure=failure,
        device=dev,
    )


def ghz_normal_form(state: PureState) -> PureState:
    """Rotate a GHZ-class state into (|↑…↑⟩ + |↓…↓⟩)/√2 with single-spin gates."""
    result = is_ghz_class(state)
    if not result.is_ghz:
        raise ProtocolError("State is not GHZ-class")
    # qubit 0 is up in every reported bitmask, so it is never flipped here
    for qubit, spin in enumerate(result.bitmask):
        if spin == DOWN:
            state = apply_flip(state, qubit)
    state = apply_phase(state, 0, -result.relative_phase)
    lead = state.amplitudes[0]
    return PureState(state.amplitudes * (abs(lead) / lead))


def success_probability(plan: GrowthPlan) -> float:
    """Analytic single-shot success probability of ``plan``."""
    per_step = 1.0 - 0.5 ** plan.max_rounds
    if plan.strategy is GrowthStrategy.SEQUENTIAL:
        return per_step ** (plan.n - 2)
    merges = plan.n // 2 - 1 if plan.n % 2 == 0 else (plan.n - 3) // 2
    base = per_step if plan.n % 2 == 1 else 1.0
    return base * math.pow(0.5, merges)
