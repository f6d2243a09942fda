"""Classical device layer: dots, electron positions, gates and charge detectors.

Charge is classical. Every gate-open window is followed by a detector read,
so the model never stores a superposition of charge configurations. Time is
an event counter: each parity event appends one ``DetectorSnapshot`` whose
``step_label`` is one more than the previous one.
"""
import logging
from dataclasses import dataclass, field, replace
from typing import Any, Iterable, List, Mapping, Optional, Sequence, Tuple

from spin_parity.exceptions import DeviceError
from spin_parity.outcomes import SWAP, OutcomeSource
from spin_parity.state_engine import (
    ParityOutcome,
    PureState,
    apply_swap,
    project_parity,
)

logger = logging.getLogger(__name__)

DotId = str
DOT_CAPACITY = 2

__all__ = [
    "DotId", "DeviceLayout", "ChargeConfig", "DetectorSnapshot", "DeviceState", "ParityOutcome",
    "chain_layout", "fig1_layout", "fig2_layout", "layout_from_mapping", "builtin_layout", "BUILTIN_LAYOUTS",
    "new_device", "transfer", "separate_nonadiabatic", "parity_measure", "read_log",
]


@dataclass(frozen=True)
class DeviceLayout:
    """Static geometry of a device.

    Args:
        dots: dot labels in order
        detector_map: 1-based detector index -> monitored dot
        coupled_pairs: pairs of dots that share a tunable gate
    """

    dots: Tuple[DotId, ...]
    detector_map: Mapping[int, DotId]
    coupled_pairs: Tuple[Tuple[DotId, DotId], ...]

    def __post_init__(self):
        if len(set(self.dots)) != len(self.dots):
            raise DeviceError(f"Dot labels must be unique: {self.dots}")
        indices = sorted(self.detector_map)
        if indices != list(range(1, len(indices) + 1)):
            raise DeviceError(f"Detector indices must be 1-based and dense, got {indices}")
        for index, dot in self.detector_map.items():
            if dot not in self.dots:
                raise DeviceError(f"Detector D{index} monitors unknown dot '{dot}'")
        for first, second in self.coupled_pairs:
            if first == second:
                raise DeviceError(f"Coupled pair ({first}, {second}) must join distinct dots")
            for dot in (first, second):
                if dot not in self.dots:
                    raise DeviceError(f"Coupled pair references unknown dot '{dot}'")

    def is_coupled(self, first: DotId, second: DotId) -> bool:
        return (first, second) in self.coupled_pairs or (second, first) in self.coupled_pairs

    def detector_for(self, dot: DotId) -> Optional[int]:
        for index, monitored in self.detector_map.items():
            if monitored == dot:
                return index
        return None

    @property
    def detector_count(self) -> int:
        return len(self.detector_map)


def chain_layout(labels: Sequence[DotId]) -> DeviceLayout:
    """Linear chain: neighbours coupled, detector D(k+1) on dot k."""
    labels = tuple(labels)
    return DeviceLayout(
        dots=labels,
        detector_map={k + 1: dot for k, dot in enumerate(labels)},
        coupled_pairs=tuple(zip(labels, labels[1:])),
    )


def fig1_layout() -> DeviceLayout:
    """Two coupled dots A and B watched by D1 and D2."""
    return chain_layout(("A", "B"))


def fig2_layout() -> DeviceLayout:
    """A-B-C chain used for three-electron GHZ preparation; B is the parity dot."""
    return chain_layout(("A", "B", "C"))


def layout_from_mapping(mapping: Mapping[str, Any]) -> DeviceLayout:
    """Build a layout from a declarative description.

    Args:
        mapping: ``dots`` (list), ``coupled_pairs`` (list of 2-lists) and
            ``detectors`` (map of detector index to dot)
    """
    try:
        dots = tuple(str(dot) for dot in mapping["dots"])
    except KeyError:
        raise DeviceError("Layout description needs a 'dots' list")
    pairs = tuple((str(a), str(b)) for a, b in mapping.get("coupled_pairs", []))
    detectors = {int(index): str(dot) for index, dot in mapping.get("detectors", {}).items()}
    return DeviceLayout(dots=dots, detector_map=detectors, coupled_pairs=pairs)


BUILTIN_LAYOUTS = {"fig1": fig1_layout, "fig2": fig2_layout}


def builtin_layout(name: str) -> DeviceLayout:
    if name not in BUILTIN_LAYOUTS:
        raise DeviceError(f"Unknown layout '{name}', expected one of {sorted(BUILTIN_LAYOUTS)}")
    return BUILTIN_LAYOUTS[name]()


@dataclass(frozen=True)
class ChargeConfig:
    """Location of every electron; ``location[e]`` is the dot of electron e."""

    location: Tuple[DotId, ...]

    def occupancy(self, dot: DotId) -> int:
        return sum(1 for where in self.location if where == dot)

    def electrons_in(self, dot: DotId) -> List[int]:
        return [electron for electron, where in enumerate(self.location) if where == dot]

    def moved(self, electron: int, to: DotId) -> "ChargeConfig":
        location = list(self.location)
        location[electron] = to
        return ChargeConfig(tuple(location))


@dataclass(frozen=True)
class DetectorSnapshot:
    """Charge detector readout after one event.

    ``readings[d - 1]`` is detector Dd (1 = charge in the monitored dot).
    ``pair`` holds the detectors of the home and partner dots of the parity
    event that produced the snapshot; an unwatched dot has None.
    """

    step_label: int
    readings: Tuple[int, ...]
    pair: Tuple[Optional[int], Optional[int]] = (1, 2)

    @property
    def anticorrelated(self) -> Optional[bool]:
        """Exactly one of the pair detectors fired; None when only one dot is watched."""
        home, partner = self.pair
        if home is None or partner is None:
            return None
        return self.readings[home - 1] + self.readings[partner - 1] == 1

    def signature(self, detectors: Optional[Sequence[int]] = None) -> str:
        """Readings as a bit string, e.g. '10' for D1=1, D2=0.

        Args:
            detectors: detector indices to include, in order (default: all)
        """
        indices = detectors if detectors is not None else range(1, len(self.readings) + 1)
        return "".join(str(self.readings[index - 1]) for index in indices)

    def reading(self, detector: int) -> int:
        return self.readings[detector - 1]


@dataclass(frozen=True)
class DeviceState:
    """Spin state, charge configuration and detector history of one device."""

    layout: DeviceLayout
    spins: PureState
    charge: ChargeConfig
    log: Tuple[DetectorSnapshot, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.spins.num_qubits != len(self.charge.location):
            raise DeviceError(
                f"Spin state has {self.spins.num_qubits} qubits but "
                f"{len(self.charge.location)} electrons are placed")
        for dot in set(self.charge.location):
            if dot not in self.layout.dots:
                raise DeviceError(f"Electron placed in unknown dot '{dot}'")
            if self.charge.occupancy(dot) > DOT_CAPACITY:
                raise DeviceError(f"Dot '{dot}' holds more than {DOT_CAPACITY} electrons")

    @property
    def electron_count(self) -> int:
        return len(self.charge.location)

    def occupancy(self, dot: DotId) -> int:
        return self.charge.occupancy(dot)

    def electrons_in(self, dot: DotId) -> List[int]:
        return self.charge.electrons_in(dot)

    def location_of(self, electron: int) -> DotId:
        self._check_electron(electron)
        return self.charge.location[electron]

    def with_spins(self, spins: PureState) -> "DeviceState":
        """Replace the spin state, e.g. after single-spin rotations."""
        if spins.num_qubits != self.electron_count:
            raise DeviceError(f"Expected a {self.electron_count}-electron spin state")
        return replace(self, spins=spins)

    def readings(self) -> Tuple[int, ...]:
        return tuple(
            1 if self.occupancy(self.layout.detector_map[index]) > 0 else 0
            for index in range(1, self.layout.detector_count + 1)
        )

    def _check_electron(self, electron: int):
        if not 0 <= electron < self.electron_count:
            raise DeviceError(f"Unknown electron {electron}")

    def _check_dot(self, dot: DotId):
        if dot not in self.layout.dots:
            raise DeviceError(f"Unknown dot '{dot}'")


def new_device(layout: DeviceLayout, spins: PureState, placement: Iterable[DotId]) -> DeviceState:
    """Create a device with an empty detector log."""
    return DeviceState(layout=layout, spins=spins, charge=ChargeConfig(tuple(placement)))


def transfer(dev: DeviceState, electron: int, to: DotId) -> DeviceState:
    """Move one electron; acts on charge only, spins are untouched."""
    dev._check_electron(electron)
    dev._check_dot(to)
    if dev.charge.location[electron] == to:
        return dev
    if dev.occupancy(to) >= DOT_CAPACITY:
        raise DeviceError(f"Dot '{to}' is full")
    return replace(dev, charge=dev.charge.moved(electron, to))


def separate_nonadiabatic(dev: DeviceState, source_dot: DotId, targets: Tuple[DotId, DotId],
                          outcome_source: OutcomeSource) -> Tuple[DeviceState, bool]:
    """Split the two electrons of a dot into two dots.

    Which electron leaves is random: with probability 1/2 the two spin states
    are exchanged. After the optional exchange the lower-indexed electron goes
    to ``targets[0]`` and the other to ``targets[1]``.

    Returns:
        (new device, whether the exchange branch fired)
    """
    dev._check_dot(source_dot)
    first_target, second_target = targets
    dev._check_dot(first_target)
    dev._check_dot(second_target)
    if first_target == second_target:
        raise DeviceError(f"Separation targets must differ, got {targets}")
    residents = dev.electrons_in(source_dot)
    if len(residents) != 2:
        raise DeviceError(f"Dot '{source_dot}' must hold exactly 2 electrons to separate, "
                          f"holds {len(residents)}")
    for target in targets:
        remaining = 0 if target == source_dot else dev.occupancy(target)
        if remaining >= DOT_CAPACITY:
            raise DeviceError(f"Separation target '{target}' is full")

    low, high = residents
    exchanged = apply_swap(dev.spins, low, high)
    interchangeable = exchanged.allclose(dev.spins)
    swapped = outcome_source.choose(SWAP, 0.5, interchangeable=interchangeable) == 1
    spins = exchanged if swapped else dev.spins

    charge = dev.charge.moved(low, first_target).moved(high, second_target)
    logger.debug("separate %s -> %s, swapped=%s", source_dot, targets, swapped)
    return replace(dev, spins=spins, charge=charge), swapped


def parity_measure(dev: DeviceState, home: DotId, partner: DotId,
                   outcome_source: OutcomeSource
                   ) -> Tuple[DeviceState, ParityOutcome, DetectorSnapshot]:
    """Open the gate between ``home`` and ``partner`` and read the detectors.

    Antiparallel pairs tunnel resonantly into ``partner``; parallel pairs stay.
    """
    dev._check_dot(home)
    dev._check_dot(partner)
    if not dev.layout.is_coupled(home, partner):
        raise DeviceError(f"Dots '{home}' and '{partner}' share no gate")
    residents = dev.electrons_in(home)
    if len(residents) != 2:
        raise DeviceError(f"Dot '{home}' must hold exactly 2 electrons, holds {len(residents)}")
    if dev.occupancy(partner) != 0:
        raise DeviceError(f"Partner dot '{partner}' must be empty")
    home_detector = dev.layout.detector_for(home)
    partner_detector = dev.layout.detector_for(partner)
    if home_detector is None and partner_detector is None:
        raise DeviceError(f"Parity event needs a detector on '{home}' or '{partner}'")

    q1, q2 = residents
    outcome, _, spins = project_parity(dev.spins, q1, q2, outcome_source)
    charge = dev.charge
    if outcome is ParityOutcome.ANTIPARALLEL:
        charge = charge.moved(q1, partner).moved(q2, partner)

    moved = replace(dev, spins=spins, charge=charge)
    step = dev.log[-1].step_label + 1 if dev.log else 1
    snapshot = DetectorSnapshot(step, moved.readings(), (home_detector, partner_detector))
    logger.debug("parity %s/%s -> %s, detectors %s", home, partner, outcome.value, snapshot.readings)
    return replace(moved, log=dev.log + (snapshot,)), outcome, snapshot


def read_log(dev: DeviceState) -> List[DetectorSnapshot]:
    """Snapshot history in event order."""
    return list(dev.log)
