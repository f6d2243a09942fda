"""Branch sources: where every binary random choice of a protocol comes from.

A protocol never touches a random generator directly. Each parity measurement
and each nonadiabatic separation asks an ``OutcomeSource`` for one bit:

* parity draws: 0 = Parallel, 1 = Antiparallel
* swap draws:   0 = electrons keep their spin labels, 1 = labels exchanged

``RandomOutcomes`` samples with a numpy Generator, ``ForcedOutcomes`` replays a
fixed path and is what exact enumeration drives.
"""
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from spin_parity.exceptions import BranchPending, ZeroProbabilityOutcome

logger = logging.getLogger(__name__)

PARITY = "parity"
SWAP = "swap"

# Born probabilities closer than this to 0 or 1 are treated as certain.
PROBABILITY_SNAP = 1e-12


@dataclass(frozen=True)
class BranchRecord:
    """One resolved binary choice."""

    kind: str
    outcome: int
    probability: float
    mode: str
    born_probability: float

    @property
    def is_branch(self) -> bool:
        return self.mode in ("sampled", "forced_path")


def snap_probability(p: float) -> float:
    """Clip a probability into [0, 1] and snap near-certain values."""
    p = min(max(float(p), 0.0), 1.0)
    if p < PROBABILITY_SNAP:
        return 0.0
    if p > 1.0 - PROBABILITY_SNAP:
        return 1.0
    return p


class OutcomeSource(ABC):
    """Base class for branch sources.

    Args:
        swap_override: True/False pins every swap draw, None leaves them random
        parity_script: outcome bits for the first parity draws, consumed in order
    """

    def __init__(self, swap_override: Optional[bool] = None, parity_script: Sequence[int] = ()):
        self.swap_override = swap_override
        self._parity_script = [int(bit) for bit in parity_script]
        self.trace: List[BranchRecord] = []

    def choose(self, kind: str, p_zero: float, interchangeable: bool = False) -> int:
        """Resolve one binary choice.

        Args:
            kind: PARITY or SWAP
            p_zero: probability of outcome 0
            interchangeable: both outcomes lead to identical amplitudes

        Returns:
            The outcome bit
        """
        p_zero = snap_probability(p_zero)
        scripted = self._scripted(kind)
        if scripted is not None:
            born = p_zero if scripted == 0 else 1.0 - p_zero
            if born <= 0.0:
                raise ZeroProbabilityOutcome(kind, scripted)
            return self._record(kind, scripted, 1.0, "forced", born)

        if p_zero in (0.0, 1.0):
            outcome = 0 if p_zero == 1.0 else 1
            return self._record(kind, outcome, 1.0, "certain", 1.0)

        outcome, weight, mode = self._decide(kind, p_zero, interchangeable)
        born = p_zero if outcome == 0 else 1.0 - p_zero
        return self._record(kind, outcome, weight, mode, born)

    def _scripted(self, kind: str) -> Optional[int]:
        if kind == SWAP and self.swap_override is not None:
            return int(self.swap_override)
        if kind == PARITY and self._parity_script:
            return self._parity_script.pop(0)
        return None

    def _record(self, kind: str, outcome: int, weight: float, mode: str, born: float) -> int:
        self.trace.append(BranchRecord(kind, outcome, weight, mode, born))
        logger.debug("%s draw -> %d (%s, p=%.6g)", kind, outcome, mode, born)
        return outcome

    @abstractmethod
    def _decide(self, kind: str, p_zero: float, interchangeable: bool) -> Tuple[int, float, str]:
        """Pick an outcome for a genuine branch point.

        Returns:
            (outcome, path weight contribution, record mode)
        """
        pass

    @property
    def weight(self) -> float:
        """Probability of the path taken so far, forced draws excluded."""
        result = 1.0
        for record in self.trace:
            result *= record.probability
        return result

    @property
    def bits(self) -> Tuple[int, ...]:
        """Outcome bits of every draw in order."""
        return tuple(record.outcome for record in self.trace)


class RandomOutcomes(OutcomeSource):
    """Samples branch points from a numpy Generator."""

    def __init__(self, rng: np.random.Generator, swap_override: Optional[bool] = None,
                 parity_script: Sequence[int] = ()):
        super().__init__(swap_override, parity_script)
        self.rng = rng

    def _decide(self, kind: str, p_zero: float, interchangeable: bool) -> Tuple[int, float, str]:
        outcome = 0 if self.rng.random() < p_zero else 1
        return outcome, p_zero if outcome == 0 else 1.0 - p_zero, "sampled"


class ForcedOutcomes(OutcomeSource):
    """Replays a fixed bit path through the branch points.

    Running out of path raises ``BranchPending`` so an enumerator can extend it.
    With ``fold_interchangeable`` a draw whose outcomes are physically identical
    is resolved to 0 without consuming a path bit.
    """

    def __init__(self, path: Sequence[int], swap_override: Optional[bool] = None,
                 parity_script: Sequence[int] = (), fold_interchangeable: bool = False):
        super().__init__(swap_override, parity_script)
        self.path = tuple(int(bit) for bit in path)
        self.fold_interchangeable = fold_interchangeable
        self._cursor = 0

    def _decide(self, kind: str, p_zero: float, interchangeable: bool) -> Tuple[int, float, str]:
        if interchangeable and self.fold_interchangeable:
            return 0, 1.0, "folded"
        if self._cursor >= len(self.path):
            raise BranchPending(kind, p_zero)
        outcome = self.path[self._cursor]
        self._cursor += 1
        return outcome, p_zero if outcome == 0 else 1.0 - p_zero, "forced_path"

    @property
    def exhausted(self) -> bool:
        """True when every path bit has been consumed."""
        return self._cursor >= len(self.path)
