"""Exact pure-state engine for n electron spins.

Basis convention used everywhere in the package: bit value 0 is |↑⟩, bit
value 1 is |↓⟩, and qubit k occupies bit k of the amplitude index. A
bitstring such as "↑↓" lists qubits in order, so "↑↓" is qubit 0 up and
qubit 1 down (index 2).

States are immutable; every operation returns a new ``PureState``.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Iterable, Sequence, Tuple, Union

import numpy as np

from spin_parity.exceptions import StateError, ZeroProbabilityOutcome
from spin_parity.outcomes import PARITY, OutcomeSource, snap_probability

logger = logging.getLogger(__name__)

MAX_QUBITS = 24
NORM_TOLERANCE = 1e-10
GHZ_TOLERANCE = 1e-9
PRODUCT_TOLERANCE = 1e-10

UP = "↑"
DOWN = "↓"
_BIT_CHARS = {UP: 0, "u": 0, "U": 0, "0": 0, DOWN: 1, "d": 1, "D": 1, "1": 1}

_SQRT2_INV = 1 / math.sqrt(2)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT2_INV
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


class BellLabel(Enum):
    """The four Bell states."""

    PHI_PLUS = "PhiPlus"
    PHI_MINUS = "PhiMinus"
    PSI_PLUS = "PsiPlus"
    PSI_MINUS = "PsiMinus"

    @property
    def parallel(self) -> bool:
        """True for the parallel-spin pair Φ±."""
        return self in (BellLabel.PHI_PLUS, BellLabel.PHI_MINUS)

    @property
    def symbol(self) -> str:
        return {"PhiPlus": "Φ+", "PhiMinus": "Φ−", "PsiPlus": "Ψ+", "PsiMinus": "Ψ−"}[self.value]


class ParityOutcome(Enum):
    """Result of a spin parity measurement."""

    PARALLEL = "Parallel"
    ANTIPARALLEL = "Antiparallel"

    @property
    def bit(self) -> int:
        return 0 if self is ParityOutcome.PARALLEL else 1

    @classmethod
    def from_bit(cls, bit: int) -> "ParityOutcome":
        return cls.PARALLEL if bit == 0 else cls.ANTIPARALLEL


@dataclass(frozen=True)
class BellCoefficients:
    """Coefficients of Φ+, Φ−, Ψ+, Ψ− in that order."""

    a: complex
    b: complex
    c: complex
    d: complex

    def as_tuple(self) -> Tuple[complex, complex, complex, complex]:
        return (self.a, self.b, self.c, self.d)

    def probabilities(self) -> Tuple[float, float, float, float]:
        return tuple(abs(x) ** 2 for x in self.as_tuple())

    def for_label(self, label: BellLabel) -> complex:
        return self.as_tuple()[list(BellLabel).index(label)]


@dataclass(frozen=True)
class GhzClassResult:
    """Outcome of GHZ-class detection.

    When ``is_ghz`` the state is (|b⟩ + e^{iφ}|~b⟩)/√2 where b is ``bitmask``
    (qubit 0 always up) and φ is ``relative_phase``.
    """

    is_ghz: bool
    bitmask: str = ""
    relative_phase: float = 0.0

    @property
    def mask(self) -> int:
        """The bitmask as an amplitude index."""
        return parse_bitstring(self.bitmask) if self.bitmask else 0


class PureState:
    """Normalised complex amplitude vector over ``num_qubits`` spins.

    Args:
        amplitudes: sequence of length 2**num_qubits
        normalize: rescale instead of rejecting a non-unit norm
    """

    __slots__ = ("num_qubits", "amplitudes")

    def __init__(self, amplitudes: Union[Sequence[complex], np.ndarray], normalize: bool = False):
        amps = np.array(amplitudes, dtype=np.complex128).reshape(-1)
        dim = amps.size
        num_qubits = dim.bit_length() - 1
        if dim < 2 or (1 << num_qubits) != dim:
            raise StateError(f"Amplitude vector length {dim} is not a power of two >= 2")
        if num_qubits > MAX_QUBITS:
            raise StateError(f"{num_qubits} qubits exceeds the {MAX_QUBITS}-qubit cap")
        if not np.all(np.isfinite(amps)):
            raise StateError("Amplitudes must be finite")

        norm = float(np.linalg.norm(amps))
        if normalize:
            if norm == 0.0:
                raise StateError("Cannot normalise a zero vector")
            amps = amps / norm
        elif abs(norm - 1.0) > NORM_TOLERANCE:
            raise StateError(f"State norm {norm!r} differs from 1 by more than {NORM_TOLERANCE}")

        amps.setflags(write=False)
        object.__setattr__(self, "num_qubits", num_qubits)
        object.__setattr__(self, "amplitudes", amps)

    def __setattr__(self, name, value):
        raise AttributeError("PureState is immutable")

    def __reduce__(self):
        return (PureState, (np.array(self.amplitudes),))

    @property
    def dimension(self) -> int:
        return self.amplitudes.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def bitstring(self, index: int) -> str:
        return format_bitstring(index, self.num_qubits)

    def allclose(self, other: "PureState", atol: float = 1e-12) -> bool:
        """Component-wise comparison (global phase matters)."""
        return (self.num_qubits == other.num_qubits
                and bool(np.allclose(self.amplitudes, other.amplitudes, rtol=0.0, atol=atol)))

    def describe(self, threshold: float = 1e-9) -> str:
        terms = []
        for index in np.flatnonzero(np.abs(self.amplitudes) > threshold):
            amp = complex(self.amplitudes[index])
            if abs(amp.imag) < threshold:
                coeff = f"{amp.real:+.4f}"
            else:
                coeff = f"({amp.real:+.4f}{amp.imag:+.4f}j)"
            terms.append(f"{coeff}|{self.bitstring(int(index))}⟩")
        return " ".join(terms) if terms else "0"

    def __repr__(self) -> str:
        return f"PureState({self.num_qubits} qubits: {self.describe()})"


def format_bitstring(index: int, num_qubits: int) -> str:
    """Render an amplitude index as arrows, qubit 0 first."""
    return "".join(DOWN if (index >> k) & 1 else UP for k in range(num_qubits))


def parse_bitstring(bits: str) -> int:
    """Turn an arrow (or u/d, 0/1) bitstring into an amplitude index."""
    index = 0
    for k, char in enumerate(bits):
        if char not in _BIT_CHARS:
            raise StateError(f"Invalid spin character {char!r} in bitstring {bits!r}")
        index |= _BIT_CHARS[char] << k
    return index


def make_state(num_qubits: int, assignments: Iterable[Tuple[Union[str, int], complex]]) -> PureState:
    """Build a normalised state from (bitstring, amplitude) pairs.

    Args:
        num_qubits: number of spins
        assignments: bitstrings (or raw indices) with their amplitudes;
            repeated bitstrings add up

    Returns:
        The normalised state, all unlisted amplitudes zero
    """
    if not 1 <= num_qubits <= MAX_QUBITS:
        raise StateError(f"num_qubits must be in [1, {MAX_QUBITS}], got {num_qubits}")
    assignments = list(assignments)
    if not assignments:
        raise StateError("make_state needs at least one amplitude assignment")

    dim = 1 << num_qubits
    amps = np.zeros(dim, dtype=np.complex128)
    for bits, amplitude in assignments:
        if isinstance(bits, str):
            if len(bits) != num_qubits:
                raise StateError(f"Bitstring {bits!r} does not have {num_qubits} spins")
            index = parse_bitstring(bits)
        else:
            index = int(bits)
        if not 0 <= index < dim:
            raise StateError(f"Basis index {index} out of range for {num_qubits} qubits")
        amps[index] += complex(amplitude)

    if np.linalg.norm(amps) == 0.0:
        raise StateError("Amplitude assignments have zero norm")
    return PureState(amps, normalize=True)


def plus_state() -> PureState:
    """(|↑⟩ + |↓⟩)/√2."""
    return PureState([_SQRT2_INV, _SQRT2_INV])


def ghz_state(num_qubits: int) -> PureState:
    """(|↑…↑⟩ + |↓…↓⟩)/√2."""
    full = (1 << num_qubits) - 1
    return make_state(num_qubits, [(0, 1.0), (full, 1.0)])


def state_from_bell_coefficients(a: complex, b: complex, c: complex, d: complex) -> PureState:
    """Two-qubit state aΦ+ + bΦ− + cΨ+ + dΨ− (normalised)."""
    amps = np.zeros(4, dtype=np.complex128)
    amps[0b00] = (a + b) * _SQRT2_INV
    amps[0b11] = (a - b) * _SQRT2_INV
    # index 0b10: qubit 0 up, qubit 1 down
    amps[0b10] = (c + d) * _SQRT2_INV
    amps[0b01] = (c - d) * _SQRT2_INV
    if np.linalg.norm(amps) == 0.0:
        raise StateError("Bell coefficients have zero norm")
    return PureState(amps, normalize=True)


def bell_state(label: BellLabel) -> PureState:
    coeffs = [1.0 if member is label else 0.0 for member in BellLabel]
    return state_from_bell_coefficients(*coeffs)


def tensor_product(first: PureState, second: PureState) -> PureState:
    """Joint state; ``first`` occupies the low qubits, ``second`` the next ones."""
    if first.num_qubits + second.num_qubits > MAX_QUBITS:
        raise StateError("Tensor product exceeds the qubit cap")
    return PureState(np.kron(second.amplitudes, first.amplitudes))


def _check_qubit(state: PureState, qubit: int):
    if not 0 <= qubit < state.num_qubits:
        raise StateError(f"Qubit {qubit} out of range for {state.num_qubits}-qubit state")


def _check_pair(state: PureState, q1: int, q2: int):
    _check_qubit(state, q1)
    _check_qubit(state, q2)
    if q1 == q2:
        raise StateError(f"Qubit pair must be distinct, got ({q1}, {q2})")


def _axis(num_qubits: int, qubit: int) -> int:
    # reshape([2] * n) puts the most significant bit first
    return num_qubits - 1 - qubit


def apply_gate(state: PureState, matrix: np.ndarray, qubit: int) -> PureState:
    """Apply a 2x2 unitary to one qubit."""
    _check_qubit(state, qubit)
    matrix = np.asarray(matrix, dtype=np.complex128)
    if matrix.shape != (2, 2):
        raise StateError(f"Single-qubit gate must be 2x2, got {matrix.shape}")
    n = state.num_qubits
    axis = _axis(n, qubit)
    tensor = state.amplitudes.reshape([2] * n)
    tensor = np.tensordot(matrix, tensor, axes=([1], [axis]))
    tensor = np.moveaxis(tensor, 0, axis)
    return PureState(tensor.reshape(-1))


def apply_hadamard(state: PureState, qubit: int) -> PureState:
    """|↑⟩ → (|↑⟩+|↓⟩)/√2, |↓⟩ → (|↑⟩−|↓⟩)/√2 on one qubit."""
    return apply_gate(state, HADAMARD, qubit)


def apply_flip(state: PureState, qubit: int) -> PureState:
    """Spin flip (Pauli X)."""
    return apply_gate(state, PAULI_X, qubit)


def apply_phase_flip(state: PureState, qubit: int) -> PureState:
    """Sign flip of |↓⟩ (Pauli Z)."""
    return apply_gate(state, PAULI_Z, qubit)


def apply_phase(state: PureState, qubit: int, phi: float) -> PureState:
    """|↓⟩ → e^{iφ}|↓⟩."""
    return apply_gate(state, np.diag([1.0, np.exp(1j * phi)]), qubit)


def apply_swap(state: PureState, q1: int, q2: int) -> PureState:
    """Exchange the spin states of two qubits."""
    _check_pair(state, q1, q2)
    n = state.num_qubits
    tensor = state.amplitudes.reshape([2] * n)
    tensor = np.swapaxes(tensor, _axis(n, q1), _axis(n, q2))
    return PureState(tensor.reshape(-1))


@lru_cache(maxsize=256)
def _parallel_mask(num_qubits: int, q1: int, q2: int) -> np.ndarray:
    index = np.arange(1 << num_qubits)
    mask = ((index >> q1) & 1) == ((index >> q2) & 1)
    mask.setflags(write=False)
    return mask


def parity_probability(state: PureState, q1: int, q2: int) -> float:
    """Probability that qubits q1 and q2 have parallel spins."""
    _check_pair(state, q1, q2)
    mask = _parallel_mask(state.num_qubits, q1, q2)
    return float(np.sum(state.probabilities()[mask]))


def project_parity(state: PureState, q1: int, q2: int,
                   outcome_source: Union[OutcomeSource, ParityOutcome]
                   ) -> Tuple[ParityOutcome, float, PureState]:
    """Projective parallel/antiparallel measurement of two spins.

    Args:
        state: normalised state
        q1, q2: measured qubits
        outcome_source: a branch source, or a ParityOutcome to force

    Returns:
        (outcome, probability of that outcome, renormalised post-state)
    """
    p_parallel = snap_probability(parity_probability(state, q1, q2))

    if isinstance(outcome_source, ParityOutcome):
        outcome = outcome_source
        probability = p_parallel if outcome is ParityOutcome.PARALLEL else 1.0 - p_parallel
        if probability <= 0.0:
            raise ZeroProbabilityOutcome(PARITY, outcome.bit)
    else:
        outcome = ParityOutcome.from_bit(outcome_source.choose(PARITY, p_parallel))
        probability = p_parallel if outcome is ParityOutcome.PARALLEL else 1.0 - p_parallel

    mask = _parallel_mask(state.num_qubits, q1, q2)
    keep = mask if outcome is ParityOutcome.PARALLEL else ~mask
    projected = np.where(keep, state.amplitudes, 0.0)
    logger.debug("parity(%d,%d) -> %s with p=%.6g", q1, q2, outcome.value, probability)
    return outcome, probability, PureState(projected, normalize=True)


def bell_decompose(state: PureState, q1: int, q2: int) -> BellCoefficients:
    """Bell-basis coefficients of qubits (q1, q2).

    The pair must be in a product with the remaining qubits. With other
    qubits present, the global phase is fixed by the largest-weight
    configuration of the rest.
    """
    _check_pair(state, q1, q2)
    n = state.num_qubits
    tensor = state.amplitudes.reshape([2] * n)
    tensor = np.moveaxis(tensor, [_axis(n, q1), _axis(n, q2)], [0, 1])
    matrix = tensor.reshape(4, -1)  # row = 2 * bit(q1) + bit(q2)

    column = int(np.argmax(np.linalg.norm(matrix, axis=0)))
    pair = matrix[:, column] / np.linalg.norm(matrix[:, column])
    residual = matrix - np.outer(pair, pair.conj() @ matrix)
    if np.linalg.norm(residual) > PRODUCT_TOLERANCE:
        raise StateError(f"Qubits ({q1}, {q2}) are entangled with the rest of the state")

    uu, ud, du, dd = pair
    return BellCoefficients(
        a=complex((uu + dd) * _SQRT2_INV),
        b=complex((uu - dd) * _SQRT2_INV),
        c=complex((ud + du) * _SQRT2_INV),
        d=complex((ud - du) * _SQRT2_INV),
    )


def fidelity_up_to_phase(s1: PureState, s2: PureState) -> float:
    """|⟨s1|s2⟩|², which is 1 exactly when the states differ by a global phase."""
    if s1.num_qubits != s2.num_qubits:
        raise StateError(f"Cannot compare {s1.num_qubits}- and {s2.num_qubits}-qubit states")
    overlap = abs(np.vdot(s1.amplitudes, s2.amplitudes)) ** 2
    return float(min(max(overlap, 0.0), 1.0))


def is_ghz_class(state: PureState, tol: float = GHZ_TOLERANCE) -> GhzClassResult:
    """Detect (|b⟩ + e^{iφ}|~b⟩)/√2, reporting b with qubit 0 up."""
    probs = state.probabilities()
    full = state.dimension - 1
    peak = int(np.argmax(probs))
    branch = peak if peak & 1 == 0 else peak ^ full
    partner = branch ^ full

    rest = 1.0 - probs[branch] - probs[partner]
    if abs(probs[branch] - 0.5) > tol or abs(probs[partner] - 0.5) > tol or rest > tol:
        return GhzClassResult(is_ghz=False)

    phase = float(np.angle(state.amplitudes[partner]) - np.angle(state.amplitudes[branch])) % (2 * math.pi)
    if 2 * math.pi - phase < tol:
        phase = 0.0
    return GhzClassResult(True, state.bitstring(branch), phase)
