"""Scenario files: flat ``key=value`` records describing one simulation run.

Example::

    # QND measurement of Ψ−
    protocol=bell_qnd input=psi_minus
    trials=10000 seed=7

Tokens are whitespace separated, ``#`` starts a comment, keys may be spread
over any number of lines. Whitespace inside brackets does not split a token,
so ``amplitudes=(1, 0, 0, 1)`` and inline layouts such as
``layout={dots: [L, R], coupled_pairs: [[L, R]], detectors: {1: L}}`` are
single values.
"""
import logging
import math
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

import yaml

from spin_parity.device_model import BUILTIN_LAYOUTS, DeviceLayout, builtin_layout, layout_from_mapping
from spin_parity.exceptions import DeviceError, ProtocolError, ScenarioError
from spin_parity.protocols.bell import check_bell_layout
from spin_parity.protocols.ghz import GrowthPlan, GrowthStrategy, check_chain_layout
from spin_parity.state_engine import (
    BellLabel,
    PureState,
    bell_state,
    make_state,
    state_from_bell_coefficients,
)

logger = logging.getLogger(__name__)

PROTOCOLS = ("bell_qnd", "bell_gen", "ghz3", "ghz_n", "table1")
INPUTS = {
    "phi_plus": BellLabel.PHI_PLUS,
    "phi_minus": BellLabel.PHI_MINUS,
    "psi_plus": BellLabel.PSI_PLUS,
    "psi_minus": BellLabel.PSI_MINUS,
    "up_up": None,
}
FORCE_SWAP = {"on": True, "off": False, "random": None}
FORMATS = ("text", "csv", "json")
MAX_SEED = 2 ** 64

RENORMALIZE_TOLERANCE = 1e-12
RENORMALIZE_WARNING = 1e-6

_PARITY_WORDS = {
    "parallel": "parallel", "p": "parallel", "0": "parallel",
    "antiparallel": "antiparallel", "a": "antiparallel", "1": "antiparallel",
}
_BOOL_WORDS = {"true": True, "yes": True, "on": True, "1": True,
               "false": False, "no": False, "off": False, "0": False}
_KEY_ALIASES = {"max_rounds": "m"}
_RENDER_ORDER = ("protocol", "input", "amplitudes", "n", "strategy", "m", "trials", "seed",
                 "force_swap", "force_parity", "salvage", "format", "layout")
_OPEN_BRACKETS = "([{"
_CLOSE_BRACKETS = ")]}"


@dataclass(frozen=True)
class ScenarioConfig:
    """A validated scenario.

    ``trials == 0`` selects exact mode (exhaustive branch enumeration).
    Bell protocols take either ``input`` or ``amplitudes`` (a, b, c, d in the
    Φ+, Φ−, Ψ+, Ψ− basis); GHZ growth needs ``n`` and ``strategy``.
    ``layout`` is a built-in layout name, an inline mapping or the path of a
    YAML/JSON layout file; None keeps each protocol's default device.
    """

    protocol: str
    input: Optional[str] = None
    amplitudes: Optional[Tuple[complex, complex, complex, complex]] = None
    n: Optional[int] = None
    strategy: Optional[str] = None
    m: int = 1
    trials: int = 10000
    seed: int = 0
    force_swap: str = "random"
    force_parity: Tuple[str, ...] = ()
    salvage: bool = False
    format: str = "text"
    layout: Optional[str] = None

    def __post_init__(self):
        if self.protocol not in PROTOCOLS:
            raise ScenarioError(f"Unknown protocol '{self.protocol}', expected one of {list(PROTOCOLS)}",
                                key="protocol")
        if self.input is not None and self.input not in INPUTS:
            raise ScenarioError(f"Unknown input '{self.input}', expected one of {list(INPUTS)}", key="input")
        if self.force_swap not in FORCE_SWAP:
            raise ScenarioError(f"force_swap must be one of {list(FORCE_SWAP)}, got '{self.force_swap}'",
                                key="force_swap")
        if self.format not in FORMATS:
            raise ScenarioError(f"format must be one of {list(FORMATS)}, got '{self.format}'", key="format")
        if not 0 <= self.seed < MAX_SEED:
            raise ScenarioError(f"seed must be a 64-bit unsigned integer, got {self.seed}", key="seed")
        if self.trials < 0:
            raise ScenarioError(f"trials must be >= 0, got {self.trials}", key="trials")
        if self.m < 1:
            raise ScenarioError(f"m must be >= 1, got {self.m}", key="m")
        for word in self.force_parity:
            if word not in ("parallel", "antiparallel"):
                raise ScenarioError(f"Invalid forced parity '{word}'", key="force_parity")
        if self.amplitudes is not None:
            amplitudes = tuple(complex(a) for a in self.amplitudes)
            if len(amplitudes) != 4:
                raise ScenarioError(f"amplitudes needs 4 values (a, b, c, d), got {len(amplitudes)}",
                                    key="amplitudes")
            object.__setattr__(self, "amplitudes", normalize_amplitudes(amplitudes))
        self._check_protocol_fields()

    def _check_protocol_fields(self):
        if self.protocol in ("bell_qnd", "bell_gen"):
            if (self.input is None) == (self.amplitudes is None):
                raise ScenarioError(f"{self.protocol} needs exactly one of 'input' or 'amplitudes'", key="input")
        elif self.protocol == "ghz_n":
            if self.n is None:
                raise ScenarioError("ghz_n needs 'n'", key="n")
            if self.n < 2:
                raise ScenarioError(f"GHZ preparation needs n >= 2, got {self.n}", key="n")
            if self.strategy not in [s.value for s in GrowthStrategy]:
                raise ScenarioError(f"ghz_n needs strategy sequential or pair_merge, got {self.strategy!r}",
                                    key="strategy")
        elif self.protocol == "ghz3" and self.n not in (None, 3):
            raise ScenarioError(f"ghz3 always prepares 3 electrons, got n={self.n}", key="n")
        if self.layout is not None:
            self._check_layout(self.device_layout())

    def _check_layout(self, layout: DeviceLayout):
        try:
            if self.protocol == "ghz3":
                check_chain_layout(layout, 3)
            elif self.protocol == "ghz_n":
                check_chain_layout(layout, self.n)
            else:
                check_bell_layout(layout)
        except ProtocolError as e:
            raise ScenarioError(f"Layout does not fit {self.protocol}: {e}", key="layout") from None

    def device_layout(self) -> Optional[DeviceLayout]:
        """Resolved ``layout``, or None for the protocol default."""
        return resolve_layout(self.layout) if self.layout is not None else None

    @property
    def exact(self) -> bool:
        return self.trials == 0

    @property
    def swap_override(self) -> Optional[bool]:
        return FORCE_SWAP[self.force_swap]

    @property
    def parity_bits(self) -> Tuple[int, ...]:
        return tuple(0 if word == "parallel" else 1 for word in self.force_parity)

    def input_state(self) -> PureState:
        """Two-electron input of the Bell protocols."""
        if self.amplitudes is not None:
            return state_from_bell_coefficients(*self.amplitudes)
        label = INPUTS.get(self.input)
        if label is None:
            return make_state(2, [("↑↑", 1.0)])
        return bell_state(label)

    def growth_plan(self) -> GrowthPlan:
        return GrowthPlan(GrowthStrategy(self.strategy), self.n, self.m)

    def with_overrides(self, **overrides: Any) -> "ScenarioConfig":
        """Copy with non-None overrides applied (e.g. CLI flags)."""
        changes = {key: value for key, value in overrides.items() if value is not None}
        return replace(self, **changes) if changes else self


def _parse_int(key: str, value: str, line: int) -> int:
    try:
        return int(value)
    except ValueError:
        raise ScenarioError(f"Expected an integer, got '{value}'", key=key, line=line)


def _parse_bool(key: str, value: str, line: int) -> bool:
    try:
        return _BOOL_WORDS[value.lower()]
    except KeyError:
        raise ScenarioError(f"Expected a boolean, got '{value}'", key=key, line=line)


def _parse_amplitudes(value: str, line: int) -> Tuple[complex, ...]:
    tokens = [token.strip().strip("()") for token in value.strip().strip("()[]").split(",")]
    try:
        amplitudes = tuple(complex(token.replace(" ", "")) for token in tokens)
    except ValueError:
        raise ScenarioError(f"Amplitudes must be complex literals, got '{value}'", key="amplitudes", line=line)
    if not all(math.isfinite(a.real) and math.isfinite(a.imag) for a in amplitudes):
        raise ScenarioError("Amplitudes must be finite", key="amplitudes", line=line)
    return amplitudes


def normalize_amplitudes(amplitudes: Tuple[complex, ...]) -> Tuple[complex, ...]:
    """Rescale to unit norm; warn when the correction is more than rounding."""
    norm = math.sqrt(math.fsum(abs(a) ** 2 for a in amplitudes))
    if norm == 0.0:
        raise ScenarioError("Amplitudes cannot all be zero", key="amplitudes")
    if abs(norm - 1.0) <= RENORMALIZE_TOLERANCE:
        return tuple(amplitudes)
    if abs(norm - 1.0) > RENORMALIZE_WARNING:
        logger.warning("Amplitudes had norm %.6g and were renormalised", norm)
    return tuple(a / norm for a in amplitudes)


def _parse_force_parity(value: str, line: int) -> Tuple[str, ...]:
    words = []
    for word in filter(None, (part.strip().lower() for part in value.split(","))):
        if word not in _PARITY_WORDS:
            raise ScenarioError(f"Forced parity must be parallel or antiparallel, got '{word}'",
                                key="force_parity", line=line)
        words.append(_PARITY_WORDS[word])
    return tuple(words)


def resolve_layout(text: str) -> DeviceLayout:
    """Turn a ``layout`` value into a device layout.

    Args:
        text: built-in name (``fig1``, ``fig2``), inline YAML mapping, or path
            of a YAML/JSON file holding the same mapping

    Raises:
        ScenarioError: if the value names no usable layout
    """
    if text in BUILTIN_LAYOUTS:
        return builtin_layout(text)
    try:
        if text.lstrip().startswith("{"):
            mapping = yaml.safe_load(text)
        else:
            path = Path(text)
            if not path.is_file():
                raise ScenarioError(f"'{text}' is neither a built-in layout {sorted(BUILTIN_LAYOUTS)} "
                                    f"nor a layout file", key="layout")
            mapping = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as e:
        raise ScenarioError(f"Cannot read layout: {e}", key="layout") from None
    if not isinstance(mapping, dict):
        raise ScenarioError("Layout description must be a mapping", key="layout")
    try:
        return layout_from_mapping(mapping)
    except (AttributeError, DeviceError, TypeError, ValueError) as e:
        raise ScenarioError(f"Invalid layout: {e}", key="layout") from None


def _split_tokens(content: str, line: int) -> List[str]:
    tokens: List[str] = []
    current: List[str] = []
    depth = 0
    for char in content:
        if char in _OPEN_BRACKETS:
            depth += 1
        elif char in _CLOSE_BRACKETS:
            depth -= 1
            if depth < 0:
                raise ScenarioError(f"Unmatched '{char}'", line=line)
        if char.isspace() and depth == 0:
            if current:
                tokens.append("".join(current))
                current = []
        else:
            current.append(char)
    if depth > 0:
        raise ScenarioError("Unclosed bracket", line=line)
    if current:
        tokens.append("".join(current))
    return tokens


def _parse_layout(value: str, base_dir: Optional[Path]) -> str:
    # file paths are pinned relative to the scenario file
    if value in BUILTIN_LAYOUTS or value.lstrip().startswith("{") or base_dir is None:
        return value
    path = Path(value)
    return value if path.is_absolute() else str(base_dir / path)


def _parse_value(key: str, value: str, line: int, base_dir: Optional[Path] = None) -> Any:
    if key == "layout":
        return _parse_layout(value, base_dir)
    if key in ("n", "m", "trials", "seed"):
        return _parse_int(key, value, line)
    if key == "amplitudes":
        return _parse_amplitudes(value, line)
    if key == "salvage":
        return _parse_bool(key, value, line)
    if key == "force_parity":
        return _parse_force_parity(value, line)
    return value.lower() if key in ("protocol", "input", "strategy", "force_swap", "format") else value


def parse_scenario(text: str, defaults: Optional[Mapping[str, Any]] = None,
                   base_dir: Optional[Path] = None) -> ScenarioConfig:
    """Parse and validate scenario text.

    Args:
        text: scenario contents
        defaults: values for keys the text omits (e.g. trials and seed from the config file)
        base_dir: directory relative layout file paths are resolved against

    Returns:
        The validated scenario

    Raises:
        ScenarioError: naming the offending key and line
    """
    known = {f.name for f in fields(ScenarioConfig)}
    values: Dict[str, Any] = {}
    lines: Dict[str, int] = {}

    for line_number, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("#", 1)[0]
        for token in _split_tokens(content, line_number):
            if "=" not in token:
                raise ScenarioError(f"Expected key=value, got '{token}'", line=line_number)
            key, value = token.split("=", 1)
            key = _KEY_ALIASES.get(key.strip().lower(), key.strip().lower())
            if key not in known:
                raise ScenarioError(f"Unknown key '{key}'", key=key, line=line_number)
            if key in values:
                raise ScenarioError(f"Key '{key}' given twice", key=key, line=line_number)
            values[key] = _parse_value(key, value, line_number, base_dir)
            lines[key] = line_number

    if "protocol" not in values:
        raise ScenarioError("Missing required key 'protocol'", key="protocol")
    for key, value in (defaults or {}).items():
        if key in known and value is not None:
            values.setdefault(key, value)

    try:
        return ScenarioConfig(**values)
    except ScenarioError as e:
        if e.line is None and e.key in lines:
            raise ScenarioError(e.message, key=e.key, line=lines[e.key]) from None
        raise


def load_scenario(path: Union[str, Path], defaults: Optional[Mapping[str, Any]] = None) -> ScenarioConfig:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Scenario file not found: {path}")
    return parse_scenario(path.read_text(encoding="utf-8"), defaults, base_dir=path.parent)


def _format_complex(value: complex) -> str:
    if value.imag == 0.0:
        return repr(value.real)
    sign = "-" if math.copysign(1.0, value.imag) < 0 else "+"
    return f"{value.real!r}{sign}{abs(value.imag)!r}j"


def render_scenario(config: ScenarioConfig) -> str:
    """Render one ``key=value`` per line; parsing the result gives back ``config``."""
    parts = []
    for key in _RENDER_ORDER:
        value = getattr(config, key)
        if value is None or value == ():
            continue
        if key == "amplitudes":
            text = ",".join(_format_complex(complex(a)) for a in value)
        elif key == "force_parity":
            text = ",".join(value)
        elif key == "salvage":
            text = "true" if value else "false"
        else:
            text = str(value)
        parts.append(f"{key}={text}")
    return "\n".join(parts) + "\n"


def scenario_to_dict(config: ScenarioConfig) -> Dict[str, Any]:
    """JSON-friendly echo of a scenario."""
    result: Dict[str, Any] = {}
    for key in _RENDER_ORDER:
        value = getattr(config, key)
        if key == "amplitudes" and value is not None:
            value = [[complex(a).real, complex(a).imag] for a in value]
        elif key == "force_parity":
            value = list(value)
        result[key] = value
    return result
