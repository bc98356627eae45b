"""Radio time arithmetic and PRACH-ConfigIndex semantics (FDD, frame structure type 1)."""
from __future__ import annotations

import enum
from dataclasses import dataclass

SUBFRAMES_PER_FRAME = 10
SFN_PERIOD = 1024
SUBFRAMES_PER_SFN_CYCLE = SFN_PERIOD * SUBFRAMES_PER_FRAME

#: PRACH-ConfigIndex values usable with format 0 on even frames only.
USABLE_INDICES = (0, 1, 2, 15)


class ConfigurationError(ValueError):
    """Raised for undefined or reserved configuration values."""


class Parity(enum.Enum):
    EVEN = "even"
    ODD = "odd"
    ANY = "any"


@dataclass(frozen=True, order=True)
class RadioTime:
    sfn: int
    subframe: int

    def __post_init__(self):
        if not 0 <= self.sfn < SFN_PERIOD:
            raise ValueError(f"sfn out of range: {self.sfn}")
        if not 0 <= self.subframe < SUBFRAMES_PER_FRAME:
            raise ValueError(f"subframe out of range: {self.subframe}")

    @classmethod
    def from_absolute(cls, t: int) -> "RadioTime":
        """Derive the radio time of an unbounded absolute subframe counter."""
        frame, sf = divmod(int(t), SUBFRAMES_PER_FRAME)
        return cls(frame % SFN_PERIOD, sf)

    @property
    def total_subframes(self) -> int:
        """Position within one SFN wrap epoch (0..10239)."""
        return self.sfn * SUBFRAMES_PER_FRAME + self.subframe


@dataclass(frozen=True)
class PrachOccasionRule:
    format: int
    parity: Parity
    subframes: frozenset

    def __post_init__(self):
        if not self.subframes:
            raise ValueError("occasion rule needs at least one subframe")


# Subframe pattern shared by the four 16-row blocks of the FDD table.
_BLOCK_PATTERN = (
    (Parity.EVEN, (1,)),
    (Parity.EVEN, (4,)),
    (Parity.EVEN, (7,)),
    (Parity.ANY, (1,)),
    (Parity.ANY, (4,)),
    (Parity.ANY, (7,)),
    (Parity.ANY, (1, 6)),
    (Parity.ANY, (2, 7)),
    (Parity.ANY, (3, 8)),
    (Parity.ANY, (1, 4, 7)),
    (Parity.ANY, (2, 5, 8)),
    (Parity.ANY, (3, 6, 9)),
    (Parity.ANY, (0, 2, 4, 6, 8)),
    (Parity.ANY, (1, 3, 5, 7, 9)),
    (Parity.ANY, tuple(range(10))),
    (Parity.EVEN, (9,)),
)

# Rows marked N/A in the FDD table.
_RESERVED = frozenset({30, 46, 60, 61, 62})


def _build_table():
    table = {}
    for fmt in range(4):
        for row, (parity, sfs) in enumerate(_BLOCK_PATTERN):
            index = 16 * fmt + row
            if index not in _RESERVED:
                table[index] = PrachOccasionRule(fmt, parity, frozenset(sfs))
    return table


_TABLE = _build_table()


def defined_indices():
    return sorted(_TABLE)


def check_index(index) -> int:
    """Validate a PRACH-ConfigIndex value and return it as ``int``.

    Raises ConfigurationError for values outside 0..63 or reserved rows.
    """
    try:
        value = int(index)
    except (TypeError, ValueError):
        raise ConfigurationError(f"PRACH-ConfigIndex is not an integer: {index!r}") from None
    if value != index and not isinstance(index, str):
        raise ConfigurationError(f"PRACH-ConfigIndex is not an integer: {index!r}")
    if not 0 <= value <= 63:
        raise ConfigurationError(f"PRACH-ConfigIndex out of range 0..63: {value}")
    if value in _RESERVED:
        raise ConfigurationError(f"PRACH-ConfigIndex {value} is reserved for FDD")
    return value


def occasion_rule(index) -> PrachOccasionRule:
    return _TABLE[check_index(index)]


def format_of_index(index) -> int:
    return occasion_rule(index).format


def is_ra_opportunity(rule: PrachOccasionRule, t: RadioTime) -> bool:
    if t.subframe not in rule.subframes:
        return False
    if rule.parity is Parity.ANY:
        return True
    even = t.sfn % 2 == 0
    return even if rule.parity is Parity.EVEN else not even


def next_opportunity_abs(rule: PrachOccasionRule, after: int) -> int:
    """Earliest absolute subframe strictly after ``after`` that is an RA opportunity.

    SFN_PERIOD is even, so frame-count parity equals SFN parity and the
    absolute counter never needs to be wrapped.
    """
    t = after + 1
    # at most two frames away for any nonempty rule
    for _ in range(2 * SUBFRAMES_PER_FRAME + 1):
        frame, sf = divmod(t, SUBFRAMES_PER_FRAME)
        if sf in rule.subframes and (
            rule.parity is Parity.ANY
            or (frame % 2 == 0) == (rule.parity is Parity.EVEN)
        ):
            return t
        t += 1
    raise AssertionError("unreachable: rule has no opportunity")


def next_opportunity(rule: PrachOccasionRule, after: RadioTime) -> RadioTime:
    t = next_opportunity_abs(rule, after.total_subframes)
    return RadioTime.from_absolute(t)


@dataclass(frozen=True)
class RaParameters:
    """SIB2 random access parameters driving the UE procedure."""

    num_ra_preambles: int = 52
    power_ramping_step_db: float = 2.0
    preamble_initial_target_power_dbm: float = -104.0
    preamble_trans_max: int = 10
    ra_response_window_sf: int = 10
    contention_resolution_timer_sf: int = 64
    # Largest backoff indicator value, 960 ms.
    backoff_max_sf: int = 960

    def __post_init__(self):
        for name in ("num_ra_preambles", "preamble_trans_max",
                     "ra_response_window_sf", "contention_resolution_timer_sf"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"ra.{name} must be >= 1")
        if self.backoff_max_sf < 0:
            raise ConfigurationError("ra.backoff_max_sf must be >= 0")
        if self.power_ramping_step_db < 0:
            raise ConfigurationError("ra.power_ramping_step_db must be >= 0")
