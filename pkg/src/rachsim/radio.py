"""Path loss, open-loop preamble power and per-opportunity collision resolution."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .prach import RaParameters
from .topology import link_distance_m

SPEED_OF_LIGHT = 299_792_458.0
UE_MAX_POWER_DBM = 23.0
URBAN_EXPONENT = 3.76
# Tolerance when comparing received power against the detection threshold.
_POWER_EPS_DB = 1e-9


def free_space_loss_1m_db(carrier_hz: float) -> float:
    """Friis loss at 1 m: 20*log10(f) - 147.55."""
    return 20.0 * math.log10(carrier_hz) + 20.0 * math.log10(4 * math.pi / SPEED_OF_LIGHT)


@dataclass(frozen=True)
class PathLossModel:
    """Log-distance model anchored at the free-space loss 1 m from the antenna."""

    carrier_hz: float = 740e6
    exponent: float = URBAN_EXPONENT
    reference_loss_db: float | None = None

    def __post_init__(self):
        if self.reference_loss_db is None:
            object.__setattr__(self, "reference_loss_db", free_space_loss_1m_db(self.carrier_hz))
        if self.exponent <= 0:
            raise ValueError("path loss exponent must be positive")

    def __call__(self, distance_m):
        return path_loss_db(self, distance_m)


def path_loss_db(model: PathLossModel, distance_m):
    """Loss in dB; distances below 1 m are clamped to 1 m. Accepts arrays."""
    d = np.maximum(np.asarray(distance_m, dtype=float), 1.0)
    loss = model.reference_loss_db + 10.0 * model.exponent * np.log10(d)
    return float(loss) if loss.ndim == 0 else loss


def preamble_tx_power(params: RaParameters, attempt_no: int, pl_serving_db: float,
                      max_power_dbm: float = UE_MAX_POWER_DBM) -> float:
    if attempt_no < 1:
        raise ValueError("attempt_no starts at 1")
    p = (params.preamble_initial_target_power_dbm
         + (attempt_no - 1) * params.power_ramping_step_db
         + pl_serving_db)
    return min(p, max_power_dbm)


@dataclass(frozen=True)
class PreambleTransmission:
    ue_id: int
    target_cell_id: int
    preamble_seq: int
    attempt_no: int
    tx_power_dbm: float


class BucketState(enum.Enum):
    IDLE = "idle"
    DETECTED = "detected"
    COLLIDED = "collided"


@dataclass(frozen=True)
class Bucket:
    """Result for one (cell, preamble sequence) pair.

    ``detected`` holds the single decoded UE, if any; ``collided`` the UEs
    whose preambles were lost. With capture enabled both can be set.
    """

    detected: int | None = None
    collided: tuple = ()

    @property
    def state(self) -> BucketState:
        if self.collided:
            return BucketState.COLLIDED
        if self.detected is not None:
            return BucketState.DETECTED
        return BucketState.IDLE

    @property
    def arrivals(self) -> int:
        return len(self.collided) + (self.detected is not None)


_IDLE = Bucket()


@dataclass
class OpportunityOutcome:
    """Per (cell, seq) buckets; pairs without above-threshold arrivals are idle."""

    buckets: dict = field(default_factory=dict)

    def __getitem__(self, key) -> Bucket:
        return self.buckets.get(key, _IDLE)

    def detected_at(self, cell_id: int, seq: int, ue_id: int) -> bool:
        return self[(cell_id, seq)].detected == ue_id

    @property
    def collisions(self) -> int:
        """Lost preambles: every arrival that ended up in a collided set."""
        return sum(len(b.collided) for b in self.buckets.values())


def resolve_opportunity(transmissions, cells, ues, model: PathLossModel, *,
                        threshold_dbm: float = -104.0,
                        capture_margin_db: float | None = None,
                        path_loss=None) -> OpportunityOutcome:
    """Resolve one RA opportunity shared by ``cells`` on one carrier.

    Every transmission is heard at every listening cell where it arrives
    above ``threshold_dbm``, regardless of its target. ``ues`` maps ue id to
    UeNode; ``path_loss`` optionally supplies a precomputed loss lookup
    ``path_loss[ue_id, cell_id]``.
    """
    if not transmissions or not cells:
        return OpportunityOutcome()
    ue_ids = np.array([tx.ue_id for tx in transmissions])
    cell_ids = np.array([c.id for c in cells])
    if path_loss is not None:
        loss = np.asarray(path_loss)[np.ix_(ue_ids, cell_ids)]
    else:
        loss = np.array([[path_loss_db(model, link_distance_m(ues[tx.ue_id], c)) for c in cells]
                         for tx in transmissions], dtype=float).reshape(len(transmissions), len(cells))
    power = np.array([tx.tx_power_dbm for tx in transmissions], dtype=float)
    rx = power[:, None] - loss
    heard_tx, heard_cell = np.nonzero(rx + _POWER_EPS_DB >= threshold_dbm)

    arrivals = {}
    for i, j in zip(heard_tx.tolist(), heard_cell.tolist()):
        tx = transmissions[i]
        arrivals.setdefault((int(cell_ids[j]), tx.preamble_seq), []).append((float(rx[i, j]), tx.ue_id))

    out = OpportunityOutcome()
    for key, heard in arrivals.items():
        if len(heard) == 1:
            out.buckets[key] = Bucket(detected=heard[0][1])
            continue
        ranked = sorted(heard, key=lambda a: (-a[0], a[1]))
        if capture_margin_db is not None and ranked[0][0] - ranked[1][0] >= capture_margin_db:
            out.buckets[key] = Bucket(detected=ranked[0][1],
                                      collided=tuple(sorted(u for _, u in ranked[1:])))
        else:
            out.buckets[key] = Bucket(collided=tuple(sorted(u for _, u in heard)))
    return out
