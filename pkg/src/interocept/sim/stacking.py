"""Weight-balanced pallet stacking: greedy lighter-side placement."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from ..errors import EmptyBins


class Orientation(Enum):
    RIGHT_SIDE_UP = "right_side_up"
    UPSIDE_DOWN = "upside_down"


class Side(Enum):
    LEFT = "left"
    RIGHT = "right"


@dataclass(frozen=True)
class BinSpec:
    id: str
    weight: float  # kg
    orientation: Orientation

    def __post_init__(self):
        if self.weight <= 0:
            raise ValueError(f"bin {self.id!r} weight must be > 0")


@dataclass(frozen=True)
class Placement:
    bin_id: str
    side: Side
    flip_applied: bool
    order: int

    def to_json_dict(self) -> dict:
        return {
            "bin_id": self.bin_id,
            "side": self.side.value,
            "flip_applied": self.flip_applied,
            "order": self.order,
        }


def plan_stack(bins) -> tuple[list[Placement], float]:
    """Place bins in arrival order, each onto the lighter side (ties go Left).

    Bins arriving right side up pass the flip station first. Returns the
    placements plus the final left/right weight imbalance in kg; the greedy
    rule bounds that imbalance by the heaviest single bin, and for
    equal-weight bins it degenerates to strict L/R alternation.
    """
    bins = list(bins)
    if not bins:
        raise EmptyBins("no bins to stack")
    left = right = 0.0
    placements = []
    for order, spec in enumerate(bins):
        if left <= right:
            side = Side.LEFT
            left += spec.weight
        else:
            side = Side.RIGHT
            right += spec.weight
        placements.append(Placement(
            spec.id, side, spec.orientation is Orientation.RIGHT_SIDE_UP, order))
    return placements, abs(left - right)
