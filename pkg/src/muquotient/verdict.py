"""Three-way membership verdicts with an explicit numeric margin."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

DEFAULT_MARGIN = 1e-7


class Verdict(str, enum.Enum):
    INSIDE = "Inside"
    OUTSIDE = "Outside"
    BOUNDARY = "Boundary"


@dataclass(frozen=True)
class MembershipVerdict:
    """``margin`` is the slack by which the deciding inequality held (0 for Boundary).

    ``certificate`` is a plain dict: worst boundary point, offending root, or
    the trace of a sub-oracle, depending on who produced the verdict.
    """

    verdict: Verdict
    margin: float
    certificate: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "verdict", Verdict(self.verdict))
        object.__setattr__(self, "margin", max(0.0, float(self.margin)))

    @property
    def inside(self) -> bool:
        return self.verdict is Verdict.INSIDE

    @property
    def outside(self) -> bool:
        return self.verdict is Verdict.OUTSIDE


def banded(slack: float, margin: float) -> Verdict:
    """Inside if slack > margin, Outside if slack < -margin, else Boundary."""
    if slack > margin:
        return Verdict.INSIDE
    if slack < -margin:
        return Verdict.OUTSIDE
    return Verdict.BOUNDARY
