"""Probability intervals and the Frechet/Boole primitives the bound theorems share.

Every theorem in the engine is a max over lower-bound candidates intersected
with a min over upper-bound candidates; this module owns the interval type,
the two Frechet primitives, and the intersection rule (including the
infeasibility check that fires when a lower candidate exceeds every upper
candidate by more than numerical noise).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

# Slack for infeasibility detection; float error accumulates across the
# recursion but stays far below this.
EPS_NUM = 1e-9


class EmptySequence(ValueError):
    """A bound primitive was called with no arguments."""


class InfeasibleInterval(ValueError):
    """A lower bound exceeded an upper bound by more than EPS_NUM."""

    def __init__(self, lo: float, hi: float, lo_label: str = "lower", hi_label: str = "upper"):
        self.lo = lo
        self.hi = hi
        self.lo_label = lo_label
        self.hi_label = hi_label
        super().__init__(
            f"infeasible interval: {lo_label} = {lo!r} exceeds {hi_label} = {hi!r}"
        )


@dataclass(frozen=True, slots=True)
class Interval:
    """A [lo, hi] identification interval; both ends are probabilities."""

    lo: float
    hi: float

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def midpoint(self) -> float:
        return (self.lo + self.hi) / 2.0

    def contains(self, value: float, eps: float = EPS_NUM) -> bool:
        return self.lo - eps <= value <= self.hi + eps

    def contains_interval(self, other: "Interval", eps: float = EPS_NUM) -> bool:
        return self.lo - eps <= other.lo and other.hi <= self.hi + eps

    def scaled_by(self, divisor: float) -> "Interval":
        """Divide both ends by an evidence probability and re-clamp.

        This is the conditioning rule: bounds of P(A | e) are the bounds of
        P(A, e) divided by P(e).
        """
        return make_interval(self.lo / divisor, self.hi / divisor)

    def __iter__(self):
        yield self.lo
        yield self.hi


def make_interval(lo: float, hi: float, lo_label: str = "lower", hi_label: str = "upper") -> Interval:
    """Clamp raw bound values into [0, 1] and reject genuine crossings.

    Raw candidates may be negative (the theorems compute things like
    sum - k + 1 before the max with 0) or may cross by a few ulps after a
    division; a crossing beyond EPS_NUM means the data itself is
    inconsistent and is reported as such.
    """
    if lo > hi + EPS_NUM:
        raise InfeasibleInterval(lo, hi, lo_label, hi_label)
    lo_c = min(1.0, max(0.0, lo))
    hi_c = min(1.0, max(0.0, hi))
    if lo_c > hi_c:
        # Within noise; widen rather than guess a side.
        lo_c, hi_c = hi_c, lo_c
    return Interval(lo_c, hi_c)


def frechet_lower(ps: Sequence[float]) -> float:
    """max{0, sum(ps) - (len(ps) - 1)}: the Frechet lower bound of a conjunction."""
    if len(ps) == 0:
        raise EmptySequence("frechet_lower needs at least one probability")
    return max(0.0, sum(ps) - (len(ps) - 1))


def frechet_upper(ps: Sequence[float]) -> float:
    """min(ps): the Frechet upper bound of a conjunction."""
    if len(ps) == 0:
        raise EmptySequence("frechet_upper needs at least one probability")
    return min(ps)


def intersect(intervals: Iterable[Interval]) -> Interval:
    """Intersect candidate intervals: [max of lows, min of highs], clamped.

    Raises InfeasibleInterval naming the two witnesses when the intersection
    is empty beyond EPS_NUM.
    """
    items = list(intervals)
    if not items:
        raise EmptySequence("intersect needs at least one interval")
    lo_idx = max(range(len(items)), key=lambda idx: items[idx].lo)
    hi_idx = min(range(len(items)), key=lambda idx: items[idx].hi)
    return make_interval(
        items[lo_idx].lo,
        items[hi_idx].hi,
        lo_label=f"lower of interval #{lo_idx}",
        hi_label=f"upper of interval #{hi_idx}",
    )
