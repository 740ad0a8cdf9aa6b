"""Interval stabbing: find a point covered by the most interval unions.

Each measurement contributes a finite union of disjoint closed intervals on
the real line, and the goal is a coordinate contained in intervals of as many
distinct owners as possible. Solved by sorting endpoints and scanning: with
closed intervals the optimum is always attained at some interval start, and
the count just after the k-th smallest start equals ``(k+1) - #{ends < start}``.
This is the classic sort-and-sweep with starts processed before ends at equal
coordinates, so touching intervals such as [0,1] and [1,2] both count at 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["Interval", "IntervalUnion", "stab_max", "stab_count_at"]


@dataclass(frozen=True)
class Interval:
    """Closed interval [lo, hi]; degenerate single points are allowed."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)):
            raise ValueError(f"interval endpoints must be finite, got [{self.lo}, {self.hi}]")
        if self.lo > self.hi:
            raise ValueError(f"interval endpoints out of order: [{self.lo}, {self.hi}]")

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi


@dataclass(frozen=True)
class IntervalUnion:
    """Disjoint union of closed intervals belonging to one measurement.

    Components are normalized at construction: sorted by left endpoint and
    merged whenever they overlap or touch, so any coordinate lies in at most
    one component. That makes per-owner deduplication free during stabbing.
    """

    owner: int
    components: tuple[Interval, ...] = field(default_factory=tuple)

    def __post_init__(self):
        merged = _merge(self.components)
        object.__setattr__(self, "components", merged)

    def __len__(self) -> int:
        return len(self.components)

    def contains(self, x: float) -> bool:
        return any(c.contains(x) for c in self.components)


def _merge(components) -> tuple[Interval, ...]:
    parts = sorted(components, key=lambda c: (c.lo, c.hi))
    merged: list[Interval] = []
    for c in parts:
        if merged and c.lo <= merged[-1].hi:
            if c.hi > merged[-1].hi:
                merged[-1] = Interval(merged[-1].lo, c.hi)
        else:
            merged.append(Interval(c.lo, c.hi))
    return tuple(merged)


def _stab_flat(owners: np.ndarray, lo: np.ndarray, hi: np.ndarray, want_members: bool = True):
    """Stab flat component arrays; owners may repeat across disjoint pieces.

    Returns (omega, count, stabbed_owner_array). Requires that pieces of the
    same owner are disjoint and non-touching, so interval counts equal owner
    counts at any coordinate.
    """
    if lo.size == 0:
        return 0.0, 0, np.empty(0, dtype=np.int64)
    starts = np.sort(lo)
    ends = np.sort(hi)
    # count of intervals covering the k-th start: starts so far minus ends
    # strictly before it (closed intervals keep ends equal to the start).
    counts = np.arange(1, starts.size + 1) - np.searchsorted(ends, starts, side="left")
    best = int(np.argmax(counts))
    omega = float(starts[best])
    count = int(counts[best])
    if not want_members:
        return omega, count, np.empty(0, dtype=np.int64)
    stabbed = owners[(lo <= omega) & (omega <= hi)]
    return omega, count, np.unique(stabbed)


def _flatten(items) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    owners, lo, hi = [], [], []
    for union in items:
        if len(union) == 0:
            raise ValueError(f"interval union of owner {union.owner} is empty")
        for c in union.components:
            owners.append(union.owner)
            lo.append(c.lo)
            hi.append(c.hi)
    return (
        np.asarray(owners, dtype=np.int64),
        np.asarray(lo, dtype=np.float64),
        np.asarray(hi, dtype=np.float64),
    )


def stab_max(items) -> tuple[float, np.ndarray]:
    """Coordinate hitting the most owners, and the owners it hits.

    Args:
        items: sequence of non-empty :class:`IntervalUnion`.

    Returns:
        ``(omega, stabbed)`` where ``omega`` is the smallest coordinate
        achieving the maximum count and ``stabbed`` is the sorted array of
        owner ids whose union contains ``omega``. Each owner counts once even
        if several of its components would contain ``omega``. Empty input
        yields ``(0.0, [])``.
    """
    items = list(items)
    if not items:
        return 0.0, np.empty(0, dtype=np.int64)
    owners, lo, hi = _flatten(items)
    omega, _, stabbed = _stab_flat(owners, lo, hi)
    return omega, stabbed


def stab_count_at(items, omega: float) -> int:
    """Number of owners whose union contains ``omega``."""
    count = 0
    for union in items:
        if union.contains(omega):
            count += 1
    return count
