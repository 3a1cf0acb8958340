"""Independent reference implementations the library is checked against.

Everything here is deliberately naive: sorted lists, running sums and linear
scans. None of it shares code with the package.
"""

from __future__ import annotations

import bisect
import math


class SortedListCdf:
    """Weighted empirical CDF kept in a plain sorted list."""

    def __init__(self) -> None:
        self.values: list[float] = []
        self.weights: list[float] = []

    def insert(self, value: float, weight: float) -> None:
        if weight == 0.0:
            return
        i = bisect.bisect_left(self.values, value)
        if i < len(self.values) and self.values[i] == value:
            self.weights[i] += weight
        else:
            self.values.insert(i, value)
            self.weights.insert(i, weight)

    def delete(self, value: float, weight: float) -> None:
        i = bisect.bisect_left(self.values, value)
        assert i < len(self.values) and self.values[i] == value
        remaining = self.weights[i] - weight
        if remaining <= 1e-12:
            del self.values[i]
            del self.weights[i]
        else:
            self.weights[i] = remaining

    def total(self) -> float:
        return sum(self.weights)

    def quantile(self, q: float) -> float:
        """Smallest value whose cumulative weight reaches q * total."""
        assert self.values
        if q <= 0.0:
            return -math.inf
        target = q * self.total()
        cum = 0.0
        for value, weight in zip(self.values, self.weights):
            cum += weight
            if cum >= target:
                return value
        return self.values[-1]

    def cdf_at(self, t: float) -> float:
        if not self.values:
            return 0.0
        cum = 0.0
        for value, weight in zip(self.values, self.weights):
            if value <= t:
                cum += weight
        return cum / self.total()


def popcount_intersection(s: int, y: int, k: int) -> int:
    """Bit-loop |S ∩ y| over k classes."""
    n = 0
    for i in range(k):
        if (s >> i) & 1 and (y >> i) & 1:
            n += 1
    return n


def popcount_difference(s: int, y: int, k: int) -> int:
    """Bit-loop |S \\ y| over k classes."""
    n = 0
    for i in range(k):
        if (s >> i) & 1 and not (y >> i) & 1:
            n += 1
    return n


def weighted_hits(s: int, y: int, w, present: bool) -> float:
    """Bit-loop sum of w[k] over k in S with y_k equal to ``present``."""
    total = 0.0
    for i in range(len(w)):
        if (s >> i) & 1 and ((y >> i) & 1) == int(present):
            total += w[i]
    return total
