"""Decimal formatting shared by the text outputs (half-up, '.' separator)."""

from __future__ import annotations

from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction

_CENT = Decimal("0.01")


def fixed2(value: float) -> str:
    # repr() gives the shortest round-tripping decimal, so 505.385 rounds as written
    return str(Decimal(repr(float(value))).quantize(_CENT, rounding=ROUND_HALF_UP))


def percent_shares(counts: list[int]) -> list[str]:
    """Two-decimal percentages of ``counts`` that add up to exactly 100.00.

    Each share starts at its half-up rounded value; if the rounded values do
    not close to 100.00, single hundredths are moved to the shares whose
    rounding error was largest in the needed direction.
    """
    total = sum(counts)
    if not counts or total == 0:
        return ["0.00"] * len(counts)
    exact = [Fraction(10000 * c, total) for c in counts]
    units = [int(q + Fraction(1, 2)) for q in exact]  # half-up, q >= 0
    drift = 10000 - sum(units)
    if drift:
        step = 1 if drift > 0 else -1
        # residual = exact - rounded; raise the most under-rounded, lower the most over-rounded
        order = sorted(range(len(counts)), key=lambda i: (-(exact[i] - units[i]) * step, i))
        for i in order[: abs(drift)]:
            units[i] += step
    return [f"{u // 100}.{u % 100:02d}" for u in units]
