"""Exact rational and projective arithmetic, and the logarithmic height on P^n(Q)."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce, total_ordering
from typing import Iterable, Union

from .errors import InvalidPoint

# Reduced p/q with q >= 1; Fraction already enforces both invariants.
BigRational = Fraction

Number = Union[int, Fraction, str]


def _log_positive(q: Fraction) -> float:
    # math.log accepts arbitrarily large ints, so split instead of float(q)
    return math.log(q.numerator) - math.log(q.denominator)


@total_ordering
@dataclass(frozen=True, eq=False)
class HeightValue:
    """A height in natural-log units.

    When ``exact`` is set, ``magnitude`` is the exact positive rational whose
    logarithm is ``value``. Sums of exact heights multiply magnitudes, so
    additivity and comparisons between exact heights never round.
    """

    value: float
    exact: bool = False
    magnitude: Fraction | None = None

    @classmethod
    def of_magnitude(cls, magnitude) -> "HeightValue":
        mag = Fraction(magnitude)
        if mag <= 0:
            raise ValueError("height magnitude must be positive")
        return cls(_log_positive(mag), True, mag)

    @classmethod
    def approx(cls, value: float) -> "HeightValue":
        return cls(float(value), False, None)

    def __add__(self, other: "HeightValue") -> "HeightValue":
        if not isinstance(other, HeightValue):
            return NotImplemented
        if self.exact and other.exact:
            return HeightValue.of_magnitude(self.magnitude * other.magnitude)
        return HeightValue.approx(self.value + other.value)

    def __neg__(self) -> "HeightValue":
        if self.exact:
            return HeightValue.of_magnitude(1 / self.magnitude)
        return HeightValue.approx(-self.value)

    def __sub__(self, other: "HeightValue") -> "HeightValue":
        return self + (-other)

    def scale(self, k: int) -> "HeightValue":
        """Multiply the height by an integer (a power of the magnitude)."""
        if self.exact and isinstance(k, int):
            return HeightValue.of_magnitude(self.magnitude ** k)
        return HeightValue.approx(k * self.value)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, HeightValue):
            return NotImplemented
        if self.exact and other.exact:
            return self.magnitude == other.magnitude
        return self.value == other.value

    def __lt__(self, other: "HeightValue") -> bool:
        if self.exact and other.exact:
            return self.magnitude < other.magnitude
        return self.value < other.value

    def __hash__(self) -> int:
        return hash(self.magnitude) if self.exact else hash(self.value)

    def __float__(self) -> float:
        return self.value


ZERO_HEIGHT = HeightValue.of_magnitude(1)


@dataclass(frozen=True)
class ProjPoint:
    """A point of P^n(Q) as coprime integers, first nonzero coordinate positive."""

    coordinates: tuple[int, ...]

    def __post_init__(self):
        c = self.coordinates
        if not c or not any(c):
            raise InvalidPoint("projective point needs a nonzero coordinate")
        if reduce(math.gcd, c) != 1 or next(x for x in c if x) < 0:
            raise InvalidPoint(f"{c} is not normalized; use normalize_point")

    @property
    def ambient_dim(self) -> int:
        return len(self.coordinates) - 1

    @property
    def max_abs(self) -> int:
        return max(abs(x) for x in self.coordinates)

    def __str__(self) -> str:
        return format_point(self)


def normalize_point(raw: Iterable[Number]) -> ProjPoint:
    """Return the normalized representative of a projective vector.

    Accepts integers, Fractions or strings such as ``"1/2"``.
    """
    qs = [Fraction(x) for x in raw]
    if not qs or not any(qs):
        raise InvalidPoint("all-zero vector is not a projective point")
    den = reduce(math.lcm, (q.denominator for q in qs), 1)
    ints = [int(q * den) for q in qs]
    g = reduce(math.gcd, ints)
    first = next(x for x in ints if x)
    if first < 0:
        g = -g
    return ProjPoint(tuple(x // g for x in ints))


def height_pn(p: ProjPoint) -> HeightValue:
    return HeightValue.of_magnitude(p.max_abs)


def height_rational(q) -> HeightValue:
    q = Fraction(q)
    return HeightValue.of_magnitude(max(abs(q.numerator), q.denominator))


def parse_point(text: str) -> ProjPoint:
    """Parse ``"3:2"`` style coordinates, re-normalizing on the way in."""
    parts = [s.strip() for s in text.split(":")]
    if len(parts) < 2 or not all(parts):
        raise InvalidPoint(f"cannot parse projective point {text!r}")
    try:
        return normalize_point(parts)
    except (ValueError, ZeroDivisionError) as exc:
        if isinstance(exc, InvalidPoint):
            raise
        raise InvalidPoint(f"cannot parse projective point {text!r}") from exc


def format_point(p: ProjPoint) -> str:
    return ":".join(str(x) for x in p.coordinates)
