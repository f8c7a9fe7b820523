"""Elliptic curves y^2 = x^3 + a x + b over Q: group law, canonical heights,
the Neron-Tate pairing and exact torsion certificates.

Canonical heights are normalized so that hhat(P) = h(x(P))/2 + O(1), and the
pairing satisfies <P, P> = hhat(P).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Iterator, Optional

from .canonical import CanonicalHeightValue, canonical_height_of_x
from .errors import ConfigError, Inconclusive, InvalidPoint
from .heights import ZERO_HEIGHT, HeightValue, height_rational

DEFAULT_TOL = 1e-10
# Mazur: a rational torsion point has order at most 12
TORSION_ORDER_BOUND = 16


@dataclass(frozen=True)
class CurvePoint:
    """A rational point; ``x is None`` encodes the origin O."""

    x: Optional[Fraction] = None
    y: Optional[Fraction] = None

    def __post_init__(self):
        if (self.x is None) != (self.y is None):
            raise InvalidPoint("affine points need both coordinates")
        if self.x is not None:
            object.__setattr__(self, "x", Fraction(self.x))
            object.__setattr__(self, "y", Fraction(self.y))

    @property
    def is_infinity(self) -> bool:
        return self.x is None

    def __str__(self) -> str:
        return format_curve_point(self)


O = CurvePoint()


def parse_curve_point(text: str) -> CurvePoint:
    """Parse ``"O"`` or ``"x,y"`` with integer or p/q coordinates."""
    text = text.strip()
    if text.upper() == "O":
        return O
    parts = [s.strip() for s in text.split(",")]
    if len(parts) != 2:
        raise InvalidPoint(f"cannot parse curve point {text!r}")
    try:
        return CurvePoint(Fraction(parts[0]), Fraction(parts[1]))
    except (ValueError, ZeroDivisionError) as exc:
        raise InvalidPoint(f"cannot parse curve point {text!r}") from exc


def format_curve_point(p: CurvePoint) -> str:
    if p.is_infinity:
        return "O"
    return f"{p.x},{p.y}"


@dataclass(frozen=True)
class TorsionResult:
    is_torsion: bool
    order: Optional[int]
    height: CanonicalHeightValue

    def __bool__(self) -> bool:
        return self.is_torsion


@dataclass(frozen=True)
class EllipticCurve:
    a: Fraction
    b: Fraction
    generators: tuple[CurvePoint, ...] = ()
    torsion_points: Optional[tuple[CurvePoint, ...]] = None
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "b", Fraction(self.b))
        object.__setattr__(self, "generators", tuple(self.generators))
        if self.torsion_points is not None:
            object.__setattr__(self, "torsion_points", tuple(self.torsion_points))
        if self.discriminant == 0:
            raise ValueError(f"singular curve: a={self.a}, b={self.b}")
        for p in self.generators + (self.torsion_points or ()):
            if not self.contains(p):
                raise InvalidPoint(f"{p} is not on {self}")

    def __str__(self) -> str:
        return f"y^2 = x^3 + ({self.a})x + ({self.b})"

    @property
    def discriminant(self) -> Fraction:
        return -16 * (4 * self.a**3 + 27 * self.b**2)

    def contains(self, p: CurvePoint) -> bool:
        if p.is_infinity:
            return True
        return p.y * p.y == p.x**3 + self.a * p.x + self.b

    def point(self, x, y) -> CurvePoint:
        p = CurvePoint(Fraction(x), Fraction(y))
        if not self.contains(p):
            raise InvalidPoint(f"({x}, {y}) is not on {self}")
        return p

    # group law

    def negate(self, p: CurvePoint) -> CurvePoint:
        return p if p.is_infinity else CurvePoint(p.x, -p.y)

    def add(self, p: CurvePoint, q: CurvePoint) -> CurvePoint:
        return _add(self.a, p, q)

    def subtract(self, p: CurvePoint, q: CurvePoint) -> CurvePoint:
        return self.add(p, self.negate(q))

    def multiply(self, n: int, p: CurvePoint) -> CurvePoint:
        if n < 0:
            return self.multiply(-n, self.negate(p))
        result, addend = O, p
        while n:
            if n & 1:
                result = self.add(result, addend)
            addend = self.add(addend, addend)
            n >>= 1
        return result

    # heights

    def naive_height(self, p: CurvePoint) -> HeightValue:
        return ZERO_HEIGHT if p.is_infinity else height_rational(p.x)

    def canonical_height(self, p: CurvePoint, tol: float = DEFAULT_TOL,
                         max_iterations: int = 40) -> CanonicalHeightValue:
        if tol <= 0:
            raise ValueError("tol must be positive")
        if p.is_infinity:
            return CanonicalHeightValue(0.0, 0.0, 0)
        return _canonical_cached(self.a, self.b, p.x, tol, max_iterations)

    def pairing(self, p: CurvePoint, q: CurvePoint, tol: float = DEFAULT_TOL) -> float:
        """Neron-Tate pairing, within 3*tol/2 of the true value.

        Exactly 0 when either argument has finite order.
        """
        if self.torsion_order(p) is not None or self.torsion_order(q) is not None:
            return 0.0
        h_sum = self.canonical_height(self.add(p, q), tol).value
        return (h_sum - self.canonical_height(p, tol).value
                - self.canonical_height(q, tol).value) / 2

    def torsion_order(self, p: CurvePoint, bound: int = TORSION_ORDER_BOUND) -> Optional[int]:
        """Exact order of ``p`` if it is at most ``bound``, else None."""
        return _torsion_order_cached(self.a, self.b, p, bound)

    def is_torsion(self, p: CurvePoint, tol: float = 1e-8) -> TorsionResult:
        ch = self.canonical_height(p, tol)
        if ch.value > tol:
            return TorsionResult(False, None, ch)
        order = self.torsion_order(p)
        if order is None:
            raise Inconclusive(
                f"hhat({p}) = {ch.value:.3g} <= tol but no order <= {TORSION_ORDER_BOUND}")
        return TorsionResult(True, order, ch)

    # sampling

    def mw_box_points(self, radius: int) -> Iterator[CurvePoint]:
        """Points sum(n_i G_i) + T with |n_i| <= radius, T over listed torsion."""
        for _, p in self.mw_box_entries(radius):
            yield p

    def mw_box_entries(self, radius: int) -> Iterator[tuple[tuple[int, ...], CurvePoint]]:
        """Like :meth:`mw_box_points`, also yielding the generator coefficients."""
        torsion = list(self.torsion_points or ())
        if O not in torsion:
            torsion.insert(0, O)
        multiples = [self._multiples(g, radius) for g in self.generators]
        seen = set()
        for coeffs in itertools.product(range(-radius, radius + 1), repeat=len(multiples)):
            base = O
            for table, n in zip(multiples, coeffs):
                base = self.add(base, table[n])
            for t in torsion:
                p = self.add(base, t)
                if p not in seen:
                    seen.add(p)
                    yield coeffs, p

    def _multiples(self, g: CurvePoint, radius: int) -> dict[int, CurvePoint]:
        table = {0: O}
        for n in range(1, radius + 1):
            table[n] = self.add(table[n - 1], g)
            table[-n] = self.negate(table[n])
        return table


@lru_cache(maxsize=1 << 16)
def _canonical_cached(a, b, x, tol, max_iterations):
    return canonical_height_of_x(a, b, x, tol, max_iterations)


def _add(a: Fraction, p: CurvePoint, q: CurvePoint) -> CurvePoint:
    # chord-tangent law; b only enters through the points themselves
    if p.is_infinity:
        return q
    if q.is_infinity:
        return p
    if p.x == q.x:
        if p.y != q.y or p.y == 0:
            return O
        slope = (3 * p.x * p.x + a) / (2 * p.y)
    else:
        slope = (q.y - p.y) / (q.x - p.x)
    x3 = slope * slope - p.x - q.x
    y3 = slope * (p.x - x3) - p.y
    return CurvePoint(x3, y3)


@lru_cache(maxsize=1 << 14)
def _torsion_order_cached(a, b, p, bound):
    q = p
    for n in range(1, bound + 1):
        if q.is_infinity:
            return n
        q = _add(a, q, p)
    return None


# curve config files


def _split_list(value: str) -> list[str]:
    return [item.strip() for item in value.split(";") if item.strip()]


def load_curve_config(path) -> EllipticCurve:
    """Read a key-value curve file (a, b, generators, torsion)."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read curve config {path}: {exc}") from exc
    return parse_curve_config(text, name=path.stem)


def parse_curve_config(text: str, name: str = "") -> EllipticCurve:
    fields = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in {"a", "b", "generators", "torsion"}:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        fields[key] = value
    if "a" not in fields or "b" not in fields:
        raise ConfigError("curve config needs both a and b")
    try:
        gens = tuple(parse_curve_point(s) for s in _split_list(fields.get("generators", "")))
        torsion = None
        if "torsion" in fields:
            torsion = tuple(parse_curve_point(s) for s in _split_list(fields["torsion"]))
        return EllipticCurve(Fraction(fields["a"]), Fraction(fields["b"]), gens, torsion, name=name)
    except ValueError as exc:
        raise ConfigError(f"invalid curve config: {exc}") from exc


def format_curve_config(curve: EllipticCurve) -> str:
    lines = [f"a = {curve.a}", f"b = {curve.b}"]
    lines.append("generators = " + "; ".join(map(format_curve_point, curve.generators)))
    if curve.torsion_points is not None:
        lines.append("torsion = " + "; ".join(map(format_curve_point, curve.torsion_points)))
    return "\n".join(lines) + "\n"
