"""Model varieties with explicit Picard lattices and closed-form Weil heights.

Supported models:

* ``p<n>`` -- projective space P^n (n <= 3), basis H.
* ``p1xp1`` -- P^1 x P^1, basis (F1, F2) with F1 = pr1^*O(1), so the class
  (a, b) has height a*h(x) + b*h(y).
* ``blowup_p2`` -- P^2 blown up at [0:0:1], basis (H, E). Points are their P^2
  images away from the center; the exceptional curve is never sampled.
* ``elliptic`` -- an elliptic curve, basis (degree,) plus a point component
  P0 standing for the class (P0) - (O).

Every class height is a fixed representative that is exactly linear in the
class vector. On the lattice models the height of a class at a point is
sum(c_j * log k_j) for small integers k_j (the point's *height key*), so
exact heights are logarithms of exact rationals.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Callable, Iterable, Iterator, Optional, Sequence, Union

from .elliptic import DEFAULT_TOL, O, CurvePoint, EllipticCurve, format_curve_point, parse_curve_point
from .errors import (InvalidPoint, ModelMismatch, NotPseudoEffective, UndefinedAtPoint,
                     UndefinedIntersection, UnknownCurve, UnknownMap)
from .heights import (HeightValue, ProjPoint, format_point, height_pn, normalize_point,
                      parse_point)

Scalar = Union[int, Fraction]
Vector = tuple

MAX_NOISE = 1.0


def _dot(u: Sequence, v: Sequence) -> Scalar:
    return sum(x * y for x, y in zip(u, v))


def _pair(matrix, u: Sequence, v: Sequence) -> Scalar:
    return sum(u[i] * matrix[i][j] * v[j] for i in range(len(u)) for j in range(len(v)))


def _clean(x):
    x = Fraction(x)
    return int(x) if x.denominator == 1 else x


# ---------------------------------------------------------------------------
# P^1 enumeration helpers shared by several models


def p1_points(bound: int) -> Iterator[ProjPoint]:
    """Normalized points (x0:x1) with |x_i| <= bound, grouped by max coordinate."""
    if bound < 1:
        return
    for c in ((1, 0), (0, 1), (1, 1), (1, -1)):
        yield ProjPoint(c)
    for k in range(2, bound + 1):
        for t in range(-k + 1, k):
            if math.gcd(k, t) == 1:
                yield ProjPoint((k, t))
        for s in range(1, k):
            if math.gcd(k, s) == 1:
                yield ProjPoint((s, k))
                yield ProjPoint((s, -k))


def _pn_points(n: int, bound: int) -> Iterator[ProjPoint]:
    """Normalized points of P^n with |x_i| <= bound, lexicographic in the raw tuple."""
    if n == 1:
        yield from p1_points(bound)
        return

    def tails(length):
        if length == 0:
            yield ()
            return
        for head in range(-bound, bound + 1):
            for rest in tails(length - 1):
                yield (head,) + rest

    for lead in range(n + 1):
        zeros = (0,) * lead
        for first in range(1, bound + 1):
            for rest in tails(n - lead):
                c = zeros + (first,) + rest
                if reduce(math.gcd, c) == 1:
                    yield ProjPoint(c)


def _mobius_upto(n: int) -> list[int]:
    mu = [1] * (n + 1)
    is_comp = [False] * (n + 1)
    primes = []
    mu[0] = 0
    for i in range(2, n + 1):
        if not is_comp[i]:
            primes.append(i)
            mu[i] = -1
        for p in primes:
            if i * p > n:
                break
            is_comp[i * p] = True
            if i % p == 0:
                mu[i * p] = 0
                break
            mu[i * p] = -mu[i]
    return mu


def pn_count_by_max(n: int, bound: int) -> list[int]:
    """counts[k] = number of points of P^n(Q) whose normalized max coordinate is k."""
    mu = _mobius_upto(bound)

    def primitive_in_box(k):
        # primitive vectors in [-k, k]^(n+1), halved for the sign normalization
        total = sum(mu[d] * ((2 * (k // d) + 1) ** (n + 1) - 1) for d in range(1, k + 1))
        return total // 2

    cumulative = [0] + [primitive_in_box(k) for k in range(1, bound + 1)]
    return [0] + [cumulative[k] - cumulative[k - 1] for k in range(1, bound + 1)]


# ---------------------------------------------------------------------------
# named curves


@dataclass(frozen=True)
class CurveClass:
    """A named curve on a model: its class, and optionally its points.

    ``points(bound)`` enumerates the curve's model points inside the sampling
    box; ``contains(P)`` decides membership. Curves without points (the
    exceptional curve) cannot be sampled along.
    """

    name: str
    vector: tuple
    points: Optional[Callable[[int], Iterator]] = field(default=None, compare=False)
    contains: Optional[Callable[[object], bool]] = field(default=None, compare=False)
    excludable: bool = True


# ---------------------------------------------------------------------------
# models


class ModelVariety:
    """Base class; concrete models below fill in the lattice data."""

    id: str
    basis_names: tuple[str, ...]
    intersection_matrix: tuple[tuple[int, ...], ...]
    nef_generators: tuple[tuple[int, ...], ...]
    effective_generators: tuple[tuple[int, ...], ...]
    is_surface: bool = False
    # log-height vectors of points span this cone (lattice models)
    height_cone_rays: tuple[tuple[int, ...], ...] = ()
    # curves whose points are never sampled
    unsampled_curves: tuple[str, ...] = ()
    noise: float = 0.0

    @property
    def picard_rank(self) -> int:
        return len(self.basis_names)

    @property
    def curve_classes(self) -> dict[str, CurveClass]:
        raise NotImplementedError

    @property
    def named_subvarieties(self) -> tuple[str, ...]:
        return tuple(name for name, c in self.curve_classes.items() if c.excludable)

    @property
    def is_lattice(self) -> bool:
        return True

    def __str__(self) -> str:
        return self.id

    # classes

    def divisor(self, vector: Iterable, point: Optional[CurvePoint] = None) -> "DivisorClass":
        return DivisorClass(self, tuple(_clean(x) for x in vector), point)

    def curve(self, name: str) -> CurveClass:
        try:
            return self.curve_classes[name]
        except KeyError:
            raise UnknownCurve(f"{self.id} has no curve named {name!r}; "
                               f"known: {sorted(self.curve_classes)}") from None

    # points

    def parse_point(self, text: str):
        raise NotImplementedError

    def format_point(self, p) -> str:
        raise NotImplementedError

    def contains_point(self, p) -> bool:
        raise NotImplementedError

    def enumerate(self, bound: int) -> Iterator:
        raise NotImplementedError

    def on_shell(self, p, bound: int) -> bool:
        return max(self.height_key(p)) == bound

    # heights

    def height_key(self, p) -> tuple[int, ...]:
        raise NotImplementedError

    def height_coefficients(self, d: "DivisorClass") -> tuple:
        """c with h_D(P) = sum(c_j * log key_j(P))."""
        raise NotImplementedError

    def key_on_shell(self, key: tuple[int, ...], bound: int) -> bool:
        return max(key) == bound

    def histogram(self, bound: int) -> dict[tuple[int, ...], int]:
        """Number of model points in the box per height key."""
        raise NotImplementedError

    def representative(self, key: tuple[int, ...]):
        """Some model point with the given height key."""
        raise NotImplementedError

    def _check_defined(self, d: "DivisorClass", p) -> None:
        pass

    def model_height(self, d: "DivisorClass", p) -> HeightValue:
        if not self.contains_point(p):
            raise InvalidPoint(f"{p} is not a point of {self.id}")
        self._check_defined(d, p)
        coeffs = self.height_coefficients(d)
        key = self.height_key(p)
        if all(isinstance(c, int) for c in coeffs):
            num = den = 1
            for c, k in zip(coeffs, key):
                if c > 0:
                    num *= k ** c
                elif c < 0:
                    den *= k ** -c
            h = HeightValue.of_magnitude(Fraction(num, den))
        else:
            h = HeightValue.approx(sum(float(c) * math.log(k) for c, k in zip(coeffs, key)))
        return self._add_noise(h, p)

    def _add_noise(self, h: HeightValue, p) -> HeightValue:
        if not self.noise:
            return h
        return HeightValue.approx(h.value + self.noise * _noise_shape(self._flat(p)))

    def _flat(self, p) -> tuple[int, ...]:
        raise NotImplementedError

    def with_noise(self, bound: float) -> "ModelVariety":
        """Same model with a fixed bounded function added to every class height."""
        if not 0 <= bound <= MAX_NOISE:
            raise ValueError(f"noise bound must lie in [0, {MAX_NOISE}]")
        clone = object.__new__(type(self))
        clone.__dict__.update(self.__dict__)
        clone.noise = float(bound)
        return clone

    def ample_comparison(self, d1: "DivisorClass", d2: "DivisorClass") -> tuple[float, float]:
        """(m, c) with h_{d2}(P) >= h_{d1}(P)/m - c on every model point."""
        c1, c2 = self.height_coefficients(d1), self.height_coefficients(d2)
        m = max(Fraction(_dot(c1, r)) / _dot(c2, r) for r in self.height_cone_rays)
        return float(m), 2 * self.noise * (1 + 1 / float(m))

    def __eq__(self, other):
        return isinstance(other, ModelVariety) and self.id == other.id and self.noise == other.noise

    def __hash__(self):
        return hash((self.id, self.noise))


def _noise_shape(coords: Sequence[int]) -> float:
    s = sum((i + 1) * c for i, c in enumerate(coords))
    return math.sin(s % 1_000_003)


class ProjectiveSpace(ModelVariety):
    def __init__(self, n: int):
        if not 1 <= n <= 3:
            raise ValueError("projective_space supports n = 1, 2, 3")
        self.n = n
        self.id = f"p{n}"
        self.basis_names = ("H",)
        self.intersection_matrix = ((1,),)
        self.nef_generators = ((1,),)
        self.effective_generators = ((1,),)
        self.is_surface = n == 2
        self.height_cone_rays = ((1,),)
        line = CurveClass(
            "line", (1,),
            points=lambda bound: (ProjPoint(p.coordinates + (0,) * (n - 1)) for p in p1_points(bound)),
            contains=lambda p: all(x == 0 for x in p.coordinates[2:]),
            excludable=n >= 2,
        )
        self._curves = {"line": line}

    @property
    def curve_classes(self):
        return self._curves

    def parse_point(self, text):
        p = parse_point(text)
        if p.ambient_dim != self.n:
            raise InvalidPoint(f"{text!r} is not a point of P^{self.n}")
        return p

    def format_point(self, p):
        return format_point(p)

    def contains_point(self, p):
        return isinstance(p, ProjPoint) and p.ambient_dim == self.n

    def enumerate(self, bound):
        return _pn_points(self.n, bound)

    def height_key(self, p):
        return (p.max_abs,)

    def height_coefficients(self, d):
        return d.vector

    def histogram(self, bound):
        counts = pn_count_by_max(self.n, bound)
        return {(k,): counts[k] for k in range(1, bound + 1) if counts[k]}

    def representative(self, key):
        return ProjPoint((key[0],) + (1,) * self.n) if key[0] > 1 else ProjPoint((1,) * (self.n + 1))

    def _flat(self, p):
        return p.coordinates


def _p1_on(pt: ProjPoint) -> Callable:
    return lambda q: q == pt


class P1xP1(ModelVariety):
    def __init__(self):
        self.id = "p1xp1"
        self.basis_names = ("F1", "F2")
        self.intersection_matrix = ((0, 1), (1, 0))
        self.nef_generators = ((1, 0), (0, 1))
        self.effective_generators = ((1, 0), (0, 1))
        self.is_surface = True
        self.height_cone_rays = ((1, 0), (0, 1))
        zero = ProjPoint((0, 1))
        self._curves = {
            # F1 = {x = 0} x P^1, a fiber of the first projection
            "F1": CurveClass("F1", (1, 0),
                             points=lambda bound: ((zero, y) for y in p1_points(bound)),
                             contains=lambda p: p[0] == zero),
            "F2": CurveClass("F2", (0, 1),
                             points=lambda bound: ((x, zero) for x in p1_points(bound)),
                             contains=lambda p: p[1] == zero),
            "diagonal": CurveClass("diagonal", (1, 1),
                                   points=lambda bound: ((t, t) for t in p1_points(bound)),
                                   contains=lambda p: p[0] == p[1]),
        }

    @property
    def curve_classes(self):
        return self._curves

    def parse_point(self, text):
        parts = text.split(",")
        if len(parts) != 2:
            raise InvalidPoint(f"p1xp1 points look like '3:2,5:1', got {text!r}")
        x, y = parse_point(parts[0]), parse_point(parts[1])
        if x.ambient_dim != 1 or y.ambient_dim != 1:
            raise InvalidPoint(f"{text!r} is not a point of P^1 x P^1")
        return (x, y)

    def format_point(self, p):
        return f"{format_point(p[0])},{format_point(p[1])}"

    def contains_point(self, p):
        return (isinstance(p, tuple) and len(p) == 2
                and all(isinstance(q, ProjPoint) and q.ambient_dim == 1 for q in p))

    def enumerate(self, bound):
        factor = list(p1_points(bound))
        for x in factor:
            for y in factor:
                yield (x, y)

    def height_key(self, p):
        return (p[0].max_abs, p[1].max_abs)

    def height_coefficients(self, d):
        return d.vector

    def histogram(self, bound):
        counts = pn_count_by_max(1, bound)
        return {(i, j): counts[i] * counts[j]
                for i in range(1, bound + 1) for j in range(1, bound + 1)}

    def representative(self, key):
        return (ProjPoint((key[0], 1)), ProjPoint((key[1], 1)))

    def _flat(self, p):
        return p[0].coordinates + p[1].coordinates


CENTER = ProjPoint((0, 0, 1))


class BlowupP2(ModelVariety):
    def __init__(self):
        self.id = "blowup_p2"
        self.basis_names = ("H", "E")
        self.intersection_matrix = ((1, 0), (0, -1))
        self.nef_generators = ((1, 0), (1, -1))
        self.effective_generators = ((0, 1), (1, -1))
        self.is_surface = True
        # (log k3, log k2) with 1 <= k2 <= k3
        self.height_cone_rays = ((1, 0), (1, 1))
        self.unsampled_curves = ("E",)

        def line_points(bound):
            for q in p1_points(bound):
                s, t = q.coordinates
                if abs(s + t) <= bound:
                    yield normalize_point((s, t, s + t))

        def fiber_points(bound):
            for q in p1_points(bound):
                s, t = q.coordinates
                if s:
                    yield ProjPoint((s, 0, t))

        self._curves = {
            "E": CurveClass("E", (0, 1), points=None, contains=lambda p: p == CENTER),
            # a general line, class H
            "L": CurveClass("L", (1, 0), points=line_points,
                            contains=lambda p: p.coordinates[0] + p.coordinates[1] == p.coordinates[2]),
            # strict transform of the line y = 0 through the center, class H - E
            "F": CurveClass("F", (1, -1), points=fiber_points,
                            contains=lambda p: p.coordinates[1] == 0),
        }

    @property
    def curve_classes(self):
        return self._curves

    def parse_point(self, text):
        p = parse_point(text)
        if p.ambient_dim != 2:
            raise InvalidPoint(f"{text!r} is not a point of P^2")
        if p == CENTER:
            raise InvalidPoint("the blow-up center is represented only by the curve E")
        return p

    def format_point(self, p):
        return format_point(p)

    def contains_point(self, p):
        return isinstance(p, ProjPoint) and p.ambient_dim == 2 and p != CENTER

    def enumerate(self, bound):
        for p in _pn_points(2, bound):
            if p != CENTER:
                yield p

    def height_key(self, p):
        x, y, z = p.coordinates
        g = math.gcd(x, y)
        return (p.max_abs, max(abs(x), abs(y)) // g)

    def height_coefficients(self, d):
        a, b = d.vector
        return (a + b, -b)

    def key_on_shell(self, key, bound):
        return key[0] == bound

    def on_shell(self, p, bound):
        return p.max_abs == bound

    def _check_defined(self, d, p):
        if p == CENTER and d.vector[1] != 0:
            raise UndefinedAtPoint("the E representative is undefined at the center")

    def histogram(self, bound):
        counts = pn_count_by_max(1, bound)
        hist: dict[tuple[int, int], int] = {}
        for g in range(1, bound + 1):
            # z values by |z|, coprime to g; z = 0 only when g = 1
            z_by_abs = [0] * (bound + 1)
            if g == 1:
                z_by_abs[0] = 1
            for t in range(1, bound + 1):
                if math.gcd(t, g) == 1:
                    z_by_abs[t] = 2
            below = [0] * (bound + 2)  # below[s] = number of z with |z| < s
            for t in range(bound + 1):
                below[t + 1] = below[t] + z_by_abs[t]
            for k2 in range(1, bound // g + 1):
                base = counts[k2]
                if not base:
                    continue
                gk = g * k2
                # |z| <= g*k2 gives k3 = g*k2
                n_low = below[gk + 1]
                if n_low:
                    hist[(gk, k2)] = hist.get((gk, k2), 0) + base * n_low
                for t in range(gk + 1, bound + 1):
                    if z_by_abs[t]:
                        hist[(t, k2)] = hist.get((t, k2), 0) + base * z_by_abs[t]
        return hist

    def representative(self, key):
        k3, k2 = key
        return ProjPoint((k2, 1, k3)) if k2 > 1 or k3 > 1 else ProjPoint((1, 1, 1))

    def _flat(self, p):
        return p.coordinates


class EllipticModel(ModelVariety):
    """An elliptic curve viewed as a model variety (rank-1 numerical lattice)."""

    def __init__(self, curve: EllipticCurve, tol: float = DEFAULT_TOL):
        self.elliptic_curve = curve
        self.tol = tol
        self.id = "elliptic"
        self.basis_names = ("deg",)
        self.intersection_matrix = ((1,),)
        self.nef_generators = ((1,),)
        self.effective_generators = ((1,),)
        self._curves = {
            "curve": CurveClass("curve", (1,), points=lambda radius: curve.mw_box_points(radius),
                                contains=lambda p: True, excludable=False),
        }

    @property
    def is_lattice(self):
        return False

    @property
    def curve_classes(self):
        return self._curves

    def parse_point(self, text):
        p = parse_curve_point(text)
        if not self.elliptic_curve.contains(p):
            raise InvalidPoint(f"{text!r} is not on {self.elliptic_curve}")
        return p

    def format_point(self, p):
        return format_curve_point(p)

    def contains_point(self, p):
        return isinstance(p, CurvePoint) and self.elliptic_curve.contains(p)

    def enumerate(self, bound):
        return self.elliptic_curve.mw_box_points(bound)

    def entries(self, bound):
        return self.elliptic_curve.mw_box_entries(bound)

    def model_height(self, d, p):
        if not self.contains_point(p):
            raise InvalidPoint(f"{p} is not on {self.elliptic_curve}")
        e = self.elliptic_curve
        (deg,) = d.vector
        value = 0.0
        if deg:
            value += float(deg) * e.canonical_height(p, self.tol).value
        p0 = d.point_component
        if p0 is not None and not p0.is_infinity:
            value += 2 * e.pairing(p, p0, self.tol)
        return self._add_noise(HeightValue.approx(value), p)

    def _flat(self, p):
        if p.is_infinity:
            return (0,)
        return (p.x.numerator, p.x.denominator, p.y.numerator, p.y.denominator)

    def ample_comparison(self, d1, d2):
        # |2<Q,P0>| <= (d/2) hhat(Q) + (2/d) hhat(P0) by Cauchy-Schwarz and AM-GM
        e = self.elliptic_curve
        (k1,), (k2,) = d1.vector, d2.vector

        def offset(d, deg):
            p0 = d.point_component
            if p0 is None or p0.is_infinity:
                return 0.0
            return 2 * e.canonical_height(p0, self.tol).value / float(deg)

        m = 3 * float(k1) / float(k2)
        c = float(k2) * offset(d1, k1) / (3 * float(k1)) + offset(d2, k2)
        return m, c + 2 * self.noise * (1 + 1 / m) + 1e-6

    def __eq__(self, other):
        return (isinstance(other, EllipticModel) and self.elliptic_curve == other.elliptic_curve
                and self.noise == other.noise)

    def __hash__(self):
        return hash((self.id, self.elliptic_curve, self.noise))


def get_model(model_id: str, curve: Optional[EllipticCurve] = None) -> ModelVariety:
    key = model_id.strip().lower()
    if key in {"p1", "p2", "p3"}:
        return ProjectiveSpace(int(key[1]))
    if key.startswith("projective_space"):
        digits = "".join(ch for ch in key if ch.isdigit())
        return ProjectiveSpace(int(digits or 2))
    if key == "p1xp1":
        return P1xP1()
    if key == "blowup_p2":
        return BlowupP2()
    if key == "elliptic":
        if curve is None:
            raise ValueError("the elliptic model needs a curve")
        return EllipticModel(curve)
    raise ValueError(f"unknown model {model_id!r}")


# ---------------------------------------------------------------------------
# divisor classes


@dataclass(frozen=True)
class DivisorClass:
    model: ModelVariety
    vector: tuple
    point_component: Optional[CurvePoint] = None

    def __post_init__(self):
        if len(self.vector) != self.model.picard_rank:
            raise ValueError(f"{self.model.id} classes have {self.model.picard_rank} coordinates")
        if self.point_component is not None and not isinstance(self.model, EllipticModel):
            raise ValueError("only elliptic classes carry a point component")
        if isinstance(self.model, EllipticModel):
            p0 = self.point_component if self.point_component is not None else O
            if not self.model.elliptic_curve.contains(p0):
                raise InvalidPoint(f"{p0} is not on the curve")
            object.__setattr__(self, "point_component", p0)

    def _same(self, other: "DivisorClass"):
        if self.model != other.model:
            raise ModelMismatch(f"{self.model.id} vs {other.model.id}")

    def __add__(self, other: "DivisorClass") -> "DivisorClass":
        self._same(other)
        vec = tuple(_clean(x + y) for x, y in zip(self.vector, other.vector))
        pt = None
        if isinstance(self.model, EllipticModel):
            pt = self.model.elliptic_curve.add(self.point_component, other.point_component)
        return DivisorClass(self.model, vec, pt)

    def __neg__(self) -> "DivisorClass":
        pt = None
        if isinstance(self.model, EllipticModel):
            pt = self.model.elliptic_curve.negate(self.point_component)
        return DivisorClass(self.model, tuple(-x for x in self.vector), pt)

    def __sub__(self, other: "DivisorClass") -> "DivisorClass":
        return self + (-other)

    def __rmul__(self, k) -> "DivisorClass":
        pt = None
        if isinstance(self.model, EllipticModel):
            if not isinstance(k, int):
                raise ValueError("elliptic classes scale by integers only")
            pt = self.model.elliptic_curve.multiply(k, self.point_component)
        return DivisorClass(self.model, tuple(_clean(k * x) for x in self.vector), pt)

    def __str__(self) -> str:
        text = ",".join(str(x) for x in self.vector)
        if isinstance(self.model, EllipticModel):
            text += f" + [{format_curve_point(self.point_component)}]"
        return text


@dataclass(frozen=True)
class ZariskiDecomposition:
    positive_part: DivisorClass
    negative_part: DivisorClass


# ---------------------------------------------------------------------------
# operations


def intersect(d1: DivisorClass, d2: Union[DivisorClass, CurveClass]) -> Scalar:
    """Lattice pairing d1 . d2; ``d2`` may also be a named curve class."""
    if isinstance(d2, CurveClass):
        if d2.name not in d1.model.curve_classes or d1.model.curve_classes[d2.name] != d2:
            raise ModelMismatch(f"curve {d2.name!r} does not live on {d1.model.id}")
        return _clean(_pair(d1.model.intersection_matrix, d1.vector, d2.vector))
    d1._same(d2)
    if isinstance(d1.model, EllipticModel):
        raise UndefinedIntersection(
            "on a curve, intersect a divisor with the curve class instead")
    return _clean(_pair(d1.model.intersection_matrix, d1.vector, d2.vector))


def _pairings_with_curves(d: DivisorClass) -> list[Scalar]:
    m = d.model.intersection_matrix
    return [_pair(m, d.vector, g) for g in d.model.effective_generators]


def is_nef(d: DivisorClass) -> bool:
    return all(x >= 0 for x in _pairings_with_curves(d))


def is_ample(d: DivisorClass) -> bool:
    if not all(x > 0 for x in _pairings_with_curves(d)):
        return False
    if d.model.is_surface:
        return _pair(d.model.intersection_matrix, d.vector, d.vector) > 0
    return True


def cone_coefficients(vector: Sequence, generators: Sequence[Sequence]) -> Optional[list[Fraction]]:
    """Nonnegative rational lambda with sum(lambda_i g_i) = vector, or None.

    Exact; handles rank <= 2 lattices, which covers every supported model.
    """
    v = [Fraction(x) for x in vector]
    gens = [[Fraction(x) for x in g] for g in generators]
    if len(v) == 1:
        for i, (g,) in enumerate(gens):
            if g != 0 and v[0] / g >= 0:
                lam = [Fraction(0)] * len(gens)
                lam[i] = v[0] / g
                return lam
        return [Fraction(0)] * len(gens) if v[0] == 0 else None
    if len(v) != 2:
        raise NotImplementedError("cone membership implemented for rank <= 2")
    # try every generator pair (and single generators) as a basis
    if not any(v):
        return [Fraction(0)] * len(gens)
    for i in range(len(gens)):
        g = gens[i]
        cross = g[0] * v[1] - g[1] * v[0]
        if cross == 0 and any(g):
            t = (v[0] / g[0]) if g[0] else (v[1] / g[1])
            if t >= 0:
                lam = [Fraction(0)] * len(gens)
                lam[i] = t
                return lam
        for j in range(i + 1, len(gens)):
            h = gens[j]
            det = g[0] * h[1] - g[1] * h[0]
            if det == 0:
                continue
            li = (v[0] * h[1] - v[1] * h[0]) / det
            lj = (g[0] * v[1] - g[1] * v[0]) / det
            if li >= 0 and lj >= 0:
                lam = [Fraction(0)] * len(gens)
                lam[i], lam[j] = li, lj
                return lam
    return None


def is_pseudo_effective(d: DivisorClass) -> bool:
    return cone_coefficients(d.vector, d.model.effective_generators) is not None


def is_effective(d: DivisorClass) -> bool:
    if isinstance(d.model, EllipticModel):
        (deg,) = d.vector
        if deg > 0:
            return True
        return deg == 0 and d.point_component.is_infinity
    if any(Fraction(x).denominator != 1 for x in d.vector):
        return False
    return is_pseudo_effective(d)


def numerically_equivalent(d1: DivisorClass, d2: DivisorClass) -> bool:
    d1._same(d2)
    return tuple(Fraction(x) for x in d1.vector) == tuple(Fraction(x) for x in d2.vector)


def model_height(d: DivisorClass, p) -> HeightValue:
    return d.model.model_height(d, p)


def restriction_degree(d: DivisorClass, curve_name: str) -> Scalar:
    return intersect(d, d.model.curve(curve_name))


def negative_curves(model: ModelVariety) -> list[tuple[int, ...]]:
    m = model.intersection_matrix
    return [g for g in model.effective_generators if _pair(m, g, g) < 0]


def zariski_decompose(d: DivisorClass) -> ZariskiDecomposition:
    """Split a pseudo-effective surface class into nef part + negative part.

    On the supported surfaces the negative curves are disjoint, so one pass
    subtracting (D.C / C^2) C for each curve C with D.C < 0 suffices.
    """
    model = d.model
    if not model.is_surface:
        raise ValueError(f"{model.id} is not a surface")
    if not is_pseudo_effective(d):
        raise NotPseudoEffective(f"{d} is not pseudo-effective on {model.id}")
    m = model.intersection_matrix
    neg = [Fraction(0)] * model.picard_rank
    for c in negative_curves(model):
        dc = _pair(m, d.vector, c)
        if dc < 0:
            coeff = Fraction(dc) / _pair(m, c, c)
            neg = [x + coeff * y for x, y in zip(neg, c)]
    pos = [Fraction(x) - y for x, y in zip(d.vector, neg)]
    return ZariskiDecomposition(model.divisor(pos), model.divisor(neg))


# ---------------------------------------------------------------------------
# morphisms between models


@dataclass(frozen=True)
class ModelMap:
    name: str
    source: ModelVariety
    target: ModelVariety
    apply: Callable = field(compare=False)
    # pullback of the hyperplane class of the target
    pullback_h: tuple = ()

    def pullback(self, d: DivisorClass) -> DivisorClass:
        if d.model != self.target:
            raise ModelMismatch(f"{self.name} pulls back classes from {self.target.id}")
        if self.name == "identity":
            return d
        (k,) = d.vector
        return self.source.divisor(tuple(k * x for x in self.pullback_h))


def segre(p) -> ProjPoint:
    (x0, x1), (y0, y1) = p[0].coordinates, p[1].coordinates
    return normalize_point((x0 * y0, x0 * y1, x1 * y0, x1 * y1))


def first_projection(p) -> ProjPoint:
    return p[0]


def blow_down(p: ProjPoint) -> ProjPoint:
    return p


def get_map(name: str, model: Optional[ModelVariety] = None) -> ModelMap:
    if name == "segre":
        return ModelMap("segre", P1xP1(), ProjectiveSpace(3), segre, (1, 1))
    if name == "proj1":
        return ModelMap("proj1", P1xP1(), ProjectiveSpace(1), first_projection, (1, 0))
    if name == "blowdown":
        return ModelMap("blowdown", BlowupP2(), ProjectiveSpace(2), blow_down, (1, 0))
    if name == "identity":
        if model is None:
            raise UnknownMap("the identity map needs a model")
        return ModelMap("identity", model, model, lambda p: p, ())
    raise UnknownMap(f"unknown map {name!r}; known: segre, proj1, blowdown, identity")


def pseudo_effective_threshold(v: DivisorClass, w: DivisorClass) -> Optional[Fraction]:
    """sup{alpha : v - alpha*w pseudo-effective}, exactly.

    Returns None when no alpha works or the set is unbounded above.
    """
    v._same(w)
    m = v.model.intersection_matrix
    # on every supported model the pseudo-effective cone is dual to the nef cone
    lo, hi = None, None
    for n in v.model.nef_generators:
        pv, pw = Fraction(_pair(m, v.vector, n)), Fraction(_pair(m, w.vector, n))
        if pw > 0:
            hi = pv / pw if hi is None else min(hi, pv / pw)
        elif pw < 0:
            lo = pv / pw if lo is None else max(lo, pv / pw)
        elif pv < 0:
            return None
    if hi is None or (lo is not None and lo > hi):
        return None
    return hi
