"""Doubling engine for canonical heights on y^2 = x^3 + a x + b over Q.

The value is the limit of h(x([2^m]P)) / (2 * 4^m), with h the logarithmic
height of the x-coordinate. Coordinates are kept exactly while they are
small. Once they grow past ``EXACT_BITS`` the engine stops materializing
them and tracks, for each doubling,

* the numerator and denominator modulo a power of the resultant R of the
  doubling map (the gcd cancelled at each step divides R, so this residue
  determines the cancellation exactly), and
* the real value of x and log of the denominator as certified intervals.

Both together reproduce log max(|num|, |den|) of the exact reduced
coordinates without ever forming them, so the sequence is the same one the
exact recurrence would produce.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from mpmath.ctx_iv import MPIntervalContext
from mpmath.libmp import to_float

from .errors import ConvergenceFailure

EXACT_BITS = 2048
SAFETY = 4
MIN_ITERATIONS = 3
BASE_PRECISION = 160
MAX_PRECISION = 2560


@dataclass(frozen=True)
class CanonicalHeightValue:
    value: float
    error_radius: float
    iterations: int


def _det(rows: list[list[int]]) -> int:
    # fraction-free Bareiss elimination
    m = [r[:] for r in rows]
    n = len(m)
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k]:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def doubling_resultant(a: int, b: int) -> int:
    """|Res| of the two quartic forms defining x([2]P) on an integral model."""
    f = [1, 0, -2 * a, -8 * b, a * a]
    g = [0, 4, 0, 4 * a, 4 * b]
    size = 8
    rows = [[0] * i + f + [0] * (size - 5 - i) for i in range(4)]
    rows += [[0] * i + g + [0] * (size - 5 - i) for i in range(4)]
    return abs(_det(rows))


def integral_model(a: Fraction, b: Fraction) -> tuple[int, int, int]:
    """Return (A, B, c) with x -> c^2 x mapping the curve onto y^2 = x^3 + A x + B."""
    c = math.lcm(a.denominator, b.denominator)
    return int(a * c**4), int(b * c**6), c


def _double_exact(a: int, b: int, u: int, w: int) -> tuple[int, int]:
    num = u**4 - 2 * a * u * u * w * w - 8 * b * u * w**3 + a * a * w**4
    den = 4 * w * (u**3 + a * u * w * w + b * w**3)
    if den == 0:
        return 1, 0  # the point at infinity
    g = math.gcd(num, den)
    num, den = num // g, den // g
    if den < 0:
        num, den = -num, -den
    return num, den


class _Precision(Exception):
    pass


def _upper(v) -> float:
    return to_float(v._mpi_[1], rnd="u")


def canonical_height_of_x(a: Fraction, b: Fraction, x: Fraction, tol: float,
                          max_iterations: int = 40) -> CanonicalHeightValue:
    """Certified canonical height of an affine point with x-coordinate ``x``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    prec = BASE_PRECISION
    while True:
        try:
            return _run(a, b, x, tol, max_iterations, prec)
        except _Precision:
            prec *= 2
            if prec > MAX_PRECISION:
                raise ConvergenceFailure(
                    "interval precision exhausted while tracking doublings") from None


def _run(a, b, x, tol, max_iterations, prec):
    A, B, c = integral_model(Fraction(a), Fraction(b))
    X = Fraction(x) * c * c
    ctx = MPIntervalContext()
    ctx.prec = prec

    def log_int(n: int):
        return ctx.log(ctx.mpf(n))

    def bounds(v):
        return v.a, v.b

    u, w = X.numerator, X.denominator
    seen = set()
    # S_m = h_m / (2 * 4^m) as (lo, hi) intervals
    s_prev = None
    c_max = 0.0
    exact = True
    modulus = resultant = None
    xr = logw = None

    for m in range(max_iterations + 1):
        if exact:
            if w == 0:
                return CanonicalHeightValue(0.0, 0.0, m)
            if (u, w) in seen:
                # periodic under doubling: a torsion point
                return CanonicalHeightValue(0.0, 0.0, m)
            seen.add((u, w))
            h = log_int(max(abs(u), w))
        s = h / (2 * ctx.mpf(4) ** m)
        lo, hi = bounds(s)
        if s_prev is not None:
            plo, phi_ = s_prev
            diff = max(_upper(abs(hi - plo)), _upper(abs(lo - phi_)))
            c_max = max(c_max, diff * 4.0 ** m)
        s_prev = (lo, hi)
        if m >= MIN_ITERATIONS:
            tail = SAFETY * c_max * 4.0 ** (-m) / 3.0
            half = _upper(hi - lo) / 2
            if half > tol / 4:
                raise _Precision()
            if tail + half <= tol:
                mid = _upper((lo + hi) / 2)
                return CanonicalHeightValue(mid, tail + half, m)
        if m == max_iterations:
            break

        # advance to [2^(m+1)]P
        if exact:
            if max(abs(u), w).bit_length() <= EXACT_BITS:
                u, w = _double_exact(A, B, u, w)
                continue
            exact = False
            resultant = doubling_resultant(A, B)
            modulus = resultant ** (max_iterations - m + 2)
            xr = ctx.mpf(u) / ctx.mpf(w)
            logw = log_int(w)
            u, w = u % modulus, w % modulus

        f = xr**3 + A * xr + B
        num_poly = xr**4 - 2 * A * xr**2 - 8 * B * xr + A * A
        flo, _ = bounds(f)
        if flo <= 0:
            raise _Precision()
        log_den = ctx.log(4) + 4 * logw + ctx.log(f)
        nlo, nhi = bounds(num_poly)
        if nlo > 0 or nhi < 0:
            log_num = 4 * logw + ctx.log(abs(num_poly))
            top = ctx.mpf([max(log_num.a, log_den.a), max(log_num.b, log_den.b)])
        else:
            # numerator sign unresolved; fine as long as it is dominated
            bound_num = 4 * logw + ctx.log(ctx.mpf(max(abs(nlo), abs(nhi))))
            if bound_num.b >= log_den.a:
                raise _Precision()
            top = log_den
        nm = (u**4 - 2 * A * u * u * w * w - 8 * B * u * w**3 + A * A * w**4) % modulus
        dm = (4 * w * (u**3 + A * u * w * w + B * w**3)) % modulus
        g = math.gcd(math.gcd(nm, dm), resultant)
        modulus //= g
        u, w = (nm // g) % modulus, (dm // g) % modulus
        log_g = log_int(g)
        h = top - log_g
        logw = log_den - log_g
        xr = num_poly / (4 * f)

    raise ConvergenceFailure(
        f"canonical height bound did not reach tol={tol:g} in {max_iterations} doublings")
