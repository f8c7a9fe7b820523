"""Windowed empirical fraction limits, equivalence and boundedness probes, and mu.

Sampling works in two ways. On lattice models without noise a point's class
heights depend only on its height key, so the box is summarized by a
histogram of keys, and one representative point per key is evaluated. All
other configurations stream every point. Both give identical results (the
test suite checks this at small bounds).
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from fractions import Fraction
from typing import Callable, Iterator, Optional, Sequence

from .errors import ModelMismatch, RequiresAmple
from .geometry import (DivisorClass, EllipticModel, ModelMap, ModelVariety, get_map, intersect, is_ample,
                       is_effective, is_nef, is_pseudo_effective, model_height,
                       numerically_equivalent, pseudo_effective_threshold)

DEFAULT_WINDOWS = 8
DEFAULT_MIN_THRESHOLD = 1.0
DEFAULT_TOL = 0.1
DEFAULT_LATTICE_BOUND = 200
DEFAULT_ELLIPTIC_RADIUS = 12
THREADS_ENV = "HEIGHTLAB_THREADS"


def default_bound(model: ModelVariety) -> int:
    return DEFAULT_ELLIPTIC_RADIUS if isinstance(model, EllipticModel) else DEFAULT_LATTICE_BOUND


@dataclass(frozen=True)
class Region:
    """The model minus finitely many named curves."""

    model: ModelVariety
    excluded: tuple[str, ...] = ()

    def __post_init__(self):
        names = tuple(sorted(set(self.excluded)))
        for name in names:
            curve = self.model.curve(name)
            if not curve.excludable:
                raise ValueError(f"{name!r} cannot be excluded on {self.model.id}")
        object.__setattr__(self, "excluded", names)

    @property
    def punctured(self) -> bool:
        return bool(self.excluded or self.model.unsampled_curves)

    def contains(self, p) -> bool:
        return not any(self.model.curve(n).contains(p) for n in self.excluded)


@dataclass(frozen=True)
class SampleSchedule:
    """Thresholds T_1 < ... < T_K = height_bound, evenly spaced.

    ``height_bound=None`` resolves to the smallest h_D on the outer shell of
    the sampling box, the largest threshold at which the box is complete.
    """

    height_bound: Optional[float] = None
    window_count: int = DEFAULT_WINDOWS
    min_threshold: float = DEFAULT_MIN_THRESHOLD

    def __post_init__(self):
        if self.window_count < 2:
            raise ValueError("window_count must be at least 2")
        if not self.min_threshold > 0:
            raise ValueError("min_threshold must be positive")

    def thresholds(self, height_bound: float) -> list[float]:
        if not height_bound > self.min_threshold:
            raise ValueError(f"height bound {height_bound:.6g} must exceed "
                             f"min_threshold {self.min_threshold:.6g}")
        k = self.window_count
        step = (height_bound - self.min_threshold) / (k - 1)
        ts = [self.min_threshold + i * step for i in range(k - 1)]
        return ts + [height_bound]


@dataclass(frozen=True)
class Sample:
    point: object
    weight: int
    on_shell: bool


def _workers() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _map_ordered(fn: Callable, items: Sequence) -> list:
    workers = _workers()
    if workers == 1 or len(items) < 2 * workers:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


def enumerate_points(region: Region, bound: int) -> Iterator:
    if bound < 0 or (bound < 1 and not isinstance(region.model, EllipticModel)):
        raise ValueError("coordinate bound must be at least 1")
    for p in region.model.enumerate(bound):
        if region.contains(p):
            yield p


def _excluded_points(region: Region, bound: int) -> set:
    pts = set()
    for name in region.excluded:
        curve = region.model.curve(name)
        if curve.points is not None:
            pts.update(p for p in curve.points(bound) if region.model.contains_point(p))
    return pts


def histogram(region: Region, bound: int) -> dict[tuple[int, ...], int]:
    """Point counts per height key over the region (lattice models)."""
    model = region.model
    hist = dict(model.histogram(bound))
    for p in _excluded_points(region, bound):
        key = model.height_key(p)
        hist[key] -= 1
        if not hist[key]:
            del hist[key]
    return hist


def count_points(region: Region, bound: int) -> int:
    if region.model.is_lattice:
        return sum(histogram(region, bound).values())
    return sum(1 for _ in enumerate_points(region, bound))


def samples(region: Region, bound: int, streaming: bool = False) -> list[Sample]:
    return list(_samples_cached(region, bound, streaming))


@lru_cache(maxsize=32)
def _samples_cached(region: Region, bound: int, streaming: bool) -> tuple[Sample, ...]:
    return tuple(_build_samples(region, bound, streaming))


def _build_samples(region: Region, bound: int, streaming: bool) -> list[Sample]:
    model = region.model
    if isinstance(model, EllipticModel):
        # with no generators every point is on the (degenerate) shell
        return [Sample(p, 1, max(map(abs, coeffs), default=bound) == bound)
                for coeffs, p in model.entries(bound) if region.contains(p)]
    if streaming or model.noise:
        return [Sample(p, 1, model.on_shell(p, bound)) for p in enumerate_points(region, bound)]
    return [Sample(model.representative(key), n, model.key_on_shell(key, bound))
            for key, n in sorted(histogram(region, bound).items())]


def _proportional(e: DivisorClass, d: DivisorClass) -> Optional[Fraction]:
    # exact ratio when h_E = lambda * h_D identically
    if e.model.noise:
        return None
    if isinstance(e.model, EllipticModel):
        if not (e.point_component.is_infinity and d.point_component.is_infinity):
            return None
    if e.model.is_lattice:
        ce, cd = e.model.height_coefficients(e), e.model.height_coefficients(d)
    else:
        ce, cd = e.vector, d.vector
    lam = None
    for x, y in zip(ce, cd):
        if y == 0:
            if x != 0:
                return None
            continue
        r = Fraction(x) / Fraction(y)
        if lam is None:
            lam = r
        elif lam != r:
            return None
    return lam


def _resolve_bound(schedule: SampleSchedule, shell_heights: list[float]) -> float:
    if schedule.height_bound is not None:
        return float(schedule.height_bound)
    if not shell_heights:
        raise ValueError("sampling box has no shell points; give an explicit height bound")
    return min(shell_heights)


@dataclass(frozen=True)
class WindowTrace:
    thresholds: list[float]
    per_window_min: list[float]
    per_window_max: list[float]
    per_window_count: list[int]
    argmin: Optional[object]
    argmax: Optional[object]

    @property
    def supported(self) -> bool:
        return all(self.per_window_count)


def _window_trace(values: list[tuple[float, float, int, object]], thresholds: list[float]) -> WindowTrace:
    """values: (h_D, ratio, weight, point). Window k keeps h_D >= thresholds[k]."""
    k = len(thresholds)
    band_min = [math.inf] * k
    band_max = [-math.inf] * k
    band_cnt = [0] * k
    band_argmin: list = [None] * k
    band_argmax: list = [None] * k
    for hd, r, w, p in values:
        # band j: thresholds[j] <= hd < thresholds[j+1]
        j = -1
        for i, t in enumerate(thresholds):
            if hd >= t:
                j = i
        if j < 0:
            continue
        band_cnt[j] += w
        if r < band_min[j]:
            band_min[j], band_argmin[j] = r, p
        if r > band_max[j]:
            band_max[j], band_argmax[j] = r, p
    mins, maxs, counts = [0.0] * k, [0.0] * k, [0] * k
    run_min, run_max, run_cnt = math.inf, -math.inf, 0
    arg_lo = arg_hi = None
    # suffix reductions: window j is the union of bands j..K-1
    for j in range(k - 1, -1, -1):
        run_cnt += band_cnt[j]
        if band_min[j] < run_min:
            run_min, arg_lo = band_min[j], band_argmin[j]
        if band_max[j] > run_max:
            run_max, arg_hi = band_max[j], band_argmax[j]
        mins[j], maxs[j], counts[j] = run_min, run_max, run_cnt
        if j == k - 1:
            last_lo, last_hi = arg_lo, arg_hi
    return WindowTrace(list(thresholds), mins, maxs, counts, last_lo, last_hi)


@dataclass(frozen=True)
class FlimEstimate:
    per_window_min: list[float]
    per_window_max: list[float]
    per_window_count: list[int]
    thresholds: list[float]
    estimate: float
    sample_count: int
    region: Region
    height_bound: float
    supported: bool
    witness: Optional[object] = None
    plot_data: Optional[list[tuple[float, float, int]]] = field(default=None, compare=False)


def _check_pair(e: DivisorClass, d: DivisorClass) -> None:
    if e.model != d.model:
        raise ModelMismatch(f"{e.model.id} vs {d.model.id}")
    if not is_ample(d):
        raise RequiresAmple(f"reference class {d} is not ample on {d.model.id}")


def _ratio_values(region: Region, bound: int, height_e: Callable, height_d: Callable,
                  lam: Optional[Fraction], streaming: bool):
    pts = samples(region, bound, streaming)

    def evaluate(s: Sample):
        hd = height_d(s.point)
        he = None if lam is not None else height_e(s.point)
        return hd, he

    evaluated = _map_ordered(evaluate, pts)
    shell = [hd for s, (hd, _) in zip(pts, evaluated) if s.on_shell]
    values = []
    for s, (hd, he) in zip(pts, evaluated):
        if hd <= 0:
            continue
        r = float(lam) if lam is not None else he / hd
        values.append((hd, r, s.weight, s.point))
    return values, shell, sum(s.weight for s in pts)


def flim(e: DivisorClass, d: DivisorClass, region: Region, schedule: SampleSchedule,
         bound: Optional[int] = None, streaming: bool = False,
         plot: bool = False) -> FlimEstimate:
    """Windowed liminf of h_E / h_D over the region."""
    _check_pair(e, d)
    if region.model != d.model:
        raise ModelMismatch("region and classes live on different models")
    bound = default_bound(d.model) if bound is None else bound
    lam = _proportional(e, d)
    values, shell, total = _ratio_values(
        region, bound, lambda p: model_height(e, p).value, lambda p: model_height(d, p).value,
        lam, streaming)
    return _finish(values, shell, total, region, schedule, plot)


def _finish(values, shell, total, region, schedule, plot) -> FlimEstimate:
    hb = _resolve_bound(schedule, shell)
    trace = _window_trace(values, schedule.thresholds(hb))
    est = trace.per_window_min[-1] if trace.supported else math.nan
    plot_data = [(hd, r, w) for hd, r, w, _ in values] if plot else None
    return FlimEstimate(trace.per_window_min, trace.per_window_max, trace.per_window_count,
                        trace.thresholds, est, total, region, hb, trace.supported,
                        trace.argmin, plot_data)


LABELS = ("ample", "nef_not_ample", "indeterminate", "not_nef")


def label_from_trace(est: FlimEstimate, tol: float) -> str:
    if not est.supported:
        return "indeterminate"
    trace = est.per_window_min
    half = trace[len(trace) // 2]
    # still climbing over the last half of the windows
    if trace[-1] - half > tol:
        return "indeterminate"
    if est.estimate > tol:
        return "ample"
    if est.estimate >= -tol:
        return "nef_not_ample"
    return "not_nef"


def classify_empirical(e: DivisorClass, d: DivisorClass, region: Region,
                       schedule: SampleSchedule, bound: Optional[int] = None,
                       tol: float = DEFAULT_TOL) -> tuple[str, FlimEstimate]:
    est = flim(e, d, region, schedule, bound)
    return label_from_trace(est, tol), est


def exact_label(e: DivisorClass) -> str:
    if is_ample(e):
        return "ample"
    return "nef_not_ample" if is_nef(e) else "not_nef"


@dataclass(frozen=True)
class Classification:
    exact: dict
    empirical_label: str
    criterion: str
    agree: Optional[bool]
    flim: FlimEstimate


def classify(e: DivisorClass, d: DivisorClass, region: Region, schedule: SampleSchedule,
             bound: Optional[int] = None, tol: float = DEFAULT_TOL) -> Classification:
    """Exact cone verdicts next to the empirical one.

    On a full region the ample/nef criterion is compared. When the region is
    punctured only pseudo-effectivity is detectable, so that is compared.
    """
    label, est = classify_empirical(e, d, region, schedule, bound, tol)
    exact = {
        "label": exact_label(e),
        "ample": is_ample(e),
        "nef": is_nef(e),
        "pseudo_effective": is_pseudo_effective(e),
        "effective": is_effective(e),
    }
    if label == "indeterminate":
        return Classification(exact, label, "none", None, est)
    if region.punctured:
        emp_psef = est.estimate >= -tol
        return Classification(exact, label, "pseudo_effective",
                               emp_psef == exact["pseudo_effective"], est)
    return Classification(exact, label, "ample_nef", label == exact["label"], est)


@dataclass(frozen=True)
class EquivalenceResult:
    ratio_trace: list[float]
    thresholds: list[float]
    per_window_count: list[int]
    verdict: str
    exact: bool
    agree: bool
    height_bound: float
    supported: bool


def numeric_equiv_empirical(d1: DivisorClass, d2: DivisorClass, d_ample: DivisorClass,
                            region: Region, schedule: SampleSchedule,
                            bound: Optional[int] = None,
                            tol: float = DEFAULT_TOL) -> EquivalenceResult:
    """Per-window max of |h_{D1-D2} / h_D|; equivalent when it settles below tol."""
    diff = d1 - d2
    _check_pair(diff, d_ample)
    bound = default_bound(d_ample.model) if bound is None else bound
    lam = _proportional(diff, d_ample)
    values, shell, _ = _ratio_values(
        region, bound, lambda p: model_height(diff, p).value,
        lambda p: model_height(d_ample, p).value, lam, False)
    values = [(hd, abs(r), w, p) for hd, r, w, p in values]
    hb = _resolve_bound(schedule, shell)
    trace = _window_trace(values, schedule.thresholds(hb))
    ratios = trace.per_window_max
    decreasing = all(b <= a for a, b in zip(ratios, ratios[1:]))
    ok = trace.supported and decreasing and ratios[-1] <= tol
    exact = numerically_equivalent(d1, d2)
    verdict = "equivalent" if ok else "not equivalent"
    return EquivalenceResult(ratios, trace.thresholds, trace.per_window_count, verdict, exact,
                             ok == exact, hb, trace.supported)


PROBE_LABELS = ("bounded", "unbounded_above_and_below", "bounded_below_only", "inconclusive")


@dataclass(frozen=True)
class BoundednessResult:
    label: str
    thresholds: list[float]
    per_ball_max: list[float]
    per_ball_min: list[float]
    per_ball_count: list[int]
    slope: float
    range: float
    witness_high: Optional[object]
    witness_low: Optional[object]
    witness_high_value: float
    witness_low_value: float
    height_bound: float


def _slope(xs: list[float], ys: list[float], ws: list[int]) -> float:
    n = sum(ws)
    if n == 0:
        return 0.0
    mx = math.fsum(w * x for x, w in zip(xs, ws)) / n
    my = math.fsum(w * y for y, w in zip(ys, ws)) / n
    sxx = math.fsum(w * (x - mx) ** 2 for x, w in zip(xs, ws))
    if sxx == 0:
        return 0.0
    return math.fsum(w * (x - mx) * (y - my) for x, y, w in zip(xs, ys, ws)) / sxx


def boundedness_probe(d: DivisorClass, d_ample: DivisorClass, region: Region,
                      schedule: SampleSchedule, bound: Optional[int] = None,
                      tol: float = DEFAULT_TOL) -> BoundednessResult:
    """Track max/min of h_D over growing balls {h_ample <= T_k}."""
    _check_pair(d, d_ample)
    bound = default_bound(d_ample.model) if bound is None else bound
    pts = samples(region, bound)
    evaluated = _map_ordered(
        lambda s: (model_height(d_ample, s.point).value, model_height(d, s.point).value), pts)
    hb = _resolve_bound(schedule, [ha for s, (ha, _) in zip(pts, evaluated) if s.on_shell])
    if schedule.height_bound is None and hb <= schedule.min_threshold:
        # every sampled point has tiny height (e.g. a rank-0 curve): one full ball
        hb = 2 * schedule.min_threshold
    ts = schedule.thresholds(hb)
    k = len(ts)
    maxs, mins, counts = [-math.inf] * k, [math.inf] * k, [0] * k
    hi_pt = lo_pt = None
    xs, ys, ws = [], [], []
    for s, (ha, hd) in zip(pts, evaluated):
        if ha > ts[-1]:
            continue
        xs.append(ha)
        ys.append(hd)
        ws.append(s.weight)
        for i, t in enumerate(ts):
            if ha <= t:
                counts[i] += s.weight
                maxs[i] = max(maxs[i], hd)
                mins[i] = min(mins[i], hd)
        if hd == maxs[-1] and (hi_pt is None or hd > hi_val):
            hi_pt, hi_val = s.point, hd
        if hd == mins[-1] and (lo_pt is None or hd < lo_val):
            lo_pt, lo_val = s.point, hd
    if hi_pt is None:
        return BoundednessResult("inconclusive", ts, maxs, mins, counts, 0.0, math.nan,
                                 None, None, math.nan, math.nan, hb)
    mid = (k - 1) // 2
    up = maxs[-1] - maxs[mid] > tol
    down = mins[mid] - mins[-1] > tol
    slope = _slope(xs, ys, ws)
    if up and down:
        label = "unbounded_above_and_below"
    elif up:
        label = "bounded_below_only"
    elif not down and abs(slope) <= tol:
        label = "bounded"
    else:
        label = "inconclusive"
    return BoundednessResult(label, ts, maxs, mins, counts, slope, maxs[-1] - mins[-1],
                             hi_pt, lo_pt, hi_val, lo_val, hb)


@dataclass(frozen=True)
class MuEstimate:
    value: float
    exact_upper_bound: Optional[Fraction]
    region: Region
    flim: FlimEstimate
    map_name: str


def mu_estimate(map_id: str, d_w: DivisorClass, d_v: DivisorClass, region: Optional[Region],
                schedule: SampleSchedule, bound: Optional[int] = None,
                model: Optional[ModelVariety] = None) -> MuEstimate:
    """Windowed liminf of h_{D_V}(phi(P)) / h_{D_W}(P), next to its exact upper bound."""
    phi: ModelMap = get_map(map_id, model if model is not None else d_w.model)
    if d_w.model != phi.source:
        raise ModelMismatch(f"D_W must live on {phi.source.id}")
    if d_v.model != phi.target:
        raise ModelMismatch(f"D_V must live on {phi.target.id}")
    if not is_ample(d_w):
        raise RequiresAmple(f"D_W = {d_w} is not ample")
    if not is_ample(d_v):
        raise RequiresAmple(f"D_V = {d_v} is not ample")
    region = region if region is not None else Region(phi.source)
    bound = default_bound(phi.source) if bound is None else bound
    values, shell, total = _ratio_values(
        region, bound, lambda p: model_height(d_v, phi.apply(p)).value,
        lambda p: model_height(d_w, p).value, None, False)
    est = _finish(values, shell, total, region, schedule, False)
    upper = pseudo_effective_threshold(phi.pullback(d_v), d_w)
    return MuEstimate(est.estimate, upper, region, est, phi.name)


@dataclass(frozen=True)
class RestrictionTrace:
    per_window_mean: list[float]
    per_window_count: list[int]
    thresholds: list[float]
    exact: Fraction


def restriction_ratio(e: DivisorClass, d: DivisorClass, curve_name: str,
                      schedule: SampleSchedule, bound: Optional[int] = None) -> RestrictionTrace:
    """Mean of h_E / h_D over a named curve's points, per window, and E.C / D.C."""
    _check_pair(e, d)
    model = d.model
    curve = model.curve(curve_name)
    if curve.points is None:
        raise ValueError(f"curve {curve_name!r} has no sampled points")
    bound = default_bound(model) if bound is None else bound
    pts = [p for p in curve.points(bound) if model.contains_point(p)]
    hs = [(model_height(d, p).value, model_height(e, p).value, model.on_shell(p, bound)) for p in pts]
    hb = _resolve_bound(schedule, [hd for hd, _, shell in hs if shell])
    ts = schedule.thresholds(hb)
    sums, counts = [0.0] * len(ts), [0] * len(ts)
    for hd, he, _ in hs:
        for i, t in enumerate(ts):
            if hd >= t:
                sums[i] += he / hd
                counts[i] += 1
    means = [s / n if n else math.nan for s, n in zip(sums, counts)]
    de, dd = (Fraction(x) for x in (intersect(e, curve), intersect(d, curve)))
    return RestrictionTrace(means, counts, ts, de / dd)
