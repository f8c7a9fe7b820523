import itertools
import math
from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from heightlab.elliptic import CurvePoint, EllipticCurve
from heightlab.errors import (InvalidPoint, ModelMismatch, NotPseudoEffective, UndefinedAtPoint,
                              UndefinedIntersection, UnknownCurve, UnknownMap)
from heightlab.geometry import (CENTER, BlowupP2, EllipticModel, P1xP1, ProjectiveSpace,
                                get_map, get_model, intersect, is_ample, is_effective, is_nef,
                                is_pseudo_effective, model_height, numerically_equivalent,
                                p1_points, pn_count_by_max, pseudo_effective_threshold,
                                restriction_degree, zariski_decompose)
from heightlab.heights import ProjPoint, height_pn, normalize_point

PP = P1xP1()
BL = BlowupP2()
LATTICE = [ProjectiveSpace(1), ProjectiveSpace(2), ProjectiveSpace(3), PP, BL]


def matmul_pair(m, u, v):
    # independent oracle: explicit row-vector * matrix * column-vector
    row = [sum(u[i] * m[i][j] for i in range(len(u))) for j in range(len(v))]
    return sum(r * x for r, x in zip(row, v))


def test_intersection_examples():
    assert intersect(PP.divisor((1, 2)), PP.divisor((2, 1))) == 5
    e = BL.divisor((0, 1))
    assert intersect(e, e) == -1
    d, c = BL.divisor((3, -1)), BL.divisor((1, -1))
    assert intersect(d, c) == 2 == matmul_pair(BL.intersection_matrix, d.vector, c.vector)


def test_lattice_invariants():
    for m in LATTICE:
        mat = m.intersection_matrix
        assert all(mat[i][j] == mat[j][i] for i in range(m.picard_rank) for j in range(m.picard_rank))
        for n in m.nef_generators:
            for g in m.effective_generators:
                assert matmul_pair(mat, n, g) >= 0


def test_curve_parametrizations_land_on_model():
    for m in LATTICE:
        for c in m.curve_classes.values():
            if c.points is None:
                continue
            for p in itertools.islice(c.points(6), 200):
                assert m.contains_point(p)
                assert c.contains(p)


@pytest.mark.parametrize("model, vec, ample, nef", [
    (PP, (1, 1), True, True),
    (PP, (1, 0), False, True),
    (PP, (0, 0), False, True),
    (BL, (3, -1), True, True),
    (BL, (0, 1), False, False),
])
def test_cone_examples(model, vec, ample, nef):
    d = model.divisor(vec)
    assert is_ample(d) is ample
    assert is_nef(d) is nef


def test_pseudo_effective_and_effective_examples():
    assert is_pseudo_effective(BL.divisor((0, 1)))
    assert not is_pseudo_effective(PP.divisor((-1, 5)))
    assert is_pseudo_effective(BL.divisor((1, 0)))
    assert is_effective(PP.divisor((2, 0)))
    assert not is_effective(BL.divisor((0, -1)))
    assert not is_effective(PP.divisor((Fraction(1, 2), 0)))


def test_elliptic_effective_and_equivalence(x3m2):
    em = EllipticModel(x3m2)
    g = CurvePoint(3, 5)
    assert not is_effective(em.divisor((0,), g))
    assert is_effective(em.divisor((0,)))
    assert is_effective(em.divisor((2,), g))
    assert numerically_equivalent(em.divisor((0,), g), em.divisor((0,)))
    with pytest.raises(UndefinedIntersection):
        intersect(em.divisor((1,)), em.divisor((1,)))
    assert restriction_degree(em.divisor((3,), g), "curve") == 3


def test_numerical_equivalence_examples():
    assert numerically_equivalent(PP.divisor((1, 2)), PP.divisor((1, 2)))
    assert not numerically_equivalent(PP.divisor((1, 0)), PP.divisor((0, 1)))
    with pytest.raises(ModelMismatch):
        numerically_equivalent(PP.divisor((1, 0)), BL.divisor((1, 0)))


def grid(rank, lo=-5, hi=5):
    return itertools.product(range(lo, hi + 1), repeat=rank)


def test_cone_consistency_grid():
    for m in LATTICE:
        for v in grid(m.picard_rank):
            d = m.divisor(v)
            if is_ample(d):
                assert is_nef(d)
            if is_nef(d):
                assert is_pseudo_effective(d)
            if is_effective(d):
                assert is_pseudo_effective(d)


def test_psef_matches_brute_force_combinations():
    # oracle: nonnegative integer combinations of generators with small coefficients
    for m in (PP, BL):
        reachable = set()
        for lam in itertools.product(range(0, 11), repeat=len(m.effective_generators)):
            v = tuple(sum(l * g[i] for l, g in zip(lam, m.effective_generators))
                      for i in range(m.picard_rank))
            reachable.add(v)
        for v in grid(m.picard_rank):
            assert is_pseudo_effective(m.divisor(v)) == (v in reachable)


def test_ample_difference_lemma():
    for m in LATTICE:
        amples = [m.divisor(v) for v in grid(m.picard_rank, -3, 3) if is_ample(m.divisor(v))]
        for d1, d2 in itertools.product(amples, repeat=2):
            assert any(is_ample(k * d1 - d2) for k in range(1, 65))


def test_zariski_examples():
    z = zariski_decompose(BL.divisor((1, 1)))
    assert z.positive_part.vector == (1, 0) and z.negative_part.vector == (0, 1)
    assert intersect(z.positive_part, z.negative_part) == 0
    z = zariski_decompose(BL.divisor((2, -1)))
    assert z.positive_part.vector == (2, -1) and z.negative_part.vector == (0, 0)
    z = zariski_decompose(PP.divisor((1, 1)))
    assert z.negative_part.vector == (0, 0)
    with pytest.raises(NotPseudoEffective):
        zariski_decompose(BL.divisor((-1, 0)))


def test_zariski_invariants_grid():
    for m in (PP, BL):
        for v in grid(2):
            d = m.divisor(v)
            if not is_pseudo_effective(d):
                continue
            z = zariski_decompose(d)
            assert tuple(Fraction(a) + b for a, b in zip(z.positive_part.vector, z.negative_part.vector)) == v
            assert is_nef(z.positive_part)
            assert is_pseudo_effective(z.negative_part)
            if any(z.negative_part.vector):
                assert intersect(z.positive_part, BL.divisor((0, 1))) == 0


def test_model_height_examples(x3p1):
    p = (ProjPoint((3, 2)), ProjPoint((5, 1)))
    assert model_height(PP.divisor((2, 2)), p) == model_height(PP.divisor((1, 1)), p).scale(2)
    assert model_height(PP.divisor((2, 2)), p).value == pytest.approx(2 * math.log(3) + 2 * math.log(5))
    h = model_height(BL.divisor((0, 1)), ProjPoint((3, 2, 7)))
    assert h.magnitude == Fraction(7, 3)
    em = EllipticModel(x3p1)
    t = CurvePoint(2, 3)
    for q in x3p1.torsion_points:
        assert model_height(em.divisor((0,), t), q).value == 0.0


def test_blowup_center_undefined():
    with pytest.raises(UndefinedAtPoint):
        BL._check_defined(BL.divisor((0, 1)), CENTER)
    with pytest.raises(InvalidPoint):
        BL.parse_point("0:0:1")


def test_restriction_degree_examples():
    for a, b in grid(2, -3, 3):
        assert restriction_degree(PP.divisor((a, b)), "F2") == a
        assert restriction_degree(PP.divisor((a, b)), "F1") == b
    assert restriction_degree(BL.divisor((0, 1)), "E") == -1
    assert restriction_degree(ProjectiveSpace(3).divisor((4,)), "line") == 4
    with pytest.raises(UnknownCurve):
        restriction_degree(PP.divisor((1, 0)), "E")


def test_p1_points_match_coprime_oracle():
    for bound in range(1, 25):
        pts = list(p1_points(bound))
        oracle = {normalize_point((x, y)) for x in range(-bound, bound + 1)
                  for y in range(-bound, bound + 1) if (x, y) != (0, 0)}
        assert len(pts) == len(set(pts)) == len(oracle)
        assert set(pts) == oracle


@pytest.mark.parametrize("model, bound", [
    (ProjectiveSpace(1), 9), (ProjectiveSpace(2), 5), (ProjectiveSpace(3), 3),
    (PP, 7), (BL, 10),
])
def test_histogram_matches_enumeration(model, bound):
    counted = Counter(model.height_key(p) for p in model.enumerate(bound))
    assert dict(counted) == model.histogram(bound)


def test_pn_counts_match_brute_force():
    for n in (1, 2):
        for bound in (1, 2, 4):
            pts = {normalize_point(v) for v in itertools.product(range(-bound, bound + 1), repeat=n + 1) if any(v)}
            assert sum(pn_count_by_max(n, bound)) == len(pts)


def test_functoriality_small_box():
    segre, proj1, blowdown = get_map("segre"), get_map("proj1"), get_map("blowdown")
    for p in PP.enumerate(8):
        assert height_pn(segre.apply(p)) == model_height(PP.divisor((1, 1)), p)
        assert height_pn(proj1.apply(p)) == model_height(PP.divisor((1, 0)), p)
    for p in BL.enumerate(8):
        assert height_pn(blowdown.apply(p)) == model_height(BL.divisor((1, 0)), p)


@settings(max_examples=200)
@given(st.tuples(st.integers(-9, 9), st.integers(-9, 9)), st.tuples(st.integers(-9, 9), st.integers(-9, 9)),
       st.lists(st.integers(-50, 50), min_size=3, max_size=3).filter(lambda v: any(v[:2])))
def test_blowup_additivity_property(u, v, raw):
    p = normalize_point(raw)
    d1, d2 = BL.divisor(u), BL.divisor(v)
    assert model_height(d1 + d2, p) == model_height(d1, p) + model_height(d2, p)


def test_effective_generator_positivity():
    for m in LATTICE:
        for g in m.effective_generators:
            d = m.divisor(g)
            for p in m.enumerate(6):
                assert model_height(d, p).magnitude >= 1


def test_pseudo_effective_threshold():
    p3, p1, p2 = ProjectiveSpace(3), ProjectiveSpace(1), ProjectiveSpace(2)
    assert pseudo_effective_threshold(get_map("segre").pullback(p3.divisor((1,))), PP.divisor((1, 1))) == 1
    assert pseudo_effective_threshold(get_map("proj1").pullback(p1.divisor((1,))), PP.divisor((1, 1))) == 0
    assert pseudo_effective_threshold(get_map("blowdown").pullback(p2.divisor((1,))), BL.divisor((3, -1))) == Fraction(1, 3)
    # brute-force oracle over the rational ray
    v, w = PP.divisor((2, 3)), PP.divisor((1, 1))
    best = max(Fraction(k, 100) for k in range(0, 500)
               if is_pseudo_effective(PP.divisor([Fraction(a) - Fraction(k, 100) * b
                                                  for a, b in zip(v.vector, w.vector)])))
    assert pseudo_effective_threshold(v, w) == best == 2


def test_get_model_and_map_errors():
    assert get_model("projective_space(2)").id == "p2"
    with pytest.raises(ValueError):
        get_model("k3")
    with pytest.raises(UnknownMap):
        get_map("frobenius")
    with pytest.raises(ModelMismatch):
        get_map("segre").pullback(PP.divisor((1, 1)))


def test_noise_wrapper_bounded():
    noisy = PP.with_noise(0.5)
    d = noisy.divisor((1, 2))
    for p in itertools.islice(noisy.enumerate(10), 300):
        clean = model_height(PP.divisor((1, 2)), p).value
        assert abs(model_height(d, p).value - clean) <= 0.5
    with pytest.raises(ValueError):
        PP.with_noise(2.0)
