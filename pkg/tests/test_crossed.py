import random

import pytest

from qsphere import crossed as cr
from qsphere import ncpoly as nc
from qsphere import repn
from qsphere.crossed import FiberPair, MatrixUnitElement
from qsphere.ncpoly import CrossedMonomial, NCElement, TorusMonomial

TH = 0.37
P00 = nc.sphere_00(TH)
PLUS = nc.crossed_plus(TH)
MINUS = nc.crossed_minus(TH)
TOR = nc.torus(TH)


def g(pres, x):
    return nc.generator(pres, x)


def one(pres):
    return NCElement.scalar(pres)


# ---------------------------------------------------------------------------
# crossed products and symbols

def test_s_plus_u_commutation():
    s, u = g(PLUS, "s+"), g(PLUS, "u")
    prod = cr.crossed_multiply(s, u)
    assert prod == NCElement.monomial(PLUS, CrossedMonomial(1, 1, 0), PLUS.mu)


def test_s_plus_is_isometry():
    s = g(PLUS, "s+")
    assert cr.crossed_multiply(s.adjoint(), s) == one(PLUS)


def test_range_projection_is_idempotent():
    s = g(PLUS, "s+")
    proj = one(PLUS) - s * s.adjoint()
    assert proj * proj == proj
    assert not proj.is_zero()


def test_sides_must_match():
    with pytest.raises(nc.PresentationMismatch):
        cr.crossed_multiply(g(PLUS, "s+"), g(MINUS, "t-"))
    with pytest.raises(nc.PresentationMismatch):
        cr.crossed_multiply(g(P00, "s"), g(PLUS, "s+"))


def test_pi1_reorders_with_phase():
    e = nc.from_words({("u", "u", "s+"): 1.0}, PLUS)
    expected = NCElement.monomial(TOR, TorusMonomial(1, 2), nc.phase(TH, -2))
    assert cr.pi1(e) == expected
    # independently: y y x in the torus
    assert cr.pi1(e) == g(TOR, "y") * g(TOR, "y") * g(TOR, "x")


def test_pi1_kills_compact_part():
    s = g(PLUS, "s+")
    assert cr.pi1(one(PLUS) - s * s.adjoint()).is_zero()


def test_pi2_of_v_is_x():
    assert cr.pi2(g(MINUS, "v")) == g(TOR, "x")


@pytest.mark.parametrize("pres,pi", [(PLUS, cr.pi1), (MINUS, cr.pi2)], ids=["plus", "minus"])
def test_symbol_maps_are_homomorphisms(pres, pi):
    rng = random.Random(9)
    for _ in range(100):
        e1 = nc.random_element(pres, rng, m=2, j=2, l=2)
        e2 = nc.random_element(pres, rng, m=2, j=2, l=2)
        assert pi(e1 * e2) == pi(e1) * pi(e2)
        assert pi(e1.adjoint()) == pi(e1).adjoint()


@pytest.mark.parametrize("pres,kind", [(PLUS, repn.RepKind.RHO_BAR), (MINUS, repn.RepKind.RHO_BAR_PRIME)],
                         ids=["plus", "minus"])
def test_crossed_products_match_operators(pres, kind):
    spec = repn.RepSpec(kind, theta=TH)
    cut = repn.Cutoff(12, 8)
    rng = random.Random(10)
    for _ in range(30):
        e1 = nc.random_element(pres, rng, m=2, j=2, l=2)
        e2 = nc.random_element(pres, rng, m=2, j=2, l=2)
        lhs = repn.evaluate(spec, e1 * e2, cut)
        rhs = repn.evaluate(spec, e1, cut) @ repn.evaluate(spec, e2, cut)
        assert (lhs - rhs).interior_norm() < 1e-10


def test_plus_minus_isomorphism():
    rng = random.Random(12)
    assert cr.plus_to_minus(g(PLUS, "s+")) == g(MINUS, "t-")
    assert cr.plus_to_minus(g(PLUS, "u")) == g(MINUS, "v*")
    for _ in range(100):
        e1 = nc.random_element(PLUS, rng, m=2, j=2, l=2)
        e2 = nc.random_element(PLUS, rng, m=2, j=2, l=2)
        f = cr.plus_to_minus
        assert f(e1 * e2) == f(e1) * f(e2)
        assert f(e1.adjoint()) == f(e1).adjoint()
        assert cr.minus_to_plus(f(e1)) == e1


# ---------------------------------------------------------------------------
# h and the fiber product

def test_h_of_s():
    pair = cr.h_image(g(P00, "s"))
    assert pair.f1 == g(PLUS, "s+")
    assert pair.f2 == g(MINUS, "v")
    assert cr.pi1(pair.f1) == g(TOR, "x") == cr.pi2(pair.f2)


def test_h_of_st():
    pair = cr.h_image(g(P00, "s") * g(P00, "t"))
    assert pair.f1 == g(PLUS, "s+") * g(PLUS, "u")
    assert pair.f2 == g(MINUS, "v") * g(MINUS, "t-")
    xy = g(TOR, "x") * g(TOR, "y")
    assert cr.pi1(pair.f1) == xy == cr.pi2(pair.f2)


def test_h_of_one():
    assert cr.h_image(one(P00)) == FiberPair.scalar(TH)


def test_h_is_star_homomorphism_into_fiber_product():
    rng = random.Random(13)
    for _ in range(100):
        e1 = nc.random_element(P00, rng, alpha=3, beta=3, k=3)
        e2 = nc.random_element(P00, rng, alpha=3, beta=3, k=3)
        h1, h2 = cr.h_image(e1), cr.h_image(e2)
        assert cr.fiber_check(h1)
        assert cr.h_image(e1 * e2) == h1 * h2
        assert cr.h_image(e1.adjoint()) == h1.adjoint()


def test_diagram_commutes_on_generators():
    for x in P00.letters:
        e = g(P00, x.rstrip("*"))
        e = e.adjoint() if x.endswith("*") else e
        pair = cr.h_image(e)
        assert cr.pr1(pair) == cr.h1(e)
        assert cr.pr2(pair) == cr.h2(e)
        assert cr.pi1(cr.h1(e)) == cr.pi2(cr.h2(e))


def test_fiber_check_rejects_mismatch():
    pair = FiberPair(g(PLUS, "s+"), g(MINUS, "t-"))
    assert not cr.fiber_check(pair)
    assert pair.fiber_mismatch() == pytest.approx(1.0)


# ---------------------------------------------------------------------------
# matrix units

def test_jc_E00_is_A1():
    e = cr.jc_image(MatrixUnitElement.unit("left", 0, 0), TH)
    s = g(P00, "s")
    assert e == one(P00) - s * s.adjoint()


def test_jc_E12_w():
    e = cr.jc_image(MatrixUnitElement.unit("left", 1, 2, 1), TH)
    s, t = g(P00, "s"), g(P00, "t")
    ss = s.adjoint()
    assert e == s * (one(P00) - s * ss) * t * ss * ss


def test_jd_right_E00_w():
    pair = cr.jd_image(MatrixUnitElement.unit("right", 0, 0, 1), TH)
    tm, v = g(MINUS, "t-"), g(MINUS, "v")
    assert pair.f1.is_zero()
    assert pair.f2 == (one(MINUS) - tm * tm.adjoint()) * v
    assert cr.fiber_check(pair)


def test_jd_is_h_of_jc():
    for summand in ("left", "right"):
        for i in range(3):
            for j in range(3):
                for n in (-1, 0, 2):
                    u = MatrixUnitElement.unit(summand, i, j, n)
                    assert cr.jd_image(u, TH) == cr.h_image(cr.jc_image(u, TH))


def test_jc_is_multiplicative_on_units():
    rng = random.Random(3)
    for _ in range(50):
        summand = rng.choice(["left", "right"])
        a = MatrixUnitElement.unit(summand, rng.randint(0, 3), rng.randint(0, 3), rng.randint(-2, 2))
        b = MatrixUnitElement.unit(summand, rng.randint(0, 3), rng.randint(0, 3), rng.randint(-2, 2))
        assert cr.jc_image(a * b, TH) == cr.jc_image(a, TH) * cr.jc_image(b, TH)
        assert cr.jc_image(a.adjoint(), TH) == cr.jc_image(a, TH).adjoint()


def test_left_and_right_units_are_orthogonal():
    a = cr.jc_image(MatrixUnitElement.unit("left", 1, 0, 1), TH)
    b = cr.jc_image(MatrixUnitElement.unit("right", 0, 2, -1), TH)
    assert (a * b).is_zero()
    assert (b * a).is_zero()


def test_negative_indices_rejected():
    with pytest.raises(ValueError):
        MatrixUnitElement.unit("left", -1, 0)
    with pytest.raises(ValueError):
        MatrixUnitElement.unit("middle", 0, 0)


# ---------------------------------------------------------------------------
# generation criterion and exactness

@pytest.mark.parametrize("family", [cr.sphere00_family, cr.crossed_family, cr.fiber_family],
                         ids=["sphere00", "crossed", "fiber"])
@pytest.mark.parametrize("summand", ["left", "right"])
def test_lemma_gen_families(family, summand):
    e, w = family(TH, summand)
    assert cr.lemma_gen_report(e, w, 3) == {"matrix_units": True, "partial_unitary": True, "commutation": True}


def test_lemma_gen_rejects_corrupted_family():
    e, w = cr.sphere00_family(TH)
    bad = lambda i, j: NCElement(P00) if (i, j) == (0, 1) else e(i, j)
    report = cr.lemma_gen_report(bad, w, 1)
    assert not report["matrix_units"]
    assert not cr.lemma_gen_check(bad, w, 1)


def test_lemma_gen_rejects_non_partial_unitary():
    e, _ = cr.sphere00_family(TH)
    # w_ij = 2 e_ij makes W = 2 * projection, which is not a partial unitary
    w = lambda i, j: e(i, j) * 2.0
    assert not cr.lemma_gen_report(e, w, 2)["partial_unitary"]


def test_ses_exactness():
    rep = cr.ses_exactness_check(TH)
    assert rep.pop("jc_rank") == rep.pop("jc_rank_expected") == 18
    for key, val in rep.items():
        assert val < 1e-12, key
