import json
import random

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st
from sympy.matrices.normalforms import smith_normal_form as sympy_snf

from qsphere import ktheory as kt
from qsphere.ktheory import TRIVIAL, Z, FGAbelianGroup, GroupHom

Z2 = FGAbelianGroup.free(2)


def diag(D):
    return [int(D[i, i]) for i in range(min(D.shape))]


def assert_snf(M):
    U, D, V = kt.smith_normal_form(M)
    Mo = np.array(M, dtype=object).reshape(len(M), -1) if len(M) else np.zeros((0, 0), dtype=object)
    assert (U.dot(Mo).dot(V) == D).all()
    assert abs(kt.int_det(U)) == 1
    assert abs(kt.int_det(V)) == 1
    off = D.copy()
    for i in range(min(D.shape)):
        off[i, i] = 0
    assert not off.any()
    d = diag(D)
    nz = [x for x in d if x]
    assert d[:len(nz)] == nz and all(x > 0 for x in nz)
    assert all(b % a == 0 for a, b in zip(nz, nz[1:]))
    return d


# ---------------------------------------------------------------------------
# Smith normal form

def test_snf_examples():
    assert diag(kt.smith_normal_form([[1, -1], [0, 0]])[1]) == [1, 0]
    assert diag(kt.smith_normal_form(np.eye(3, dtype=int))[1]) == [1, 1, 1]
    assert diag(kt.smith_normal_form([[2, 0], [0, 3]])[1]) == [1, 6]


def test_snf_500_random_against_sympy():
    rng = random.Random(2024)
    for _ in range(500):
        m, n = rng.randint(1, 8), rng.randint(1, 8)
        M = [[rng.randint(-20, 20) for _ in range(n)] for _ in range(m)]
        d = assert_snf(M)
        S = sympy_snf(sympy.Matrix(M))
        ref = sorted(abs(int(S[i, i])) for i in range(min(m, n)))
        assert sorted(d) == ref


def test_snf_low_rank_matrices():
    rng = random.Random(7)
    for _ in range(100):
        m, n, r = rng.randint(2, 7), rng.randint(2, 7), rng.randint(1, 2)
        A = np.array([[rng.randint(-6, 6) for _ in range(r)] for _ in range(m)], dtype=object)
        B = np.array([[rng.randint(-6, 6) for _ in range(n)] for _ in range(r)], dtype=object)
        M = A.dot(B).tolist()
        d = assert_snf(M)
        assert sum(1 for x in d if x) == sympy.Matrix(M).rank()


@settings(max_examples=100, deadline=None, derandomize=True)
@given(st.integers(1, 6).flatmap(lambda n: st.lists(st.lists(st.integers(-30, 30), min_size=n, max_size=n),
                                                    min_size=1, max_size=6)))
def test_snf_property(M):
    assert_snf(M)


def test_int_det_matches_sympy():
    rng = random.Random(1)
    for _ in range(50):
        n = rng.randint(1, 6)
        M = [[rng.randint(-9, 9) for _ in range(n)] for _ in range(n)]
        assert kt.int_det(M) == sympy.Matrix(M).det()


# ---------------------------------------------------------------------------
# groups, kernels, cokernels

def test_group_canonical_forms():
    assert str(FGAbelianGroup((2, 3, 0))) == "Z/6 + Z"
    assert str(FGAbelianGroup((4, 6))) == "Z/2 + Z/12"
    assert str(FGAbelianGroup((1, 0, 0))) == "Z^2"
    assert str(TRIVIAL) == "0"
    assert FGAbelianGroup((0, 3)) == FGAbelianGroup((3, 0))


def test_ill_defined_hom_rejected():
    with pytest.raises(ValueError):
        GroupHom(FGAbelianGroup((2,)), Z, [[1]])
    with pytest.raises(ValueError):
        GroupHom(Z2, Z, [[1, 2, 3]])


def test_kernel_cokernel_examples():
    h = GroupHom(Z2, Z2, [[1, -1], [0, 0]])
    assert kt.kernel(h) == Z
    assert kt.cokernel(h) == Z
    assert kt.kernel(GroupHom.zero(Z2, Z2)) == Z2
    assert kt.cokernel(kt.multiplication(6)) == FGAbelianGroup((6,))
    assert kt.image(kt.multiplication(6)) == Z


def test_torsion_codomain():
    Z4 = FGAbelianGroup((4,))
    h = GroupHom(Z, Z4, [[2]])
    assert kt.kernel(h) == Z
    assert kt.image(h) == FGAbelianGroup((2,))
    assert kt.cokernel(h) == FGAbelianGroup((2,))


def _random_hom(rng, max_n=4):
    dom = FGAbelianGroup.free(rng.randint(1, max_n))
    cod = FGAbelianGroup.free(rng.randint(1, max_n))
    mat = [[rng.randint(-5, 5) for _ in range(dom.ngens)] for _ in range(cod.ngens)]
    return GroupHom(dom, cod, mat)


def test_rank_nullity():
    rng = random.Random(3)
    for _ in range(200):
        h = _random_hom(rng)
        assert kt.kernel(h).rank + kt.image(h).rank == h.domain.rank
        assert kt.image(h).rank == sympy.Matrix(h.matrix.tolist()).rank()


def test_kernel_inclusion_and_quotient_are_exact():
    rng = random.Random(4)
    for _ in range(100):
        h = _random_hom(rng)
        inc, quo = kt.kernel_inclusion(h), kt.cokernel_quotient(h)
        assert h.compose(inc).is_zero()
        assert quo.compose(h).is_zero()
        assert kt.check_exact([inc, h, quo])
        assert kt.kernel(inc).is_trivial()


def test_check_exact_examples():
    zero_in = GroupHom.zero(TRIVIAL, Z)
    zero_out = GroupHom.zero(Z, TRIVIAL)
    assert kt.check_exact([zero_in, kt.multiplication(1), zero_out])
    x2 = kt.multiplication(2)
    q = kt.cokernel_quotient(x2)
    assert q.codomain == FGAbelianGroup((2,))
    assert kt.check_exact([zero_in, x2, q, GroupHom.zero(q.codomain, TRIVIAL)])
    assert not kt.check_exact([zero_in, kt.multiplication(0), zero_out])


def test_check_exact_rejects_non_composable():
    with pytest.raises(ValueError):
        kt.check_exact([kt.multiplication(1), GroupHom.zero(Z2, Z)])


# ---------------------------------------------------------------------------
# exact sequences

def test_pv_sequence():
    k0, k1 = kt.pv_sequence(1, 0, kt.multiplication(0))
    assert (str(k0), str(k1)) == ("Z", "Z")
    assert kt.pv_sequence(1, 0, kt.multiplication(1)) == (TRIVIAL, TRIVIAL)
    assert kt.pv_sequence(1, 0, kt.multiplication(2)) == (FGAbelianGroup((2,)), TRIVIAL)


def test_pv_sequence_rejects_inconsistent_input():
    with pytest.raises(kt.PatternNotApplicable):
        kt.pv_sequence(1, 1, kt.multiplication(0))
    with pytest.raises(ValueError):
        kt.pv_sequence(2, 0, kt.multiplication(0))


def test_six_term_quantum_data():
    data = kt.SixTermData(GroupHom(Z2, Z2, [[1, -1], [0, 0]]), GroupHom(Z2, Z2, [[1, 0], [0, -1]]))
    sol = kt.solve_six_term(data)
    assert sol.G0 == Z and sol.G1 == Z
    assert sol.exact


def test_six_term_both_isomorphisms():
    iso = GroupHom.identity(Z2)
    sol = kt.solve_six_term(kt.SixTermData(iso, iso))
    assert sol.G0.is_trivial() and sol.G1.is_trivial()
    assert sol.exact


def test_six_term_top_isomorphism():
    sol = kt.solve_six_term(kt.SixTermData(GroupHom.identity(Z), kt.multiplication(3)))
    assert sol.G0 == FGAbelianGroup((3,)) and sol.G1.is_trivial()
    assert sol.exact


def test_six_term_not_applicable():
    with pytest.raises(kt.PatternNotApplicable):
        kt.solve_six_term(kt.SixTermData(kt.multiplication(2), kt.multiplication(0)))


def test_six_term_random_solutions_are_exact():
    rng = random.Random(5)
    for _ in range(60):
        n = rng.randint(1, 3)
        G = FGAbelianGroup.free(n)
        iso = GroupHom(G, G, np.array(sympy.eye(n).tolist(), dtype=object) * rng.choice([1, -1]))
        other = GroupHom(FGAbelianGroup.free(rng.randint(1, 3)), FGAbelianGroup.free(rng.randint(1, 3)))
        other = GroupHom(other.domain, other.codomain,
                         [[rng.randint(-4, 4) for _ in range(other.domain.ngens)] for _ in range(other.codomain.ngens)])
        data = kt.SixTermData(other, iso) if rng.random() < 0.5 else kt.SixTermData(iso, other)
        assert kt.solve_six_term(data).exact


@pytest.mark.parametrize("name", kt.PRESETS)
def test_presets(name):
    cfg = kt.load_preset(name)
    sol = kt.solve_six_term(kt.data_from_config(cfg))
    assert sol.G0 == Z and sol.G1 == Z
    assert sol.exact
    assert list(sol.G0.invariant_factors) == cfg["expected"]["G0"]


def test_quantum_preset_generator_labels():
    cfg = kt.load_preset("s3-quantum")
    data = kt.data_from_config(cfg)
    assert "Hopf line bundle" in data.labels["K0(T^2_theta)"]
    assert data.labels["K0(T^2_theta)"][0] == "unit"


def test_load_config_from_file(tmp_path):
    cfg = kt.load_preset("s3-classical")
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    assert kt.load_config(path) == cfg


def test_unknown_preset():
    with pytest.raises(ValueError):
        kt.load_preset("s4")
