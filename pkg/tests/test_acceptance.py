import json
import time

import pytest

from qsphere import cli, crossed, ncpoly
from qsphere.cli import SuiteConfig
from qsphere.repn import Cutoff


def _run(cfg):
    t0 = time.perf_counter()
    report = cli.run(cfg)
    return report, time.perf_counter() - t0


def _failures(report):
    return [(r.name, r.measured, r.threshold) for r in report.records if not r.passed]


@pytest.mark.acceptance(1, "relations: 27-point grid, N=M=24, rho/rho'/8 lambdas, residual <= 1e-10, < 30 s")
def test_relations_suite():
    report, elapsed = _run(SuiteConfig(suite="relations", cutoff=Cutoff(24)))
    reps = {r.inputs["rep"] for r in report.records}
    lambdas = {r.inputs.get("lambda_index") for r in report.records} - {None}
    assert reps == {"Rho", "RhoPrime", "RhoLambda", "RhoPrimeLambda"}
    assert lambdas == set(range(8))
    assert len({(r.inputs["p"], r.inputs["q"], r.inputs["theta"]) for r in report.records}) == 27
    assert all(r.threshold == 1e-10 for r in report.records)
    assert not _failures(report)
    assert elapsed < 30


@pytest.mark.acceptance(2, "basis: |alpha|,|beta|,k <= 2 full rank under rho+rho' at N=12, M=8, < 60 s")
def test_basis_suite():
    report, elapsed = _run(SuiteConfig(suite="basis", cutoff=Cutoff(12, 8)))
    names = [r.name for r in report.records]
    assert any(n.startswith("basis/Sphere00") for n in names)
    assert any(n.startswith("basis/SpherePQ") for n in names)
    assert not _failures(report)
    assert elapsed < 60


@pytest.mark.acceptance(3, "identities: Sphere00 identities at range 5 (AkBl=0 at range 4), threshold 1e-12")
def test_identities_suite():
    report, _ = _run(SuiteConfig(suite="identities", tol=1e-12))
    covered = {r.name.rsplit("/", 1)[1] for r in report.records}
    assert set(ncpoly.SPHERE00_IDENTITIES) <= covered
    ranges = {r.name.rsplit("/", 1)[1]: r.inputs["range"] for r in report.records}
    assert ranges["AkBl_zero"] == 4 and ranges["A_{k+1}=sA_ks*+A_1"] == 5
    assert not _failures(report)


@pytest.mark.acceptance(4, "iso: p=q=0.5, theta=0.3, K=40, cutoff 24; roundtrip <= 1e-6, telescoping 1e-12, images 1e-8")
def test_iso_suite():
    report, _ = _run(SuiteConfig(suite="iso", p=(0.5,), q=(0.5,), theta=(0.3,), K=40, cutoff=Cutoff(24)))
    kinds = {}
    for r in report.records:
        kind = r.name.split("/")[2] if r.name.count("/") >= 2 else r.name.split("/")[1]
        kinds.setdefault(kind, []).append(r)
    assert len(kinds["roundtrip"]) == 4
    assert all(r.threshold == 1e-6 for r in kinds["roundtrip"])
    assert all(r.threshold == 1e-8 for r in kinds["images"])
    assert len(kinds["images"]) == 10
    assert [r.threshold for r in report.records if "telescoping" in r.name] == [1e-12]
    assert not _failures(report)


@pytest.mark.acceptance(5, "fiber: lemma conditions at N=3, phi.j = 0 for i,j <= 3 and |n| <= 2, h in fiber product, diagram commutes")
def test_fiber_suite():
    theta = 0.7071
    for make in (crossed.sphere00_family, crossed.crossed_family):
        for summand in ("left", "right"):
            assert crossed.lemma_gen_check(*make(theta, summand), 3)
    report, _ = _run(SuiteConfig(suite="fiber", theta=(theta,), seed=0))
    by_key = {r.name.split("/", 2)[2]: r for r in report.records}
    for key in ("phi_c_jc", "phi_d_jd", "random/fiber_check", "diagram", "jc_rank"):
        assert by_key[key].passed, key
    assert by_key["random/fiber_check"].inputs["n"] == 100
    assert not _failures(report)
    lemma, _ = _run(SuiteConfig(suite="lemma-gen", theta=(theta,)))
    assert not _failures(lemma)


@pytest.mark.acceptance(6, "ktheory: s3-quantum and s3-classical give (Z, Z), PV gives (Z, Z), SNF on 500 matrices, < 5 s")
def test_ktheory_suite():
    report, elapsed = _run(SuiteConfig(suite="ktheory", seed=0))
    got = {r.name: r.measured for r in report.records}
    assert got["ktheory/s3-quantum/G0"] == "Z" and got["ktheory/s3-quantum/G1"] == "Z"
    assert got["ktheory/s3-classical/G0"] == "Z" and got["ktheory/s3-classical/G1"] == "Z"
    assert got["ktheory/pv_toeplitz/K0"] == "Z" and got["ktheory/pv_toeplitz/K1"] == "Z"
    snf = next(r for r in report.records if r.name == "ktheory/snf_property")
    assert snf.inputs["n"] == 500 and snf.measured == 0
    assert not _failures(report)
    assert elapsed < 5


def _strip(report):
    out = report.as_dict()
    out.pop("wall_clock")
    return json.dumps(out, sort_keys=True)


@pytest.mark.acceptance(7, "determinism: identical seed and config give identical reports")
def test_determinism():
    cfg = SuiteConfig(suite="all", p=(0.3,), q=(0.7,), theta=(0.7071,), K=20, cutoff=Cutoff(12, 6), seed=7)
    a, b = cli.run(cfg), cli.run(cfg)
    assert _strip(a) == _strip(b)
