"""Command-line suite runner producing deterministic JSON or text reports."""
from __future__ import annotations

import argparse
import cmath
import json
import math
import random
import sys
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import crossed, isomap, ktheory, ncpoly, repn
from .repn import Cutoff, RepKind, RepSpec

SCHEMA = "1"
SUITES = ("relations", "basis", "identities", "iso", "fiber", "lemma-gen", "ktheory")
DEFAULT_PQ = (0.0, 0.3, 0.7)
DEFAULT_THETA = (0.0, 0.5, 0.7071)
N_LAMBDA = 8

# default thresholds; --tol replaces the primary one of each suite
TOL = {
    "relations": 1e-10,
    "identities": 1e-12,
    "iso": 1e-6,
    "telescoping": 1e-12,
    "images": 1e-8,
    "symbolic": 1e-12,
}
SERIES_TAIL = 1e-12
DEFAULT_CUTOFF = {
    "relations": Cutoff(24),
    "basis": Cutoff(12, 8),
    "iso": Cutoff(24, 12),
    "fiber": Cutoff(16),
}


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class SuiteConfig:
    suite: str = "all"
    p: tuple[float, ...] = DEFAULT_PQ
    q: tuple[float, ...] = DEFAULT_PQ
    theta: tuple[float, ...] = DEFAULT_THETA
    cutoff: Cutoff | None = None
    K: int | None = None
    tol: float | None = None
    seed: int = 0
    preset: str | None = None
    n_random: int = 100
    n_snf: int = 500

    def __post_init__(self):
        if self.suite != "all" and self.suite not in SUITES:
            raise UsageError(f"unknown suite {self.suite!r}")
        for label in ("p", "q", "theta"):
            grid = getattr(self, label)
            if not grid:
                raise UsageError(f"--{label} grid is empty")
            bad = [x for x in grid if not 0.0 <= x < 1.0]
            if bad:
                raise UsageError(f"--{label} values must lie in [0, 1), got {bad}")
        if self.tol is not None and not self.tol > 0:
            raise UsageError("--tol must be positive")
        if self.K is not None and self.K < 1:
            raise UsageError("--K must be >= 1")
        if self.K is not None and self.suite not in ("iso", "all"):
            raise UsageError("--K only applies to the iso suite")
        if self.preset is not None:
            if self.suite not in ("ktheory", "all"):
                raise UsageError("--preset only applies to the ktheory suite")
            if self.preset not in ktheory.PRESETS:
                raise UsageError(f"unknown preset {self.preset!r}; available: {', '.join(ktheory.PRESETS)}")

    def cutoff_for(self, suite: str) -> Cutoff:
        return self.cutoff or DEFAULT_CUTOFF[suite]

    def tol_for(self, key: str) -> float:
        return self.tol if self.tol is not None else TOL[key]

    def echo(self) -> dict:
        out = asdict(self)
        out["cutoff"] = None if self.cutoff is None else [self.cutoff.N, self.cutoff.M]
        for label in ("p", "q", "theta"):
            out[label] = list(out[label])
        return out


@dataclass
class Record:
    name: str
    inputs: dict
    measured: object
    threshold: object
    passed: bool

    def as_dict(self) -> dict:
        return {"name": self.name, "inputs": self.inputs, "measured": self.measured,
                "threshold": self.threshold, "pass": bool(self.passed)}


@dataclass
class VerificationReport:
    suite: str
    config: dict
    records: list[Record] = field(default_factory=list)
    wall_clock: float = 0.0

    @property
    def ok(self) -> bool:
        return all(r.passed for r in self.records)

    def summary(self) -> dict:
        passed = sum(r.passed for r in self.records)
        return {"total": len(self.records), "passed": passed, "failed": len(self.records) - passed}

    def as_dict(self) -> dict:
        records = sorted(self.records, key=lambda r: r.name)
        return {"schema": SCHEMA, "suite": self.suite, "config": self.config,
                "records": [r.as_dict() for r in records], "summary": self.summary(),
                "wall_clock": round(self.wall_clock, 3)}

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        lines = []
        for r in sorted(self.records, key=lambda r: r.name):
            flag = "PASS" if r.passed else "FAIL"
            lines.append(f"{flag}  {r.name}  measured={_show(r.measured)}  threshold={_show(r.threshold)}")
        s = self.summary()
        lines.append(f"{s['passed']}/{s['total']} checks passed in {self.wall_clock:.2f} s")
        return "\n".join(lines) + "\n"


def _show(x) -> str:
    return f"{x:.3e}" if isinstance(x, float) else str(x)


def _num(x: float) -> float:
    # 12 significant digits keep the report stable and readable
    return float(f"{float(x):.12g}")


def _tag(**kw) -> str:
    return ",".join(f"{k}={v}" for k, v in kw.items())


def _le(name: str, inputs: dict, value: float, threshold: float) -> Record:
    value = _num(value)
    return Record(name, inputs, value, threshold, value <= threshold)


def _is(name: str, inputs: dict, value, expected) -> Record:
    return Record(name, inputs, value, expected, value == expected)


def _grid(cfg: SuiteConfig):
    for p in cfg.p:
        for q in cfg.q:
            for th in cfg.theta:
                yield p, q, th


# ---------------------------------------------------------------------------
# Suites

def _lambdas() -> list[complex]:
    return [cmath.exp(2j * math.pi * k / N_LAMBDA) for k in range(N_LAMBDA)]


def suite_relations(cfg: SuiteConfig) -> list[Record]:
    cut = cfg.cutoff_for("relations")
    tol = cfg.tol_for("relations")
    out = []
    for p, q, th in _grid(cfg):
        specs = [(RepKind.RHO.value, None, repn.rho(p, q, th)),
                 (RepKind.RHO_PRIME.value, None, repn.rho_prime(p, q, th))]
        for k, lam in enumerate(_lambdas()):
            specs.append((RepKind.RHO_LAMBDA.value, k, RepSpec(RepKind.RHO_LAMBDA, p, q, th, lam)))
            specs.append((RepKind.RHO_PRIME_LAMBDA.value, k, RepSpec(RepKind.RHO_PRIME_LAMBDA, p, q, th, lam)))
        for kind, k, spec in specs:
            res = repn.relation_residuals(spec, cut)
            inputs = {"p": p, "q": q, "theta": th, "rep": kind, "cutoff": [cut.N, cut.M]}
            label = kind if k is None else f"{kind}[{k}/{N_LAMBDA}]"
            if k is not None:
                inputs["lambda_index"] = k
            for rel, val in res.items():
                out.append(_le(f"relations/{_tag(p=p, q=q, theta=th)}/{label}/{rel}", inputs, val, tol))
    return out


def _basis_record(pres, cut: Cutoff, inputs: dict, name: str) -> Record:
    monos = ncpoly.basis_monomials(pres, alpha=2, beta=2, k=2)
    rank = repn.independence_rank(monos, cut, pres)
    inputs = dict(inputs, count=len(monos), cutoff=[cut.N, cut.M])
    return _is(name, inputs, rank, len(monos))


def suite_basis(cfg: SuiteConfig) -> list[Record]:
    cut = cfg.cutoff_for("basis")
    out = []
    for th in cfg.theta:
        out.append(_basis_record(ncpoly.sphere_00(th), cut, {"theta": th}, f"basis/Sphere00/theta={th}"))
    for p, q, th in _grid(cfg):
        out.append(_basis_record(ncpoly.sphere_pq(p, q, th), cut, {"p": p, "q": q, "theta": th},
                                 f"basis/SpherePQ/{_tag(p=p, q=q, theta=th)}"))
    return out


def _identity_range(name: str) -> int:
    return 4 if name == "AkBl_zero" else 5


def suite_identities(cfg: SuiteConfig) -> list[Record]:
    tol = cfg.tol_for("identities")
    out = []
    for th in cfg.theta:
        pres = ncpoly.sphere_00(th)
        for name in ncpoly.SPHERE00_IDENTITIES:
            r = _identity_range(name)
            ok = ncpoly.check_identity(name, r, pres, tol)
            out.append(Record(f"identities/Sphere00/theta={th}/{name}", {"theta": th, "range": r},
                              ok, True, ok))
    for p, q, th in _grid(cfg):
        pres = ncpoly.sphere_pq(p, q, th)
        for name in ncpoly.SPHERE_PQ_IDENTITIES:
            ok = ncpoly.check_identity(name, 5, pres, tol)
            out.append(Record(f"identities/SpherePQ/{_tag(p=p, q=q, theta=th)}/{name}",
                              {"p": p, "q": q, "theta": th, "range": 5}, ok, True, ok))
    return out


def _series_length(p: float, q: float) -> int:
    # the image relations are checked at 1e-8, so the tail must sit well below it
    return max(isomap.default_K(p, SERIES_TAIL), isomap.default_K(q, SERIES_TAIL))


def suite_iso(cfg: SuiteConfig) -> list[Record]:
    cut = cfg.cutoff_for("iso")
    tol, tol_tel, tol_img = cfg.tol_for("iso"), TOL["telescoping"], TOL["images"]
    out = []
    for p, q, th in _grid(cfg):
        K = cfg.K or _series_length(p, q)
        inputs = {"p": p, "q": q, "theta": th, "K": K, "cutoff": [cut.N, cut.M]}
        tag = _tag(p=p, q=q, theta=th)
        for key, val in isomap.roundtrip_residual(p, q, th, K, cut).items():
            out.append(_le(f"iso/{tag}/roundtrip/{key}", inputs, val, tol))
        for key, val in isomap.relation_check_images(p, q, th, K, cut).items():
            out.append(_le(f"iso/{tag}/images/{key}", inputs, val, tol_img))
    for x in sorted(set(cfg.p) | set(cfg.q)):
        K = cfg.K or _series_length(x, x)
        c = isomap.SeriesCoeffs(x, K)
        err = abs(c.partial_sum() - c.closed_form_sum())
        out.append(_le(f"iso/telescoping/p={x}", {"p": x, "K": K}, err, tol_tel))
    return out


def _diagram_residual(theta: float) -> float:
    pres = ncpoly.sphere_00(theta)
    worst = 0.0
    for g in pres.generators:
        e = ncpoly.generator(pres, g)
        pair = crossed.h_image(e)
        worst = max(worst,
                    (crossed.pr1(pair) - crossed.h1(e)).max_abs(),
                    (crossed.pr2(pair) - crossed.h2(e)).max_abs(),
                    (crossed.pi1(crossed.h1(e)) - crossed.pi2(crossed.h2(e))).max_abs())
    return worst


def suite_fiber(cfg: SuiteConfig) -> list[Record]:
    tol = TOL["symbolic"]
    cut = cfg.cutoff_for("fiber")
    out = []
    for th in cfg.theta:
        base = {"theta": th}
        rep = crossed.ses_exactness_check(th, rank_cutoff=cut)
        expected = rep.pop("jc_rank_expected")
        rank = rep.pop("jc_rank")
        out.append(_is(f"fiber/theta={th}/jc_rank", dict(base, cutoff=[cut.N, cut.M]), rank, expected))
        for key, val in rep.items():
            out.append(_le(f"fiber/theta={th}/{key}", base, val, tol))
        out.append(_le(f"fiber/theta={th}/diagram", base, _diagram_residual(th), tol))

        rng = random.Random(cfg.seed)
        pres = ncpoly.sphere_00(th)
        worst_fiber = worst_hom = worst_iso = 0.0
        for _ in range(cfg.n_random):
            e1 = ncpoly.random_element(pres, rng, alpha=3, beta=3, k=3)
            e2 = ncpoly.random_element(pres, rng, alpha=3, beta=3, k=3)
            h1, h2 = crossed.h_image(e1, check=False), crossed.h_image(e2, check=False)
            worst_fiber = max(worst_fiber, h1.fiber_mismatch())
            worst_hom = max(worst_hom, (crossed.h_image(e1 * e2, check=False) - h1 * h2).max_abs(),
                            (crossed.h_image(e1.adjoint(), check=False) - h1.adjoint()).max_abs())
            x, y = h1.f1, h2.f1
            worst_iso = max(worst_iso,
                            (crossed.plus_to_minus(x * y) - crossed.plus_to_minus(x) * crossed.plus_to_minus(y)).max_abs(),
                            (crossed.minus_to_plus(crossed.plus_to_minus(x)) - x).max_abs())
        rin = dict(base, seed=cfg.seed, n=cfg.n_random)
        out.append(_le(f"fiber/theta={th}/random/fiber_check", rin, worst_fiber, tol))
        out.append(_le(f"fiber/theta={th}/random/h_homomorphism", rin, worst_hom, tol))
        out.append(_le(f"fiber/theta={th}/random/plus_minus_isomorphism", rin, worst_iso, tol))
    return out


def _corrupted(theta: float):
    e, w = crossed.sphere00_family(theta)
    pres = ncpoly.sphere_00(theta)
    return (lambda i, j: ncpoly.NCElement(pres) if (i, j) == (0, 1) else e(i, j)), w


def suite_lemma_gen(cfg: SuiteConfig, N: int = 3) -> list[Record]:
    out = []
    builders: list[tuple[str, Callable]] = [
        ("Sphere00", crossed.sphere00_family),
        ("Crossed", crossed.crossed_family),
        ("FiberProduct", crossed.fiber_family),
    ]
    for th in cfg.theta:
        for label, make in builders:
            for summand in ("left", "right"):
                e, w = make(th, summand)
                report = crossed.lemma_gen_report(e, w, N)
                for cond, ok in sorted(report.items()):
                    out.append(Record(f"lemma-gen/theta={th}/{label}/{summand}/{cond}",
                                      {"theta": th, "N": N}, ok, True, ok))
        e, w = _corrupted(th)
        ok = crossed.lemma_gen_check(e, w, 1)
        out.append(Record(f"lemma-gen/theta={th}/corrupted_rejected", {"theta": th, "N": 1},
                          ok, False, not ok))
    return out


def _snf_ok(M: list[list[int]]) -> bool:
    U, D, V = ktheory.smith_normal_form(M)
    Mo = np.array(M, dtype=object)
    if not (U.dot(Mo).dot(V) == D).all():
        return False
    if abs(ktheory.int_det(U)) != 1 or abs(ktheory.int_det(V)) != 1:
        return False
    diag = [int(D[i, i]) for i in range(min(D.shape))]
    off = D.copy()
    for i in range(len(diag)):
        off[i, i] = 0
    if off.any():
        return False
    nz = [d for d in diag if d]
    return (all(d > 0 for d in nz) and diag[:len(nz)] == nz
            and all(b % a == 0 for a, b in zip(nz, nz[1:])))


def random_int_matrix(rng: random.Random, max_dim: int = 8, bound: int = 20) -> list[list[int]]:
    m, n = rng.randint(1, max_dim), rng.randint(1, max_dim)
    return [[rng.randint(-bound, bound) for _ in range(n)] for _ in range(m)]


def suite_ktheory(cfg: SuiteConfig) -> list[Record]:
    out = []
    for name in ([cfg.preset] if cfg.preset else list(ktheory.PRESETS)):
        conf = ktheory.load_preset(name)
        sol = ktheory.solve_six_term(ktheory.data_from_config(conf))
        exp0 = str(ktheory.FGAbelianGroup(tuple(conf["expected"]["G0"])))
        exp1 = str(ktheory.FGAbelianGroup(tuple(conf["expected"]["G1"])))
        out.append(_is(f"ktheory/{name}/G0", {"preset": name}, str(sol.G0), exp0))
        out.append(_is(f"ktheory/{name}/G1", {"preset": name}, str(sol.G1), exp1))
        out.append(Record(f"ktheory/{name}/exact", {"preset": name}, sol.exact, True, sol.exact))

    k0, k1 = ktheory.pv_sequence(1, 0, ktheory.multiplication(0))
    out.append(_is("ktheory/pv_toeplitz/K0", {"k0_rank": 1, "k1_rank": 0, "map": 0}, str(k0), "Z"))
    out.append(_is("ktheory/pv_toeplitz/K1", {"k0_rank": 1, "k1_rank": 0, "map": 0}, str(k1), "Z"))

    rng = random.Random(cfg.seed)
    failures = sum(not _snf_ok(random_int_matrix(rng)) for _ in range(cfg.n_snf))
    out.append(_is("ktheory/snf_property", {"seed": cfg.seed, "n": cfg.n_snf, "max_dim": 8, "bound": 20},
                   failures, 0))
    return out


RUNNERS: dict[str, Callable[[SuiteConfig], list[Record]]] = {
    "relations": suite_relations,
    "basis": suite_basis,
    "identities": suite_identities,
    "iso": suite_iso,
    "fiber": suite_fiber,
    "lemma-gen": suite_lemma_gen,
    "ktheory": suite_ktheory,
}


def run(cfg: SuiteConfig) -> VerificationReport:
    t0 = time.perf_counter()
    report = VerificationReport(cfg.suite, cfg.echo())
    for name in (SUITES if cfg.suite == "all" else (cfg.suite,)):
        report.records.extend(RUNNERS[name](cfg))
    report.wall_clock = time.perf_counter() - t0
    return report


# ---------------------------------------------------------------------------
# Argument parsing

def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _cutoff(text: str) -> Cutoff:
    try:
        parts = [int(x) for x in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected N or N,M, got {text!r}") from exc
    if len(parts) not in (1, 2):
        raise argparse.ArgumentTypeError(f"expected N or N,M, got {text!r}")
    try:
        return Cutoff(*parts)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qsphere", description="Run verification suites and emit a report.")
    ap.add_argument("--suite", choices=SUITES + ("all",), default="all")
    ap.add_argument("--p", type=_floats, default=DEFAULT_PQ, help="comma-separated grid in [0, 1)")
    ap.add_argument("--q", type=_floats, default=DEFAULT_PQ, help="comma-separated grid in [0, 1)")
    ap.add_argument("--theta", type=_floats, default=DEFAULT_THETA, help="comma-separated grid in [0, 1)")
    ap.add_argument("--cutoff", type=_cutoff, default=None, help="N or N,M (suite default if omitted)")
    ap.add_argument("--K", type=int, default=None, help="series length for the iso suite")
    ap.add_argument("--tol", type=float, default=None, help="override the primary threshold of each suite")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--preset", default=None, help=f"one of {', '.join(ktheory.PRESETS)}")
    ap.add_argument("--out", default=None, help="write the report here instead of stdout")
    ap.add_argument("--format", choices=("json", "text"), default="json")
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = SuiteConfig(suite=args.suite, p=args.p, q=args.q, theta=args.theta, cutoff=args.cutoff,
                          K=args.K, tol=args.tol, seed=args.seed, preset=args.preset)
    except UsageError as exc:
        ap.error(str(exc))
    report = run(cfg)
    text = report.to_json() if args.format == "json" else report.to_text()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())
