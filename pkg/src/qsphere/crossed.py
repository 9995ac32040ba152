"""Toeplitz crossed products, the noncommutative torus and the fiber product.

Elements of the crossed products and of the torus are ``NCElement`` values
over the presentations ``CrossedPlus`` (s+, u), ``CrossedMinus`` (t-, v) and
``Torus`` (x, y).  The map ``h`` from the (0, 0) sphere algebra into the
fiber product is applied letter by letter and reduced by rewriting, which is
independent of the closed-form products used elsewhere.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from . import ncpoly
from .ncpoly import (AlgebraPresentation, CrossedMonomial, Kind, NCElement, PresentationMismatch,
                     TorusMonomial, phase)
from .repn import Cutoff, TruncatedOperator, build_generator, evaluate, independence_rank, rho, rho_prime

CrossedElement = NCElement
TorusElement = NCElement


class FiberViolation(RuntimeError):
    """A pair that should lie in the fiber product does not."""


def crossed_multiply(e1: NCElement, e2: NCElement) -> NCElement:
    for e in (e1, e2):
        if e.presentation.name not in (Kind.CROSSED_PLUS, Kind.CROSSED_MINUS):
            raise PresentationMismatch(f"{e.presentation.name.value} is not a crossed product")
    if e1.side != e2.side:
        raise PresentationMismatch(f"side mismatch: {e1.side} vs {e2.side}")
    return e1 * e2


def _require(e: NCElement, kind: Kind) -> None:
    if e.presentation.name is not kind:
        raise PresentationMismatch(f"expected {kind.value}, got {e.presentation.name.value}")


def pi1(e: NCElement) -> NCElement:
    """Symbol map of the plus side: s+ -> x, u -> y."""
    _require(e, Kind.CROSSED_PLUS)
    tor = ncpoly.torus(e.presentation.theta)
    out: dict = {}
    for (m, j, l), c in e.terms.items():
        # y^m x^d = mu^(-m d) x^d y^m
        key = TorusMonomial(j - l, m)
        out[key] = out.get(key, 0.0) + c * phase(tor.theta, -m * (j - l))
    return NCElement(tor, out)


def pi2(e: NCElement) -> NCElement:
    """Symbol map of the minus side: t- -> y, v -> x."""
    _require(e, Kind.CROSSED_MINUS)
    tor = ncpoly.torus(e.presentation.theta)
    out: dict = {}
    for (m, j, l), c in e.terms.items():
        key = TorusMonomial(m, j - l)
        out[key] = out.get(key, 0.0) + c
    return NCElement(tor, out)


def plus_to_minus(e: NCElement) -> NCElement:
    """Isomorphism s+ -> t-, u -> v*."""
    _require(e, Kind.CROSSED_PLUS)
    pres = ncpoly.crossed_minus(e.presentation.theta)
    return NCElement(pres, {CrossedMonomial(-m, j, l): c for (m, j, l), c in e.terms.items()})


def minus_to_plus(e: NCElement) -> NCElement:
    _require(e, Kind.CROSSED_MINUS)
    pres = ncpoly.crossed_plus(e.presentation.theta)
    return NCElement(pres, {CrossedMonomial(-m, j, l): c for (m, j, l), c in e.terms.items()})


@dataclass(frozen=True)
class FiberPair:
    f1: NCElement
    f2: NCElement

    def __post_init__(self):
        _require(self.f1, Kind.CROSSED_PLUS)
        _require(self.f2, Kind.CROSSED_MINUS)
        if self.f1.presentation.theta != self.f2.presentation.theta:
            raise PresentationMismatch("the two sides use different theta")

    @classmethod
    def scalar(cls, theta: float, c: complex = 1.0) -> "FiberPair":
        return cls(NCElement.scalar(ncpoly.crossed_plus(theta), c),
                   NCElement.scalar(ncpoly.crossed_minus(theta), c))

    @classmethod
    def zero(cls, theta: float) -> "FiberPair":
        return cls.scalar(theta, 0.0)

    @property
    def theta(self) -> float:
        return self.f1.presentation.theta

    def _lift(self, other) -> "FiberPair":
        if isinstance(other, FiberPair):
            return other
        if isinstance(other, (int, float, complex)):
            return FiberPair.scalar(self.theta, other)
        return NotImplemented

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return FiberPair(self.f1 + other.f1, self.f2 + other.f2)

    __radd__ = __add__

    def __neg__(self):
        return FiberPair(-self.f1, -self.f2)

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return FiberPair(self.f1 * other, self.f2 * other)
        if not isinstance(other, FiberPair):
            return NotImplemented
        return FiberPair(crossed_multiply(self.f1, other.f1), crossed_multiply(self.f2, other.f2))

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex)):
            return self * other
        return NotImplemented

    def adjoint(self) -> "FiberPair":
        return FiberPair(self.f1.adjoint(), self.f2.adjoint())

    def is_zero(self, tol: float = ncpoly.ZERO_TOL) -> bool:
        return self.f1.is_zero(tol) and self.f2.is_zero(tol)

    def max_abs(self) -> float:
        return max(self.f1.max_abs(), self.f2.max_abs())

    def isclose(self, other, tol: float = ncpoly.ZERO_TOL) -> bool:
        return (self - other).is_zero(tol)

    def __eq__(self, other):
        if not isinstance(other, (FiberPair, int, float, complex)):
            return NotImplemented
        return self.isclose(other)

    __hash__ = None

    def fiber_mismatch(self) -> float:
        """Largest coefficient of pi1(f1) - pi2(f2)."""
        return (pi1(self.f1) - pi2(self.f2)).max_abs()

    def __str__(self):
        return f"({self.f1}, {self.f2})"


def fiber_check(pair: FiberPair, tol: float = ncpoly.ZERO_TOL) -> bool:
    return pair.fiber_mismatch() < tol


# ---------------------------------------------------------------------------
# h and the composite maps

_H_PLUS = {"s": ("s+",), "s*": ("s+*",), "t": ("u",), "t*": ("u*",)}
_H_MINUS = {"s": ("v",), "s*": ("v*",), "t": ("t-",), "t*": ("t-*",)}


def _map_letters(e: NCElement, table: Mapping[str, tuple[str, ...]], target: AlgebraPresentation) -> NCElement:
    words: dict = {}
    for w, c in ncpoly.monomial_words(e).items():
        image = tuple(x for letter in w for x in table[letter])
        words[image] = words.get(image, 0.0) + c
    return ncpoly.from_words(words, target)


def h_image(e: NCElement, check: bool = True) -> FiberPair:
    """s -> (s+, v), t -> (u, t-), extended multiplicatively."""
    _require(e, Kind.SPHERE_00)
    th = e.presentation.theta
    pair = FiberPair(_map_letters(e, _H_PLUS, ncpoly.crossed_plus(th)),
                     _map_letters(e, _H_MINUS, ncpoly.crossed_minus(th)))
    if check and not fiber_check(pair):
        raise FiberViolation(f"h({e}) leaves the fiber product (mismatch {pair.fiber_mismatch():.3e})")
    return pair


def h1(e: NCElement) -> NCElement:
    _require(e, Kind.SPHERE_00)
    return _map_letters(e, _H_PLUS, ncpoly.crossed_plus(e.presentation.theta))


def h2(e: NCElement) -> NCElement:
    _require(e, Kind.SPHERE_00)
    return _map_letters(e, _H_MINUS, ncpoly.crossed_minus(e.presentation.theta))


def pr1(pair: FiberPair) -> NCElement:
    return pair.f1


def pr2(pair: FiberPair) -> NCElement:
    return pair.f2


def phi_d(pair: FiberPair) -> NCElement:
    return pi1(pair.f1)


def phi_c(e: NCElement) -> NCElement:
    return phi_d(h_image(e))


# ---------------------------------------------------------------------------
# Matrix units in K (x) C(S^1) and C(S^1) (x) K

@dataclass(frozen=True)
class MatrixUnitElement:
    """Finite sum of E_ij (x) w^n ("left") or w^n (x) E_ij ("right")."""
    summand: str
    entries: Mapping[tuple[int, int, int], complex] = field(default_factory=dict)

    def __post_init__(self):
        if self.summand not in ("left", "right"):
            raise ValueError(f"summand must be 'left' or 'right', got {self.summand!r}")
        clean = {}
        for (i, j, n), c in self.entries.items():
            if i < 0 or j < 0:
                raise ValueError(f"matrix indices must be >= 0, got {(i, j)}")
            if abs(c) >= ncpoly.ZERO_TOL:
                clean[(i, j, n)] = complex(c)
        object.__setattr__(self, "entries", clean)

    @classmethod
    def unit(cls, summand: str, i: int, j: int, n: int = 0) -> "MatrixUnitElement":
        return cls(summand, {(i, j, n): 1.0})

    def __mul__(self, other: "MatrixUnitElement") -> "MatrixUnitElement":
        if other.summand != self.summand:
            return MatrixUnitElement(self.summand)
        out: dict = {}
        for (i, j, n), c in self.entries.items():
            for (k, l, m), d in other.entries.items():
                if j == k:
                    out[(i, l, n + m)] = out.get((i, l, n + m), 0.0) + c * d
        return MatrixUnitElement(self.summand, out)

    def __add__(self, other: "MatrixUnitElement") -> "MatrixUnitElement":
        if other.summand != self.summand:
            raise ValueError("cannot add across summands; map each part separately")
        out = dict(self.entries)
        for key, c in other.entries.items():
            out[key] = out.get(key, 0.0) + c
        return MatrixUnitElement(self.summand, out)

    def adjoint(self) -> "MatrixUnitElement":
        return MatrixUnitElement(self.summand, {(j, i, -n): c.conjugate() for (i, j, n), c in self.entries.items()})


def _power(letter: str, n: int) -> tuple[str, ...]:
    return (letter,) * n if n >= 0 else (letter + "*",) * (-n)


def _unit_words(proj: str, other: str, i: int, j: int, n: int) -> dict:
    """Words of g^i (1 - g g*) h_n g*^j."""
    tail = _power(other, n) + (proj + "*",) * j
    head = (proj,) * i
    return {head + tail: 1.0, head + (proj, proj + "*") + tail: -1.0}


def jc_image(e: MatrixUnitElement, theta: float) -> NCElement:
    pres = ncpoly.sphere_00(theta)
    proj, other = ("s", "t") if e.summand == "left" else ("t", "s")
    words: dict = {}
    for (i, j, n), c in e.entries.items():
        for w, d in _unit_words(proj, other, i, j, n).items():
            words[w] = words.get(w, 0.0) + c * d
    return ncpoly.from_words(words, pres)


def jd_image(e: MatrixUnitElement, theta: float) -> FiberPair:
    if e.summand == "left":
        pres, proj, other = ncpoly.crossed_plus(theta), "s+", "u"
    else:
        pres, proj, other = ncpoly.crossed_minus(theta), "t-", "v"
    words: dict = {}
    for (i, j, n), c in e.entries.items():
        for w, d in _unit_words(proj, other, i, j, n).items():
            words[w] = words.get(w, 0.0) + c * d
    elem = ncpoly.from_words(words, pres)
    if e.summand == "left":
        return FiberPair(elem, NCElement(ncpoly.crossed_minus(theta)))
    return FiberPair(NCElement(ncpoly.crossed_plus(theta)), elem)


# ---------------------------------------------------------------------------
# Criterion for maps out of K (x) C(S^1)

def lemma_gen_report(e: Callable[[int, int], object], w: Callable[[int, int], object], N: int,
                     tol: float = ncpoly.ZERO_TOL) -> dict[str, bool]:
    """The three conditions for E_ij (x) 1 -> e(i, j), E_ij (x) w -> w(i, j).

    ``e`` and ``w`` return algebra elements supporting ``*``, ``adjoint``,
    subtraction and ``is_zero`` (NCElement or FiberPair).
    """
    if N < 0:
        raise ValueError("N must be >= 0")
    idx = range(N + 1)
    E = {(i, j): e(i, j) for i in idx for j in idx}
    units = all((E[i, j] * E[k, l] - (E[i, l] if j == k else E[i, l] * 0.0)).is_zero(tol)
                for i in idx for j in idx for k in idx for l in idx)
    star = all((E[i, j].adjoint() - E[j, i]).is_zero(tol) for i in idx for j in idx)
    W = w(0, 0)
    for i in range(1, N + 1):
        W = W + w(i, i)
    WsW = W.adjoint() * W
    normal = (WsW - W * W.adjoint()).is_zero(tol)
    projection = (WsW * WsW - WsW).is_zero(tol)
    commute = all((W * E[i, j] - E[i, j] * W).is_zero(tol) for i in idx for j in idx)
    absorb = all((E[i, j] * W - w(i, j)).is_zero(tol) for i in idx for j in idx)
    return {
        "matrix_units": units and star,
        "partial_unitary": normal and projection,
        "commutation": commute and absorb,
    }


def lemma_gen_check(e: Callable[[int, int], object], w: Callable[[int, int], object], N: int,
                    tol: float = ncpoly.ZERO_TOL) -> bool:
    return all(lemma_gen_report(e, w, N, tol).values())


def sphere00_family(theta: float, summand: str = "left"):
    """e_ij = j_c(E_ij (x) 1), w_ij = j_c(E_ij (x) w) (or the right summand)."""
    return (lambda i, j: jc_image(MatrixUnitElement.unit(summand, i, j, 0), theta),
            lambda i, j: jc_image(MatrixUnitElement.unit(summand, i, j, 1), theta))


def crossed_family(theta: float, summand: str = "left"):
    """The same families inside the crossed products, as plain elements of one side."""
    def pick(pair: FiberPair) -> NCElement:
        return pair.f1 if summand == "left" else pair.f2

    return (lambda i, j: pick(jd_image(MatrixUnitElement.unit(summand, i, j, 0), theta)),
            lambda i, j: pick(jd_image(MatrixUnitElement.unit(summand, i, j, 1), theta)))


def fiber_family(theta: float, summand: str = "left"):
    return (lambda i, j: jd_image(MatrixUnitElement.unit(summand, i, j, 0), theta),
            lambda i, j: jd_image(MatrixUnitElement.unit(summand, i, j, 1), theta))


# ---------------------------------------------------------------------------
# Exactness of the two short exact sequences at desk scale

def _matrix_units(i_max: int, n_max: int):
    for summand in ("left", "right"):
        for i in range(i_max + 1):
            for j in range(i_max + 1):
                for n in range(-n_max, n_max + 1):
                    yield MatrixUnitElement.unit(summand, i, j, n)


def ses_exactness_check(theta: float = 0.7071, i_max: int = 3, n_max: int = 2,
                        rank_i_max: int = 2, rank_cutoff: Cutoff | None = None) -> dict[str, float]:
    """Measured quantities for the two rows; every value should be 0 except the ranks.

    Keys ending in ``_rank`` come with a matching ``_expected`` entry.
    """
    pres = ncpoly.sphere_00(theta)
    out: dict[str, float] = {}
    phi_c_jc = phi_d_jd = jd_vs_hjc = fiber = 0.0
    for unit in _matrix_units(i_max, n_max):
        c = jc_image(unit, theta)
        d = jd_image(unit, theta)
        phi_c_jc = max(phi_c_jc, phi_c(c).max_abs())
        phi_d_jd = max(phi_d_jd, phi_d(d).max_abs())
        jd_vs_hjc = max(jd_vs_hjc, (h_image(c) - d).max_abs())
        fiber = max(fiber, d.fiber_mismatch())
    out.update(phi_c_jc=phi_c_jc, phi_d_jd=phi_d_jd, jd_minus_h_jc=jd_vs_hjc, jd_fiber_mismatch=fiber)

    s, ss, t, ts = (ncpoly.generator(pres, x) for x in ("s", "s*", "t", "t*"))
    one = NCElement.scalar(pres)
    out["A1_minus_jc_E00"] = ((one - s * ss) - jc_image(MatrixUnitElement.unit("left", 0, 0), theta)).max_abs()
    out["B1_minus_jc_E00"] = ((one - t * ts) - jc_image(MatrixUnitElement.unit("right", 0, 0), theta)).max_abs()
    fp = FiberPair.scalar(theta)
    sp_, tm = (ncpoly.generator(ncpoly.crossed_plus(theta), "s+"), ncpoly.generator(ncpoly.crossed_minus(theta), "t-"))
    left_proj = FiberPair(1.0 - sp_ * sp_.adjoint(), NCElement(ncpoly.crossed_minus(theta)))
    right_proj = FiberPair(NCElement(ncpoly.crossed_plus(theta)), 1.0 - tm * tm.adjoint())
    out["d_left_proj_minus_jd_E00"] = (left_proj - jd_image(MatrixUnitElement.unit("left", 0, 0), theta)).max_abs()
    out["d_right_proj_minus_jd_E00"] = (right_proj - jd_image(MatrixUnitElement.unit("right", 0, 0), theta)).max_abs()
    out["h_one_minus_one"] = (h_image(one) - fp).max_abs()

    # classes in the quotient satisfy the torus relations
    X, Xs, Y, Ys = (phi_c(g) for g in (s, ss, t, ts))
    tor = ncpoly.torus(theta)
    unit = NCElement.scalar(tor)
    out["quotient_unitary"] = max((X * Xs - unit).max_abs(), (Xs * X - unit).max_abs(),
                                  (Y * Ys - unit).max_abs(), (Ys * Y - unit).max_abs())
    out["quotient_rotation"] = (X * Y - Y * X * pres.mu).max_abs()
    gens_x, gens_y = ncpoly.generator(tor, "x"), ncpoly.generator(tor, "y")
    out["quotient_generators"] = max((X - gens_x).max_abs(), (Y - gens_y).max_abs())

    # injectivity of j_c on a finite family, through rho (+) rho'
    cut = rank_cutoff or Cutoff(16)
    images = [jc_image(MatrixUnitElement.unit(summand, i, j), theta)
              for summand in ("left", "right") for i in range(rank_i_max + 1) for j in range(rank_i_max + 1)]
    out["jc_rank"] = independence_rank(images, cut)
    out["jc_rank_expected"] = len(images)

    # psi(E00 (x) w) acts as the two-sided shift on the n = 0 row
    spec = rho(0.0, 0.0, theta)
    op = evaluate(spec, jc_image(MatrixUnitElement.unit("left", 0, 0, 1), theta), cut)
    out["psi_shift_residual"] = _shift_residual(op, cut)
    return out


def _shift_residual(op: TruncatedOperator, cut: Cutoff) -> float:
    """Distance from e_{m,n} -> delta_{n0} e_{m+1,0} on interior columns."""
    target = build_generator(rho(0.0, 0.0, 0.0), "b", cut).toarray()
    keep = np.zeros(target.shape[0])
    for m in range(-cut.M, cut.M + 1):
        keep[(m + cut.M) * cut.N] = 1.0
    expected = target * keep[None, :]
    diff = op.toarray() - expected
    cols = np.flatnonzero(op.interior)
    return float(np.linalg.norm(diff[:, cols], 2)) if cols.size else 0.0
