"""Presented *-algebras with canonical linear bases.

Six fixed presentations are supported: the quantum 3-sphere with quantum-disc
parameters (``SpherePQ``), the same at p = q = 0 written in generators s, t
(``Sphere00``), the quantum disc (``DiscQ``), the two Toeplitz crossed products
(``CrossedPlus``, ``CrossedMinus``) and the noncommutative torus (``Torus``).

Every element is a finite complex combination of basis monomials.  Letter
words are reduced by a local two-letter rewriting system to sorted words, and
sorted words are expanded in the linear basis.  Products of elements use
closed-form structure constants instead, so the two routes check each other.

Exponent convention: ``x_alpha`` is ``x**alpha`` for alpha >= 0 and
``(x*)**(-alpha)`` otherwise.
"""
from __future__ import annotations

import cmath
import math
import random
from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from itertools import product
from typing import Callable, Iterable, Mapping, NamedTuple, Sequence

ZERO_TOL = 1e-12


class PresentationMismatch(ValueError):
    """Operands belong to different presentations."""


class Kind(str, Enum):
    SPHERE_PQ = "SpherePQ"
    SPHERE_00 = "Sphere00"
    DISC = "DiscQ"
    CROSSED_PLUS = "CrossedPlus"
    CROSSED_MINUS = "CrossedMinus"
    TORUS = "Torus"


_GENERATORS = {
    Kind.SPHERE_PQ: ("a", "b"),
    Kind.SPHERE_00: ("s", "t"),
    Kind.DISC: ("z",),
    Kind.CROSSED_PLUS: ("s+", "u"),
    Kind.CROSSED_MINUS: ("t-", "v"),
    Kind.TORUS: ("x", "y"),
}


@dataclass(frozen=True)
class AlgebraPresentation:
    name: Kind
    p: float = 0.0
    q: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "name", Kind(self.name))
        for label, value in (("p", self.p), ("q", self.q), ("theta", self.theta)):
            if not 0.0 <= value < 1.0:
                raise ValueError(f"{label}={value} outside [0, 1)")
        if self.name is Kind.SPHERE_00 and (self.p or self.q):
            raise ValueError("Sphere00 fixes p = q = 0")
        if self.name is Kind.DISC and self.p:
            raise ValueError("DiscQ has the single parameter q")
        if self.name in (Kind.CROSSED_PLUS, Kind.CROSSED_MINUS, Kind.TORUS) and (self.p or self.q):
            raise ValueError(f"{self.name.value} depends on theta only")

    @property
    def mu(self) -> complex:
        return phase(self.theta, 1)

    @property
    def generators(self) -> tuple[str, ...]:
        return _GENERATORS[self.name]

    @property
    def letters(self) -> tuple[str, ...]:
        return tuple(x for g in self.generators for x in (g, g + "*"))


def sphere_pq(p: float, q: float, theta: float) -> AlgebraPresentation:
    return AlgebraPresentation(Kind.SPHERE_PQ, p, q, theta)


def sphere_00(theta: float) -> AlgebraPresentation:
    return AlgebraPresentation(Kind.SPHERE_00, 0.0, 0.0, theta)


def disc(q: float) -> AlgebraPresentation:
    return AlgebraPresentation(Kind.DISC, 0.0, q, 0.0)


def crossed_plus(theta: float) -> AlgebraPresentation:
    return AlgebraPresentation(Kind.CROSSED_PLUS, theta=theta)


def crossed_minus(theta: float) -> AlgebraPresentation:
    return AlgebraPresentation(Kind.CROSSED_MINUS, theta=theta)


def torus(theta: float) -> AlgebraPresentation:
    return AlgebraPresentation(Kind.TORUS, theta=theta)


def phase(theta: float, n: int) -> complex:
    """exp(2 pi i theta n), exactly 1 when theta * n is 0."""
    if theta == 0 or n == 0:
        return 1.0 + 0j
    return cmath.exp(2j * math.pi * theta * n)


# ---------------------------------------------------------------------------
# Monomials

class SphereMonomial(NamedTuple):
    """a_alpha b_beta times A^k / B^k (p, q > 0) or A_k / B_k (p = 0, q = 0).

    ``tag`` is "" for the plain monomial (then k == 0), "A" or "B" otherwise.
    """
    alpha: int
    beta: int
    tag: str = ""
    k: int = 0


class DiscMonomial(NamedTuple):
    """z_alpha Z^k for q > 0; z_alpha Z_k (Z_k = 1 - z^k z*^k, Z_0 read as 1) for q = 0."""
    alpha: int
    k: int = 0


class CrossedMonomial(NamedTuple):
    """u^m s^j (s*)^l, with (u, s) = (u, s+) or (v, t-)."""
    m: int
    j: int = 0
    l: int = 0


class TorusMonomial(NamedTuple):
    """x^m y^n."""
    m: int
    n: int = 0


Monomial = SphereMonomial | DiscMonomial | CrossedMonomial | TorusMonomial
Word = tuple[str, ...]


def _signed_power(letter: str, e: int) -> Word:
    return (letter,) * e if e >= 0 else (letter + "*",) * (-e)


def _bicyclic(x: tuple[int, int], y: tuple[int, int]) -> tuple[int, int]:
    """(s^m1 s*^n1)(s^m2 s*^n2) in the monoid with s*s = 1."""
    (m1, n1), (m2, n2) = x, y
    if n1 >= m2:
        return m1, n1 - m2 + n2
    return m1 + m2 - n1, n2


def _poly_mul(a: list[float], b: list[float]) -> list[float]:
    out = [0.0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _accumulate(target: dict, source: Mapping, scale: complex = 1.0) -> None:
    for key, c in source.items():
        target[key] = target.get(key, 0.0) + scale * c


# ---------------------------------------------------------------------------
# Backends: structure constants, rewriting rules and basis bookkeeping

class _Disc:
    """Factor generated by z with z*z = q zz* + 1 - q."""

    def __init__(self, q: float):
        self.q = q

    def valid(self, x: DiscMonomial) -> bool:
        if x.k < 0:
            return False
        return self.q > 0 or x.k == 0 or x.alpha > -x.k

    def in_ideal(self, x: DiscMonomial) -> bool:
        # span of the monomials killed by the symbol map z -> unitary
        return x.k > 0

    def word_to_basis(self, m: int, n: int) -> dict:
        """Expand z^m (z*)^n."""
        if self.q == 0:
            out = {DiscMonomial(m - n, 0): 1.0}
            if m > 0 and n > 0:
                out[DiscMonomial(m - n, n)] = -1.0
            return out
        r = min(m, n)
        poly = [1.0]
        for i in range(1, r + 1):
            poly = _poly_mul(poly, [1.0, -self.q ** (-(n - i))])
        return {DiscMonomial(m - n, i): c for i, c in enumerate(poly)}

    def _zz(self, alpha: int, gamma: int) -> list[float]:
        """z_alpha z_gamma = z_{alpha+gamma} * poly(Z) for q > 0."""
        q = self.q
        if alpha >= 0 and gamma >= 0 or alpha <= 0 and gamma <= 0:
            return [1.0]
        poly = [1.0]
        if alpha > 0:  # z^m z*^c
            m, c = alpha, -gamma
            for i in range(1, min(m, c) + 1):
                poly = _poly_mul(poly, [1.0, -q ** (-(c - i))])
        else:  # z*^c z^d
            c, d = -alpha, gamma
            for i in range(min(c, d)):
                poly = _poly_mul(poly, [1.0, -q ** (d - i)])
        return poly

    def _words(self, x: DiscMonomial) -> list[tuple[float, tuple[int, int]]]:
        base = (max(x.alpha, 0), max(-x.alpha, 0))
        if x.k == 0:
            return [(1.0, base)]
        return [(1.0, base), (-1.0, _bicyclic(base, (x.k, x.k)))]

    def mul(self, x: DiscMonomial, y: DiscMonomial) -> dict:
        if self.q == 0:
            out: dict = {}
            for c1, w1 in self._words(x):
                for c2, w2 in self._words(y):
                    _accumulate(out, self.word_to_basis(*_bicyclic(w1, w2)), c1 * c2)
            return out
        # Z^k z_gamma = q^(k gamma) z_gamma Z^k
        scale = self.q ** (x.k * y.alpha)
        poly = self._zz(x.alpha, y.alpha)
        alpha = x.alpha + y.alpha
        return {DiscMonomial(alpha, x.k + y.k + i): scale * c for i, c in enumerate(poly)}

    def adjoint(self, x: DiscMonomial) -> dict:
        if x.k == 0:
            return {DiscMonomial(-x.alpha, 0): 1.0}
        if self.q == 0:
            # Z_k s_gamma = s_gamma Z_{k - gamma}
            return {DiscMonomial(-x.alpha, x.k + x.alpha): 1.0}
        return {DiscMonomial(-x.alpha, x.k): self.q ** (-x.k * x.alpha)}

    def words(self, x: DiscMonomial, g: str) -> dict[Word, float]:
        """Letter words summing to the monomial, projection factor on the right."""
        head = _signed_power(g, x.alpha)
        if x.k == 0:
            return {head: 1.0}
        if self.q == 0:
            return {head: 1.0, head + (g,) * x.k + (g + "*",) * x.k: -1.0}
        out = {}
        for i in range(x.k + 1):
            out[head + (g, g + "*") * i] = (-1.0) ** i * math.comb(x.k, i)
        return out

    def enumerate(self, alpha: int, k: int) -> list[DiscMonomial]:
        out = []
        for kk in range(k + 1):
            for a in range(-alpha, alpha + 1):
                x = DiscMonomial(a, kk)
                if self.valid(x):
                    out.append(x)
        return out


class _Backend:
    """Shared surface of the concrete algebras."""

    kind: Kind
    gens: tuple[str, ...]
    theta: float
    unit: Monomial

    rules: dict[tuple[str, str], list[tuple[complex, Word]]]
    rank: dict[str, int]

    def mul(self, x, y) -> dict: ...
    def adjoint(self, x) -> dict: ...
    def terminal(self, word: Word) -> dict: ...
    def valid(self, x) -> bool: ...
    def render(self, x) -> str: ...
    def words(self, x) -> dict[Word, complex]: ...
    def enumerate(self, **bounds) -> list: ...

    def mu_pow(self, n: int) -> complex:
        return phase(self.theta, n)

    def _swap_rules(self, left: str, right: str, sign: int) -> None:
        """Rules  l r -> mu^(sign * deg l * deg r) r l  for all star decorations."""
        for dl, dr in product((1, -1), repeat=2):
            a = left if dl > 0 else left + "*"
            b = right if dr > 0 else right + "*"
            self.rules[(a, b)] = [(self.mu_pow(sign * dl * dr), (b, a))]

    def _counts(self, word: Word) -> dict[str, int]:
        counts: dict[str, int] = defaultdict(int)
        for letter in word:
            counts[letter] += 1
        return counts


class _Sphere(_Backend):
    """Twisted product of two disc factors modulo (ideal) x (ideal)."""

    def __init__(self, pres: AlgebraPresentation):
        self.kind = pres.name
        self.gens = pres.generators
        self.theta = pres.theta
        self.p, self.q = pres.p, pres.q
        self.da, self.db = _Disc(pres.p), _Disc(pres.q)
        self.unit = SphereMonomial(0, 0)
        g, h = self.gens
        self.rank = {g: 0, g + "*": 1, h: 2, h + "*": 3}
        self.rules = {
            (g + "*", g): self._disc_rule(g, self.p),
            (h + "*", h): self._disc_rule(h, self.q),
        }
        # b-letter before a-letter:  y x = mu^(-deg x deg y) x y
        self._swap_rules(h, g, -1)

    @staticmethod
    def _disc_rule(g: str, p: float) -> list[tuple[complex, Word]]:
        if p == 0:
            return [(1.0, ())]
        return [(p, (g, g + "*")), (1.0 - p, ())]

    def split(self, x: SphereMonomial) -> tuple[DiscMonomial, DiscMonomial]:
        return (DiscMonomial(x.alpha, x.k if x.tag == "A" else 0),
                DiscMonomial(x.beta, x.k if x.tag == "B" else 0))

    def join(self, left: Mapping, right: Mapping, scale: complex = 1.0) -> dict:
        out: dict = {}
        for x, cx in left.items():
            for y, cy in right.items():
                if x.k > 0 and y.k > 0:
                    continue  # A-type times B-type factors vanish
                if x.k > 0:
                    mono = SphereMonomial(x.alpha, y.alpha, "A", x.k)
                elif y.k > 0:
                    mono = SphereMonomial(x.alpha, y.alpha, "B", y.k)
                else:
                    mono = SphereMonomial(x.alpha, y.alpha)
                out[mono] = out.get(mono, 0.0) + scale * cx * cy
        return out

    def mul(self, x, y):
        x1, y1 = self.split(x)
        x2, y2 = self.split(y)
        scale = self.mu_pow(-x2.alpha * y1.alpha)
        return self.join(self.da.mul(x1, x2), self.db.mul(y1, y2), scale)

    def adjoint(self, x):
        xa, xb = self.split(x)
        return self.join(self.da.adjoint(xa), self.db.adjoint(xb), self.mu_pow(-xa.alpha * xb.alpha))

    def terminal(self, word):
        g, h = self.gens
        c = self._counts(word)
        return self.join(self.da.word_to_basis(c[g], c[g + "*"]),
                         self.db.word_to_basis(c[h], c[h + "*"]))

    def valid(self, x):
        if not isinstance(x, SphereMonomial) or x.tag not in ("", "A", "B"):
            return False
        if x.tag == "":
            return x.k == 0
        if x.k <= 0:
            return False
        xa, xb = self.split(x)
        return self.da.valid(xa) and self.db.valid(xb)

    def render(self, x):
        g, h = self.gens
        text = f"{g}_{{{x.alpha}}} {h}_{{{x.beta}}}"
        if x.tag:
            zero = self.p == 0 if x.tag == "A" else self.q == 0
            text += f" {x.tag}_{{{x.k}}}" if zero else f" {x.tag}^{{{x.k}}}"
        return text

    def words(self, x):
        g, h = self.gens
        xa, xb = self.split(x)
        out: dict[Word, complex] = {}
        head = _signed_power(g, x.alpha) + _signed_power(h, x.beta)
        tail = self.da.words(DiscMonomial(0, xa.k), g) if xa.k else self.db.words(DiscMonomial(0, xb.k), h)
        for w, c in tail.items():
            out[head + w] = out.get(head + w, 0.0) + c
        return out

    def enumerate(self, alpha=1, beta=1, k=1):
        out = []
        for a in range(-alpha, alpha + 1):
            for b in range(-beta, beta + 1):
                out.append(SphereMonomial(a, b))
        for tag in ("A", "B"):
            for kk in range(1, k + 1):
                for a in range(-alpha, alpha + 1):
                    for b in range(-beta, beta + 1):
                        x = SphereMonomial(a, b, tag, kk)
                        if self.valid(x):
                            out.append(x)
        return out


class _DiscAlgebra(_Backend):
    def __init__(self, pres: AlgebraPresentation):
        self.kind = pres.name
        self.gens = pres.generators
        self.theta = 0.0
        self.d = _Disc(pres.q)
        self.unit = DiscMonomial(0, 0)
        z = self.gens[0]
        self.rank = {z: 0, z + "*": 1}
        self.rules = {(z + "*", z): _Sphere._disc_rule(z, pres.q)}

    def mul(self, x, y):
        return self.d.mul(x, y)

    def adjoint(self, x):
        return self.d.adjoint(x)

    def terminal(self, word):
        z = self.gens[0]
        c = self._counts(word)
        return self.d.word_to_basis(c[z], c[z + "*"])

    def valid(self, x):
        return isinstance(x, DiscMonomial) and self.d.valid(x)

    def render(self, x):
        z = self.gens[0]
        if x.k == 0:
            return f"{z}_{{{x.alpha}}}"
        return f"{z}_{{{x.alpha}}} Z_{{{x.k}}}" if self.d.q == 0 else f"{z}_{{{x.alpha}}} Z^{{{x.k}}}"

    def words(self, x):
        return self.d.words(x, self.gens[0])

    def enumerate(self, alpha=1, k=1):
        return self.d.enumerate(alpha, k)


class _Crossed(_Backend):
    """u unitary, s isometry, s u = nu u s with nu = mu (plus) or conj(mu) (minus)."""

    def __init__(self, pres: AlgebraPresentation):
        self.kind = pres.name
        self.gens = pres.generators
        self.theta = pres.theta
        self.sign = 1 if pres.name is Kind.CROSSED_PLUS else -1
        self.unit = CrossedMonomial(0, 0, 0)
        s, u = self.gens
        self.rank = {u: 0, u + "*": 0, s: 1, s + "*": 2}
        self.rules = {
            (s + "*", s): [(1.0, ())],
            (u + "*", u): [(1.0, ())],
            (u, u + "*"): [(1.0, ())],
        }
        self._swap_rules(s, u, self.sign)

    def mul(self, x, y):
        scale = self.mu_pow(self.sign * (x.j - x.l) * y.m)
        j, l = _bicyclic((x.j, x.l), (y.j, y.l))
        return {CrossedMonomial(x.m + y.m, j, l): scale}

    def adjoint(self, x):
        return {CrossedMonomial(-x.m, x.l, x.j): self.mu_pow(-self.sign * (x.l - x.j) * x.m)}

    def terminal(self, word):
        s, u = self.gens
        c = self._counts(word)
        return {CrossedMonomial(c[u] - c[u + "*"], c[s], c[s + "*"]): 1.0}

    def valid(self, x):
        return isinstance(x, CrossedMonomial) and x.j >= 0 and x.l >= 0

    def render(self, x):
        s, u = self.gens
        return f"{u}^{{{x.m}}} {s}^{{{x.j}}} {s}*^{{{x.l}}}"

    def words(self, x):
        s, u = self.gens
        return {_signed_power(u, x.m) + (s,) * x.j + (s + "*",) * x.l: 1.0}

    def enumerate(self, m=1, j=1, l=1):
        return [CrossedMonomial(a, b, c) for a in range(-m, m + 1)
                for b in range(j + 1) for c in range(l + 1)]


class _Torus(_Backend):
    def __init__(self, pres: AlgebraPresentation):
        self.kind = pres.name
        self.gens = pres.generators
        self.theta = pres.theta
        self.unit = TorusMonomial(0, 0)
        x, y = self.gens
        self.rank = {x: 0, x + "*": 0, y: 1, y + "*": 1}
        self.rules = {}
        for g in self.gens:
            self.rules[(g + "*", g)] = [(1.0, ())]
            self.rules[(g, g + "*")] = [(1.0, ())]
        self._swap_rules(y, x, -1)

    def mul(self, a, b):
        return {TorusMonomial(a.m + b.m, a.n + b.n): self.mu_pow(-b.m * a.n)}

    def adjoint(self, a):
        return {TorusMonomial(-a.m, -a.n): self.mu_pow(-a.m * a.n)}

    def terminal(self, word):
        x, y = self.gens
        c = self._counts(word)
        return {TorusMonomial(c[x] - c[x + "*"], c[y] - c[y + "*"]): 1.0}

    def valid(self, a):
        return isinstance(a, TorusMonomial)

    def render(self, a):
        x, y = self.gens
        return f"{x}^{{{a.m}}} {y}^{{{a.n}}}"

    def words(self, a):
        x, y = self.gens
        return {_signed_power(x, a.m) + _signed_power(y, a.n): 1.0}

    def enumerate(self, m=1, n=1):
        return [TorusMonomial(a, b) for a in range(-m, m + 1) for b in range(-n, n + 1)]


_BACKENDS: dict[AlgebraPresentation, _Backend] = {}


def backend(pres: AlgebraPresentation) -> _Backend:
    try:
        return _BACKENDS[pres]
    except KeyError:
        cls = {
            Kind.SPHERE_PQ: _Sphere, Kind.SPHERE_00: _Sphere, Kind.DISC: _DiscAlgebra,
            Kind.CROSSED_PLUS: _Crossed, Kind.CROSSED_MINUS: _Crossed, Kind.TORUS: _Torus,
        }[pres.name]
        out = _BACKENDS[pres] = cls(pres)
        return out


# ---------------------------------------------------------------------------
# Elements

def _fmt_coeff(c: complex) -> str:
    re_, im = (x if abs(x) >= ZERO_TOL else 0.0 for x in (c.real, c.imag))
    return f"{re_ + 0.0:.12g}{im + 0.0:+.12g}i"


class NCElement:
    """Finite combination of basis monomials of one presentation."""

    __slots__ = ("presentation", "terms")
    __hash__ = None  # equality is up to ZERO_TOL

    def __init__(self, presentation: AlgebraPresentation, terms: Mapping | None = None):
        self.presentation = presentation
        self.terms: dict = {m: complex(c) for m, c in (terms or {}).items() if abs(c) >= ZERO_TOL}

    @classmethod
    def monomial(cls, pres: AlgebraPresentation, mono, coeff: complex = 1.0) -> "NCElement":
        if not backend(pres).valid(mono):
            raise ValueError(f"{mono!r} is not a basis monomial of {pres.name.value}")
        return cls(pres, {mono: coeff})

    @classmethod
    def scalar(cls, pres: AlgebraPresentation, c: complex = 1.0) -> "NCElement":
        return cls(pres, {backend(pres).unit: c})

    @property
    def side(self) -> str | None:
        return {Kind.CROSSED_PLUS: "plus", Kind.CROSSED_MINUS: "minus"}.get(self.presentation.name)

    def _check(self, other: "NCElement") -> None:
        if other.presentation != self.presentation:
            raise PresentationMismatch(
                f"{self.presentation.name.value}{self._params()} vs "
                f"{other.presentation.name.value}{other._params()}")

    def _params(self) -> str:
        pr = self.presentation
        return f"(p={pr.p}, q={pr.q}, theta={pr.theta})"

    def _coerce(self, other) -> "NCElement":
        if isinstance(other, NCElement):
            self._check(other)
            return other
        if isinstance(other, (int, float, complex)):
            return NCElement.scalar(self.presentation, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        _accumulate(out, other.terms)
        return NCElement(self.presentation, out)

    __radd__ = __add__

    def __neg__(self):
        return NCElement(self.presentation, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return NCElement(self.presentation, {m: c * other for m, c in self.terms.items()})
        if not isinstance(other, NCElement):
            return NotImplemented
        return multiply(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex)):
            return self * other
        return NotImplemented

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers are not defined")
        out = NCElement.scalar(self.presentation)
        for _ in range(n):
            out = out * self
        return out

    def adjoint(self) -> "NCElement":
        return adjoint(self)

    @property
    def star(self) -> "NCElement":
        return adjoint(self)

    def max_abs(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def is_zero(self, tol: float = ZERO_TOL) -> bool:
        return self.max_abs() < tol

    def isclose(self, other, tol: float = ZERO_TOL) -> bool:
        other = self._coerce(other)
        return (self - other).is_zero(tol)

    def __eq__(self, other):
        if not isinstance(other, (NCElement, int, float, complex)):
            return NotImplemented
        if isinstance(other, NCElement) and other.presentation != self.presentation:
            return False
        return self.isclose(other)

    def degree(self) -> int:
        """Longest letter word among the monomials' expansions."""
        be = backend(self.presentation)
        return max((len(w) for m in self.terms for w in be.words(m)), default=0)

    def __str__(self):
        if not self.terms:
            return "0"
        be = backend(self.presentation)
        return " + ".join(f"{_fmt_coeff(self.terms[m])} * {be.render(m)}" for m in sorted(self.terms))

    def __repr__(self):
        return f"NCElement({self.presentation.name.value}: {self})"


def multiply(e1: NCElement, e2: NCElement) -> NCElement:
    e1._check(e2)
    be = backend(e1.presentation)
    out: dict = {}
    for m1, c1 in e1.terms.items():
        for m2, c2 in e2.terms.items():
            _accumulate(out, be.mul(m1, m2), c1 * c2)
    return NCElement(e1.presentation, out)


def adjoint(e: NCElement) -> NCElement:
    be = backend(e.presentation)
    out: dict = {}
    for m, c in e.terms.items():
        _accumulate(out, be.adjoint(m), c.conjugate())
    return NCElement(e.presentation, out)


# ---------------------------------------------------------------------------
# Rewriting

def parse_word(word: str | Sequence[str]) -> Word:
    if isinstance(word, str):
        return tuple(word.split())
    return tuple(word)


def _check_letters(word: Word, pres: AlgebraPresentation) -> None:
    allowed = set(pres.letters)
    for letter in word:
        if letter not in allowed:
            raise ValueError(f"letter {letter!r} not in {pres.name.value} (allowed: {sorted(allowed)})")


def word_measure(word: Word, pres: AlgebraPresentation) -> tuple[int, int]:
    """(length, inversions); every rewrite strictly decreases it lexicographically."""
    rank = backend(pres).rank
    r = [rank[x] for x in word]
    inv = sum(1 for i in range(len(r)) for j in range(i + 1, len(r)) if r[i] > r[j])
    return len(word), inv


def redexes(word: Word, pres: AlgebraPresentation) -> list[int]:
    rules = backend(pres).rules
    return [i for i in range(len(word) - 1) if (word[i], word[i + 1]) in rules]


def rewrite_once(word: Word, pos: int, pres: AlgebraPresentation) -> list[tuple[complex, Word]]:
    rules = backend(pres).rules
    rhs = rules[(word[pos], word[pos + 1])]
    return [(c, word[:pos] + w + word[pos + 2:]) for c, w in rhs]


def reduce_words(terms: Mapping[Word, complex], pres: AlgebraPresentation,
                 strategy: str = "leftmost", rng: random.Random | None = None) -> dict[Word, complex]:
    """Apply rules until every word is sorted.

    ``strategy`` is "leftmost" (deterministic) or "random", in which case the
    word and the redex are drawn from ``rng`` at every step.
    """
    if strategy not in ("leftmost", "random"):
        raise ValueError(f"unknown strategy {strategy!r}")
    rng = rng or random.Random(0)
    todo: dict[Word, complex] = {}
    done: dict[Word, complex] = {}
    for w, c in terms.items():
        todo[w] = todo.get(w, 0.0) + c
    while todo:
        if strategy == "leftmost":
            word = next(iter(todo))
        else:
            word = rng.choice(sorted(todo))
        coeff = todo.pop(word)
        spots = redexes(word, pres)
        if not spots:
            done[word] = done.get(word, 0.0) + coeff
            continue
        pos = spots[0] if strategy == "leftmost" else rng.choice(spots)
        for c, w in rewrite_once(word, pos, pres):
            todo[w] = todo.get(w, 0.0) + coeff * c
    return done


def from_words(terms: Mapping[Word, complex], pres: AlgebraPresentation,
               strategy: str = "leftmost", rng: random.Random | None = None) -> NCElement:
    for w in terms:
        _check_letters(w, pres)
    be = backend(pres)
    out: dict = {}
    for w, c in reduce_words(terms, pres, strategy, rng).items():
        _accumulate(out, be.terminal(w), c)
    return NCElement(pres, out)


def normal_form(word: str | Sequence[str], pres: AlgebraPresentation,
                strategy: str = "leftmost", rng: random.Random | None = None) -> NCElement:
    """Basis expansion of a single letter word."""
    return from_words({parse_word(word): 1.0}, pres, strategy, rng)


def generator(pres: AlgebraPresentation, letter: str) -> NCElement:
    return normal_form((letter,), pres)


def monomial_words(e: NCElement) -> dict[Word, complex]:
    """Letter-word expansion of an element (inverse of the basis expansion)."""
    be = backend(e.presentation)
    out: dict[Word, complex] = {}
    for m, c in e.terms.items():
        _accumulate(out, be.words(m), c)
    return out


# ---------------------------------------------------------------------------
# Defining relations as free word combinations (LHS - RHS)

def defining_relations(pres: AlgebraPresentation) -> dict[str, dict[Word, complex]]:
    name = pres.name
    mu = pres.mu
    if name in (Kind.SPHERE_PQ, Kind.SPHERE_00):
        g, h = pres.generators
        gs, hs = g + "*", h + "*"
        return {
            "sphere": {(): 1.0, (g, gs): -1.0, (h, hs): -1.0, (g, gs, h, hs): 1.0},
            f"disc_{g}": {(gs, g): 1.0, (g, gs): -pres.p, (): -(1.0 - pres.p)},
            f"disc_{h}": {(hs, h): 1.0, (h, hs): -pres.q, (): -(1.0 - pres.q)},
            f"torus_{g}{h}": {(g, h): 1.0, (h, g): -mu},
            f"torus_{g}{h}*": {(g, hs): 1.0, (hs, g): -mu.conjugate()},
        }
    if name is Kind.DISC:
        z, zs = "z", "z*"
        return {"disc": {(zs, z): 1.0, (z, zs): -pres.q, (): -(1.0 - pres.q)}}
    if name in (Kind.CROSSED_PLUS, Kind.CROSSED_MINUS):
        s, u = pres.generators
        nu = mu if name is Kind.CROSSED_PLUS else mu.conjugate()
        return {
            "isometry": {(s + "*", s): 1.0, (): -1.0},
            "unitary_left": {(u + "*", u): 1.0, (): -1.0},
            "unitary_right": {(u, u + "*"): 1.0, (): -1.0},
            "rotation": {(s, u): 1.0, (u, s): -nu},
        }
    x, y = pres.generators
    return {
        "unitary_x": {(x, x + "*"): 1.0, (): -1.0},
        "unitary_x*": {(x + "*", x): 1.0, (): -1.0},
        "unitary_y": {(y, y + "*"): 1.0, (): -1.0},
        "unitary_y*": {(y + "*", y): 1.0, (): -1.0},
        "rotation": {(x, y): 1.0, (y, x): -mu},
    }


# ---------------------------------------------------------------------------
# Named identities

def _proj(pres: AlgebraPresentation, g: str, k: int) -> NCElement:
    """1 - g^k g*^k built by multiplication only."""
    gen, gst = generator(pres, g), generator(pres, g + "*")
    return 1.0 - (gen ** k) * (gst ** k)


def _sphere00_identities(pres: AlgebraPresentation) -> dict[str, Callable[[int], Iterable]]:
    s, ss, t, ts = (generator(pres, x) for x in ("s", "s*", "t", "t*"))

    def A(k):
        return _proj(pres, "s", k)

    def B(k):
        return _proj(pres, "t", k)

    def rng(n):
        return range(1, n + 1)

    return {
        "A_{k+1}=sA_ks*+A_1": lambda n: ((A(k + 1), s * A(k) * ss + A(1)) for k in rng(n)),
        "B_{k+1}=tB_kt*+B_1": lambda n: ((B(k + 1), t * B(k) * ts + B(1)) for k in rng(n)),
        "[t,A_k]=0": lambda n: ((t * A(k) - A(k) * t, 0) for k in rng(n)),
        "[s,B_k]=0": lambda n: ((s * B(k) - B(k) * s, 0) for k in rng(n)),
        "A_{k+1}s=sA_k": lambda n: ((A(k + 1) * s, s * A(k)) for k in rng(n)),
        "s*A_{k+1}=A_ks*": lambda n: ((ss * A(k + 1), A(k) * ss) for k in rng(n)),
        "B_{k+1}t=tB_k": lambda n: ((B(k + 1) * t, t * B(k)) for k in rng(n)),
        "t*B_{k+1}=B_kt*": lambda n: ((ts * B(k + 1), B(k) * ts) for k in rng(n)),
        "AkBl_zero": lambda n: ((A(k) * B(l), 0) for k in rng(n) for l in rng(n)),
    }


def _sphere_pq_identities(pres: AlgebraPresentation) -> dict[str, Callable[[int], Iterable]]:
    a, as_, b, bs = (generator(pres, x) for x in ("a", "a*", "b", "b*"))
    A = 1.0 - a * as_
    B = 1.0 - b * bs
    p, q = pres.p, pres.q

    def rng(n):
        return range(1, n + 1)

    return {
        "AB=0": lambda n: ((A ** k * B ** l, 0) for k in rng(n) for l in rng(n)),
        "Ab=bA": lambda n: ((A ** k * b, b * A ** k) for k in rng(n)),
        "Ba=aB": lambda n: ((B ** k * a, a * B ** k) for k in rng(n)),
        "Aa=paA": lambda n: ((A ** k * a, p ** k * a * A ** k) for k in rng(n)),
        "Bb=qbB": lambda n: ((B ** k * b, q ** k * b * B ** k) for k in rng(n)),
        "a*a=1-pA": lambda n: [(as_ * a, 1.0 - p * A)],
        "b*b=1-qB": lambda n: [(bs * b, 1.0 - q * B)],
    }


SPHERE00_IDENTITIES = (
    "A_{k+1}=sA_ks*+A_1", "B_{k+1}=tB_kt*+B_1", "[t,A_k]=0", "[s,B_k]=0",
    "A_{k+1}s=sA_k", "s*A_{k+1}=A_ks*", "B_{k+1}t=tB_k", "t*B_{k+1}=B_kt*", "AkBl_zero")
SPHERE_PQ_IDENTITIES = ("AB=0", "Ab=bA", "Ba=aB", "Aa=paA", "Bb=qbB", "a*a=1-pA", "b*b=1-qB")


def check_identity(id_name: str, range_: int, pres: AlgebraPresentation | None = None,
                   tol: float = ZERO_TOL) -> bool:
    """True iff the named identity holds in normal form for all indices <= range_."""
    if range_ < 1:
        raise ValueError("range must be >= 1")
    if id_name in SPHERE00_IDENTITIES:
        pres = pres or sphere_00(0.7071)
        if pres.name is not Kind.SPHERE_00:
            raise PresentationMismatch(f"{id_name} lives in Sphere00")
        table = _sphere00_identities(pres)
    elif id_name in SPHERE_PQ_IDENTITIES:
        pres = pres or sphere_pq(0.3, 0.7, 0.7071)
        if pres.name is not Kind.SPHERE_PQ:
            raise PresentationMismatch(f"{id_name} lives in SpherePQ")
        table = _sphere_pq_identities(pres)
    else:
        known = ", ".join(SPHERE00_IDENTITIES + SPHERE_PQ_IDENTITIES)
        raise ValueError(f"unknown identity {id_name!r}; known: {known}")
    for lhs, rhs in table[id_name](range_):
        if not (lhs - rhs).is_zero(tol):
            return False
    return True


# ---------------------------------------------------------------------------
# Bases and random elements

def basis_monomials(pres: AlgebraPresentation, **bounds: int) -> list:
    """Valid basis monomials within the given index bounds.

    Bounds by presentation: spheres ``alpha, beta, k``; disc ``alpha, k``;
    crossed products ``m, j, l``; torus ``m, n``.
    """
    return backend(pres).enumerate(**bounds)


def random_element(pres: AlgebraPresentation, rng: random.Random, n_terms: int = 4,
                   **bounds: int) -> NCElement:
    pool = basis_monomials(pres, **bounds)
    terms = {}
    for mono in rng.sample(pool, min(n_terms, len(pool))):
        terms[mono] = complex(round(rng.uniform(-1, 1), 6), round(rng.uniform(-1, 1), 6))
    return NCElement(pres, terms)


def random_word(pres: AlgebraPresentation, rng: random.Random, max_len: int = 8) -> Word:
    n = rng.randint(0, max_len)
    return tuple(rng.choice(pres.letters) for _ in range(n))
