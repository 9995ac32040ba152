"""Truncated Hilbert-space representations as sparse complex matrices.

Doubly indexed bases e_{m,n} (m in [-M, M], n in [0, N)) are flattened row-major
by m then n: ``index = (m + M) * N + n``.  Singly indexed bases e_k use k in
[0, N).

Every operator carries a column mask.  A column is *interior* when the
truncated matrix reproduces the exact image of that basis vector: no shift on
the way left the box.  Masks are propagated exactly through products and sums,
so relation residuals and ranks are measured only where truncation is exact.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
import scipy.io
import scipy.linalg
import scipy.sparse as sp

from . import ncpoly
from ._linalg import operator_norm
from .ncpoly import AlgebraPresentation, Kind, NCElement, Word, phase

RANK_TOL = 1e-8


class RepKind(str, Enum):
    RHO_LAMBDA = "RhoLambda"
    RHO_PRIME_LAMBDA = "RhoPrimeLambda"
    RHO = "Rho"
    RHO_PRIME = "RhoPrime"
    DISC_PI = "DiscPi"
    RHO_BAR = "RhoBar"
    RHO_BAR_PRIME = "RhoBarPrime"


_DOUBLE = {RepKind.RHO, RepKind.RHO_PRIME, RepKind.RHO_BAR, RepKind.RHO_BAR_PRIME}
_SPHERE = {RepKind.RHO_LAMBDA, RepKind.RHO_PRIME_LAMBDA, RepKind.RHO, RepKind.RHO_PRIME}


class RepresentationMismatch(ValueError):
    """Element and representation belong to different algebras."""


class CutoffTooSmall(ValueError):
    """An operator has no usable interior column at the chosen cutoff."""


@dataclass(frozen=True)
class RepSpec:
    kind: RepKind
    p: float = 0.0
    q: float = 0.0
    theta: float = 0.0
    lam: complex = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", RepKind(self.kind))
        object.__setattr__(self, "lam", complex(self.lam))
        if abs(abs(self.lam) - 1.0) > 1e-12:
            raise ValueError(f"lambda must lie on the unit circle, got {self.lam}")
        for label, value in (("p", self.p), ("q", self.q), ("theta", self.theta)):
            if not 0.0 <= value < 1.0:
                raise ValueError(f"{label}={value} outside [0, 1)")

    @property
    def doubly_indexed(self) -> bool:
        return self.kind in _DOUBLE

    def presentation(self) -> AlgebraPresentation:
        """Default algebra represented (SpherePQ for the sphere families)."""
        if self.kind in _SPHERE:
            return ncpoly.sphere_pq(self.p, self.q, self.theta)
        if self.kind is RepKind.DISC_PI:
            return ncpoly.disc(self.q)
        if self.kind is RepKind.RHO_BAR:
            return ncpoly.crossed_plus(self.theta)
        return ncpoly.crossed_minus(self.theta)

    def accepts(self, pres: AlgebraPresentation) -> bool:
        if pres == self.presentation():
            return True
        return (self.kind in _SPHERE and pres.name is Kind.SPHERE_00
                and self.p == 0 and self.q == 0 and pres.theta == self.theta)


def rho(p: float, q: float, theta: float) -> RepSpec:
    return RepSpec(RepKind.RHO, p, q, theta)


def rho_prime(p: float, q: float, theta: float) -> RepSpec:
    return RepSpec(RepKind.RHO_PRIME, p, q, theta)


@dataclass(frozen=True)
class Cutoff:
    N: int
    M: int | None = None

    def __post_init__(self):
        if self.M is None:
            object.__setattr__(self, "M", self.N)
        if self.N < 1 or self.M < 1:
            raise ValueError(f"cutoff must be positive, got N={self.N}, M={self.M}")

    def dim(self, doubly_indexed: bool) -> int:
        return (2 * self.M + 1) * self.N if doubly_indexed else self.N

    def grow(self, by: int) -> "Cutoff":
        return Cutoff(self.N + by, self.M + by)


@dataclass(frozen=True, eq=False)
class TruncatedOperator:
    matrix: sp.csr_matrix
    interior: np.ndarray
    cutoff: Cutoff
    doubly_indexed: bool

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    @property
    def dims(self) -> tuple[int, int]:
        return self.matrix.shape

    @classmethod
    def identity(cls, cutoff: Cutoff, doubly_indexed: bool) -> "TruncatedOperator":
        n = cutoff.dim(doubly_indexed)
        return cls(sp.identity(n, dtype=complex, format="csr"), np.ones(n, bool), cutoff, doubly_indexed)

    def _compatible(self, other: "TruncatedOperator") -> None:
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")

    def __matmul__(self, other: "TruncatedOperator") -> "TruncatedOperator":
        self._compatible(other)
        pattern = (other.matrix != 0).astype(np.int32)
        leaks = pattern.T @ (~self.interior).astype(np.int32)
        interior = other.interior & (np.asarray(leaks).ravel() == 0)
        return TruncatedOperator((self.matrix @ other.matrix).tocsr(), interior, self.cutoff, self.doubly_indexed)

    def __add__(self, other: "TruncatedOperator") -> "TruncatedOperator":
        self._compatible(other)
        return TruncatedOperator((self.matrix + other.matrix).tocsr(), self.interior & other.interior,
                                 self.cutoff, self.doubly_indexed)

    def __sub__(self, other: "TruncatedOperator") -> "TruncatedOperator":
        return self + other * -1.0

    def __mul__(self, c: complex) -> "TruncatedOperator":
        return TruncatedOperator((self.matrix * c).tocsr(), self.interior, self.cutoff, self.doubly_indexed)

    __rmul__ = __mul__

    def restricted(self) -> sp.csr_matrix:
        """The interior columns only."""
        return self.matrix[:, np.flatnonzero(self.interior)]

    def interior_norm(self) -> float:
        return operator_norm(self.restricted())

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def index(self, m: int, n: int = 0) -> int:
        return flat_index(self.cutoff, m, n) if self.doubly_indexed else n


def flat_index(cutoff: Cutoff, m: int, n: int) -> int:
    return (m + cutoff.M) * cutoff.N + n


def _grid(cutoff: Cutoff, doubly_indexed: bool) -> tuple[np.ndarray, np.ndarray]:
    if doubly_indexed:
        m, n = np.meshgrid(np.arange(-cutoff.M, cutoff.M + 1), np.arange(cutoff.N), indexing="ij")
        return m.ravel(), n.ravel()
    return np.zeros(cutoff.N, int), np.arange(cutoff.N)


def _shift(cutoff: Cutoff, doubly_indexed: bool, dm: int, dn: int,
           weight: Callable[[int, int], complex]) -> TruncatedOperator:
    """e_{m,n} -> weight(m, n) e_{m+dm, n+dn}; a zero weight is an exact zero."""
    ms, ns = _grid(cutoff, doubly_indexed)
    dim = len(ms)
    rows, cols, vals = [], [], []
    interior = np.ones(dim, bool)
    for j, (m, n) in enumerate(zip(ms.tolist(), ns.tolist())):
        w = weight(m, n)
        if w == 0:
            continue
        mm, nn = m + dm, n + dn
        if nn < 0 or nn >= cutoff.N or (doubly_indexed and abs(mm) > cutoff.M):
            interior[j] = False
            continue
        rows.append(flat_index(cutoff, mm, nn) if doubly_indexed else nn)
        cols.append(j)
        vals.append(w)
    mat = sp.csr_matrix((np.array(vals, complex), (rows, cols)), shape=(dim, dim))
    return TruncatedOperator(mat, interior, cutoff, doubly_indexed)


def _generator_table(spec: RepSpec) -> dict[str, tuple[int, int, Callable[[int, int], complex]]]:
    p, q, th, lam = spec.p, spec.q, spec.theta, spec.lam

    def up(x):
        return lambda m, n: math.sqrt(1 - x ** (n + 1))

    def down(x):
        return lambda m, n: math.sqrt(1 - x ** n)

    def one(m, n):
        return 1.0

    kind = spec.kind
    if kind is RepKind.RHO:
        return {
            "a": (0, 1, lambda m, n: phase(th, m) * math.sqrt(1 - p ** (n + 1))),
            "a*": (0, -1, lambda m, n: phase(th, -m) * math.sqrt(1 - p ** n)),
            "b": (1, 0, one),
            "b*": (-1, 0, one),
        }
    if kind is RepKind.RHO_PRIME:
        return {
            "a": (1, 0, one),
            "a*": (-1, 0, one),
            "b": (0, 1, lambda m, n: phase(th, -m) * math.sqrt(1 - q ** (n + 1))),
            "b*": (0, -1, lambda m, n: phase(th, m) * math.sqrt(1 - q ** n)),
        }
    if kind is RepKind.RHO_LAMBDA:
        return {
            "a": (0, 1, up(p)),
            "a*": (0, -1, down(p)),
            "b": (0, 0, lambda m, n: lam * phase(th, -n)),
            "b*": (0, 0, lambda m, n: lam.conjugate() * phase(th, n)),
        }
    if kind is RepKind.RHO_PRIME_LAMBDA:
        return {
            "a": (0, 0, lambda m, n: lam * phase(th, n)),
            "a*": (0, 0, lambda m, n: lam.conjugate() * phase(th, -n)),
            "b": (0, 1, up(q)),
            "b*": (0, -1, down(q)),
        }
    if kind is RepKind.DISC_PI:
        return {"z": (0, 1, up(q)), "z*": (0, -1, down(q))}
    if kind is RepKind.RHO_BAR:
        return {
            "s+": (0, 1, lambda m, n: phase(th, m)),
            "s+*": (0, -1, lambda m, n: phase(th, -m) if n > 0 else 0),
            "u": (1, 0, one),
            "u*": (-1, 0, one),
        }
    return {
        "t-": (0, 1, lambda m, n: phase(th, -m)),
        "t-*": (0, -1, lambda m, n: phase(th, m) if n > 0 else 0),
        "v": (1, 0, one),
        "v*": (-1, 0, one),
    }


_SPHERE00_LETTERS = {"s": "a", "s*": "a*", "t": "b", "t*": "b*"}


@functools.lru_cache(maxsize=4096)
def build_generator(spec: RepSpec, letter: str, cutoff: Cutoff) -> TruncatedOperator:
    """Truncated matrix of one (possibly starred) generator letter.

    For the sphere families the Sphere00 letters s, t are accepted as aliases
    of a, b (the representation must then have p = q = 0).
    """
    table = _generator_table(spec)
    if spec.kind in _SPHERE and letter in _SPHERE00_LETTERS:
        if spec.p or spec.q:
            raise RepresentationMismatch(f"letter {letter!r} needs p = q = 0, got p={spec.p}, q={spec.q}")
        letter = _SPHERE00_LETTERS[letter]
    if letter not in table:
        raise ValueError(f"letter {letter!r} invalid for {spec.kind.value}; expected one of {sorted(table)}")
    dm, dn, weight = table[letter]
    return _shift(cutoff, spec.doubly_indexed, dm, dn, weight)


def evaluate_words(words: Mapping[Word, complex], letter_op: Callable[[str], TruncatedOperator],
                   identity: TruncatedOperator) -> TruncatedOperator:
    """Linear combination of letter-word products, memoised on word suffixes."""
    memo: dict[Word, TruncatedOperator] = {(): identity}

    def prod(w: Word) -> TruncatedOperator:
        if w not in memo:
            memo[w] = letter_op(w[0]) @ prod(w[1:])
        return memo[w]

    total = identity * 0.0
    for w, c in words.items():
        total = total + prod(w) * c
    return total


def evaluate(spec: RepSpec, e: NCElement, cutoff: Cutoff) -> TruncatedOperator:
    if not spec.accepts(e.presentation):
        raise RepresentationMismatch(
            f"{spec.kind.value}(p={spec.p}, q={spec.q}, theta={spec.theta}) cannot represent "
            f"{e.presentation.name.value}(p={e.presentation.p}, q={e.presentation.q}, theta={e.presentation.theta})")
    ident = TruncatedOperator.identity(cutoff, spec.doubly_indexed)
    return evaluate_words(ncpoly.monomial_words(e), lambda x: build_generator(spec, x, cutoff), ident)


def evaluate_monomial(spec: RepSpec, pres: AlgebraPresentation, mono, cutoff: Cutoff) -> TruncatedOperator:
    return evaluate(spec, NCElement.monomial(pres, mono), cutoff)


def substitute(e: NCElement, letter_ops: Mapping[str, TruncatedOperator]) -> TruncatedOperator:
    """Evaluate ``e`` with its letters replaced by arbitrary operators."""
    any_op = next(iter(letter_ops.values()))
    ident = TruncatedOperator.identity(any_op.cutoff, any_op.doubly_indexed)
    return evaluate_words(ncpoly.monomial_words(e), letter_ops.__getitem__, ident)


def relation_residuals(spec: RepSpec, cutoff: Cutoff,
                       pres: AlgebraPresentation | None = None) -> dict[str, float]:
    """Interior operator norm of LHS - RHS for each defining relation."""
    pres = pres or spec.presentation()
    if not spec.accepts(pres):
        raise RepresentationMismatch(f"{spec.kind.value} does not represent {pres.name.value}")
    ident = TruncatedOperator.identity(cutoff, spec.doubly_indexed)
    out = {}
    for name, words in ncpoly.defining_relations(pres).items():
        op = evaluate_words(words, lambda x: build_generator(spec, x, cutoff), ident)
        out[name] = op.interior_norm()
    return out


def default_specs(pres: AlgebraPresentation) -> list[RepSpec]:
    """Representations whose direct sum is used for faithfulness checks."""
    if pres.name in (Kind.SPHERE_PQ, Kind.SPHERE_00):
        return [rho(pres.p, pres.q, pres.theta), rho_prime(pres.p, pres.q, pres.theta)]
    if pres.name is Kind.DISC:
        return [RepSpec(RepKind.DISC_PI, q=pres.q)]
    if pres.name is Kind.CROSSED_PLUS:
        return [RepSpec(RepKind.RHO_BAR, theta=pres.theta)]
    if pres.name is Kind.CROSSED_MINUS:
        return [RepSpec(RepKind.RHO_BAR_PRIME, theta=pres.theta)]
    raise RepresentationMismatch(f"no representation available for {pres.name.value}")


def independence_rank(items: Sequence, cutoff: Cutoff, pres: AlgebraPresentation | None = None,
                      specs: Sequence[RepSpec] | None = None, tol: float = RANK_TOL) -> int:
    """Numerical rank of the images of monomials (or elements) under a direct sum.

    Each item's image is vectorised over the columns interior for every item,
    concatenated across the representations, and normalised; the rank counts
    singular values above ``tol``.
    """
    if not items:
        return 0
    elems = []
    for x in items:
        if isinstance(x, NCElement):
            elems.append(x)
        else:
            if pres is None:
                raise ValueError("a presentation is required for bare monomials")
            elems.append(NCElement.monomial(pres, x))
    pres = elems[0].presentation
    specs = list(specs) if specs is not None else default_specs(pres)
    ops = [[evaluate(spec, e, cutoff) for spec in specs] for e in elems]
    masks = [np.logical_and.reduce([row[i].interior for row in ops]) for i in range(len(specs))]
    vectors = []
    for x, e, row in zip(items, elems, ops):
        parts = [sp.csr_matrix(op.matrix[:, np.flatnonzero(mask)]).reshape(1, -1)
                 for op, mask in zip(row, masks)]
        vec = sp.hstack(parts).tocsr()
        norm = np.sqrt((abs(vec.data) ** 2).sum())
        if norm < tol:
            raise CutoffTooSmall(
                f"{x!r} has no nonzero interior column at N={cutoff.N}, M={cutoff.M}; increase the cutoff")
        vectors.append(vec / norm)
    stacked = sp.vstack(vectors).tocsr()
    support = np.unique(stacked.indices)
    dense = stacked[:, support].toarray()
    sv = scipy.linalg.svdvals(dense)
    return int((sv > tol).sum())


def norm_estimates(e: NCElement, spec: RepSpec, cutoffs: Iterable[int | Cutoff]) -> list[float]:
    """Norms of the exact compressions of ``e`` to growing boxes.

    Each compression is computed by evaluating on a box enlarged by the word
    length, where every column of the inner box is exact, then cutting back.
    """
    out = []
    pad = max(e.degree(), 1)
    for c in cutoffs:
        cut = c if isinstance(c, Cutoff) else Cutoff(c)
        big = cut.grow(pad)
        op = evaluate(spec, e, big)
        if spec.doubly_indexed:
            keep = np.array([flat_index(big, m, n) for m in range(-cut.M, cut.M + 1) for n in range(cut.N)])
        else:
            keep = np.arange(cut.N)
        out.append(operator_norm(op.matrix[keep][:, keep]))
    return out


def norm_estimate(e: NCElement, spec: RepSpec, cutoffs: Iterable[int | Cutoff]) -> float:
    return norm_estimates(e, spec, cutoffs)[-1]


def export_matrix_market(op: TruncatedOperator, path) -> None:
    scipy.io.mmwrite(str(path), sp.coo_matrix(op.matrix), field="complex", symmetry="general")
