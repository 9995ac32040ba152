"""Mutually inverse maps between the sphere algebras at (p, q) and at (0, 0).

``f`` sends a, b to norm-convergent series in s, t; ``g`` sends s, t to the
polar parts of a, b.  Both are realised on truncated representations, and the
compositions are compared with the identity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import ncpoly
from ._linalg import hermitian_function
from .ncpoly import NCElement
from .repn import (Cutoff, RepSpec, TruncatedOperator, build_generator, evaluate,
                   evaluate_words, rho, rho_prime, substitute)

SINGULAR_TOL = 1e-10
MAX_K = 200


class SingularityError(ArithmeticError):
    """The truncated modulus is not safely invertible."""


def default_K(p: float, tol: float = 1e-8) -> int:
    """Smallest K with 1 - sqrt(1 - p^K) < tol (approximately), capped."""
    if p == 0:
        return 1
    return min(MAX_K, max(1, math.ceil(math.log(2 * tol) / math.log(p))))


@dataclass(frozen=True)
class SeriesCoeffs:
    """p_k = sqrt(1 - p^(k+1)) - sqrt(1 - p^k) for k < K."""
    p: float
    K: int

    def __post_init__(self):
        if self.K < 1:
            raise ValueError(f"K must be >= 1, got {self.K}")
        if not 0 <= self.p < 1:
            raise ValueError(f"p={self.p} outside [0, 1)")

    @cached_property
    def values(self) -> np.ndarray:
        k = np.arange(self.K, dtype=float)
        hi = np.sqrt(1 - self.p ** (k + 1))
        lo = np.sqrt(1 - self.p ** k)
        # difference of square roots without cancellation
        return self.p ** k * (1 - self.p) / (hi + lo)

    def __getitem__(self, k: int) -> float:
        return float(self.values[k])

    def __len__(self) -> int:
        return self.K

    def partial_sum(self) -> float:
        return float(math.fsum(self.values))

    def closed_form_sum(self) -> float:
        return math.sqrt(1 - self.p ** self.K)

    def tail_bound(self) -> float:
        """Total weight of the dropped terms."""
        return 1 - math.sqrt(1 - self.p ** self.K)


def f_element(gen: str, p: float, q: float, theta: float, K: int) -> NCElement:
    """Truncated series for f(gen), gen in {a, a*, b, b*}, as a Sphere00 element."""
    pres = ncpoly.sphere_00(theta)
    if gen.rstrip("*") == "a":
        coeffs, letter = SeriesCoeffs(p, K), "s"
    elif gen.rstrip("*") == "b":
        coeffs, letter = SeriesCoeffs(q, K), "t"
    else:
        raise ValueError(f"f is defined on a, a*, b, b*; got {gen!r}")
    total = NCElement(pres)
    for k in range(K):
        c = coeffs[k]
        if c == 0:
            continue
        word = (letter,) * (k + 1) + (letter + "*",) * k
        total = total + ncpoly.normal_form(word, pres) * c
    return total.adjoint() if gen.endswith("*") else total


def f_image(gen: str, coeffs: SeriesCoeffs, spec00: RepSpec, cutoff: Cutoff) -> TruncatedOperator:
    """Operator of f(gen) under a representation of the (0, 0) algebra.

    ``coeffs`` are the series coefficients of the generator in question.
    """
    if spec00.p or spec00.q:
        raise ValueError("f lands in the (0, 0) algebra; the representation needs p = q = 0")
    p = coeffs.p if gen.rstrip("*") == "a" else 0.0
    q = coeffs.p if gen.rstrip("*") == "b" else 0.0
    return evaluate(spec00, f_element(gen, p, q, spec00.theta, coeffs.K), cutoff)


def _function_op(op: TruncatedOperator, fn, min_eig: float | None) -> TruncatedOperator:
    """fn(op) for Hermitian ``op``; a block is interior iff all its columns are."""
    try:
        mat, labels = hermitian_function(op.matrix, fn, min_eig)
    except ValueError as exc:
        raise SingularityError(str(exc)) from exc
    bad = np.unique(labels[~op.interior])
    interior = ~np.isin(labels, bad)
    return TruncatedOperator(mat, interior, op.cutoff, op.doubly_indexed)


def _inv_sqrt(op: TruncatedOperator) -> TruncatedOperator:
    return _function_op(op, lambda w: 1 / np.sqrt(w), SINGULAR_TOL)


def g_image(gen: str, spec_pq: RepSpec, cutoff: Cutoff) -> TruncatedOperator:
    """Operator of g(gen), gen in {s, s*, t, t*}, under a (p, q) representation.

    The modulus x*x is evaluated from its normal form 1 - pA, which is exact on
    the truncation, before taking the inverse square root.
    """
    letter = {"s": "a", "t": "b"}.get(gen.rstrip("*"))
    if letter is None:
        raise ValueError(f"g is defined on s, s*, t, t*; got {gen!r}")
    pres = spec_pq.presentation()
    modulus = evaluate(spec_pq, ncpoly.normal_form((letter + "*", letter), pres), cutoff)
    inv = _inv_sqrt(modulus)
    if gen.endswith("*"):
        return inv @ build_generator(spec_pq, letter + "*", cutoff)
    return build_generator(spec_pq, letter, cutoff) @ inv


def _pq_specs(p, q, theta):
    return [rho(p, q, theta), rho_prime(p, q, theta)]


def _g_letters(spec: RepSpec, cutoff: Cutoff) -> dict[str, TruncatedOperator]:
    return {x: g_image(x, spec, cutoff) for x in ("s", "s*", "t", "t*")}


def _f_letters(p, q, spec00: RepSpec, Kp: int, Kq: int, cutoff: Cutoff) -> dict[str, TruncatedOperator]:
    return {x: evaluate(spec00, f_element(x, p, q, spec00.theta, Kp if x[0] == "a" else Kq), cutoff)
            for x in ("a", "a*", "b", "b*")}


def roundtrip_residual(p: float, q: float, theta: float, K: int | None = None,
                       cutoff: Cutoff | None = None) -> dict[str, float]:
    """Interior distance between each generator and its image under g.f or f.g.

    g.f is measured under the (p, q) representations rho, rho'; f.g under the
    same families at p = q = 0.  The maximum over the two is reported.
    """
    cutoff = cutoff or Cutoff(24, 12)
    Kp = K or default_K(p)
    Kq = K or default_K(q)
    out = {"g.f(a)": 0.0, "g.f(b)": 0.0, "f.g(s)": 0.0, "f.g(t)": 0.0}

    fa = f_element("a", p, q, theta, Kp)
    fb = f_element("b", p, q, theta, Kq)
    for spec in _pq_specs(p, q, theta):
        letters = _g_letters(spec, cutoff)
        for name, elem, gen in (("g.f(a)", fa, "a"), ("g.f(b)", fb, "b")):
            diff = substitute(elem, letters) - build_generator(spec, gen, cutoff)
            out[name] = max(out[name], diff.interior_norm())

    # g(s) = a (a*a)^(-1/2) with a replaced by f(a); f(a)*f(a) is formed symbolically
    for spec in _pq_specs(0.0, 0.0, theta):
        for name, elem, gen in (("f.g(s)", fa, "s"), ("f.g(t)", fb, "t")):
            image = evaluate(spec, elem, cutoff)
            modulus = evaluate(spec, elem.adjoint() * elem, cutoff)
            diff = image @ _inv_sqrt(modulus) - build_generator(spec, gen, cutoff)
            out[name] = max(out[name], diff.interior_norm())
    return out


def relation_check_images(p: float, q: float, theta: float, K: int | None = None,
                          cutoff: Cutoff | None = None) -> dict[str, float]:
    """Defining relations of the target algebra evaluated on f- and g-images.

    Keys are prefixed with ``f:`` (relations of the (p, q) algebra on f(a),
    f(b) under the (0, 0) representations) and ``g:`` (relations of the
    (0, 0) algebra on g(s), g(t) under the (p, q) representations).
    """
    cutoff = cutoff or Cutoff(24, 12)
    Kp = K or default_K(p)
    Kq = K or default_K(q)
    out: dict[str, float] = {}

    rel_pq = ncpoly.defining_relations(ncpoly.sphere_pq(p, q, theta))
    for spec in _pq_specs(0.0, 0.0, theta):
        letters = _f_letters(p, q, spec, Kp, Kq, cutoff)
        ident = TruncatedOperator.identity(cutoff, spec.doubly_indexed)
        for name, words in rel_pq.items():
            val = evaluate_words(words, letters.__getitem__, ident).interior_norm()
            out["f:" + name] = max(out.get("f:" + name, 0.0), val)

    rel_00 = ncpoly.defining_relations(ncpoly.sphere_00(theta))
    for spec in _pq_specs(p, q, theta):
        letters = _g_letters(spec, cutoff)
        ident = TruncatedOperator.identity(cutoff, spec.doubly_indexed)
        for name, words in rel_00.items():
            val = evaluate_words(words, letters.__getitem__, ident).interior_norm()
            out["g:" + name] = max(out.get("g:" + name, 0.0), val)
    return out
