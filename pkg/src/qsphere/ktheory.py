"""Finitely generated abelian groups and exact-sequence bookkeeping.

Groups are Z^k modulo a diagonal relation lattice given by invariant
factors (0 for a free summand).  Homomorphisms are integer matrices acting on
the canonical generators.  All integer arithmetic uses Python ints stored in
numpy object arrays, so there is no overflow.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np


class PatternNotApplicable(ValueError):
    """The six-term data cannot be completed by the one-isomorphism argument."""


# ---------------------------------------------------------------------------
# Smith normal form

def _as_int_matrix(M) -> np.ndarray:
    arr = np.array(M, dtype=object)
    if arr.ndim != 2:
        arr = arr.reshape(len(M), -1) if len(M) else np.zeros((0, 0), dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for idx, v in np.ndenumerate(arr):
        if int(v) != v:
            raise ValueError(f"non-integer entry {v!r}")
        out[idx] = int(v)
    return out


def _eye(n: int) -> np.ndarray:
    out = np.zeros((n, n), dtype=object)
    for i in range(n):
        out[i, i] = 1
    return out


def _snf_full(M) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """U, D, V, U^-1, V^-1 with U M V = D.

    Each round moves the smallest nonzero entry of the active block to the
    pivot and reduces its row and column with nearest-integer quotients, so
    remainders stay below half the pivot and entries do not blow up.
    """
    A = _as_int_matrix(M).copy()
    m, n = A.shape
    U, Ui, V, Vi = _eye(m), _eye(m), _eye(n), _eye(n)

    def swap_rows(i, j):
        A[[i, j], :] = A[[j, i], :]
        U[[i, j], :] = U[[j, i], :]
        Ui[:, [i, j]] = Ui[:, [j, i]]

    def swap_cols(i, j):
        A[:, [i, j]] = A[:, [j, i]]
        V[:, [i, j]] = V[:, [j, i]]
        Vi[[i, j], :] = Vi[[j, i], :]

    def row_sub(i, j, q):
        # row_i -= q row_j
        A[i, :] -= q * A[j, :]
        U[i, :] -= q * U[j, :]
        Ui[:, j] += q * Ui[:, i]

    def col_sub(i, j, q):
        # col_i -= q col_j
        A[:, i] -= q * A[:, j]
        V[:, i] -= q * V[:, j]
        Vi[j, :] += q * Vi[i, :]

    def rnd(a: int, b: int) -> int:
        q, r = divmod(a, b)
        return q + 1 if 2 * r > abs(b) else q

    for t in range(min(m, n)):
        while True:
            nz = [(abs(A[i, j]), i, j) for i in range(t, m) for j in range(t, n) if A[i, j] != 0]
            if not nz:
                break
            _, pi, pj = min(nz)
            if pi != t:
                swap_rows(t, pi)
            if pj != t:
                swap_cols(t, pj)
            piv = A[t, t]
            for i in range(t + 1, m):
                if A[i, t]:
                    row_sub(i, t, rnd(A[i, t], piv))
            for j in range(t + 1, n):
                if A[t, j]:
                    col_sub(j, t, rnd(A[t, j], piv))
            if any(A[i, t] for i in range(t + 1, m)) or any(A[t, j] for j in range(t + 1, n)):
                continue
            bad = next((i for i in range(t + 1, m) for j in range(t + 1, n) if A[i, j] % piv), None)
            if bad is None:
                break
            row_sub(t, bad, -1)  # row_t += row_bad
        if A[t, t] < 0:
            A[t, :] = -A[t, :]
            U[t, :] = -U[t, :]
            Ui[:, t] = -Ui[:, t]
    return U, A, V, Ui, Vi


def smith_normal_form(M) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """U, D, V with U M V = D, U and V unimodular, D diagonal with d1 | d2 | ..."""
    U, D, V, _, _ = _snf_full(M)
    return U, D, V


def _diag(D: np.ndarray) -> list[int]:
    return [int(D[i, i]) for i in range(min(D.shape))]


def _rank(D: np.ndarray) -> int:
    return sum(1 for d in _diag(D) if d != 0)


def int_det(M) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    A = _as_int_matrix(M).copy()
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("square matrix required")
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k, k] == 0:
            swap = next((i for i in range(k + 1, n) if A[i, k] != 0), None)
            if swap is None:
                return 0
            A[[k, swap], :] = A[[swap, k], :]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i, j] = (A[i, j] * A[k, k] - A[i, k] * A[k, j]) // prev
        prev = A[k, k]
    return sign * int(A[n - 1, n - 1]) if n else 1


# ---------------------------------------------------------------------------
# Lattices in Z^m

def lattice_basis(gens) -> np.ndarray:
    """Column basis of the lattice spanned by the columns of ``gens``."""
    G = _as_int_matrix(gens)
    m = G.shape[0]
    if G.shape[1] == 0:
        return np.zeros((m, 0), dtype=object)
    _, D, _, Ui, _ = _snf_full(G)
    r = _rank(D)
    B = np.zeros((m, r), dtype=object)
    for i in range(r):
        B[:, i] = Ui[:, i] * D[i, i]
    return B


def lattice_contains(basis: np.ndarray, v) -> bool:
    B = _as_int_matrix(basis)
    v = np.array([int(x) for x in v], dtype=object)
    if B.shape[1] == 0:
        return all(x == 0 for x in v)
    U, D, _, _, _ = _snf_full(B)
    w = U.dot(v)
    for i in range(len(w)):
        d = D[i, i] if i < min(D.shape) else 0
        if d == 0:
            if w[i] != 0:
                return False
        elif w[i] % d != 0:
            return False
    return True


def lattices_equal(B1, B2) -> bool:
    B1, B2 = _as_int_matrix(B1), _as_int_matrix(B2)
    return (all(lattice_contains(B2, B1[:, j]) for j in range(B1.shape[1]))
            and all(lattice_contains(B1, B2[:, j]) for j in range(B2.shape[1])))


def integer_nullspace(M) -> np.ndarray:
    """Columns spanning {x in Z^n : M x = 0}."""
    A = _as_int_matrix(M)
    n = A.shape[1]
    if A.shape[0] == 0:
        return _eye(n)
    _, D, V, _, _ = _snf_full(A)
    r = _rank(D)
    return V[:, r:]


# ---------------------------------------------------------------------------
# Groups and homomorphisms

def _format_group(factors: Sequence[int]) -> str:
    parts = [f"Z/{d}" for d in factors if d > 1]
    rank = sum(1 for d in factors if d == 0)
    if rank == 1:
        parts.append("Z")
    elif rank > 1:
        parts.append(f"Z^{rank}")
    return " + ".join(parts) if parts else "0"


@dataclass(frozen=True)
class FGAbelianGroup:
    """Z/d1 + ... + Z/dk + Z^r with d1 | d2 | ... | dk, di > 1.

    Any list of non-negative integers is accepted and brought to this
    canonical form; homomorphism matrices refer to the canonical generators.
    """
    invariant_factors: tuple[int, ...] = ()

    def __post_init__(self):
        raw = [int(d) for d in self.invariant_factors]
        if any(d < 0 for d in raw):
            raise ValueError(f"invariant factors must be >= 0, got {raw}")
        torsion = [d for d in raw if d > 1]
        canon = list(torsion)
        if any(torsion[i + 1] % torsion[i] for i in range(len(torsion) - 1)):
            D = np.zeros((len(torsion), len(torsion)), dtype=object)
            for i, d in enumerate(torsion):
                D[i, i] = d
            canon = [d for d in _diag(smith_normal_form(D)[1]) if d > 1]
        canon += [0] * sum(1 for d in raw if d == 0)
        object.__setattr__(self, "invariant_factors", tuple(canon))

    @classmethod
    def free(cls, rank: int) -> "FGAbelianGroup":
        return cls((0,) * rank)

    @classmethod
    def trivial(cls) -> "FGAbelianGroup":
        return cls(())

    @property
    def ngens(self) -> int:
        return len(self.invariant_factors)

    @property
    def rank(self) -> int:
        return sum(1 for d in self.invariant_factors if d == 0)

    @property
    def torsion(self) -> tuple[int, ...]:
        return tuple(d for d in self.invariant_factors if d > 1)

    def is_trivial(self) -> bool:
        return self.ngens == 0

    def relations(self) -> np.ndarray:
        """Diagonal relation matrix; zero columns for free generators are omitted."""
        cols = [i for i, d in enumerate(self.invariant_factors) if d > 0]
        R = np.zeros((self.ngens, len(cols)), dtype=object)
        for k, i in enumerate(cols):
            R[i, k] = self.invariant_factors[i]
        return R

    def reduce(self, v) -> np.ndarray:
        out = np.array([int(x) for x in v], dtype=object)
        for i, d in enumerate(self.invariant_factors):
            if d > 0:
                out[i] %= d
        return out

    def __str__(self):
        return _format_group(self.invariant_factors)

    def __repr__(self):
        return f"FGAbelianGroup({str(self)})"


Z = FGAbelianGroup((0,))
TRIVIAL = FGAbelianGroup(())


@dataclass(frozen=True, eq=False)
class GroupHom:
    domain: FGAbelianGroup
    codomain: FGAbelianGroup
    matrix: np.ndarray = field(default=None)

    def __post_init__(self):
        m, n = self.codomain.ngens, self.domain.ngens
        if self.matrix is None:
            mat = np.zeros((m, n), dtype=object)
        else:
            mat = _as_int_matrix(self.matrix) if np.size(self.matrix) else np.zeros((m, n), dtype=object)
        if mat.shape != (m, n):
            raise ValueError(f"matrix shape {mat.shape} does not match {self.codomain} <- {self.domain} ({m}x{n})")
        for j in range(n):
            mat[:, j] = self.codomain.reduce(mat[:, j])
        for idx in np.ndindex(mat.shape):
            mat[idx] = int(mat[idx])
        # well-definedness: d_j * column_j must vanish in the codomain
        for j, d in enumerate(self.domain.invariant_factors):
            if d > 0 and any(self.codomain.reduce(mat[:, j] * d)):
                raise ValueError(f"generator {j} has order {d} but its image does not")
        object.__setattr__(self, "matrix", mat)

    @classmethod
    def zero(cls, domain: FGAbelianGroup, codomain: FGAbelianGroup) -> "GroupHom":
        return cls(domain, codomain)

    @classmethod
    def identity(cls, group: FGAbelianGroup) -> "GroupHom":
        return cls(group, group, _eye(group.ngens))

    def __call__(self, v) -> np.ndarray:
        return self.codomain.reduce(self.matrix.dot(np.array([int(x) for x in v], dtype=object)))

    def compose(self, first: "GroupHom") -> "GroupHom":
        """self after first."""
        if first.codomain != self.domain:
            raise ValueError(f"cannot compose {self.domain} <- ... with map into {first.codomain}")
        mat = self.matrix.dot(first.matrix) if first.matrix.size and self.matrix.size else None
        return GroupHom(first.domain, self.codomain, mat)

    def is_zero(self) -> bool:
        return not any(self.matrix.ravel())

    def is_isomorphism(self) -> bool:
        return kernel(self).is_trivial() and cokernel(self).is_trivial()

    def __repr__(self):
        return f"GroupHom({self.domain} -> {self.codomain}, {self.matrix.tolist()})"


def _kernel_lattice(h: GroupHom) -> np.ndarray:
    """Basis of {x in Z^n : H x in relation lattice of the codomain}."""
    n = h.domain.ngens
    R = h.codomain.relations()
    stacked = np.concatenate([h.matrix, R], axis=1) if R.shape[1] else h.matrix
    if stacked.shape[0] == 0:
        return _eye(n)
    null = integer_nullspace(stacked)
    return lattice_basis(null[:n, :])


def _image_lattice(h: GroupHom) -> np.ndarray:
    R = h.codomain.relations()
    return lattice_basis(np.concatenate([h.matrix, R], axis=1))


def _subquotient(L: np.ndarray, group: FGAbelianGroup) -> tuple[FGAbelianGroup, np.ndarray]:
    """L / (relations of ``group``) for a lattice L containing them.

    Returns the group and the matrix of its canonical generators in the
    coordinates of ``group``.
    """
    r = L.shape[1]
    R = group.relations()
    if r == 0:
        return TRIVIAL, np.zeros((group.ngens, 0), dtype=object)
    # coordinates of the relation vectors in the basis L
    U, D, V, Ui, Vi = _snf_full(L)
    coords = np.zeros((r, R.shape[1]), dtype=object)
    for k in range(R.shape[1]):
        w = U.dot(R[:, k])
        y = np.array([w[i] // D[i, i] for i in range(r)], dtype=object)
        coords[:, k] = V.dot(y) if V.shape[0] == r else y
    if R.shape[1] == 0:
        coords = np.zeros((r, 0), dtype=object)
    U2, D2, _, Ui2, _ = _snf_full(coords) if coords.shape[1] else (_eye(r), np.zeros((r, 0), dtype=object), None, _eye(r), None)
    diag = _diag(D2) + [0] * (r - min(D2.shape))
    keep = [i for i, d in enumerate(diag) if d != 1]
    gens = L.dot(Ui2)[:, keep]
    for j in range(gens.shape[1]):
        gens[:, j] = group.reduce(gens[:, j])
    return FGAbelianGroup(tuple(diag[i] for i in keep)), gens


def kernel(h: GroupHom) -> FGAbelianGroup:
    return _subquotient(_kernel_lattice(h), h.domain)[0]


def kernel_inclusion(h: GroupHom) -> GroupHom:
    group, gens = _subquotient(_kernel_lattice(h), h.domain)
    return GroupHom(group, h.domain, gens if gens.size else None)


def image(h: GroupHom) -> FGAbelianGroup:
    return _subquotient(_image_lattice(h), h.codomain)[0]


def cokernel_quotient(h: GroupHom) -> GroupHom:
    """Canonical projection from the codomain onto the cokernel."""
    R = h.codomain.relations()
    A = np.concatenate([h.matrix, R], axis=1)
    m = h.codomain.ngens
    if A.shape[1] == 0:
        A = np.zeros((m, 0), dtype=object)
    U, D, _, _, _ = _snf_full(A) if A.shape[1] else (_eye(m), np.zeros((m, 0), dtype=object), None, None, None)
    diag = _diag(D) + [0] * (m - min(D.shape))
    keep = [i for i, d in enumerate(diag) if d != 1]
    group = FGAbelianGroup(tuple(diag[i] for i in keep))
    return GroupHom(h.codomain, group, U[keep, :] if keep else None)


def cokernel(h: GroupHom) -> FGAbelianGroup:
    return cokernel_quotient(h).codomain


def check_exact(seq: Sequence[GroupHom], cyclic: bool = False) -> bool:
    """Image equals kernel at every interior node (and at the seam if cyclic)."""
    pairs = list(zip(seq, seq[1:]))
    if cyclic and seq:
        pairs.append((seq[-1], seq[0]))
    for f, g in pairs:
        if f.codomain != g.domain:
            raise ValueError(f"chain not composable: {f.codomain} vs {g.domain}")
    for f, g in pairs:
        if not lattices_equal(_image_lattice(f), _kernel_lattice(g)):
            return False
    return True


def multiplication(d: int, domain: FGAbelianGroup = Z, codomain: FGAbelianGroup = Z) -> GroupHom:
    return GroupHom(domain, codomain, [[d]])


# ---------------------------------------------------------------------------
# Exact sequences used for the K-groups

def pv_sequence(k0_rank: int, k1_rank: int, alpha_star: GroupHom) -> tuple[FGAbelianGroup, FGAbelianGroup]:
    """(K0, K1) of a crossed product by Z from the reduced six-term sequence.

    With K1 of the coefficient algebra zero, the sequence collapses to
    0 -> K1 -> Z^r --alpha_star--> Z^r -> K0 -> 0.
    """
    if k1_rank != 0:
        raise PatternNotApplicable("the reduced sequence needs K1 of the coefficient algebra to vanish")
    free = FGAbelianGroup.free(k0_rank)
    if alpha_star.domain != free or alpha_star.codomain != free:
        raise ValueError(f"alpha_star must be an endomorphism of Z^{k0_rank}, got {alpha_star}")
    return cokernel(alpha_star), kernel(alpha_star)


@dataclass(frozen=True)
class SixTermData:
    """G0 -> P0 --top--> Q0 -> G1 -> P1 --bottom--> Q1 -> G0 with G0, G1 unknown."""
    top: GroupHom
    bottom: GroupHom
    labels: dict = field(default_factory=dict, compare=False)

    @property
    def P0(self):
        return self.top.domain

    @property
    def Q0(self):
        return self.top.codomain

    @property
    def P1(self):
        return self.bottom.domain

    @property
    def Q1(self):
        return self.bottom.codomain


@dataclass(frozen=True)
class SixTermSolution:
    G0: FGAbelianGroup
    G1: FGAbelianGroup
    hexagon: tuple[GroupHom, ...]
    exact: bool
    reason: str


def solve_six_term(data: SixTermData) -> SixTermSolution:
    """Fill in G0, G1 when one horizontal map is an isomorphism.

    The arrows next to an isomorphism are forced to vanish, so the remaining
    corners are the kernel and cokernel of the other horizontal map.  The
    completed hexagon is returned and checked for exactness.
    """
    top, bottom = data.top, data.bottom
    if bottom.is_isomorphism():
        inc = kernel_inclusion(top)
        quo = cokernel_quotient(top)
        G0, G1 = inc.domain, quo.codomain
        hexagon = (inc, top, quo, GroupHom.zero(G1, data.P1), bottom, GroupHom.zero(data.Q1, G0))
        reason = "bottom map is an isomorphism: G0 = ker(top), G1 = coker(top)"
    elif top.is_isomorphism():
        inc = kernel_inclusion(bottom)
        quo = cokernel_quotient(bottom)
        G1, G0 = inc.domain, quo.codomain
        hexagon = (GroupHom.zero(G0, data.P0), top, GroupHom.zero(data.Q0, G1), inc, bottom, quo)
        reason = "top map is an isomorphism: G0 = coker(bottom), G1 = ker(bottom)"
    else:
        raise PatternNotApplicable("neither horizontal map is an isomorphism; G0, G1 are not determined")
    return SixTermSolution(G0, G1, hexagon, check_exact(hexagon, cyclic=True), reason)


# ---------------------------------------------------------------------------
# Presets

PRESETS = ("s3-quantum", "s3-classical")


def _hom(spec: dict, groups: dict) -> GroupHom:
    return GroupHom(groups[spec["domain"]], groups[spec["codomain"]], spec["matrix"])


def data_from_config(cfg: dict) -> SixTermData:
    groups = {name: FGAbelianGroup(tuple(f)) for name, f in cfg["groups"].items()}
    maps = cfg["maps"]
    return SixTermData(_hom(maps["top"], groups), _hom(maps["bottom"], groups), dict(cfg.get("generators", {})))


def load_config(path: str | Path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def load_preset(name: str) -> dict:
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}")
    text = resources.files("qsphere.presets").joinpath(f"{name}.json").read_text()
    return json.loads(text)
