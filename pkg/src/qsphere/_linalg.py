"""Sparse helpers: block-wise exact operator norms and Hermitian functions."""
from __future__ import annotations

from typing import Callable

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components


def _blocks(mat: sp.spmatrix) -> list[tuple[np.ndarray, np.ndarray]]:
    """(rows, cols) index sets of the connected components of the sparsity pattern."""
    mat = sp.coo_matrix(mat)
    nr, nc = mat.shape
    mask = mat.data != 0
    r, c = mat.row[mask], mat.col[mask]
    graph = sp.coo_matrix((np.ones(len(r)), (r, c + nr)), shape=(nr + nc, nr + nc))
    n_comp, labels = connected_components(graph, directed=False)
    used_rows = np.zeros(nr, bool)
    used_rows[r] = True
    used_cols = np.zeros(nc, bool)
    used_cols[c] = True
    comps: dict[int, tuple[list, list]] = {}
    for i in np.flatnonzero(used_rows):
        comps.setdefault(labels[i], ([], []))[0].append(i)
    for j in np.flatnonzero(used_cols):
        comps.setdefault(labels[j + nr], ([], []))[1].append(j)
    return [(np.array(a, int), np.array(b, int)) for a, b in comps.values()]


def operator_norm(mat: sp.spmatrix | np.ndarray) -> float:
    """Largest singular value, computed exactly on independent sparse blocks."""
    if not sp.issparse(mat):
        mat = np.asarray(mat)
        return float(np.linalg.norm(mat, 2)) if mat.size else 0.0
    mat = sp.csr_matrix(mat, copy=True)
    mat.eliminate_zeros()
    if mat.nnz == 0:
        return 0.0
    if np.diff(mat.indptr).max() <= 1 and np.bincount(mat.indices).max() <= 1:
        # weighted partial permutation
        return float(abs(mat.data).max())
    dense = mat.toarray() if mat.shape[0] * mat.shape[1] <= 4_000_000 else None
    best = 0.0
    for rows, cols in _blocks(mat):
        block = dense[np.ix_(rows, cols)] if dense is not None else mat[rows][:, cols].toarray()
        if block.shape[0] == 1 or block.shape[1] == 1:
            val = float(np.linalg.norm(block))
        else:
            val = float(scipy.linalg.svdvals(block)[0])
        best = max(best, val)
    return best


def hermitian_function(mat: sp.spmatrix, fn: Callable[[np.ndarray], np.ndarray],
                       min_eig: float | None = None) -> tuple[sp.csr_matrix, np.ndarray]:
    """fn applied to a Hermitian sparse matrix, block by block.

    Returns the result and, for every index, the label of its block.  Rows
    and columns outside every block (zero rows of ``mat``) are treated as
    1x1 zero blocks.  When ``min_eig`` is given, a ``ValueError`` is raised
    if any eigenvalue falls below it.
    """
    mat = sp.csr_matrix(mat)
    n = mat.shape[0]
    graph = (abs(mat) + abs(mat).T).tocsr()
    _, labels = connected_components(graph, directed=False)
    rows, cols, vals = [], [], []
    order = np.argsort(labels, kind="stable")
    splits = np.flatnonzero(np.diff(labels[order])) + 1
    for idx in np.split(order, splits):
        block = mat[idx][:, idx].toarray()
        block = (block + block.conj().T) / 2
        w, v = np.linalg.eigh(block)
        if min_eig is not None and w.min() < min_eig:
            raise ValueError(f"eigenvalue {w.min():.3e} below {min_eig:g}")
        out = (v * fn(w)) @ v.conj().T
        ii, jj = np.meshgrid(idx, idx, indexing="ij")
        rows.append(ii.ravel())
        cols.append(jj.ravel())
        vals.append(out.ravel())
    res = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))
    res.eliminate_zeros()
    return res, labels
